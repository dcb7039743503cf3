use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Chart, VALIDATION_TOL};
use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// A point `(Q, P)` of the constraint manifold `M`: `Q̄P − QP̄ = 2i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QPPoint {
    q: Complex64,
    p: Complex64,
}

impl QPPoint {
    pub fn new(q: Complex64, p: Complex64) -> Result<Self> {
        Self::with_tolerance(q, p, VALIDATION_TOL)
    }

    /// Validates with a residual tolerance scaled by `max(1, |Q||P|)`.
    pub fn with_tolerance(q: Complex64, p: Complex64, tol: f64) -> Result<Self> {
        let pt = Self { q, p };
        let residual = pt.constraint_residual();
        let scale = (q.norm() * p.norm()).max(1.0);
        if residual.is_finite() && residual <= tol * scale {
            Ok(pt)
        } else {
            Err(Error::InvalidPoint {
                chart: Chart::M,
                residual,
                tol: tol * scale,
            })
        }
    }

    pub fn new_unchecked(q: Complex64, p: Complex64) -> Self {
        Self { q, p }
    }

    /// `(1, i)`: the equal-uncertainty state with `σ_q = σ_p = ħ/2`.
    pub fn vacuum() -> Self {
        Self { q: Complex64::new(1.0, 0.0), p: I }
    }

    /// The representative with `Q` real and positive lying over a Siegel point.
    pub fn from_siegel(c: &SiegelPoint) -> Self {
        let q = Complex64::new(1.0 / c.im().sqrt(), 0.0);
        Self { q, p: c.c() * q }
    }

    pub fn q(&self) -> Complex64 {
        self.q
    }

    pub fn p(&self) -> Complex64 {
        self.p
    }

    /// `Im(Q̄P)`, equal to 1 on `M`.
    pub fn symplectic_product(&self) -> f64 {
        (self.q.conj() * self.p).im
    }

    /// `|Q̄P − QP̄ − 2i|`.
    pub fn constraint_residual(&self) -> f64 {
        (self.q.conj() * self.p - self.q * self.p.conj() - 2.0 * I).norm()
    }

    /// Rescales `(Q, P)` by a real factor so that the constraint holds again.
    pub fn renormalized(&self) -> Self {
        let s = self.symplectic_product();
        if s > 0.0 {
            let f = 1.0 / s.sqrt();
            Self {
                q: self.q * f,
                p: self.p * f,
            }
        } else {
            *self
        }
    }

    /// The `U(1)` action `(Q, P) ↦ e^{iφ}(Q, P)`.
    pub fn with_phase(&self, phi: f64) -> Self {
        let u = Complex64::from_polar(1.0, phi);
        Self {
            q: u * self.q,
            p: u * self.p,
        }
    }
}

/// A point of the hyperboloid `(x⁰)² + (x¹)² − (x²)² − (x³)² = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct H3Point {
    pub(crate) x: [f64; 4],
}

impl H3Point {
    pub fn new(x: [f64; 4]) -> Result<Self> {
        let pt = Self { x };
        let residual = pt.constraint_residual();
        let scale = x.iter().map(|v| v * v).sum::<f64>().max(1.0);
        if residual.is_finite() && residual <= VALIDATION_TOL * scale {
            Ok(pt)
        } else {
            Err(Error::InvalidPoint {
                chart: Chart::H3,
                residual,
                tol: VALIDATION_TOL * scale,
            })
        }
    }

    pub fn new_unchecked(x: [f64; 4]) -> Self {
        Self { x }
    }

    pub fn coords(&self) -> [f64; 4] {
        self.x
    }

    pub fn quadric(&self) -> f64 {
        let [x0, x1, x2, x3] = self.x;
        x0 * x0 + x1 * x1 - x2 * x2 - x3 * x3
    }

    pub fn constraint_residual(&self) -> f64 {
        (self.quadric() - 1.0).abs()
    }

    pub fn negated(&self) -> Self {
        Self {
            x: self.x.map(|v| -v),
        }
    }
}

/// A point of the upper sheet of `(y¹)² − (y²)² − (y³)² = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct H2Point {
    pub(crate) y: [f64; 3],
}

impl H2Point {
    pub fn new(y1: f64, y2: f64, y3: f64) -> Result<Self> {
        let pt = Self { y: [y1, y2, y3] };
        let residual = pt.constraint_residual();
        let scale = (y1 * y1).max(1.0);
        let on_sheet = residual.is_finite() && residual <= VALIDATION_TOL * scale;
        if on_sheet && y1 >= 1.0 - VALIDATION_TOL {
            Ok(pt)
        } else {
            Err(Error::InvalidPoint {
                chart: Chart::H2,
                residual: if y1 < 1.0 - VALIDATION_TOL {
                    residual.max(1.0 - y1)
                } else {
                    residual
                },
                tol: VALIDATION_TOL * scale,
            })
        }
    }

    pub fn new_unchecked(y1: f64, y2: f64, y3: f64) -> Self {
        Self { y: [y1, y2, y3] }
    }

    /// The equal-uncertainty vertex `(1, 0, 0)`.
    pub fn vertex() -> Self {
        Self { y: [1.0, 0.0, 0.0] }
    }

    pub fn coords(&self) -> [f64; 3] {
        self.y
    }

    pub fn y1(&self) -> f64 {
        self.y[0]
    }

    pub fn y2(&self) -> f64 {
        self.y[1]
    }

    pub fn y3(&self) -> f64 {
        self.y[2]
    }

    pub fn quadric(&self) -> f64 {
        let [y1, y2, y3] = self.y;
        y1 * y1 - y2 * y2 - y3 * y3
    }

    pub fn constraint_residual(&self) -> f64 {
        (self.quadric() - 1.0).abs()
    }
}

/// Squeezing parameters: `y = (cosh τ, sinh τ cos φ, sinh τ sin φ)`.
///
/// At the vertex (`τ = 0`) the angle is undefined and fixed to `φ = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezeCoords {
    pub tau: f64,
    pub phi: f64,
}

impl SqueezeCoords {
    /// Normalizes `φ` into `[0, 2π)` and reflects negative `τ`.
    pub fn new(tau: f64, phi: f64) -> Self {
        let (tau, phi) = if tau < 0.0 { (-tau, phi + PI) } else { (tau, phi) };
        Self {
            tau,
            phi: normalize_angle(phi),
        }
    }

    pub fn to_h2(&self) -> H2Point {
        let (s, c) = self.phi.sin_cos();
        let sh = self.tau.sinh();
        H2Point::new_unchecked(self.tau.cosh(), sh * c, sh * s)
    }
}

pub(crate) fn normalize_angle(phi: f64) -> f64 {
    let r = phi.rem_euclid(TAU);
    // rem_euclid can round up to exactly 2π for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// A point of the Poincaré disk `|ζ| < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskPoint {
    pub(crate) zeta: Complex64,
}

impl DiskPoint {
    pub fn new(zeta: Complex64) -> Result<Self> {
        let r = zeta.norm();
        if r.is_finite() && r < 1.0 {
            Ok(Self { zeta })
        } else {
            Err(Error::InvalidPoint {
                chart: Chart::Disk,
                residual: r - 1.0,
                tol: 0.0,
            })
        }
    }

    pub fn new_unchecked(zeta: Complex64) -> Self {
        Self { zeta }
    }

    pub fn zeta(&self) -> Complex64 {
        self.zeta
    }

    /// How far the point lies outside the open disk (0 when valid).
    pub fn constraint_residual(&self) -> f64 {
        (self.zeta.norm() - 1.0).max(0.0)
    }
}

/// A point of the Siegel upper half plane `Im 𝒞 > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiegelPoint {
    pub(crate) c: Complex64,
}

impl SiegelPoint {
    pub fn new(c: Complex64) -> Result<Self> {
        if c.re.is_finite() && c.im.is_finite() && c.im > 0.0 {
            Ok(Self { c })
        } else {
            Err(Error::InvalidPoint {
                chart: Chart::Siegel,
                residual: -c.im,
                tol: 0.0,
            })
        }
    }

    pub fn new_unchecked(c: Complex64) -> Self {
        Self { c }
    }

    pub fn c(&self) -> Complex64 {
        self.c
    }

    pub fn re(&self) -> f64 {
        self.c.re
    }

    pub fn im(&self) -> f64 {
        self.c.im
    }

    /// `𝒞̃ = 1/𝒞 = Q/P`, which lies in the lower half plane.
    pub fn ctilde(&self) -> Complex64 {
        self.c.inv()
    }

    pub fn constraint_residual(&self) -> f64 {
        (-self.c.im).max(0.0)
    }
}

/// Second moments `(σ_q, σ_p, σ_qp)` (variances and symmetrized covariance).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovarianceTriple {
    pub sq: f64,
    pub sp: f64,
    pub sqp: f64,
}

impl CovarianceTriple {
    /// Requires the Robertson–Schrödinger equality `σ_qσ_p − σ_qp² = ħ²/4`.
    pub fn new(sq: f64, sp: f64, sqp: f64, hbar: f64) -> Result<Self> {
        let cov = Self { sq, sp, sqp };
        cov.validate(hbar)?;
        Ok(cov)
    }

    pub fn new_unchecked(sq: f64, sp: f64, sqp: f64) -> Self {
        Self { sq, sp, sqp }
    }

    pub fn validate(&self, hbar: f64) -> Result<()> {
        if !(self.sq > 0.0 && self.sp > 0.0) {
            return Err(Error::InvalidState(format!(
                "variances must be positive (sigma_q = {}, sigma_p = {})",
                self.sq, self.sp
            )));
        }
        let r = self.rs_residual(hbar);
        let scale = (self.sq * self.sp).max(hbar * hbar / 4.0);
        if !(r.abs() <= VALIDATION_TOL * scale) {
            return Err(Error::InvalidState(format!(
                "Robertson-Schroedinger equality violated by {r:.3e}"
            )));
        }
        Ok(())
    }

    /// `σ_qσ_p − σ_qp² − ħ²/4`.
    pub fn rs_residual(&self, hbar: f64) -> f64 {
        self.sq * self.sp - self.sqp * self.sqp - hbar * hbar / 4.0
    }
}

/// First moments `(⟨q̂⟩, ⟨p̂⟩)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FirstMoments {
    pub mq: f64,
    pub mp: f64,
}

impl FirstMoments {
    pub fn new(mq: f64, mp: f64) -> Self {
        Self { mq, mp }
    }

    /// `α = (i/√(2ħ)) (P⟨q̂⟩ − Q⟨p̂⟩)`.
    pub fn alpha(&self, qp: &QPPoint, hbar: f64) -> Complex64 {
        I / (2.0 * hbar).sqrt() * (qp.p() * self.mq - qp.q() * self.mp)
    }

    /// Inverse of [`FirstMoments::alpha`]. The real 2×2 system has
    /// determinant `Im(Q̄P) = 1` on `M`.
    pub fn from_alpha(alpha: Complex64, qp: &QPPoint, hbar: f64) -> Self {
        let z = -I * (2.0 * hbar).sqrt() * alpha;
        let (q, p) = (qp.q(), qp.p());
        let det = qp.symplectic_product();
        Self {
            mq: (q.re * z.im - q.im * z.re) / det,
            mp: (p.re * z.im - p.im * z.re) / det,
        }
    }
}

/// A point in any of the charts, tagged by chart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "PointRecord", from = "PointRecord")]
pub enum ChartPoint {
    M(QPPoint),
    H3(H3Point),
    H2(H2Point),
    Disk(DiskPoint),
    Siegel(SiegelPoint),
    Alpha(Complex64),
}

impl ChartPoint {
    pub fn chart(&self) -> Chart {
        match self {
            ChartPoint::M(_) => Chart::M,
            ChartPoint::H3(_) => Chart::H3,
            ChartPoint::H2(_) => Chart::H2,
            ChartPoint::Disk(_) => Chart::Disk,
            ChartPoint::Siegel(_) => Chart::Siegel,
            ChartPoint::Alpha(_) => Chart::Alpha,
        }
    }

    /// Absolute violation of the chart's defining condition.
    pub fn constraint_residual(&self) -> f64 {
        match self {
            ChartPoint::M(p) => p.constraint_residual(),
            ChartPoint::H3(p) => p.constraint_residual(),
            ChartPoint::H2(p) => {
                let below = (1.0 - p.y1()).max(0.0);
                p.constraint_residual().max(below)
            }
            ChartPoint::Disk(p) => p.constraint_residual(),
            ChartPoint::Siegel(p) => p.constraint_residual(),
            ChartPoint::Alpha(_) => 0.0,
        }
    }

    /// Flat numeric columns in the order used by the trajectory files.
    pub fn components(&self) -> Vec<f64> {
        match self {
            ChartPoint::M(p) => vec![p.q().re, p.q().im, p.p().re, p.p().im],
            ChartPoint::H3(p) => p.x.to_vec(),
            ChartPoint::H2(p) => p.y.to_vec(),
            ChartPoint::Disk(p) => vec![p.zeta.re, p.zeta.im],
            ChartPoint::Siegel(p) => vec![p.c.re, p.c.im],
            ChartPoint::Alpha(a) => vec![a.re, a.im],
        }
    }

    /// Rebuilds a point from [`ChartPoint::components`] without validation.
    pub fn from_components(chart: Chart, v: &[f64]) -> Result<Self> {
        let want = component_names(chart).len();
        if v.len() != want {
            return Err(Error::Format(format!(
                "{chart} point needs {want} components, got {}",
                v.len()
            )));
        }
        let c = |a: f64, b: f64| Complex64::new(a, b);
        Ok(match chart {
            Chart::M => ChartPoint::M(QPPoint::new_unchecked(c(v[0], v[1]), c(v[2], v[3]))),
            Chart::H3 => ChartPoint::H3(H3Point::new_unchecked([v[0], v[1], v[2], v[3]])),
            Chart::H2 => ChartPoint::H2(H2Point::new_unchecked(v[0], v[1], v[2])),
            Chart::Disk => ChartPoint::Disk(DiskPoint::new_unchecked(c(v[0], v[1]))),
            Chart::Siegel => ChartPoint::Siegel(SiegelPoint::new_unchecked(c(v[0], v[1]))),
            Chart::Alpha => ChartPoint::Alpha(c(v[0], v[1])),
        })
    }
}

/// Column names for each chart's components.
pub fn component_names(chart: Chart) -> &'static [&'static str] {
    match chart {
        Chart::M => &["q_re", "q_im", "p_re", "p_im"],
        Chart::H3 => &["x0", "x1", "x2", "x3"],
        Chart::H2 => &["y1", "y2", "y3"],
        Chart::Disk | Chart::Siegel | Chart::Alpha => &["re", "im"],
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "chart", rename_all = "lowercase")]
enum PointRecord {
    M {
        q_re: f64,
        q_im: f64,
        p_re: f64,
        p_im: f64,
    },
    H3 {
        x0: f64,
        x1: f64,
        x2: f64,
        x3: f64,
    },
    H2 {
        y1: f64,
        y2: f64,
        y3: f64,
    },
    Disk {
        re: f64,
        im: f64,
    },
    Siegel {
        re: f64,
        im: f64,
    },
    Alpha {
        re: f64,
        im: f64,
    },
}

impl From<ChartPoint> for PointRecord {
    fn from(p: ChartPoint) -> Self {
        match p {
            ChartPoint::M(qp) => PointRecord::M {
                q_re: qp.q.re,
                q_im: qp.q.im,
                p_re: qp.p.re,
                p_im: qp.p.im,
            },
            ChartPoint::H3(h) => {
                let [x0, x1, x2, x3] = h.x;
                PointRecord::H3 { x0, x1, x2, x3 }
            }
            ChartPoint::H2(h) => {
                let [y1, y2, y3] = h.y;
                PointRecord::H2 { y1, y2, y3 }
            }
            ChartPoint::Disk(d) => PointRecord::Disk {
                re: d.zeta.re,
                im: d.zeta.im,
            },
            ChartPoint::Siegel(s) => PointRecord::Siegel {
                re: s.c.re,
                im: s.c.im,
            },
            ChartPoint::Alpha(a) => PointRecord::Alpha { re: a.re, im: a.im },
        }
    }
}

impl From<PointRecord> for ChartPoint {
    fn from(r: PointRecord) -> Self {
        let c = Complex64::new;
        match r {
            PointRecord::M {
                q_re,
                q_im,
                p_re,
                p_im,
            } => ChartPoint::M(QPPoint::new_unchecked(c(q_re, q_im), c(p_re, p_im))),
            PointRecord::H3 { x0, x1, x2, x3 } => {
                ChartPoint::H3(H3Point::new_unchecked([x0, x1, x2, x3]))
            }
            PointRecord::H2 { y1, y2, y3 } => ChartPoint::H2(H2Point::new_unchecked(y1, y2, y3)),
            PointRecord::Disk { re, im } => ChartPoint::Disk(DiskPoint::new_unchecked(c(re, im))),
            PointRecord::Siegel { re, im } => {
                ChartPoint::Siegel(SiegelPoint::new_unchecked(c(re, im)))
            }
            PointRecord::Alpha { re, im } => ChartPoint::Alpha(c(re, im)),
        }
    }
}
