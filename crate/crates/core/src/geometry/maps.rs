use num_complex::Complex64;

use super::points::normalize_angle;
use super::{
    Chart, ChartPoint, CovarianceTriple, DiskPoint, H2Point, H3Point, QPPoint, SiegelPoint,
    SqueezeCoords,
};
use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `ν: (Q, P) ↦ x`, the inverse of `Q = (x¹ − x³) + i(x² − x⁰)`, `P = (x² + x⁰) + i(x¹ + x³)`.
pub fn nu_map(qp: &QPPoint) -> H3Point {
    let (q, p) = (qp.q(), qp.p());
    H3Point::new_unchecked([
        (p.re - q.im) / 2.0,
        (q.re + p.im) / 2.0,
        (p.re + q.im) / 2.0,
        (p.im - q.re) / 2.0,
    ])
}

/// Inverse of [`nu_map`]. The hyperboloid quadric equals `Im(Q̄P)`, so valid
/// points land on `M`.
pub fn nu_inverse(h: &H3Point) -> QPPoint {
    let [x0, x1, x2, x3] = h.x;
    QPPoint::new_unchecked(Complex64::new(x1 - x3, x2 - x0), Complex64::new(x2 + x0, x1 + x3))
}

/// The 2-to-1 covering `χ: H³ → H²`.
pub fn chi_map(h: &H3Point) -> H2Point {
    let [x0, x1, x2, x3] = h.x;
    H2Point::new_unchecked(
        x0 * x0 + x1 * x1 + x2 * x2 + x3 * x3,
        2.0 * (x1 * x2 - x0 * x3),
        2.0 * (x1 * x3 + x0 * x2),
    )
}

/// Stereographic projection `v: H² → D²` from `(−1, 0, 0)`.
pub fn disk_projection(h: &H2Point) -> DiskPoint {
    let [y1, y2, y3] = h.y;
    DiskPoint::new_unchecked(Complex64::new(y2, y3) / (1.0 + y1))
}

/// Inverse of [`disk_projection`].
pub fn disk_to_h2(d: &DiskPoint) -> H2Point {
    let z = d.zeta;
    let r2 = z.norm_sqr();
    let den = 1.0 - r2;
    H2Point::new_unchecked((1.0 + r2) / den, 2.0 * z.re / den, 2.0 * z.im / den)
}

/// Möbius map `u: D² → HP²`, `𝒞 = (ζ + i)/(iζ + 1)`.
pub fn mobius_to_siegel(d: &DiskPoint) -> SiegelPoint {
    let z = d.zeta;
    SiegelPoint::new_unchecked((z + I) / (I * z + 1.0))
}

/// Inverse Möbius map, `ζ = (𝒞 − i)/(1 − i𝒞)`.
pub fn siegel_to_disk(s: &SiegelPoint) -> DiskPoint {
    let c = s.c;
    DiskPoint::new_unchecked((c - I) / (1.0 - I * c))
}

/// `π: M → HP²`, `𝒞 = P/Q`.
pub fn pi_map(qp: &QPPoint) -> SiegelPoint {
    SiegelPoint::new_unchecked(qp.p() / qp.q())
}

/// `𝒞̃ = Q/P`.
pub fn pi_tilde_map(qp: &QPPoint) -> Complex64 {
    qp.q() / qp.p()
}

pub fn covariance_from_qp(qp: &QPPoint, hbar: f64) -> CovarianceTriple {
    let (q, p) = (qp.q(), qp.p());
    CovarianceTriple::new_unchecked(
        hbar / 2.0 * q.norm_sqr(),
        hbar / 2.0 * p.norm_sqr(),
        hbar / 2.0 * (p * q.conj()).re,
    )
}

/// Reads `Σ = (2/ħ)[[σ_q, σ_qp], [σ_qp, σ_p]]` in the `sl(2)` basis.
pub fn h2_from_covariance(cov: &CovarianceTriple, hbar: f64) -> Result<H2Point> {
    cov.validate(hbar)?;
    Ok(H2Point::new_unchecked(
        (cov.sq + cov.sp) / hbar,
        2.0 * cov.sqp / hbar,
        (cov.sp - cov.sq) / hbar,
    ))
}

pub fn covariance_from_h2(h: &H2Point, hbar: f64) -> CovarianceTriple {
    let [y1, y2, y3] = h.y;
    CovarianceTriple::new_unchecked(hbar * (y1 - y3) / 2.0, hbar * (y1 + y3) / 2.0, hbar * y2 / 2.0)
}

/// `𝒞 = σ_qp/σ_q + iħ/(2σ_q)`.
pub fn siegel_from_covariance(cov: &CovarianceTriple, hbar: f64) -> Result<SiegelPoint> {
    if !(cov.sq > 0.0) {
        return Err(Error::InvalidState(format!(
            "position variance must be positive, got {}",
            cov.sq
        )));
    }
    cov.validate(hbar)?;
    Ok(SiegelPoint::new_unchecked(Complex64::new(
        cov.sqp / cov.sq,
        hbar / (2.0 * cov.sq),
    )))
}

pub fn siegel_to_h2(s: &SiegelPoint) -> H2Point {
    let c = s.c;
    let m = c.norm_sqr();
    H2Point::new_unchecked((1.0 + m) / (2.0 * c.im), c.re / c.im, (m - 1.0) / (2.0 * c.im))
}

/// Inverse of [`siegel_to_h2`]: `𝒞 = (y² + i)/(y¹ − y³)`.
pub fn h2_to_siegel(h: &H2Point) -> SiegelPoint {
    let [y1, y2, y3] = h.y;
    SiegelPoint::new_unchecked(Complex64::new(y2, 1.0) / (y1 - y3))
}

/// `(τ, φ)` with `φ = 0` at the vertex.
pub fn squeeze_coordinates(h: &H2Point) -> SqueezeCoords {
    let [y1, y2, y3] = h.y;
    let tau = y1.max(1.0).acosh();
    let phi = if tau == 0.0 || (y2 == 0.0 && y3 == 0.0) {
        0.0
    } else {
        normalize_angle(y3.atan2(y2))
    };
    SqueezeCoords { tau, phi }
}

impl ChartPoint {
    /// Maps the point along the chart diagram. Fails when `target` is not
    /// reachable from the point's chart.
    pub fn convert(&self, target: Chart) -> Result<ChartPoint> {
        let from = self.chart();
        if !from.reaches(target) {
            return Err(Error::UnsupportedConversion { from, to: target });
        }
        if from == target {
            return Ok(*self);
        }
        let out = match (self, target) {
            (ChartPoint::M(qp), Chart::H3) => ChartPoint::H3(nu_map(qp)),
            (ChartPoint::M(qp), Chart::Siegel) => ChartPoint::Siegel(pi_map(qp)),
            (ChartPoint::M(qp), _) => ChartPoint::H3(nu_map(qp)).convert(target)?,
            (ChartPoint::H3(h), Chart::M) => ChartPoint::M(nu_inverse(h)),
            (ChartPoint::H3(h), _) => ChartPoint::H2(chi_map(h)).convert(target)?,
            (ChartPoint::H2(h), Chart::Disk) => ChartPoint::Disk(disk_projection(h)),
            (ChartPoint::H2(h), Chart::Siegel) => ChartPoint::Siegel(h2_to_siegel(h)),
            (ChartPoint::Disk(d), Chart::H2) => ChartPoint::H2(disk_to_h2(d)),
            (ChartPoint::Disk(d), Chart::Siegel) => ChartPoint::Siegel(mobius_to_siegel(d)),
            (ChartPoint::Siegel(s), Chart::H2) => ChartPoint::H2(siegel_to_h2(s)),
            (ChartPoint::Siegel(s), Chart::Disk) => ChartPoint::Disk(siegel_to_disk(s)),
            _ => unreachable!("reachability checked above"),
        };
        Ok(out)
    }

    /// Second moments of the state, when the chart carries them.
    pub fn covariance(&self, hbar: f64) -> Option<CovarianceTriple> {
        match self {
            ChartPoint::M(qp) => Some(covariance_from_qp(qp, hbar)),
            ChartPoint::Alpha(_) => None,
            other => match other.convert(Chart::H2) {
                Ok(ChartPoint::H2(h)) => Some(covariance_from_h2(&h, hbar)),
                _ => None,
            },
        }
    }
}
