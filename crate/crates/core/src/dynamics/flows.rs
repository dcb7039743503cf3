//! Equations of motion on every chart and the trajectory driver.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::integrator::{dopri45, rk4, IntegratorConfig, Method, Tolerances};
use crate::error::{Error, Result};
use crate::geometry::{
    alpha_energy, chart_energy, Chart, ChartPoint, DiskPoint, FirstMoments, H2Point, H3Point,
    QPPoint, SiegelPoint, SqueezeCoords,
};
use crate::hamiltonian::{gw_transform, Coeffs, QuadraticCoefficients};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Closest approach to the `H²` vertex allowed in squeezing coordinates.
pub const TAU_MIN: f64 = 1e-6;

/// Velocity of a chart point, in the coordinates of its chart. On `H²` the
/// velocity is expressed in squeezing coordinates `(τ, φ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChartTangent {
    M { dq: Complex64, dp: Complex64 },
    H3([f64; 4]),
    H2 { tau_dot: f64, phi_dot: f64 },
    Disk(Complex64),
    Siegel(Complex64),
    Alpha(Complex64),
}

/// `Q̇ = VQ + H₂P`, `Ṗ = −H₁Q − VP`.
pub fn m_rhs(c: Coeffs, q: Complex64, p: Complex64) -> (Complex64, Complex64) {
    (c.v * q + c.h2 * p, -c.h1 * q - c.v * p)
}

/// Linear flow on `H³`, the pushforward of [`m_rhs`] under `ν`.
pub fn h3_rhs(c: Coeffs, x: [f64; 4]) -> [f64; 4] {
    let [x0, x1, x2, x3] = x;
    let s = 0.5 * (c.h2 + c.h1);
    let d = 0.5 * (c.h2 - c.h1);
    [
        -s * x1 - d * x3 - c.v * x2,
        s * x0 + d * x2 - c.v * x3,
        s * x3 + d * x1 - c.v * x0,
        -s * x2 - d * x0 - c.v * x1,
    ]
}

/// Linear flow of `(y¹, y², y³)` on `H²`, regular everywhere including the vertex.
pub fn h2_linear_rhs(c: Coeffs, y: [f64; 3]) -> [f64; 3] {
    let [y1, y2, y3] = y;
    [
        -2.0 * c.v * y3 + (c.h2 - c.h1) * y2,
        (c.h2 - c.h1) * y1 + (c.h2 + c.h1) * y3,
        -(c.h1 + c.h2) * y2 - 2.0 * c.v * y1,
    ]
}

/// `(τ̇, φ̇)` in squeezing coordinates. Singular at the vertex.
pub fn squeeze_rhs(c: Coeffs, s: SqueezeCoords) -> Result<(f64, f64)> {
    if !(s.tau >= TAU_MIN) {
        return Err(Error::SingularChart {
            tau: s.tau,
            tau_min: TAU_MIN,
        });
    }
    let (sin, cos) = s.phi.sin_cos();
    let tau_dot = -2.0 * c.v * sin - (c.h1 - c.h2) * cos;
    let phi_dot = -(2.0 * c.v * cos - (c.h1 - c.h2) * sin) / s.tau.tanh() - (c.h1 + c.h2);
    Ok((tau_dot, phi_dot))
}

/// Riccati equation on the disk,
/// `ζ̇ = ½(H₁ − H₂ − 2iV)ζ² − i(H₁ + H₂)ζ − ½(H₁ − H₂ + 2iV)`.
pub fn disk_rhs(c: Coeffs, z: Complex64) -> Complex64 {
    let a = Complex64::new(c.h1 - c.h2, -2.0 * c.v);
    0.5 * a * z * z - I * (c.h1 + c.h2) * z - 0.5 * a.conj()
}

/// Riccati equation `𝒞̇ = −H₂𝒞² − 2V𝒞 − H₁`. The same field drives `𝒞̄`.
pub fn siegel_rhs(c: Coeffs, z: Complex64) -> Complex64 {
    -c.h2 * z * z - 2.0 * c.v * z - c.h1
}

/// `α̇ = −(i/2)(Gᾱ + Wα)` with `(G, W)` built from the reference pair.
pub fn alpha_rhs(c: Coeffs, reference: &QPPoint, alpha: Complex64) -> Complex64 {
    let (g, w) = gw_transform(c, reference);
    -0.5 * I * (g * alpha.conj() + w * alpha)
}

/// Ehrenfest equations `⟨q̇⟩ = V⟨q⟩ + H₂⟨p⟩`, `⟨ṗ⟩ = −H₁⟨q⟩ − V⟨p⟩`.
pub fn ehrenfest_rhs(c: Coeffs, m: FirstMoments) -> FirstMoments {
    FirstMoments::new(c.v * m.mq + c.h2 * m.mp, -c.h1 * m.mq - c.v * m.mp)
}

/// Evaluates the vector field of the point's chart. `α` uses the vacuum
/// reference; see [`alpha_rhs`].
pub fn rhs<M>(model: &M, point: &ChartPoint, t: f64) -> Result<ChartTangent>
where
    M: QuadraticCoefficients + ?Sized,
{
    let c = model.evaluate(t)?;
    Ok(match point {
        ChartPoint::M(qp) => {
            let (dq, dp) = m_rhs(c, qp.q(), qp.p());
            ChartTangent::M { dq, dp }
        }
        ChartPoint::H3(h) => ChartTangent::H3(h3_rhs(c, h.coords())),
        ChartPoint::H2(h) => {
            let (tau_dot, phi_dot) = squeeze_rhs(c, crate::geometry::squeeze_coordinates(h))?;
            ChartTangent::H2 { tau_dot, phi_dot }
        }
        ChartPoint::Disk(d) => ChartTangent::Disk(disk_rhs(c, d.zeta())),
        ChartPoint::Siegel(s) => ChartTangent::Siegel(siegel_rhs(c, s.c())),
        ChartPoint::Alpha(a) => ChartTangent::Alpha(alpha_rhs(c, &QPPoint::vacuum(), *a)),
    })
}

/// Per-sample invariant diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Violation of the chart's defining condition.
    pub constraint_drift: f64,
    /// Chart Hamiltonian function at the sample time.
    pub energy: f64,
    /// `σ_qσ_p − σ_qp² − ħ²/4`; zero on the `α` chart, which carries no second moments.
    pub rs_residual: f64,
}

impl Diagnostics {
    pub fn of(point: &ChartPoint, c: Coeffs, hbar: f64, alpha_reference: &QPPoint) -> Self {
        let energy = match point {
            ChartPoint::Alpha(a) => alpha_energy(*a, c, alpha_reference, hbar),
            other => chart_energy(other, c, hbar),
        };
        let rs_residual = match point {
            // σ_qσ_p − σ_qp² = (ħ²/4) Im(Q̄P)², evaluated without cancellation
            ChartPoint::M(qp) => {
                let s = qp.symplectic_product();
                hbar * hbar / 4.0 * (s - 1.0) * (s + 1.0)
            }
            ChartPoint::H3(h) => {
                let s = h.quadric();
                hbar * hbar / 4.0 * (s - 1.0) * (s + 1.0)
            }
            ChartPoint::Alpha(_) => 0.0,
            other => match other.convert(Chart::H2) {
                Ok(ChartPoint::H2(h)) => hbar * hbar / 4.0 * (h.quadric() - 1.0),
                _ => f64::NAN,
            },
        };
        Self {
            constraint_drift: point.constraint_residual(),
            energy,
            rs_residual,
        }
    }
}

/// A sampled trajectory in one chart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub chart: Chart,
    pub hbar: f64,
    /// Reference pair defining `α` (only meaningful on the `α` chart).
    pub alpha_reference: Option<QPPoint>,
    pub times: Vec<f64>,
    pub points: Vec<ChartPoint>,
    pub diagnostics: Vec<Diagnostics>,
}

impl Trajectory {
    /// Builds a trajectory and computes its diagnostics.
    pub fn new<M>(
        model: &M,
        chart: Chart,
        hbar: f64,
        alpha_reference: Option<QPPoint>,
        times: Vec<f64>,
        points: Vec<ChartPoint>,
    ) -> Result<Self>
    where
        M: QuadraticCoefficients + ?Sized,
    {
        if times.len() != points.len() {
            return Err(Error::GridMismatch(format!(
                "{} times but {} points",
                times.len(),
                points.len()
            )));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::GridMismatch("times must be strictly increasing".into()));
        }
        if let Some(p) = points.iter().find(|p| p.chart() != chart) {
            return Err(Error::Format(format!(
                "{} point in a {chart} trajectory",
                p.chart()
            )));
        }
        let mut traj = Self {
            chart,
            hbar,
            alpha_reference,
            times,
            points,
            diagnostics: Vec::new(),
        };
        traj.recompute_diagnostics(model)?;
        Ok(traj)
    }

    pub fn recompute_diagnostics<M>(&mut self, model: &M) -> Result<()>
    where
        M: QuadraticCoefficients + ?Sized,
    {
        let reference = self.alpha_reference.unwrap_or_else(QPPoint::vacuum);
        self.diagnostics = self
            .times
            .iter()
            .zip(&self.points)
            .map(|(&t, p)| Ok(Diagnostics::of(p, model.evaluate(t)?, self.hbar, &reference)))
            .collect::<Result<_>>()?;
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Converts every point along the chart diagram, recomputing diagnostics.
    pub fn convert<M>(&self, model: &M, target: Chart) -> Result<Trajectory>
    where
        M: QuadraticCoefficients + ?Sized,
    {
        if !self.chart.reaches(target) {
            return Err(Error::UnsupportedConversion {
                from: self.chart,
                to: target,
            });
        }
        let points = self
            .points
            .iter()
            .map(|p| p.convert(target))
            .collect::<Result<Vec<_>>>()?;
        Trajectory::new(model, target, self.hbar, self.alpha_reference, self.times.clone(), points)
    }

    /// `(Q, P)` samples of an `M` trajectory.
    pub fn qp_points(&self) -> Option<Vec<QPPoint>> {
        self.points
            .iter()
            .map(|p| match p {
                ChartPoint::M(qp) => Some(*qp),
                _ => None,
            })
            .collect()
    }

    pub fn complex_values(&self) -> Option<Vec<Complex64>> {
        self.points
            .iter()
            .map(|p| match p {
                ChartPoint::Disk(d) => Some(d.zeta()),
                ChartPoint::Siegel(s) => Some(s.c()),
                ChartPoint::Alpha(a) => Some(*a),
                _ => None,
            })
            .collect()
    }

    pub fn max_constraint_drift(&self) -> f64 {
        self.diagnostics.iter().map(|d| d.constraint_drift).fold(0.0, f64::max)
    }

    pub fn max_rs_residual(&self) -> f64 {
        self.diagnostics.iter().map(|d| d.rs_residual.abs()).fold(0.0, f64::max)
    }

    /// `max |E(t) − E(t₀)|`.
    pub fn energy_drift(&self) -> f64 {
        let Some(e0) = self.diagnostics.first().map(|d| d.energy) else {
            return 0.0;
        };
        self.diagnostics.iter().map(|d| (d.energy - e0).abs()).fold(0.0, f64::max)
    }
}

/// Runs `f` on the configured grid with the configured method.
pub(crate) fn solve<const N: usize, F, H>(
    f: F,
    y0: [f64; N],
    config: &IntegratorConfig,
    hook: H,
) -> Result<(Vec<f64>, Vec<[f64; N]>)>
where
    F: Fn(f64, &[f64; N]) -> Result<[f64; N]>,
    H: FnMut(f64, &mut [f64; N]) -> Result<()>,
{
    config.validate()?;
    match config.method {
        Method::Rk4 => {
            let (n, _) = config.fixed_steps();
            rk4(f, y0, config.t0, config.t1, n, config.sample_every, hook)
        }
        Method::Rk45 => {
            let times = config.output_times();
            let tol = Tolerances {
                rtol: config.rtol,
                atol: config.atol,
                max_step: config.max_step,
            };
            let states = dopri45(f, y0, &times, tol, hook)?;
            Ok((times, states))
        }
    }
}

fn c2(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

fn z2(y: &[f64; 2]) -> Complex64 {
    Complex64::new(y[0], y[1])
}

fn invalid_state(t: f64, reason: &str, y: &[f64]) -> Error {
    Error::Integration {
        t,
        reason: reason.into(),
        last_state: y.to_vec(),
    }
}

/// Integrates the flow of `model` in the chart of `initial`. On the `α`
/// chart the vacuum reference is used; see [`integrate_alpha`].
pub fn integrate<M>(
    model: &M,
    initial: &ChartPoint,
    config: &IntegratorConfig,
    hbar: f64,
) -> Result<Trajectory>
where
    M: QuadraticCoefficients + ?Sized,
{
    if !(hbar > 0.0 && hbar.is_finite()) {
        return Err(Error::Parameter(format!("hbar must be > 0, got {hbar}")));
    }
    let chart = initial.chart();
    let ev = |t: f64| model.evaluate(t);
    let renorm = config.renormalize;
    let (times, points): (Vec<f64>, Vec<ChartPoint>) = match *initial {
        ChartPoint::M(qp) => {
            let y0 = [qp.q().re, qp.q().im, qp.p().re, qp.p().im];
            let f = |t: f64, y: &[f64; 4]| {
                let (dq, dp) = m_rhs(ev(t)?, Complex64::new(y[0], y[1]), Complex64::new(y[2], y[3]));
                Ok([dq.re, dq.im, dp.re, dp.im])
            };
            let hook = |_t: f64, y: &mut [f64; 4]| {
                if renorm {
                    let s = y[0] * y[3] - y[1] * y[2];
                    if s > 0.0 {
                        let k = 1.0 / s.sqrt();
                        y.iter_mut().for_each(|v| *v *= k);
                    }
                }
                Ok(())
            };
            let (ts, ys) = solve(f, y0, config, hook)?;
            let pts = ys
                .iter()
                .map(|y| {
                    ChartPoint::M(QPPoint::new_unchecked(
                        Complex64::new(y[0], y[1]),
                        Complex64::new(y[2], y[3]),
                    ))
                })
                .collect();
            (ts, pts)
        }
        ChartPoint::H3(h) => {
            let f = |t: f64, y: &[f64; 4]| Ok(h3_rhs(ev(t)?, *y));
            let hook = |_t: f64, y: &mut [f64; 4]| {
                if renorm {
                    let s = H3Point::new_unchecked(*y).quadric();
                    if s > 0.0 {
                        let k = 1.0 / s.sqrt();
                        y.iter_mut().for_each(|v| *v *= k);
                    }
                }
                Ok(())
            };
            let (ts, ys) = solve(f, h.coords(), config, hook)?;
            (ts, ys.into_iter().map(|y| ChartPoint::H3(H3Point::new_unchecked(y))).collect())
        }
        ChartPoint::H2(h) => {
            let s0 = crate::geometry::squeeze_coordinates(&h);
            let f = |t: f64, y: &[f64; 2]| {
                let (a, b) = squeeze_rhs(ev(t)?, SqueezeCoords { tau: y[0], phi: y[1] })?;
                Ok([a, b])
            };
            let hook = |_t: f64, y: &mut [f64; 2]| {
                if y[0] < TAU_MIN {
                    Err(Error::SingularChart {
                        tau: y[0],
                        tau_min: TAU_MIN,
                    })
                } else {
                    Ok(())
                }
            };
            let (ts, ys) = solve(f, [s0.tau, s0.phi], config, hook)?;
            let pts = ys
                .iter()
                .map(|y| ChartPoint::H2(SqueezeCoords::new(y[0], y[1]).to_h2()))
                .collect();
            (ts, pts)
        }
        ChartPoint::Disk(d) => {
            let f = |t: f64, y: &[f64; 2]| Ok(c2(disk_rhs(ev(t)?, z2(y))));
            let hook = |t: f64, y: &mut [f64; 2]| {
                if z2(y).norm() < 1.0 {
                    Ok(())
                } else {
                    Err(invalid_state(t, "left the open unit disk", y))
                }
            };
            let (ts, ys) = solve(f, c2(d.zeta()), config, hook)?;
            (ts, ys.iter().map(|y| ChartPoint::Disk(DiskPoint::new_unchecked(z2(y)))).collect())
        }
        ChartPoint::Siegel(s) => {
            let f = |t: f64, y: &[f64; 2]| Ok(c2(siegel_rhs(ev(t)?, z2(y))));
            let hook = |t: f64, y: &mut [f64; 2]| {
                if y[1] > 0.0 {
                    Ok(())
                } else {
                    Err(invalid_state(t, "left the upper half plane", y))
                }
            };
            let (ts, ys) = solve(f, c2(s.c()), config, hook)?;
            (ts, ys.iter().map(|y| ChartPoint::Siegel(SiegelPoint::new_unchecked(z2(y)))).collect())
        }
        ChartPoint::Alpha(a) => {
            return integrate_alpha(model, a, &QPPoint::vacuum(), config, hbar);
        }
    };
    Trajectory::new(model, chart, hbar, None, times, points)
}

/// Integrates the first-moment flow in the complex coordinate `α` defined
/// by the fixed reference pair.
pub fn integrate_alpha<M>(
    model: &M,
    alpha0: Complex64,
    reference: &QPPoint,
    config: &IntegratorConfig,
    hbar: f64,
) -> Result<Trajectory>
where
    M: QuadraticCoefficients + ?Sized,
{
    let f = |t: f64, y: &[f64; 2]| Ok(c2(alpha_rhs(model.evaluate(t)?, reference, z2(y))));
    let (ts, ys) = solve(f, c2(alpha0), config, |_, _| Ok(()))?;
    let pts = ys.iter().map(|y| ChartPoint::Alpha(z2(y))).collect();
    Trajectory::new(model, Chart::Alpha, hbar, Some(*reference), ts, pts)
}

/// First moments sampled on a time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentTrajectory {
    pub times: Vec<f64>,
    pub moments: Vec<FirstMoments>,
}

/// Integrates the Ehrenfest equations.
pub fn integrate_moments<M>(
    model: &M,
    m0: FirstMoments,
    config: &IntegratorConfig,
) -> Result<MomentTrajectory>
where
    M: QuadraticCoefficients + ?Sized,
{
    let f = |t: f64, y: &[f64; 2]| {
        let m = ehrenfest_rhs(model.evaluate(t)?, FirstMoments::new(y[0], y[1]));
        Ok([m.mq, m.mp])
    };
    let (times, ys) = solve(f, [m0.mq, m0.mp], config, |_, _| Ok(()))?;
    Ok(MomentTrajectory {
        times,
        moments: ys.iter().map(|y| FirstMoments::new(y[0], y[1])).collect(),
    })
}

/// `α_Inv(t) = (i/√(2ħ))(P(t)⟨q̂⟩(t) − Q(t)⟨p̂⟩(t))` along paired flows.
pub fn invariant_alpha(
    moments: &MomentTrajectory,
    qp: &Trajectory,
    hbar: f64,
) -> Result<Vec<Complex64>> {
    let pairs = qp.qp_points().ok_or_else(|| {
        Error::GridMismatch(format!("(Q, P) samples required, got a {} trajectory", qp.chart))
    })?;
    if moments.times.len() != qp.times.len() {
        return Err(Error::GridMismatch(format!(
            "{} moment samples against {} (Q, P) samples",
            moments.times.len(),
            qp.times.len()
        )));
    }
    let scale = moments.times.iter().fold(1.0f64, |m, t| m.max(t.abs()));
    if let Some((a, b)) = moments
        .times
        .iter()
        .zip(&qp.times)
        .find(|(a, b)| (*a - *b).abs() > 1e-12 * scale)
    {
        return Err(Error::GridMismatch(format!("sample times differ: {a} vs {b}")));
    }
    Ok(moments
        .moments
        .iter()
        .zip(&pairs)
        .map(|(m, p)| m.alpha(p, hbar))
        .collect())
}

/// Convenience: the `H²` point of a squeezing-coordinate pair.
pub fn h2_point(tau: f64, phi: f64) -> H2Point {
    SqueezeCoords::new(tau, phi).to_h2()
}
