//! Gaussian wave functions rebuilt from chart data, with quadrature checks of
//! norm and moments and the finite-difference residual of the Schrödinger
//! equation.
//!
//! In position representation, with `x = q − ⟨q̂⟩`,
//!
//! ```text
//! ψ(q) = (πħ)^{−1/4} Q^{−1/2} exp{(i/2ħ)(P/Q)x² + (i/ħ)⟨p̂⟩x + (i/2ħ)⟨q̂⟩⟨p̂⟩}.
//! ```
//!
//! The Riccati form replaces `Q^{−1/2}` by `Q(t₀)^{−1/2} exp(−½∫_{t₀}^t (H₂𝒞 + V))`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{integrate, integrate_moments, IntegratorConfig, MomentTrajectory, Trajectory};
use crate::error::{Error, Result};
use crate::geometry::{covariance_from_qp, ChartPoint, FirstMoments, QPPoint};
use crate::hamiltonian::QuadraticCoefficients;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Standard deviations on each side of the mean a grid must cover.
pub const MIN_COVERAGE_SIGMAS: f64 = 8.0;

/// Default samples per grid.
pub const DEFAULT_SAMPLES: usize = 2048;

/// Largest time spacing accepted by [`schrodinger_residual`].
pub const MAX_RESIDUAL_DT: f64 = 1e-3;

/// A Gaussian packet at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianState {
    pub moments: FirstMoments,
    pub qp: QPPoint,
    /// `√Q` on the branch continued along the trajectory.
    pub sqrt_q: Complex64,
    /// `√Q(t₀)` at the start of the trajectory.
    pub sqrt_q0: Complex64,
    /// `−½∫_{t₀}^t (H₂𝒞 + V) dt′`.
    pub phase: Complex64,
    pub hbar: f64,
}

impl GaussianState {
    /// A state with no history: principal `√Q` and zero phase integral.
    pub fn new(qp: QPPoint, moments: FirstMoments, hbar: f64) -> Result<Self> {
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::Parameter(format!("hbar must be positive, got {hbar}")));
        }
        if qp.constraint_residual() > crate::geometry::VALIDATION_TOL {
            return Err(Error::InvalidPoint {
                chart: crate::geometry::Chart::M,
                residual: qp.constraint_residual(),
                tol: crate::geometry::VALIDATION_TOL,
            });
        }
        let s = qp.q().sqrt();
        Ok(Self {
            moments,
            qp,
            sqrt_q: s,
            sqrt_q0: s,
            phase: Complex64::new(0.0, 0.0),
            hbar,
        })
    }

    pub fn vacuum(hbar: f64) -> Self {
        Self::new(QPPoint::vacuum(), FirstMoments::default(), hbar).expect("vacuum is valid")
    }

    /// `𝒞 = P/Q`.
    pub fn riccati(&self) -> Complex64 {
        self.qp.p() / self.qp.q()
    }

    /// Position standard deviation `√σ_q`.
    pub fn sigma_q(&self) -> f64 {
        covariance_from_qp(&self.qp, self.hbar).sq.sqrt()
    }

    fn exponent(&self, c: Complex64, q: f64) -> Complex64 {
        let h = self.hbar;
        let FirstMoments { mq, mp } = self.moments;
        let x = q - mq;
        I / (2.0 * h) * c * x * x + I / h * mp * x + I / (2.0 * h) * mq * mp
    }

    fn norm_const(&self) -> f64 {
        (PI * self.hbar).powf(-0.25)
    }
}

/// `ψ(q)` in the `Q^{−1/2}` parametrization.
pub fn psi_position(state: &GaussianState, q: f64) -> Complex64 {
    state.norm_const() / state.sqrt_q * state.exponent(state.riccati(), q).exp()
}

/// `ψ(q)` in the Riccati parametrization with the accumulated phase integral.
pub fn psi_position_riccati(state: &GaussianState, q: f64) -> Complex64 {
    state.norm_const() / state.sqrt_q0 * (state.exponent(state.riccati(), q) + state.phase).exp()
}

/// `ψ̃(p) = (2πħ)^{−1/2}∫e^{−ipq/ħ}ψ(q)dq`, equal to
/// `(πħ)^{−1/4} Q^{−1/2} √(iQ/P) exp{−(i/2ħ)(Q/P)(p − ⟨p̂⟩)² − (i/ħ)⟨q̂⟩(p − ⟨p̂⟩) − (i/2ħ)⟨q̂⟩⟨p̂⟩}`.
pub fn psi_momentum(state: &GaussianState, p: f64) -> Complex64 {
    let h = state.hbar;
    let (q_, p_) = (state.qp.q(), state.qp.p());
    let ct = q_ / p_;
    let FirstMoments { mq, mp } = state.moments;
    let k = p - mp;
    let arg = -I / (2.0 * h) * ct * k * k - I / h * mq * k - I / (2.0 * h) * mq * mp;
    state.norm_const() / state.sqrt_q * (I * ct).sqrt() * arg.exp()
}

/// `σ_qσ_p − σ_qp² − ħ²/4` of the state's covariance.
pub fn rs_check(state: &GaussianState) -> f64 {
    covariance_from_qp(&state.qp, state.hbar).rs_residual(state.hbar)
}

/// Uniform sample grid `center ± half_width` with `n` points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub center: f64,
    pub half_width: f64,
    pub n: usize,
}

impl Grid1D {
    pub fn new(center: f64, half_width: f64, n: usize) -> Result<Self> {
        if n < 16 {
            return Err(Error::Parameter(format!("grid needs at least 16 samples, got {n}")));
        }
        if !(half_width > 0.0 && half_width.is_finite() && center.is_finite()) {
            return Err(Error::Parameter(format!(
                "grid half width must be positive and finite, got {half_width}"
            )));
        }
        Ok(Self { center, half_width, n })
    }

    /// Centered on `⟨q̂⟩`, spanning `sigmas` standard deviations each way.
    pub fn around(state: &GaussianState, sigmas: f64, n: usize) -> Result<Self> {
        Self::new(state.moments.mq, sigmas * state.sigma_q(), n)
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.n - 1) as f64
    }

    pub fn points(&self) -> Vec<f64> {
        let (a, h) = (self.center - self.half_width, self.spacing());
        (0..self.n).map(|k| a + k as f64 * h).collect()
    }

    /// Whether `⟨q̂⟩ ± 8σ` lies inside the grid.
    pub fn covers(&self, state: &GaussianState) -> bool {
        let reach = MIN_COVERAGE_SIGMAS * state.sigma_q();
        let mq = state.moments.mq;
        let tol = 1e-12 * self.half_width;
        mq - reach >= self.center - self.half_width - tol && mq + reach <= self.center + self.half_width + tol
    }

    fn require_coverage(&self, state: &GaussianState) -> Result<()> {
        if self.covers(state) {
            return Ok(());
        }
        Err(Error::Coverage(format!(
            "grid [{}, {}] does not cover <q> = {} +/- {} sd (sd = {})",
            self.center - self.half_width,
            self.center + self.half_width,
            state.moments.mq,
            MIN_COVERAGE_SIGMAS,
            state.sigma_q()
        )))
    }
}

/// Composite Simpson weights for `n` uniform samples; an even count closes
/// with the three-eighths rule on the last three intervals.
pub fn simpson_weights(n: usize, h: f64) -> Vec<f64> {
    let mut w = vec![0.0; n];
    if n < 2 {
        return w;
    }
    if n == 2 {
        return vec![h / 2.0; 2];
    }
    let intervals = n - 1;
    let simpson_end = if intervals.is_multiple_of(2) { intervals } else { intervals - 3 };
    for k in (0..simpson_end).step_by(2) {
        w[k] += h / 3.0;
        w[k + 1] += 4.0 * h / 3.0;
        w[k + 2] += h / 3.0;
    }
    if simpson_end < intervals {
        let s = simpson_end;
        for (j, c) in [1.0, 3.0, 3.0, 1.0].into_iter().enumerate() {
            w[s + j] += 3.0 * h / 8.0 * c;
        }
    }
    w
}

/// Quadrature summary of `|ψ|²` on a grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quadrature {
    pub norm: f64,
    pub mean: f64,
    pub variance: f64,
}

/// Simpson quadrature of `|ψ|²`, `q|ψ|²` and `(q − ⟨q⟩)²|ψ|²`.
pub fn norm_and_moments(state: &GaussianState, grid: &Grid1D) -> Result<Quadrature> {
    grid.require_coverage(state)?;
    let qs = grid.points();
    let w = simpson_weights(grid.n, grid.spacing());
    let rho: Vec<f64> = qs.iter().map(|&q| psi_position(state, q).norm_sqr()).collect();
    let norm: f64 = w.iter().zip(&rho).map(|(w, r)| w * r).sum();
    let mean = w.iter().zip(&rho).zip(&qs).map(|((w, r), q)| w * r * q).sum::<f64>() / norm;
    let variance = w
        .iter()
        .zip(&rho)
        .zip(&qs)
        .map(|((w, r), q)| w * r * (q - mean) * (q - mean))
        .sum::<f64>()
        / norm;
    Ok(Quadrature { norm, mean, variance })
}

/// Packets along a trajectory, with `√Q` continued and the phase integral
/// accumulated on the sample grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PacketTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<GaussianState>,
}

impl PacketTrajectory {
    /// Pairs an `M`-chart trajectory with the first moments on the same grid.
    pub fn from_flows<M>(model: &M, qp: &Trajectory, moments: &MomentTrajectory) -> Result<Self>
    where
        M: QuadraticCoefficients + ?Sized,
    {
        let pairs = qp.qp_points().ok_or_else(|| {
            Error::GridMismatch(format!("(Q, P) samples required, got a {} trajectory", qp.chart))
        })?;
        if moments.times.len() != qp.times.len()
            || moments.times.iter().zip(&qp.times).any(|(a, b)| (a - b).abs() > 1e-12 * a.abs().max(1.0))
        {
            return Err(Error::GridMismatch("moment and (Q, P) sample times differ".into()));
        }
        let times = qp.times.clone();
        let n = times.len();
        if n == 0 {
            return Ok(Self { times, states: Vec::new() });
        }
        let h = if n > 1 { times[1] - times[0] } else { 0.0 };
        if times.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h.abs().max(1e-300)) {
            return Err(Error::GridMismatch("phase integral needs uniformly spaced samples".into()));
        }

        // Q̇/Q = V + H₂𝒞
        let mut f = Vec::with_capacity(n);
        for (t, p) in times.iter().zip(&pairs) {
            let c = model.evaluate(*t)?;
            f.push(c.v + c.h2 * (p.p() / p.q()));
        }
        let integral = cumulative_simpson(&f, h);

        let hbar = qp.hbar;
        let sqrt_q0 = pairs[0].q().sqrt();
        let mut arg = pairs[0].q().arg();
        let mut states = Vec::with_capacity(n);
        for (k, p) in pairs.iter().enumerate() {
            let a = p.q().arg();
            if k > 0 {
                let mut d = a - arg.rem_euclid(2.0 * PI);
                d = (d + PI).rem_euclid(2.0 * PI) - PI;
                arg += d;
            }
            let sqrt_q = Complex64::from_polar(p.q().norm().sqrt(), 0.5 * arg);
            states.push(GaussianState {
                moments: moments.moments[k],
                qp: *p,
                sqrt_q,
                sqrt_q0,
                phase: -0.5 * integral[k],
                hbar,
            });
        }
        Ok(Self { times, states })
    }

    /// Integrates `(Q, P)` and the first moments and assembles the packets.
    pub fn evolve<M>(
        model: &M,
        qp0: QPPoint,
        m0: FirstMoments,
        config: &IntegratorConfig,
        hbar: f64,
    ) -> Result<Self>
    where
        M: QuadraticCoefficients + ?Sized,
    {
        let qp = integrate(model, &ChartPoint::M(qp0), config, hbar)?;
        let moments = integrate_moments(model, m0, config)?;
        Self::from_flows(model, &qp, &moments)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Index of the sample nearest `t`.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        self.times
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - t).abs().total_cmp(&(b.1 - t).abs()))
            .map(|(k, _)| k)
    }
}

/// Running integral on a uniform grid: Simpson pairs, with the last interval
/// closed by the three-point rule `h/12(−f₀ + 8f₁ + 5f₂)`.
fn cumulative_simpson(f: &[Complex64], h: f64) -> Vec<Complex64> {
    let n = f.len();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    if n < 2 {
        return out;
    }
    if n == 2 {
        out[1] = 0.5 * h * (f[0] + f[1]);
        return out;
    }
    out[1] = h / 12.0 * (5.0 * f[0] + 8.0 * f[1] - f[2]);
    for k in 2..n {
        out[k] = out[k - 1] + h / 12.0 * (-f[k - 2] + 8.0 * f[k - 1] + 5.0 * f[k]);
    }
    out
}

/// Relative `L²` residual `‖iħ∂ₜψ − Ĥψ‖/‖Ĥψ‖` on the grid interior at the
/// sample nearest `t`, with
/// `Ĥψ = ½H₁q²ψ − ½H₂ħ²ψ″ − ½iħV(2qψ′ + ψ)`.
pub fn schrodinger_residual<M>(
    model: &M,
    packets: &PacketTrajectory,
    grid: &Grid1D,
    t: f64,
) -> Result<f64>
where
    M: QuadraticCoefficients + ?Sized,
{
    let k = packets
        .index_of(t)
        .ok_or_else(|| Error::GridMismatch("empty packet trajectory".into()))?;
    if k == 0 || k + 1 >= packets.len() {
        return Err(Error::GridMismatch(format!(
            "time {t} needs a sample on each side for centered differencing"
        )));
    }
    let dt = packets.times[k + 1] - packets.times[k];
    let dt_back = packets.times[k] - packets.times[k - 1];
    if dt > MAX_RESIDUAL_DT || (dt - dt_back).abs() > 1e-9 * dt {
        return Err(Error::GridMismatch(format!(
            "residual needs uniform time spacing <= {MAX_RESIDUAL_DT}, got {dt}"
        )));
    }
    let (prev, cur, next) = (&packets.states[k - 1], &packets.states[k], &packets.states[k + 1]);
    grid.require_coverage(cur)?;

    let qs = grid.points();
    let dq = grid.spacing();
    let psi: Vec<Complex64> = qs.iter().map(|&q| psi_position(cur, q)).collect();
    let peak = psi.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    let edge = psi[0].norm().max(psi[psi.len() - 1].norm());
    if edge > 1e-5 * peak {
        return Err(Error::Coverage(format!(
            "packet amplitude at the grid boundary is {:.3e} of the peak",
            edge / peak
        )));
    }

    let c = model.evaluate(packets.times[k])?;
    let hbar = cur.hbar;
    let mut num = 0.0;
    let mut den = 0.0;
    for j in 2..qs.len() - 2 {
        let q = qs[j];
        let d1 = (psi[j - 2] - 8.0 * psi[j - 1] + 8.0 * psi[j + 1] - psi[j + 2]) / (12.0 * dq);
        let d2 = (-psi[j - 2] + 16.0 * psi[j - 1] - 30.0 * psi[j] + 16.0 * psi[j + 1] - psi[j + 2])
            / (12.0 * dq * dq);
        let h_psi = 0.5 * c.h1 * q * q * psi[j] - 0.5 * c.h2 * hbar * hbar * d2
            - 0.5 * I * hbar * c.v * (2.0 * q * d1 + psi[j]);
        let dt_psi = (psi_position(next, q) - psi_position(prev, q)) / (2.0 * dt);
        num += (I * hbar * dt_psi - h_psi).norm_sqr();
        den += h_psi.norm_sqr();
    }
    if den == 0.0 {
        return Ok(num.sqrt());
    }
    Ok((num / den).sqrt())
}

/// Samples `ψ(q)` on the grid.
pub fn sample_position(state: &GaussianState, grid: &Grid1D) -> Vec<(f64, Complex64)> {
    grid.points().into_iter().map(|q| (q, psi_position(state, q))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{AmplifierParams, CoefficientModel};
    use std::f64::consts::SQRT_2;

    fn squeezed() -> GaussianState {
        let qp = QPPoint::new(Complex64::new(SQRT_2, 0.0), Complex64::new(1.0, 1.0) / SQRT_2).unwrap();
        GaussianState::new(qp, FirstMoments::default(), 1.0).unwrap()
    }

    #[test]
    fn vacuum_values() {
        let v = GaussianState::vacuum(1.0);
        let n = PI.powf(-0.25);
        assert!((psi_position(&v, 0.0) - n).norm() < 1e-15);
        assert!((psi_position(&v, 1.0) - n * (-0.5f64).exp()).norm() < 1e-15);
        assert!((psi_momentum(&v, 0.0) - n).norm() < 1e-15);
        assert!((psi_momentum(&v, 1.0) - n * (-0.5f64).exp()).norm() < 1e-15);
        assert!(rs_check(&v).abs() < 1e-14);
    }

    #[test]
    fn squeezed_value() {
        let s = squeezed();
        let expect = PI.powf(-0.25) * 2f64.powf(-0.25) * (0.5 * I * Complex64::new(0.5, 0.5)).exp();
        assert!((psi_position(&s, 1.0) - expect).norm() < 1e-15);
        let modulus = PI.powf(-0.25) * 2f64.powf(-0.25) * (-0.25f64).exp();
        assert!((psi_position(&s, 1.0).norm() - modulus).abs() < 1e-15);
        assert!(rs_check(&s).abs() < 1e-14);
    }

    #[test]
    fn quadrature_examples() {
        let v = GaussianState::vacuum(1.0);
        let r = norm_and_moments(&v, &Grid1D::around(&v, 8.0, 2048).unwrap()).unwrap();
        assert!((r.norm - 1.0).abs() < 1e-10 && r.mean.abs() < 1e-10 && (r.variance - 0.5).abs() < 1e-10);

        let s = squeezed();
        let r = norm_and_moments(&s, &Grid1D::around(&s, 8.0, 2048).unwrap()).unwrap();
        assert!((r.norm - 1.0).abs() < 1e-8 && r.mean.abs() < 1e-8 && (r.variance - 1.0).abs() < 1e-8);

        let shifted = GaussianState::new(QPPoint::vacuum(), FirstMoments::new(1.0, 0.0), 1.0).unwrap();
        let r = norm_and_moments(&shifted, &Grid1D::around(&shifted, 8.0, 2048).unwrap()).unwrap();
        assert!((r.mean - 1.0).abs() < 1e-8);
    }

    #[test]
    fn narrow_grid_is_rejected() {
        let v = GaussianState::vacuum(1.0);
        let g = Grid1D::around(&v, 4.0, 256).unwrap();
        assert!(matches!(norm_and_moments(&v, &g), Err(Error::Coverage(_))));
        assert!(Grid1D::new(0.0, 1.0, 8).is_err());
    }

    #[test]
    fn simpson_is_exact_for_cubics() {
        for n in [17, 18, 33, 64] {
            let h = 2.0 / (n - 1) as f64;
            let w = simpson_weights(n, h);
            let s: f64 = (0..n).map(|k| {
                let x = -1.0 + k as f64 * h;
                w[k] * (x * x * x + 3.0 * x * x + 1.0)
            }).sum();
            assert!((s - 4.0).abs() < 1e-13, "{n}: {s}");
        }
    }

    #[test]
    fn cumulative_simpson_of_polynomial() {
        let h = 0.1;
        let f: Vec<Complex64> = (0..21).map(|k| {
            let t = k as f64 * h;
            Complex64::new(t * t, -2.0 * t)
        }).collect();
        let c = cumulative_simpson(&f, h);
        for (k, v) in c.iter().enumerate() {
            let t = k as f64 * h;
            assert!((v - Complex64::new(t * t * t / 3.0, -t * t)).norm() < 1e-13);
        }
    }

    #[test]
    fn parametrizations_agree_along_the_flow() {
        let model = CoefficientModel::Amplifier(AmplifierParams::from_xi(0.75, Complex64::new(0.5, 0.0)).unwrap());
        let cfg = IntegratorConfig::rk4(0.0, 10.0, 1e-3);
        let tr = PacketTrajectory::evolve(&model, squeezed().qp, FirstMoments::new(0.5, -0.3), &cfg, 1.0).unwrap();
        for s in tr.states.iter().step_by(250) {
            for q in [-1.0, 0.0, 0.4, 2.0] {
                assert!((psi_position(s, q) - psi_position_riccati(s, q)).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn branch_is_continuous() {
        // Q winds around the origin under the oscillator
        let model = CoefficientModel::harmonic(1.0);
        let cfg = IntegratorConfig::rk4(0.0, 10.0, 1e-3).with_sample_every(10);
        let tr = PacketTrajectory::evolve(&model, QPPoint::vacuum(), FirstMoments::default(), &cfg, 1.0).unwrap();
        for w in tr.states.windows(2) {
            assert!((w[1].sqrt_q - w[0].sqrt_q).norm() < 0.02);
        }
        // vacuum: ψ(q, t) = e^{−it/2}ψ(q, 0)
        let last = tr.states.last().unwrap();
        let t = *tr.times.last().unwrap();
        let expect = PI.powf(-0.25) * Complex64::from_polar(1.0, -0.5 * t);
        assert!((psi_position(last, 0.0) - expect).norm() < 1e-9);
    }

    #[test]
    fn residual_of_vacuum() {
        let model = CoefficientModel::harmonic(1.0);
        let cfg = IntegratorConfig::rk4(0.0, 0.01, 1e-4);
        let tr = PacketTrajectory::evolve(&model, QPPoint::vacuum(), FirstMoments::default(), &cfg, 1.0).unwrap();
        let g = Grid1D::around(&tr.states[50], 8.0, 4096).unwrap();
        assert!(schrodinger_residual(&model, &tr, &g, 0.005).unwrap() < 1e-4);
        assert!(schrodinger_residual(&model, &tr, &g, 0.0).is_err());
    }

    #[test]
    fn residual_detects_a_wrong_phase() {
        let model = CoefficientModel::harmonic(1.0);
        let cfg = IntegratorConfig::rk4(0.0, 0.01, 1e-4);
        let mut tr = PacketTrajectory::evolve(&model, QPPoint::vacuum(), FirstMoments::new(1.0, 0.5), &cfg, 1.0).unwrap();
        let g = Grid1D::around(&tr.states[50], 8.0, 4096).unwrap();
        assert!(schrodinger_residual(&model, &tr, &g, 0.005).unwrap() < 1e-3);
        // drop the continuity of √Q on the forward sample
        tr.states[51].sqrt_q = -tr.states[51].sqrt_q;
        assert!(schrodinger_residual(&model, &tr, &g, 0.005).unwrap() > 1.0);
    }
}
