//! Closed-form solutions of the degenerate parametric amplifier, used as
//! oracles for the numerical flows, and classification of the elliptic
//! `α(t)` curves as epicycloids or epitrochoids.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::integrator::{dopri45, Tolerances};
use crate::dynamics::m_rhs;
use crate::error::{Error, Result};
use crate::geometry::QPPoint;
use crate::hamiltonian::{amplifier_coefficients, AmplifierParams, Regime};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Largest denominator accepted when deciding that a frequency ratio is rational.
pub const MAX_DENOMINATOR: i64 = 64;

/// Tolerance on `|x − p/q|` for rational detection.
pub const RATIONAL_TOL: f64 = 1e-9;

/// Relative residual accepted when validating the closed-form `(Q, P)`.
pub const ORACLE_TOL: f64 = 1e-6;

/// Reference pair for which `α = (√ω⟨q⟩ + i⟨p⟩/√ω)/√(2ħ)` and the
/// `α`-equation reads `α̇ = −(i/2)(ξe^{−iωt}ᾱ + 2ωα)`.
pub fn alpha_reference(params: &AmplifierParams) -> QPPoint {
    let s = params.omega.sqrt();
    QPPoint::new_unchecked(Complex64::new(-1.0 / s, 0.0), Complex64::new(0.0, -s))
}

/// `α̇₀ = −(i/2)(ξᾱ₀ + 2ωα₀)`.
pub fn alpha_dot_initial(params: &AmplifierParams, alpha0: Complex64) -> Complex64 {
    -0.5 * I * (params.xi() * alpha0.conj() + 2.0 * params.omega * alpha0)
}

/// The right-hand side of the `α` equation at time `t`.
pub fn alpha_field(params: &AmplifierParams, t: f64, alpha: Complex64) -> Complex64 {
    let pump = params.xi() * Complex64::from_polar(1.0, -params.omega * t);
    -0.5 * I * (pump * alpha.conj() + 2.0 * params.omega * alpha)
}

/// Integral curve data of one initial condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplifierSolution {
    pub regime: Regime,
    pub omega: f64,
    pub xi: Complex64,
    /// `Ω` (elliptic), `Ω̃` (hyperbolic) or 0 (parabolic).
    pub big_omega: f64,
    pub alpha0: Complex64,
    pub alphadot0: Complex64,
    /// Polar factors of the two rotating terms (elliptic regime only).
    pub r1: f64,
    pub phi1: f64,
    pub r2: f64,
    pub phi2: f64,
}

impl AmplifierSolution {
    pub fn new(params: &AmplifierParams, alpha0: Complex64) -> Self {
        let regime = params.regime();
        let omega = params.omega;
        let alphadot0 = alpha_dot_initial(params, alpha0);
        let big_omega = match regime {
            Regime::Elliptic => params.big_omega().unwrap_or(0.0),
            Regime::Hyperbolic => params.big_omega_tilde().unwrap_or(0.0),
            Regime::Parabolic => 0.0,
        };
        let (mut r1, mut phi1, mut r2, mut phi2) = (0.0, 0.0, 0.0, 0.0);
        if regime == Regime::Elliptic {
            let w = omega / big_omega;
            let f1 = 0.5 * (1.0 + w) * alpha0 - I * alphadot0 / big_omega;
            let f2 = 0.5 * (1.0 - w) * alpha0 + I * alphadot0 / big_omega;
            (r1, phi1) = f1.to_polar();
            (r2, phi2) = f2.to_polar();
        }
        Self {
            regime,
            omega,
            xi: params.xi(),
            big_omega,
            alpha0,
            alphadot0,
            r1,
            phi1,
            r2,
            phi2,
        }
    }

    /// `α(t)` from the branch matching the regime.
    pub fn alpha(&self, t: f64) -> Complex64 {
        let rot = Complex64::from_polar(1.0, -0.5 * self.omega * t);
        let drive = 2.0 * self.alphadot0 + I * self.omega * self.alpha0;
        let g = match self.regime {
            Regime::Elliptic => {
                let x = 0.5 * self.big_omega * t;
                self.alpha0 * x.cos() + drive / self.big_omega * x.sin()
            }
            Regime::Parabolic => self.alpha0 + 0.5 * drive * t,
            Regime::Hyperbolic => {
                let x = 0.5 * self.big_omega * t;
                self.alpha0 * x.cosh() + drive / self.big_omega * x.sinh()
            }
        };
        rot * g
    }
}

/// `α(t)` for the amplifier with initial value `α₀`.
pub fn alpha_analytic(params: &AmplifierParams, alpha0: Complex64, t: f64) -> Complex64 {
    AmplifierSolution::new(params, alpha0).alpha(t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveKind {
    Epicycloid,
    Epitrochoid,
    Open,
}

/// Classification of an elliptic `α(t)` curve
/// `(a + b)e^{iμ(t − θ₁)} + d e^{iν(t − θ₂)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveClass {
    pub regime: Regime,
    pub mu: f64,
    pub nu: f64,
    /// `ν/μ = (ω + Ω)/(ω − Ω)`; infinite when `ξ = 0`.
    pub ratio: f64,
    pub kind: CurveKind,
    /// Smallest `T > 0` with `μT, νT ∈ 2πℤ`, for closed curves.
    pub period: Option<f64>,
    /// One of the two rotating terms vanishes and the curve is a circle.
    #[serde(default)]
    pub degenerate: bool,
    #[serde(skip)]
    pub a: f64,
    #[serde(skip)]
    pub b: f64,
    #[serde(skip)]
    pub d: f64,
}

impl CurveClass {
    pub fn is_closed(&self) -> bool {
        self.kind != CurveKind::Open
    }
}

/// Best continued-fraction convergent `p/q` of `x` with `q ≤ max_den`, if it
/// matches `x` within `tol`.
pub fn rational_approximation(x: f64, max_den: i64, tol: f64) -> Option<(i64, i64)> {
    if !x.is_finite() {
        return None;
    }
    let (mut p0, mut q0, mut p1, mut q1) = (0i64, 1i64, 1i64, 0i64);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        if a.abs() > 1e15 {
            break;
        }
        let a = a as i64;
        let (p2, q2) = (a * p1 + p0, a * q1 + q0);
        if q2 > max_den {
            break;
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        if (x - p1 as f64 / q1 as f64).abs() <= tol * x.abs().max(1.0) {
            return Some((p1, q1));
        }
        let frac = r - a as f64;
        if frac.abs() < 1e-15 {
            break;
        }
        r = 1.0 / frac;
    }
    None
}

/// Classifies the elliptic-regime curve traced by `α(t)`.
pub fn classify_curve(params: &AmplifierParams, alpha0: Complex64) -> Result<CurveClass> {
    let regime = params.regime();
    if regime != Regime::Elliptic {
        return Err(Error::NotApplicable(format!(
            "curve classification needs the elliptic regime (|xi| < omega), got {regime:?}"
        )));
    }
    let sol = AmplifierSolution::new(params, alpha0);
    let (omega, big) = (params.omega, sol.big_omega);
    let mu = 0.5 * (big - omega);
    let nu = -0.5 * (big + omega);
    let ratio = if omega == big { f64::INFINITY } else { (omega + big) / (omega - big) };

    let b = sol.r1 * (omega - big) / (omega + big);
    let d = sol.r2;
    let a = sol.r1 - b;
    let scale = sol.r1.max(sol.r2).max(f64::MIN_POSITIVE);
    let vanishing = |r: f64| r <= 1e-12 * scale;

    let (kind, period, degenerate) = if vanishing(sol.r1) || vanishing(sol.r2) {
        // a single rotating term: a circle traced at the surviving frequency
        let f = if vanishing(sol.r1) { nu } else { mu };
        let period = if f != 0.0 { Some(TAU / f.abs()) } else { None };
        (CurveKind::Epicycloid, period, true)
    } else {
        match rational_approximation(ratio, MAX_DENOMINATOR, RATIONAL_TOL) {
            Some((_, q)) => {
                let kind = if (d.abs() - b.abs()).abs() <= 1e-9 * scale {
                    CurveKind::Epicycloid
                } else {
                    CurveKind::Epitrochoid
                };
                (kind, Some(2.0 * PI * q as f64 / mu.abs()), false)
            }
            None => (CurveKind::Open, None, false),
        }
    };
    Ok(CurveClass {
        regime,
        mu,
        nu,
        ratio,
        kind,
        period,
        degenerate,
        a,
        b,
        d,
    })
}

/// Fundamental matrix `[[a, b], [c, d]]` of the `(Q, P)` system, as a function of time.
pub type FundamentalMatrix = fn(&AmplifierParams, f64) -> [[f64; 2]; 2];

/// Closed-form fundamental matrix in the elliptic regime, with `β = ϱe^{iθ}`.
pub fn closed_form_matrix(params: &AmplifierParams, t: f64) -> [[f64; 2]; 2] {
    let w = params.omega;
    let big = (w * w - params.xi().norm_sqr()).sqrt();
    let (rho, theta) = (params.beta.norm(), params.beta.arg());
    let k = 4.0 * params.kappa * rho / big;
    let lo = 1.0 - w / big;
    let hi = 1.0 + w / big;
    let x = 0.5 * (big - w) * t;
    let y = 0.5 * (big + w) * t;
    let a = 0.5 * (lo * x.cos() + hi * y.cos() + k * ((theta - y).cos() - (x + theta).cos()));
    let b = 0.5 / w * (hi * y.sin() - lo * x.sin() + k * ((theta - y).sin() - (x + theta).sin()));
    let c = 0.5 * w * (lo * x.sin() - hi * y.sin() + k * ((theta - y).sin() - (x + theta).sin()));
    let d = 0.5 * (lo * x.cos() + hi * y.cos() + k * ((x + theta).cos() - (theta - y).cos()));
    [[a, b], [c, d]]
}

fn apply(m: [[f64; 2]; 2], q0: Complex64, p0: Complex64) -> (Complex64, Complex64) {
    (m[0][0] * q0 + m[0][1] * p0, m[1][0] * q0 + m[1][1] * p0)
}

/// Which source the oracle evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleSource {
    ClosedForm,
    Numerical,
}

/// `(Q(t), P(t))` oracle for the amplifier. The candidate closed form is
/// substituted into the linear system on a validation grid when the oracle
/// is built; if the residual is too large, the mismatch is logged and the
/// oracle falls back to adaptive integration with `rtol = 1e-10`.
#[derive(Debug, Clone)]
pub struct QpOracle {
    params: AmplifierParams,
    q0: Complex64,
    p0: Complex64,
    matrix: FundamentalMatrix,
    source: OracleSource,
    mismatch: Option<Error>,
    validation_residual: f64,
}

impl QpOracle {
    pub fn new(params: &AmplifierParams, initial: &QPPoint) -> Result<Self> {
        Self::with_candidate(params, initial, closed_form_matrix)
    }

    /// Uses `candidate` in place of the closed form. Exposed so that the
    /// fallback path can be exercised.
    pub fn with_candidate(
        params: &AmplifierParams,
        initial: &QPPoint,
        candidate: FundamentalMatrix,
    ) -> Result<Self> {
        params.validate()?;
        if params.regime() != Regime::Elliptic {
            return Err(Error::NotApplicable(
                "closed-form (Q, P) needs the elliptic regime".into(),
            ));
        }
        let mut oracle = Self {
            params: *params,
            q0: initial.q(),
            p0: initial.p(),
            matrix: candidate,
            source: OracleSource::ClosedForm,
            mismatch: None,
            validation_residual: 0.0,
        };
        let grid: Vec<f64> = (0..=256).map(|k| k as f64 * oracle.validation_span() / 256.0).collect();
        match oracle.validate_on(&grid) {
            Ok(r) => oracle.validation_residual = r,
            Err(e) => {
                log::warn!("amplifier (Q, P) closed form rejected, switching to numerical oracle: {e}");
                if let Error::OracleMismatch { residual, .. } = e {
                    oracle.validation_residual = residual;
                }
                oracle.mismatch = Some(e);
                oracle.source = OracleSource::Numerical;
            }
        }
        Ok(oracle)
    }

    /// Two periods of the slower rotating term, at least two pump periods.
    fn validation_span(&self) -> f64 {
        let w = self.params.omega;
        let big = self.params.big_omega().unwrap_or(w);
        let slow = 0.5 * (w - big).abs();
        let span = if slow > 0.0 { 2.0 * TAU / slow } else { 0.0 };
        span.max(2.0 * self.params.period()).min(200.0 * self.params.period())
    }

    /// Substitutes the candidate into `d(Q, P)/dt = A(t)(Q, P)` using a
    /// fourth-order centered difference; returns the largest relative residual.
    fn validate_on(&self, grid: &[f64]) -> Result<f64> {
        let h = 1e-3;
        let mut worst = (0.0f64, 0.0f64);
        for &t in grid {
            let at = |s: f64| apply((self.matrix)(&self.params, s), self.q0, self.p0);
            let (qm2, pm2) = at(t - 2.0 * h);
            let (qm1, pm1) = at(t - h);
            let (qp1, pp1) = at(t + h);
            let (qp2, pp2) = at(t + 2.0 * h);
            let dq = (qm2 - 8.0 * qm1 + 8.0 * qp1 - qp2) / (12.0 * h);
            let dp = (pm2 - 8.0 * pm1 + 8.0 * pp1 - pp2) / (12.0 * h);
            let (q, p) = at(t);
            let (fq, fp) = m_rhs(amplifier_coefficients(&self.params, t), q, p);
            let scale = fq.norm().max(fp.norm()).max(1.0);
            let r = (dq - fq).norm().max((dp - fp).norm()) / scale;
            if !(r <= worst.0) {
                worst = (r, t);
            }
        }
        // the initial condition must hold exactly
        let (q, p) = apply((self.matrix)(&self.params, 0.0), self.q0, self.p0);
        let r0 = (q - self.q0).norm().max((p - self.p0).norm());
        if !(r0 <= worst.0) {
            worst = (r0, 0.0);
        }
        if worst.0 < ORACLE_TOL {
            return Ok(worst.0);
        }
        let t = worst.1;
        let numeric = self.numerical(t)?;
        let (analytic_q, _) = apply((self.matrix)(&self.params, t), self.q0, self.p0);
        Err(Error::OracleMismatch {
            t,
            residual: worst.0,
            analytic_q,
            numeric_q: numeric.q(),
        })
    }

    fn numerical(&self, t: f64) -> Result<QPPoint> {
        if t == 0.0 {
            return Ok(QPPoint::new_unchecked(self.q0, self.p0));
        }
        let params = self.params;
        let f = |s: f64, y: &[f64; 4]| {
            let (dq, dp) = m_rhs(
                amplifier_coefficients(&params, s),
                Complex64::new(y[0], y[1]),
                Complex64::new(y[2], y[3]),
            );
            Ok([dq.re, dq.im, dp.re, dp.im])
        };
        let y0 = [self.q0.re, self.q0.im, self.p0.re, self.p0.im];
        let tol = Tolerances {
            rtol: 1e-10,
            atol: 1e-12,
            max_step: 0.1,
        };
        let (a, b) = if t > 0.0 { (0.0, t) } else { (t, 0.0) };
        if a < 0.0 {
            return Err(Error::Parameter("numerical oracle only runs forward in time".into()));
        }
        let ys = dopri45(f, y0, &[a, b], tol, |_, _| Ok(()))?;
        let y = ys[1];
        Ok(QPPoint::new_unchecked(Complex64::new(y[0], y[1]), Complex64::new(y[2], y[3])))
    }

    pub fn source(&self) -> OracleSource {
        self.source
    }

    /// The rejected candidate's discrepancy, when the fallback is active.
    pub fn mismatch(&self) -> Option<&Error> {
        self.mismatch.as_ref()
    }

    /// Largest relative residual found on the validation grid.
    pub fn validation_residual(&self) -> f64 {
        self.validation_residual
    }

    pub fn eval(&self, t: f64) -> Result<QPPoint> {
        match self.source {
            OracleSource::ClosedForm => {
                let (q, p) = apply((self.matrix)(&self.params, t), self.q0, self.p0);
                Ok(QPPoint::new_unchecked(q, p))
            }
            OracleSource::Numerical => self.numerical(t),
        }
    }
}

/// Closed-form `(Q(t), P(t))`, validated by substitution into the linear
/// system around `t`. Fails with an oracle mismatch when the closed form
/// does not solve the system.
pub fn qp_analytic(params: &AmplifierParams, initial: &QPPoint, t: f64) -> Result<QPPoint> {
    params.validate()?;
    if params.regime() != Regime::Elliptic {
        return Err(Error::NotApplicable(
            "closed-form (Q, P) needs the elliptic regime".into(),
        ));
    }
    let oracle = QpOracle {
        params: *params,
        q0: initial.q(),
        p0: initial.p(),
        matrix: closed_form_matrix,
        source: OracleSource::ClosedForm,
        mismatch: None,
        validation_residual: 0.0,
    };
    oracle.validate_on(&[t])?;
    oracle.eval(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{integrate, integrate_alpha, IntegratorConfig};
    use crate::geometry::ChartPoint;
    use crate::hamiltonian::CoefficientModel;
    use std::f64::consts::SQRT_2;

    fn ratio2() -> AmplifierParams {
        AmplifierParams::from_xi(6.0, Complex64::new(4.0 * SQRT_2, 0.0)).unwrap()
    }

    fn ratio9() -> AmplifierParams {
        AmplifierParams::from_xi(5.0, Complex64::new(3.0, 0.0)).unwrap()
    }

    fn squeezer() -> AmplifierParams {
        AmplifierParams::from_xi(0.75, Complex64::new(0.5, 0.0)).unwrap()
    }

    const A0: Complex64 = Complex64::new(1.0, 1.0);

    #[test]
    fn alpha_dot_examples() {
        assert_eq!(alpha_dot_initial(&ratio2(), Complex64::new(0.0, 0.0)), Complex64::new(0.0, 0.0));
        let d = alpha_dot_initial(&ratio2(), A0);
        let expect = Complex64::new(6.0 - 2.0 * SQRT_2, -(6.0 + 2.0 * SQRT_2));
        assert!((d - expect).norm() < 1e-13);
        let free = AmplifierParams::from_xi(3.0, Complex64::new(0.0, 0.0)).unwrap();
        assert!((alpha_dot_initial(&free, A0) + I * 3.0 * A0).norm() < 1e-15);
    }

    #[test]
    fn alpha_reference_gives_quadrature_form() {
        let p = ratio9();
        let r = alpha_reference(&p);
        assert!(r.constraint_residual() < 1e-15);
        let (g, w) = crate::hamiltonian::gw_transform(amplifier_coefficients(&p, 0.7), &r);
        assert!((g - p.xi() * Complex64::from_polar(1.0, -p.omega * 0.7)).norm() < 1e-12);
        assert!((w - 2.0 * p.omega).abs() < 1e-12);
    }

    #[test]
    fn alpha_analytic_initial_and_free_rotation() {
        for p in [ratio2(), ratio9(), AmplifierParams::from_xi(2.0, Complex64::new(2.0, 0.0)).unwrap(),
                  AmplifierParams::from_xi(2.0, Complex64::new(0.0, 3.0)).unwrap()] {
            assert!((alpha_analytic(&p, A0, 0.0) - A0).norm() < 1e-15);
        }
        let free = AmplifierParams::from_xi(2.0, Complex64::new(0.0, 0.0)).unwrap();
        let a = alpha_analytic(&free, Complex64::new(1.0, 0.0), PI / 2.0);
        assert!((a + 1.0).norm() < 1e-14);
        for t in [0.3, 1.7, 4.0] {
            assert!((alpha_analytic(&free, A0, t).norm() - A0.norm()).abs() < 1e-14);
        }
    }

    #[test]
    fn alpha_analytic_solves_the_ode_in_every_regime() {
        let cases = [
            ratio2(),
            AmplifierParams::from_xi(2.0, Complex64::from_polar(2.0, 0.7)).unwrap(),
            AmplifierParams::from_xi(2.0, Complex64::from_polar(3.0, -1.1)).unwrap(),
        ];
        let h = 1e-4;
        for p in cases {
            for k in 1..40 {
                let t = 0.1 * k as f64;
                let fd = (alpha_analytic(&p, A0, t + h) - alpha_analytic(&p, A0, t - h)) / (2.0 * h);
                let f = alpha_field(&p, t, alpha_analytic(&p, A0, t));
                assert!((fd - f).norm() < 1e-6 * f.norm().max(1.0), "{:?} t={t}", p.regime());
            }
        }
    }

    #[test]
    fn regimes_join_continuously() {
        let t = 1.3;
        let at = |xi: f64| {
            alpha_analytic(&AmplifierParams::from_xi(2.0, Complex64::new(xi, 0.0)).unwrap(), A0, t)
        };
        let mid = at(2.0);
        assert!((at(2.0 - 1e-7) - mid).norm() < 1e-5);
        assert!((at(2.0 + 1e-7) - mid).norm() < 1e-5);
    }

    #[test]
    fn numeric_alpha_matches_closed_form() {
        for p in [ratio2(), ratio9()] {
            let model = CoefficientModel::Amplifier(p);
            let traj = integrate_alpha(&model, A0, &alpha_reference(&p), &IntegratorConfig::rk4(0.0, TAU, 1e-3), 1.0).unwrap();
            for (t, a) in traj.times.iter().zip(traj.complex_values().unwrap()) {
                assert!((a - alpha_analytic(&p, A0, *t)).norm() < 1e-6);
            }
        }
    }

    #[test]
    fn classification() {
        let a = classify_curve(&ratio2(), A0).unwrap();
        assert!(a.is_closed() && (a.ratio - 2.0).abs() < 1e-12);
        assert!((a.period.unwrap() - PI).abs() < 1e-12);
        let b = classify_curve(&ratio9(), A0).unwrap();
        assert!(b.is_closed() && (b.ratio - 9.0).abs() < 1e-12);
        assert!((b.period.unwrap() - 4.0 * PI).abs() < 1e-12);
        for (p, c) in [(ratio2(), a), (ratio9(), b)] {
            let t = c.period.unwrap();
            assert!((alpha_analytic(&p, A0, t) - A0).norm() < 1e-8);
        }
        let irr = AmplifierParams::from_xi(2.0, Complex64::new(SQRT_2, 0.0)).unwrap();
        let c = classify_curve(&irr, A0).unwrap();
        assert_eq!(c.kind, CurveKind::Open);
        assert!((c.ratio - (3.0 + 2.0 * SQRT_2)).abs() < 1e-12);
        assert!(c.period.is_none());
        let hyper = AmplifierParams::from_xi(2.0, Complex64::new(3.0, 0.0)).unwrap();
        assert!(matches!(classify_curve(&hyper, A0), Err(Error::NotApplicable(_))));
    }

    #[test]
    fn single_mode_circle() {
        let free = AmplifierParams::from_xi(2.0, Complex64::new(0.0, 0.0)).unwrap();
        let c = classify_curve(&free, A0).unwrap();
        assert!(c.degenerate && c.kind == CurveKind::Epicycloid);
        assert!((c.period.unwrap() - PI).abs() < 1e-12);
        assert!((alpha_analytic(&free, A0, c.period.unwrap()) - A0).norm() < 1e-12);
    }

    #[test]
    fn epicycloid_identity() {
        let c = classify_curve(&ratio2(), A0).unwrap();
        assert!((c.a + c.b - AmplifierSolution::new(&ratio2(), A0).r1).abs() < 1e-12);
        assert_eq!(c.d, AmplifierSolution::new(&ratio2(), A0).r2);
        let js = serde_json::to_value(c).unwrap();
        for key in ["regime", "mu", "nu", "ratio", "kind", "period"] {
            assert!(js.get(key).is_some(), "{key}");
        }
        assert_eq!(js["regime"], "elliptic");
    }

    #[test]
    fn rational_detection() {
        assert_eq!(rational_approximation(2.0, 64, 1e-9), Some((2, 1)));
        assert_eq!(rational_approximation(9.0 / 7.0, 64, 1e-9), Some((9, 7)));
        assert_eq!(rational_approximation(3.0 + 2.0 * SQRT_2, 64, 1e-9), None);
        assert_eq!(rational_approximation(PI, 64, 1e-9), None);
        assert_eq!(rational_approximation(f64::INFINITY, 64, 1e-9), None);
    }

    #[test]
    fn closed_form_qp_is_valid() {
        let vac = QPPoint::vacuum();
        for p in [squeezer(), ratio2(), AmplifierParams::new(1.3, 0.1, Complex64::from_polar(0.8, 2.1)).unwrap()] {
            let oracle = QpOracle::new(&p, &vac).unwrap();
            assert_eq!(oracle.source(), OracleSource::ClosedForm);
            assert!(oracle.validation_residual() < ORACLE_TOL);
        }
        let q0 = qp_analytic(&squeezer(), &vac, 0.0).unwrap();
        assert_eq!((q0.q(), q0.p()), (vac.q(), vac.p()));
        for k in 0..=40 {
            let t = 4.0 * PI * k as f64 / 40.0;
            assert!(qp_analytic(&squeezer(), &vac, t).unwrap().constraint_residual() < 1e-9);
        }
    }

    #[test]
    fn decoupled_closed_form_is_the_oscillator() {
        let p = AmplifierParams::new(1.0, 0.0, Complex64::new(0.7, 0.2)).unwrap();
        for t in [0.0, 0.5, 2.0, 7.0] {
            let qp = qp_analytic(&p, &QPPoint::vacuum(), t).unwrap();
            assert!((qp.q().norm_sqr() - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn closed_form_matches_integration() {
        let p = squeezer();
        let model = CoefficientModel::Amplifier(p);
        let traj = integrate(&model, &ChartPoint::M(QPPoint::vacuum()), &IntegratorConfig::rk4(0.0, 10.0, 1e-3).with_sample_every(50), 1.0).unwrap();
        for (t, qp) in traj.times.iter().zip(traj.qp_points().unwrap()) {
            let exact = qp_analytic(&p, &QPPoint::vacuum(), *t).unwrap();
            assert!((exact.q() - qp.q()).norm() < 1e-8 && (exact.p() - qp.p()).norm() < 1e-8);
        }
    }

    fn corrupted(params: &AmplifierParams, t: f64) -> [[f64; 2]; 2] {
        let mut m = closed_form_matrix(params, t);
        // a sign slip in one entry
        m[0][1] = -m[0][1];
        m
    }

    #[test]
    fn corrupted_candidate_falls_back() {
        let p = squeezer();
        let vac = QPPoint::vacuum();
        let oracle = QpOracle::with_candidate(&p, &vac, corrupted).unwrap();
        assert_eq!(oracle.source(), OracleSource::Numerical);
        assert!(matches!(oracle.mismatch(), Some(Error::OracleMismatch { .. })));
        let exact = QpOracle::new(&p, &vac).unwrap();
        for t in [0.5, 3.0, 9.0] {
            let a = oracle.eval(t).unwrap();
            let b = exact.eval(t).unwrap();
            assert!((a.q() - b.q()).norm() < 1e-8 && (a.p() - b.p()).norm() < 1e-8);
        }
    }
}
