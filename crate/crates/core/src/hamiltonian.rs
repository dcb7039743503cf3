//! Time-dependent quadratic Hamiltonians
//! `H = ½ (q, p) [[H₁, V], [V, H₂]] (q, p)ᵀ` and their coefficient models.
//!
//! The effective single-mode amplifier model drops a constant energy offset;
//! it only contributes a global phase and is not tracked.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::QPPoint;

pub const DEFAULT_HBAR: f64 = 1.0;

/// Relative tolerance used to decide that `|ξ| = ω`.
pub const REGIME_TOL: f64 = 1e-12;

/// Coefficient triple `(H₁, H₂, V)` at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coeffs {
    pub h1: f64,
    pub h2: f64,
    pub v: f64,
}

impl Coeffs {
    pub const fn new(h1: f64, h2: f64, v: f64) -> Self {
        Self { h1, h2, v }
    }

    pub fn is_finite(&self) -> bool {
        self.h1.is_finite() && self.h2.is_finite() && self.v.is_finite()
    }
}

/// A time-dependent coefficient model. Implementors must be immutable after
/// construction so that evaluation is safe from several threads.
pub trait QuadraticCoefficients: Send + Sync {
    fn coefficients(&self, t: f64) -> Coeffs;

    /// `true` when the coefficients do not depend on time.
    fn is_autonomous(&self) -> bool {
        false
    }

    fn evaluate(&self, t: f64) -> Result<Coeffs> {
        if !t.is_finite() {
            return Err(Error::ModelEvaluation { t });
        }
        let c = self.coefficients(t);
        if c.is_finite() {
            Ok(c)
        } else {
            Err(Error::ModelEvaluation { t })
        }
    }
}

impl<F> QuadraticCoefficients for F
where
    F: Fn(f64) -> Coeffs + Send + Sync,
{
    fn coefficients(&self, t: f64) -> Coeffs {
        self(t)
    }
}

/// Named coefficient models, serialized as `{kind, params}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "lowercase")]
pub enum CoefficientModel {
    Constant { h1: f64, h2: f64, v: f64 },
    Harmonic { omega: f64 },
    Amplifier(AmplifierParams),
    Tabulated(TabulatedCoefficients),
}

impl CoefficientModel {
    pub fn harmonic(omega: f64) -> Self {
        CoefficientModel::Harmonic { omega }
    }

    pub fn free_particle() -> Self {
        CoefficientModel::Constant {
            h1: 0.0,
            h2: 1.0,
            v: 0.0,
        }
    }

    pub fn constant(c: Coeffs) -> Self {
        CoefficientModel::Constant {
            h1: c.h1,
            h2: c.h2,
            v: c.v,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            CoefficientModel::Constant { h1, h2, v } => {
                if Coeffs::new(*h1, *h2, *v).is_finite() {
                    Ok(())
                } else {
                    Err(Error::Parameter("constant coefficients must be finite".into()))
                }
            }
            CoefficientModel::Harmonic { omega } => {
                if omega.is_finite() && *omega > 0.0 {
                    Ok(())
                } else {
                    Err(Error::Parameter(format!("harmonic omega must be > 0, got {omega}")))
                }
            }
            CoefficientModel::Amplifier(p) => p.validate(),
            CoefficientModel::Tabulated(tab) => tab.validate(),
        }
    }
}

impl QuadraticCoefficients for CoefficientModel {
    fn coefficients(&self, t: f64) -> Coeffs {
        match self {
            CoefficientModel::Constant { h1, h2, v } => Coeffs::new(*h1, *h2, *v),
            CoefficientModel::Harmonic { omega } => Coeffs::new(omega * omega, 1.0, 0.0),
            CoefficientModel::Amplifier(p) => amplifier_coefficients(p, t),
            CoefficientModel::Tabulated(tab) => tab.at(t),
        }
    }

    fn is_autonomous(&self) -> bool {
        match self {
            CoefficientModel::Constant { .. } | CoefficientModel::Harmonic { .. } => true,
            CoefficientModel::Amplifier(p) => p.kappa == 0.0 || p.beta == Complex64::new(0.0, 0.0),
            CoefficientModel::Tabulated(tab) => tab.is_constant(),
        }
    }
}

/// Piecewise-linear coefficients on a strictly increasing time grid.
/// Outside the grid the end values are held.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTable")]
pub struct TabulatedCoefficients {
    t: Vec<f64>,
    h1: Vec<f64>,
    h2: Vec<f64>,
    v: Vec<f64>,
}

#[derive(Deserialize)]
struct RawTable {
    t: Vec<f64>,
    h1: Vec<f64>,
    h2: Vec<f64>,
    v: Vec<f64>,
}

impl TryFrom<RawTable> for TabulatedCoefficients {
    type Error = Error;

    fn try_from(raw: RawTable) -> Result<Self> {
        TabulatedCoefficients::new(raw.t, raw.h1, raw.h2, raw.v)
    }
}

impl TabulatedCoefficients {
    pub fn new(t: Vec<f64>, h1: Vec<f64>, h2: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        let tab = Self { t, h1, h2, v };
        tab.validate()?;
        Ok(tab)
    }

    fn validate(&self) -> Result<()> {
        let n = self.t.len();
        if n < 2 {
            return Err(Error::Parameter("tabulated model needs at least two samples".into()));
        }
        if self.h1.len() != n || self.h2.len() != n || self.v.len() != n {
            return Err(Error::Parameter("tabulated columns have different lengths".into()));
        }
        if self.t.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Parameter("tabulated times must be strictly increasing".into()));
        }
        let all_finite = self
            .t
            .iter()
            .chain(&self.h1)
            .chain(&self.h2)
            .chain(&self.v)
            .all(|x| x.is_finite());
        if !all_finite {
            return Err(Error::Parameter("tabulated values must be finite".into()));
        }
        Ok(())
    }

    fn is_constant(&self) -> bool {
        let same = |xs: &[f64]| xs.iter().all(|x| *x == xs[0]);
        same(&self.h1) && same(&self.h2) && same(&self.v)
    }

    pub fn at(&self, t: f64) -> Coeffs {
        let n = self.t.len();
        let sample = |k: usize| Coeffs::new(self.h1[k], self.h2[k], self.v[k]);
        if t <= self.t[0] {
            return sample(0);
        }
        if t >= self.t[n - 1] {
            return sample(n - 1);
        }
        let k = self.t.partition_point(|&tk| tk <= t) - 1;
        let s = (t - self.t[k]) / (self.t[k + 1] - self.t[k]);
        let lerp = |xs: &[f64]| xs[k] + s * (xs[k + 1] - xs[k]);
        Coeffs::new(lerp(&self.h1), lerp(&self.h2), lerp(&self.v))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Elliptic,
    Parabolic,
    Hyperbolic,
}

/// Effective degenerate parametric amplifier: signal frequency `ω`, coupling
/// `κ` and classical pump amplitude `β = ϱ e^{iθ}`. Only `ξ = 4κβ` enters the
/// dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplifierParams {
    pub omega: f64,
    pub kappa: f64,
    pub beta: Complex64,
}

impl AmplifierParams {
    pub fn new(omega: f64, kappa: f64, beta: Complex64) -> Result<Self> {
        let p = Self { omega, kappa, beta };
        p.validate()?;
        Ok(p)
    }

    /// Parameters with unit coupling realizing a given `ξ`.
    pub fn from_xi(omega: f64, xi: Complex64) -> Result<Self> {
        Self::new(omega, 1.0, xi / 4.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega.is_finite() && self.omega > 0.0) {
            return Err(Error::Parameter(format!(
                "amplifier omega must be > 0, got {}",
                self.omega
            )));
        }
        if !(self.kappa.is_finite() && self.beta.re.is_finite() && self.beta.im.is_finite()) {
            return Err(Error::Parameter("amplifier kappa and beta must be finite".into()));
        }
        Ok(())
    }

    pub fn xi(&self) -> Complex64 {
        4.0 * self.kappa * self.beta
    }

    pub fn pump_modulus(&self) -> f64 {
        self.beta.norm()
    }

    pub fn pump_phase(&self) -> f64 {
        self.beta.arg()
    }

    pub fn regime(&self) -> Regime {
        let xi = self.xi().norm();
        if (xi - self.omega).abs() <= REGIME_TOL * self.omega.max(1.0) {
            Regime::Parabolic
        } else if xi < self.omega {
            Regime::Elliptic
        } else {
            Regime::Hyperbolic
        }
    }

    /// `Ω = √(ω² − |ξ|²)`, real only in the elliptic regime.
    pub fn big_omega(&self) -> Option<f64> {
        (self.regime() == Regime::Elliptic)
            .then(|| (self.omega * self.omega - self.xi().norm_sqr()).sqrt())
    }

    /// `Ω̃ = √(|ξ|² − ω²)`, real only in the hyperbolic regime.
    pub fn big_omega_tilde(&self) -> Option<f64> {
        (self.regime() == Regime::Hyperbolic)
            .then(|| (self.xi().norm_sqr() - self.omega * self.omega).sqrt())
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega
    }
}

/// Coefficients of the amplifier in the `(Q, P)` linear system.
pub fn amplifier_coefficients(params: &AmplifierParams, t: f64) -> Coeffs {
    let (s, c) = (params.omega * t).sin_cos();
    let (br, bi) = (params.beta.re, params.beta.im);
    let k = params.kappa;
    let w = params.omega;
    let in_phase = br * c + bi * s;
    let quadrature = bi * c - br * s;
    Coeffs {
        h1: w * w + 2.0 * k * w * in_phase,
        h2: 1.0 - 2.0 * k / w * in_phase,
        v: 2.0 * k * quadrature,
    }
}

/// Evaluates a model at `t`, rejecting non-finite results.
pub fn evaluate<M: QuadraticCoefficients + ?Sized>(model: &M, t: f64) -> Result<Coeffs> {
    model.evaluate(t)
}

/// `(G, W)` of the Hamiltonian written in the bosonic operators built from `(Q, P)`.
pub fn gw_transform(c: Coeffs, qp: &QPPoint) -> (Complex64, f64) {
    let (q, p) = (qp.q(), qp.p());
    let g = c.h1 * q * q + 2.0 * c.v * q * p + c.h2 * p * p;
    // Q P̄ + P Q̄ = 2 Re(Q P̄)
    let w = c.h1 * q.norm_sqr() + 2.0 * c.v * (q * p.conj()).re + c.h2 * p.norm_sqr();
    (g, w)
}
