//! Explicit Runge–Kutta integrators on fixed-size real state vectors.
//!
//! Both drivers call a `hook` after every accepted step. The hook may modify
//! the state in place (constraint renormalization) or abort the integration
//! (chart singularities).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    #[default]
    Rk4,
    Rk45,
}

/// Time span, method and tolerances of a run. Output samples are spaced by
/// `step * sample_every` for both methods; the adaptive method only uses
/// `step` to place its output grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntegratorConfig {
    pub method: Method,
    pub step: f64,
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    pub t0: f64,
    pub t1: f64,
    pub renormalize: bool,
    pub sample_every: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            method: Method::Rk4,
            step: 1e-3,
            rtol: 1e-10,
            atol: 1e-12,
            max_step: 0.1,
            t0: 0.0,
            t1: 10.0,
            renormalize: false,
            sample_every: 1,
        }
    }
}

impl IntegratorConfig {
    pub fn rk4(t0: f64, t1: f64, step: f64) -> Self {
        Self {
            t0,
            t1,
            step,
            ..Self::default()
        }
    }

    pub fn rk45(t0: f64, t1: f64, output_step: f64, rtol: f64) -> Self {
        Self {
            method: Method::Rk45,
            t0,
            t1,
            step: output_step,
            rtol,
            atol: rtol * 1e-2,
            ..Self::default()
        }
    }

    pub fn with_renormalization(mut self, on: bool) -> Self {
        self.renormalize = on;
        self
    }

    pub fn with_sample_every(mut self, k: usize) -> Self {
        self.sample_every = k;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Parameter(msg));
        if !(self.t0.is_finite() && self.t1.is_finite() && self.t1 > self.t0) {
            return bad(format!("need t1 > t0, got t0 = {}, t1 = {}", self.t0, self.t1));
        }
        if !(self.step.is_finite() && self.step > 0.0) {
            return bad(format!("step must be > 0, got {}", self.step));
        }
        if self.sample_every == 0 {
            return bad("sample_every must be at least 1".into());
        }
        if self.method == Method::Rk45 {
            if !(self.rtol > 0.0 && self.atol >= 0.0) {
                return bad("rtol must be > 0 and atol >= 0".into());
            }
            if !(self.max_step > 0.0) {
                return bad(format!("max_step must be > 0, got {}", self.max_step));
            }
        }
        Ok(())
    }

    /// Number of fixed steps and the adjusted step that lands on `t1`.
    pub fn fixed_steps(&self) -> (usize, f64) {
        let span = self.t1 - self.t0;
        let n = ((span / self.step).round() as usize).max(1);
        (n, span / n as f64)
    }

    /// Output times shared by both methods.
    pub fn output_times(&self) -> Vec<f64> {
        let (n, h) = self.fixed_steps();
        let mut out: Vec<f64> = (0..=n)
            .step_by(self.sample_every)
            .map(|k| self.t0 + k as f64 * h)
            .collect();
        if n % self.sample_every != 0 {
            out.push(self.t1);
        }
        if let Some(last) = out.last_mut() {
            *last = self.t1;
        }
        out
    }
}

fn axpy<const N: usize>(y: &[f64; N], a: f64, k: &[f64; N]) -> [f64; N] {
    std::array::from_fn(|i| y[i] + a * k[i])
}

fn check_finite<const N: usize>(t: f64, y: &[f64; N]) -> Result<()> {
    if y.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Integration {
            t,
            reason: "state became non-finite".into(),
            last_state: y.to_vec(),
        })
    }
}

/// One classical fourth-order Runge–Kutta step.
pub fn rk4_step<const N: usize, F>(f: &F, t: f64, y: &[f64; N], h: f64) -> Result<[f64; N]>
where
    F: Fn(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let k1 = f(t, y)?;
    let k2 = f(t + h / 2.0, &axpy(y, h / 2.0, &k1))?;
    let k3 = f(t + h / 2.0, &axpy(y, h / 2.0, &k2))?;
    let k4 = f(t + h, &axpy(y, h, &k3))?;
    Ok(std::array::from_fn(|i| {
        y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
    }))
}

/// Fixed-step RK4 from `t0` to `t1` with `n` equal steps, recording every
/// `sample_every`-th state and the final one.
pub fn rk4<const N: usize, F, H>(
    f: F,
    y0: [f64; N],
    t0: f64,
    t1: f64,
    n: usize,
    sample_every: usize,
    mut hook: H,
) -> Result<(Vec<f64>, Vec<[f64; N]>)>
where
    F: Fn(f64, &[f64; N]) -> Result<[f64; N]>,
    H: FnMut(f64, &mut [f64; N]) -> Result<()>,
{
    let h = (t1 - t0) / n as f64;
    let mut y = y0;
    hook(t0, &mut y)?;
    let mut times = vec![t0];
    let mut states = vec![y];
    for k in 1..=n {
        let t_prev = t0 + (k - 1) as f64 * h;
        let t = if k == n { t1 } else { t0 + k as f64 * h };
        let next = rk4_step(&f, t_prev, &y, t - t_prev)?;
        check_finite(t, &next).map_err(|e| with_last_state(e, &y))?;
        y = next;
        hook(t, &mut y)?;
        if k % sample_every == 0 || k == n {
            times.push(t);
            states.push(y);
        }
    }
    Ok((times, states))
}

fn with_last_state<const N: usize>(e: Error, y: &[f64; N]) -> Error {
    match e {
        Error::Integration { t, reason, .. } => Error::Integration {
            t,
            reason,
            last_state: y.to_vec(),
        },
        other => other,
    }
}

/// Tolerances of the adaptive driver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            max_step: 0.1,
        }
    }
}

const MAX_STEPS: usize = 5_000_000;

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Adaptive Dormand–Prince integration hitting every time in `t_eval`
/// exactly (steps are shortened to land on the output grid). `t_eval` must be
/// increasing and start at the initial time.
pub fn dopri45<const N: usize, F, H>(
    f: F,
    y0: [f64; N],
    t_eval: &[f64],
    tol: Tolerances,
    mut hook: H,
) -> Result<Vec<[f64; N]>>
where
    F: Fn(f64, &[f64; N]) -> Result<[f64; N]>,
    H: FnMut(f64, &mut [f64; N]) -> Result<()>,
{
    let Some(&t_start) = t_eval.first() else {
        return Ok(Vec::new());
    };
    let mut t = t_start;
    let mut y = y0;
    hook(t, &mut y)?;
    let mut out = vec![y];
    let t_end = *t_eval.last().unwrap();
    let mut h = initial_step(&f, t, &y, tol, t_end - t)?;
    let mut steps = 0usize;

    for &target in &t_eval[1..] {
        while t < target {
            steps += 1;
            if steps > MAX_STEPS {
                return Err(Error::Integration {
                    t,
                    reason: format!("exceeded {MAX_STEPS} steps"),
                    last_state: y.to_vec(),
                });
            }
            let remaining = target - t;
            let last = h >= remaining;
            let step = if last { remaining } else { h };
            let (y_new, err) = dp_step(&f, t, &y, step)?;
            let scale: [f64; N] =
                std::array::from_fn(|i| tol.atol + tol.rtol * y[i].abs().max(y_new[i].abs()));
            let norm = (err
                .iter()
                .zip(&scale)
                .map(|(e, s)| (e / s) * (e / s))
                .sum::<f64>()
                / N as f64)
                .sqrt();
            if !norm.is_finite() {
                h = step / 10.0;
            } else if norm <= 1.0 {
                t = if last { target } else { t + step };
                y = y_new;
                hook(t, &mut y)?;
                let grow = if norm == 0.0 { 5.0 } else { (0.9 * norm.powf(-0.2)).clamp(0.2, 5.0) };
                // a step clipped to the output grid says little about the next one
                if !last {
                    h = (step * grow).min(tol.max_step);
                } else {
                    h = h.max(step * grow).min(tol.max_step);
                }
                continue;
            } else {
                h = step * (0.9 * norm.powf(-0.2)).clamp(0.2, 1.0);
            }
            if h <= 1e-14 * t.abs().max(1.0) {
                return Err(Error::Integration {
                    t,
                    reason: format!("step size underflow (h = {h:.3e})"),
                    last_state: y.to_vec(),
                });
            }
        }
        out.push(y);
    }
    Ok(out)
}

fn dp_step<const N: usize, F>(f: &F, t: f64, y: &[f64; N], h: f64) -> Result<([f64; N], [f64; N])>
where
    F: Fn(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let mut k = [[0.0; N]; 7];
    for s in 0..7 {
        let ys: [f64; N] = std::array::from_fn(|i| {
            y[i] + h * (0..s).map(|j| A[s][j] * k[j][i]).sum::<f64>()
        });
        k[s] = f(t + C[s] * h, &ys)?;
    }
    let y5: [f64; N] = std::array::from_fn(|i| y[i] + h * (0..7).map(|s| B5[s] * k[s][i]).sum::<f64>());
    let err: [f64; N] = std::array::from_fn(|i| h * (0..7).map(|s| (B5[s] - B4[s]) * k[s][i]).sum::<f64>());
    Ok((y5, err))
}

fn initial_step<const N: usize, F>(f: &F, t: f64, y: &[f64; N], tol: Tolerances, span: f64) -> Result<f64>
where
    F: Fn(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let d0 = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    let d1 = f(t, y)?.iter().map(|v| v * v).sum::<f64>().sqrt();
    let h = if d0 > 1e-5 && d1 > 1e-5 { 0.01 * d0 / d1 } else { 1e-4 };
    Ok(h.min(tol.max_step).min(span.max(f64::MIN_POSITIVE)))
}
