//! Wei–Norman factorization coefficients of the evolution operator,
//!
//! ```text
//! Ċ₁ = −H₂C₁² − 2VC₁ − H₁,   Ċ₂ = −H₂C₁ − V,   Ċ₃ = −e^{2C₂} H₂,
//! ```
//!
//! with `C_k(0) = 0`. `C₁` starts on the real axis, off the physical leaf,
//! and may blow up in finite time. Once `|C₁| > 1` the driver switches to
//! `w = 1/C₁`, which obeys the regular equation `ẇ = H₂ + 2Vw + H₁w²`, and
//! reports the zero of `w` as the singular time.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::integrator::rk4_step;
use crate::error::{Error, Result};
use crate::hamiltonian::QuadraticCoefficients;

/// Largest internal step.
const MAX_STEP: f64 = 1e-3;

/// `|C₁|` above which the solution is treated as singular.
pub const BLOWUP_THRESHOLD: f64 = 1e8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeiNormanCoeffs {
    pub times: Vec<f64>,
    pub c1: Vec<Complex64>,
    pub c2: Vec<Complex64>,
    pub c3: Vec<Complex64>,
}

/// State: `[u, C₂, C₃]` as six reals, where `u = C₁` or `u = 1/C₁`.
type State = [f64; 6];

fn split(y: &State) -> (Complex64, Complex64, Complex64) {
    (
        Complex64::new(y[0], y[1]),
        Complex64::new(y[2], y[3]),
        Complex64::new(y[4], y[5]),
    )
}

fn join(u: Complex64, c2: Complex64, c3: Complex64) -> State {
    [u.re, u.im, c2.re, c2.im, c3.re, c3.im]
}

/// Integrates the system on `grid`, which must start at 0 and increase.
pub fn wei_norman<M>(model: &M, grid: &[f64]) -> Result<WeiNormanCoeffs>
where
    M: QuadraticCoefficients + ?Sized,
{
    if grid.first() != Some(&0.0) {
        return Err(Error::GridMismatch("Wei-Norman grid must start at t = 0".into()));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::GridMismatch("Wei-Norman grid must be strictly increasing".into()));
    }

    let direct = |t: f64, y: &State| -> Result<State> {
        let c = model.evaluate(t)?;
        let (c1, c2, _) = split(y);
        Ok(join(
            -c.h2 * c1 * c1 - 2.0 * c.v * c1 - c.h1,
            -c.h2 * c1 - c.v,
            -(2.0 * c2).exp() * c.h2,
        ))
    };
    let inverted = |t: f64, y: &State| -> Result<State> {
        let c = model.evaluate(t)?;
        let (w, c2, _) = split(y);
        Ok(join(
            c.h2 + 2.0 * c.v * w + c.h1 * w * w,
            -c.h2 / w - c.v,
            -(2.0 * c2).exp() * c.h2,
        ))
    };

    let mut out = WeiNormanCoeffs {
        times: vec![0.0],
        c1: vec![Complex64::new(0.0, 0.0)],
        c2: vec![Complex64::new(0.0, 0.0)],
        c3: vec![Complex64::new(0.0, 0.0)],
    };
    let mut y: State = [0.0; 6];
    let mut flipped = false;

    for win in grid.windows(2) {
        let (ta, tb) = (win[0], win[1]);
        let n = ((tb - ta) / MAX_STEP).ceil().max(1.0) as usize;
        let h = (tb - ta) / n as f64;
        for k in 0..n {
            let t = ta + k as f64 * h;
            let step = if k + 1 == n { tb - t } else { h };
            let next = if flipped {
                rk4_step(&inverted, t, &y, step)?
            } else {
                rk4_step(&direct, t, &y, step)?
            };
            if flipped {
                let (w0, _, _) = split(&y);
                let (w1, _, _) = split(&next);
                if w0.re.signum() != w1.re.signum() || w1.norm() < 1.0 / BLOWUP_THRESHOLD {
                    let time = bisect_zero(&inverted, t, &y, step)?;
                    return Err(Error::Singularity { time });
                }
            }
            if next.iter().any(|v| !v.is_finite()) {
                return Err(Error::Integration {
                    t: t + step,
                    reason: "Wei-Norman coefficients became non-finite".into(),
                    last_state: y.to_vec(),
                });
            }
            y = next;
            let (u, _, _) = split(&y);
            if !flipped && u.norm() > 1.0 {
                y[..2].copy_from_slice(&[u.inv().re, u.inv().im]);
                flipped = true;
            } else if flipped && u.norm() > 1.0 {
                y[..2].copy_from_slice(&[u.inv().re, u.inv().im]);
                flipped = false;
            }
        }
        let (u, c2, c3) = split(&y);
        out.times.push(tb);
        out.c1.push(if flipped { u.inv() } else { u });
        out.c2.push(c2);
        out.c3.push(c3);
    }
    Ok(out)
}

/// Locates the zero of `Re w` inside one step by bisection on single RK4
/// steps of varying length from the step start.
fn bisect_zero<F>(f: &F, t: f64, y: &State, h: f64) -> Result<f64>
where
    F: Fn(f64, &State) -> Result<State>,
{
    let w_at = |s: f64| -> Result<f64> {
        if s == 0.0 {
            return Ok(y[0]);
        }
        Ok(rk4_step(f, t, y, s)?[0])
    };
    let (mut lo, mut hi) = (0.0, h);
    let f_lo = w_at(lo)?;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let f_mid = w_at(mid)?;
        if f_mid == 0.0 {
            return Ok(t + mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(t + 0.5 * (lo + hi))
}
