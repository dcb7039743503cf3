//! Hamiltonian functions on each chart and the Poisson brackets of the two
//! complex models of `H²`.
//!
//! On the second-moment charts the functions agree under the maps of the
//! diagram: `H_M = H_HP∘π = e_{H²}∘χ∘ν = H_D∘v∘χ∘ν`.

use num_complex::Complex64;

use super::maps::nu_inverse;
use super::{ChartPoint, DiskPoint, H2Point, H3Point, QPPoint, SiegelPoint};
use crate::hamiltonian::{gw_transform, Coeffs};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `H_M = H₁|Q|² + V(QP̄ + Q̄P) + H₂|P|²`.
pub fn energy_m(qp: &QPPoint, c: Coeffs) -> f64 {
    let (q, p) = (qp.q(), qp.p());
    c.h1 * q.norm_sqr() + 2.0 * c.v * (q * p.conj()).re + c.h2 * p.norm_sqr()
}

pub fn energy_h3(h: &H3Point, c: Coeffs) -> f64 {
    energy_m(&nu_inverse(h), c)
}

/// `e_{H²} = (H₂ + H₁)y¹ + 2Vy² + (H₂ − H₁)y³`.
pub fn energy_h2(h: &H2Point, c: Coeffs) -> f64 {
    let [y1, y2, y3] = h.y;
    (c.h2 + c.h1) * y1 + 2.0 * c.v * y2 + (c.h2 - c.h1) * y3
}

/// `H_HP = (2i/(𝒞 − 𝒞̄)) (1, 𝒞̄) K (1, 𝒞)ᵀ`.
pub fn energy_siegel(s: &SiegelPoint, c: Coeffs) -> f64 {
    let z = s.c;
    (c.h1 + 2.0 * c.v * z.re + c.h2 * z.norm_sqr()) / z.im
}

/// `H_D = (1 − |ζ|²)⁻¹ (conj(iζ + 1), conj(ζ + i)) K (iζ + 1, ζ + i)ᵀ`.
pub fn energy_disk(d: &DiskPoint, c: Coeffs) -> f64 {
    let z = d.zeta;
    let a = I * z + 1.0;
    let b = z + I;
    (c.h1 * a.norm_sqr() + 2.0 * c.v * (a.conj() * b).re + c.h2 * b.norm_sqr())
        / (1.0 - z.norm_sqr())
}

/// `e = (ħ/4)(α, ᾱ) [[Ḡ, W], [W, G]] (α, ᾱ)ᵀ` with `(G, W)` built from the
/// reference pair defining `α`.
pub fn alpha_energy(alpha: Complex64, c: Coeffs, reference: &QPPoint, hbar: f64) -> f64 {
    let (g, w) = gw_transform(c, reference);
    hbar / 2.0 * ((g.conj() * alpha * alpha).re + w * alpha.norm_sqr())
}

/// Hamiltonian function of the point's chart. `α` is read against the
/// vacuum reference `(1, i)`; use [`alpha_energy`] for other references.
pub fn chart_energy(point: &ChartPoint, c: Coeffs, hbar: f64) -> f64 {
    match point {
        ChartPoint::M(qp) => energy_m(qp, c),
        ChartPoint::H3(h) => energy_h3(h, c),
        ChartPoint::H2(h) => energy_h2(h, c),
        ChartPoint::Disk(d) => energy_disk(d, c),
        ChartPoint::Siegel(s) => energy_siegel(s, c),
        ChartPoint::Alpha(a) => alpha_energy(*a, c, &QPPoint::vacuum(), hbar),
    }
}

/// `ω(α, β) = xy′ − x′y` for `α = x + iy` and `β = x′ − iy′`.
pub fn symplectic_area(alpha: Complex64, beta: Complex64) -> f64 {
    let (x, y) = (alpha.re, alpha.im);
    let (xp, yp) = (beta.re, -beta.im);
    x * yp - xp * y
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BracketChart {
    Siegel,
    Disk,
}

/// Poisson bracket from real gradients `[∂/∂Re, ∂/∂Im]` at `point`:
/// `{A, B} = g(point) [∂A/∂Im ∂B/∂Re − ∂A/∂Re ∂B/∂Im]` with
/// `g = 𝒞_I²` on the half plane and `(1 − |ζ|²)²/4` on the disk.
/// Evolution of an observable is `dA/dt = {H, A}`.
pub fn poisson_bracket(chart: BracketChart, grad_a: [f64; 2], grad_b: [f64; 2], point: Complex64) -> f64 {
    let g = match chart {
        BracketChart::Siegel => point.im * point.im,
        BracketChart::Disk => {
            let w = 1.0 - point.norm_sqr();
            w * w / 4.0
        }
    };
    g * (grad_a[1] * grad_b[0] - grad_a[0] * grad_b[1])
}
