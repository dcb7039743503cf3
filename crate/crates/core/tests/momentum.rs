//! Momentum-space packets against a discrete Fourier transform of the
//! position-space samples.

use std::f64::consts::{PI, SQRT_2};

use gausspack::dynamics::IntegratorConfig;
use gausspack::geometry::{FirstMoments, QPPoint};
use gausspack::hamiltonian::{AmplifierParams, CoefficientModel};
use gausspack::wavepacket::{psi_momentum, psi_position, GaussianState, Grid1D, PacketTrajectory};
use num_complex::Complex64;
use rustfft::FftPlanner;

/// Relative `L²` distance between `psi_momentum` and
/// `(2πħ)^{−1/2} Σ_j e^{−ipq_j/ħ} ψ(q_j) Δq` on the FFT momentum grid.
fn fft_mismatch(state: &GaussianState) -> f64 {
    let n = 4096;
    let grid = Grid1D::around(state, 12.0, n).unwrap();
    let qs = grid.points();
    let dq = grid.spacing();
    let hbar = state.hbar;
    let mut buf: Vec<Complex64> = qs.iter().map(|&q| psi_position(state, q)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);

    let mut num = 0.0;
    let mut den = 0.0;
    for (k, f) in buf.iter().enumerate() {
        let kk = if k < n / 2 { k as f64 } else { k as f64 - n as f64 };
        let p = 2.0 * PI * hbar * kk / (n as f64 * dq);
        let numeric = f * dq * Complex64::from_polar(1.0, -p * qs[0] / hbar) / (2.0 * PI * hbar).sqrt();
        let exact = psi_momentum(state, p);
        num += (numeric - exact).norm_sqr();
        den += exact.norm_sqr();
    }
    (num / den).sqrt()
}

fn squeezed() -> QPPoint {
    QPPoint::new(Complex64::new(SQRT_2, 0.0), Complex64::new(1.0, 1.0) / SQRT_2).unwrap()
}

#[test]
fn vacuum_transform() {
    assert!(fft_mismatch(&GaussianState::vacuum(1.0)) < 1e-6);
}

#[test]
fn squeezed_displaced_transform() {
    for hbar in [0.5, 1.0, 2.0] {
        let s = GaussianState::new(squeezed(), FirstMoments::new(0.5, -1.0), hbar).unwrap();
        let e = fft_mismatch(&s);
        assert!(e < 1e-6, "hbar {hbar}: {e:e}");
    }
}

#[test]
fn transform_holds_along_an_amplifier_trajectory() {
    // the momentum prefactor must follow the continued √Q branch
    let model = CoefficientModel::Amplifier(AmplifierParams::from_xi(0.75, Complex64::new(0.5, 0.0)).unwrap());
    let cfg = IntegratorConfig::rk4(0.0, 12.0, 1e-3);
    let packets =
        PacketTrajectory::evolve(&model, QPPoint::vacuum(), FirstMoments::new(1.0, 0.0), &cfg, 1.0).unwrap();
    for k in (0..packets.len()).step_by(1500) {
        let e = fft_mismatch(&packets.states[k]);
        assert!(e < 1e-6, "t = {}: {e:e}", packets.times[k]);
    }
}
