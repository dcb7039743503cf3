//! Vector fields of every chart, numerical integration with invariant
//! monitoring, the Wei–Norman coefficient system and the invariant `α_Inv`.

mod flows;
pub mod integrator;
mod wei_norman;

pub use flows::{
    alpha_rhs, disk_rhs, ehrenfest_rhs, h2_linear_rhs, h2_point, h3_rhs, integrate,
    integrate_alpha, integrate_moments, invariant_alpha, m_rhs, rhs, siegel_rhs, squeeze_rhs,
    ChartTangent, Diagnostics, MomentTrajectory, Trajectory, TAU_MIN,
};
pub use integrator::{IntegratorConfig, Method, Tolerances};
pub use wei_norman::{wei_norman, WeiNormanCoeffs, BLOWUP_THRESHOLD};
