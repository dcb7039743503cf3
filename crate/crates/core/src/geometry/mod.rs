//! The five state spaces of a squeezed coherent state's second moments and
//! the maps between them:
//!
//! ```text
//!   M  --nu-->  H³
//!   |           | chi
//!   pi          H²
//!   |           | v
//!   HP² <--u--  D²
//! ```
//!
//! plus the complex plane of first moments (`α`). All types are plain
//! immutable values and every map is a pure function.

mod energy;
mod maps;
mod points;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use energy::{
    alpha_energy, chart_energy, energy_disk, energy_h2, energy_h3, energy_m, energy_siegel,
    poisson_bracket, symplectic_area, BracketChart,
};
pub use maps::{
    chi_map, covariance_from_h2, covariance_from_qp, disk_projection, disk_to_h2,
    h2_from_covariance, h2_to_siegel, mobius_to_siegel, nu_inverse, nu_map, pi_map,
    pi_tilde_map, siegel_from_covariance, siegel_to_disk, siegel_to_h2, squeeze_coordinates,
};
pub use points::{
    component_names,
    ChartPoint, CovarianceTriple, DiskPoint, FirstMoments, H2Point, H3Point, QPPoint,
    SiegelPoint, SqueezeCoords,
};

/// Tolerance used when validating user-supplied points.
pub const VALIDATION_TOL: f64 = 1e-9;

/// Tolerance for points built from exact formulas.
pub const CONSTRUCTION_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Chart {
    M,
    H3,
    H2,
    Disk,
    Siegel,
    Alpha,
}

impl Chart {
    pub const ALL: [Chart; 6] = [
        Chart::M,
        Chart::H3,
        Chart::H2,
        Chart::Disk,
        Chart::Siegel,
        Chart::Alpha,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Chart::M => "m",
            Chart::H3 => "h3",
            Chart::H2 => "h2",
            Chart::Disk => "disk",
            Chart::Siegel => "siegel",
            Chart::Alpha => "alpha",
        }
    }

    /// Whether points of `self` determine points of `target` through the map
    /// diagram. `nu` is a linear bijection and `v`, `u` are bijections, so the
    /// only information lost is the sign/phase discarded by `chi` and `pi`.
    pub fn reaches(self, target: Chart) -> bool {
        use Chart::*;
        match (self, target) {
            (Alpha, Alpha) => true,
            (Alpha, _) | (_, Alpha) => false,
            (M | H3, _) => true,
            (H2 | Disk | Siegel, H2 | Disk | Siegel) => true,
            _ => false,
        }
    }
}

impl fmt::Display for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Chart {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Chart::ALL
            .into_iter()
            .find(|c| c.tag().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown chart '{s}' (expected one of m, h3, h2, disk, siegel, alpha)"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chart_tags_round_trip() {
        for c in Chart::ALL {
            assert_eq!(c.tag().parse::<Chart>().unwrap(), c);
        }
        assert!("hp2".parse::<Chart>().is_err());
    }

    #[test]
    fn reachability() {
        assert!(Chart::M.reaches(Chart::Siegel));
        assert!(Chart::H3.reaches(Chart::M));
        assert!(Chart::Siegel.reaches(Chart::Disk));
        assert!(Chart::Disk.reaches(Chart::H2));
        assert!(!Chart::H2.reaches(Chart::M));
        assert!(!Chart::H2.reaches(Chart::H3));
        assert!(!Chart::Siegel.reaches(Chart::Alpha));
    }
}
