//! Run configuration (TOML, or JSON when the file ends in `.json`).

use std::path::Path;

use anyhow::{Context, Result};
use gausspack::dynamics::IntegratorConfig;
use gausspack::geometry::{
    siegel_from_covariance, Chart, ChartPoint, CovarianceTriple, DiskPoint, FirstMoments,
    H2Point, H3Point, QPPoint, SiegelPoint,
};
use gausspack::hamiltonian::{AmplifierParams, CoefficientModel, TabulatedCoefficients};
use gausspack::io::Format;
use num_complex::Complex64;
use serde::Deserialize;

/// A configuration problem; maps to exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn config_error<T>(msg: impl Into<String>) -> Result<T> {
    Err(ConfigError(msg.into()).into())
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub hbar: Option<f64>,
    pub hamiltonian: HamiltonianSection,
    pub initial: InitialSection,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub outputs: OutputsSection,
    /// Parameter sweep: each entry replaces whole sections of the base run.
    #[serde(default)]
    pub run: Vec<SweepEntry>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepEntry {
    pub name: String,
    #[serde(default)]
    pub hbar: Option<f64>,
    #[serde(default)]
    pub hamiltonian: Option<HamiltonianSection>,
    #[serde(default)]
    pub initial: Option<InitialSection>,
    #[serde(default)]
    pub integrator: Option<IntegratorConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "lowercase", deny_unknown_fields)]
pub enum HamiltonianSection {
    Constant { h1: f64, h2: f64, v: f64 },
    Harmonic { omega: f64 },
    Amplifier(AmplifierSection),
    Tabulated { t: Vec<f64>, h1: Vec<f64>, h2: Vec<f64>, v: Vec<f64> },
}

/// Either `xi` (with unit coupling) or `kappa` and `beta`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmplifierSection {
    pub omega: f64,
    #[serde(default)]
    pub xi: Option<[f64; 2]>,
    #[serde(default)]
    pub kappa: Option<f64>,
    #[serde(default)]
    pub beta: Option<[f64; 2]>,
}

impl HamiltonianSection {
    pub fn model(&self) -> Result<CoefficientModel> {
        let model = match self {
            HamiltonianSection::Constant { h1, h2, v } => CoefficientModel::Constant {
                h1: *h1,
                h2: *h2,
                v: *v,
            },
            HamiltonianSection::Harmonic { omega } => CoefficientModel::harmonic(*omega),
            HamiltonianSection::Amplifier(a) => CoefficientModel::Amplifier(a.params()?),
            HamiltonianSection::Tabulated { t, h1, h2, v } => CoefficientModel::Tabulated(
                TabulatedCoefficients::new(t.clone(), h1.clone(), h2.clone(), v.clone())
                    .map_err(|e| ConfigError(format!("hamiltonian.params: {e}")))?,
            ),
        };
        if let Err(e) = model.validate() {
            return config_error(format!("hamiltonian.params: {e}"));
        }
        Ok(model)
    }
}

impl AmplifierSection {
    pub fn params(&self) -> Result<AmplifierParams> {
        let c = |v: [f64; 2]| Complex64::new(v[0], v[1]);
        let p = match (self.xi, self.kappa, self.beta) {
            (Some(xi), None, None) => AmplifierParams::from_xi(self.omega, c(xi)),
            (None, Some(k), Some(b)) => AmplifierParams::new(self.omega, k, c(b)),
            _ => {
                return config_error(
                    "hamiltonian.params: give either `xi` or both `kappa` and `beta`",
                )
            }
        };
        p.map_err(|e| ConfigError(format!("hamiltonian.params: {e}")).into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CovarianceSection {
    pub sq: f64,
    pub sp: f64,
    pub sqp: f64,
}

/// Reference pair defining `α`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ReferenceSection {
    Named(String),
    Pair([f64; 4]),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    /// Chart of `point`, or the chart to integrate in when `covariance` is given.
    #[serde(default)]
    pub chart: Option<Chart>,
    #[serde(default)]
    pub point: Option<Vec<f64>>,
    #[serde(default)]
    pub covariance: Option<CovarianceSection>,
    #[serde(default)]
    pub moments: Option<[f64; 2]>,
    #[serde(default)]
    pub alpha: Option<[f64; 2]>,
    #[serde(default)]
    pub reference: Option<ReferenceSection>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsSection {
    /// Charts to write; defaults to the integration chart.
    #[serde(default)]
    pub charts: Vec<Chart>,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
    #[serde(default)]
    pub plot: bool,
}

fn default_formats() -> Vec<Format> {
    vec![Format::Csv]
}

impl Default for OutputsSection {
    fn default() -> Self {
        Self {
            charts: Vec::new(),
            formats: default_formats(),
            plot: false,
        }
    }
}

/// Fully validated inputs of one run.
#[derive(Debug, Clone)]
pub struct ResolvedRun {
    pub name: Option<String>,
    pub hbar: f64,
    pub model: CoefficientModel,
    /// Second-moment point to integrate, absent for `α`-only runs.
    pub start: Option<ChartPoint>,
    /// Initial `α` against `reference`, when first moments were given.
    pub alpha: Option<Complex64>,
    pub reference: QPPoint,
    pub integrator: IntegratorConfig,
    pub charts: Vec<Chart>,
    pub formats: Vec<Format>,
    pub plot: bool,
}

/// Command-line overrides applied on top of the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub hbar: Option<f64>,
    pub chart: Option<Chart>,
    pub format: Option<Format>,
    pub plot: bool,
}

pub fn load(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))
        .map_err(|e| ConfigError(format!("{e:#}")))?;
    let parsed = if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))
    } else {
        toml::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))
    };
    Ok(parsed?)
}

impl RunConfig {
    /// One resolved run per sweep entry, or the base run when there is no sweep.
    pub fn resolve(&self, ov: &Overrides) -> Result<Vec<ResolvedRun>> {
        if self.run.is_empty() {
            return Ok(vec![resolve_one(
                self.name.clone(),
                self.hbar,
                &self.hamiltonian,
                &self.initial,
                &self.integrator,
                &self.outputs,
                ov,
            )?]);
        }
        let mut names = std::collections::BTreeSet::new();
        self.run
            .iter()
            .map(|r| {
                if !names.insert(r.name.clone()) {
                    return config_error(format!("run: duplicate name {:?}", r.name));
                }
                if r.name.is_empty() || r.name.contains(['/', '\\']) || r.name.starts_with('.') {
                    return config_error(format!("run.name {:?} is not a plain directory name", r.name));
                }
                resolve_one(
                    Some(r.name.clone()),
                    r.hbar.or(self.hbar),
                    r.hamiltonian.as_ref().unwrap_or(&self.hamiltonian),
                    r.initial.as_ref().unwrap_or(&self.initial),
                    r.integrator.as_ref().unwrap_or(&self.integrator),
                    &self.outputs,
                    ov,
                )
                .with_context(|| format!("run {:?}", r.name))
            })
            .collect()
    }
}

fn resolve_one(
    name: Option<String>,
    hbar: Option<f64>,
    ham: &HamiltonianSection,
    init: &InitialSection,
    integrator: &IntegratorConfig,
    outputs: &OutputsSection,
    ov: &Overrides,
) -> Result<ResolvedRun> {
    let hbar = ov.hbar.or(hbar).unwrap_or(gausspack::hamiltonian::DEFAULT_HBAR);
    if !(hbar > 0.0 && hbar.is_finite()) {
        return config_error(format!("hbar: must be positive, got {hbar}"));
    }
    let model = ham.model()?;
    if let Err(e) = integrator.validate() {
        return config_error(format!("integrator: {e}"));
    }
    let reference = resolve_reference(init.reference.as_ref(), &model)?;

    let start = match (&init.point, &init.covariance) {
        (Some(_), Some(_)) => {
            return config_error("initial: give either `point` or `covariance`, not both")
        }
        (Some(v), None) => {
            let chart = init
                .chart
                .ok_or_else(|| ConfigError("initial.chart: required with `point`".into()))?;
            Some(validated_point(chart, v)?)
        }
        (None, Some(cov)) => {
            let chart = init.chart.unwrap_or(Chart::Siegel);
            Some(point_from_covariance(cov, chart, hbar)?)
        }
        (None, None) => None,
    };

    let alpha = match (init.moments, init.alpha) {
        (Some(_), Some(_)) => return config_error("initial: give either `moments` or `alpha`, not both"),
        (Some([mq, mp]), None) => Some(FirstMoments::new(mq, mp).alpha(&reference, hbar)),
        (None, Some([re, im])) => Some(Complex64::new(re, im)),
        (None, None) => None,
    };

    let (start, alpha) = match start {
        Some(p) if p.chart() == Chart::Alpha => {
            if alpha.is_some() {
                return config_error("initial: an alpha point already fixes the first moments");
            }
            let ChartPoint::Alpha(a) = p else { unreachable!() };
            (None, Some(a))
        }
        other => (other, alpha),
    };
    if start.is_none() && alpha.is_none() {
        return config_error("initial: needs `chart` + `point`, `covariance`, or first moments");
    }

    let mut charts = match ov.chart {
        Some(c) => vec![c],
        None => outputs.charts.clone(),
    };
    if charts.is_empty() {
        charts.push(start.map_or(Chart::Alpha, |p| p.chart()));
    }
    charts.dedup();
    for &c in &charts {
        match (c, start) {
            (Chart::Alpha, _) if alpha.is_none() => {
                return config_error("outputs.charts: alpha output needs first moments in [initial]")
            }
            (Chart::Alpha, _) => {}
            (c, None) => {
                return config_error(format!(
                    "outputs.charts: {c} output needs a second-moment initial point"
                ))
            }
            (c, Some(p)) if !p.chart().reaches(c) => {
                return config_error(format!(
                    "outputs.charts: {c} is not reachable from the {} chart through the map diagram",
                    p.chart()
                ))
            }
            _ => {}
        }
    }
    let formats = match ov.format {
        Some(f) => vec![f],
        None if outputs.formats.is_empty() => default_formats(),
        None => outputs.formats.clone(),
    };
    Ok(ResolvedRun {
        name,
        hbar,
        model,
        start,
        alpha,
        reference,
        integrator: *integrator,
        charts,
        formats,
        plot: outputs.plot || ov.plot,
    })
}

fn resolve_reference(r: Option<&ReferenceSection>, model: &CoefficientModel) -> Result<QPPoint> {
    match r {
        None => Ok(match model {
            CoefficientModel::Amplifier(p) => gausspack::amplifier::alpha_reference(p),
            _ => QPPoint::vacuum(),
        }),
        Some(ReferenceSection::Named(n)) if n == "vacuum" => Ok(QPPoint::vacuum()),
        Some(ReferenceSection::Named(n)) if n == "amplifier" => match model {
            CoefficientModel::Amplifier(p) => Ok(gausspack::amplifier::alpha_reference(p)),
            _ => config_error("initial.reference: \"amplifier\" needs an amplifier hamiltonian"),
        },
        Some(ReferenceSection::Named(n)) => config_error(format!(
            "initial.reference: unknown name {n:?} (vacuum, amplifier, or [q_re, q_im, p_re, p_im])"
        )),
        Some(ReferenceSection::Pair(v)) => QPPoint::new(Complex64::new(v[0], v[1]), Complex64::new(v[2], v[3]))
            .map_err(|e| ConfigError(format!("initial.reference: {e}")).into()),
    }
}

fn validated_point(chart: Chart, v: &[f64]) -> Result<ChartPoint> {
    let bad = |e: gausspack::error::Error| ConfigError(format!("initial.point: {e}"));
    let p = ChartPoint::from_components(chart, v).map_err(bad)?;
    let c = |a: f64, b: f64| Complex64::new(a, b);
    let checked = match chart {
        Chart::M => QPPoint::new(c(v[0], v[1]), c(v[2], v[3])).map(ChartPoint::M),
        Chart::H3 => H3Point::new([v[0], v[1], v[2], v[3]]).map(ChartPoint::H3),
        Chart::H2 => H2Point::new(v[0], v[1], v[2]).map(ChartPoint::H2),
        Chart::Disk => DiskPoint::new(c(v[0], v[1])).map(ChartPoint::Disk),
        Chart::Siegel => SiegelPoint::new(c(v[0], v[1])).map(ChartPoint::Siegel),
        Chart::Alpha => Ok(p),
    };
    Ok(checked.map_err(bad)?)
}

fn point_from_covariance(cov: &CovarianceSection, chart: Chart, hbar: f64) -> Result<ChartPoint> {
    let bad = |e: gausspack::error::Error| ConfigError(format!("initial.covariance: {e}"));
    let triple = CovarianceTriple::new(cov.sq, cov.sp, cov.sqp, hbar).map_err(bad)?;
    let siegel = siegel_from_covariance(&triple, hbar).map_err(bad)?;
    let point = match chart {
        Chart::M | Chart::H3 => ChartPoint::M(QPPoint::from_siegel(&siegel)),
        Chart::Alpha => return config_error("initial.chart: a covariance cannot start an alpha run"),
        _ => ChartPoint::Siegel(siegel),
    };
    Ok(point.convert(chart).map_err(bad)?)
}
