//! Executes resolved runs and writes their artifacts.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use gausspack::dynamics::{integrate, integrate_alpha, Trajectory};
use gausspack::geometry::Chart;
use gausspack::hamiltonian::CoefficientModel;
use gausspack::io::{write_trajectory, Format};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::ResolvedRun;
use crate::plot::{render, Style};

/// Diagnostics of one emitted trajectory.
#[derive(Debug, Clone, Serialize)]
pub struct OutputReport {
    pub chart: Chart,
    pub files: Vec<PathBuf>,
    pub samples: usize,
    pub max_constraint_drift: f64,
    pub max_rs_residual: f64,
    pub energy_drift: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub source_chart: Chart,
    pub outputs: Vec<OutputReport>,
    pub max_constraint_drift: f64,
    pub max_rs_residual: f64,
    pub energy_drift: f64,
}

pub fn write_file(path: &Path, format: Format, model: &CoefficientModel, traj: &Trajectory) -> Result<()> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(f);
    write_trajectory(&mut w, format, model, traj)?;
    std::io::Write::flush(&mut w)?;
    Ok(())
}

fn emit(
    run: &ResolvedRun,
    traj: &Trajectory,
    dir: &Path,
    out_root: &Path,
) -> Result<OutputReport> {
    let mut files = Vec::new();
    for &format in &run.formats {
        let path = dir.join(format!("{}.{}", traj.chart.tag(), format.extension()));
        write_file(&path, format, &run.model, traj)?;
        files.push(relative(&path, out_root));
    }
    if run.plot {
        match Style::for_chart(traj.chart) {
            Some(style) => {
                let path = dir.join(format!("{}.svg", traj.chart.tag()));
                std::fs::write(&path, render(traj, style)?)
                    .with_context(|| format!("writing {}", path.display()))?;
                files.push(relative(&path, out_root));
            }
            None => log::info!("no plot style for the {} chart; skipped", traj.chart),
        }
    }
    Ok(OutputReport {
        chart: traj.chart,
        files,
        samples: traj.len(),
        max_constraint_drift: traj.max_constraint_drift(),
        max_rs_residual: traj.max_rs_residual(),
        energy_drift: traj.energy_drift(),
    })
}

fn relative(path: &Path, root: &Path) -> PathBuf {
    path.strip_prefix(root).unwrap_or(path).to_path_buf()
}

/// Integrates one run and writes every requested chart.
pub fn execute(run: &ResolvedRun, out_root: &Path) -> Result<RunReport> {
    let dir = match &run.name {
        Some(n) => out_root.join(n),
        None => out_root.to_path_buf(),
    };
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;

    let mut outputs = Vec::new();
    let source_chart = run.start.map_or(Chart::Alpha, |p| p.chart());
    if let Some(start) = &run.start {
        let traj = integrate(&run.model, start, &run.integrator, run.hbar)?;
        for &chart in run.charts.iter().filter(|c| **c != Chart::Alpha) {
            let converted;
            let t = if chart == traj.chart {
                &traj
            } else {
                converted = traj.convert(&run.model, chart)?;
                &converted
            };
            outputs.push(emit(run, t, &dir, out_root)?);
        }
    }
    if run.charts.contains(&Chart::Alpha) {
        let alpha0 = run.alpha.expect("validated at resolve time");
        let traj = integrate_alpha(&run.model, alpha0, &run.reference, &run.integrator, run.hbar)?;
        outputs.push(emit(run, &traj, &dir, out_root)?);
    }
    let max = |f: fn(&OutputReport) -> f64| outputs.iter().map(f).fold(0.0, f64::max);
    Ok(RunReport {
        name: run.name.clone(),
        source_chart,
        max_constraint_drift: max(|o| o.max_constraint_drift),
        max_rs_residual: max(|o| o.max_rs_residual),
        energy_drift: max(|o| o.energy_drift),
        outputs,
    })
}

/// Runs every entry; sweeps run in parallel. Reports keep config order.
pub fn execute_all(runs: &[ResolvedRun], out_root: &Path) -> Result<Vec<RunReport>> {
    if runs.len() == 1 {
        return Ok(vec![execute(&runs[0], out_root)?]);
    }
    runs.par_iter()
        .map(|r| {
            execute(r, out_root).with_context(|| format!("run {:?}", r.name.as_deref().unwrap_or("")))
        })
        .collect()
}
