//! `gausspack`: run, convert, plot and check squeezed-state trajectories.

mod config;
mod plot;
mod runner;

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use gausspack::amplifier::classify_curve;
use gausspack::error::Error as CoreError;
use gausspack::geometry::Chart;
use gausspack::hamiltonian::{AmplifierParams, CoefficientModel};
use gausspack::io::{read_trajectory, Format, TrajectoryFile};
use num_complex::Complex64;
use serde::Serialize;

use config::{ConfigError, Overrides};
use plot::Style;

#[derive(Parser)]
#[command(name = "gausspack", version, about = "Squeezed coherent state trajectories on their geometric charts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a configuration and write trajectories (and plots).
    Run(RunArgs),
    /// Convert a trajectory file to another chart.
    Convert(ConvertArgs),
    /// Draw a trajectory file as SVG.
    Plot(PlotArgs),
    /// Recompute the invariant diagnostics of a trajectory file.
    Check(CheckArgs),
    /// Parametric amplifier utilities.
    #[command(subcommand)]
    Amplifier(AmplifierCommand),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Emit only this chart.
    #[arg(long, value_parser = parse_chart)]
    chart: Option<Chart>,
    #[arg(long, value_parser = parse_format)]
    format: Option<Format>,
    /// Also write SVG plots.
    #[arg(long)]
    plot: bool,
    #[arg(long)]
    hbar: Option<f64>,
}

#[derive(Args)]
struct ConvertArgs {
    input: PathBuf,
    #[arg(long, value_parser = parse_chart)]
    chart: Chart,
    /// Output path; defaults to `<input stem>.<chart>.<ext>` next to the input.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_parser = parse_format)]
    format: Option<Format>,
}

#[derive(Args)]
struct PlotArgs {
    input: PathBuf,
    #[arg(long, value_enum)]
    style: Option<Style>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    input: PathBuf,
    /// Relative tolerance when comparing stored and recomputed diagnostics.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

#[derive(Subcommand)]
enum AmplifierCommand {
    /// Classify the curve traced by α(t) and print it as JSON.
    Classify(ClassifyArgs),
}

#[derive(Args)]
struct ClassifyArgs {
    /// Take ω, ξ and α₀ from a run configuration.
    #[arg(long, conflicts_with_all = ["omega", "xi", "xi_im", "alpha", "alpha_im"])]
    config: Option<PathBuf>,
    #[arg(long, required_unless_present = "config")]
    omega: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    xi: f64,
    #[arg(long, default_value_t = 0.0)]
    xi_im: f64,
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
    #[arg(long, default_value_t = 0.0)]
    alpha_im: f64,
}

fn parse_chart(s: &str) -> Result<Chart, String> {
    s.parse()
}

fn parse_format(s: &str) -> Result<Format, String> {
    s.parse().map_err(|e: CoreError| e.to_string())
}

/// An invariant check failed; maps to exit code 3.
#[derive(Debug)]
struct NumericFailure(String);

impl std::fmt::Display for NumericFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for NumericFailure {}

fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if cause.is::<ConfigError>() {
            return 2;
        }
        if cause.is::<NumericFailure>() {
            return 3;
        }
        if let Some(core) = cause.downcast_ref::<CoreError>() {
            return match core {
                CoreError::Io(_) => 1,
                CoreError::InvalidPoint { .. }
                | CoreError::InvalidState(_)
                | CoreError::Parameter(_)
                | CoreError::GridMismatch(_)
                | CoreError::NotApplicable(_)
                | CoreError::UnsupportedConversion { .. }
                | CoreError::Format(_) => 2,
                _ => 3,
            };
        }
    }
    1
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Ok(n) = std::env::var("GAUSSPACK_THREADS") {
        match n.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => log::warn!("ignoring GAUSSPACK_THREADS={n:?}"),
        }
    }
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Convert(a) => cmd_convert(a),
        Command::Plot(a) => cmd_plot(a),
        Command::Check(a) => cmd_check(a),
        Command::Amplifier(AmplifierCommand::Classify(a)) => cmd_classify(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[derive(Serialize)]
struct Report {
    runs: Vec<runner::RunReport>,
}

fn cmd_run(a: RunArgs) -> Result<()> {
    let start = Instant::now();
    let cfg = config::load(&a.config)?;
    let ov = Overrides {
        hbar: a.hbar,
        chart: a.chart,
        format: a.format,
        plot: a.plot,
    };
    let runs = cfg.resolve(&ov)?;
    std::fs::create_dir_all(&a.out_dir).with_context(|| format!("creating {}", a.out_dir.display()))?;
    let reports = runner::execute_all(&runs, &a.out_dir)?;
    let report = Report { runs: reports };
    let path = a.out_dir.join("report.json");
    std::fs::write(&path, serde_json::to_string_pretty(&report)? + "\n")
        .with_context(|| format!("writing {}", path.display()))?;
    for r in &report.runs {
        println!(
            "{}: {} output(s), max constraint drift {:.3e}, max RS residual {:.3e}, energy drift {:.3e}",
            r.name.as_deref().unwrap_or("run"),
            r.outputs.len(),
            r.max_constraint_drift,
            r.max_rs_residual,
            r.energy_drift
        );
    }
    println!("wrote {} in {:.3} s", path.display(), start.elapsed().as_secs_f64());
    Ok(())
}

fn format_of(path: &Path, explicit: Option<Format>) -> Result<Format> {
    explicit
        .or_else(|| Format::from_path(path))
        .ok_or_else(|| ConfigError(format!("cannot tell the format of {}; pass --format", path.display())).into())
}

fn read_file(path: &Path) -> Result<TrajectoryFile> {
    let format = format_of(path, None)?;
    let f = File::open(path)
        .with_context(|| format!("opening {}", path.display()))
        .map_err(|e| ConfigError(format!("{e:#}")))?;
    read_trajectory(BufReader::new(f), format).with_context(|| format!("reading {}", path.display()))
}

fn cmd_convert(a: ConvertArgs) -> Result<()> {
    let file = read_file(&a.input)?;
    let out = match a.out {
        Some(p) => p,
        None => {
            let stem = a.input.file_stem().and_then(|s| s.to_str()).unwrap_or("trajectory");
            let ext = a.format.or_else(|| Format::from_path(&a.input)).unwrap_or(Format::Csv).extension();
            a.input.with_file_name(format!("{stem}.{}.{ext}", a.chart.tag()))
        }
    };
    let format = format_of(&out, a.format)?;
    let converted = file.trajectory.convert(&file.model, a.chart)?;
    runner::write_file(&out, format, &file.model, &converted)?;
    println!("{}", out.display());
    Ok(())
}

fn cmd_plot(a: PlotArgs) -> Result<()> {
    let file = read_file(&a.input)?;
    let chart = file.trajectory.chart;
    let style = match a.style.or_else(|| Style::for_chart(chart)) {
        Some(s) => s,
        None => {
            return Err(ConfigError(format!(
                "no plot style for the {chart} chart; convert to h2, disk or siegel first"
            ))
            .into())
        }
    };
    let out = a.out.unwrap_or_else(|| a.input.with_extension("svg"));
    std::fs::write(&out, plot::render(&file.trajectory, style)?)
        .with_context(|| format!("writing {}", out.display()))?;
    println!("{}", out.display());
    Ok(())
}

#[derive(Serialize)]
struct CheckReport {
    chart: Chart,
    samples: usize,
    max_constraint_drift: f64,
    max_rs_residual: f64,
    energy_drift: f64,
    diagnostics_match: bool,
}

fn cmd_check(a: CheckArgs) -> Result<()> {
    let file = match read_file(&a.input) {
        Err(e) if e.chain().any(|c| matches!(c.downcast_ref::<CoreError>(), Some(CoreError::InvalidPoint { .. }))) => {
            return Err(NumericFailure(format!("{e:#}")).into())
        }
        other => other?,
    };
    let mut fresh = file.trajectory.clone();
    fresh.recompute_diagnostics(&file.model)?;
    let tol = a.tol;
    let ok = |x: f64, y: f64| (x - y).abs() <= tol * y.abs().max(1.0);
    let matches = file.trajectory.diagnostics.len() == fresh.diagnostics.len()
        && file
            .trajectory
            .diagnostics
            .iter()
            .zip(&fresh.diagnostics)
            .all(|(s, f)| {
                ok(s.constraint_drift, f.constraint_drift) && ok(s.energy, f.energy) && ok(s.rs_residual, f.rs_residual)
            });
    let report = CheckReport {
        chart: fresh.chart,
        samples: fresh.len(),
        max_constraint_drift: fresh.max_constraint_drift(),
        max_rs_residual: fresh.max_rs_residual(),
        energy_drift: fresh.energy_drift(),
        diagnostics_match: matches,
    };
    println!("{}", serde_json::to_string_pretty(&report)?);
    if !matches {
        return Err(NumericFailure("stored diagnostics differ from recomputed values".into()).into());
    }
    Ok(())
}

fn cmd_classify(a: ClassifyArgs) -> Result<()> {
    let (params, alpha0) = match &a.config {
        Some(path) => {
            let cfg = config::load(path)?;
            let run = cfg
                .resolve(&Overrides::default())?
                .into_iter()
                .next()
                .ok_or_else(|| ConfigError("config has no runs".into()))?;
            let CoefficientModel::Amplifier(p) = run.model else {
                return Err(ConfigError("hamiltonian must be an amplifier".into()).into());
            };
            let alpha = run
                .alpha
                .ok_or_else(|| ConfigError("initial: classification needs α₀ (alpha or moments)".into()))?;
            (p, alpha)
        }
        None => {
            let omega = a.omega.expect("required by clap");
            let p = AmplifierParams::from_xi(omega, Complex64::new(a.xi, a.xi_im))
                .map_err(|e| ConfigError(e.to_string()))?;
            (p, Complex64::new(a.alpha, a.alpha_im))
        }
    };
    let class = classify_curve(&params, alpha0)?;
    println!("{}", serde_json::to_string_pretty(&class)?);
    Ok(())
}
