//! Trajectory files.
//!
//! CSV files start with one header comment carrying the schema version, the
//! chart, `ħ`, the coefficient model and the `α` reference pair:
//!
//! ```text
//! # gausspack trajectory v1 chart=siegel hbar=1 model={"kind":"harmonic",...} reference=null
//! t,re,im,constraint_drift,energy,rs_residual
//! ```
//!
//! Numbers are written with 17 significant digits. JSON files hold the same
//! data as one object with a `samples` array of flat tagged points.

use std::io::{BufRead, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{Diagnostics, Trajectory};
use crate::error::{Error, Result};
use crate::geometry::{component_names, Chart, ChartPoint, QPPoint};
use crate::hamiltonian::CoefficientModel;

pub const SCHEMA_VERSION: u32 = 1;

const CSV_MAGIC: &str = "# gausspack trajectory v";

/// Largest constraint residual accepted when reading a trajectory back.
pub const READ_TOL: f64 = 1e-6;

/// A trajectory together with the model that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryFile {
    pub model: CoefficientModel,
    pub trajectory: Trajectory,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }

    pub fn from_path(path: &std::path::Path) -> Option<Self> {
        match path.extension()?.to_str()? {
            "csv" => Some(Format::Csv),
            "json" => Some(Format::Json),
            _ => None,
        }
    }
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Parameter(format!("unknown format {other:?} (csv, json)"))),
        }
    }
}

/// Column names of a CSV trajectory in `chart`.
pub fn csv_columns(chart: Chart) -> Vec<&'static str> {
    let mut cols = vec!["t"];
    cols.extend_from_slice(component_names(chart));
    cols.extend_from_slice(&["constraint_drift", "energy", "rs_residual"]);
    cols
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => Error::Io(e.to_string()),
        other => Error::Format(format!("{other:?}")),
    }
}

pub fn write_csv<W: Write>(mut w: W, model: &CoefficientModel, traj: &Trajectory) -> Result<()> {
    let model_json = serde_json::to_string(model).map_err(|e| Error::Format(e.to_string()))?;
    let reference = serde_json::to_string(&traj.alpha_reference).map_err(|e| Error::Format(e.to_string()))?;
    writeln!(
        w,
        "{CSV_MAGIC}{SCHEMA_VERSION} chart={} hbar={} model={model_json} reference={reference}",
        traj.chart.tag(),
        num(traj.hbar)
    )?;
    let mut out = csv::Writer::from_writer(w);
    out.write_record(csv_columns(traj.chart)).map_err(csv_err)?;
    for ((t, p), d) in traj.times.iter().zip(&traj.points).zip(&traj.diagnostics) {
        let mut row = vec![num(*t)];
        row.extend(p.components().into_iter().map(num));
        row.extend([num(d.constraint_drift), num(d.energy), num(d.rs_residual)]);
        out.write_record(&row).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

struct Header {
    chart: Chart,
    hbar: f64,
    model: CoefficientModel,
    reference: Option<QPPoint>,
}

fn parse_header(line: &str) -> Result<Header> {
    let rest = line
        .strip_prefix(CSV_MAGIC)
        .ok_or_else(|| Error::Format("missing '# gausspack trajectory' header".into()))?;
    let (version, rest) = rest
        .split_once(' ')
        .ok_or_else(|| Error::Format("truncated header".into()))?;
    if version != SCHEMA_VERSION.to_string() {
        return Err(Error::Format(format!("unsupported schema version {version}")));
    }
    let field = |key: &str, s: &str| -> Result<(String, String)> {
        let s = s
            .strip_prefix(key)
            .and_then(|s| s.strip_prefix('='))
            .ok_or_else(|| Error::Format(format!("header field {key} missing")))?;
        Ok(match s.split_once(' ') {
            Some((v, r)) => (v.to_string(), r.to_string()),
            None => (s.to_string(), String::new()),
        })
    };
    let (chart, rest) = field("chart", rest)?;
    let (hbar, rest) = field("hbar", &rest)?;
    let rest = rest
        .strip_prefix("model=")
        .ok_or_else(|| Error::Format("header field model missing".into()))?;
    let (model, reference) = rest
        .rsplit_once(" reference=")
        .ok_or_else(|| Error::Format("header field reference missing".into()))?;
    let chart: Chart = chart
        .parse()
        .map_err(|_| Error::Format(format!("unknown chart {chart:?}")))?;
    let hbar: f64 = hbar
        .parse()
        .map_err(|_| Error::Format(format!("bad hbar {hbar:?}")))?;
    let model = serde_json::from_str(model).map_err(|e| Error::Format(format!("model: {e}")))?;
    let reference =
        serde_json::from_str(reference.trim()).map_err(|e| Error::Format(format!("reference: {e}")))?;
    Ok(Header { chart, hbar, model, reference })
}

fn validate_points(traj: &Trajectory) -> Result<()> {
    for p in &traj.points {
        let r = p.constraint_residual();
        if !(r <= READ_TOL) {
            return Err(Error::InvalidPoint {
                chart: p.chart(),
                residual: r,
                tol: READ_TOL,
            });
        }
    }
    Ok(())
}

/// Reads a CSV trajectory; every point must pass its chart's constraint check.
pub fn read_csv<R: BufRead>(mut r: R) -> Result<TrajectoryFile> {
    let mut first = String::new();
    if r.read_line(&mut first)? == 0 {
        return Err(Error::Format("empty file".into()));
    }
    let header = parse_header(first.trim_end())?;
    let mut rows = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let cols = rows.headers().map_err(csv_err)?;
    let expect = csv_columns(header.chart);
    if cols.iter().ne(expect.iter().copied()) {
        return Err(Error::Format(format!(
            "columns {:?} do not match {:?}",
            cols.iter().collect::<Vec<_>>(),
            expect
        )));
    }
    let nc = component_names(header.chart).len();
    let (mut times, mut points, mut diagnostics) = (Vec::new(), Vec::new(), Vec::new());
    for (k, record) in rows.records().enumerate() {
        let record = record.map_err(csv_err)?;
        let vals = record
            .iter()
            .map(str::parse::<f64>)
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Format(format!("row {}: {e}", k + 1)))?;
        times.push(vals[0]);
        points.push(ChartPoint::from_components(header.chart, &vals[1..1 + nc])?);
        diagnostics.push(Diagnostics {
            constraint_drift: vals[1 + nc],
            energy: vals[2 + nc],
            rs_residual: vals[3 + nc],
        });
    }
    let trajectory = Trajectory {
        chart: header.chart,
        hbar: header.hbar,
        alpha_reference: header.reference,
        times,
        points,
        diagnostics,
    };
    validate_points(&trajectory)?;
    Ok(TrajectoryFile {
        model: header.model,
        trajectory,
    })
}

#[derive(Serialize, Deserialize)]
struct JsonSample {
    t: f64,
    point: ChartPoint,
    constraint_drift: f64,
    energy: f64,
    rs_residual: f64,
}

#[derive(Serialize, Deserialize)]
struct JsonDoc {
    schema: String,
    version: u32,
    chart: Chart,
    hbar: f64,
    model: CoefficientModel,
    reference: Option<QPPoint>,
    samples: Vec<JsonSample>,
}

const JSON_SCHEMA: &str = "gausspack-trajectory";

pub fn write_json<W: Write>(w: W, model: &CoefficientModel, traj: &Trajectory) -> Result<()> {
    let doc = JsonDoc {
        schema: JSON_SCHEMA.into(),
        version: SCHEMA_VERSION,
        chart: traj.chart,
        hbar: traj.hbar,
        model: model.clone(),
        reference: traj.alpha_reference,
        samples: traj
            .times
            .iter()
            .zip(&traj.points)
            .zip(&traj.diagnostics)
            .map(|((t, p), d)| JsonSample {
                t: *t,
                point: *p,
                constraint_drift: d.constraint_drift,
                energy: d.energy,
                rs_residual: d.rs_residual,
            })
            .collect(),
    };
    serde_json::to_writer_pretty(w, &doc).map_err(|e| Error::Format(e.to_string()))
}

pub fn read_json<R: std::io::Read>(r: R) -> Result<TrajectoryFile> {
    let doc: JsonDoc = serde_json::from_reader(r).map_err(|e| Error::Format(e.to_string()))?;
    if doc.schema != JSON_SCHEMA || doc.version != SCHEMA_VERSION {
        return Err(Error::Format(format!(
            "unsupported schema {} v{}",
            doc.schema, doc.version
        )));
    }
    let mut trajectory = Trajectory {
        chart: doc.chart,
        hbar: doc.hbar,
        alpha_reference: doc.reference,
        times: Vec::with_capacity(doc.samples.len()),
        points: Vec::with_capacity(doc.samples.len()),
        diagnostics: Vec::with_capacity(doc.samples.len()),
    };
    for s in doc.samples {
        if s.point.chart() != doc.chart {
            return Err(Error::Format(format!("{} point in a {} file", s.point.chart(), doc.chart)));
        }
        trajectory.times.push(s.t);
        trajectory.points.push(s.point);
        trajectory.diagnostics.push(Diagnostics {
            constraint_drift: s.constraint_drift,
            energy: s.energy,
            rs_residual: s.rs_residual,
        });
    }
    validate_points(&trajectory)?;
    Ok(TrajectoryFile {
        model: doc.model,
        trajectory,
    })
}

pub fn write_trajectory<W: Write>(w: W, format: Format, model: &CoefficientModel, traj: &Trajectory) -> Result<()> {
    match format {
        Format::Csv => write_csv(w, model, traj),
        Format::Json => write_json(w, model, traj),
    }
}

pub fn read_trajectory<R: BufRead>(r: R, format: Format) -> Result<TrajectoryFile> {
    match format {
        Format::Csv => read_csv(r),
        Format::Json => read_json(r),
    }
}

/// Writes sampled `ψ` values as `q, re_psi, im_psi, abs2`.
pub fn write_packet_csv<W: Write>(w: W, samples: &[(f64, Complex64)]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["q", "re_psi", "im_psi", "abs2"]).map_err(csv_err)?;
    for (q, psi) in samples {
        out.write_record([num(*q), num(psi.re), num(psi.im), num(psi.norm_sqr())])
            .map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amplifier::alpha_reference;
    use crate::dynamics::{integrate, IntegratorConfig};
    use crate::hamiltonian::AmplifierParams;

    fn sample(chart: Chart) -> (CoefficientModel, Trajectory) {
        let model = CoefficientModel::harmonic(1.0);
        let start = ChartPoint::M(
            QPPoint::new_unchecked(Complex64::new(0.8, 0.3), Complex64::new(-0.2, 1.1)).renormalized(),
        );
        let cfg = IntegratorConfig::rk4(0.0, 1.0, 1e-2).with_sample_every(10);
        let traj = integrate(&model, &start, &cfg, 1.0).unwrap();
        let traj = if chart == Chart::M { traj } else { traj.convert(&model, chart).unwrap() };
        (model, traj)
    }

    #[test]
    fn csv_round_trip_is_exact() {
        for chart in [Chart::M, Chart::H3, Chart::H2, Chart::Disk, Chart::Siegel] {
            let (model, traj) = sample(chart);
            let mut buf = Vec::new();
            write_csv(&mut buf, &model, &traj).unwrap();
            let back = read_csv(buf.as_slice()).unwrap();
            assert_eq!(back.model, model);
            assert_eq!(back.trajectory, traj, "{chart}");
        }
    }

    #[test]
    fn json_round_trip_is_exact() {
        let (model, traj) = sample(Chart::Siegel);
        let mut buf = Vec::new();
        write_json(&mut buf, &model, &traj).unwrap();
        let back = read_json(buf.as_slice()).unwrap();
        assert_eq!(back.trajectory, traj);
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["samples"][0]["point"]["chart"], "siegel");
    }

    #[test]
    fn header_carries_the_alpha_reference() {
        let p = AmplifierParams::from_xi(6.0, Complex64::new(1.0, 0.0)).unwrap();
        let model = CoefficientModel::Amplifier(p);
        let traj = crate::dynamics::integrate_alpha(
            &model,
            Complex64::new(1.0, 1.0),
            &alpha_reference(&p),
            &IntegratorConfig::rk4(0.0, 0.1, 1e-2),
            1.0,
        )
        .unwrap();
        let mut buf = Vec::new();
        write_csv(&mut buf, &model, &traj).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# gausspack trajectory v1 chart=alpha hbar=1.0000000000000000e0 model="));
        assert!(text.lines().nth(1) == Some("t,re,im,constraint_drift,energy,rs_residual"));
        assert_eq!(read_csv(buf.as_slice()).unwrap().trajectory, traj);
    }

    #[test]
    fn rejects_points_off_the_manifold() {
        let (model, mut traj) = sample(Chart::Disk);
        traj.points[3] = ChartPoint::Disk(crate::geometry::DiskPoint::new_unchecked(Complex64::new(1.5, 0.0)));
        let mut buf = Vec::new();
        write_csv(&mut buf, &model, &traj).unwrap();
        assert!(matches!(read_csv(buf.as_slice()), Err(Error::InvalidPoint { .. })));
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(matches!(read_csv("t,re,im\n".as_bytes()), Err(Error::Format(_))));
        let (model, traj) = sample(Chart::M);
        let mut buf = Vec::new();
        write_csv(&mut buf, &model, &traj).unwrap();
        let text = String::from_utf8(buf).unwrap().replace("chart=m ", "chart=h2 ");
        assert!(read_csv(text.as_bytes()).is_err());
    }
}
