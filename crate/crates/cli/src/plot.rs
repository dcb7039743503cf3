//! SVG polylines of chart trajectories.

use std::fmt::Write as _;

use clap::ValueEnum;
use gausspack::dynamics::Trajectory;
use gausspack::geometry::{Chart, ChartPoint};

const SIZE: f64 = 480.0;
const MARGIN: f64 = 36.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Style {
    /// Complex plane (α, 𝒞 or ζ values).
    Complex,
    /// Poincaré disk with its boundary circle.
    Disk,
    /// Upper half plane with the real axis.
    Halfplane,
    /// `(y², y³)` projection of the hyperboloid, colored by `y¹`.
    H2,
}

impl Style {
    pub fn for_chart(chart: Chart) -> Option<Style> {
        match chart {
            Chart::Alpha => Some(Style::Complex),
            Chart::Disk => Some(Style::Disk),
            Chart::Siegel => Some(Style::Halfplane),
            Chart::H2 => Some(Style::H2),
            Chart::M | Chart::H3 => None,
        }
    }
}

/// Planar coordinates of a sample plus the ramp value (`y¹` for `H²`).
fn project(p: &ChartPoint) -> Option<(f64, f64, f64)> {
    match p {
        ChartPoint::Alpha(a) => Some((a.re, a.im, 0.0)),
        ChartPoint::Siegel(s) => Some((s.re(), s.im(), 0.0)),
        ChartPoint::Disk(d) => Some((d.zeta().re, d.zeta().im, 0.0)),
        ChartPoint::H2(h) => Some((h.y2(), h.y3(), h.y1())),
        ChartPoint::M(_) | ChartPoint::H3(_) => None,
    }
}

struct Frame {
    x0: f64,
    y0: f64,
    scale: f64,
}

impl Frame {
    /// Equal-aspect frame around `[xmin, xmax] × [ymin, ymax]`.
    fn fit(xmin: f64, xmax: f64, ymin: f64, ymax: f64) -> Self {
        let span = (xmax - xmin).max(ymax - ymin).max(1e-9) * 1.08;
        let (cx, cy) = (0.5 * (xmin + xmax), 0.5 * (ymin + ymax));
        Self {
            x0: cx - span / 2.0,
            y0: cy - span / 2.0,
            scale: (SIZE - 2.0 * MARGIN) / span,
        }
    }

    fn px(&self, x: f64, y: f64) -> (f64, f64) {
        (
            MARGIN + (x - self.x0) * self.scale,
            SIZE - MARGIN - (y - self.y0) * self.scale,
        )
    }

    fn contains_y(&self, y: f64) -> bool {
        let h = (SIZE - 2.0 * MARGIN) / self.scale;
        y >= self.y0 && y <= self.y0 + h
    }
}

fn ramp(s: f64) -> String {
    let s = s.clamp(0.0, 1.0);
    let r = (40.0 + 200.0 * s).round() as u8;
    let b = (220.0 - 190.0 * s).round() as u8;
    format!("rgb({r},70,{b})")
}

/// Renders the trajectory; fails when the style does not fit the chart.
pub fn render(traj: &Trajectory, style: Style) -> anyhow::Result<String> {
    let ok = match style {
        Style::Complex => matches!(traj.chart, Chart::Alpha | Chart::Siegel | Chart::Disk),
        Style::Disk => traj.chart == Chart::Disk,
        Style::Halfplane => traj.chart == Chart::Siegel,
        Style::H2 => traj.chart == Chart::H2,
    };
    if !ok {
        anyhow::bail!(crate::config::ConfigError(format!(
            "plot style {style:?} does not apply to a {} trajectory",
            traj.chart
        )));
    }
    let pts: Vec<(f64, f64, f64)> = traj.points.iter().filter_map(project).collect();

    let (mut xmin, mut xmax, mut ymin, mut ymax) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y, _) in &pts {
        xmin = xmin.min(x);
        xmax = xmax.max(x);
        ymin = ymin.min(y);
        ymax = ymax.max(y);
    }
    let single = pts.is_empty() || (xmax - xmin).max(ymax - ymin) < 1e-12;
    let frame = match style {
        Style::Disk => Frame::fit(-1.0, 1.0, -1.0, 1.0),
        _ if pts.is_empty() => Frame::fit(-1.0, 1.0, -1.0, 1.0),
        _ if single => Frame::fit(xmin - 1.0, xmin + 1.0, ymin - 1.0, ymin + 1.0),
        Style::Halfplane => Frame::fit(xmin, xmax, ymin.min(0.0), ymax),
        _ => Frame::fit(xmin, xmax, ymin, ymax),
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(svg, r#"<title>{} trajectory ({} samples)</title>"#, traj.chart, pts.len());
    if let (Some(a), Some(b)) = (pts.first(), pts.last()) {
        let gap = (b.0 - a.0).hypot(b.1 - a.1);
        let _ = writeln!(svg, r#"<desc>closure gap {gap:.6e}</desc>"#);
    }
    let _ = writeln!(svg, r#"<rect width="{SIZE}" height="{SIZE}" fill="white"/>"#);

    // axes through the origin when visible
    let (ax0, ay) = frame.px(frame.x0, 0.0);
    if frame.contains_y(0.0) {
        let stroke = if style == Style::Halfplane { "black" } else { "#bbb" };
        let _ = writeln!(
            svg,
            r#"<line x1="{ax0:.3}" y1="{ay:.3}" x2="{:.3}" y2="{ay:.3}" stroke="{stroke}" stroke-width="1"/>"#,
            SIZE - MARGIN
        );
    }
    if style == Style::Disk {
        let (cx, cy) = frame.px(0.0, 0.0);
        let r = frame.scale;
        let _ = writeln!(
            svg,
            r#"<circle cx="{cx:.3}" cy="{cy:.3}" r="{r:.3}" fill="none" stroke="black" stroke-width="1.5"/>"#
        );
    }

    if single {
        if let Some(&(x, y, _)) = pts.first() {
            let (px, py) = frame.px(x, y);
            let _ = writeln!(svg, r#"<circle cx="{px:.3}" cy="{py:.3}" r="4" fill="crimson"/>"#);
        }
    } else if style == Style::H2 {
        let (lo, hi) = pts
            .iter()
            .fold((f64::MAX, f64::MIN), |(lo, hi), p| (lo.min(p.2), hi.max(p.2)));
        let span = (hi - lo).max(1e-12);
        for w in pts.windows(2) {
            let (x1, y1) = frame.px(w[0].0, w[0].1);
            let (x2, y2) = frame.px(w[1].0, w[1].1);
            let c = ramp((0.5 * (w[0].2 + w[1].2) - lo) / span);
            let _ = writeln!(
                svg,
                r#"<line x1="{x1:.3}" y1="{y1:.3}" x2="{x2:.3}" y2="{y2:.3}" stroke="{c}" stroke-width="1.5"/>"#
            );
        }
    } else {
        let _ = write!(svg, r#"<polyline fill="none" stroke="steelblue" stroke-width="1.5" points=""#);
        for (k, &(x, y, _)) in pts.iter().enumerate() {
            let (px, py) = frame.px(x, y);
            let sep = if k == 0 { "" } else { " " };
            let _ = write!(svg, "{sep}{px:.3},{py:.3}");
        }
        let _ = writeln!(svg, r#""/>"#);
        let (sx, sy) = frame.px(pts[0].0, pts[0].1);
        let _ = writeln!(svg, r#"<circle cx="{sx:.3}" cy="{sy:.3}" r="3" fill="seagreen"/>"#);
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}
