//! Hand-rolled SVG line charts. Two axis modes: linear, and log-log with
//! reference-slope guide lines for convergence plots. A chart can carry a
//! zoom panel that repeats the series over a narrow x window, which is how
//! the profile plots expose boundary layers. Output is fully
//! self-contained and byte-deterministic.

use slab_transport::{Error, Result};
use std::fmt::Write as _;
use std::path::Path;

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Axes {
    Linear,
    LogLog,
}

#[derive(Debug, Clone)]
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub axes: Axes,
    pub series: Vec<Series>,
    /// Slopes of gray guide lines, drawn on log-log charts only.
    pub guide_slopes: Vec<f64>,
    /// Optional x window repeated in a second panel.
    pub zoom: Option<(f64, f64)>,
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

/// One panel's plot rectangle and data bounds in axis space (ln space for
/// log charts).
struct Panel {
    px: f64,
    py: f64,
    pw: f64,
    ph: f64,
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Panel {
    fn map(&self, x: f64, y: f64) -> (f64, f64) {
        let fx = (x - self.x0) / (self.x1 - self.x0);
        let fy = (y - self.y0) / (self.y1 - self.y0);
        (self.px + fx * self.pw, self.py + self.ph * (1.0 - fy))
    }
}

fn pad(lo: f64, hi: f64) -> (f64, f64) {
    let span = hi - lo;
    if span > 0.0 {
        (lo - 0.05 * span, hi + 0.05 * span)
    } else {
        let bump = lo.abs().max(1e-9) * 0.1 + 1e-12;
        (lo - bump, hi + bump)
    }
}

fn fmt_tick(value: f64, log: bool) -> String {
    let v = if log { value.exp() } else { value };
    if v == 0.0 {
        return "0".to_string();
    }
    if log || !(1e-3..1e4).contains(&v.abs()) {
        format!("{v:.1e}")
    } else {
        let s = format!("{v:.3}");
        let s = s.trim_end_matches('0');
        s.trim_end_matches('.').to_string()
    }
}

/// Axis-space coordinates of one series for the given mode; log mode drops
/// points it cannot place.
fn axis_points(series: &Series, log: bool) -> Vec<(f64, f64)> {
    series
        .points
        .iter()
        .filter(|(x, y)| {
            if log {
                x.is_finite() && y.is_finite() && *x > 0.0 && *y > 0.0
            } else {
                x.is_finite() && y.is_finite()
            }
        })
        .map(|&(x, y)| if log { (x.ln(), y.ln()) } else { (x, y) })
        .collect()
}

fn panel_svg(
    out: &mut String,
    chart: &Chart,
    panel: &Panel,
    data: &[Vec<(f64, f64)>],
    clip_id: &str,
    caption: &str,
) {
    let log = chart.axes == Axes::LogLog;
    writeln!(
        out,
        r#"<clipPath id="{clip_id}"><rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}"/></clipPath>"#,
        panel.px, panel.py, panel.pw, panel.ph
    )
    .unwrap();

    // Frame, gridlines, tick labels.
    writeln!(
        out,
        r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#333333"/>"##,
        panel.px, panel.py, panel.pw, panel.ph
    )
    .unwrap();
    for k in 0..5 {
        let f = k as f64 / 4.0;
        let xv = panel.x0 + f * (panel.x1 - panel.x0);
        let yv = panel.y0 + f * (panel.y1 - panel.y0);
        let (gx, _) = panel.map(xv, panel.y0);
        let (_, gy) = panel.map(panel.x0, yv);
        writeln!(
            out,
            r##"<line x1="{gx:.2}" y1="{:.2}" x2="{gx:.2}" y2="{:.2}" stroke="#dddddd"/>"##,
            panel.py,
            panel.py + panel.ph
        )
        .unwrap();
        writeln!(
            out,
            r##"<line x1="{:.2}" y1="{gy:.2}" x2="{:.2}" y2="{gy:.2}" stroke="#dddddd"/>"##,
            panel.px,
            panel.px + panel.pw
        )
        .unwrap();
        writeln!(
            out,
            r#"<text x="{gx:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            panel.py + panel.ph + 16.0,
            fmt_tick(xv, log)
        )
        .unwrap();
        writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            panel.px - 6.0,
            gy + 4.0,
            fmt_tick(yv, log)
        )
        .unwrap();
    }
    if !caption.is_empty() {
        writeln!(
            out,
            r##"<text x="{:.2}" y="{:.2}" fill="#555555">{caption}</text>"##,
            panel.px,
            panel.py - 8.0
        )
        .unwrap();
    }

    writeln!(out, r#"<g clip-path="url(#{clip_id})">"#).unwrap();
    // Guide lines first so the data draws over them.
    if log {
        for &slope in &chart.guide_slopes {
            let y_data_min = data
                .iter()
                .flatten()
                .map(|&(_, y)| y)
                .fold(f64::INFINITY, f64::min);
            let x_data_min = data
                .iter()
                .flatten()
                .map(|&(x, _)| x)
                .fold(f64::INFINITY, f64::min);
            if !y_data_min.is_finite() || !x_data_min.is_finite() {
                continue;
            }
            let anchor = y_data_min - 0.3;
            let y_at = |x: f64| anchor + slope * (x - x_data_min);
            let (ax, ay) = panel.map(panel.x0, y_at(panel.x0));
            let (bx, by) = panel.map(panel.x1, y_at(panel.x1));
            writeln!(
                out,
                r##"<line x1="{ax:.2}" y1="{ay:.2}" x2="{bx:.2}" y2="{by:.2}" stroke="#999999" stroke-dasharray="3 3"/>"##
            )
            .unwrap();
            let xm = panel.x0 + 0.62 * (panel.x1 - panel.x0);
            let (tx, ty) = panel.map(xm, y_at(xm));
            writeln!(
                out,
                r##"<text x="{:.2}" y="{:.2}" fill="#777777">slope {slope}</text>"##,
                tx + 4.0,
                ty - 4.0
            )
            .unwrap();
        }
    }
    for (i, pts) in data.iter().enumerate() {
        if pts.is_empty() {
            continue;
        }
        let color = PALETTE[i % PALETTE.len()];
        let dash = if chart.series[i].dashed {
            r#" stroke-dasharray="6 4""#
        } else {
            ""
        };
        let mut coords = String::new();
        for &(x, y) in pts {
            let (sx, sy) = panel.map(x, y);
            write!(coords, "{sx:.2},{sy:.2} ").unwrap();
        }
        writeln!(
            out,
            r#"<polyline class="series" points="{}" fill="none" stroke="{color}" stroke-width="1.6"{dash}/>"#,
            coords.trim_end()
        )
        .unwrap();
        if pts.len() <= 12 {
            for &(x, y) in pts {
                let (sx, sy) = panel.map(x, y);
                writeln!(
                    out,
                    r#"<circle cx="{sx:.2}" cy="{sy:.2}" r="2.5" fill="{color}"/>"#
                )
                .unwrap();
            }
        }
    }
    writeln!(out, "</g>").unwrap();

    // Axis captions.
    writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        panel.px + panel.pw / 2.0,
        panel.py + panel.ph + 34.0,
        chart.x_label
    )
    .unwrap();
}

/// Renders the chart to SVG text; fails on an empty chart.
pub fn render_svg(chart: &Chart) -> Result<String> {
    if chart.series.is_empty() {
        return Err(Error::InvalidArgument("chart has no series".into()));
    }
    let log = chart.axes == Axes::LogLog;
    let data: Vec<Vec<(f64, f64)>> = chart.series.iter().map(|s| axis_points(s, log)).collect();
    if data.iter().all(|d| d.is_empty()) {
        return Err(Error::InvalidArgument(
            "chart has no drawable points".into(),
        ));
    }

    let all = data.iter().flatten();
    let (mut x_lo, mut x_hi, mut y_lo, mut y_hi) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for &(x, y) in all {
        x_lo = x_lo.min(x);
        x_hi = x_hi.max(x);
        y_lo = y_lo.min(y);
        y_hi = y_hi.max(y);
    }
    let (x0, x1) = pad(x_lo, x_hi);
    let (y0, y1) = pad(y_lo, y_hi);

    let main = Panel {
        px: 64.0,
        py: 44.0,
        pw: 520.0,
        ph: 330.0,
        x0,
        x1,
        y0,
        y1,
    };

    let zoom_panel = chart.zoom.map(|(z0, z1)| {
        let (w0, w1) = if log {
            (z0.max(1e-300).ln(), z1.max(1e-300).ln())
        } else {
            (z0, z1)
        };
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &(x, y) in data.iter().flatten() {
            if x >= w0 && x <= w1 {
                lo = lo.min(y);
                hi = hi.max(y);
            }
        }
        if !lo.is_finite() {
            lo = y_lo;
            hi = y_hi;
        }
        let (zy0, zy1) = pad(lo, hi);
        Panel {
            px: 664.0,
            py: 44.0,
            pw: 220.0,
            ph: 330.0,
            x0: w0,
            x1: w1,
            y0: zy0,
            y1: zy1,
        }
    });

    let legend_x = if zoom_panel.is_some() { 900.0 } else { 604.0 };
    let width = legend_x + 180.0;
    let height = 420.0;

    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(
        out,
        r##"<rect width="{width:.0}" height="{height:.0}" fill="#ffffff"/>"##
    )
    .unwrap();
    writeln!(
        out,
        r#"<text x="64" y="24" font-size="15" font-weight="bold">{}</text>"#,
        chart.title
    )
    .unwrap();
    writeln!(
        out,
        r#"<text x="16" y="209" text-anchor="middle" transform="rotate(-90 16 209)">{}</text>"#,
        chart.y_label
    )
    .unwrap();

    panel_svg(&mut out, chart, &main, &data, "clip-main", "");
    if let Some(zp) = &zoom_panel {
        let (z0, z1) = chart.zoom.expect("zoom panel implies a window");
        let caption = format!("zoom: x in [{z0}, {z1}]");
        panel_svg(&mut out, chart, zp, &data, "clip-zoom", &caption);
    }

    // Legend: one entry per drawable series, then the guide style.
    let mut ly = 54.0;
    for (i, series) in chart.series.iter().enumerate() {
        if data[i].is_empty() {
            continue;
        }
        let color = PALETTE[i % PALETTE.len()];
        let dash = if series.dashed {
            r#" stroke-dasharray="6 4""#
        } else {
            ""
        };
        writeln!(
            out,
            r#"<line x1="{legend_x:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="1.6"{dash}/>"#,
            legend_x + 24.0
        )
        .unwrap();
        writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
            legend_x + 30.0,
            ly + 4.0,
            series.label
        )
        .unwrap();
        ly += 18.0;
    }
    if log && !chart.guide_slopes.is_empty() {
        writeln!(
            out,
            r##"<line x1="{legend_x:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="#999999" stroke-dasharray="3 3"/>"##,
            legend_x + 24.0
        )
        .unwrap();
        let slopes = chart
            .guide_slopes
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>()
            .join(", ");
        writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}">guide slopes {slopes}</text>"#,
            legend_x + 30.0,
            ly + 4.0
        )
        .unwrap();
    }
    writeln!(out, "</svg>").unwrap();
    Ok(out)
}

pub fn emit_svg(chart: &Chart, path: &Path) -> Result<()> {
    std::fs::write(path, render_svg(chart)?)?;
    Ok(())
}
