//! Self-contained SVG line charts rendered from CSV files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::csvio::csv_err;
use crate::error::CliError;

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];
const PANEL_W: f64 = 420.0;
const PANEL_H: f64 = 340.0;
const MARGIN_L: f64 = 56.0;
const MARGIN_R: f64 = 16.0;
const MARGIN_T: f64 = 36.0;
const MARGIN_B: f64 = 64.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    pub title: String,
    pub y_label: String,
    /// Fixed y range; otherwise `[0, max]` rounded up to a tick.
    pub y_range: Option<(f64, f64)>,
    pub series: Vec<Series>,
}

/// Ratio columns share a fixed [0, 1] axis.
pub fn is_ratio_column(column: &str) -> bool {
    column.starts_with("theta")
}

/// Reads `column` against `period` from each CSV. A file with a `scheduler`
/// column yields one series per scheduler; otherwise the file stem labels
/// its single series.
pub fn load_series(paths: &[PathBuf], column: &str) -> Result<Vec<Series>, CliError> {
    let mut out = Vec::new();
    for path in paths {
        out.extend(load_file(path, column)?);
    }
    Ok(out)
}

fn load_file(path: &Path, column: &str) -> Result<Vec<Series>, CliError> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut reader = csv::Reader::from_reader(file);
    let header = reader.headers().map_err(|e| csv_err(e, path))?.clone();
    let find = |name: &str| header.iter().position(|h| h == name);
    let missing = |name: &str| CliError::Parse {
        path: path.to_path_buf(),
        line: 1,
        message: format!("no column named {name:?}"),
    };
    let period_col = find("period").ok_or_else(|| missing("period"))?;
    let value_col = find(column).ok_or_else(|| missing(column))?;
    let group_col = find("scheduler");
    let stem = path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned());

    let mut series: Vec<Series> = Vec::new();
    if group_col.is_none() {
        series.push(Series { label: stem, points: Vec::new() });
    }
    for record in reader.records() {
        let record = record.map_err(|e| csv_err(e, path))?;
        let line = record.position().map_or(0, |p| p.line());
        let number = |i: usize, name: &str| -> Result<f64, CliError> {
            let raw = record.get(i).unwrap_or("");
            raw.trim().parse::<f64>().map_err(|_| CliError::Parse {
                path: path.to_path_buf(),
                line,
                message: format!("column {name}: cannot parse {raw:?}"),
            })
        };
        let point = (number(period_col, "period")?, number(value_col, column)?);
        let target = match group_col {
            None => 0,
            Some(g) => {
                let label = record.get(g).unwrap_or("").to_string();
                match series.iter().position(|s| s.label == label) {
                    Some(i) => i,
                    None => {
                        series.push(Series { label, points: Vec::new() });
                        series.len() - 1
                    }
                }
            }
        };
        series[target].points.push(point);
    }
    Ok(series)
}

fn nice_step(span: f64, target_ticks: f64) -> f64 {
    let raw = (span / target_ticks).max(f64::MIN_POSITIVE);
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let nice = if norm <= 1.0 {
        1.0
    } else if norm <= 2.0 {
        2.0
    } else if norm <= 5.0 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let step = nice_step(hi - lo, 5.0);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step + 1e-9).floor() as i64;
    (first..=last).map(|i| i as f64 * step).collect()
}

fn fmt_tick(v: f64) -> String {
    let s = format!("{v:.2}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Renders the panels side by side in one SVG document.
pub fn render_svg(panels: &[Panel]) -> String {
    let width = PANEL_W * panels.len().max(1) as f64;
    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{PANEL_H}" viewBox="0 0 {width} {PANEL_H}" font-family="sans-serif" font-size="11">"#
    )
    .unwrap();
    writeln!(svg, r#"<rect width="{width}" height="{PANEL_H}" fill="white"/>"#).unwrap();
    for (i, panel) in panels.iter().enumerate() {
        render_panel(&mut svg, panel, i as f64 * PANEL_W);
    }
    svg.push_str("</svg>\n");
    svg
}

fn render_panel(svg: &mut String, panel: &Panel, x0: f64) {
    let all = panel.series.iter().flat_map(|s| s.points.iter());
    let x_max = all.clone().map(|p| p.0).fold(1.0, f64::max);
    let (y_lo, y_hi) = panel.y_range.unwrap_or_else(|| {
        let m = all.map(|p| p.1).fold(0.0, f64::max);
        let step = nice_step(m.max(1.0), 5.0);
        (0.0, (m / step).ceil().max(1.0) * step)
    });
    let x_hi = {
        let step = nice_step(x_max, 6.0);
        (x_max / step).ceil() * step
    };
    let (left, right) = (x0 + MARGIN_L, x0 + PANEL_W - MARGIN_R);
    let (top, bottom) = (MARGIN_T, PANEL_H - MARGIN_B);
    let sx = |x: f64| left + (x / x_hi) * (right - left);
    let sy = |y: f64| bottom - ((y - y_lo) / (y_hi - y_lo)) * (bottom - top);

    writeln!(svg, r#"<g class="panel">"#).unwrap();
    writeln!(
        svg,
        r#"<text x="{:.1}" y="18" text-anchor="middle" font-size="13">{}</text>"#,
        (left + right) / 2.0,
        escape(&panel.title)
    )
    .unwrap();
    writeln!(
        svg,
        r#"<rect class="frame" x="{left:.1}" y="{top:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="black"/>"#,
        right - left,
        bottom - top
    )
    .unwrap();
    for t in ticks(0.0, x_hi) {
        let x = sx(t);
        writeln!(
            svg,
            r#"<line class="tick" x1="{x:.1}" y1="{bottom:.1}" x2="{x:.1}" y2="{:.1}" stroke="black"/>"#,
            bottom + 4.0
        )
        .unwrap();
        writeln!(svg, r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, bottom + 16.0, fmt_tick(t))
            .unwrap();
    }
    for t in ticks(y_lo, y_hi) {
        let y = sy(t);
        writeln!(
            svg,
            r#"<line class="tick" x1="{:.1}" y1="{y:.1}" x2="{left:.1}" y2="{y:.1}" stroke="black"/>"#,
            left - 4.0
        )
        .unwrap();
        writeln!(svg, r##"<line x1="{left:.1}" y1="{y:.1}" x2="{right:.1}" y2="{y:.1}" stroke="#dddddd"/>"##).unwrap();
        writeln!(svg, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#, left - 6.0, y + 4.0, fmt_tick(t))
            .unwrap();
    }
    writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">period</text>"#,
        (left + right) / 2.0,
        bottom + 30.0
    )
    .unwrap();
    writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" transform="rotate(-90 {:.1} {:.1})">{}</text>"#,
        x0 + 14.0,
        (top + bottom) / 2.0,
        x0 + 14.0,
        (top + bottom) / 2.0,
        escape(&panel.y_label)
    )
    .unwrap();

    for (i, s) in panel.series.iter().enumerate() {
        if s.points.is_empty() {
            continue;
        }
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> =
            s.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y.clamp(y_lo, y_hi)))).collect();
        writeln!(
            svg,
            r#"<polyline class="series" fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            pts.join(" ")
        )
        .unwrap();
    }

    writeln!(svg, r#"<g class="legend">"#).unwrap();
    let mut lx = left;
    let y = PANEL_H - 10.0;
    for (i, s) in panel.series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        writeln!(
            svg,
            r#"<line x1="{lx:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="{color}" stroke-width="2"/>"#,
            y - 4.0,
            lx + 18.0,
            y - 4.0
        )
        .unwrap();
        writeln!(svg, r#"<text x="{:.1}" y="{y:.1}">{}</text>"#, lx + 22.0, escape(&s.label)).unwrap();
        lx += 34.0 + 6.5 * s.label.chars().count() as f64;
    }
    svg.push_str("</g>\n</g>\n");
}

/// One panel per column, each showing every series found in `paths`.
pub fn plot_columns(paths: &[PathBuf], columns: &[String]) -> Result<String, CliError> {
    let panels = columns
        .iter()
        .map(|c| {
            Ok(Panel {
                title: c.clone(),
                y_label: c.clone(),
                y_range: is_ratio_column(c).then_some((0.0, 1.0)),
                series: load_series(paths, c)?,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(render_svg(&panels))
}
