//! Minimal deterministic SVG line and scatter plots from CSV files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use clap::ValueEnum;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlotKind {
    /// Columns 2.. against column 1.
    Timeseries,
    /// Magnitudes in dB against frequency; `x_re`/`x_im` pairs are combined.
    Spectrum,
    /// `re`/`im` scatter with the unit circle.
    Eigenmap,
}

/// Numeric CSV with an optional header row.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn parse(text: &str, origin: &str) -> CliResult<Self> {
        let mut headers: Vec<String> = Vec::new();
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let err = |message: String| CliError::Parse { path: origin.to_string(), line: i + 1, message };
            if headers.is_empty() && rows.is_empty() && fields.iter().any(|f| f.parse::<f64>().is_err()) {
                headers = fields.iter().map(|s| s.to_string()).collect();
                continue;
            }
            let width = if headers.is_empty() { rows.first().map_or(fields.len(), Vec::len) } else { headers.len() };
            if fields.len() != width {
                return Err(err(format!("expected {width} columns, found {}", fields.len())));
            }
            let row = fields
                .iter()
                .map(|f| f.parse::<f64>().map_err(|_| err(format!("'{f}' is not a number"))))
                .collect::<CliResult<Vec<f64>>>()?;
            rows.push(row);
        }
        if headers.is_empty() {
            let width = rows.first().map_or(0, Vec::len);
            headers = (1..=width).map(|i| format!("col{i}")).collect();
        }
        Ok(Self { headers, rows })
    }

    fn column(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name)
    }

    fn values(&self, col: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[col]).collect()
    }
}

struct Series {
    label: String,
    points: Vec<(f64, f64)>,
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 90.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const MAX_POINTS: usize = 4000;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Keeps the min and max of each bucket so peaks survive decimation.
fn decimate(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    if points.len() <= MAX_POINTS {
        return points.to_vec();
    }
    let buckets = MAX_POINTS / 2;
    let size = points.len().div_ceil(buckets);
    let mut out = Vec::with_capacity(2 * buckets);
    for chunk in points.chunks(size) {
        let (mut lo, mut hi) = (0, 0);
        for (i, p) in chunk.iter().enumerate() {
            if p.1 < chunk[lo].1 {
                lo = i;
            }
            if p.1 > chunk[hi].1 {
                hi = i;
            }
        }
        let (a, b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        out.push(chunk[a]);
        if b != a {
            out.push(chunk[b]);
        }
    }
    out
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo <= f64::EPSILON * lo.abs().max(1e-300) {
        let pad = if lo == 0.0 { 1.0 } else { 0.5 * lo.abs() };
        return (lo - pad, hi + pad);
    }
    (lo, hi)
}

fn label(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if (1e-2..1e4).contains(&v.abs()) {
        format!("{v:.3}")
    } else {
        format!("{v:.2e}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - TOP - BOTTOM)
    }
}

fn axes(svg: &mut String, frame: &Frame, title: &str, xlabel: &str, ylabel: &str) {
    let (w, h) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
    let _ = writeln!(svg, r##"<rect x="{LEFT}" y="{TOP}" width="{w}" height="{h}" fill="none" stroke="#000"/>"##);
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let xv = frame.x.0 + f * (frame.x.1 - frame.x.0);
        let yv = frame.y.0 + f * (frame.y.1 - frame.y.0);
        let (xp, yp) = (frame.px(xv), frame.py(yv));
        let _ = writeln!(
            svg,
            r##"<line x1="{xp:.2}" y1="{:.2}" x2="{xp:.2}" y2="{:.2}" stroke="#000"/><text x="{xp:.2}" y="{:.2}" text-anchor="middle" font-size="11">{}</text>"##,
            HEIGHT - BOTTOM,
            HEIGHT - BOTTOM + 5.0,
            HEIGHT - BOTTOM + 18.0,
            label(xv)
        );
        let _ = writeln!(
            svg,
            r##"<line x1="{:.2}" y1="{yp:.2}" x2="{LEFT}" y2="{yp:.2}" stroke="#000"/><text x="{:.2}" y="{:.2}" text-anchor="end" font-size="11">{}</text>"##,
            LEFT - 5.0,
            LEFT - 8.0,
            yp + 4.0,
            label(yv)
        );
    }
    let _ = writeln!(svg, r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, escape(title));
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="12">{}</text>"#,
        LEFT + (WIDTH - LEFT - RIGHT) / 2.0,
        HEIGHT - 15.0,
        escape(xlabel)
    );
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{:.2}" text-anchor="middle" font-size="12" transform="rotate(-90 18 {:.2})">{}</text>"#,
        TOP + (HEIGHT - TOP - BOTTOM) / 2.0,
        TOP + (HEIGHT - TOP - BOTTOM) / 2.0,
        escape(ylabel)
    );
}

fn legend(svg: &mut String, series: &[Series]) {
    for (i, s) in series.iter().enumerate() {
        let y = TOP + 16.0 + 16.0 * i as f64;
        let x = WIDTH - RIGHT - 150.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{x:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{}" stroke-width="2"/><text x="{:.2}" y="{:.2}" font-size="11">{}</text>"#,
            x + 20.0,
            COLORS[i % COLORS.len()],
            x + 25.0,
            y + 4.0,
            escape(&s.label)
        );
    }
}

fn header() -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n<rect width=\"100%\" height=\"100%\" fill=\"#fff\"/>\n"
    )
}

fn line_plot(series: &[Series], title: &str, xlabel: &str, ylabel: &str) -> String {
    let frame = Frame {
        x: range(series.iter().flat_map(|s| s.points.iter().map(|p| p.0))),
        y: range(series.iter().flat_map(|s| s.points.iter().map(|p| p.1))),
    };
    let mut svg = header();
    axes(&mut svg, &frame, title, xlabel, ylabel);
    for (i, s) in series.iter().enumerate() {
        if s.points.is_empty() {
            continue;
        }
        let pts: Vec<String> = decimate(&s.points)
            .iter()
            .filter(|p| p.0.is_finite() && p.1.is_finite())
            .map(|p| format!("{:.2},{:.2}", frame.px(p.0), frame.py(p.1)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{}" stroke-width="1.2" points="{}"/>"#,
            COLORS[i % COLORS.len()],
            pts.join(" ")
        );
    }
    legend(&mut svg, series);
    svg.push_str("</svg>\n");
    svg
}

fn timeseries(table: &Table) -> Vec<Series> {
    if let (Some(t), Some(o), Some(re), Some(im)) =
        (table.column("t_start"), table.column("order"), table.column("re"), table.column("im"))
    {
        // coefficient files: order-0 coefficient of each step
        let rows: Vec<&Vec<f64>> = table.rows.iter().filter(|r| r[o] == 0.0).collect();
        return [("re I_q0", re), ("im I_q0", im)]
            .iter()
            .map(|(name, c)| Series { label: name.to_string(), points: rows.iter().map(|r| (r[t], r[*c])).collect() })
            .collect();
    }
    (1..table.headers.len())
        .map(|c| Series { label: table.headers[c].clone(), points: table.rows.iter().map(|r| (r[0], r[c])).collect() })
        .collect()
}

fn spectrum(table: &Table) -> Vec<Series> {
    let x = table.values(0);
    let mut series = Vec::new();
    let mut used = vec![false; table.headers.len()];
    for c in 1..table.headers.len() {
        if used[c] {
            continue;
        }
        let name = table.headers[c].clone();
        let pair = name.strip_suffix("_re").and_then(|b| table.column(&format!("{b}_im")).map(|i| (b.to_string(), i)));
        let (label, mags): (String, Vec<f64>) = match pair {
            Some((base, im)) => {
                used[im] = true;
                (format!("|{base}|"), table.rows.iter().map(|r| r[c].hypot(r[im])).collect())
            }
            None => (name.clone(), table.rows.iter().map(|r| r[c].abs()).collect()),
        };
        used[c] = true;
        let peak = mags.iter().cloned().fold(0.0, f64::max);
        let floor = if peak > 0.0 { 20.0 * peak.log10() - 300.0 } else { -300.0 };
        let points = x.iter().zip(&mags).map(|(f, m)| (*f, if *m > 0.0 { (20.0 * m.log10()).max(floor) } else { floor })).collect();
        series.push(Series { label, points });
    }
    series
}

fn eigenmap(table: &Table, title: &str) -> String {
    let re = table.column("re").unwrap_or(0);
    let im = table.column("im").unwrap_or(1.min(table.headers.len().saturating_sub(1)));
    let pts: Vec<(f64, f64)> = if table.headers.len() >= 2 { table.rows.iter().map(|r| (r[re], r[im])).collect() } else { vec![] };
    let reach = pts.iter().map(|p| p.0.hypot(p.1)).filter(|v| v.is_finite()).fold(1.0, f64::max) * 1.1;
    let frame = Frame { x: (-reach, reach), y: (-reach, reach) };
    let mut svg = header();
    axes(&mut svg, &frame, title, "Re λ", "Im λ");
    let (cx, cy) = (frame.px(0.0), frame.py(0.0));
    let (rx, ry) = (frame.px(1.0) - cx, cy - frame.py(1.0));
    let _ = writeln!(
        svg,
        r##"<path id="unit-circle" d="M {:.2},{cy:.2} A {rx:.2},{ry:.2} 0 1,0 {:.2},{cy:.2} A {rx:.2},{ry:.2} 0 1,0 {:.2},{cy:.2} Z" fill="none" stroke="#888" stroke-dasharray="4,3"/>"##,
        cx + rx,
        cx - rx,
        cx + rx
    );
    for p in pts.iter().filter(|p| p.0.is_finite() && p.1.is_finite()) {
        let _ = writeln!(svg, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{}"/>"#, frame.px(p.0), frame.py(p.1), COLORS[0]);
    }
    svg.push_str("</svg>\n");
    svg
}

/// SVG text for `table`.
pub fn render(table: &Table, kind: PlotKind, title: &str) -> String {
    let xlabel = table.headers.first().cloned().unwrap_or_default();
    match kind {
        PlotKind::Timeseries => {
            let s = timeseries(table);
            let xl = if table.column("t_start").is_some() { "t_start".to_string() } else { xlabel };
            line_plot(&s, title, &xl, "value")
        }
        PlotKind::Spectrum => line_plot(&spectrum(table), title, &xlabel, "magnitude (dB)"),
        PlotKind::Eigenmap => eigenmap(table, title),
    }
}

/// Reads `csv`, renders it and writes `out`.
pub fn emit_plot(csv: &Path, kind: PlotKind, out: &Path) -> CliResult<()> {
    let text = fs::read_to_string(csv).map_err(CliError::io(csv))?;
    let origin = csv.display().to_string();
    let table = Table::parse(&text, &origin)?;
    let title = csv.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    fs::write(out, render(&table, kind, &title)).map_err(CliError::io(out))
}
