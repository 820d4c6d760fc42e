//! Cross-run comparison tables and SVG line charts.

use std::fmt::Write as _;
use std::path::Path;

use super::trace_io::read_trace_csv;
use crate::error::{Error, Result};

/// One row of [`compare_runs`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunComparison {
    pub label: String,
    pub final_value: f64,
    /// Smallest value seen.
    pub best: f64,
    /// First iteration within 5% of the final value (trace files only).
    pub settle_iter: Option<u64>,
}

fn label_of(path: &Path) -> String {
    path.display().to_string()
}

fn compare_summary(path: &Path, metric: &str) -> Result<RunComparison> {
    let err = |message: String| Error::Parse {
        path: path.to_path_buf(),
        message,
    };
    let mut reader = csv::Reader::from_path(path).map_err(|e| err(e.to_string()))?;
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| err(e.to_string()))?
        .iter()
        .map(String::from)
        .collect();
    let final_name = format!("final_{metric}");
    let k = header
        .iter()
        .position(|c| *c == final_name || c == metric)
        .ok_or_else(|| err(format!("no column `{metric}` or `{final_name}`")))?;
    let mut best = f64::INFINITY;
    let mut mean = None;
    for rec in reader.records() {
        let rec = rec.map_err(|e| err(e.to_string()))?;
        let Some(v) = rec.get(k).filter(|c| !c.is_empty()) else {
            continue;
        };
        let v: f64 = v.parse().map_err(|_| err(format!("bad value {v:?}")))?;
        match &rec[0] {
            "mean" => mean = Some(v),
            "std" => {}
            _ => best = best.min(v),
        }
    }
    let final_value = mean.ok_or_else(|| err(format!("no mean value for `{metric}`")))?;
    Ok(RunComparison {
        label: label_of(path),
        final_value,
        best,
        settle_iter: None,
    })
}

fn compare_trace(path: &Path, metric: &str) -> Result<RunComparison> {
    let table = read_trace_csv(path)?;
    let series = table.series(metric).ok_or_else(|| Error::Parse {
        path: path.to_path_buf(),
        message: format!("no column `{metric}`"),
    })?;
    let (_, final_value) = *series.last().ok_or_else(|| Error::Parse {
        path: path.to_path_buf(),
        message: format!("column `{metric}` is empty"),
    })?;
    let best = series.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let settle_iter = series
        .iter()
        .find(|(_, v)| (v - final_value).abs() <= 0.05 * final_value.abs())
        .map(|(it, _)| *it as u64);
    Ok(RunComparison {
        label: label_of(path),
        final_value,
        best,
        settle_iter,
    })
}

fn is_summary(path: &Path) -> bool {
    std::fs::read_to_string(path)
        .map(|t| t.starts_with("trial,"))
        .unwrap_or(false)
}

/// Final and best values of `metric` for each trace (or summary) file.
pub fn compare_rows(paths: &[&Path], metric: &str) -> Result<Vec<RunComparison>> {
    if paths.is_empty() {
        return Err(Error::Invalid("no files to compare".into()));
    }
    paths
        .iter()
        .map(|p| {
            if is_summary(p) {
                compare_summary(p, metric)
            } else {
                compare_trace(p, metric)
            }
        })
        .collect()
}

/// Aligned text table of [`compare_rows`].
pub fn compare_runs(paths: &[&Path], metric: &str) -> Result<String> {
    let rows = compare_rows(paths, metric)?;
    let width = rows.iter().map(|r| r.label.len()).max().unwrap_or(0).max(3);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<width$}  {:>24}  {:>24}  {:>12}",
        "run",
        format!("final {metric}"),
        "best",
        "within 5% at"
    );
    for r in rows {
        let settle = r.settle_iter.map_or_else(|| "-".to_string(), |i| i.to_string());
        let _ = writeln!(
            out,
            "{:<width$}  {:>24.10e}  {:>24.10e}  {:>12}",
            r.label, r.final_value, r.best, settle
        );
    }
    Ok(out)
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn tick_label(v: f64, log: bool) -> String {
    let v = if log { 10f64.powf(v) } else { v };
    if v != 0.0 && (v.abs() < 1e-2 || v.abs() >= 1e4) {
        format!("{v:.1e}")
    } else {
        format!("{v:.3}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Writes an SVG line chart of `metric` against iteration, one polyline per file.
///
/// With `log`, values are plotted on a base-10 scale and nonpositive cells are skipped.
pub fn render_chart(paths: &[&Path], metric: &str, out: &Path, log: bool) -> Result<()> {
    let mut series = Vec::new();
    for p in paths {
        let table = read_trace_csv(p)?;
        let pts = table.series(metric).ok_or_else(|| Error::Parse {
            path: p.to_path_buf(),
            message: format!("no column `{metric}`"),
        })?;
        let pts: Vec<(f64, f64)> = pts
            .into_iter()
            .filter(|(_, v)| v.is_finite() && (!log || *v > 0.0))
            .map(|(i, v)| (i, if log { v.log10() } else { v }))
            .collect();
        let name = p
            .file_name()
            .map_or_else(|| label_of(p), |n| n.to_string_lossy().into_owned());
        series.push((name, pts));
    }
    if series.iter().all(|(_, pts)| pts.is_empty()) {
        return Err(Error::Invalid(format!(
            "nothing to plot: column `{metric}` has no values"
        )));
    }

    let all = series.iter().flat_map(|(_, p)| p.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for (x, y) in all {
        x0 = x0.min(*x);
        x1 = x1.max(*x);
        y0 = y0.min(*y);
        y1 = y1.max(*y);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let (w, h, left, right, top, bottom) = (800.0, 500.0, 80.0, 20.0, 30.0, 50.0);
    let px = |x: f64| left + (x - x0) / (x1 - x0) * (w - left - right);
    let py = |y: f64| h - bottom - (y - y0) / (y1 - y0) * (h - top - bottom);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<rect x="{left}" y="{top}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        w - left - right,
        h - top - bottom
    );
    for k in 0..=4 {
        let fx = x0 + (x1 - x0) * k as f64 / 4.0;
        let fy = y0 + (y1 - y0) * k as f64 / 4.0;
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" font-size="12" text-anchor="middle">{}</text>"#,
            px(fx),
            h - bottom + 18.0,
            tick_label(fx, false)
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" font-size="12" text-anchor="end">{}</text>"#,
            left - 6.0,
            py(fy) + 4.0,
            tick_label(fy, log)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" font-size="13" text-anchor="middle">iteration</text>"#,
        left + (w - left - right) / 2.0,
        h - 10.0
    );
    let ylabel = if log {
        format!("{metric} (log scale)")
    } else {
        metric.to_string()
    };
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{:.1}" font-size="13" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
        top + (h - top - bottom) / 2.0,
        top + (h - top - bottom) / 2.0,
        escape(&ylabel)
    );
    for (k, (name, pts)) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        if !pts.is_empty() {
            let coords: Vec<String> = pts
                .iter()
                .map(|(x, y)| format!("{:.2},{:.2}", px(*x), py(*y)))
                .collect();
            let _ = writeln!(
                svg,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                coords.join(" ")
            );
        }
        let ly = top + 16.0 + 18.0 * k as f64;
        let lx = w - right - 220.0;
        let _ = writeln!(
            svg,
            r#"<g class="legend"><line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}" font-size="12">{}</text></g>"#,
            lx + 24.0,
            lx + 30.0,
            ly + 4.0,
            escape(name)
        );
    }
    svg.push_str("</svg>\n");
    std::fs::write(out, svg).map_err(|e| Error::io(out, e))
}
