//! Minimal SVG line charts for the comparison outputs.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{anyhow, Context, Result};

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 450.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

pub struct Line<'a> {
    pub label: &'a str,
    pub color: &'a str,
    pub points: Vec<(f64, f64)>,
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 0.5, hi + 0.5);
    }
    (lo, hi)
}

fn tick_label(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.2e}")
    } else {
        format!("{v:.2}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn line_chart(title: &str, x_label: &str, y_label: &str, lines: &[Line]) -> String {
    let (x0, x1) = bounds(lines.iter().flat_map(|l| l.points.iter().map(|p| p.0)));
    let (y0, y1) = bounds(lines.iter().flat_map(|l| l.points.iter().map(|p| p.1)));
    let pad = 0.05 * (y1 - y0);
    let (y0, y1) = (y0 - pad, y1 + pad);
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * plot_w;
    let sy = |y: f64| TOP + (y1 - y) / (y1 - y0) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let _ = writeln!(
        svg,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    for i in 0..=5 {
        let f = i as f64 / 5.0;
        let xv = x0 + f * (x1 - x0);
        let yv = y0 + f * (y1 - y0);
        let _ = writeln!(
            svg,
            r##"<line x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{b}" stroke="#ddd"/><text x="{x:.2}" y="{ty}" text-anchor="middle">{label}</text>"##,
            x = sx(xv),
            b = TOP + plot_h,
            ty = TOP + plot_h + 16.0,
            label = tick_label(xv)
        );
        let _ = writeln!(
            svg,
            r##"<line x1="{LEFT}" y1="{y:.2}" x2="{r}" y2="{y:.2}" stroke="#ddd"/><text x="{tx}" y="{y:.2}" text-anchor="end" dominant-baseline="middle">{label}</text>"##,
            y = sy(yv),
            r = LEFT + plot_w,
            tx = LEFT - 6.0,
            label = tick_label(yv)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 12.0,
        escape(x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{y}" text-anchor="middle" transform="rotate(-90 16 {y})">{label}</text>"#,
        y = TOP + plot_h / 2.0,
        label = escape(y_label)
    );
    for (k, line) in lines.iter().enumerate() {
        let pts: Vec<String> = line
            .points
            .iter()
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{}" stroke-width="1.2" points="{}"/>"#,
            line.color,
            pts.join(" ")
        );
        let ly = TOP + 16.0 + 16.0 * k as f64;
        let lx = LEFT + plot_w - 150.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{}" stroke-width="2"/><text x="{}" y="{ly}" dominant-baseline="middle">{}</text>"#,
            lx + 20.0,
            line.color,
            lx + 26.0,
            escape(line.label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// Reads the named columns of a CSV file.
fn read_columns(path: &Path, names: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let headers = reader.headers()?.clone();
    let idx: Vec<usize> = names
        .iter()
        .map(|n| {
            headers
                .iter()
                .position(|h| h == *n)
                .ok_or_else(|| anyhow!("{}: missing column `{n}`", path.display()))
        })
        .collect::<Result<_>>()?;
    let mut cols = vec![Vec::new(); names.len()];
    for rec in reader.records() {
        let rec = rec?;
        for (c, &i) in cols.iter_mut().zip(&idx) {
            c.push(strbf::csvfmt::parse_f64(&rec[i], "plot input")?);
        }
    }
    Ok(cols)
}

fn curve_chart(path: &Path, title: &str) -> Result<String> {
    let cols = read_columns(path, &["iteration", "rbf_mse_smoothed", "strbf_mse_smoothed"])?;
    let db = |col: &[f64]| -> Vec<(f64, f64)> {
        cols[0].iter().zip(col).map(|(&k, &m)| (k, 10.0 * m.log10())).collect()
    };
    Ok(line_chart(
        title,
        "iteration",
        "smoothed MSE (dB)",
        &[
            Line {
                label: "RBF",
                color: "#1f77b4",
                points: db(&cols[1]),
            },
            Line {
                label: "STRBF",
                color: "#d62728",
                points: db(&cols[2]),
            },
        ],
    ))
}

fn predictions_chart(path: &Path) -> Result<String> {
    let cols = read_columns(path, &["t", "actual", "rbf_pred", "strbf_pred"])?;
    let series = |col: &[f64]| -> Vec<(f64, f64)> { cols[0].iter().copied().zip(col.iter().copied()).collect() };
    Ok(line_chart(
        "Actual and predicted test series",
        "t (s)",
        "u(t)",
        &[
            Line {
                label: "actual",
                color: "black",
                points: series(&cols[1]),
            },
            Line {
                label: "RBF",
                color: "#1f77b4",
                points: series(&cols[2]),
            },
            Line {
                label: "STRBF",
                color: "#d62728",
                points: series(&cols[3]),
            },
        ],
    ))
}

/// Renders `train_curve.svg`, `test_curve.svg` and `predictions.svg` from
/// the CSVs in `input` into `output`.
pub fn render_all(input: &Path, output: &Path) -> Result<Vec<String>> {
    let charts = [
        ("train_curve.svg", curve_chart(&input.join("train_curve.csv"), "Training MSE")?),
        ("test_curve.svg", curve_chart(&input.join("test_curve.csv"), "Testing MSE")?),
        ("predictions.svg", predictions_chart(&input.join("predictions.csv"))?),
    ];
    let mut written = Vec::new();
    for (name, svg) in charts {
        let path = output.join(name);
        std::fs::write(&path, svg).with_context(|| format!("writing {}", path.display()))?;
        written.push(name.to_string());
    }
    Ok(written)
}
