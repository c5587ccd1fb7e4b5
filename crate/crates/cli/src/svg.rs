//! Minimal SVG line charts of sweep rows.

use std::fmt::Write;

use crate::config::ScaleChoice;
use crate::table::{Row, FIRST_OR, HEADER};

const WIDTH: f64 = 760.0;
const PANEL_HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

pub struct Series {
    pub name: String,
    /// `None` breaks the line.
    pub points: Vec<Option<(f64, f64)>>,
}

struct Panel {
    title: String,
    y_label: &'static str,
    reference: f64,
    series: Vec<Series>,
}

fn series_from(rows: &[Row], columns: std::ops::Range<usize>) -> Vec<Series> {
    columns
        .map(|c| Series {
            name: HEADER[c + 2].to_string(),
            points: rows
                .iter()
                .map(|r| Some((r.value?, r.fields[c].filter(|y| y.is_finite())?)))
                .collect(),
        })
        .collect()
}

/// Renders the odds-ratio curves (reference line at 1), the additive curves
/// (reference line at 0), or both panels stacked.
pub fn render(rows: &[Row], scale: ScaleChoice) -> String {
    let param = rows.first().map(|r| r.param.as_str()).unwrap_or("value");
    let mut panels = Vec::new();
    if scale != ScaleChoice::Additive {
        panels.push(Panel {
            title: format!("Odds ratios against {param}"),
            y_label: "odds ratio",
            reference: 1.0,
            series: series_from(rows, FIRST_OR..FIRST_OR + 6),
        });
    }
    if scale != ScaleChoice::OddsRatio {
        panels.push(Panel {
            title: format!("Risk differences against {param}"),
            y_label: "risk difference",
            reference: 0.0,
            series: series_from(rows, 0..6),
        });
    }
    let height = PANEL_HEIGHT * panels.len() as f64;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (i, p) in panels.iter().enumerate() {
        panel(&mut s, p, param, PANEL_HEIGHT * i as f64);
    }
    s.push_str("</svg>\n");
    s
}

fn range(values: impl Iterator<Item = f64>, pad_always: f64) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        return (-1.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 1.0, hi + 1.0);
    }
    let pad = (hi - lo) * pad_always;
    (lo - pad, hi + pad)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn panel(s: &mut String, p: &Panel, x_label: &str, y0: f64) {
    let pts = || p.series.iter().flat_map(|ser| ser.points.iter().flatten());
    let (x_lo, x_hi) = range(pts().map(|&(x, _)| x), 0.0);
    let (y_lo, y_hi) = range(pts().map(|&(_, y)| y).chain([p.reference]), 0.05);
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = PANEL_HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w;
    let sy = |y: f64| y0 + TOP + (y_hi - y) / (y_hi - y_lo) * plot_h;

    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="14">{}</text>"#,
        LEFT + plot_w / 2.0,
        y0 + TOP / 2.0 + 5.0,
        escape(&p.title)
    );
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#,
        y0 + TOP
    );
    for k in 0..=4 {
        let t = k as f64 / 4.0;
        let (xv, yv) = (x_lo + t * (x_hi - x_lo), y_lo + t * (y_hi - y_lo));
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{xv:.2}</text>"#,
            sx(xv),
            y0 + TOP + plot_h + 16.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{yv:.3}</text>"#,
            LEFT - 6.0,
            sy(yv) + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        LEFT + plot_w / 2.0,
        y0 + PANEL_HEIGHT - 12.0,
        escape(x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
        y0 + TOP + plot_h / 2.0,
        y0 + TOP + plot_h / 2.0,
        p.y_label
    );
    let _ = writeln!(
        s,
        r#"<line class="reference" x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="gray" stroke-dasharray="6 4"/>"#,
        LEFT + plot_w,
        y = sy(p.reference)
    );

    for (i, ser) in p.series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        for segment in ser.points.split(Option::is_none) {
            if segment.is_empty() {
                continue;
            }
            let coords: Vec<String> = segment
                .iter()
                .flatten()
                .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                .collect();
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                coords.join(" ")
            );
        }
        let ly = y0 + TOP + 10.0 + 18.0 * i as f64;
        let lx = LEFT + plot_w + 14.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            lx + 22.0,
            lx + 28.0,
            ly + 4.0,
            escape(&ser.name)
        );
    }
}
