//! Minimal self-contained SVG charts (no plotting dependency); the CSV files
//! remain the canonical output.

use std::fmt::Write as _;

#[derive(Clone, Copy, PartialEq)]
pub enum SeriesKind {
    /// Straight polyline through the points.
    Line,
    /// Right-continuous step curve (ECDF / step CDF).
    Step,
}

pub struct Series {
    pub name: String,
    pub color: &'static str,
    pub kind: SeriesKind,
    pub dashed: bool,
    pub points: Vec<(f64, f64)>,
}

pub const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

const W: f64 = 800.0;
const H: f64 = 560.0;
const ML: f64 = 70.0; // margins
const MR: f64 = 24.0;
const MT: f64 = 40.0;
const MB: f64 = 58.0;

pub fn svg_chart(title: &str, xlabel: &str, ylabel: &str, series: &[Series]) -> String {
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for s in series {
        for &(x, y) in &s.points {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
    }
    if !(x0 < x1) {
        x1 = x0 + 1.0;
    }
    if !(y0 < y1) {
        y1 = y0 + 1.0;
    }
    let pad = 0.04 * (y1 - y0);
    let (y0, y1) = (y0 - pad, y1 + pad);
    let px = |x: f64| ML + (x - x0) / (x1 - x0) * (W - ML - MR);
    let py = |y: f64| H - MB - (y - y0) / (y1 - y0) * (H - MT - MB);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="13">"#
    );
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="16">{}</text>"#,
        W / 2.0,
        xml_escape(title)
    );

    // Axes box and ticks.
    let _ = writeln!(
        out,
        r#"<rect x="{ML}" y="{MT}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - ML - MR,
        H - MT - MB
    );
    for i in 0..=5 {
        let fx = x0 + (x1 - x0) * i as f64 / 5.0;
        let fy = y0 + (y1 - y0) * i as f64 / 5.0;
        let _ = writeln!(
            out,
            r#"<line x1="{0}" y1="{1}" x2="{0}" y2="{2}" stroke="black"/><text x="{0}" y="{3}" text-anchor="middle">{4}</text>"#,
            px(fx),
            H - MB,
            H - MB + 5.0,
            H - MB + 20.0,
            tick_label(fx)
        );
        let _ = writeln!(
            out,
            r#"<line x1="{0}" y1="{1}" x2="{2}" y2="{1}" stroke="black"/><text x="{3}" y="{4}" text-anchor="end">{5}</text>"#,
            ML - 5.0,
            py(fy),
            ML,
            ML - 9.0,
            py(fy) + 4.0,
            tick_label(fy)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        W / 2.0,
        H - 14.0,
        xml_escape(xlabel)
    );
    let _ = writeln!(
        out,
        r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        xml_escape(ylabel)
    );

    // Series.
    for s in series {
        if s.points.is_empty() {
            continue;
        }
        let mut d = String::new();
        match s.kind {
            SeriesKind::Line => {
                for (i, &(x, y)) in s.points.iter().enumerate() {
                    let _ = write!(d, "{}{:.2},{:.2} ", if i == 0 { "M" } else { "L" }, px(x), py(y));
                }
            }
            SeriesKind::Step => {
                let mut prev_y = s.points[0].1;
                let _ = write!(d, "M{:.2},{:.2} ", px(s.points[0].0), py(prev_y));
                for &(x, y) in s.points.iter().skip(1) {
                    let _ = write!(d, "L{:.2},{:.2} L{:.2},{:.2} ", px(x), py(prev_y), px(x), py(y));
                    prev_y = y;
                }
            }
        }
        let dash = if s.dashed { r#" stroke-dasharray="7 4""# } else { "" };
        let _ = writeln!(
            out,
            r#"<path d="{d}" fill="none" stroke="{}" stroke-width="1.6"{dash}/>"#,
            s.color
        );
    }

    // Legend.
    for (i, s) in series.iter().enumerate() {
        let y = MT + 16.0 + 18.0 * i as f64;
        let dash = if s.dashed { r#" stroke-dasharray="7 4""# } else { "" };
        let _ = writeln!(
            out,
            r#"<line x1="{0}" y1="{1}" x2="{2}" y2="{1}" stroke="{3}" stroke-width="2"{dash}/><text x="{4}" y="{5}">{6}</text>"#,
            ML + 10.0,
            y,
            ML + 40.0,
            s.color,
            ML + 46.0,
            y + 4.0,
            xml_escape(&s.name)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Thin an ECDF to at most `max_pts` steps for plotting.
pub fn thin_ecdf(samples: &[f64], max_pts: usize) -> Vec<(f64, f64)> {
    let n = samples.len();
    let stride = (n / max_pts).max(1);
    let mut pts = Vec::with_capacity(n / stride + 2);
    pts.push((samples[0], 0.0));
    for i in (0..n).step_by(stride) {
        pts.push((samples[i], (i + 1) as f64 / n as f64));
    }
    pts.push((samples[n - 1], 1.0));
    pts
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if (1e-3..1e4).contains(&a) {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.2e}")
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
