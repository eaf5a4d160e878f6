//! Minimal line plots written as standalone SVG.

use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 56.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

pub struct Series<'a> {
    pub label: &'a str,
    pub points: Vec<(f64, f64)>,
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-300 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

/// Plots every series on shared axes; with `loglog` both axes are log10 and nonpositive points are dropped.
pub fn line_plot(title: &str, x_label: &str, y_label: &str, series: &[Series], loglog: bool) -> String {
    let tf = |v: f64| if loglog { v.log10() } else { v };
    let pts: Vec<Vec<(f64, f64)>> = series
        .iter()
        .map(|s| {
            s.points
                .iter()
                .filter(|(x, y)| !loglog || (*x > 0.0 && *y > 0.0))
                .map(|&(x, y)| (tf(x), tf(y)))
                .filter(|(x, y)| x.is_finite() && y.is_finite())
                .collect()
        })
        .collect();
    let (x0, x1) = bounds(pts.iter().flatten().map(|p| p.0));
    let (y0, y1) = bounds(pts.iter().flatten().map(|p| p.1));
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);
    let prefix = if loglog { "log10 " } else { "" };

    let mut out = String::new();
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{title}</text>"#, WIDTH / 2.0);
    let _ = writeln!(
        out,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{prefix}{x_label}</text>"#, WIDTH / 2.0, HEIGHT - 12.0);
    let _ = writeln!(
        out,
        r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{prefix}{y_label}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );
    for (v, anchor) in [(x0, "start"), (x1, "end")] {
        let _ = writeln!(out, r#"<text x="{:.1}" y="{}" text-anchor="{anchor}">{v:.3}</text>"#, px(v), HEIGHT - MARGIN + 16.0);
    }
    for v in [y0, y1] {
        let _ = writeln!(out, r#"<text x="{}" y="{:.1}" text-anchor="end">{v:.3}</text>"#, MARGIN - 4.0, py(v) + 4.0);
    }
    for (k, (s, p)) in series.iter().zip(&pts).enumerate() {
        let color = COLORS[k % COLORS.len()];
        let path: Vec<String> = p.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        let _ = writeln!(out, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, path.join(" "));
        if p.len() <= 32 {
            for &(x, y) in p {
                let _ = writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{color}"/>"#, px(x), py(y));
            }
        }
        let ly = MARGIN + 16.0 + 16.0 * k as f64;
        let _ = writeln!(out, r#"<text x="{}" y="{ly}" fill="{color}">{}</text>"#, WIDTH - MARGIN - 8.0, s.label);
    }
    out.push_str("</svg>\n");
    out
}
