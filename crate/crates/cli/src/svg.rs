//! Minimal line chart of log10 residual against iteration.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 48.0;
const COLORS: [&str; 5] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];

pub fn residual_chart(series: &[(&str, Vec<f64>)]) -> String {
    let logs: Vec<Vec<f64>> = series
        .iter()
        .map(|(_, v)| v.iter().map(|&r| r.max(1e-300).log10()).collect())
        .collect();
    let finite = logs.iter().flatten().copied().filter(|v| v.is_finite());
    let (lo, hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let (lo, hi) = if lo.is_finite() { (lo.floor(), hi.ceil().max(lo.floor() + 1.0)) } else { (0.0, 1.0) };
    let n_max = logs.iter().map(Vec::len).max().unwrap_or(0).max(2) as f64;
    let sx = |i: usize| MARGIN + (WIDTH - 2.0 * MARGIN) * i as f64 / (n_max - 1.0);
    let sy = |v: f64| HEIGHT - MARGIN - (HEIGHT - 2.0 * MARGIN) * (v - lo) / (hi - lo);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<polyline fill="none" stroke="black" points="{MARGIN},{MARGIN} {MARGIN},{b} {r},{b}"/>"#,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN
    );
    let _ = writeln!(s, r#"<text x="4" y="{}" font-size="11">1e{hi}</text>"#, MARGIN + 4.0);
    let _ = writeln!(s, r#"<text x="4" y="{}" font-size="11">1e{lo}</text>"#, HEIGHT - MARGIN);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-size="11" text-anchor="end">n = {}</text>"#,
        WIDTH - MARGIN,
        HEIGHT - MARGIN + 16.0,
        n_max as usize
    );
    for (k, ((name, _), ys)) in series.iter().zip(&logs).enumerate() {
        let color = COLORS[k % COLORS.len()];
        let mut pts = String::new();
        for (i, &v) in ys.iter().enumerate().filter(|(_, v)| v.is_finite()) {
            let _ = write!(pts, "{:.2},{:.2} ", sx(i), sy(v));
        }
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            pts.trim_end()
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="12" fill="{color}">{}</text>"#,
            WIDTH - MARGIN - 80.0,
            MARGIN + 14.0 * (k as f64 + 1.0),
            escape(name)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn well_formed() {
        let svg = residual_chart(&[("egm", vec![1.0, 0.1, 0.01]), ("tegm", vec![0.5, 0.0])]);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 3);
        assert!(!svg.contains("NaN") && !svg.contains("inf"));
    }

    #[test]
    fn empty_series() {
        let svg = residual_chart(&[("egm", vec![])]);
        assert!(svg.contains("</svg>"));
    }
}
