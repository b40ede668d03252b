//! Minimal SVG line charts: one polyline per direction, x = quality level.

use std::collections::BTreeMap;
use std::fmt::Write;

use mtcal_core::corpus::Direction;

const W: f64 = 640.0;
const H: f64 = 400.0;
const PAD_L: f64 = 64.0;
const PAD_R: f64 = 120.0;
const PAD_T: f64 = 40.0;
const PAD_B: f64 = 48.0;
const PALETTE: [&str; 9] =
    ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#17becf"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// `curves` maps each direction to `(level, count, mean)` points.
pub fn line_chart(title: &str, curves: &BTreeMap<Direction, Vec<(u8, usize, f64)>>) -> String {
    let points: Vec<f64> = curves.values().flatten().map(|p| p.2).collect();
    let (mut lo, mut hi) = points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        (lo, hi) = (0.0, 1.0);
    }
    if hi - lo < 1e-9 {
        lo -= 0.5;
        hi += 0.5;
    }
    let max_level = curves.values().flatten().map(|p| p.0).max().unwrap_or(5).max(1) as f64;
    let x = |l: f64| PAD_L + l / max_level * (W - PAD_L - PAD_R);
    let y = |v: f64| PAD_T + (hi - v) / (hi - lo) * (H - PAD_T - PAD_B);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(title));
    let (x0, x1, y0, y1) = (PAD_L, W - PAD_R, PAD_T, H - PAD_B);
    let _ = writeln!(s, r#"<path d="M{x0} {y0}V{y1}H{x1}" fill="none" stroke="black"/>"#);
    for l in 0..=max_level as u8 {
        let xl = x(l as f64);
        let _ = writeln!(s, r#"<text x="{xl:.1}" y="{:.1}" text-anchor="middle">{l}</text>"#, y1 + 18.0);
    }
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">errors per segment</text>"#, (x0 + x1) / 2.0, H - 8.0);
    for i in 0..=4 {
        let v = lo + (hi - lo) * i as f64 / 4.0;
        let yv = y(v);
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{v:.2}</text>"#, x0 - 6.0, yv + 4.0);
        let _ = writeln!(s, r##"<path d="M{x0} {yv:.1}H{x1}" stroke="#ddd"/>"##);
    }
    for (i, (d, pts)) in curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let path: Vec<String> = pts.iter().map(|p| format!("{:.1},{:.1}", x(p.0 as f64), y(p.2))).collect();
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#, path.join(" "));
        for p in pts {
            let _ = writeln!(s, r#"<circle cx="{:.1}" cy="{:.1}" r="3" fill="{color}"/>"#, x(p.0 as f64), y(p.2));
        }
        let ly = PAD_T + 16.0 * i as f64;
        let _ = writeln!(s, r#"<rect x="{:.1}" y="{:.1}" width="12" height="3" fill="{color}"/>"#, x1 + 12.0, ly + 4.0);
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}">{}</text>"#, x1 + 30.0, ly + 9.0, escape(&d.to_string()));
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chart_has_one_line_per_direction() {
        let mut c = BTreeMap::new();
        c.insert("en-de".parse().unwrap(), vec![(0, 3, 100.0), (1, 3, 80.0)]);
        c.insert("en-ja".parse().unwrap(), vec![(0, 3, 100.0), (1, 3, 70.0)]);
        let svg = line_chart("a < b", &c);
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("a &lt; b"));
        assert!(svg.ends_with("</svg>\n"));
        assert!(line_chart("empty", &BTreeMap::new()).contains("<svg"));
    }
}
