//! Minimal self-contained SVG bar charts.

use std::fmt::Write;

use recondiag::histogram::Histogram;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 110.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Vertical bars with one (rotated) label under each bar.
pub fn bar_chart(title: &str, x_label: &str, bars: &[(String, u64)]) -> String {
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let max = bars.iter().map(|b| b.1).max().unwrap_or(0).max(1);
    let slot = plot_w / bars.len().max(1) as f64;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let base = TOP + plot_h;
    let _ = writeln!(
        s,
        r#"<line x1="{LEFT}" y1="{base:.1}" x2="{:.1}" y2="{base:.1}" stroke="black"/>"#,
        LEFT + plot_w
    );
    let _ = writeln!(s, r#"<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{base:.1}" stroke="black"/>"#);
    for frac in [0.0, 0.5, 1.0] {
        let y = base - frac * plot_h;
        let value = (frac * max as f64).round() as u64;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{value}</text>"#,
            LEFT - 6.0,
            y + 4.0
        );
    }
    for (i, (label, count)) in bars.iter().enumerate() {
        let h = *count as f64 / max as f64 * plot_h;
        let x = LEFT + i as f64 * slot;
        let _ = writeln!(
            s,
            r#"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{h:.1}" fill="steelblue"><title>{}: {count}</title></rect>"#,
            x + slot * 0.1,
            base - h,
            slot * 0.8,
            escape(label)
        );
        let cx = x + slot / 2.0;
        let _ = writeln!(
            s,
            r#"<text x="{cx:.1}" y="{:.1}" text-anchor="end" transform="rotate(-45 {cx:.1} {:.1})">{}</text>"#,
            base + 14.0,
            base + 14.0,
            escape(label)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 8.0,
        escape(x_label)
    );
    s.push_str("</svg>\n");
    s
}

/// Histogram bars labelled by their lower bin edge.
pub fn histogram(title: &str, x_label: &str, hist: &Histogram) -> String {
    let bars: Vec<(String, u64)> = hist
        .counts
        .iter()
        .enumerate()
        .map(|(i, &c)| (format!("{:.3}", hist.edges(i).0), c))
        .collect();
    bar_chart(title, x_label, &bars)
}
