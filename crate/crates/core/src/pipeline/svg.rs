//! Minimal self-contained SVG charts. Coordinates are printed with fixed
//! precision so identical inputs give identical bytes.

use std::fmt::Write;

const W: f64 = 800.0;
const H: f64 = 420.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn colour(i: usize) -> &'static str {
    PALETTE[i % PALETTE.len()]
}

struct Frame {
    out: String,
    y_min: f64,
    y_max: f64,
}

impl Frame {
    fn new(title: &str, y_min: f64, y_max: f64) -> Self {
        let (y_min, y_max) = if y_max > y_min { (y_min, y_max) } else { (y_min - 1.0, y_min + 1.0) };
        let mut out = String::new();
        let _ = write!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">"#
        );
        let _ = write!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = write!(
            out,
            r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
            W / 2.0,
            escape(title)
        );
        let _ = write!(
            out,
            r##"<line x1="{LEFT}" y1="{b:.1}" x2="{r:.1}" y2="{b:.1}" stroke="#333"/><line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{b:.1}" stroke="#333"/>"##,
            b = H - BOTTOM,
            r = W - RIGHT
        );
        let mut f = Self { out, y_min, y_max };
        for i in 0..=4 {
            let v = y_min + (y_max - y_min) * i as f64 / 4.0;
            let y = f.y(v);
            let _ = write!(
                f.out,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
                LEFT - 6.0,
                y + 4.0,
                fmt_tick(v)
            );
        }
        f
    }

    fn y(&self, v: f64) -> f64 {
        let span = H - TOP - BOTTOM;
        H - BOTTOM - (v - self.y_min) / (self.y_max - self.y_min) * span
    }

    fn x_slot(&self, i: usize, n: usize) -> (f64, f64) {
        let width = (W - LEFT - RIGHT) / n.max(1) as f64;
        (LEFT + width * i as f64, width)
    }

    fn x_label(&mut self, x: f64, label: &str) {
        let _ = write!(
            self.out,
            r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            H - BOTTOM + 16.0,
            escape(label)
        );
    }

    fn legend(&mut self, names: &[&str]) {
        for (i, n) in names.iter().enumerate() {
            let x = LEFT + 10.0 + 110.0 * i as f64;
            let y = H - 14.0;
            let _ = write!(
                self.out,
                r#"<rect x="{x:.1}" y="{:.1}" width="10" height="10" fill="{}"/><text x="{:.1}" y="{y:.1}">{}</text>"#,
                y - 9.0,
                colour(i),
                x + 14.0,
                escape(n)
            );
        }
    }

    fn finish(mut self) -> String {
        self.out.push_str("</svg>\n");
        self.out
    }
}

fn fmt_tick(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.to_string() }
}

fn bounds<'a>(values: impl Iterator<Item = &'a f64>, include_zero: bool) -> (f64, f64) {
    let (mut lo, mut hi) = if include_zero { (0.0f64, 0.0f64) } else { (f64::INFINITY, f64::NEG_INFINITY) };
    for &v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        (0.0, 1.0)
    } else {
        (lo, hi)
    }
}

/// One polyline per series over shared x positions.
pub fn line_chart(title: &str, x_labels: &[String], series: &[(String, Vec<f64>)]) -> String {
    let (lo, hi) = bounds(series.iter().flat_map(|s| s.1.iter()), true);
    let mut f = Frame::new(title, lo, hi);
    let n = x_labels.len().max(1);
    let step = (n / 8).max(1);
    for (i, l) in x_labels.iter().enumerate().step_by(step) {
        let (x, w) = f.x_slot(i, n);
        f.x_label(x + w / 2.0, l);
    }
    for (si, (_, values)) in series.iter().enumerate() {
        let mut pts = String::new();
        for (i, v) in values.iter().enumerate() {
            let (x, w) = f.x_slot(i, n);
            let _ = write!(pts, "{:.1},{:.1} ", x + w / 2.0, f.y(*v));
        }
        let _ = write!(
            f.out,
            r#"<polyline fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#,
            colour(si),
            pts.trim_end()
        );
    }
    let names: Vec<&str> = series.iter().map(|s| s.0.as_str()).collect();
    if names.len() <= 12 {
        f.legend(&names);
    }
    f.finish()
}

/// Grouped bars; each series is one colour, each label one group.
pub fn bar_chart(title: &str, labels: &[String], series: &[(String, Vec<f64>)]) -> String {
    let (lo, hi) = bounds(series.iter().flat_map(|s| s.1.iter()), true);
    let mut f = Frame::new(title, lo, hi);
    let n = labels.len();
    let zero = f.y(0.0);
    let groups = series.len().max(1) as f64;
    let step = (n / 25).max(1);
    for (i, label) in labels.iter().enumerate() {
        let (x, w) = f.x_slot(i, n);
        let bw = w * 0.8 / groups;
        for (si, (_, values)) in series.iter().enumerate() {
            let v = values[i];
            let y = f.y(v);
            let (top, height) = if y < zero { (y, zero - y) } else { (zero, y - zero) };
            let _ = write!(
                f.out,
                r#"<rect x="{:.1}" y="{top:.1}" width="{bw:.1}" height="{height:.1}" fill="{}"/>"#,
                x + w * 0.1 + bw * si as f64,
                colour(si)
            );
        }
        if i % step == 0 {
            f.x_label(x + w / 2.0, label);
        }
    }
    let names: Vec<&str> = series.iter().map(|s| s.0.as_str()).collect();
    f.legend(&names);
    f.finish()
}

/// Small-multiple histograms of values in `[0, 1]`, one panel per series.
pub fn histogram_grid(title: &str, panels: &[(String, Vec<f64>)], bins: usize) -> String {
    let bins = bins.max(1);
    let mut out = String::new();
    let cols = 3usize;
    let rows = panels.len().div_ceil(cols).max(1);
    let (pw, ph) = (W / cols as f64, (H * 1.5 - TOP) / rows as f64);
    let height = H * 1.5;
    let _ = write!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{height}" viewBox="0 0 {W} {height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = write!(out, r#"<rect width="{W}" height="{height}" fill="white"/>"#);
    let _ = write!(
        out,
        r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        W / 2.0,
        escape(title)
    );
    for (p, (name, values)) in panels.iter().enumerate() {
        let ox = pw * (p % cols) as f64;
        let oy = TOP + ph * (p / cols) as f64;
        let mut counts = vec![0usize; bins];
        for v in values {
            let b = ((v.clamp(0.0, 1.0) * bins as f64) as usize).min(bins - 1);
            counts[b] += 1;
        }
        let max = counts.iter().copied().max().unwrap_or(0).max(1) as f64;
        let inner_w = pw - 20.0;
        let inner_h = ph - 30.0;
        let bw = inner_w / bins as f64;
        let _ = write!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            ox + pw / 2.0,
            oy + 12.0,
            escape(name)
        );
        for (b, &c) in counts.iter().enumerate() {
            let h = inner_h * c as f64 / max;
            let _ = write!(
                out,
                r#"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{h:.1}" fill="{}"/>"#,
                ox + 10.0 + bw * b as f64,
                oy + 20.0 + inner_h - h,
                (bw - 1.0).max(0.5),
                colour(p)
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

/// Labelled scatter with circle area proportional to `size`.
pub fn scatter(title: &str, points: &[(String, f64, f64, f64)]) -> String {
    let (y_lo, y_hi) = bounds(points.iter().map(|p| &p.2), false);
    let (x_lo, x_hi) = bounds(points.iter().map(|p| &p.1), false);
    let (x_lo, x_hi) = if x_hi > x_lo { (x_lo, x_hi) } else { (x_lo - 1.0, x_lo + 1.0) };
    let pad_y = (y_hi - y_lo).abs().max(1e-9) * 0.1;
    let mut f = Frame::new(title, y_lo - pad_y, y_hi + pad_y);
    let max_size = points.iter().map(|p| p.3).fold(0.0, f64::max).max(1e-12);
    for (i, (label, x, y, size)) in points.iter().enumerate() {
        let px = LEFT + 20.0 + (x - x_lo) / (x_hi - x_lo) * (W - LEFT - RIGHT - 40.0);
        let py = f.y(*y);
        let r = 4.0 + 16.0 * (size / max_size).sqrt();
        let _ = write!(
            f.out,
            r#"<circle cx="{px:.1}" cy="{py:.1}" r="{r:.1}" fill="{}" fill-opacity="0.5"/><text x="{px:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            colour(i),
            py + 4.0,
            escape(label)
        );
    }
    f.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_polyline_per_series() {
        let labels: Vec<String> = (0..5).map(|i| format!("w{i}")).collect();
        let series: Vec<(String, Vec<f64>)> =
            (0..3).map(|t| (format!("topic {t}"), vec![1.0, 2.0, t as f64, 0.0, 4.0])).collect();
        let svg = line_chart("dynamics", &labels, &series);
        assert_eq!(svg.matches("<polyline").count(), 3);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert!(!svg.contains("href"));
    }

    #[test]
    fn bars_handle_negative_values_and_escape_text() {
        let svg = bar_chart("a < b", &["t0".into(), "t1".into()], &[("s".into(), vec![-0.5, 0.25])]);
        assert_eq!(svg.matches("<rect").count(), 1 + 2 + 1);
        assert!(svg.contains("a &lt; b"));
    }

    #[test]
    fn deterministic_output() {
        let pts = vec![("0".to_string(), 0.1, 0.2, 5.0), ("1".to_string(), -0.3, 0.0, 10.0)];
        assert_eq!(scatter("m", &pts), scatter("m", &pts));
        let h = histogram_grid("h", &[("fear".into(), vec![0.0, 0.5, 1.0])], 10);
        assert_eq!(h.matches("<rect").count(), 1 + 10);
    }
}
