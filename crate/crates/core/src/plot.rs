//! Minimal static SVG log-log charts.

use std::fmt::Write as _;

/// One data set: scatter points plus an optional line.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotSeries {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub curve: Vec<(f64, f64)>,
}

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 500.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 200.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];
/// Widest y range drawn; anything further below sits on the bottom axis.
const MAX_DECADES: f64 = 14.0;

struct Axis {
    lo: f64,
    hi: f64,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, max_decades: f64) -> Self {
        let logs: Vec<f64> = values.filter(|v| *v > 0.0 && v.is_finite()).map(f64::log10).collect();
        if logs.is_empty() {
            return Self { lo: -12.0, hi: 0.0 };
        }
        let hi = logs.iter().copied().fold(f64::MIN, f64::max).ceil();
        let lo = logs.iter().copied().fold(f64::MAX, f64::min).floor();
        let lo = lo.max(hi - max_decades);
        Self { lo, hi: if hi > lo { hi } else { lo + 1.0 } }
    }

    /// Position in `[0, 1]`, clamped, for a value on this log axis.
    fn frac(&self, v: f64) -> f64 {
        if v <= 0.0 {
            return 0.0;
        }
        ((v.log10() - self.lo) / (self.hi - self.lo)).clamp(0.0, 1.0)
    }

    fn ticks(&self) -> Vec<i32> {
        let span = (self.hi - self.lo) as i32;
        let step = if span > 10 { 2 } else { 1 };
        (self.lo as i32..=self.hi as i32).filter(|k| (k - self.lo as i32) % step == 0).collect()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn render_loglog(series: &[PlotSeries], x_label: &str, y_label: &str) -> String {
    let all = || series.iter().flat_map(|s| s.points.iter().chain(&s.curve));
    let xa = Axis::fit(all().map(|p| p.0), f64::INFINITY);
    let ya = Axis::fit(all().map(|p| p.1), MAX_DECADES);
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let px = |x: f64| LEFT + xa.frac(x) * pw;
    let py = |y: f64| TOP + (1.0 - ya.frac(y)) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(s, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    for k in xa.ticks() {
        let x = px(10f64.powi(k));
        let _ = writeln!(s, r##"<line x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{:.2}" stroke="#ddd"/>"##, TOP + ph);
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">1e{k}</text>"#, TOP + ph + 18.0);
    }
    for k in ya.ticks() {
        let y = py(10f64.powi(k));
        let _ = writeln!(s, r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/>"##, LEFT + pw);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">1e{k}</text>"#, LEFT - 6.0, y + 4.0);
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 15.0,
        escape(x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(y_label)
    );

    for (k, ser) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        if ser.curve.len() >= 2 {
            let pts: Vec<String> = ser.curve.iter().map(|(x, y)| format!("{:.2},{:.2}", px(*x), py(*y))).collect();
            let _ = writeln!(
                s,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
                pts.join(" ")
            );
        }
        for (x, y) in &ser.points {
            // Values under the axis floor are drawn hollow on the bottom edge.
            let fill = if *y > 0.0 && y.log10() >= ya.lo { color } else { "none" };
            let _ =
                writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{fill}" stroke="{color}"/>"#, px(*x), py(*y));
        }
        let ly = TOP + 16.0 + 20.0 * k as f64;
        let lx = LEFT + pw + 16.0;
        let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{ly:.2}" r="3" fill="{color}"/>"#, lx + 10.0);
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="1.5"/>"#,
            lx + 20.0
        );
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, lx + 26.0, ly + 4.0, escape(&ser.label));
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_series_and_legend() {
        let pts: Vec<(f64, f64)> = (0..5).map(|k| (10f64.powi(-k), 10f64.powi(-k) * 0.5)).collect();
        let svg = render_loglog(
            &[
                PlotSeries { label: "a <1>".into(), points: pts.clone(), curve: pts.clone() },
                PlotSeries { label: "zero".into(), points: vec![(1e-3, 0.0)], curve: vec![] },
            ],
            "x",
            "y",
        );
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert!(svg.contains("a &lt;1&gt;"));
        assert!(svg.contains(r##"fill="none" stroke="#d62728""##));
    }

    #[test]
    fn axis_is_clamped_to_max_decades() {
        let a = Axis::fit([1e-30, 1.0].into_iter(), MAX_DECADES);
        assert_eq!(a.hi, 0.0);
        assert_eq!(a.lo, -14.0);
        assert_eq!(a.frac(1e-30), 0.0);
    }
}
