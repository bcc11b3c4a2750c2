//! Minimal SVG line plots with a logarithmic y axis.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 440.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
}

impl Series {
    pub fn data(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Series {
            label: label.into(),
            points,
            dashed: false,
        }
    }

    pub fn reference(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Series {
            label: label.into(),
            points,
            dashed: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub series: Vec<Series>,
}

/// `N^-1`, `N^-2` and `N^-2 (log N)^3` through `anchor`, sampled at `xs`.
pub fn reference_slopes(anchor: (f64, f64), xs: &[f64]) -> Vec<Series> {
    let (n0, e0) = anchor;
    let shape = |f: &dyn Fn(f64) -> f64| xs.iter().map(|&x| (x, e0 * f(x) / f(n0))).collect::<Vec<_>>();
    vec![
        Series::reference("N^-1", shape(&|x| 1.0 / x)),
        Series::reference("N^-2", shape(&|x| x.powi(-2))),
        Series::reference("N^-2 (log N)^3", shape(&|x| x.powi(-2) * x.ln().powi(3))),
    ]
}

fn usable(p: &(f64, f64), log_x: bool) -> bool {
    p.1 > 0.0 && p.1.is_finite() && p.0.is_finite() && (!log_x || p.0 > 0.0)
}

impl Plot {
    pub fn to_svg(&self) -> String {
        let fx = |x: f64| if self.log_x { x.log10() } else { x };
        let pts: Vec<(f64, f64)> = self
            .series
            .iter()
            .flat_map(|s| s.points.iter())
            .filter(|p| usable(p, self.log_x))
            .map(|p| (fx(p.0), p.1.log10()))
            .collect();
        let mut s = String::new();
        writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
        )
        .unwrap();
        writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#).unwrap();
        writeln!(s, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, LEFT + (W - LEFT - RIGHT) / 2.0, escape(&self.title)).unwrap();
        if pts.is_empty() {
            s.push_str("</svg>\n");
            return s;
        }
        let (mut x0, mut x1, mut y0, mut y1) = pts.iter().fold(
            (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY),
            |(a, b, c, d), p| (a.min(p.0), b.max(p.0), c.min(p.1), d.max(p.1)),
        );
        y0 = y0.floor();
        y1 = y1.ceil().max(y0 + 1.0);
        if self.log_x {
            x0 = x0.floor();
            x1 = x1.ceil().max(x0 + 1.0);
        } else if x1 <= x0 {
            x1 = x0 + 1.0;
        }
        let pw = W - LEFT - RIGHT;
        let ph = H - TOP - BOTTOM;
        let px = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
        let py = |y: f64| TOP + (y1 - y) / (y1 - y0) * ph;
        writeln!(s, r##"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>"##).unwrap();
        // decade ticks
        let mut d = y0;
        while d <= y1 + 1e-9 {
            let y = py(d);
            writeln!(s, r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/>"##, LEFT + pw).unwrap();
            writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">1e{}</text>"#, LEFT - 6.0, y + 4.0, d as i64).unwrap();
            d += 1.0;
        }
        let xstep = if self.log_x { 1.0 } else { ((x1 - x0) / 8.0).ceil().max(1.0) };
        let mut t = x0;
        while t <= x1 + 1e-9 {
            let x = px(t);
            writeln!(s, r##"<line x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{:.2}" stroke="#ddd"/>"##, TOP + ph).unwrap();
            let label = if self.log_x { format!("1e{}", t as i64) } else { format!("{t}") };
            writeln!(s, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{label}</text>"#, TOP + ph + 18.0).unwrap();
            t += xstep;
        }
        writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, LEFT + pw / 2.0, H - 14.0, escape(&self.x_label)).unwrap();
        writeln!(
            s,
            r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
            TOP + ph / 2.0,
            TOP + ph / 2.0,
            escape(&self.y_label)
        )
        .unwrap();
        for (i, series) in self.series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let path: Vec<String> = series
                .points
                .iter()
                .filter(|p| usable(p, self.log_x))
                .map(|p| format!("{:.2},{:.2}", px(fx(p.0)), py(p.1.log10())))
                .collect();
            if path.is_empty() {
                continue;
            }
            let dash = if series.dashed { r#" stroke-dasharray="6 4""# } else { "" };
            writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.6"{dash}/>"#, path.join(" ")).unwrap();
            if !series.dashed {
                for p in &path {
                    let (x, y) = p.split_once(',').unwrap();
                    writeln!(s, r#"<circle cx="{x}" cy="{y}" r="2.5" fill="{color}"/>"#).unwrap();
                }
            }
            let ly = TOP + 10.0 + 18.0 * i as f64;
            let lx = LEFT + pw + 12.0;
            writeln!(s, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="1.6"{dash}/>"#, lx + 22.0).unwrap();
            writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, lx + 28.0, ly + 4.0, escape(&series.label)).unwrap();
        }
        s.push_str("</svg>\n");
        s
    }
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn references_pass_through_the_anchor() {
        let xs = [64.0, 128.0, 256.0];
        let r = reference_slopes((64.0, 0.5), &xs);
        assert_eq!(r.len(), 3);
        for s in &r {
            assert!((s.points[0].1 - 0.5).abs() < 1e-15);
        }
        assert!((r[1].points[1].1 - 0.125).abs() < 1e-15);
    }

    #[test]
    fn svg_is_well_formed_and_skips_non_positive_values() {
        let p = Plot {
            title: "a < b".into(),
            x_label: "N".into(),
            y_label: "e".into(),
            log_x: true,
            series: vec![Series::data("d", vec![(1.0, 1.0), (10.0, 0.0), (100.0, 1e-3)])],
        };
        let svg = p.to_svg();
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert!(svg.contains("a &lt; b"));
        assert_eq!(svg.matches("<circle").count(), 2);
        let empty = Plot { series: vec![], ..p };
        assert!(empty.to_svg().ends_with("</svg>\n"));
    }
}
