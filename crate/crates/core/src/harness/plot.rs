//! Minimal static log-log SVG charts.

use std::fmt::Write;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Style {
    Points,
    Line,
    Dashed,
}

#[derive(Clone, Debug)]
pub struct Series {
    label: String,
    color: String,
    data: Vec<(f64, f64)>,
    style: Style,
}

impl Series {
    pub fn points(label: &str, color: &str, data: Vec<(f64, f64)>) -> Self {
        Self::new(label, color, data, Style::Points)
    }

    pub fn line(label: &str, color: &str, data: Vec<(f64, f64)>) -> Self {
        Self::new(label, color, data, Style::Line)
    }

    pub fn dashed(label: &str, color: &str, data: Vec<(f64, f64)>) -> Self {
        Self::new(label, color, data, Style::Dashed)
    }

    fn new(label: &str, color: &str, data: Vec<(f64, f64)>, style: Style) -> Self {
        Self {
            label: label.to_string(),
            color: color.to_string(),
            // nonpositive values have no place on a log axis
            data: data
                .into_iter()
                .filter(|(x, y)| *x > 0.0 && *y > 0.0)
                .collect(),
            style,
        }
    }
}

const W: f64 = 640.0;
const H: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn decades(lo: f64, hi: f64) -> (f64, f64) {
    let (a, b) = (lo.log10().floor(), hi.log10().ceil());
    if a == b {
        (a, a + 1.0)
    } else {
        (a, b)
    }
}

pub fn loglog_svg(title: &str, xlabel: &str, ylabel: &str, series: &[Series]) -> String {
    let all = || series.iter().flat_map(|s| s.data.iter());
    let fold = |f: fn(&(f64, f64)) -> f64| {
        all()
            .map(f)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v), hi.max(v))
            })
    };
    let (xr, yr) = (fold(|p| p.0), fold(|p| p.1));
    let (x0, x1) = if xr.0.is_finite() {
        decades(xr.0, xr.1)
    } else {
        (0.0, 1.0)
    };
    let (y0, y1) = if yr.0.is_finite() {
        decades(yr.0, yr.1)
    } else {
        (0.0, 1.0)
    };
    let (pw, ph) = (W - LEFT - RIGHT, H - TOP - BOTTOM);
    let px = |x: f64| LEFT + (x.log10() - x0) / (x1 - x0) * pw;
    let py = |y: f64| TOP + (1.0 - (y.log10() - y0) / (y1 - y0)) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        W / 2.0,
        escape(title)
    );
    let _ = writeln!(
        s,
        r##"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="#333"/>"##
    );
    for d in (x0 as i32)..=(x1 as i32) {
        let x = LEFT + (d as f64 - x0) / (x1 - x0) * pw;
        let _ = writeln!(
            s,
            r##"<line x1="{x:.1}" y1="{TOP}" x2="{x:.1}" y2="{}" stroke="#ddd"/>"##,
            TOP + ph
        );
        let _ = writeln!(
            s,
            r#"<text x="{x:.1}" y="{}" text-anchor="middle">1e{d}</text>"#,
            TOP + ph + 16.0
        );
    }
    for d in (y0 as i32)..=(y1 as i32) {
        let y = TOP + (1.0 - (d as f64 - y0) / (y1 - y0)) * ph;
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT}" y1="{y:.1}" x2="{}" y2="{y:.1}" stroke="#ddd"/>"##,
            LEFT + pw
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.1}" text-anchor="end">1e{d}</text>"#,
            LEFT - 6.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        H - 12.0,
        escape(xlabel)
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{0}" text-anchor="middle" transform="rotate(-90 16 {0})">{1}</text>"#,
        TOP + ph / 2.0,
        escape(ylabel)
    );
    for (k, ser) in series.iter().enumerate() {
        match ser.style {
            Style::Points => {
                for &(x, y) in &ser.data {
                    let _ = writeln!(
                        s,
                        r#"<circle cx="{:.1}" cy="{:.1}" r="4" fill="{}"/>"#,
                        px(x),
                        py(y),
                        ser.color
                    );
                }
            }
            Style::Line | Style::Dashed => {
                let pts: Vec<String> = ser
                    .data
                    .iter()
                    .map(|&(x, y)| format!("{:.1},{:.1}", px(x), py(y)))
                    .collect();
                let dash = if ser.style == Style::Dashed {
                    r#" stroke-dasharray="6 4""#
                } else {
                    ""
                };
                let _ = writeln!(
                    s,
                    r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="2"{dash}/>"#,
                    pts.join(" "),
                    ser.color
                );
            }
        }
        let ly = TOP + 16.0 + 16.0 * k as f64;
        let lx = LEFT + pw - 190.0;
        let _ = writeln!(
            s,
            r#"<rect x="{lx}" y="{}" width="12" height="4" fill="{}"/>"#,
            ly - 6.0,
            ser.color
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{ly}">{}</text>"#,
            lx + 18.0,
            escape(&ser.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_all_series() {
        let svg = loglog_svg(
            "a < b",
            "n",
            "d",
            &[
                Series::points("est", "red", vec![(10.0, 0.1), (100.0, 0.01)]),
                Series::line("bound", "blue", vec![(10.0, 0.5), (100.0, 0.05)]),
                Series::dashed("skip", "gray", vec![(0.0, 1.0)]),
            ],
        );
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert_eq!(svg.matches("<circle").count(), 2);
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("a &lt; b"));
    }
}
