//! Quadrature over the line-parameter strip `(r, theta)` and over windows.
//!
//! Integrals over lines are organized as an outer `theta` integral split at
//! every angle where the chord geometry changes topology, and an inner `r`
//! integral split at vertex projections. For disks the inner variable is
//! `r = <u, c> + rho sin(phi)`, which makes chord lengths (`2 rho cos(phi)`)
//! smooth in the integration variable.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{chord_interval, line_point, Chord, LineParams, Point2, Window};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    Midpoint,
    GaussLegendre,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Nodes per radial panel.
    pub radial_nodes: usize,
    /// Nodes per angular panel.
    pub angular_nodes: usize,
    pub rule: Rule,
    /// Absolute tolerance on the node-doubling error estimate.
    pub tolerance: f64,
    /// Number of doublings tried before giving up.
    pub max_doublings: u32,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            radial_nodes: 16,
            angular_nodes: 16,
            rule: Rule::GaussLegendre,
            tolerance: 1e-10,
            max_doublings: 6,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.radial_nodes < 8 || self.angular_nodes < 8 {
            return Err(Error::param("quadrature needs at least 8 nodes per axis"));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::param("quadrature tolerance must be positive"));
        }
        Ok(())
    }

    fn doubled(&self, k: u32) -> (usize, usize) {
        (self.radial_nodes << k, self.angular_nodes << k)
    }
}

/// A value with its node-doubling error estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// Nodes and weights on `[-1, 1]`.
pub(crate) fn rule_nodes(rule: Rule, n: usize) -> Vec<(f64, f64)> {
    let n = n.max(1);
    match rule {
        Rule::Midpoint => {
            let w = 2.0 / n as f64;
            (0..n).map(|i| (-1.0 + (i as f64 + 0.5) * w, w)).collect()
        }
        Rule::GaussLegendre => GaussLegendre::new(NonZeroUsize::new(n).expect("n >= 1"))
            .as_node_weight_pairs()
            .to_vec(),
    }
}

/// Integral of `f` over consecutive panels `[b_i, b_{i+1}]`.
pub(crate) fn integrate_panels<F: FnMut(f64) -> f64>(
    breaks: &[f64],
    nodes: &[(f64, f64)],
    mut f: F,
) -> f64 {
    let mut total = 0.0;
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let (half, mid) = (0.5 * (b - a), 0.5 * (a + b));
        total += half
            * nodes
                .iter()
                .map(|&(x, wt)| wt * f(mid + half * x))
                .sum::<f64>();
    }
    total
}

/// Sorted, deduplicated breakpoints within `[lo, hi]`, always including both
/// ends.
fn breakpoints(lo: f64, hi: f64, inner: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = inner.into_iter().filter(|&t| t > lo && t < hi).collect();
    v.push(lo);
    v.push(hi);
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    v
}

fn rect_vertices(window: &Window) -> Option<[Point2; 4]> {
    match *window {
        Window::Rect { x0, y0, x1, y1 } => Some([
            Point2::new(x0, y0),
            Point2::new(x1, y0),
            Point2::new(x1, y1),
            Point2::new(x0, y1),
        ]),
        Window::Disk { .. } => None,
    }
}

/// Angles in `[0, 2pi)` at which the `theta`-integrand may have a kink.
fn angular_breaks(window: &Window, offset: f64) -> Vec<f64> {
    let mut pts = Vec::new();
    match *window {
        Window::Disk { center, radius } => {
            // <u, c> = |c| cos(theta - theta_c) crosses +-radius.
            let norm = center.norm();
            if norm > 0.0 {
                let tc = center.y.atan2(center.x);
                for level in [radius, -radius] {
                    if level.abs() <= norm {
                        let a = (level / norm).acos();
                        pts.push(tc + a);
                        pts.push(tc - a);
                    }
                }
            }
        }
        Window::Rect { .. } => {
            let v = rect_vertices(window).expect("rect");
            // a vertex projection crosses r = 0
            for p in &v {
                let t = (-p.x).atan2(p.y);
                pts.push(t);
                pts.push(t + PI);
            }
            // two vertex projections coincide
            for i in 0..4 {
                for j in (i + 1)..4 {
                    let d = Point2::new(v[i].x - v[j].x, v[i].y - v[j].y);
                    let t = (-d.x).atan2(d.y);
                    pts.push(t);
                    pts.push(t + PI);
                }
            }
        }
    }
    let lo = offset;
    let hi = offset + TAU;
    let reduced = pts.into_iter().map(|t| lo + (t - lo).rem_euclid(TAU));
    breakpoints(lo, hi, reduced)
}

/// Visits quadrature nodes of the `r` integral over `[0, inf)` at angle
/// `theta`, passing the node's weight (Jacobian included) and its chord.
fn radial_nodes<F: FnMut(f64, f64, Chord)>(
    window: &Window,
    theta: f64,
    nodes: &[(f64, f64)],
    mut visit: F,
) {
    let (sin, cos) = theta.sin_cos();
    match *window {
        Window::Disk { center, radius } => {
            let a = center.x * cos + center.y * sin;
            let foot = -center.x * sin + center.y * cos;
            // r = a + radius sin(phi) >= 0
            let phi_lo = if a >= radius {
                -FRAC_PI_2
            } else if a <= -radius {
                return;
            } else {
                (-a / radius).asin()
            };
            let (half, mid) = (0.5 * (FRAC_PI_2 - phi_lo), 0.5 * (FRAC_PI_2 + phi_lo));
            for &(x, w) in nodes {
                let phi = mid + half * x;
                let h = radius * phi.cos();
                if h > 0.0 {
                    visit(
                        a + radius * phi.sin(),
                        half * w * h,
                        Chord {
                            lo: foot - h,
                            hi: foot + h,
                        },
                    );
                }
            }
        }
        Window::Rect { .. } => {
            let v = rect_vertices(window).expect("rect");
            let proj: Vec<f64> = v.iter().map(|p| p.x * cos + p.y * sin).collect();
            let pmax = proj.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let pmin = proj.iter().copied().fold(f64::INFINITY, f64::min);
            let lo = pmin.max(0.0);
            if pmax <= lo {
                return;
            }
            let br = breakpoints(lo, pmax, proj);
            for pair in br.windows(2) {
                let (half, mid) = (0.5 * (pair[1] - pair[0]), 0.5 * (pair[0] + pair[1]));
                for &(x, w) in nodes {
                    let r = mid + half * x;
                    let line = LineParams::new(r, theta).expect("r >= 0");
                    if let Some(ch) = chord_interval(window, &line) {
                        visit(r, half * w, ch);
                    }
                }
            }
        }
    }
}

fn degenerate(window: &Window) -> bool {
    !(window.area() > 0.0)
}

fn refine<F: FnMut(usize, usize) -> f64>(spec: &QuadratureSpec, mut eval: F) -> Result<Estimate> {
    spec.validate()?;
    let (nr, nt) = spec.doubled(0);
    let mut coarse = eval(nr, nt);
    let mut last_err = f64::INFINITY;
    for k in 1..=spec.max_doublings {
        let (nr, nt) = spec.doubled(k);
        let fine = eval(nr, nt);
        let err = (fine - coarse).abs();
        if err <= spec.tolerance {
            return Ok(Estimate {
                value: fine,
                error: err,
            });
        }
        coarse = fine;
        last_err = err;
    }
    Err(Error::Quadrature {
        estimate: last_err,
        tolerance: spec.tolerance,
    })
}

/// `int_0^{2pi} int_0^inf h(H1(K cap D(r, theta))) dr dtheta` for a chord
/// functional `h` with `h(0) = 0`.
pub fn chord_functional_integral<H: Fn(f64) -> f64>(
    window: &Window,
    h: H,
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    chord_functional_integral_offset(window, h, spec, 0.0)
}

/// As [`chord_functional_integral`] with the angular panels starting at
/// `offset` instead of 0; the value must not depend on it.
pub fn chord_functional_integral_offset<H: Fn(f64) -> f64>(
    window: &Window,
    h: H,
    spec: &QuadratureSpec,
    offset: f64,
) -> Result<Estimate> {
    if degenerate(window) {
        return Ok(Estimate {
            value: 0.0,
            error: 0.0,
        });
    }
    let tbreaks = angular_breaks(window, offset);
    refine(spec, |nr, nt| {
        let rn = rule_nodes(spec.rule, nr);
        let tn = rule_nodes(spec.rule, nt);
        integrate_panels(&tbreaks, &tn, |theta| {
            let mut acc = 0.0;
            radial_nodes(window, theta, &rn, |_, w, ch| acc += w * h(ch.len()));
            acc
        })
    })
}

/// Closed-form integrands for the coarea check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Integrand {
    Constant {
        value: f64,
    },
    Gaussian {
        center: Point2,
        sigma: f64,
    },
    /// `x^px y^py`.
    Monomial {
        px: u32,
        py: u32,
    },
}

impl Integrand {
    pub fn eval(&self, p: &Point2) -> f64 {
        match *self {
            Integrand::Constant { value } => value,
            Integrand::Gaussian { center, sigma } => {
                let d2 = (p.x - center.x).powi(2) + (p.y - center.y).powi(2);
                (-0.5 * d2 / (sigma * sigma)).exp()
            }
            Integrand::Monomial { px, py } => p.x.powi(px as i32) * p.y.powi(py as i32),
        }
    }

    pub fn name(&self) -> String {
        match *self {
            Integrand::Constant { value } => format!("constant({value})"),
            Integrand::Gaussian { center, sigma } => {
                format!("gaussian({},{};{})", center.x, center.y, sigma)
            }
            Integrand::Monomial { px, py } => format!("x^{px}y^{py}"),
        }
    }
}

/// `int_K f dx` by tensor (rectangle) or polar (disk) quadrature.
pub fn area_integral(f: &Integrand, window: &Window, spec: &QuadratureSpec) -> Result<Estimate> {
    if degenerate(window) {
        return Ok(Estimate {
            value: 0.0,
            error: 0.0,
        });
    }
    refine(spec, |nr, nt| {
        let rn = rule_nodes(spec.rule, nr);
        let tn = rule_nodes(spec.rule, nt);
        match *window {
            Window::Disk { center, radius } => integrate_panels(&[0.0, TAU], &tn, |phi| {
                let (s, c) = phi.sin_cos();
                integrate_panels(&[0.0, radius], &rn, |rho| {
                    rho * f.eval(&Point2::new(center.x + rho * c, center.y + rho * s))
                })
            }),
            Window::Rect { x0, y0, x1, y1 } => integrate_panels(&[y0, y1], &tn, |y| {
                integrate_panels(&[x0, x1], &rn, |x| f.eval(&Point2::new(x, y)))
            }),
        }
    })
}

/// `int_{r >= 0} int_{K cap D(r, theta)} f dH1 dr` at a fixed angle.
pub fn chord_iterated_integral(
    f: &Integrand,
    window: &Window,
    theta: f64,
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    if degenerate(window) {
        return Ok(Estimate {
            value: 0.0,
            error: 0.0,
        });
    }
    refine(spec, |nr, nt| {
        let rn = rule_nodes(spec.rule, nr);
        let sn = rule_nodes(spec.rule, nt);
        let mut acc = 0.0;
        radial_nodes(window, theta, &rn, |r, w, ch| {
            let line = LineParams::new(r, theta).expect("r >= 0");
            acc += w * integrate_panels(&[ch.lo, ch.hi], &sn, |s| f.eval(&line_point(&line, s)));
        });
        acc
    })
}
