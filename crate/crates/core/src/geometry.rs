//! Planar line geometry and great-circle orbit geometry.
//!
//! Lines are parametrized by `(r, theta)`: `r` is the perpendicular distance
//! from the origin and `theta` the direction of the perpendicular. Points on a
//! line are addressed by a signed arc-length `s` measured from the foot of the
//! perpendicular, so that
//!
//! ```text
//! p(s) = (r cos(theta) - s sin(theta), r sin(theta) + s cos(theta))
//! ```
//!
//! Orbits on the unit sphere are great circles `{y : <x, y> = 0}` addressed by
//! an angle through a fixed rotation taking the north pole to `x`.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used when checking unit-norm inputs.
pub const UNIT_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn distance(&self, other: &Self) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// A point on the unit sphere.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointS2 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl PointS2 {
    /// Builds a point from coordinates that are already (nearly) unit norm and
    /// renormalizes them. Fails when the input norm is off by more than
    /// [`UNIT_TOLERANCE`].
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let n = (x * x + y * y + z * z).sqrt();
        if !n.is_finite() || (n - 1.0).abs() > UNIT_TOLERANCE {
            return Err(Error::NotUnit(n));
        }
        Ok(Self {
            x: x / n,
            y: y / n,
            z: z / n,
        })
    }

    /// Projects an arbitrary nonzero vector onto the sphere.
    pub fn normalize(x: f64, y: f64, z: f64) -> Option<Self> {
        let n = (x * x + y * y + z * z).sqrt();
        if n == 0.0 || !n.is_finite() {
            return None;
        }
        Some(Self {
            x: x / n,
            y: y / n,
            z: z / n,
        })
    }

    pub const NORTH: Self = Self {
        x: 0.0,
        y: 0.0,
        z: 1.0,
    };

    pub fn as_array(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    /// Great-circle (angular) distance.
    pub fn angle_to(&self, other: &Self) -> f64 {
        // atan2 of |a x b| and a.b is accurate at both small and large angles.
        let cx = self.y * other.z - self.z * other.y;
        let cy = self.z * other.x - self.x * other.z;
        let cz = self.x * other.y - self.y * other.x;
        (cx * cx + cy * cy + cz * cz).sqrt().atan2(self.dot(other))
    }
}

/// Perpendicular-distance / angle parametrization of a planar line.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineParams {
    r: f64,
    theta: f64,
}

impl LineParams {
    /// `r` must be nonnegative; `theta` is reduced into `[0, 2pi)`.
    pub fn new(r: f64, theta: f64) -> Result<Self> {
        if !(r >= 0.0) || !r.is_finite() || !theta.is_finite() {
            return Err(Error::InvalidLine { r, theta });
        }
        let mut theta = theta.rem_euclid(TAU);
        if theta >= TAU {
            theta = 0.0;
        }
        Ok(Self { r, theta })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Unit normal `(cos theta, sin theta)`.
    pub fn normal(&self) -> Point2 {
        let (s, c) = self.theta.sin_cos();
        Point2::new(c, s)
    }

    /// Unit direction `(-sin theta, cos theta)`.
    pub fn direction(&self) -> Point2 {
        let (s, c) = self.theta.sin_cos();
        Point2::new(-s, c)
    }
}

/// Point at signed arc-length `s` along `line`.
pub fn line_point(line: &LineParams, s: f64) -> Point2 {
    let (sin, cos) = line.theta.sin_cos();
    Point2::new(line.r * cos - s * sin, line.r * sin + s * cos)
}

/// Arc-length interval of a chord, `lo < hi`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Chord {
    pub lo: f64,
    pub hi: f64,
}

impl Chord {
    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.hi <= self.lo
    }
}

/// Compact observation window.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Window {
    Disk { center: Point2, radius: f64 },
    Rect { x0: f64, y0: f64, x1: f64, y1: f64 },
}

impl Window {
    pub fn disk(center: Point2, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() || !center.x.is_finite() || !center.y.is_finite()
        {
            return Err(Error::InvalidWindow(format!(
                "disk radius must be positive and finite, got {radius}"
            )));
        }
        Ok(Window::Disk { center, radius })
    }

    pub fn unit_disk() -> Self {
        Window::Disk {
            center: Point2::new(0.0, 0.0),
            radius: 1.0,
        }
    }

    pub fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        let finite = [x0, y0, x1, y1].iter().all(|v| v.is_finite());
        if !finite || !(x0 < x1) || !(y0 < y1) {
            return Err(Error::InvalidWindow(format!(
                "rectangle needs x0 < x1 and y0 < y1, got [{x0}, {x1}] x [{y0}, {y1}]"
            )));
        }
        Ok(Window::Rect { x0, y0, x1, y1 })
    }

    pub fn unit_square() -> Self {
        Window::Rect {
            x0: 0.0,
            y0: 0.0,
            x1: 1.0,
            y1: 1.0,
        }
    }

    pub fn area(&self) -> f64 {
        match *self {
            Window::Disk { radius, .. } => PI * radius * radius,
            Window::Rect { x0, y0, x1, y1 } => (x1 - x0).max(0.0) * (y1 - y0).max(0.0),
        }
    }

    pub fn center(&self) -> Point2 {
        match *self {
            Window::Disk { center, .. } => center,
            Window::Rect { x0, y0, x1, y1 } => Point2::new(0.5 * (x0 + x1), 0.5 * (y0 + y1)),
        }
    }

    /// Radius of the largest disk around [`Window::center`] inside the window.
    pub fn inner_radius(&self) -> f64 {
        match *self {
            Window::Disk { radius, .. } => radius,
            Window::Rect { x0, y0, x1, y1 } => 0.5 * (x1 - x0).min(y1 - y0),
        }
    }

    /// Largest distance between two points of the window.
    pub fn diameter(&self) -> f64 {
        match *self {
            Window::Disk { radius, .. } => 2.0 * radius,
            Window::Rect { x0, y0, x1, y1 } => (x1 - x0).hypot(y1 - y0),
        }
    }

    /// Closed-set membership.
    pub fn contains(&self, p: &Point2) -> bool {
        match *self {
            Window::Disk { center, radius } => p.distance(&center) <= radius,
            Window::Rect { x0, y0, x1, y1 } => p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1,
        }
    }

    /// Axis-aligned square inscribed in the window and sharing its center.
    pub fn inscribed_square(&self) -> [f64; 4] {
        match *self {
            Window::Disk { center, radius } => {
                let h = radius / 2f64.sqrt();
                [center.x - h, center.y - h, center.x + h, center.y + h]
            }
            Window::Rect { x0, y0, x1, y1 } => [x0, y0, x1, y1],
        }
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Window::Disk { center, radius } => {
                write!(f, "disk:{},{},{}", center.x, center.y, radius)
            }
            Window::Rect { x0, y0, x1, y1 } => write!(f, "rect:{x0},{y0},{x1},{y1}"),
        }
    }
}

/// Parses `disk:cx,cy,r` or `rect:x0,y0,x1,y1`.
impl FromStr for Window {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidWindow(format!("cannot parse window descriptor {s:?}"));
        let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
        let nums = rest
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| bad())?;
        match (kind.trim(), nums.as_slice()) {
            ("disk", [cx, cy, r]) => Window::disk(Point2::new(*cx, *cy), *r),
            ("rect", [x0, y0, x1, y1]) => Window::rect(*x0, *y0, *x1, *y1),
            _ => Err(bad()),
        }
    }
}

/// Arc-length interval of `window ∩ line`, or `None` if the intersection is
/// empty or has zero length.
pub fn chord_interval(window: &Window, line: &LineParams) -> Option<Chord> {
    let (sin, cos) = line.theta.sin_cos();
    let chord = match *window {
        Window::Disk { center, radius } => {
            // Signed offset of the center from the line, and its arc-length foot.
            let d = line.r - (center.x * cos + center.y * sin);
            let foot = -center.x * sin + center.y * cos;
            let h2 = radius * radius - d * d;
            if h2 <= 0.0 {
                return None;
            }
            let h = h2.sqrt();
            Chord {
                lo: foot - h,
                hi: foot + h,
            }
        }
        Window::Rect { x0, y0, x1, y1 } => {
            // Parametric clipping of x(s) = a_x + b_x s and y(s) = a_y + b_y s.
            let mut lo = f64::NEG_INFINITY;
            let mut hi = f64::INFINITY;
            for (a, b, min, max) in [(line.r * cos, -sin, x0, x1), (line.r * sin, cos, y0, y1)] {
                if b.abs() < 1e-15 {
                    if a < min || a > max {
                        return None;
                    }
                } else {
                    let t0 = (min - a) / b;
                    let t1 = (max - a) / b;
                    lo = lo.max(t0.min(t1));
                    hi = hi.min(t0.max(t1));
                }
            }
            Chord { lo, hi }
        }
    };
    (!chord.is_empty()).then_some(chord)
}

/// One-dimensional measure of `window ∩ line`.
pub fn chord_length(window: &Window, line: &LineParams) -> f64 {
    chord_interval(window, line).map_or(0.0, |c| c.len())
}

/// Maximal distance from the origin to a point of the window. Lines with a
/// larger `r` never meet the window.
pub fn support_radius(window: &Window) -> f64 {
    match *window {
        Window::Disk { center, radius } => center.norm() + radius,
        Window::Rect { x0, y0, x1, y1 } => {
            let fx = x0.abs().max(x1.abs());
            let fy = y0.abs().max(y1.abs());
            fx.hypot(fy)
        }
    }
}

/// Proper rotation of three-space stored row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rotation3 {
    m: [[f64; 3]; 3],
}

impl Rotation3 {
    pub const IDENTITY: Self = Self {
        m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
    };

    pub fn matrix(&self) -> &[[f64; 3]; 3] {
        &self.m
    }

    pub fn apply(&self, v: [f64; 3]) -> [f64; 3] {
        let m = &self.m;
        [
            m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
        ]
    }

    pub fn determinant(&self) -> f64 {
        let m = &self.m;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Largest entry of `|R^T R - I|`.
    pub fn orthogonality_defect(&self) -> f64 {
        let m = &self.m;
        let mut worst = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                let dot: f64 = (0..3).map(|k| m[k][i] * m[k][j]).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }
}

/// The rotation taking the north pole `e3` to `x` along the shortest geodesic
/// (axis `e3 × x`).
///
/// At the antipode `x = -e3` the axis is undefined; the rotation by pi about
/// the first coordinate axis is returned.
pub fn rotation_to(x: &PointS2) -> Result<Rotation3> {
    let n2 = x.x * x.x + x.y * x.y + x.z * x.z;
    if (n2.sqrt() - 1.0).abs() > UNIT_TOLERANCE {
        return Err(Error::NotUnit(n2.sqrt()));
    }
    let (a, b, c) = (x.x, x.y, x.z);
    let s2 = a * a + b * b;
    if s2 == 0.0 {
        return Ok(if c > 0.0 {
            Rotation3::IDENTITY
        } else {
            Rotation3 {
                m: [[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -1.0]],
            }
        });
    }
    // R = I + [v]x + [v]x^2 / (1 + c) with v = e3 × x = (-b, a, 0).
    // 1 + c is recovered from s2 when c < 0 to avoid cancellation.
    let one_plus_c = if c >= 0.0 { 1.0 + c } else { s2 / (1.0 - c) };
    let k = 1.0 / one_plus_c;
    Ok(Rotation3 {
        m: [
            [1.0 - a * a * k, -a * b * k, a],
            [-a * b * k, 1.0 - b * b * k, b],
            [-a, -b, 1.0 - s2 * k],
        ],
    })
}

/// Point at angle `phi` on the great circle orthogonal to `x`.
pub fn orbit_point(x: &PointS2, phi: f64) -> Result<PointS2> {
    let rot = rotation_to(x)?;
    Ok(orbit_point_with(&rot, phi))
}

/// [`orbit_point`] with a precomputed rotation.
pub fn orbit_point_with(rot: &Rotation3, phi: f64) -> PointS2 {
    let (s, c) = phi.sin_cos();
    let [x, y, z] = rot.apply([c, s, 0.0]);
    let n = (x * x + y * y + z * z).sqrt();
    PointS2 {
        x: x / n,
        y: y / n,
        z: z / n,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn line_point_examples() {
        let p = line_point(&LineParams::new(0.0, 0.0).unwrap(), 0.0);
        assert_eq!((p.x, p.y), (0.0, 0.0));
        let p = line_point(&LineParams::new(1.0, 0.0).unwrap(), 0.0);
        assert_eq!((p.x, p.y), (1.0, 0.0));

        let l = LineParams::new(2.0, FRAC_PI_2).unwrap();
        let p = line_point(&l, 3.0);
        assert!(close(p.x, -3.0, 1e-12) && close(p.y, 2.0, 1e-12));
        // post-conditions: on the line, and |s| from the foot
        assert!(close(p.dot(&l.normal()), 2.0, 1e-12));
        let foot = line_point(&l, 0.0);
        assert!(close(p.distance(&foot), 3.0, 1e-12));
    }

    #[test]
    fn line_params_validation() {
        assert!(LineParams::new(-0.1, 0.0).is_err());
        assert!(LineParams::new(f64::NAN, 0.0).is_err());
        let l = LineParams::new(1.0, -FRAC_PI_2).unwrap();
        assert!(close(l.theta(), 3.0 * FRAC_PI_2, 1e-12));
        let l = LineParams::new(1.0, TAU).unwrap();
        assert_eq!(l.theta(), 0.0);
    }

    #[test]
    fn disk_chords() {
        let k = Window::unit_disk();
        for theta in [0.0, 0.7, 2.0, 5.5] {
            let c = chord_interval(&k, &LineParams::new(0.0, theta).unwrap()).unwrap();
            assert!(close(c.lo, -1.0, 1e-12) && close(c.hi, 1.0, 1e-12));
        }
        let c = chord_interval(&k, &LineParams::new(0.6, 0.3).unwrap()).unwrap();
        assert!(close(c.lo, -0.8, 1e-12) && close(c.hi, 0.8, 1e-12));
        assert!(chord_interval(&k, &LineParams::new(1.5, 0.3).unwrap()).is_none());
        // tangency is a null set
        assert!(chord_interval(&k, &LineParams::new(1.0, 0.3).unwrap()).is_none());

        let k2 = Window::disk(Point2::new(0.0, 0.0), 2.0).unwrap();
        assert!(close(
            chord_length(&k2, &LineParams::new(0.0, 1.0).unwrap()),
            4.0,
            1e-12
        ));
        assert_eq!(chord_length(&k, &LineParams::new(1.5, 0.0).unwrap()), 0.0);
    }

    #[test]
    fn rect_chords() {
        let k = Window::unit_square();
        let l = LineParams::new(0.5, 0.0).unwrap();
        assert!(close(chord_length(&k, &l), 1.0, 1e-12));
        let c = chord_interval(&k, &l).unwrap();
        assert!(close(c.lo, 0.0, 1e-12) && close(c.hi, 1.0, 1e-12));
        // diagonal line x + y = 1 through (1,0) and (0,1)
        let l = LineParams::new(0.5f64.sqrt(), PI / 4.0).unwrap();
        assert!(close(chord_length(&k, &l), 2f64.sqrt(), 1e-12));
        // misses
        assert_eq!(chord_length(&k, &LineParams::new(2.0, 0.3).unwrap()), 0.0);
        // horizontal line y = 0.25 (theta = pi/2)
        let l = LineParams::new(0.25, FRAC_PI_2).unwrap();
        assert!(close(chord_length(&k, &l), 1.0, 1e-12));
    }

    #[test]
    fn support_radius_examples() {
        assert_eq!(support_radius(&Window::unit_disk()), 1.0);
        let r = Window::disk(Point2::new(0.0, 0.0), 2.5).unwrap();
        assert_eq!(support_radius(&r), 2.5);
        assert!(close(
            support_radius(&Window::unit_square()),
            2f64.sqrt(),
            1e-15
        ));
        let d = Window::disk(Point2::new(3.0, 0.0), 1.0).unwrap();
        assert_eq!(support_radius(&d), 4.0);
    }

    #[test]
    fn window_parsing() {
        let w: Window = "disk:0,0,1".parse().unwrap();
        assert_eq!(w, Window::unit_disk());
        let w: Window = "rect:0,0,1,1".parse().unwrap();
        assert_eq!(w, Window::unit_square());
        assert!("rect:1,0,0,1".parse::<Window>().is_err());
        assert!("disk:0,0,-1".parse::<Window>().is_err());
        assert!("hex:0,0".parse::<Window>().is_err());
        let w = Window::rect(-1.0, 0.5, 2.0, 3.0).unwrap();
        assert_eq!(w.to_string().parse::<Window>().unwrap(), w);
    }

    #[test]
    fn rotation_examples() {
        let r = rotation_to(&PointS2::NORTH).unwrap();
        assert_eq!(r, Rotation3::IDENTITY);

        let south = PointS2::new(0.0, 0.0, -1.0).unwrap();
        let r = rotation_to(&south).unwrap();
        assert_eq!(
            r.matrix(),
            &[[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -1.0]]
        );
        assert!(close(r.determinant(), 1.0, 1e-15));

        let e1 = PointS2::new(1.0, 0.0, 0.0).unwrap();
        let r = rotation_to(&e1).unwrap();
        let img = r.apply([0.0, 0.0, 1.0]);
        assert!(
            close(img[0], 1.0, 1e-12) && close(img[1], 0.0, 1e-12) && close(img[2], 0.0, 1e-12)
        );
        assert!(r.orthogonality_defect() < 1e-12);
        assert!(close(r.determinant(), 1.0, 1e-12));

        assert!(rotation_to(&PointS2 {
            x: 1.0,
            y: 1.0,
            z: 0.0
        })
        .is_err());
    }

    #[test]
    fn orbit_examples() {
        let p = orbit_point(&PointS2::NORTH, 0.0).unwrap();
        assert!(close(p.x, 1.0, 1e-15) && close(p.y, 0.0, 1e-15) && close(p.z, 0.0, 1e-15));

        let e1 = PointS2::new(1.0, 0.0, 0.0).unwrap();
        let p = orbit_point(&e1, FRAC_PI_2).unwrap();
        assert!(close(p.dot(&e1), 0.0, 1e-12));
        assert!(close(p.dot(&p), 1.0, 1e-12));
    }

    #[test]
    fn near_antipode_is_accurate() {
        let x = PointS2::normalize(1e-9, -2e-9, -1.0).unwrap();
        let r = rotation_to(&x).unwrap();
        assert!(r.orthogonality_defect() < 1e-12);
        let img = r.apply([0.0, 0.0, 1.0]);
        assert!(close(img[0], x.x, 1e-15) && close(img[2], x.z, 1e-15));
    }

    fn unit_vec() -> impl Strategy<Value = PointS2> {
        (-1.0f64..1.0, 0.0f64..TAU).prop_map(|(z, phi)| {
            let s = (1.0 - z * z).sqrt();
            PointS2::normalize(s * phi.cos(), s * phi.sin(), z).unwrap()
        })
    }

    proptest! {
        #[test]
        fn line_point_lies_on_line(r in 0.0f64..10.0, theta in 0.0f64..TAU, s in -10.0f64..10.0) {
            let l = LineParams::new(r, theta).unwrap();
            let p = line_point(&l, s);
            prop_assert!((p.dot(&l.normal()) - r).abs() <= 1e-12 * (1.0 + r + s.abs()));
        }

        #[test]
        fn disk_chord_formula(r in 0.0f64..3.0, theta in 0.0f64..TAU, radius in 0.1f64..2.5) {
            let k = Window::disk(Point2::new(0.0, 0.0), radius).unwrap();
            let expected = if r < radius { 2.0 * (radius * radius - r * r).sqrt() } else { 0.0 };
            let got = chord_length(&k, &LineParams::new(r, theta).unwrap());
            prop_assert!((got - expected).abs() < 1e-9);
        }

        #[test]
        fn chord_membership(cx in -2.0f64..2.0, cy in -2.0f64..2.0, w in 0.1f64..2.0, h in 0.1f64..2.0,
                            r in 0.0f64..4.0, theta in 0.0f64..TAU, t in 0.0f64..1.0) {
            let k = Window::rect(cx, cy, cx + w, cy + h).unwrap();
            let l = LineParams::new(r, theta).unwrap();
            if let Some(c) = chord_interval(&k, &l) {
                let p = line_point(&l, c.lo + t * c.len());
                let eps = 1e-9;
                prop_assert!(p.x >= cx - eps && p.x <= cx + w + eps && p.y >= cy - eps && p.y <= cy + h + eps);
                // just outside the chord the point leaves the window
                let out = line_point(&l, c.hi + 1e-6);
                prop_assert!(!k.contains(&out));
                prop_assert!(c.len() <= k.diameter() + 1e-9);
            }
            if r > support_radius(&k) {
                prop_assert!(chord_interval(&k, &l).is_none());
            }
        }

        #[test]
        fn rotation_is_proper(x in unit_vec(), v in prop::array::uniform3(-5.0f64..5.0)) {
            let r = rotation_to(&x).unwrap();
            prop_assert!(r.orthogonality_defect() < 1e-12);
            prop_assert!((r.determinant() - 1.0).abs() < 1e-12);
            let img = r.apply([0.0, 0.0, 1.0]);
            prop_assert!((img[0] - x.x).abs() < 1e-12 && (img[1] - x.y).abs() < 1e-12 && (img[2] - x.z).abs() < 1e-12);
            let rv = r.apply(v);
            let n0 = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            let n1 = (rv[0] * rv[0] + rv[1] * rv[1] + rv[2] * rv[2]).sqrt();
            prop_assert!((n0 - n1).abs() < 1e-12 * (1.0 + n0));
        }

        #[test]
        fn orbit_is_closed_and_orthogonal(x in unit_vec(), phi in -10.0f64..10.0) {
            let p = orbit_point(&x, phi).unwrap();
            let q = orbit_point(&x, phi + TAU).unwrap();
            prop_assert!(p.dot(&x).abs() < 1e-9);
            prop_assert!((p.dot(&p) - 1.0).abs() < 1e-12);
            prop_assert!(p.angle_to(&q) < 1e-9);
        }
    }
}
