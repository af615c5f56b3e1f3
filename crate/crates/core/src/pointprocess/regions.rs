//! Test regions for counting points, and the preset region families used by
//! the diagnostics.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::geometry::{Point2, PointS2, Window};

/// A closed region with a known reference measure (Lebesgue area in the plane,
/// normalized surface measure on the sphere).
pub trait Region<P> {
    fn contains(&self, p: &P) -> bool;
    fn measure(&self) -> f64;
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum PlanarRegion {
    Window(Window),
    Annulus {
        center: Point2,
        inner: f64,
        outer: f64,
    },
}

impl Region<Point2> for PlanarRegion {
    fn contains(&self, p: &Point2) -> bool {
        match self {
            PlanarRegion::Window(w) => w.contains(p),
            PlanarRegion::Annulus {
                center,
                inner,
                outer,
            } => {
                let d = p.distance(center);
                d >= *inner && d <= *outer
            }
        }
    }

    fn measure(&self) -> f64 {
        match self {
            PlanarRegion::Window(w) => w.area(),
            PlanarRegion::Annulus { inner, outer, .. } => PI * (outer * outer - inner * inner),
        }
    }
}

impl Region<Point2> for Window {
    fn contains(&self, p: &Point2) -> bool {
        Window::contains(self, p)
    }

    fn measure(&self) -> f64 {
        self.area()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum SphericalRegion {
    Sphere,
    /// Points with `<axis, p> >= min_dot`.
    Cap {
        axis: PointS2,
        min_dot: f64,
    },
    /// Points with `z_lo <= z <= z_hi`.
    Band {
        z_lo: f64,
        z_hi: f64,
    },
}

impl SphericalRegion {
    /// Cap of angular radius `angle` around `axis`.
    pub fn cap(axis: PointS2, angle: f64) -> Self {
        SphericalRegion::Cap {
            axis,
            min_dot: angle.cos(),
        }
    }
}

impl Region<PointS2> for SphericalRegion {
    fn contains(&self, p: &PointS2) -> bool {
        match self {
            SphericalRegion::Sphere => true,
            SphericalRegion::Cap { axis, min_dot } => p.dot(axis) >= *min_dot,
            SphericalRegion::Band { z_lo, z_hi } => p.z >= *z_lo && p.z <= *z_hi,
        }
    }

    fn measure(&self) -> f64 {
        match self {
            SphericalRegion::Sphere => 1.0,
            SphericalRegion::Cap { min_dot, .. } => 0.5 * (1.0 - min_dot.clamp(-1.0, 1.0)),
            SphericalRegion::Band { z_lo, z_hi } => {
                0.5 * (z_hi.clamp(-1.0, 1.0) - z_lo.clamp(-1.0, 1.0)).max(0.0)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Labeled<R> {
    pub name: String,
    pub region: R,
}

impl<R> Labeled<R> {
    pub fn new(name: impl Into<String>, region: R) -> Self {
        Self {
            name: name.into(),
            region,
        }
    }
}

/// 4x4 grid over the square inscribed in `window`, plus three concentric
/// annuli of equal radial width around the window center.
pub fn planar_region_set(window: &Window) -> Vec<Labeled<PlanarRegion>> {
    let [x0, y0, x1, y1] = window.inscribed_square();
    let (dx, dy) = ((x1 - x0) / 4.0, (y1 - y0) / 4.0);
    let mut out = Vec::with_capacity(19);
    for j in 0..4 {
        for i in 0..4 {
            let cell = Window::Rect {
                x0: x0 + i as f64 * dx,
                y0: y0 + j as f64 * dy,
                x1: x0 + (i + 1) as f64 * dx,
                y1: y0 + (j + 1) as f64 * dy,
            };
            out.push(Labeled::new(
                format!("cell_{i}_{j}"),
                PlanarRegion::Window(cell),
            ));
        }
    }
    let center = window.center();
    let rho = window.inner_radius();
    for k in 0..3 {
        out.push(Labeled::new(
            format!("annulus_{k}"),
            PlanarRegion::Annulus {
                center,
                inner: rho * k as f64 / 3.0,
                outer: rho * (k + 1) as f64 / 3.0,
            },
        ));
    }
    out
}

/// Six equal-area latitude bands plus four caps of angular radius pi/6 around
/// the vertices of a regular tetrahedron.
pub fn spherical_region_set() -> Vec<Labeled<SphericalRegion>> {
    let mut out = Vec::with_capacity(10);
    for k in 0..6 {
        let z_lo = -1.0 + k as f64 / 3.0;
        let z_hi = -1.0 + (k + 1) as f64 / 3.0;
        out.push(Labeled::new(
            format!("band_{k}"),
            SphericalRegion::Band { z_lo, z_hi },
        ));
    }
    let s = 1.0 / 3f64.sqrt();
    let axes = [(s, s, s), (s, -s, -s), (-s, s, -s), (-s, -s, s)];
    for (k, (x, y, z)) in axes.into_iter().enumerate() {
        let axis = PointS2::normalize(x, y, z).expect("nonzero axis");
        out.push(Labeled::new(
            format!("cap_{k}"),
            SphericalRegion::cap(axis, PI / 6.0),
        ));
    }
    out
}
