//! Finite configurations and the elementary point-process samplers.
//!
//! A [`Configuration`] is a finite multiset of points kept in insertion order.
//! Equality and distances treat it as a multiset; every sampler in this module
//! produces laws that do not depend on the order.

pub mod counts;
pub mod params;
pub mod regions;

use std::cmp::Ordering;
use std::f64::consts::TAU;
use std::fmt::Debug;
use std::io::{BufRead, Write};

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{Point2, PointS2, Window};

pub use counts::sample_poisson;
pub use params::ModelParams;
pub use regions::{
    planar_region_set, spherical_region_set, Labeled, PlanarRegion, Region, SphericalRegion,
};

/// Points of an ambient space that configurations can hold.
pub trait SpacePoint: Copy + Debug + PartialEq + Send + Sync + 'static {
    /// Name of the ambient space, used in error messages and CSV headers.
    const SPACE: &'static str;
    const CSV_HEADER: &'static str;

    /// Intrinsic distance (Euclidean in the plane, angular on the sphere).
    fn distance(&self, other: &Self) -> f64;
    fn coords(&self) -> Vec<f64>;
    fn from_coords(c: &[f64]) -> Result<Self>;

    /// Lexicographic total order on coordinates, for multiset comparisons.
    fn total_cmp(&self, other: &Self) -> Ordering {
        self.coords()
            .iter()
            .zip(other.coords().iter())
            .map(|(a, b)| a.total_cmp(b))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    }
}

impl SpacePoint for Point2 {
    const SPACE: &'static str = "plane";
    const CSV_HEADER: &'static str = "x,y";

    fn distance(&self, other: &Self) -> f64 {
        Point2::distance(self, other)
    }

    fn coords(&self) -> Vec<f64> {
        vec![self.x, self.y]
    }

    fn from_coords(c: &[f64]) -> Result<Self> {
        match c {
            [x, y] if x.is_finite() && y.is_finite() => Ok(Point2::new(*x, *y)),
            _ => Err(Error::param(format!("bad planar point {c:?}"))),
        }
    }

    fn total_cmp(&self, other: &Self) -> Ordering {
        self.x.total_cmp(&other.x).then(self.y.total_cmp(&other.y))
    }
}

impl SpacePoint for PointS2 {
    const SPACE: &'static str = "sphere";
    const CSV_HEADER: &'static str = "x,y,z";

    fn distance(&self, other: &Self) -> f64 {
        self.angle_to(other)
    }

    fn coords(&self) -> Vec<f64> {
        vec![self.x, self.y, self.z]
    }

    fn from_coords(c: &[f64]) -> Result<Self> {
        match c {
            [x, y, z] => PointS2::new(*x, *y, *z),
            _ => Err(Error::param(format!("bad spherical point {c:?}"))),
        }
    }

    fn total_cmp(&self, other: &Self) -> Ordering {
        self.x
            .total_cmp(&other.x)
            .then(self.y.total_cmp(&other.y))
            .then(self.z.total_cmp(&other.z))
    }
}

#[derive(Clone, Debug, Default)]
pub struct Configuration<P> {
    points: Vec<P>,
}

impl<P: SpacePoint> Configuration<P> {
    pub fn new() -> Self {
        Self { points: Vec::new() }
    }

    pub fn from_points(points: Vec<P>) -> Self {
        Self { points }
    }

    pub fn points(&self) -> &[P] {
        &self.points
    }

    pub fn into_points(self) -> Vec<P> {
        self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, P> {
        self.points.iter()
    }

    /// Multiset insertion.
    pub fn add(&self, p: P) -> Self {
        let mut points = self.points.clone();
        points.push(p);
        Self { points }
    }

    pub fn push(&mut self, p: P) {
        self.points.push(p);
    }

    /// Removes one occurrence of `p`; absent points leave the configuration
    /// unchanged.
    pub fn remove(&self, p: &P) -> Self {
        let mut points = self.points.clone();
        if let Some(i) = points.iter().position(|q| q == p) {
            points.remove(i);
        }
        Self { points }
    }

    /// Configuration with the point at `index` removed.
    pub fn without_index(&self, index: usize) -> Self {
        let mut points = Vec::with_capacity(self.points.len().saturating_sub(1));
        points.extend(
            self.points
                .iter()
                .enumerate()
                .filter_map(|(i, p)| (i != index).then_some(*p)),
        );
        Self { points }
    }

    pub fn extend_from(&mut self, other: &Self) {
        self.points.extend_from_slice(&other.points);
    }

    fn sorted(&self) -> Vec<P> {
        let mut v = self.points.clone();
        v.sort_by(|a, b| a.total_cmp(b));
        v
    }

    /// Multiset equality.
    pub fn multiset_eq(&self, other: &Self) -> bool {
        self.len() == other.len() && config_tv_distance(self, other) == 0
    }

    /// Number of points inside `region`.
    pub fn count_in<R: Region<P> + ?Sized>(&self, region: &R) -> usize {
        self.points.iter().filter(|p| region.contains(p)).count()
    }

    pub fn restrict<R: Region<P> + ?Sized>(&self, region: &R) -> Self {
        Self {
            points: self
                .points
                .iter()
                .copied()
                .filter(|p| region.contains(p))
                .collect(),
        }
    }

    /// CSV with a header line and one point per row at 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{}", P::CSV_HEADER)?;
        for p in &self.points {
            let row = p
                .coords()
                .iter()
                .map(|v| format!("{v:.16e}"))
                .collect::<Vec<_>>()
                .join(",");
            writeln!(out, "{row}")?;
        }
        Ok(())
    }
}

impl<P: SpacePoint> PartialEq for Configuration<P> {
    fn eq(&self, other: &Self) -> bool {
        self.multiset_eq(other)
    }
}

impl<P: SpacePoint> FromIterator<P> for Configuration<P> {
    fn from_iter<I: IntoIterator<Item = P>>(iter: I) -> Self {
        Self {
            points: iter.into_iter().collect(),
        }
    }
}

impl<'a, P> IntoIterator for &'a Configuration<P> {
    type Item = &'a P;
    type IntoIter = std::slice::Iter<'a, P>;

    fn into_iter(self) -> Self::IntoIter {
        self.points.iter()
    }
}

/// `|a ⊖ b| + |b ⊖ a|` with multiset differences.
pub fn config_tv_distance<P: SpacePoint>(a: &Configuration<P>, b: &Configuration<P>) -> usize {
    let (a, b) = (a.sorted(), b.sorted());
    let (mut i, mut j, mut unmatched) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].total_cmp(&b[j]) {
            Ordering::Less => {
                unmatched += 1;
                i += 1;
            }
            Ordering::Greater => {
                unmatched += 1;
                j += 1;
            }
            Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    unmatched + (a.len() - i) + (b.len() - j)
}

/// Multiset union.
pub fn superpose<P: SpacePoint>(a: &Configuration<P>, b: &Configuration<P>) -> Configuration<P> {
    let mut points = Vec::with_capacity(a.len() + b.len());
    points.extend_from_slice(&a.points);
    points.extend_from_slice(&b.points);
    Configuration { points }
}

/// Independent `p`-thinning.
pub fn thin<P: SpacePoint, R: Rng + ?Sized>(
    cfg: &Configuration<P>,
    p: f64,
    rng: &mut R,
) -> Configuration<P> {
    debug_assert!((0.0..=1.0).contains(&p));
    if p >= 1.0 {
        return cfg.clone();
    }
    cfg.points
        .iter()
        .copied()
        .filter(|_| rng.random::<f64>() < p)
        .collect()
}

/// Uniform point in the window; inverse transform, no rejection.
pub fn sample_uniform_window<R: Rng + ?Sized>(window: &Window, rng: &mut R) -> Point2 {
    match *window {
        Window::Disk { center, radius } => {
            let rho = radius * rng.random::<f64>().sqrt();
            let (s, c) = (TAU * rng.random::<f64>()).sin_cos();
            Point2::new(center.x + rho * c, center.y + rho * s)
        }
        Window::Rect { x0, y0, x1, y1 } => Point2::new(
            x0 + (x1 - x0) * rng.random::<f64>(),
            y0 + (y1 - y0) * rng.random::<f64>(),
        ),
    }
}

/// Homogeneous Poisson process of intensity `lambda` on `window`.
pub fn sample_ppp_window<R: Rng + ?Sized>(
    window: &Window,
    lambda: f64,
    rng: &mut R,
) -> Configuration<Point2> {
    let n = sample_poisson(rng, lambda * window.area());
    (0..n).map(|_| sample_uniform_window(window, rng)).collect()
}

/// One-dimensional Poisson process of intensity `mu` on `[lo, hi]`.
pub fn sample_ppp_interval<R: Rng + ?Sized>(lo: f64, hi: f64, mu: f64, rng: &mut R) -> Vec<f64> {
    let len = hi - lo;
    if !(len > 0.0) || !(mu > 0.0) {
        return Vec::new();
    }
    let n = sample_poisson(rng, mu * len);
    (0..n).map(|_| lo + len * rng.random::<f64>()).collect()
}

/// Uniform point on the unit sphere (Archimedes: uniform height, uniform
/// azimuth).
pub fn sample_uniform_sphere<R: Rng + ?Sized>(rng: &mut R) -> PointS2 {
    let z = 2.0 * rng.random::<f64>() - 1.0;
    let (s, c) = (TAU * rng.random::<f64>()).sin_cos();
    let rho = (1.0 - z * z).max(0.0).sqrt();
    PointS2::normalize(rho * c, rho * s, z).unwrap_or(PointS2::NORTH)
}

/// Homogeneous Poisson process with total mass `mass` on the sphere.
pub fn sample_ppp_sphere<R: Rng + ?Sized>(mass: f64, rng: &mut R) -> Configuration<PointS2> {
    let n = sample_poisson(rng, mass);
    (0..n).map(|_| sample_uniform_sphere(rng)).collect()
}

/// Binomial process: exactly `n` i.i.d. draws from `sampler`.
pub fn sample_bpp<P, R, F>(n: usize, mut sampler: F, rng: &mut R) -> Configuration<P>
where
    P: SpacePoint,
    R: Rng + ?Sized,
    F: FnMut(&mut R) -> P,
{
    (0..n).map(|_| sampler(rng)).collect()
}

/// Configuration whose ambient space is only known at run time (e.g. read
/// from CSV).
#[derive(Clone, Debug, PartialEq)]
pub enum AnyConfiguration {
    Planar(Configuration<Point2>),
    Spherical(Configuration<PointS2>),
}

impl AnyConfiguration {
    pub fn space(&self) -> &'static str {
        match self {
            AnyConfiguration::Planar(_) => Point2::SPACE,
            AnyConfiguration::Spherical(_) => PointS2::SPACE,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            AnyConfiguration::Planar(c) => c.len(),
            AnyConfiguration::Spherical(c) => c.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn superpose(&self, other: &Self) -> Result<Self> {
        match (self, other) {
            (AnyConfiguration::Planar(a), AnyConfiguration::Planar(b)) => {
                Ok(AnyConfiguration::Planar(superpose(a, b)))
            }
            (AnyConfiguration::Spherical(a), AnyConfiguration::Spherical(b)) => {
                Ok(AnyConfiguration::Spherical(superpose(a, b)))
            }
            _ => Err(Error::SpaceMismatch {
                left: self.space(),
                right: other.space(),
            }),
        }
    }

    pub fn tv_distance(&self, other: &Self) -> Result<usize> {
        match (self, other) {
            (AnyConfiguration::Planar(a), AnyConfiguration::Planar(b)) => {
                Ok(config_tv_distance(a, b))
            }
            (AnyConfiguration::Spherical(a), AnyConfiguration::Spherical(b)) => {
                Ok(config_tv_distance(a, b))
            }
            _ => Err(Error::SpaceMismatch {
                left: self.space(),
                right: other.space(),
            }),
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        match self {
            AnyConfiguration::Planar(c) => c.write_csv(out),
            AnyConfiguration::Spherical(c) => c.write_csv(out),
        }
    }

    /// Reads the CSV produced by [`Configuration::write_csv`]; the header
    /// decides the space.
    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines().enumerate();
        let header = match lines.next() {
            Some((_, line)) => line?,
            None => {
                return Err(Error::Csv {
                    line: 1,
                    message: "missing header".into(),
                })
            }
        };
        let header = header.trim();
        let rows = lines.filter_map(|(i, l)| match l {
            Ok(l) if l.trim().is_empty() => None,
            Ok(l) => Some(Ok((i + 1, l))),
            Err(e) => Some(Err(Error::Io(e))),
        });
        match header {
            h if h == Point2::CSV_HEADER => Ok(AnyConfiguration::Planar(parse_rows(rows)?)),
            h if h == PointS2::CSV_HEADER => Ok(AnyConfiguration::Spherical(parse_rows(rows)?)),
            other => Err(Error::Csv {
                line: 1,
                message: format!("unknown header {other:?}"),
            }),
        }
    }
}

fn parse_rows<P: SpacePoint>(
    rows: impl Iterator<Item = Result<(usize, String)>>,
) -> Result<Configuration<P>> {
    let mut points = Vec::new();
    for row in rows {
        let (line, text) = row?;
        let coords = text
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Csv {
                line,
                message: e.to_string(),
            })?;
        points.push(P::from_coords(&coords).map_err(|e| Error::Csv {
            line,
            message: e.to_string(),
        })?);
    }
    Ok(Configuration::from_points(points))
}

/// Area measure helper used when a region count is compared with a Poisson
/// law: expected count of a homogeneous process of `intensity`.
pub fn expected_count<P, R: Region<P> + ?Sized>(region: &R, intensity: f64) -> f64 {
    intensity * region.measure()
}
