//! The two Cox constructions: points on a Poisson line process clipped to a
//! window, and satellites on uniformly placed great-circle orbits.
//!
//! Besides the direct samplers this module provides exact couplings of each
//! model with a matched Poisson process. Both processes are built from the
//! same randomness so that they coincide except on a rare event `B`, whose
//! probability is computed in closed form (satellites) or by quadrature
//! (lines). Sampling the pair conditionally on `B` turns the mean gap
//! `E F(Y) - E F(N)` into `P(B) * E[F(Y) - F(N) | B]`, which can be estimated
//! with relative rather than absolute Monte Carlo error.

use std::f64::consts::TAU;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    chord_interval, line_point, orbit_point, support_radius, Chord, LineParams, Point2, PointS2,
    Window,
};
use crate::pointprocess::counts::{
    poisson_tail_two, sample_binomial, sample_binomial_nonzero, sample_poisson,
    sample_poisson_at_least_two, sample_poisson_nonzero,
};
use crate::pointprocess::{
    sample_ppp_interval, sample_uniform_sphere, sample_uniform_window, Configuration, ModelParams,
};
use crate::rng::{replicates, RngStream};
use crate::steinbound::{chord_functional_integral, QuadratureSpec};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledLine {
    pub line: LineParams,
    pub chord: Chord,
}

#[derive(Clone, Debug)]
pub struct CoxLineSample {
    /// Lines that meet the window, with their chords.
    pub lines: Vec<SampledLine>,
    /// Total number of lines drawn on `[0, r_max]`, including those that miss.
    pub line_count: usize,
    pub points: Configuration<Point2>,
    /// Index into `lines` of each point's carrier.
    pub parents: Vec<usize>,
    pub params: ModelParams,
    pub window: Window,
}

#[derive(Clone, Debug)]
pub struct SatelliteSample {
    pub orbits: Vec<PointS2>,
    pub points: Configuration<PointS2>,
    /// Index into `orbits` of each satellite's orbit.
    pub parents: Vec<usize>,
    pub params: ModelParams,
}

fn line_params(params: &ModelParams) -> Result<(f64, f64)> {
    match *params {
        ModelParams::CoxLine { lambda, .. } => Ok((lambda, params.mu())),
        _ => Err(Error::param("expected cox-line parameters")),
    }
}

fn satellite_params(params: &ModelParams) -> Result<(u64, f64)> {
    match *params {
        ModelParams::Satellites { n, .. } => Ok((n, params.mu())),
        _ => Err(Error::param("expected satellite parameters")),
    }
}

/// Uniform line on `[0, r_max] x [0, 2pi)`.
fn uniform_line<R: Rng + ?Sized>(r_max: f64, rng: &mut R) -> LineParams {
    LineParams::new(r_max * rng.random::<f64>(), TAU * rng.random::<f64>()).expect("r >= 0")
}

fn uniform_on_chord<R: Rng + ?Sized>(line: &LineParams, chord: &Chord, rng: &mut R) -> Point2 {
    line_point(line, chord.lo + chord.len() * rng.random::<f64>())
}

/// Points on a Poisson line process of intensity `lambda` per unit `r`,
/// each line carrying a 1-D Poisson process of intensity `mu = c / lambda` on
/// its chord.
pub fn sample_cox_line<R: Rng + ?Sized>(
    params: &ModelParams,
    window: &Window,
    rng: &mut R,
) -> Result<CoxLineSample> {
    sample_cox_line_truncated(params, window, support_radius(window), rng)
}

/// As [`sample_cox_line`] with lines drawn on `[0, r_max]`; any
/// `r_max >= support_radius(window)` gives the same law on the window.
pub fn sample_cox_line_truncated<R: Rng + ?Sized>(
    params: &ModelParams,
    window: &Window,
    r_max: f64,
    rng: &mut R,
) -> Result<CoxLineSample> {
    let (lambda, mu) = line_params(params)?;
    let m = sample_poisson(rng, lambda * r_max) as usize;
    let mut lines = Vec::new();
    let mut points = Configuration::new();
    let mut parents = Vec::new();
    for _ in 0..m {
        let line = uniform_line(r_max, rng);
        let Some(chord) = chord_interval(window, &line) else {
            continue;
        };
        let idx = lines.len();
        lines.push(SampledLine { line, chord });
        for s in sample_ppp_interval(chord.lo, chord.hi, mu, rng) {
            points.push(line_point(&line, s));
            parents.push(idx);
        }
    }
    Ok(CoxLineSample {
        lines,
        line_count: m,
        points,
        parents,
        params: *params,
        window: *window,
    })
}

/// `n` uniform orbits, each carrying Poisson(`c / n`) satellites at uniform
/// angles.
pub fn sample_satellites<R: Rng + ?Sized>(
    params: &ModelParams,
    rng: &mut R,
) -> Result<SatelliteSample> {
    let (n, mu) = satellite_params(params)?;
    let mut orbits = Vec::with_capacity(n as usize);
    let mut points = Configuration::new();
    let mut parents = Vec::new();
    for i in 0..n as usize {
        let x = sample_uniform_sphere(rng);
        orbits.push(x);
        for _ in 0..sample_poisson(rng, mu) {
            points.push(orbit_point(&x, TAU * rng.random::<f64>())?);
            parents.push(i);
        }
    }
    Ok(SatelliteSample {
        orbits,
        points,
        parents,
        params: *params,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntensityEstimator {
    /// Observed point counts.
    Counts,
    /// Conditional mean given the lines or orbits (`sum mu L` / `n mu`):
    /// same expectation, smaller variance.
    Conditional,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntensityEstimate {
    /// Mean count per unit area (plane) or per unit normalized surface
    /// measure (sphere).
    pub value: f64,
    pub stderr: f64,
    pub reps: u32,
    pub estimator: IntensityEstimator,
}

fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (m, 0.0);
    }
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}

/// Monte Carlo estimate of the mean intensity of a model on the window (the
/// window is ignored for satellites).
pub fn effective_intensity(
    params: &ModelParams,
    window: &Window,
    reps: u32,
    estimator: IntensityEstimator,
    stream: RngStream,
) -> Result<IntensityEstimate> {
    if reps < 2 {
        return Err(Error::param(
            "effective_intensity needs at least 2 replicates",
        ));
    }
    let per_rep: Vec<Result<f64>> = match params {
        ModelParams::CoxLine { .. } => {
            let area = window.area();
            let mu = params.mu();
            replicates(stream, reps, |_, rng| {
                let s = sample_cox_line(params, window, rng)?;
                Ok(match estimator {
                    IntensityEstimator::Counts => s.points.len() as f64 / area,
                    IntensityEstimator::Conditional => {
                        s.lines.iter().map(|l| mu * l.chord.len()).sum::<f64>() / area
                    }
                })
            })
        }
        ModelParams::Satellites { n, .. } => {
            let (n, mu) = (*n, params.mu());
            replicates(stream, reps, |_, rng| match estimator {
                IntensityEstimator::Counts => {
                    Ok(sample_satellites(params, rng)?.points.len() as f64)
                }
                // every orbit contributes mu whatever its position
                IntensityEstimator::Conditional => Ok(n as f64 * mu),
            })
        }
    };
    let xs = per_rep.into_iter().collect::<Result<Vec<f64>>>()?;
    let (value, stderr) = mean_and_stderr(&xs);
    Ok(IntensityEstimate {
        value,
        stderr,
        reps,
        estimator,
    })
}

/// Intensity of the Poisson process the model is compared with.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum TargetIntensity {
    /// `c`, as stated for the limit.
    C,
    /// `c / 2`, the mean intensity the line construction actually produces.
    HalfC,
    /// Calibrated by [`effective_intensity`].
    #[default]
    Auto,
}

impl std::str::FromStr for TargetIntensity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "c" => Ok(TargetIntensity::C),
            "half-c" => Ok(TargetIntensity::HalfC),
            "auto" => Ok(TargetIntensity::Auto),
            other => Err(Error::param(format!(
                "unknown target intensity {other:?} (c | half-c | auto)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub mode: TargetIntensity,
    /// The intensity actually used.
    pub tau: f64,
    pub nominal_c: f64,
    pub estimate: Option<IntensityEstimate>,
}

/// Resolves the target intensity. `Auto` uses the conditional estimator;
/// estimates within `1e-12` relative of `c` are snapped to `c` (the
/// satellite estimator is exact up to rounding).
pub fn calibrate_target(
    params: &ModelParams,
    window: &Window,
    mode: TargetIntensity,
    reps: u32,
    stream: RngStream,
) -> Result<Calibration> {
    let c = params.c();
    let (tau, estimate) = match mode {
        TargetIntensity::C => (c, None),
        TargetIntensity::HalfC => (0.5 * c, None),
        TargetIntensity::Auto => {
            let e = effective_intensity(
                params,
                window,
                reps,
                IntensityEstimator::Conditional,
                stream,
            )?;
            let tau = if (e.value - c).abs() <= 1e-12 * c {
                c
            } else {
                e.value
            };
            (tau, Some(e))
        }
    };
    Ok(Calibration {
        mode,
        tau,
        nominal_c: c,
        estimate,
    })
}

/// A model coupled with a Poisson process of intensity `tau`.
pub trait Coupling: Sync {
    type Point: crate::pointprocess::SpacePoint;

    /// `P(Y != N)`.
    fn prob_differ(&self) -> f64;

    /// One draw of `(Y, N)` from the coupling.
    fn sample_pair(
        &self,
        rng: &mut dyn rand::RngCore,
    ) -> (Configuration<Self::Point>, Configuration<Self::Point>);

    /// One draw of `(Y, N)` conditioned on `Y != N`.
    fn sample_differing(
        &self,
        rng: &mut dyn rand::RngCore,
    ) -> (Configuration<Self::Point>, Configuration<Self::Point>);
}

/// Satellites coupled with `PPP(tau nu)`.
///
/// Orbits with one satellite hand that point to the Poisson process (a single
/// satellite on a uniform orbit is uniform on the sphere); orbits with two or
/// more are replaced by as many fresh uniform points. That gives `PPP(c nu)`;
/// `tau < c` thins it and `tau > c` adds an independent `PPP((tau - c) nu)`.
#[derive(Clone, Debug)]
pub struct SatelliteCoupling {
    n: u64,
    mu: f64,
    /// Retention probability of the Poisson side.
    keep: f64,
    extra_mass: f64,
    /// `P(U >= 2)` per orbit.
    p_multi: f64,
    /// `P(U = 1)` per orbit.
    p_single: f64,
    /// Probability that an orbit makes the two sides differ.
    q: f64,
    prob_differ: f64,
    /// `P(some orbit differs)`.
    prob_orbit_event: f64,
}

impl SatelliteCoupling {
    pub fn new(params: &ModelParams, tau: f64) -> Result<Self> {
        let (n, mu) = satellite_params(params)?;
        let c = params.c();
        if !(tau >= 0.0 && tau.is_finite()) {
            return Err(Error::param(format!(
                "target intensity must be nonnegative, got {tau}"
            )));
        }
        let keep = if c > 0.0 { (tau / c).min(1.0) } else { 1.0 };
        let extra_mass = (tau - c).max(0.0);
        let p_multi = poisson_tail_two(mu);
        let p_single = mu * (-mu).exp();
        let q = p_multi + p_single * (1.0 - keep);
        // 1 - (1 - q)^n without cancellation
        let prob_orbit_event = -(n as f64 * (-q).ln_1p()).exp_m1();
        let prob_differ = -(n as f64 * (-q).ln_1p() - extra_mass).exp_m1();
        Ok(Self {
            n,
            mu,
            keep,
            extra_mass,
            p_multi,
            p_single,
            q,
            prob_differ,
            prob_orbit_event,
        })
    }

    fn orbit_with<R: Rng + ?Sized>(&self, u: u64, rng: &mut R, y: &mut Vec<PointS2>) {
        let x = sample_uniform_sphere(rng);
        for _ in 0..u {
            y.push(orbit_point(&x, TAU * rng.random::<f64>()).expect("unit base point"));
        }
    }

    /// Differing orbit: multi-satellite, or a single satellite that the
    /// Poisson side drops.
    fn special_orbit<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        y: &mut Vec<PointS2>,
        n: &mut Vec<PointS2>,
    ) {
        if rng.random::<f64>() * self.q < self.p_multi {
            let u = sample_poisson_at_least_two(rng, self.mu);
            self.orbit_with(u, rng, y);
            for _ in 0..u {
                let p = sample_uniform_sphere(rng);
                if rng.random::<f64>() < self.keep {
                    n.push(p);
                }
            }
        } else {
            y.push(sample_uniform_sphere(rng));
        }
    }

    fn shared_singles<R: Rng + ?Sized>(
        &self,
        orbits: u64,
        rng: &mut R,
        y: &mut Vec<PointS2>,
        n: &mut Vec<PointS2>,
    ) {
        if orbits == 0 {
            return;
        }
        let p = (self.p_single * self.keep / (1.0 - self.q)).min(1.0);
        for _ in 0..sample_binomial(rng, orbits, p) {
            let s = sample_uniform_sphere(rng);
            y.push(s);
            n.push(s);
        }
    }

    fn extras<R: Rng + ?Sized>(&self, count: u64, rng: &mut R, n: &mut Vec<PointS2>) {
        for _ in 0..count {
            n.push(sample_uniform_sphere(rng));
        }
    }
}

impl Coupling for SatelliteCoupling {
    type Point = PointS2;

    fn prob_differ(&self) -> f64 {
        self.prob_differ
    }

    fn sample_pair(
        &self,
        rng: &mut dyn rand::RngCore,
    ) -> (Configuration<PointS2>, Configuration<PointS2>) {
        let (mut y, mut n) = (Vec::new(), Vec::new());
        for _ in 0..self.n {
            let u = sample_poisson(rng, self.mu);
            match u {
                0 => {}
                1 => {
                    let s = sample_uniform_sphere(rng);
                    y.push(s);
                    if rng.random::<f64>() < self.keep {
                        n.push(s);
                    }
                }
                _ => {
                    self.orbit_with(u, rng, &mut y);
                    for _ in 0..u {
                        let p = sample_uniform_sphere(rng);
                        if rng.random::<f64>() < self.keep {
                            n.push(p);
                        }
                    }
                }
            }
        }
        let e = sample_poisson(rng, self.extra_mass);
        self.extras(e, rng, &mut n);
        (Configuration::from_points(y), Configuration::from_points(n))
    }

    fn sample_differing(
        &self,
        rng: &mut dyn rand::RngCore,
    ) -> (Configuration<PointS2>, Configuration<PointS2>) {
        assert!(self.prob_differ > 0.0, "the coupled processes never differ");
        let (mut y, mut n) = (Vec::new(), Vec::new());
        // B = {K >= 1} ∪ {E >= 1} with K ~ Bin(n, q), E ~ Poisson(extra) independent
        let (k, e) = if rng.random::<f64>() * self.prob_differ < self.prob_orbit_event {
            (
                sample_binomial_nonzero(rng, self.n, self.q),
                sample_poisson(rng, self.extra_mass),
            )
        } else {
            (0, sample_poisson_nonzero(rng, self.extra_mass))
        };
        for _ in 0..k {
            self.special_orbit(rng, &mut y, &mut n);
        }
        self.shared_singles(self.n - k, rng, &mut y, &mut n);
        self.extras(e, rng, &mut n);
        (Configuration::from_points(y), Configuration::from_points(n))
    }
}

/// Line-carried points coupled with `PPP(tau)` on the window.
///
/// Lines are split by their number of points `U`: singleton lines give a
/// Poisson process `S`, lines with `U >= 2` give `M`. The Poisson side is
/// `p∘S ⊕ Z`, where `Z` is an independent Poisson process whose intensity
/// makes up for the thinning and for `M`'s mean measure. Lines of
/// `Z` are drawn from the same line process weighted by `mu L (1 - e^{-mu L})`
/// and carry one uniform chord point each. The two sides differ exactly when
/// one of `M`, the removed part of `S`, or `Z` is nonempty.
#[derive(Clone, Debug)]
pub struct CoxLineCoupling {
    window: Window,
    lambda: f64,
    mu: f64,
    r_max: f64,
    l_max: f64,
    /// Retention probability of singleton points.
    keep: f64,
    /// Expected numbers of multi lines, removed singleton lines, `Z` lines and
    /// uniform `Z` points.
    masses: [f64; 4],
    h_max: [f64; 3],
    prob_differ: f64,
    /// Absolute quadrature error on the total mass.
    pub mass_error: f64,
}

impl CoxLineCoupling {
    pub fn new(
        params: &ModelParams,
        window: &Window,
        tau: f64,
        spec: &QuadratureSpec,
    ) -> Result<Self> {
        let (lambda, mu) = line_params(params)?;
        if !(tau >= 0.0 && tau.is_finite()) {
            return Err(Error::param(format!(
                "target intensity must be nonnegative, got {tau}"
            )));
        }
        let half_c = 0.5 * params.c();
        let keep = if half_c > 0.0 {
            (tau / half_c).min(1.0)
        } else {
            1.0
        };
        let l_max = window.diameter();
        let scale = lambda / TAU;
        let mut masses = [0.0; 4];
        let mut mass_error = 0.0;
        for (j, m) in masses.iter_mut().take(3).enumerate() {
            let e = chord_functional_integral(window, |l| line_weight(j, mu, keep, l), spec)?;
            *m = scale * e.value;
            mass_error += scale * e.error;
        }
        masses[3] = (tau - half_c).max(0.0) * window.area();
        let h_max = [
            line_weight(0, mu, keep, l_max),
            if mu * l_max >= 1.0 {
                line_weight(1, mu, keep, 1.0 / mu)
            } else {
                line_weight(1, mu, keep, l_max)
            },
            line_weight(2, mu, keep, l_max),
        ];
        let total: f64 = masses.iter().sum();
        Ok(Self {
            window: *window,
            lambda,
            mu,
            r_max: support_radius(window),
            l_max,
            keep,
            masses,
            h_max,
            prob_differ: -(-total).exp_m1(),
            mass_error,
        })
    }

    pub fn masses(&self) -> [f64; 4] {
        self.masses
    }

    /// Line drawn with density proportional to `line_weight(kind, ·)`.
    fn weighted_line<R: Rng + ?Sized>(&self, kind: usize, rng: &mut R) -> (LineParams, Chord) {
        let h_max = self.h_max[kind] * (1.0 + 1e-12);
        loop {
            let line = uniform_line(self.r_max, rng);
            let Some(chord) = chord_interval(&self.window, &line) else {
                continue;
            };
            let l = chord.len().min(self.l_max);
            if rng.random::<f64>() * h_max < line_weight(kind, self.mu, self.keep, l) {
                return (line, chord);
            }
        }
    }

    fn component<R: Rng + ?Sized>(
        &self,
        kind: usize,
        rng: &mut R,
        y: &mut Vec<Point2>,
        n: &mut Vec<Point2>,
    ) {
        if kind == 3 {
            n.push(sample_uniform_window(&self.window, rng));
            return;
        }
        let (line, chord) = self.weighted_line(kind, rng);
        match kind {
            0 => {
                let u = sample_poisson_at_least_two(rng, self.mu * chord.len());
                for _ in 0..u {
                    y.push(uniform_on_chord(&line, &chord, rng));
                }
            }
            1 => y.push(uniform_on_chord(&line, &chord, rng)),
            _ => n.push(uniform_on_chord(&line, &chord, rng)),
        }
    }

    fn components<R: Rng + ?Sized>(
        &self,
        total: u64,
        rng: &mut R,
        y: &mut Vec<Point2>,
        n: &mut Vec<Point2>,
    ) {
        let sum: f64 = self.masses.iter().sum();
        for _ in 0..total {
            let mut u = rng.random::<f64>() * sum;
            let mut kind = 3;
            for (j, m) in self.masses.iter().enumerate() {
                if u < *m {
                    kind = j;
                    break;
                }
                u -= m;
            }
            self.component(kind, rng, y, n);
        }
    }

    /// Kept singleton lines: a thinning of the full line process, hence
    /// independent of the differing components.
    fn shared_singles<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        y: &mut Vec<Point2>,
        n: &mut Vec<Point2>,
    ) {
        let m = sample_poisson(rng, self.lambda * self.r_max);
        for _ in 0..m {
            let line = uniform_line(self.r_max, rng);
            let Some(chord) = chord_interval(&self.window, &line) else {
                continue;
            };
            let mean = self.mu * chord.len();
            // P(U = 1 and kept)
            if rng.random::<f64>() < mean * (-mean).exp() * self.keep {
                let p = uniform_on_chord(&line, &chord, rng);
                y.push(p);
                n.push(p);
            }
        }
    }
}

/// Line weights `h(L)` of the differing components: multi lines, removed
/// singleton lines, `Z` lines.
fn line_weight(kind: usize, mu: f64, keep: f64, l: f64) -> f64 {
    let m = mu * l;
    match kind {
        0 => poisson_tail_two(m),
        1 => (1.0 - keep) * m * (-m).exp(),
        _ => keep * m * -(-m).exp_m1(),
    }
}

impl Coupling for CoxLineCoupling {
    type Point = Point2;

    fn prob_differ(&self) -> f64 {
        self.prob_differ
    }

    fn sample_pair(
        &self,
        rng: &mut dyn rand::RngCore,
    ) -> (Configuration<Point2>, Configuration<Point2>) {
        let (mut y, mut n) = (Vec::new(), Vec::new());
        let total = sample_poisson(rng, self.masses.iter().sum());
        self.components(total, rng, &mut y, &mut n);
        self.shared_singles(rng, &mut y, &mut n);
        (Configuration::from_points(y), Configuration::from_points(n))
    }

    fn sample_differing(
        &self,
        rng: &mut dyn rand::RngCore,
    ) -> (Configuration<Point2>, Configuration<Point2>) {
        assert!(self.prob_differ > 0.0, "the coupled processes never differ");
        let (mut y, mut n) = (Vec::new(), Vec::new());
        let total = sample_poisson_nonzero(rng, self.masses.iter().sum());
        self.components(total, rng, &mut y, &mut n);
        self.shared_singles(rng, &mut y, &mut n);
        (Configuration::from_points(y), Configuration::from_points(n))
    }
}
