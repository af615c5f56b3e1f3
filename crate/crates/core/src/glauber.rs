//! Glauber birth-death dynamics for a homogeneous Poisson process on a window:
//! births at rate `lambda |W|` at uniform locations, each point dying at rate 1.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{compare_count_laws, mean_se, RegionTv};
use crate::error::{Error, Result};
use crate::functional::Functional;
use crate::geometry::{Point2, Window};
use crate::pointprocess::{
    sample_ppp_window, sample_uniform_window, superpose, thin, Configuration, Labeled, Region,
};
use crate::rng::{replicates, RngStream};

fn exp1<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    -(1.0 - rng.random::<f64>()).ln()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlauberSpec {
    pub window: Window,
    /// Birth intensity per unit area.
    pub lambda: f64,
    pub horizon: f64,
}

impl GlauberSpec {
    pub fn new(window: Window, lambda: f64, horizon: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) || !(window.area() > 0.0) {
            return Err(Error::param("birth rate lambda * area must be positive"));
        }
        if !(horizon >= 0.0 && horizon.is_finite()) {
            return Err(Error::param(format!(
                "horizon must be finite and nonnegative, got {horizon}"
            )));
        }
        Ok(Self {
            window,
            lambda,
            horizon,
        })
    }

    pub fn birth_rate(&self) -> f64 {
        self.lambda * self.window.area()
    }

    pub fn with_horizon(&self, horizon: f64) -> Self {
        Self { horizon, ..*self }
    }
}

/// Exact jump-chain simulation from `omega0` up to `spec.horizon`.
pub fn glauber_simulate<R: Rng + ?Sized>(
    omega0: &Configuration<Point2>,
    spec: &GlauberSpec,
    rng: &mut R,
) -> Configuration<Point2> {
    let mut pts = omega0.points().to_vec();
    let birth = spec.birth_rate();
    let mut t = 0.0;
    loop {
        let total = birth + pts.len() as f64;
        t += exp1(rng) / total;
        if t > spec.horizon {
            break;
        }
        if rng.random::<f64>() * total < birth {
            pts.push(sample_uniform_window(&spec.window, rng));
        } else {
            let i = rng.random_range(0..pts.len());
            pts.swap_remove(i);
        }
    }
    Configuration::from_points(pts)
}

/// One draw of `e^{-t}∘ω ⊕ PPP((1 - e^{-t}) lambda)`, the law of the dynamics
/// at time `t` started from `ω`.
pub fn semigroup_sample<R: Rng + ?Sized>(
    omega: &Configuration<Point2>,
    t: f64,
    spec: &GlauberSpec,
    rng: &mut R,
) -> Configuration<Point2> {
    let keep = (-t).exp();
    let kept = thin(omega, keep, rng);
    let fresh = sample_ppp_window(&spec.window, -(-t).exp_m1() * spec.lambda, rng);
    superpose(&kept, &fresh)
}

/// Monte Carlo `P_t F(ω)` with its standard error.
pub fn semigroup_estimate<R>(
    f: &Functional<R>,
    omega: &Configuration<Point2>,
    t: f64,
    spec: &GlauberSpec,
    reps: u32,
    stream: RngStream,
) -> (f64, f64)
where
    R: Region<Point2> + Sync,
{
    let xs = replicates(stream, reps, |_, rng| {
        f.eval(&semigroup_sample(omega, t, spec, rng))
    });
    mean_se(&xs)
}

/// Count laws of the simulated dynamics at time `t` against the thinning
/// representation, per region.
pub fn semigroup_trajectory_consistency<R>(
    omega0: &Configuration<Point2>,
    spec: &GlauberSpec,
    t: f64,
    regions: &[Labeled<R>],
    reps: u32,
    stream: RngStream,
) -> Vec<RegionTv>
where
    R: Region<Point2>,
{
    let s = spec.with_horizon(t);
    let traj = replicates(stream.point(0), reps, |_, rng| {
        glauber_simulate(omega0, &s, rng)
    });
    let thin = replicates(stream.point(1), reps, |_, rng| {
        semigroup_sample(omega0, t, spec, rng)
    });
    compare_count_laws(&traj, &thin, regions)
}

/// Applying the thinning representation for `s` then `t` against a single
/// application for `s + t`.
pub fn semigroup_composition_check<R>(
    omega0: &Configuration<Point2>,
    spec: &GlauberSpec,
    s: f64,
    t: f64,
    regions: &[Labeled<R>],
    reps: u32,
    stream: RngStream,
) -> Vec<RegionTv>
where
    R: Region<Point2>,
{
    let twice = replicates(stream.point(0), reps, |_, rng| {
        let mid = semigroup_sample(omega0, s, spec, rng);
        semigroup_sample(&mid, t, spec, rng)
    });
    let once = replicates(stream.point(1), reps, |_, rng| {
        semigroup_sample(omega0, s + t, spec, rng)
    });
    compare_count_laws(&twice, &once, regions)
}

/// Antithetic partner of a uniform point: reflection through the window's
/// center (both windows are centrally symmetric).
fn antithetic(window: &Window, x: &Point2) -> Point2 {
    let c = window.center();
    Point2::new(2.0 * c.x - x.x, 2.0 * c.y - x.y)
}

/// `LF(ω) = sum_{x in ω} (F(ω ⊖ x) - F(ω)) + lambda int_W (F(ω ⊕ x) - F(ω)) dx`.
/// The death sum is exact; the birth integral uses `pairs` antithetic pairs of
/// uniform points. Returns the value and the standard error of the birth part.
pub fn generator_apply<R, G>(
    f: &Functional<R>,
    omega: &Configuration<Point2>,
    spec: &GlauberSpec,
    pairs: u32,
    rng: &mut G,
) -> (f64, f64)
where
    R: Region<Point2>,
    G: Rng + ?Sized,
{
    let base = f.eval(omega);
    let death: f64 = (0..omega.len())
        .map(|i| f.eval(&omega.without_index(i)) - base)
        .sum();
    if pairs == 0 {
        return (death, 0.0);
    }
    let mass = spec.birth_rate();
    let birth_at = |x: Point2| f.eval(&omega.add(x)) - base;
    let samples: Vec<f64> = (0..pairs)
        .map(|_| {
            let x = sample_uniform_window(&spec.window, rng);
            0.5 * (birth_at(x) + birth_at(antithetic(&spec.window, &x)))
        })
        .collect();
    let (m, se) = mean_se(&samples);
    (death + mass * m, mass * se)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContractionEstimate {
    /// Mean of `|F(A ⊕ z') - F(A)|` over coupled draws; bounds
    /// `|P_t F(ω ⊕ z) - P_t F(ω)|` from above.
    pub mean_abs: f64,
    /// `|mean of F(A ⊕ z') - F(A)|`, the estimate of the gap itself.
    pub abs_mean: f64,
    pub stderr: f64,
}

/// Coupled estimate of `|P_t F(ω ⊕ z) - P_t F(ω)|`: both sides share the
/// thinning coins of `ω` and the fresh Poisson points; `z` survives with
/// probability `e^{-t}`.
pub fn contraction_estimate<R>(
    f: &Functional<R>,
    omega: &Configuration<Point2>,
    z: Point2,
    t: f64,
    spec: &GlauberSpec,
    reps: u32,
    stream: RngStream,
) -> Result<ContractionEstimate>
where
    R: Region<Point2> + Sync,
{
    if !f.is_lipschitz() {
        return Err(Error::param(format!("{} is not 1-Lipschitz", f.name())));
    }
    let keep = (-t).exp();
    let diffs = replicates(stream, reps, |_, rng| {
        let base = semigroup_sample(omega, t, spec, rng);
        if rng.random::<f64>() < keep {
            f.eval(&base.add(z)) - f.eval(&base)
        } else {
            0.0
        }
    });
    let abs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let (mean_abs, stderr) = mean_se(&abs);
    let (m, _) = mean_se(&diffs);
    Ok(ContractionEstimate {
        mean_abs,
        abs_mean: m.abs(),
        stderr,
    })
}
