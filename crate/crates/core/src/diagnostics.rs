//! Monte Carlo identity checks and distance estimators.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functional::Functional;
use crate::geometry::{Point2, Window};
use crate::pointprocess::counts::poisson_pmf_truncated;
use crate::pointprocess::{
    sample_ppp_window, sample_uniform_window, superpose, thin, Configuration, Labeled, Region,
    SpacePoint,
};
use crate::rng::{replicates, RngStream, StreamRng};

/// Empirical law of the count in one region.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountHistogram {
    pub region: String,
    pub counts: BTreeMap<usize, u64>,
    pub reps: u64,
}

impl CountHistogram {
    pub fn from_counts(region: impl Into<String>, counts: impl IntoIterator<Item = usize>) -> Self {
        let mut map = BTreeMap::new();
        let mut reps = 0;
        for k in counts {
            *map.entry(k).or_insert(0) += 1;
            reps += 1;
        }
        Self {
            region: region.into(),
            counts: map,
            reps,
        }
    }

    pub fn from_samples<P: SpacePoint, R: Region<P>>(
        region: &Labeled<R>,
        samples: &[Configuration<P>],
    ) -> Self {
        Self::from_counts(
            region.name.clone(),
            samples.iter().map(|s| s.count_in(&region.region)),
        )
    }

    pub fn freq(&self, k: usize) -> f64 {
        self.counts.get(&k).copied().unwrap_or(0) as f64 / self.reps as f64
    }

    /// Total variation between two empirical laws.
    pub fn tv(&self, other: &Self) -> f64 {
        let keys: std::collections::BTreeSet<usize> = self
            .counts
            .keys()
            .chain(other.counts.keys())
            .copied()
            .collect();
        0.5 * keys
            .iter()
            .map(|&k| (self.freq(k) - other.freq(k)).abs())
            .sum::<f64>()
    }

    /// Total variation to Poisson(`mean`); the pmf is truncated where the
    /// upper tail drops below `1e-12` and the tail is lumped into one cell.
    pub fn tv_to_poisson(&self, mean: f64) -> f64 {
        let (pmf, tail) = poisson_pmf_truncated(mean, 1e-12);
        let kmax = pmf.len();
        let mut tv = 0.0;
        for (k, q) in pmf.iter().enumerate() {
            tv += (self.freq(k) - q).abs();
        }
        let beyond: f64 = self
            .counts
            .range(kmax..)
            .map(|(_, &c)| c as f64)
            .sum::<f64>()
            / self.reps as f64;
        tv += (beyond - tail).abs();
        0.5 * tv
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistanceKind {
    TvCounts,
    WassersteinLower,
    MeanGap,
}

/// A distance estimate. For `TvCounts` and `WassersteinLower`, `value` is
/// `max(estimate - stderr, 0)` and is meant as a lower bound; `estimate` is the
/// uncorrected point estimate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceEstimate {
    pub value: f64,
    pub estimate: f64,
    pub stderr: f64,
    pub kind: DistanceKind,
    /// Region or functional achieving the estimate.
    pub witness: String,
}

impl DistanceEstimate {
    fn conservative(estimate: f64, stderr: f64, kind: DistanceKind, witness: String) -> Self {
        Self {
            value: (estimate - stderr).max(0.0),
            estimate,
            stderr,
            kind,
            witness,
        }
    }
}

pub(crate) fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let m = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (m, 0.0);
    }
    (
        m,
        xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0),
    )
}

pub(crate) fn mean_se(xs: &[f64]) -> (f64, f64) {
    let (m, v) = mean_var(xs);
    (m, (v / xs.len().max(1) as f64).sqrt())
}

/// `F(x, ω) = 1{x ∈ mark} · inner(ω)` (or `inner(ω)` without a mark).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeckeFunctional<R> {
    pub mark: Option<Labeled<R>>,
    pub inner: Functional<R>,
}

impl<R> MeckeFunctional<R> {
    pub fn name(&self) -> String {
        match &self.mark {
            Some(m) => format!("1{{x in {}}}*{}", m.name, self.inner.name()),
            None => self.inner.name(),
        }
    }

    pub fn eval<P: SpacePoint>(&self, x: &P, cfg: &Configuration<P>) -> f64
    where
        R: Region<P>,
    {
        let g = self
            .mark
            .as_ref()
            .map_or(1.0, |m| if m.region.contains(x) { 1.0 } else { 0.0 });
        if g == 0.0 {
            0.0
        } else {
            g * self.inner.eval(cfg)
        }
    }

    /// Closed forms of both sides when `F` is one of the factorial-moment
    /// cases. `mass` is the intensity measure of `ω`'s ambient window
    /// (PPP) or the point count (BPP); `share` maps a region to its share of
    /// that mass.
    fn oracle<P>(&self, bpp: bool, mass: f64, share: impl Fn(&R) -> f64) -> Option<f64>
    where
        R: Region<P> + PartialEq,
    {
        let c = |m: &Option<Labeled<R>>| m.as_ref().map_or(1.0, |m| share(&m.region));
        match (&self.mark, &self.inner) {
            (mark, Functional::Constant(v)) => Some(v * mass * c(mark)),
            (None, Functional::RawCount { region }) => Some(mass * mass * share(&region.region)),
            (Some(m), Functional::RawCount { region }) if m.region == region.region => {
                let a = share(&region.region);
                Some(if bpp {
                    mass * a * (1.0 + (mass - 1.0) * a)
                } else {
                    (mass * a).powi(2)
                })
            }
            _ => None,
        }
    }
}

/// Outcome of an identity check `lhs = rhs` estimated by Monte Carlo.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub stderr_lhs: f64,
    pub stderr_rhs: f64,
    /// Closed form of both sides, when known.
    pub analytic: Option<f64>,
}

impl IdentityCheck {
    pub fn stderr(&self) -> f64 {
        self.stderr_lhs.hypot(self.stderr_rhs)
    }

    /// `|lhs - rhs| <= k` combined stderr, and each side within `k` of its own
    /// stderr of the closed form when one exists.
    pub fn passes(&self, k: f64) -> bool {
        let tol = |se: f64| k * se + 1e-12;
        (self.lhs - self.rhs).abs() <= tol(self.stderr())
            && self.analytic.is_none_or(|a| {
                (self.lhs - a).abs() <= tol(self.stderr_lhs)
                    && (self.rhs - a).abs() <= tol(self.stderr_rhs)
            })
    }
}

/// Campbell-Mecke for `PPP(lambda)` on `window`:
/// `E sum_{x in Φ} F(x, Φ ⊖ x) = lambda |K| E F(X, Φ)` with `X` uniform.
pub fn mecke_check_ppp<R>(
    f: &MeckeFunctional<R>,
    lambda: f64,
    window: &Window,
    reps: u32,
    stream: RngStream,
) -> IdentityCheck
where
    R: Region<Point2> + PartialEq + Sync,
{
    let mass = lambda * window.area();
    let lhs = replicates(stream.point(0), reps, |_, rng| {
        let phi = sample_ppp_window(window, lambda, rng);
        (0..phi.len())
            .map(|i| f.eval(&phi.points()[i], &phi.without_index(i)))
            .sum::<f64>()
    });
    let rhs = replicates(stream.point(1), reps, |_, rng| {
        let x = sample_uniform_window(window, rng);
        let phi = sample_ppp_window(window, lambda, rng);
        mass * f.eval(&x, &phi)
    });
    let (l, sl) = mean_se(&lhs);
    let (r, sr) = mean_se(&rhs);
    IdentityCheck {
        name: format!("mecke_ppp:{}", f.name()),
        lhs: l,
        rhs: r,
        stderr_lhs: sl,
        stderr_rhs: sr,
        analytic: f.oracle(false, mass, |a: &R| lambda * a.measure() / mass),
    }
}

/// Campbell-Mecke for a binomial process of `n` points drawn by `sampler`:
/// `E sum_{x in Φ_N} F(x, Φ_N) = N E F(X, Φ_{N-1} ⊕ X)`. `total_measure`
/// normalizes region measures into probabilities.
pub fn mecke_check_bpp<P, R, S>(
    f: &MeckeFunctional<R>,
    n: usize,
    sampler: S,
    total_measure: f64,
    reps: u32,
    stream: RngStream,
) -> IdentityCheck
where
    P: SpacePoint,
    R: Region<P> + PartialEq + Sync,
    S: Fn(&mut StreamRng) -> P + Sync + Send,
{
    let lhs = replicates(stream.point(0), reps, |_, rng| {
        let phi: Configuration<P> = (0..n).map(|_| sampler(rng)).collect();
        phi.iter().map(|x| f.eval(x, &phi)).sum::<f64>()
    });
    let rhs = replicates(stream.point(1), reps, |_, rng| {
        let x = sampler(rng);
        let mut phi: Configuration<P> = (0..n.saturating_sub(1)).map(|_| sampler(rng)).collect();
        phi.push(x);
        n as f64 * f.eval(&x, &phi)
    });
    let (l, sl) = mean_se(&lhs);
    let (r, sr) = mean_se(&rhs);
    IdentityCheck {
        name: format!("mecke_bpp:{}", f.name()),
        lhs: l,
        rhs: r,
        stderr_lhs: sl,
        stderr_rhs: sr,
        analytic: f.oracle(true, n as f64, |a: &R| a.measure() / total_measure),
    }
}

/// Per-region comparison of two empirical count laws.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionTv {
    pub region: String,
    pub tv: f64,
    pub threshold: f64,
}

impl RegionTv {
    pub fn passes(&self) -> bool {
        self.tv <= self.threshold
    }
}

/// Count-histogram TV per region between two sample lists. Threshold
/// `2/sqrt(reps)`.
pub fn compare_count_laws<P, R>(
    a: &[Configuration<P>],
    b: &[Configuration<P>],
    regions: &[Labeled<R>],
) -> Vec<RegionTv>
where
    P: SpacePoint,
    R: Region<P>,
{
    let threshold = 2.0 / (a.len().min(b.len()) as f64).sqrt();
    regions
        .iter()
        .map(|r| RegionTv {
            region: r.name.clone(),
            tv: CountHistogram::from_samples(r, a).tv(&CountHistogram::from_samples(r, b)),
            threshold,
        })
        .collect()
}

fn invariance_samples(
    lambda: f64,
    window: &Window,
    t: f64,
    reps: u32,
    stream: RngStream,
) -> Result<(Vec<Configuration<Point2>>, Vec<Configuration<Point2>>)> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::param(format!(
            "thinning parameter must lie in [0, 1], got {t}"
        )));
    }
    let mixed = replicates(stream.point(0), reps, |_, rng| {
        let a = sample_ppp_window(window, lambda, rng);
        let b = sample_ppp_window(window, lambda, rng);
        superpose(&thin(&a, t, rng), &thin(&b, 1.0 - t, rng))
    });
    let fresh = replicates(stream.point(1), reps, |_, rng| {
        sample_ppp_window(window, lambda, rng)
    });
    Ok((mixed, fresh))
}

/// Thinning invariance: `t∘Φ¹ ⊕ (1-t)∘Φ²` against a fresh `PPP(lambda)`.
pub fn invariance_check<R>(
    lambda: f64,
    window: &Window,
    t: f64,
    regions: &[Labeled<R>],
    reps: u32,
    stream: RngStream,
) -> Result<Vec<RegionTv>>
where
    R: Region<Point2>,
{
    let (mixed, fresh) = invariance_samples(lambda, window, t, reps, stream)?;
    Ok(compare_count_laws(&mixed, &fresh, regions))
}

/// Same comparison through functional means, for joint statistics such as
/// two-region product indicators. Uses the same draws as
/// [`invariance_check`] for equal arguments.
pub fn invariance_functional_check<R>(
    lambda: f64,
    window: &Window,
    t: f64,
    family: &[Functional<R>],
    reps: u32,
    stream: RngStream,
) -> Result<Vec<IdentityCheck>>
where
    R: Region<Point2>,
{
    let (mixed, fresh) = invariance_samples(lambda, window, t, reps, stream)?;
    Ok(family
        .iter()
        .map(|f| {
            let a: Vec<f64> = mixed.iter().map(|c| f.eval(c)).collect();
            let b: Vec<f64> = fresh.iter().map(|c| f.eval(c)).collect();
            let (l, sl) = mean_se(&a);
            let (r, sr) = mean_se(&b);
            IdentityCheck {
                name: f.name(),
                lhs: l,
                rhs: r,
                stderr_lhs: sl,
                stderr_rhs: sr,
                analytic: None,
            }
        })
        .collect())
}

/// TV between the empirical count law in `region` and Poisson(`target_mean`),
/// with a 200-resample bootstrap standard error.
pub fn count_tv_lower_bound<P, R, G>(
    samples: &[Configuration<P>],
    region: &Labeled<R>,
    target_mean: f64,
    rng: &mut G,
) -> DistanceEstimate
where
    P: SpacePoint,
    R: Region<P>,
    G: Rng + ?Sized,
{
    let counts: Vec<usize> = samples.iter().map(|s| s.count_in(&region.region)).collect();
    count_tv_from_counts(&counts, &region.name, target_mean, rng)
}

pub fn count_tv_from_counts<G: Rng + ?Sized>(
    counts: &[usize],
    name: &str,
    target_mean: f64,
    rng: &mut G,
) -> DistanceEstimate {
    let hist = CountHistogram::from_counts(name, counts.iter().copied());
    let tv = hist.tv_to_poisson(target_mean);
    let boots: Vec<f64> = (0..200)
        .map(|_| {
            let resample = (0..counts.len()).map(|_| counts[rng.random_range(0..counts.len())]);
            CountHistogram::from_counts(name, resample).tv_to_poisson(target_mean)
        })
        .collect();
    let (_, v) = mean_var(&boots);
    DistanceEstimate::conservative(tv, v.sqrt(), DistanceKind::TvCounts, name.to_string())
}

/// Largest count TV over a region set.
pub fn count_tv_max<P, R, G>(
    samples: &[Configuration<P>],
    regions: &[Labeled<R>],
    target_intensity: f64,
    rng: &mut G,
) -> DistanceEstimate
where
    P: SpacePoint,
    R: Region<P>,
    G: Rng + ?Sized,
{
    regions
        .iter()
        .map(|r| count_tv_lower_bound(samples, r, target_intensity * r.region.measure(), rng))
        .max_by(|a, b| {
            a.value
                .total_cmp(&b.value)
                .then(a.estimate.total_cmp(&b.estimate))
        })
        .unwrap_or_else(|| {
            DistanceEstimate::conservative(0.0, 0.0, DistanceKind::TvCounts, String::new())
        })
}

fn require_lipschitz<R>(family: &[Functional<R>]) -> Result<()> {
    match family.iter().find(|f| !f.is_lipschitz()) {
        Some(f) => Err(Error::param(format!("{} is not 1-Lipschitz", f.name()))),
        None => Ok(()),
    }
}

fn best_gap(gaps: impl Iterator<Item = (String, f64, f64)>) -> DistanceEstimate {
    let mut best: Option<(String, f64, f64)> = None;
    for (name, g, se) in gaps {
        let better = match &best {
            None => true,
            Some((_, bg, _)) => g.abs() > bg.abs(),
        };
        if better {
            best = Some((name, g, se));
        }
    }
    let (name, g, se) = best.unwrap_or_default();
    DistanceEstimate::conservative(g.abs(), se, DistanceKind::WassersteinLower, name)
}

/// `max_F |mean F(samples) - mean F(reference)|` over a 1-Lipschitz family,
/// against as many independent reference draws as there are samples.
pub fn wasserstein_lower_bound<P, R, S>(
    samples: &[Configuration<P>],
    reference: S,
    family: &[Functional<R>],
    stream: RngStream,
) -> Result<DistanceEstimate>
where
    P: SpacePoint,
    R: Region<P> + Sync,
    S: Fn(&mut StreamRng) -> Configuration<P> + Sync + Send,
{
    require_lipschitz(family)?;
    let refs = replicates(stream, samples.len() as u32, |_, rng| reference(rng));
    Ok(best_gap(family.iter().map(|f| {
        let a: Vec<f64> = samples.iter().map(|s| f.eval(s)).collect();
        let b: Vec<f64> = refs.iter().map(|s| f.eval(s)).collect();
        let (ma, va) = mean_var(&a);
        let (mb, vb) = mean_var(&b);
        let se = (va / a.len() as f64 + vb / b.len() as f64).sqrt();
        (f.name(), ma - mb, se)
    })))
}

/// Same bound from coupled pairs drawn conditionally on an event of
/// probability `weight` outside of which the two sides coincide:
/// `E F(Y) - E F(N) = weight * E[F(Y) - F(N) | differ]`.
pub fn wasserstein_lower_bound_paired<P, R>(
    pairs: &[(Configuration<P>, Configuration<P>)],
    weight: f64,
    family: &[Functional<R>],
) -> Result<DistanceEstimate>
where
    P: SpacePoint,
    R: Region<P>,
{
    require_lipschitz(family)?;
    if pairs.is_empty() || weight == 0.0 {
        return Ok(DistanceEstimate::conservative(
            0.0,
            0.0,
            DistanceKind::WassersteinLower,
            String::new(),
        ));
    }
    Ok(best_gap(family.iter().map(|f| {
        let d: Vec<f64> = pairs.iter().map(|(y, n)| f.eval(y) - f.eval(n)).collect();
        let (m, se) = mean_se(&d);
        (f.name(), weight * m, weight * se)
    })))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub pairs: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Least squares of `log distance` on `log parameter`.
pub fn rate_regression(points: &[(f64, f64)]) -> Result<RateFit> {
    if points.len() < 4 {
        return Err(Error::param("rate regression needs at least 4 points"));
    }
    if points.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::param(
            "rate regression parameters must be strictly increasing",
        ));
    }
    if let Some(p) = points.iter().find(|p| !(p.0 > 0.0) || !(p.1 > 0.0)) {
        return Err(Error::param(format!(
            "rate regression needs positive values, got {p:?}"
        )));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy > 0.0 {
        sxy * sxy / (sxx * syy)
    } else {
        1.0
    };
    Ok(RateFit {
        pairs: points.to_vec(),
        slope,
        intercept,
        r_squared,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functional::lipschitz_family;
    use crate::geometry::PointS2;
    use crate::pointprocess::{
        planar_region_set, sample_uniform_sphere, PlanarRegion, SphericalRegion,
    };

    fn square_regions() -> Vec<Labeled<PlanarRegion>> {
        planar_region_set(&Window::unit_square())
    }

    #[test]
    fn histogram_tv() {
        let a = CountHistogram::from_counts("a", [0, 0, 1, 2]);
        let b = CountHistogram::from_counts("b", [0, 1, 1, 2]);
        assert!((a.tv(&b) - 0.25).abs() < 1e-15);
        assert_eq!(a.tv(&a), 0.0);
        assert_eq!(a.reps, 4);
        // target zero: TV is the fraction of nonzero counts
        let c = CountHistogram::from_counts("c", [0, 3, 0, 1, 0]);
        assert!((c.tv_to_poisson(0.0) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn tv_is_order_invariant() {
        let mut rng = RngStream::new(1, 0).rng();
        let samples: Vec<_> = (0..1000)
            .map(|_| sample_ppp_window(&Window::unit_square(), 3.0, &mut rng))
            .collect();
        let mut rev = samples.clone();
        rev.reverse();
        let r = &square_regions()[0];
        let a = CountHistogram::from_samples(r, &samples).tv_to_poisson(3.0 / 16.0);
        let b = CountHistogram::from_samples(r, &rev).tv_to_poisson(3.0 / 16.0);
        assert_eq!(a, b);
    }

    #[test]
    fn count_tv_of_exact_ppp_is_small() {
        let w = Window::unit_square();
        let regions = square_regions();
        for reps in [1_000u32, 16_000] {
            let samples = replicates(RngStream::new(2, reps as u64), reps, |_, rng| {
                sample_ppp_window(&w, 4.0, rng)
            });
            let mut rng = RngStream::new(3, 0).rng();
            let d = count_tv_lower_bound(&samples, &regions[5], 4.0 / 16.0, &mut rng);
            assert!(d.estimate < 2.0 / (reps as f64).sqrt(), "{d:?}");
            assert!(d.stderr > 0.0);
        }
    }

    #[test]
    fn satellites_far_from_poisson_at_small_n() {
        use crate::coxmodels::sample_satellites;
        use crate::pointprocess::{spherical_region_set, ModelParams};
        let p = ModelParams::satellites(2.0, 5).unwrap();
        let samples = replicates(RngStream::new(4, 0), 20_000, |_, rng| {
            sample_satellites(&p, rng).unwrap().points
        });
        let mut rng = RngStream::new(5, 0).rng();
        let d = count_tv_max(&samples, &spherical_region_set(), 2.0, &mut rng);
        assert!(d.value > 0.0 && d.value <= 1.6, "{d:?}");
    }

    #[test]
    fn wasserstein_identical_and_constant() {
        let w = Window::unit_square();
        let samples = replicates(RngStream::new(6, 0), 4000, |_, rng| {
            sample_ppp_window(&w, 3.0, rng)
        });
        let fam = lipschitz_family(&square_regions()[..4], 3, &[]);
        let d = wasserstein_lower_bound(
            &samples,
            |rng| sample_ppp_window(&w, 3.0, rng),
            &fam,
            RngStream::new(7, 0),
        )
        .unwrap();
        assert!(d.estimate < 4.0 * d.stderr + 1e-12, "{d:?}");
        let d = wasserstein_lower_bound(
            &samples,
            |rng| sample_ppp_window(&w, 3.0, rng),
            &[Functional::<PlanarRegion>::Constant(1.0)],
            RngStream::new(7, 0),
        )
        .unwrap();
        assert_eq!(d.value, 0.0);
        assert_eq!(d.estimate, 0.0);
        let raw = vec![Functional::RawCount {
            region: square_regions()[0].clone(),
        }];
        assert!(wasserstein_lower_bound(
            &samples,
            |rng| sample_ppp_window(&w, 3.0, rng),
            &raw,
            RngStream::new(7, 0)
        )
        .is_err());
    }

    #[test]
    fn wasserstein_dominates_count_tv_with_full_indicator_family() {
        // PPP(3) against a Poisson(2) reference: the indicator of the set
        // where the empirical pmf exceeds the reference attains the count TV.
        let w = Window::unit_square();
        let samples = replicates(RngStream::new(8, 0), 20_000, |_, rng| {
            sample_ppp_window(&w, 3.0, rng)
        });
        let region = Labeled::new("K", PlanarRegion::Window(w));
        let mut rng = RngStream::new(9, 0).rng();
        let tv = count_tv_lower_bound(&samples, &region, 2.0, &mut rng);
        let (pmf, _) = poisson_pmf_truncated(2.0, 1e-12);
        let hist = CountHistogram::from_samples(&region, &samples);
        let set: Vec<usize> = (0..40)
            .filter(|&k| hist.freq(k) > pmf.get(k).copied().unwrap_or(0.0))
            .collect();
        let mut fam = lipschitz_family(std::slice::from_ref(&region), 8, &[]);
        fam.push(Functional::CountIn {
            region: region.clone(),
            set,
        });
        let d = wasserstein_lower_bound(
            &samples,
            |rng| sample_ppp_window(&w, 2.0, rng),
            &fam,
            RngStream::new(10, 0),
        )
        .unwrap();
        assert!(
            d.estimate >= tv.estimate - 3.0 * d.stderr,
            "{d:?} vs {tv:?}"
        );
    }

    #[test]
    fn paired_bound_handles_degenerate_inputs() {
        let fam = vec![Functional::<PlanarRegion>::Constant(1.0)];
        let d = wasserstein_lower_bound_paired::<Point2, _>(&[], 0.3, &fam).unwrap();
        assert_eq!(d.value, 0.0);
        let one = Configuration::from_points(vec![Point2::new(0.5, 0.5)]);
        let pairs = vec![(one.clone(), Configuration::new()); 10];
        let fam = vec![Functional::TruncatedCount {
            region: Labeled::new("K", PlanarRegion::Window(Window::unit_square())),
            cap: 1,
        }];
        let d = wasserstein_lower_bound_paired(&pairs, 0.25, &fam).unwrap();
        assert!((d.estimate - 0.25).abs() < 1e-15 && d.stderr == 0.0);
    }

    #[test]
    fn mecke_ppp_oracles() {
        let w = Window::unit_square();
        let a = square_regions()[16 + 2].clone();
        let cases = vec![
            MeckeFunctional {
                mark: None,
                inner: Functional::Constant(1.0),
            },
            MeckeFunctional {
                mark: Some(a.clone()),
                inner: Functional::Constant(1.0),
            },
            MeckeFunctional {
                mark: Some(a.clone()),
                inner: Functional::RawCount { region: a.clone() },
            },
            MeckeFunctional {
                mark: Some(a.clone()),
                inner: Functional::TruncatedCount {
                    region: a.clone(),
                    cap: 1,
                },
            },
        ];
        for (i, f) in cases.iter().enumerate() {
            let c = mecke_check_ppp(f, 3.0, &w, 20_000, RngStream::new(11, i as u64));
            assert!(c.passes(3.5), "{c:?}");
            if i < 3 {
                assert!(c.analytic.is_some());
            }
        }
        // (lambda |A|)^2
        let c = mecke_check_ppp(&cases[2], 3.0, &w, 10, RngStream::new(12, 0));
        let la = 3.0 * a.region.measure();
        assert!((c.analytic.unwrap() - la * la).abs() < 1e-12);
    }

    #[test]
    fn mecke_bpp_oracles() {
        let cap = Labeled::new("cap", SphericalRegion::cap(PointS2::NORTH, 1.0));
        let share = cap.region.measure();
        let n = 6;
        let cases = vec![
            (
                MeckeFunctional {
                    mark: None,
                    inner: Functional::Constant(1.0),
                },
                n as f64,
            ),
            (
                MeckeFunctional {
                    mark: Some(cap.clone()),
                    inner: Functional::Constant(1.0),
                },
                n as f64 * share,
            ),
            (
                MeckeFunctional {
                    mark: None,
                    inner: Functional::RawCount {
                        region: cap.clone(),
                    },
                },
                (n * n) as f64 * share,
            ),
            (
                MeckeFunctional {
                    mark: Some(cap.clone()),
                    inner: Functional::RawCount {
                        region: cap.clone(),
                    },
                },
                n as f64 * share * (1.0 + (n as f64 - 1.0) * share),
            ),
        ];
        for (i, (f, oracle)) in cases.iter().enumerate() {
            let c = mecke_check_bpp(
                f,
                n,
                |rng| sample_uniform_sphere(rng),
                1.0,
                20_000,
                RngStream::new(13, i as u64),
            );
            assert!((c.analytic.unwrap() - oracle).abs() < 1e-12, "{c:?}");
            assert!(c.passes(3.5), "{c:?}");
        }
    }

    #[test]
    fn invariance_at_half() {
        let w = Window::unit_square();
        let res = invariance_check(
            2.0,
            &w,
            0.5,
            &square_regions(),
            20_000,
            RngStream::new(14, 0),
        )
        .unwrap();
        assert!(res.iter().all(RegionTv::passes), "{res:?}");
        assert!(
            invariance_check(2.0, &w, 1.5, &square_regions(), 10, RngStream::new(14, 0)).is_err()
        );
    }

    #[test]
    fn joint_invariance_within_noise() {
        let w = Window::unit_square();
        let r = square_regions();
        let fam = vec![Functional::Product {
            a: r[0].clone(),
            set_a: vec![0],
            b: r[1].clone(),
            set_b: vec![0, 1],
        }];
        let res =
            invariance_functional_check(2.0, &w, 0.3, &fam, 20_000, RngStream::new(15, 0)).unwrap();
        assert!(
            res.iter()
                .all(|c| (c.lhs - c.rhs).abs() <= 3.0 * c.stderr()),
            "{res:?}"
        );
    }

    #[test]
    fn regression_exact_on_power_laws() {
        let pts: Vec<(f64, f64)> = [10.0, 20.0, 40.0, 80.0, 160.0]
            .iter()
            .map(|&x| (x, 3.0 / x))
            .collect();
        let f = rate_regression(&pts).unwrap();
        assert!((f.slope + 1.0).abs() < 1e-9 && (f.r_squared - 1.0).abs() < 1e-12);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-9);
        let pts: Vec<(f64, f64)> = [1.0, 2.0, 3.0, 4.0]
            .iter()
            .map(|&x| (x, 1.0 / (x * x)))
            .collect();
        assert!((rate_regression(&pts).unwrap().slope + 2.0).abs() < 1e-9);
        assert!(rate_regression(&pts[..3]).is_err());
        assert!(rate_regression(&[(1.0, 1.0), (2.0, 0.0), (3.0, 1.0), (4.0, 1.0)]).is_err());
        assert!(rate_regression(&[(1.0, 1.0), (1.0, 2.0), (3.0, 1.0), (4.0, 1.0)]).is_err());
    }
}
