//! Discrete samplers and pmfs used by the point-process samplers.

use rand::Rng;

/// Means below this use sequential inversion; above it PTRS.
const INVERSION_LIMIT: f64 = 30.0;

/// Poisson(`mean`) variate. Inversion for small means, Hörmann's transformed
/// rejection (PTRS) above [`INVERSION_LIMIT`].
pub fn sample_poisson<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> u64 {
    debug_assert!(mean >= 0.0 && mean.is_finite(), "poisson mean {mean}");
    if mean <= 0.0 {
        return 0;
    }
    if mean < INVERSION_LIMIT {
        poisson_inversion(rng, mean)
    } else {
        poisson_ptrs(rng, mean)
    }
}

fn poisson_inversion<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> u64 {
    let u: f64 = rng.random();
    let mut k = 0u64;
    let mut p = (-mean).exp();
    let mut cdf = p;
    while u > cdf {
        k += 1;
        p *= mean / k as f64;
        cdf += p;
        // Rounding can leave cdf a hair below 1; the tail beyond this is < 1e-15.
        if p < 1e-300 && k as f64 > mean {
            break;
        }
    }
    k
}

fn poisson_ptrs<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> u64 {
    let slam = mean.sqrt();
    let loglam = mean.ln();
    let b = 0.931 + 2.53 * slam;
    let a = -0.059 + 0.02483 * b;
    let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    let vr = 0.9277 - 3.6224 / (b - 2.0);
    loop {
        let u = rng.random::<f64>() - 0.5;
        let v: f64 = rng.random();
        let us = 0.5 - u.abs();
        let k = ((2.0 * a / us + b) * u + mean + 0.43).floor();
        if us >= 0.07 && v <= vr {
            return k as u64;
        }
        if k < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        let lhs = v.ln() + inv_alpha.ln() - (a / (us * us) + b).ln();
        let rhs = -mean + k * loglam - libm::lgamma(k + 1.0);
        if lhs <= rhs {
            return k as u64;
        }
    }
}

/// Poisson(`mean`) conditioned on being at least one. `mean` must be positive.
pub fn sample_poisson_nonzero<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> u64 {
    debug_assert!(mean > 0.0);
    if mean >= INVERSION_LIMIT {
        loop {
            let k = poisson_ptrs(rng, mean);
            if k > 0 {
                return k;
            }
        }
    }
    // Invert the conditional cdf; mass above zero is -expm1(-mean).
    let u = rng.random::<f64>() * -(-mean).exp_m1();
    let mut k = 1u64;
    let mut p = mean * (-mean).exp();
    let mut cdf = p;
    while u > cdf {
        k += 1;
        p *= mean / k as f64;
        cdf += p;
        if p < 1e-300 && k as f64 > mean {
            break;
        }
    }
    k
}

/// Poisson(`mean`) conditioned on being at least two.
pub fn sample_poisson_at_least_two<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> u64 {
    debug_assert!(mean > 0.0);
    if mean >= 2.0 {
        loop {
            let k = sample_poisson(rng, mean);
            if k >= 2 {
                return k;
            }
        }
    }
    // P(U >= 2) = 1 - e^{-m}(1 + m), computed without cancellation.
    let tail = poisson_tail_two(mean);
    let u = rng.random::<f64>() * tail;
    let mut k = 2u64;
    let mut p = 0.5 * mean * mean * (-mean).exp();
    let mut cdf = p;
    while u > cdf {
        k += 1;
        p *= mean / k as f64;
        cdf += p;
        if p < 1e-300 {
            break;
        }
    }
    k
}

/// `P(Poisson(m) >= 2) = 1 - e^{-m}(1 + m)`, accurate for small `m`.
pub fn poisson_tail_two(m: f64) -> f64 {
    if m < 0.05 {
        // sum_{k>=2} (-1)^k (k-1) m^k / k!
        let mut term = m * m / 2.0;
        let mut sum = 0.0f64;
        let mut k = 2.0;
        while term.abs() > 1e-18 * sum.abs().max(f64::MIN_POSITIVE) {
            sum += (k - 1.0) * term;
            k += 1.0;
            term *= -m / k;
        }
        sum
    } else {
        -(-m).exp_m1() - m * (-m).exp()
    }
}

/// Binomial(`n`, `q`) variate; inversion for small means, Bernoulli trials
/// otherwise.
pub fn sample_binomial<R: Rng + ?Sized>(rng: &mut R, n: u64, q: f64) -> u64 {
    debug_assert!((0.0..=1.0).contains(&q));
    if n == 0 || q <= 0.0 {
        return 0;
    }
    if q >= 1.0 {
        return n;
    }
    if n as f64 * q > INVERSION_LIMIT {
        return (0..n).filter(|_| rng.random::<f64>() < q).count() as u64;
    }
    let u: f64 = rng.random();
    let ratio = q / (1.0 - q);
    let mut k = 0u64;
    let mut p = (n as f64 * (-q).ln_1p()).exp();
    let mut cdf = p;
    while u > cdf && k < n {
        p *= (n - k) as f64 / (k + 1) as f64 * ratio;
        k += 1;
        cdf += p;
    }
    k
}

/// Binomial(`n`, `q`) conditioned on being at least one. `q` must be in (0, 1].
pub fn sample_binomial_nonzero<R: Rng + ?Sized>(rng: &mut R, n: u64, q: f64) -> u64 {
    debug_assert!(n >= 1 && q > 0.0 && q <= 1.0);
    if q >= 1.0 {
        return n;
    }
    if n as f64 * q > INVERSION_LIMIT {
        loop {
            let k = (0..n).filter(|_| rng.random::<f64>() < q).count() as u64;
            if k > 0 {
                return k;
            }
        }
    }
    let log_q0 = n as f64 * (-q).ln_1p();
    let mass = -log_q0.exp_m1();
    let u = rng.random::<f64>() * mass;
    let ratio = q / (1.0 - q);
    let mut k = 1u64;
    let mut p = n as f64 * q * ((n - 1) as f64 * (-q).ln_1p()).exp();
    let mut cdf = p;
    while u > cdf && k < n {
        p *= (n - k) as f64 / (k + 1) as f64 * ratio;
        k += 1;
        cdf += p;
    }
    k
}

/// Poisson pmf on `0..=k_max` where `k_max` is the first index past the mean
/// whose remaining upper tail is below `tail`. Returns the pmf and the
/// truncated tail mass.
pub fn poisson_pmf_truncated(mean: f64, tail: f64) -> (Vec<f64>, f64) {
    if mean <= 0.0 {
        return (vec![1.0], 0.0);
    }
    let mut pmf = Vec::new();
    // log-space start keeps e^{-mean} from underflowing for large means
    let mut logp = -mean;
    let mut cum = 0.0;
    let mut k = 0u64;
    loop {
        let p = logp.exp();
        pmf.push(p);
        cum += p;
        let remaining = (1.0 - cum).max(0.0);
        if (k as f64) > mean && remaining < tail {
            return (pmf, remaining);
        }
        k += 1;
        logp += mean.ln() - (k as f64).ln();
        if k > 10_000_000 {
            return (pmf, remaining);
        }
    }
}

/// Poisson pmf at `k`.
pub fn poisson_pmf(mean: f64, k: u64) -> f64 {
    if mean <= 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    (-mean + k as f64 * mean.ln() - libm::lgamma(k as f64 + 1.0)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    fn moments(xs: &[u64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<u64>() as f64 / n;
        let v = xs.iter().map(|&x| (x as f64 - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, v)
    }

    #[test]
    fn zero_mean_is_zero() {
        let mut rng = RngStream::new(1, 0).rng();
        assert!((0..100).all(|_| sample_poisson(&mut rng, 0.0) == 0));
    }

    #[test]
    fn poisson_moments_both_regimes() {
        let mut rng = RngStream::new(2, 0).rng();
        for mean in [0.3, 4.0, 29.0, 31.0, 250.0] {
            let n = 60_000;
            let xs: Vec<u64> = (0..n).map(|_| sample_poisson(&mut rng, mean)).collect();
            let (m, v) = moments(&xs);
            let se = (mean / n as f64).sqrt();
            assert!((m - mean).abs() < 4.0 * se, "mean {mean}: {m}");
            // var of sample variance ~ (mu + 2 mu^2)/n for Poisson
            let se_v = ((mean + 2.0 * mean * mean) / n as f64).sqrt();
            assert!((v - mean).abs() < 4.0 * se_v, "var {mean}: {v}");
        }
    }

    #[test]
    fn ptrs_matches_pmf() {
        // chi-square style check of PTRS against the exact pmf at mean 40
        let mut rng = RngStream::new(3, 0).rng();
        let mean = 40.0;
        let n = 100_000;
        let mut hist = vec![0u64; 120];
        for _ in 0..n {
            let k = sample_poisson(&mut rng, mean) as usize;
            hist[k.min(119)] += 1;
        }
        let mut chi2 = 0.0;
        let mut cells = 0;
        for (k, &obs) in hist.iter().enumerate() {
            let e = poisson_pmf(mean, k as u64) * n as f64;
            if e > 20.0 {
                chi2 += (obs as f64 - e).powi(2) / e;
                cells += 1;
            }
        }
        // mean cells-1, sd sqrt(2 cells); 5 sd slack
        assert!(
            chi2 < cells as f64 + 5.0 * (2.0 * cells as f64).sqrt(),
            "chi2 {chi2} over {cells}"
        );
    }

    #[test]
    fn truncated_samplers() {
        let mut rng = RngStream::new(4, 0).rng();
        for mean in [1e-4, 0.2, 3.0, 45.0] {
            let n = 40_000;
            let xs: Vec<u64> = (0..n)
                .map(|_| sample_poisson_nonzero(&mut rng, mean))
                .collect();
            assert!(xs.iter().all(|&k| k >= 1));
            let expected = mean / -(-mean).exp_m1();
            let (m, v) = moments(&xs);
            assert!(
                (m - expected).abs() < 5.0 * (v.max(1e-6) / n as f64).sqrt() + 1e-9,
                "{mean}: {m} vs {expected}"
            );
        }
        for mean in [1e-3, 0.5, 2.5] {
            let n = 40_000;
            let xs: Vec<u64> = (0..n)
                .map(|_| sample_poisson_at_least_two(&mut rng, mean))
                .collect();
            assert!(xs.iter().all(|&k| k >= 2));
            // E[U | U>=2] = (m - m e^{-m}) / P(U>=2)
            let expected = (mean - mean * (-mean).exp()) / poisson_tail_two(mean);
            let (m, v) = moments(&xs);
            assert!(
                (m - expected).abs() < 5.0 * (v.max(1e-6) / n as f64).sqrt() + 1e-6,
                "{mean}: {m} vs {expected}"
            );
        }
        for (n_trials, q) in [(10u64, 0.001), (160, 8e-5), (50, 0.3), (200, 0.5)] {
            let n = 40_000;
            let xs: Vec<u64> = (0..n)
                .map(|_| sample_binomial_nonzero(&mut rng, n_trials, q))
                .collect();
            assert!(xs.iter().all(|&k| k >= 1 && k <= n_trials));
            let p0 = (1.0 - q).powi(n_trials as i32);
            let expected = n_trials as f64 * q / (1.0 - p0);
            let (m, v) = moments(&xs);
            assert!(
                (m - expected).abs() < 5.0 * (v.max(1e-6) / n as f64).sqrt() + 1e-6,
                "{n_trials},{q}: {m} vs {expected}"
            );
        }
    }

    #[test]
    fn binomial_moments() {
        let mut rng = RngStream::new(5, 0).rng();
        for (n_trials, q) in [(0u64, 0.3), (160, 0.01), (1000, 0.2), (7, 1.0)] {
            let n = 40_000;
            let xs: Vec<u64> = (0..n)
                .map(|_| sample_binomial(&mut rng, n_trials, q))
                .collect();
            assert!(xs.iter().all(|&k| k <= n_trials));
            let expected = n_trials as f64 * q;
            let (m, _) = moments(&xs);
            let se = (n_trials as f64 * q * (1.0 - q) / n as f64).sqrt();
            assert!(
                (m - expected).abs() <= 4.0 * se + 1e-12,
                "{n_trials},{q}: {m}"
            );
        }
    }

    #[test]
    fn tail_two_series_matches_direct() {
        for m in [0.01f64, 0.049, 0.051, 0.3] {
            let direct = 1.0 - (-m).exp() * (1.0 + m);
            assert!((poisson_tail_two(m) - direct).abs() < 1e-13);
        }
        assert!((poisson_tail_two(1e-6) - 0.5e-12).abs() < 1e-18);
    }

    #[test]
    fn pmf_truncation() {
        let (pmf, tail) = poisson_pmf_truncated(3.0, 1e-12);
        assert!(tail < 1e-12);
        let total: f64 = pmf.iter().sum();
        assert!((total + tail - 1.0).abs() < 1e-12);
        assert!((pmf[2] - poisson_pmf(3.0, 2)).abs() < 1e-15);
        let (pmf, _) = poisson_pmf_truncated(0.0, 1e-12);
        assert_eq!(pmf, vec![1.0]);
    }
}
