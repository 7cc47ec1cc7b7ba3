//! Statistical machinery for the experiment layer: reference CDFs,
//! Kolmogorov–Smirnov tests, batch means, bootstrap resampling and small
//! least-squares fits.

use rand::Rng;
use rcar_core::rng::RngStream;

pub use rcar_core::semimetric::mean_and_se;

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Regularized lower incomplete gamma, i.e. the `Gamma(shape, 1)` CDF.
pub fn gamma_cdf(shape: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    statrs::function::gamma::gamma_lr(shape, x)
}

/// One-sample Kolmogorov–Smirnov statistic against a CDF. Sorts in place.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &mut [f64], cdf: F) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
    let n = samples.len() as f64;
    let mut d = 0.0_f64;
    for (i, x) in samples.iter().enumerate() {
        let f = cdf(*x);
        d = d.max((f - i as f64 / n).abs());
        d = d.max(((i as f64 + 1.0) / n - f).abs());
    }
    d
}

/// Two-sample Kolmogorov–Smirnov statistic. Sorts both slices in place.
pub fn ks_statistic_two_sample(a: &mut [f64], b: &mut [f64]) -> f64 {
    a.sort_by(|x, y| x.partial_cmp(y).expect("finite samples"));
    b.sort_by(|x, y| x.partial_cmp(y).expect("finite samples"));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let mut d = 0.0_f64;
    let (mut i, mut j) = (0usize, 0usize);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

fn kolmogorov_tail(lambda: f64) -> f64 {
    if lambda < 1e-8 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let term = sign * (-2.0 * (k as f64) * (k as f64) * lambda * lambda).exp();
        sum += term;
        sign = -sign;
        if term.abs() < 1e-12 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Asymptotic one-sample KS p-value (Stephens correction).
pub fn ks_p_value(stat: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    kolmogorov_tail((sn + 0.12 + 0.11 / sn) * stat)
}

/// Two-sample KS p-value via the effective sample size.
pub fn ks_p_value_two_sample(stat: f64, na: usize, nb: usize) -> f64 {
    let ne = (na as f64 * nb as f64 / (na as f64 + nb as f64)).sqrt();
    kolmogorov_tail((ne + 0.12 + 0.11 / ne) * stat)
}

/// Asymptotic standard error of the one-sample KS statistic under the null
/// (standard deviation 0.2603 of the Kolmogorov law, scaled by `1/√n`).
pub fn ks_stat_null_se(n: usize) -> f64 {
    0.26032 / (n as f64).sqrt()
}

/// Splits a series into `n_batches` contiguous batches and returns the batch
/// means; the standard tool for standard errors of autocorrelated chains.
pub fn batch_means(samples: &[f64], n_batches: usize) -> Vec<f64> {
    assert!(n_batches >= 2 && samples.len() >= n_batches);
    let len = samples.len() / n_batches;
    (0..n_batches)
        .map(|b| {
            let chunk = &samples[b * len..(b + 1) * len];
            chunk.iter().sum::<f64>() / len as f64
        })
        .collect()
}

/// Mean and batch-means standard error of an autocorrelated series.
pub fn mean_and_batch_se(samples: &[f64], n_batches: usize) -> (f64, f64) {
    let bm = batch_means(samples, n_batches);
    let (mean, se_of_batch_mean) = mean_and_se(&bm).expect("non-empty batches");
    (mean, se_of_batch_mean)
}

/// Mean of a bootstrap resample (with replacement) of `samples`.
pub fn resample_mean(samples: &[f64], rng: &mut RngStream) -> f64 {
    let n = samples.len();
    let mut acc = 0.0;
    for _ in 0..n {
        acc += samples[rng.random_range(0..n)];
    }
    acc / n as f64
}

/// Empirical quantile (linear interpolation on order statistics).
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let pos = q.clamp(0.0, 1.0) * (sorted.len() as f64 - 1.0);
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        let w = pos - lo as f64;
        sorted[lo] * (1.0 - w) + sorted[hi] * w
    }
}

/// Joint bootstrap test that a sweep curve has no significant increase
/// between adjacent points.
///
/// `eval` produces one bootstrap replicate of the whole curve (resampling all
/// underlying data jointly). The curve fails only if for some adjacent pair
/// the `level` quantile of the bootstrapped difference `g[i+1] - g[i]` stays
/// above zero, i.e. an increase is significant at confidence `1 - level`.
pub fn no_significant_increase<F>(b: usize, level: f64, rng: &mut RngStream, eval: F) -> bool
where
    F: Fn(&mut RngStream) -> Vec<f64>,
{
    let mut curves: Vec<Vec<f64>> = Vec::with_capacity(b);
    for _ in 0..b {
        curves.push(eval(rng));
    }
    let len = curves[0].len();
    for i in 0..len.saturating_sub(1) {
        let mut diffs: Vec<f64> = curves.iter().map(|c| c[i + 1] - c[i]).collect();
        diffs.sort_by(|a, b| a.partial_cmp(b).expect("finite diffs"));
        if quantile(&diffs, level) > 0.0 {
            return false;
        }
    }
    true
}

/// Ordinary least squares `y ≈ intercept + slope · x`.
pub fn ols_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    wls_fit(x, y, &vec![1.0; x.len()])
}

/// Weighted least squares `y ≈ intercept + slope · x` with weights `w`.
/// Returns `(intercept, slope)`.
pub fn wls_fit(x: &[f64], y: &[f64], w: &[f64]) -> (f64, f64) {
    assert_eq!(x.len(), y.len());
    assert_eq!(x.len(), w.len());
    let sw: f64 = w.iter().sum();
    let mx: f64 = x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let my: f64 = y.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for i in 0..x.len() {
        sxx += w[i] * (x[i] - mx) * (x[i] - mx);
        sxy += w[i] * (x[i] - mx) * (y[i] - my);
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (my - slope * mx, slope)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_cdf_matches_chi_square_values() {
        // Gamma(1/2, 1) CDF at x relates to the χ²₁ CDF at 2x
        assert!((gamma_cdf(0.5, 0.5) - 0.6826894921370859).abs() < 1e-12);
        assert!((gamma_cdf(2.0, 2.0) - 0.5939941502901619).abs() < 1e-12);
    }

    #[test]
    fn ks_two_sample_identical_is_zero() {
        let mut a = vec![1.0, 2.0, 3.0, 4.0];
        let mut b = a.clone();
        assert_eq!(ks_statistic_two_sample(&mut a, &mut b), 0.0);
    }

    #[test]
    fn wls_recovers_line() {
        let x = vec![1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 - 3.0 * v).collect();
        let (b0, b1) = ols_fit(&x, &y);
        assert!((b0 - 2.0).abs() < 1e-12);
        assert!((b1 + 3.0).abs() < 1e-12);
    }

    #[test]
    fn quantile_interpolates() {
        let v = vec![0.0, 1.0, 2.0, 3.0];
        assert_eq!(quantile(&v, 0.0), 0.0);
        assert_eq!(quantile(&v, 1.0), 3.0);
        assert!((quantile(&v, 0.5) - 1.5).abs() < 1e-12);
    }

    #[test]
    fn monotone_test_accepts_flat_noise_and_rejects_clear_increase() {
        let mut rng = RngStream::new(7);
        // flat: bootstrap of two equal sample sets
        let a = vec![1.0, 1.1, 0.9, 1.05, 0.96, 1.0, 1.02, 0.97];
        let ok = no_significant_increase(500, 0.01, &mut rng, |r| {
            vec![resample_mean(&a, r), resample_mean(&a, r)]
        });
        assert!(ok);
        // strong increase
        let lo = vec![0.0, 0.01, -0.01, 0.0, 0.005, -0.004, 0.0, 0.002];
        let hi: Vec<f64> = lo.iter().map(|v| v + 5.0).collect();
        let bad = no_significant_increase(500, 0.01, &mut rng, |r| {
            vec![resample_mean(&lo, r), resample_mean(&hi, r)]
        });
        assert!(!bad);
    }

    #[test]
    fn batch_means_shape() {
        let s: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let bm = batch_means(&s, 10);
        assert_eq!(bm.len(), 10);
        assert!((bm[0] - 4.5).abs() < 1e-12);
    }
}
