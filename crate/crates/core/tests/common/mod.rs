//! Shared statistical oracles for the integration tests.
//!
//! Everything here is coded independently of the sampling paths it checks:
//! CDFs come from series/continued-fraction evaluations of the incomplete
//! gamma function and `erfc`, not from any distribution crate.

#![allow(dead_code)]

/// Regularized lower incomplete gamma `P(a, x)`, series for `x < a + 1` and
/// continued fraction otherwise (Numerical Recipes style).
pub fn gamma_cdf(shape: f64, x: f64) -> f64 {
    assert!(shape > 0.0);
    if x <= 0.0 {
        return 0.0;
    }
    if x < shape + 1.0 {
        gamma_p_series(shape, x)
    } else {
        1.0 - gamma_q_cont_frac(shape, x)
    }
}

fn gamma_p_series(a: f64, x: f64) -> f64 {
    let ln_ga = libm::lgamma(a);
    let mut ap = a;
    let mut sum = 1.0 / a;
    let mut del = sum;
    for _ in 0..500 {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if del.abs() < sum.abs() * 1e-16 {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_ga).exp()
}

fn gamma_q_cont_frac(a: f64, x: f64) -> f64 {
    let ln_ga = libm::lgamma(a);
    let tiny = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..500 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-x + a * x.ln() - ln_ga).exp() * h
}

/// Standard normal CDF via `erfc`.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / core::f64::consts::SQRT_2)
}

/// One-sample Kolmogorov–Smirnov statistic `sup |F̂ - F|`.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &mut [f64], cdf: F) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
    let n = samples.len() as f64;
    let mut d = 0.0_f64;
    for (i, x) in samples.iter().enumerate() {
        let f = cdf(*x);
        let lo = (f - i as f64 / n).abs();
        let hi = ((i as f64 + 1.0) / n - f).abs();
        d = d.max(lo).max(hi);
    }
    d
}

/// Two-sample Kolmogorov–Smirnov statistic.
pub fn ks_statistic_two_sample(a: &mut [f64], b: &mut [f64]) -> f64 {
    a.sort_by(|x, y| x.partial_cmp(y).expect("finite samples"));
    b.sort_by(|x, y| x.partial_cmp(y).expect("finite samples"));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let mut d = 0.0_f64;
    let (mut i, mut j) = (0usize, 0usize);
    while i < a.len() && j < b.len() {
        let xa = a[i];
        let xb = b[j];
        let x = xa.min(xb);
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

/// Asymptotic Kolmogorov–Smirnov p-value with the Stephens small-sample
/// correction.
pub fn ks_p_value(stat: f64, n: usize) -> f64 {
    let sqrt_n = (n as f64).sqrt();
    let lambda = (sqrt_n + 0.12 + 0.11 / sqrt_n) * stat;
    kolmogorov_tail(lambda)
}

/// Two-sample KS p-value using the effective sample size `na nb / (na + nb)`.
pub fn ks_p_value_two_sample(stat: f64, na: usize, nb: usize) -> f64 {
    let ne = (na as f64) * (nb as f64) / (na as f64 + nb as f64);
    let sqrt_ne = ne.sqrt();
    let lambda = (sqrt_ne + 0.12 + 0.11 / sqrt_ne) * stat;
    kolmogorov_tail(lambda)
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

/// Sample mean and standard error.
pub fn mean_se(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
