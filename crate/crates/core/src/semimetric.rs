//! Growth-weighted semimetrics and the Lyapunov-weighted composites used to
//! measure chain contraction.
//!
//! For scale `ω > 0`, growth weight `η > 0` and exponent `s ≥ 0`,
//!
//! ```text
//! d*(u,v) = (1 + η‖u‖ + η‖v‖)^s ‖u - v‖ / ω,       d_s = 1 ∧ d*,
//! ```
//!
//! and with Lyapunov function `V(u) = ‖u‖^p`, weight `θ > 0`,
//!
//! ```text
//! d̃_s(u,v) = [ d_s(u,v) (2 + θV(u) + θV(v)) ]^{1/2}.
//! ```
//!
//! These are semimetrics, not metrics: symmetric, zero exactly on the
//! diagonal, but without a triangle inequality. `d̃_s` satisfies a weak
//! triangle inequality with some finite constant `G`, which
//! [`weak_triangle_ratio`] measures empirically.
//!
//! Transport distances between measures are never computed exactly here;
//! [`coupled_tilde_d_mean`] returns the coupling upper bound that a paired
//! sample provides, and [`expectation_gap`] compares sample means of a
//! functional with a pooled standard error.

use crate::basis::FieldVector;
use crate::error::{Error, Result};

#[cfg(not(feature = "std"))]
use num_traits::Float;

/// Parameters `(ω, η, s, θ, p)` of the semimetric family.
///
/// The growth exponent `s` should match the potential's Lipschitz exponent
/// `q`; suitable `η` and `ω` are small.
#[derive(Clone, Copy, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SemimetricParams {
    /// Scale `ω` of the norm distance.
    pub omega: f64,
    /// Growth weight `η`.
    pub eta: f64,
    /// Growth exponent `s ≥ 0`.
    pub s: f64,
    /// Lyapunov weight `θ`.
    pub theta: f64,
    /// Lyapunov exponent `p ≥ 1`.
    pub p: u32,
}

impl SemimetricParams {
    /// Validates positivity (`s` may be zero).
    pub fn new(omega: f64, eta: f64, s: f64, theta: f64, p: u32) -> Result<Self> {
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(Error::InvalidParameter("omega must be > 0"));
        }
        if !(eta > 0.0) || !eta.is_finite() {
            return Err(Error::InvalidParameter("eta must be > 0"));
        }
        if !(s >= 0.0) || !s.is_finite() {
            return Err(Error::InvalidParameter("s must be ≥ 0"));
        }
        if !(theta > 0.0) || !theta.is_finite() {
            return Err(Error::InvalidParameter("theta must be > 0"));
        }
        if p < 1 {
            return Err(Error::InvalidParameter("p must be ≥ 1"));
        }
        Ok(Self {
            omega,
            eta,
            s,
            theta,
            p,
        })
    }

    /// Default parameters `ω = 1, η = 0.1, θ = 0.01, p = 2` with the given
    /// growth exponent.
    pub fn with_exponent(s: f64) -> Result<Self> {
        Self::new(1.0, 0.1, s, 0.01, 2)
    }
}

/// Lyapunov function `V(u) = ‖u‖^p`.
pub fn lyapunov_v(u: &FieldVector, p: u32) -> f64 {
    u.h1_norm().powi(p as i32)
}

/// Uncapped growth-weighted distance `d*`.
pub fn d_star(u: &FieldVector, v: &FieldVector, params: &SemimetricParams) -> f64 {
    // grouped so the expression is bit-exactly symmetric in (u, v)
    let growth = 1.0 + params.eta * (u.h1_norm() + v.h1_norm());
    let weight = if params.s == 0.0 {
        1.0
    } else {
        growth.powf(params.s)
    };
    weight * u.h1_dist(v) / params.omega
}

/// Capped semimetric `d_s = 1 ∧ d*`; symmetric and zero iff `u = v`.
pub fn d_s(u: &FieldVector, v: &FieldVector, params: &SemimetricParams) -> f64 {
    d_star(u, v, params).min(1.0)
}

/// Lyapunov-weighted semimetric
/// `d̃_s = sqrt(d_s (2 + θV(u) + θV(v)))`, bounded by
/// `sqrt(2 + θV(u) + θV(v))`.
pub fn tilde_d_s(u: &FieldVector, v: &FieldVector, params: &SemimetricParams) -> f64 {
    let weight = 2.0 + params.theta * (lyapunov_v(u, params.p) + lyapunov_v(v, params.p));
    (d_s(u, v, params) * weight).sqrt()
}

/// Ratio `d̃_s(u,v) / (d̃_s(u,w) + d̃_s(w,v))` whose supremum over triples is
/// the weak triangle constant `G`.
pub fn weak_triangle_ratio(
    u: &FieldVector,
    v: &FieldVector,
    w: &FieldVector,
    params: &SemimetricParams,
) -> Result<f64> {
    let denom = tilde_d_s(u, w, params) + tilde_d_s(w, v, params);
    if denom == 0.0 {
        return Err(Error::Precondition(
            "weak triangle ratio needs w distinct from u or v",
        ));
    }
    Ok(tilde_d_s(u, v, params) / denom)
}

/// Absolute difference of sample means with its pooled standard error.
///
/// A Monte Carlo proxy for the expectation gap `|ν₀(f) - ν_ε(f)|` between two
/// chains' invariant measures.
pub fn expectation_gap(samples_a: &[f64], samples_b: &[f64]) -> Result<(f64, f64)> {
    let (mean_a, se_a) = mean_and_se(samples_a)?;
    let (mean_b, se_b) = mean_and_se(samples_b)?;
    Ok(((mean_a - mean_b).abs(), (se_a * se_a + se_b * se_b).sqrt()))
}

/// Sample mean and standard error of the mean.
pub fn mean_and_se(samples: &[f64]) -> Result<(f64, f64)> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("sample set"));
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() == 1 {
        return Ok((mean, 0.0));
    }
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    Ok((mean, (var / n).sqrt()))
}

/// Mean of `d̃_s` over a paired sample: a coupling upper bound on the
/// transport semimetric between the two marginal laws.
pub fn coupled_tilde_d_mean(
    pairs: &[(FieldVector, FieldVector)],
    params: &SemimetricParams,
) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::EmptyInput("coupled pairs"));
    }
    Ok(pairs
        .iter()
        .map(|(u, v)| tilde_d_s(u, v, params))
        .sum::<f64>()
        / pairs.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use alloc::vec::Vec;

    fn params(s: f64) -> SemimetricParams {
        SemimetricParams::with_exponent(s).unwrap()
    }

    fn state(coeffs: Vec<f64>) -> FieldVector {
        FieldVector::new(coeffs).unwrap()
    }

    #[test]
    fn lyapunov_values() {
        assert_eq!(lyapunov_v(&FieldVector::zero(4), 2), 0.0);
        let u = state(vec![2.0, 0.0]);
        assert_eq!(lyapunov_v(&u, 2), 4.0);
        let w = state(vec![0.3, -1.2, 0.8]);
        assert!((lyapunov_v(&w, 3) - w.h1_norm() * w.h1_norm() * w.h1_norm()).abs() < 1e-12);
    }

    #[test]
    fn d_s_axioms_and_cap() {
        let p = params(1.0);
        let u = state(vec![1.0, -0.5]);
        let v = state(vec![-0.2, 0.7]);
        assert_eq!(d_s(&u, &u, &p), 0.0);
        assert_eq!(d_s(&u, &v, &p), d_s(&v, &u, &p));
        assert!(d_s(&u, &v, &p) > 0.0);
        assert!(d_s(&u, &v, &p) <= 1.0);
        // far-apart states with s = 0 hit the cap
        let p0 = params(0.0);
        let far = state(vec![10.0, 0.0]);
        assert_eq!(d_s(&u, &far, &p0), 1.0);
    }

    #[test]
    fn s_zero_reduces_to_capped_norm() {
        let p = params(0.0);
        let u = state(vec![0.3, 0.1, -0.2]);
        let v = state(vec![0.0, 0.25, 0.2]);
        assert!((d_s(&u, &v, &p) - u.h1_dist(&v).min(1.0)).abs() < 1e-15);
    }

    #[test]
    fn tilde_d_closed_form_case() {
        // capped d = 1, ‖u‖ = ‖v‖ = 1, θ = 1, p = 2 → sqrt(1·(2+1+1)) = 2
        let p = SemimetricParams::new(1e-6, 0.1, 0.0, 1.0, 2).unwrap();
        let u = state(vec![1.0, 0.0]);
        let v = state(vec![0.0, 1.0]);
        assert_eq!(d_s(&u, &v, &p), 1.0);
        assert!((tilde_d_s(&u, &v, &p) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn tilde_d_matches_direct_formula() {
        let p = params(1.0);
        let u = state(vec![0.5, 1.5, -0.4]);
        let v = state(vec![-0.1, 0.2, 2.0]);
        let direct = (d_s(&u, &v, &p)
            * (2.0 + p.theta * lyapunov_v(&u, p.p) + p.theta * lyapunov_v(&v, p.p)))
        .sqrt();
        assert!((tilde_d_s(&u, &v, &p) - direct).abs() < 1e-12);
        assert_eq!(tilde_d_s(&u, &u, &p), 0.0);
    }

    #[test]
    fn weak_triangle_edge_cases() {
        let p = params(0.0);
        let u = state(vec![0.4, 0.0]);
        let v = state(vec![0.0, 0.3]);
        // w = u → ratio exactly 1
        assert!((weak_triangle_ratio(&u, &v, &u, &p).unwrap() - 1.0).abs() < 1e-12);
        // u = v → 0
        assert_eq!(weak_triangle_ratio(&u, &u, &v, &p).unwrap(), 0.0);
        // all equal → zero denominator
        assert!(weak_triangle_ratio(&u, &u, &u, &p).is_err());
    }

    #[test]
    fn expectation_gap_cases() {
        let a = vec![1.0; 32];
        let b = vec![3.0; 32];
        let (gap, se) = expectation_gap(&a, &b).unwrap();
        assert_eq!(gap, 2.0);
        assert_eq!(se, 0.0);
        let (gap0, _) = expectation_gap(&a, &a).unwrap();
        assert_eq!(gap0, 0.0);
        assert!(expectation_gap(&[], &a).is_err());
    }

    #[test]
    fn coupled_mean_examples() {
        let p = params(0.0);
        let u = state(vec![0.2, 0.0]);
        let pairs = vec![(u.clone(), u.clone()); 5];
        assert_eq!(coupled_tilde_d_mean(&pairs, &p).unwrap(), 0.0);
        let v = state(vec![0.0, 0.1]);
        let single = vec![(u.clone(), v.clone())];
        assert_eq!(
            coupled_tilde_d_mean(&single, &p).unwrap(),
            tilde_d_s(&u, &v, &p)
        );
        assert!(coupled_tilde_d_mean(&[], &p).is_err());
    }
}
