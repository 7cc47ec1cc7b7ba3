//! The basic (same-noise, same-uniform) coupling of two RCAR chains and the
//! diagnostic estimators built on it.
//!
//! Two chains at `(u, v)` are advanced with one shared draw of the thinning
//! noise (the same Beta factors; deterministic for pCN), one shared innovation
//! `ξ`, and one shared uniform `ς` for both accept/reject decisions:
//!
//! ```text
//! u* = ζ_u + ξ,   v* = ζ_v + ξ,
//! u accepts iff ς < α(u, u*),   v accepts iff ς < α(v, v*).
//! ```
//!
//! Each component is marginally a faithful RCAR chain, and the coupling is
//! exact on the diagonal: once the chains meet they stay together. Averages
//! of semimetrics over coupled pairs therefore give upper bounds on transport
//! semimetrics between the marginal laws, which is what the contraction,
//! drift and small-set estimators report.

use alloc::vec::Vec;

use rand::Rng;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::basis::FieldVector;
use crate::error::{Error, Result};
use crate::mh::{acceptance_prob, ProposalKernel};
use crate::potential::Potential;
use crate::rng::RngStream;
use crate::semimetric::{d_s, lyapunov_v, mean_and_se, tilde_d_s, SemimetricParams};

/// Fitted Foster–Lyapunov drift inequality `(PV)(u) ≤ κV(u) + K`.
#[derive(Clone, Copy, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DriftEstimate {
    /// Fitted contraction factor, clamped to `[0, 1)`.
    pub kappa_hat: f64,
    /// Fitted additive constant, clamped to `≥ 0`.
    pub k_hat: f64,
    /// Largest positive violation `(P̂V)(uᵢ) - (κ̂V(uᵢ) + K̂)` over the probe
    /// points (0 when every point lies below the fitted line).
    pub residual: f64,
}

/// One-step contraction estimate `γ̂₁` for a pair of starting points.
#[derive(Clone, Copy, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ContractionEstimate {
    /// Ratio of the mean coupled one-step distance to the initial distance.
    pub gamma1_hat: f64,
    /// 99% confidence half-width of the ratio.
    pub ci_halfwidth: f64,
    /// Number of coupled replicas behind the estimate.
    pub pair_budget: usize,
}

/// Monte Carlo estimate of `(PV)(u)` at one probe point.
#[derive(Clone, Copy, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DriftProbe {
    /// `V(u)` at the probe point.
    pub v_value: f64,
    /// Estimated `(PV)(u)`.
    pub pv_hat: f64,
    /// Standard error of the estimate.
    pub std_err: f64,
}

/// Aggregate coupled distance after `n` steps from sublevel-set starts.
#[derive(Clone, Copy, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SmallsetStats {
    /// Number of coupled steps taken.
    pub n_steps: usize,
    /// Mean of `d_s(u_n, v_n)` over the probed pairs.
    pub mean_d: f64,
    /// 99th percentile of `d_s(u_n, v_n)`.
    pub p99_d: f64,
    /// Standard error of the mean.
    pub std_err: f64,
    /// Number of pairs probed.
    pub pairs: usize,
}

/// One basic coupled step from `(u, v)`.
pub fn basic_coupled_step<P: Potential + ?Sized>(
    u: &FieldVector,
    v: &FieldVector,
    kernel: &ProposalKernel,
    potential: &P,
    rng: &mut RngStream,
) -> Result<(FieldVector, FieldVector)> {
    let psi_u = potential.eval(u)?;
    let psi_v = potential.eval(v)?;
    let (next, _, _) = coupled_step_cached(u, psi_u, v, psi_v, kernel, potential, rng)?;
    Ok(next)
}

#[allow(clippy::too_many_arguments)]
fn coupled_step_cached<P: Potential + ?Sized>(
    u: &FieldVector,
    psi_u: f64,
    v: &FieldVector,
    psi_v: f64,
    kernel: &ProposalKernel,
    potential: &P,
    rng: &mut RngStream,
) -> Result<((FieldVector, FieldVector), f64, f64)> {
    let noise = kernel.draw_thinning_noise(rng)?;
    let xi = kernel.sample_innovation(rng)?;
    let u_star = kernel.apply_thinning(u, &noise).add(&xi);
    let v_star = kernel.apply_thinning(v, &noise).add(&xi);
    let psi_u_star = potential.eval(&u_star)?;
    let psi_v_star = potential.eval(&v_star)?;
    let alpha_u = acceptance_prob(psi_u, psi_u_star)?;
    let alpha_v = acceptance_prob(psi_v, psi_v_star)?;
    let varsigma: f64 = rng.random();
    let (u_next, psi_u_next) = if varsigma < alpha_u {
        (u_star, psi_u_star)
    } else {
        (u.clone(), psi_u)
    };
    let (v_next, psi_v_next) = if varsigma < alpha_v {
        (v_star, psi_v_star)
    } else {
        (v.clone(), psi_v)
    };
    Ok(((u_next, v_next), psi_u_next, psi_v_next))
}

/// Per-step history of a coupled run.
#[derive(Clone, Debug)]
pub struct CoupledTrace {
    /// `d_s(u_k, v_k)` after each step.
    pub d_history: Vec<f64>,
    /// `d̃_s(u_k, v_k)` after each step.
    pub tilde_d_history: Vec<f64>,
    /// `V(u_k)` after each step.
    pub v_u_history: Vec<f64>,
    /// `V(v_k)` after each step.
    pub v_v_history: Vec<f64>,
    /// The pair after the final step.
    pub final_pair: (FieldVector, FieldVector),
}

/// Runs `n` basic coupled steps, recording `d_s`, `d̃_s` and the Lyapunov
/// values of both components after every step.
pub fn run_coupled_chain<P: Potential + ?Sized>(
    u0: FieldVector,
    v0: FieldVector,
    n: usize,
    kernel: &ProposalKernel,
    potential: &P,
    params: &SemimetricParams,
    rng: &mut RngStream,
) -> Result<CoupledTrace> {
    let mut u = u0;
    let mut v = v0;
    let mut psi_u = potential.eval(&u)?;
    let mut psi_v = potential.eval(&v)?;
    let mut d_history = Vec::with_capacity(n);
    let mut tilde_d_history = Vec::with_capacity(n);
    let mut v_u_history = Vec::with_capacity(n);
    let mut v_v_history = Vec::with_capacity(n);
    for _ in 0..n {
        let ((nu, nv), npsi_u, npsi_v) =
            coupled_step_cached(&u, psi_u, &v, psi_v, kernel, potential, rng)?;
        u = nu;
        v = nv;
        psi_u = npsi_u;
        psi_v = npsi_v;
        d_history.push(d_s(&u, &v, params));
        tilde_d_history.push(tilde_d_s(&u, &v, params));
        v_u_history.push(lyapunov_v(&u, params.p));
        v_v_history.push(lyapunov_v(&v, params.p));
    }
    Ok(CoupledTrace {
        d_history,
        tilde_d_history,
        v_u_history,
        v_v_history,
        final_pair: (u, v),
    })
}

/// Estimates the one-step contraction factor
/// `γ̂₁ = E[d_s(u₁, v₁)] / d_s(u, v)` by coupled replicas.
///
/// Requires `0 < d_s(u, v) < 1` (contraction is only defined for nearby
/// pairs). The ratio uses the mean of the coupled distances, matching the
/// transport-bound form of the contraction condition.
pub fn estimate_contraction<P: Potential + ?Sized>(
    u: &FieldVector,
    v: &FieldVector,
    reps: usize,
    kernel: &ProposalKernel,
    potential: &P,
    params: &SemimetricParams,
    rng: &mut RngStream,
) -> Result<ContractionEstimate> {
    let d0 = d_s(u, v, params);
    if d0 == 0.0 {
        return Err(Error::Precondition("initial pair must be distinct"));
    }
    if d0 >= 1.0 {
        return Err(Error::Precondition("initial pair must satisfy d_s < 1"));
    }
    if reps == 0 {
        return Err(Error::EmptyInput("contraction replicas"));
    }
    let psi_u = potential.eval(u)?;
    let psi_v = potential.eval(v)?;
    let mut distances = Vec::with_capacity(reps);
    for _ in 0..reps {
        let ((u1, v1), _, _) = coupled_step_cached(u, psi_u, v, psi_v, kernel, potential, rng)?;
        distances.push(d_s(&u1, &v1, params));
    }
    let (mean, se) = mean_and_se(&distances)?;
    Ok(ContractionEstimate {
        gamma1_hat: mean / d0,
        // 99% normal quantile
        ci_halfwidth: 2.5758293035489004 * se / d0,
        pair_budget: reps,
    })
}

/// Monte Carlo estimate of `(PV)(u)` from `reps ≥ 10³` one-step draws.
pub fn estimate_drift<P: Potential + ?Sized>(
    u: &FieldVector,
    reps: usize,
    kernel: &ProposalKernel,
    potential: &P,
    p_exp: u32,
    rng: &mut RngStream,
) -> Result<DriftProbe> {
    if reps < 1000 {
        return Err(Error::Precondition("drift estimation needs ≥ 1000 replicas"));
    }
    let psi_u = potential.eval(u)?;
    let mut values = Vec::with_capacity(reps);
    for _ in 0..reps {
        let out = crate::mh::rcar_step_cached(u, psi_u, kernel, potential, rng)?;
        values.push(lyapunov_v(&out.next, p_exp));
    }
    let (mean, se) = mean_and_se(&values)?;
    Ok(DriftProbe {
        v_value: lyapunov_v(u, p_exp),
        pv_hat: mean,
        std_err: se,
    })
}

/// Least-squares fit of `(P̂V)(uᵢ)` against `V(uᵢ)` with the slope clamped to
/// `[0, 1)` and the intercept to `≥ 0`.
///
/// Probe estimates spanning several decades of `V` are strongly
/// heteroscedastic, so points are weighted by inverse squared standard error
/// (falling back to equal weights when standard errors are absent).
pub fn fit_drift(probes: &[DriftProbe]) -> Result<DriftEstimate> {
    if probes.len() < 2 {
        return Err(Error::Precondition("drift fit needs at least 2 probe points"));
    }
    let all_se_positive = probes.iter().all(|p| p.std_err > 0.0 && p.std_err.is_finite());
    let weight = |p: &DriftProbe| {
        if all_se_positive {
            1.0 / (p.std_err * p.std_err)
        } else {
            1.0
        }
    };
    let wsum: f64 = probes.iter().map(weight).sum();
    let mean_x = probes.iter().map(|p| weight(p) * p.v_value).sum::<f64>() / wsum;
    let mean_y = probes.iter().map(|p| weight(p) * p.pv_hat).sum::<f64>() / wsum;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for p in probes {
        let w = weight(p);
        sxx += w * (p.v_value - mean_x) * (p.v_value - mean_x);
        sxy += w * (p.v_value - mean_x) * (p.pv_hat - mean_y);
    }
    let raw_slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let kappa_hat = raw_slope.clamp(0.0, 1.0 - 1e-12);
    let k_hat = (mean_y - kappa_hat * mean_x).max(0.0);
    let residual = probes
        .iter()
        .map(|p| p.pv_hat - (kappa_hat * p.v_value + k_hat))
        .fold(0.0_f64, f64::max);
    Ok(DriftEstimate {
        kappa_hat,
        k_hat,
        residual,
    })
}

/// Number of probe points violating the fitted drift line by more than
/// `n_sigma` standard errors.
pub fn drift_violations(probes: &[DriftProbe], fit: &DriftEstimate, n_sigma: f64) -> usize {
    probes
        .iter()
        .filter(|p| p.pv_hat - (fit.kappa_hat * p.v_value + fit.k_hat) > n_sigma * p.std_err)
        .count()
}

/// Coupled distance statistics after `n` steps from pairs drawn in the
/// Lyapunov sublevel set `{V ≤ R}`.
///
/// Pairs are produced by rejection from the supplied prior sampler; an
/// acceptance rate below 0.1% is reported as a configuration error.
#[allow(clippy::too_many_arguments)]
pub fn smallset_probe<P, F>(
    sublevel_r: f64,
    n: usize,
    reps: usize,
    kernel: &ProposalKernel,
    potential: &P,
    params: &SemimetricParams,
    mut prior: F,
    rng: &mut RngStream,
) -> Result<SmallsetStats>
where
    P: Potential + ?Sized,
    F: FnMut(&mut RngStream) -> FieldVector,
{
    if !(sublevel_r > 0.0) {
        return Err(Error::InvalidParameter("sublevel radius must be > 0"));
    }
    if reps == 0 {
        return Err(Error::EmptyInput("small-set replicas"));
    }
    let mut draw_in_sublevel = |rng: &mut RngStream| -> Result<FieldVector> {
        for _ in 0..2000 {
            let candidate = prior(rng);
            if lyapunov_v(&candidate, params.p) <= sublevel_r {
                return Ok(candidate);
            }
        }
        Err(Error::Precondition(
            "sublevel-set rejection rate above 99.9%",
        ))
    };
    let mut distances = Vec::with_capacity(reps);
    for _ in 0..reps {
        let u0 = draw_in_sublevel(rng)?;
        let v0 = draw_in_sublevel(rng)?;
        let d_final = if n == 0 {
            d_s(&u0, &v0, params)
        } else {
            let trace = run_coupled_chain(u0, v0, n, kernel, potential, params, rng)?;
            trace.d_history[n - 1]
        };
        distances.push(d_final);
    }
    let (mean_d, std_err) = mean_and_se(&distances)?;
    let mut sorted = distances;
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("distances are finite"));
    let idx = ((0.99 * (sorted.len() as f64 - 1.0)).round() as usize).min(sorted.len() - 1);
    Ok(SmallsetStats {
        n_steps: n,
        mean_d,
        p99_d: sorted[idx],
        std_err,
        pairs: sorted.len(),
    })
}
