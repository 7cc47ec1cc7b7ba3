//! Convergence diagnostics for a configured target.
//!
//! For the sigmoid-observation target the suite estimates the full battery
//! behind a weak-Harris-style argument:
//!
//! - Lyapunov drift: Monte Carlo `(P̂V)(u)` at probe radii along random
//!   directions, least-squares fitted to `κ̂V + K̂` with `κ̂ < 1` and no probe
//!   above the line beyond 3 standard errors;
//! - one-step `d_q` contraction `γ̂₁ < 1` at 99% confidence for nearby pairs;
//! - small-set probe: coupled chains from sublevel-set starts must reach mean
//!   `d_q < 1` somewhere on a dyadic step grid, with a non-increasing trend;
//! - the weak-triangle constant `Ĝ` over random triples, stable under a
//!   fresh resample.
//!
//! For the deconvolution target the suite runs the tail probe instead: the
//! unmodified smoothing misfit must FAIL the tail-increase check (a large
//! high-frequency component leaves the acceptance ratio near 1), while the
//! tail-modified potential must pass it together with its growth inequality.

use std::collections::BTreeMap;

use anyhow::{bail, Result};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use rcar_core::basis::FieldVector;
use rcar_core::coupling::{
    drift_violations, estimate_contraction, fit_drift, run_coupled_chain, smallset_probe,
    ContractionEstimate, DriftEstimate, DriftProbe, SmallsetStats,
};
use rcar_core::measures::sample_gamma_prior;
use rcar_core::potential::Potential;
use rcar_core::rng::RngStream;
use rcar_core::semimetric::{weak_triangle_ratio, SemimetricParams};

use crate::config::RawConfig;
use crate::report::{build_describe, Summary, Table};
use crate::stats::{mean_and_se, no_significant_increase, quantile};
use crate::targets::{deconv_target, gamma_ssl_target, DeconvTarget, GammaSslTarget};

use super::Outcome;

/// Which target the diagnostics run probes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TargetKind {
    /// Gamma-prior chain with the sigmoid-observation potential.
    Ssl,
    /// Smoothing deconvolution misfit (tail probe, both variants).
    Deconv,
}

/// Configuration of the diagnostics experiment.
#[derive(Clone, Debug)]
pub struct Config {
    /// Probe target.
    pub target: TargetKind,
    /// Number of Fourier modes.
    pub n_modes: usize,
    /// Gamma prior shape.
    pub r: f64,
    /// Autoregression parameter.
    pub beta: f64,
    /// Sigmoid steepness (SSL target).
    pub h: f64,
    /// Observation noise level.
    pub sigma: f64,
    /// Number of observations.
    pub n_obs: usize,
    /// Seed of the synthetic data generator.
    pub data_seed: u64,
    /// Semimetric parameters (growth exponent follows the potential).
    pub params: SemimetricParams,
    /// Drift probe radii.
    pub drift_radii: Vec<f64>,
    /// Random directions per radius.
    pub drift_directions: usize,
    /// One-step replicas per drift probe.
    pub drift_reps: usize,
    /// Nearby pairs for the contraction estimate.
    pub contraction_pairs: usize,
    /// Coupled replicas per pair.
    pub contraction_reps: usize,
    /// Initial distance of the nearby pairs.
    pub pair_distance: f64,
    /// Lyapunov sublevel bound of the small-set probe.
    pub smallset_r: f64,
    /// Coupled pairs in the small-set probe.
    pub smallset_pairs: usize,
    /// Largest dyadic step count probed.
    pub smallset_n_max: usize,
    /// Triples per weak-triangle scan.
    pub triangle_triples: usize,
    /// Tail-probe samples (deconvolution target).
    pub tail_samples: usize,
    /// Contraction scalar `c = b̃(1-β̃)` of the growth inequality.
    pub contraction_c: f64,
    /// Tail slope override (defaults to 1.25x the guidance bound).
    pub eps_t: Option<f64>,
    /// Activation radius override.
    pub r0: Option<f64>,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            target: TargetKind::Ssl,
            n_modes: 64,
            r: 0.5,
            beta: 0.5,
            h: 1.0,
            sigma: 0.5,
            n_obs: 8,
            data_seed: 7,
            params: SemimetricParams::with_exponent(0.0).expect("valid defaults"),
            drift_radii: vec![1.0, 2.0, 5.0, 10.0, 20.0, 50.0],
            drift_directions: 8,
            drift_reps: 10_000,
            contraction_pairs: 16,
            contraction_reps: 10_000,
            pair_distance: 0.25,
            smallset_r: 25.0,
            smallset_pairs: 256,
            smallset_n_max: 256,
            triangle_triples: 100_000,
            tail_samples: 10_000,
            contraction_c: 0.4,
            eps_t: None,
            r0: None,
        }
    }
}

impl Config {
    /// Applies config-file overrides.
    pub fn apply(&mut self, raw: &mut RawConfig) -> Result<()> {
        let mut kind = match self.target {
            TargetKind::Ssl => "ssl",
            TargetKind::Deconv => "deconv",
        }
        .to_string();
        raw.read_string("potential", "kind", &mut kind)?;
        self.target = match kind.as_str() {
            "ssl" => TargetKind::Ssl,
            "deconv" => TargetKind::Deconv,
            other => bail!("potential.kind must be ssl or deconv, got {other}"),
        };
        raw.read_usize("chain", "n_modes", &mut self.n_modes)?;
        raw.read_f64("chain", "beta", &mut self.beta)?;
        raw.read_f64("kernel", "r", &mut self.r)?;
        raw.read_f64("potential", "h", &mut self.h)?;
        raw.read_f64("potential", "sigma", &mut self.sigma)?;
        raw.read_usize("potential", "n_obs", &mut self.n_obs)?;
        raw.read_u64("potential", "data_seed", &mut self.data_seed)?;
        let mut eps_t = f64::NAN;
        raw.read_f64("potential", "eps_t", &mut eps_t)?;
        if eps_t.is_finite() {
            self.eps_t = Some(eps_t);
        }
        let mut r0 = f64::NAN;
        raw.read_f64("potential", "r0", &mut r0)?;
        if r0.is_finite() {
            self.r0 = Some(r0);
        }
        raw.read_f64("semimetric", "omega", &mut self.params.omega)?;
        raw.read_f64("semimetric", "eta", &mut self.params.eta)?;
        raw.read_f64("semimetric", "s", &mut self.params.s)?;
        raw.read_f64("semimetric", "theta", &mut self.params.theta)?;
        let mut p = self.params.p as usize;
        raw.read_usize("semimetric", "p", &mut p)?;
        self.params.p = p as u32;
        raw.read_f64_list("sweep", "values", &mut self.drift_radii)?;
        raw.read_usize("sweep", "replicas_per_probe", &mut self.drift_reps)?;
        Ok(())
    }

    /// Every effective key, defaults included.
    pub fn resolved(&self) -> BTreeMap<String, String> {
        let mut map = BTreeMap::from([
            (
                "potential.kind".to_string(),
                match self.target {
                    TargetKind::Ssl => "ssl".to_string(),
                    TargetKind::Deconv => "deconv".to_string(),
                },
            ),
            ("chain.n_modes".into(), self.n_modes.to_string()),
            ("chain.beta".into(), self.beta.to_string()),
            ("kernel.r".into(), self.r.to_string()),
            ("potential.h".into(), self.h.to_string()),
            ("potential.sigma".into(), self.sigma.to_string()),
            ("potential.n_obs".into(), self.n_obs.to_string()),
            ("potential.data_seed".into(), self.data_seed.to_string()),
            ("semimetric.omega".into(), self.params.omega.to_string()),
            ("semimetric.eta".into(), self.params.eta.to_string()),
            ("semimetric.s".into(), self.params.s.to_string()),
            ("semimetric.theta".into(), self.params.theta.to_string()),
            ("semimetric.p".into(), self.params.p.to_string()),
            (
                "sweep.values".into(),
                self.drift_radii
                    .iter()
                    .map(|r| r.to_string())
                    .collect::<Vec<_>>()
                    .join(","),
            ),
            (
                "sweep.replicas_per_probe".into(),
                self.drift_reps.to_string(),
            ),
        ]);
        if let Some(e) = self.eps_t {
            map.insert("potential.eps_t".into(), e.to_string());
        }
        if let Some(r0) = self.r0 {
            map.insert("potential.r0".into(), r0.to_string());
        }
        map
    }
}

/// Diagnostics summary body: SSL battery or deconvolution tail probe.
#[derive(Serialize)]
#[serde(untagged)]
pub enum Body {
    /// SSL battery.
    Ssl(SslBody),
    /// Deconvolution tail probe.
    Deconv(DeconvBody),
}

/// SSL diagnostics quantities.
#[derive(Serialize)]
pub struct SslBody {
    /// Fitted drift inequality.
    pub drift: DriftEstimate,
    /// Probe points with violations counted at 3 standard errors.
    pub drift_violations_3se: usize,
    /// Contraction estimates per nearby pair.
    pub contraction: Vec<ContractionEstimate>,
    /// Official small-set statistics at the first contracted step count.
    pub smallset: Option<SmallsetStats>,
    /// Weak-triangle constant of the first scan.
    pub g_hat: f64,
    /// Largest ratio of the fresh scan.
    pub g_fresh: f64,
}

/// Deconvolution tail-probe quantities.
#[derive(Serialize)]
pub struct DeconvBody {
    /// Operator norm of the forward map.
    pub g_norm: f64,
    /// Tail slope in use.
    pub eps_t: f64,
    /// Guidance lower bound on the slope.
    pub guidance_bound: f64,
    /// Fraction of probes the unmodified potential leaves near ratio 1.
    pub unmodified_near_one_fraction: f64,
    /// Fraction of probes the tail-modified potential suppresses below 1e-6.
    pub modified_suppressed_fraction: f64,
    /// Growth-inequality violations over the sampled pairs.
    pub growth_violations: usize,
}

/// Runs the experiment.
pub fn run(cfg: &Config, master_seed: u64) -> Result<Outcome<Body>> {
    match cfg.target {
        TargetKind::Ssl => run_ssl(cfg, master_seed),
        TargetKind::Deconv => run_deconv(cfg, master_seed),
    }
}

fn run_ssl(cfg: &Config, master_seed: u64) -> Result<Outcome<Body>> {
    let target = gamma_ssl_target(
        cfg.n_modes,
        cfg.r,
        cfg.beta,
        cfg.h,
        cfg.sigma,
        cfg.n_obs,
        cfg.data_seed,
    )?;

    // ---- Lyapunov drift -------------------------------------------------
    // Probe points sit on a geometric radius grid along random directions of
    // the state space (sign-symmetric, so the drift condition is probed over
    // all of H, not just the positive cone the prior charges).
    let mut probe_points: Vec<FieldVector> = Vec::new();
    {
        let gaussian = rcar_core::measures::GaussianPriorSpec::new(target.basis);
        let mut rng = RngStream::replica(master_seed, 1);
        for _ in 0..cfg.drift_directions {
            let dir = rcar_core::measures::sample_gaussian_prior(&gaussian, &mut rng);
            let unit = dir.scale(1.0 / dir.h1_norm());
            for radius in &cfg.drift_radii {
                probe_points.push(unit.scale(*radius));
            }
        }
    }
    let direction_probes: Vec<DriftProbe> = probe_points
        .par_iter()
        .enumerate()
        .map(|(i, u)| {
            let mut rng = RngStream::replica(master_seed, 100 + i as u64);
            rcar_core::coupling::estimate_drift(
                u,
                cfg.drift_reps,
                &target.kernel,
                &target.potential,
                cfg.params.p,
                &mut rng,
            )
            .expect("drift probe")
        })
        .collect();
    // aggregate per radius: the direction-to-direction spread enters the
    // standard error of the radius-level estimate
    let probes: Vec<DriftProbe> = cfg
        .drift_radii
        .iter()
        .enumerate()
        .map(|(k, radius)| {
            let ests: Vec<f64> = (0..cfg.drift_directions)
                .map(|d| direction_probes[d * cfg.drift_radii.len() + k].pv_hat)
                .collect();
            let (pv_hat, std_err) = mean_and_se(&ests).expect("nonempty");
            DriftProbe {
                v_value: radius.powi(cfg.params.p as i32),
                pv_hat,
                std_err,
            }
        })
        .collect();
    let drift = fit_drift(&probes)?;
    let violations = drift_violations(&probes, &drift, 3.0);

    let mut drift_table = Table::new(&["parameter", "estimate", "std_err", "n_samples"]);
    for p in &probes {
        drift_table.push(vec![
            p.v_value.into(),
            p.pv_hat.into(),
            p.std_err.into(),
            (cfg.drift_reps * cfg.drift_directions).into(),
        ]);
    }

    // ---- one-step contraction on nearby pairs ---------------------------
    let contraction: Vec<ContractionEstimate> = (0..cfg.contraction_pairs)
        .into_par_iter()
        .map(|i| {
            let mut rng = RngStream::replica(master_seed, 10_000 + i as u64);
            let u = sample_gamma_prior(&target.prior, &mut rng);
            let dir = sample_gamma_prior(&target.prior, &mut rng);
            let v = u.add(&dir.scale(cfg.pair_distance / dir.h1_norm()));
            estimate_contraction(
                &u,
                &v,
                cfg.contraction_reps,
                &target.kernel,
                &target.potential,
                &cfg.params,
                &mut rng,
            )
            .expect("contraction estimate")
        })
        .collect();
    let mut contraction_table = Table::new(&["parameter", "estimate", "std_err", "n_samples"]);
    for (i, c) in contraction.iter().enumerate() {
        contraction_table.push(vec![
            (i as f64).into(),
            c.gamma1_hat.into(),
            (c.ci_halfwidth / 2.5758293035489004).into(),
            c.pair_budget.into(),
        ]);
    }
    let contraction_ok = contraction
        .iter()
        .all(|c| c.gamma1_hat + c.ci_halfwidth < 1.0);

    // ---- small sets: coupled distance along a dyadic grid ---------------
    let checkpoints: Vec<usize> = (0..)
        .map(|e| 1usize << e)
        .take_while(|n| *n <= cfg.smallset_n_max)
        .collect();
    let histories: Vec<Vec<f64>> = (0..cfg.smallset_pairs)
        .into_par_iter()
        .map(|i| {
            let mut rng = RngStream::replica(master_seed, 20_000 + i as u64);
            let draw_in = |rng: &mut RngStream| loop {
                let u = sample_gamma_prior(&target.prior, rng);
                if rcar_core::semimetric::lyapunov_v(&u, cfg.params.p) <= cfg.smallset_r {
                    return u;
                }
            };
            let u0 = draw_in(&mut rng);
            let v0 = draw_in(&mut rng);
            let trace = run_coupled_chain(
                u0,
                v0,
                cfg.smallset_n_max,
                &target.kernel,
                &target.potential,
                &cfg.params,
                &mut rng,
            )
            .expect("coupled chain");
            checkpoints.iter().map(|n| trace.d_history[n - 1]).collect()
        })
        .collect();

    let mut smallset_table = Table::new(&["parameter", "estimate", "std_err", "n_samples", "p99"]);
    let mut means = Vec::new();
    for (k, n) in checkpoints.iter().enumerate() {
        let vals: Vec<f64> = histories.iter().map(|h| h[k]).collect();
        let (mean, se) = mean_and_se(&vals)?;
        let mut sorted = vals.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        smallset_table.push(vec![
            (*n as f64).into(),
            mean.into(),
            se.into(),
            vals.len().into(),
            quantile(&sorted, 0.99).into(),
        ]);
        means.push((*n, mean));
    }
    let contracted_at = means.iter().find(|(_, m)| *m < 1.0).map(|(n, _)| *n);
    let mut rng_trend = RngStream::replica(master_seed, u64::MAX - 5);
    let smallset_trend = no_significant_increase(1000, 0.01, &mut rng_trend, |r| {
        let n = histories.len();
        let mut sums = vec![0.0; checkpoints.len()];
        for _ in 0..n {
            let h = &histories[r.random_range(0..n)];
            for (s, v) in sums.iter_mut().zip(h) {
                *s += v;
            }
        }
        sums.iter().map(|s| s / n as f64).collect()
    });

    // the official probe statistics at the first contracted step count
    let smallset_official = contracted_at
        .map(|n| {
            let mut rng = RngStream::replica(master_seed, 30_000);
            smallset_probe(
                cfg.smallset_r,
                n,
                cfg.smallset_pairs,
                &target.kernel,
                &target.potential,
                &cfg.params,
                |r| sample_gamma_prior(&target.prior, r),
                &mut rng,
            )
        })
        .transpose()?;

    // ---- weak triangle constant -----------------------------------------
    let (g_hat, g_hat_se) = triangle_scan(cfg, &target, master_seed, 40_000)?;
    let (g_fresh, g_fresh_se) = triangle_scan(cfg, &target, master_seed, 50_000)?;
    let mut triangle_table = Table::new(&["parameter", "estimate", "std_err", "n_samples"]);
    triangle_table.push(vec![0.0.into(), g_hat.into(), g_hat_se.into(), cfg.triangle_triples.into()]);
    triangle_table.push(vec![1.0.into(), g_fresh.into(), g_fresh_se.into(), cfg.triangle_triples.into()]);

    let verdicts = BTreeMap::from([
        (
            "drift: kappa_hat < 1 with zero 3-sigma violations".to_string(),
            drift.kappa_hat < 1.0 && violations == 0,
        ),
        (
            "contraction: gamma1_hat < 1 at 99% confidence on all pairs".to_string(),
            contraction_ok,
        ),
        (
            format!("small set: mean d_q < 1 at some n <= {}", cfg.smallset_n_max),
            contracted_at.is_some(),
        ),
        (
            "small set: non-increasing trend in n (99% bootstrap)".to_string(),
            smallset_trend,
        ),
        (
            "weak triangle: G_hat finite and fresh scan within 2x".to_string(),
            g_hat.is_finite() && g_fresh <= 2.0 * g_hat,
        ),
    ]);

    Ok(Outcome {
        summary: Summary {
            experiment: "diagnostics".into(),
            build: build_describe().into(),
            master_seed,
            config: cfg.resolved(),
            verdicts,
            body: Body::Ssl(SslBody {
                drift,
                drift_violations_3se: violations,
                contraction,
                smallset: smallset_official,
                g_hat,
                g_fresh,
            }),
        },
        tables: vec![
            ("diagnostics_drift".into(), drift_table),
            ("diagnostics_contraction".into(), contraction_table),
            ("diagnostics_smallset".into(), smallset_table),
            ("diagnostics_weak_triangle".into(), triangle_table),
        ],
        traces: Vec::new(),
        data: Some(target.potential.data().clone()),
    })
}

/// Max weak-triangle ratio over prior triples plus a bootstrap standard
/// error of the maximum.
fn triangle_scan(
    cfg: &Config,
    target: &GammaSslTarget,
    master_seed: u64,
    stream: u64,
) -> Result<(f64, f64)> {
    let mut rng = RngStream::replica(master_seed, stream);
    let mut ratios = Vec::with_capacity(cfg.triangle_triples);
    for _ in 0..cfg.triangle_triples {
        let u = sample_gamma_prior(&target.prior, &mut rng);
        let v = sample_gamma_prior(&target.prior, &mut rng);
        let w = sample_gamma_prior(&target.prior, &mut rng);
        ratios.push(weak_triangle_ratio(&u, &v, &w, &cfg.params)?);
    }
    let g = ratios.iter().fold(0.0_f64, |a, b| a.max(*b));
    // bootstrap spread of the maximum
    let mut maxes = Vec::with_capacity(200);
    for _ in 0..200 {
        let mut m = 0.0_f64;
        for _ in 0..ratios.len() {
            m = m.max(ratios[rng.random_range(0..ratios.len())]);
        }
        maxes.push(m);
    }
    let (_, se) = mean_and_se(&maxes)?;
    Ok((g, se * (maxes.len() as f64).sqrt()))
}

fn run_deconv(cfg: &Config, master_seed: u64) -> Result<Outcome<Body>> {
    let target = deconv_target(
        cfg.n_modes,
        cfg.r,
        cfg.sigma,
        cfg.n_obs,
        cfg.data_seed,
        cfg.contraction_c,
        cfg.eps_t,
        cfg.r0,
    )?;
    let bound =
        rcar_core::potential::TailModParams::guidance_bound(cfg.contraction_c, target.g_norm);
    if !target.tail_params.meets_guidance(cfg.contraction_c, target.g_norm) {
        eprintln!(
            "warning: eps_t = {} is below the guidance bound {bound}; the growth inequality may fail",
            target.tail_params.eps_t
        );
    }

    let tail = tail_probe(cfg, &target, master_seed)?;
    let growth_violations = growth_scan(cfg, &target, master_seed)?;

    let mut probe_table = Table::new(&["potential", "statistic", "estimate", "std_err", "n_samples"]);
    let n = cfg.tail_samples;
    let binom_se = |p: f64| (p * (1.0 - p) / n as f64).sqrt();
    probe_table.push(vec![
        "unmodified".into(),
        "near_one_fraction".into(),
        tail.unmodified_near_one.into(),
        binom_se(tail.unmodified_near_one).into(),
        n.into(),
    ]);
    probe_table.push(vec![
        "unmodified".into(),
        "median_ratio".into(),
        tail.unmodified_median.into(),
        tail.unmodified_median_se.into(),
        n.into(),
    ]);
    probe_table.push(vec![
        "tail-modified".into(),
        "suppressed_fraction".into(),
        tail.modified_suppressed.into(),
        binom_se(tail.modified_suppressed).into(),
        n.into(),
    ]);

    let verdicts = BTreeMap::from([
        (
            "unmodified potential FAILS the tail-increase probe".to_string(),
            tail.unmodified_near_one >= 0.99,
        ),
        (
            "tail-modified potential suppresses tail moves".to_string(),
            tail.modified_suppressed == 1.0,
        ),
        (
            "growth inequality holds on all sampled pairs".to_string(),
            growth_violations == 0,
        ),
        (
            "eps_t exceeds the guidance bound".to_string(),
            target.tail_params.meets_guidance(cfg.contraction_c, target.g_norm),
        ),
    ]);

    Ok(Outcome {
        summary: Summary {
            experiment: "diagnostics".into(),
            build: build_describe().into(),
            master_seed,
            config: cfg.resolved(),
            verdicts,
            body: Body::Deconv(DeconvBody {
                g_norm: target.g_norm,
                eps_t: target.tail_params.eps_t,
                guidance_bound: bound,
                unmodified_near_one_fraction: tail.unmodified_near_one,
                modified_suppressed_fraction: tail.modified_suppressed,
                growth_violations,
            }),
        },
        tables: vec![("diagnostics_tail_probe".into(), probe_table)],
        traces: Vec::new(),
        data: Some(target.potential.data().clone()),
    })
}

struct TailProbe {
    unmodified_near_one: f64,
    unmodified_median: f64,
    unmodified_median_se: f64,
    modified_suppressed: f64,
}

/// Adds a large top-frequency component (norm ratio ≥ 10) to prior draws and
/// compares the acceptance ratios `exp(Ψ(u) - Ψ(u + δu))` of both potentials.
fn tail_probe(cfg: &Config, target: &DeconvTarget, master_seed: u64) -> Result<TailProbe> {
    let results: Vec<(f64, f64)> = (0..cfg.tail_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = RngStream::replica(master_seed, 60_000 + i as u64);
            let draw = sample_gamma_prior(&target.prior, &mut rng);
            // place the state at or beyond the activation radius
            let scale_to = target.tail_params.r0.max(target.tail_params.activation_radius())
                * (1.0 + rng.random::<f64>());
            let u = draw.scale(scale_to / draw.h1_norm());
            let mut coeffs = u.coeffs().to_vec();
            let top = coeffs.len() - 1;
            coeffs[top] += 10.0 * u.h1_norm();
            let perturbed = FieldVector::new(coeffs).expect("finite");

            let base_ratio = (target.potential.eval(&u).expect("finite")
                - target.potential.eval(&perturbed).expect("finite"))
            .exp();
            let mod_ratio = (target.tail_modified.eval(&u).expect("finite")
                - target.tail_modified.eval(&perturbed).expect("finite"))
            .exp();
            (base_ratio, mod_ratio)
        })
        .collect();

    let near_one = results
        .iter()
        .filter(|(b, _)| (0.9..=1.1).contains(b))
        .count() as f64
        / results.len() as f64;
    let suppressed = results.iter().filter(|(_, m)| *m <= 1e-6).count() as f64
        / results.len() as f64;
    let mut base: Vec<f64> = results.iter().map(|(b, _)| *b).collect();
    base.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let median = quantile(&base, 0.5);
    // order-statistic standard error of the median
    let median_se = 1.2533 * {
        let (_, se) = mean_and_se(&base)?;
        se
    };
    Ok(TailProbe {
        unmodified_near_one: near_one,
        unmodified_median: median,
        unmodified_median_se: median_se,
        modified_suppressed: suppressed,
    })
}

/// Counts violations of
/// `Ψ_ε(u) - Ψ_ε(v) ≥ (ε - c²(2‖G‖² + ε))‖u‖² - 2‖y‖₂²`
/// over pairs with `‖u‖ ≥ R₀`, `‖v‖ ≤ c‖u‖`.
fn growth_scan(cfg: &Config, target: &DeconvTarget, master_seed: u64) -> Result<usize> {
    let eps = target.tail_params.eps_t;
    let c = cfg.contraction_c;
    let lead = eps - c * c * (2.0 * target.g_norm * target.g_norm + eps);
    let y_sq: f64 = target.potential.data().values().iter().map(|y| y * y).sum();
    let violations = (0..cfg.tail_samples)
        .into_par_iter()
        .filter(|i| {
            let mut rng = RngStream::replica(master_seed, 70_000 + *i as u64);
            let ru = target.tail_params.r0 * (1.0 + 9.0 * rng.random::<f64>());
            let du = sample_gamma_prior(&target.prior, &mut rng);
            let u = du.scale(ru / du.h1_norm());
            let rv = c * ru * rng.random::<f64>();
            let dv = sample_gamma_prior(&target.prior, &mut rng);
            let v = dv.scale(rv / dv.h1_norm());
            let lhs = target.tail_modified.eval(&u).expect("finite")
                - target.tail_modified.eval(&v).expect("finite");
            lhs < lead * ru * ru - 2.0 * y_sq
        })
        .count();
    Ok(violations)
}
