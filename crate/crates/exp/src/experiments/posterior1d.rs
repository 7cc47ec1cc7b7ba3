//! One-dimensional invariant-measure check against an adaptive-quadrature
//! oracle.
//!
//! The Gamma/Beta chain with a quadratic potential targets the density
//! `π(u) ∝ u^{r-1} e^{-u} e^{-Ψ(u)}` exactly, so the post-burn-in histogram
//! can be compared with quadrature bin masses in total variation. The TV
//! distance must fall below the gate at the full step budget and must shrink
//! when the budget grows tenfold.

use std::collections::BTreeMap;

use anyhow::{bail, Result};
use serde::Serialize;

use rcar_core::basis::FieldVector;
use rcar_core::mh::{run_chain_with_rng, ChainConfig, Functional};
use rcar_core::rng::RngStream;

use crate::config::RawConfig;
use crate::quadrature::PosteriorQuadrature;
use crate::report::{build_describe, Summary, Table};
use crate::targets::oracle_1d;

use super::Outcome;

/// Configuration of the 1-D posterior histogram experiment.
#[derive(Clone, Debug)]
pub struct Config {
    /// Gamma prior shape.
    pub r: f64,
    /// Autoregression parameter.
    pub beta: f64,
    /// Center of the quadratic potential (`kind = zero` drops the potential).
    pub center: f64,
    /// Use the zero potential instead of the quadratic one.
    pub zero_potential: bool,
    /// Total chain steps.
    pub n_steps: usize,
    /// Burn-in discarded before binning.
    pub burn_in: usize,
    /// Histogram checkpoints (prefix lengths).
    pub checkpoints: Vec<usize>,
    /// Histogram bins on `(0, hist_max]`.
    pub bins: usize,
    /// Histogram upper edge; mass beyond it is compared against the
    /// quadrature tail.
    pub hist_max: f64,
    /// Also write the recorded trace as CSV.
    pub export_trace: bool,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            r: 0.5,
            beta: 0.5,
            center: 1.0,
            zero_potential: false,
            n_steps: 1_000_000,
            burn_in: 0,
            checkpoints: vec![100_000, 1_000_000],
            bins: 128,
            hist_max: 8.0,
            export_trace: false,
        }
    }
}

impl Config {
    /// Applies config-file overrides.
    pub fn apply(&mut self, raw: &mut RawConfig) -> Result<()> {
        raw.read_f64("kernel", "r", &mut self.r)?;
        raw.read_f64("chain", "beta", &mut self.beta)?;
        raw.read_usize("chain", "n_steps", &mut self.n_steps)?;
        raw.read_usize("chain", "burn_in", &mut self.burn_in)?;
        raw.read_bool("chain", "export_trace", &mut self.export_trace)?;
        let mut kind = if self.zero_potential { "zero" } else { "quadratic" }.to_string();
        raw.read_string("potential", "kind", &mut kind)?;
        self.zero_potential = match kind.as_str() {
            "zero" => true,
            "quadratic" => false,
            other => bail!("potential.kind must be zero or quadratic, got {other}"),
        };
        raw.read_f64("potential", "center", &mut self.center)?;
        let mut checkpoints = self.checkpoints.clone();
        raw.read_usize_list("sweep", "values", &mut checkpoints)?;
        self.checkpoints = checkpoints;
        raw.read_usize("sweep", "bins", &mut self.bins)?;
        raw.read_f64("sweep", "hist_max", &mut self.hist_max)?;
        if self.checkpoints.iter().any(|c| *c > self.n_steps) {
            bail!("sweep.values checkpoints must not exceed chain.n_steps");
        }
        if self.checkpoints.iter().any(|c| *c <= self.burn_in) {
            bail!("sweep.values checkpoints must exceed chain.burn_in");
        }
        Ok(())
    }

    /// Every effective key, defaults included.
    pub fn resolved(&self) -> BTreeMap<String, String> {
        BTreeMap::from([
            ("kernel.r".into(), self.r.to_string()),
            ("chain.beta".into(), self.beta.to_string()),
            ("chain.n_steps".into(), self.n_steps.to_string()),
            ("chain.burn_in".into(), self.burn_in.to_string()),
            ("chain.export_trace".into(), self.export_trace.to_string()),
            (
                "potential.kind".into(),
                if self.zero_potential { "zero" } else { "quadratic" }.into(),
            ),
            ("potential.center".into(), self.center.to_string()),
            (
                "sweep.values".into(),
                self.checkpoints
                    .iter()
                    .map(|c| c.to_string())
                    .collect::<Vec<_>>()
                    .join(","),
            ),
            ("sweep.bins".into(), self.bins.to_string()),
            ("sweep.hist_max".into(), self.hist_max.to_string()),
        ])
    }
}

/// Fitted quantities reported in `summary.json`.
#[derive(Serialize)]
pub struct Body {
    /// TV distance per checkpoint.
    pub tv_by_checkpoint: Vec<(usize, f64)>,
    /// Quadrature posterior mean (the oracle's own sanity value).
    pub oracle_mean: f64,
    /// Chain acceptance rate.
    pub accept_rate: f64,
}

/// Runs the experiment. The chain itself runs once; checkpoints are prefix
/// histograms of the same path.
pub fn run(cfg: &Config, master_seed: u64) -> Result<Outcome<Body>> {
    let (kernel, quad_pot, _) = oracle_1d(cfg.r, cfg.beta, cfg.center, 0.0)?;
    let center = cfg.center;
    let zero = cfg.zero_potential;
    let psi = move |u: f64| {
        if zero {
            0.0
        } else {
            0.5 * (u - center) * (u - center)
        }
    };

    let chain_cfg = ChainConfig::new(cfg.beta, cfg.n_steps, cfg.burn_in, master_seed)?
        .with_record(vec![Functional::Coeff(0)]);
    let mut rng = RngStream::new(master_seed);
    let trace = if cfg.zero_potential {
        run_chain_with_rng(
            FieldVector::scalar(1.0)?,
            &kernel,
            &rcar_core::potential::ZeroPotential,
            &chain_cfg,
            &mut rng,
        )?
    } else {
        run_chain_with_rng(
            FieldVector::scalar(1.0)?,
            &kernel,
            &quad_pot,
            &chain_cfg,
            &mut rng,
        )?
    };
    if let Some(e) = trace.error() {
        bail!("chain failed: {e}");
    }
    let path = trace.column("coeff(0)")?;

    // quadrature oracle
    let quad = PosteriorQuadrature::new(cfg.r, psi, 40.0);
    let edges: Vec<f64> = (0..=cfg.bins)
        .map(|i| i as f64 * cfg.hist_max / cfg.bins as f64)
        .collect();
    let oracle_masses = quad.bin_masses(&edges);
    let oracle_tail = quad.tail_mass(cfg.hist_max);

    let tv_of = |samples: &[f64]| -> f64 {
        let mut counts = vec![0u64; cfg.bins + 1];
        for x in samples {
            let idx = if *x >= cfg.hist_max {
                cfg.bins
            } else {
                ((x / cfg.hist_max) * cfg.bins as f64) as usize
            };
            counts[idx] += 1;
        }
        let n = samples.len() as f64;
        let mut tv = (counts[cfg.bins] as f64 / n - oracle_tail).abs();
        for (i, mass) in oracle_masses.iter().enumerate() {
            tv += (counts[i] as f64 / n - mass).abs();
        }
        0.5 * tv
    };

    let mut table = Table::new(&["parameter", "estimate", "std_err", "n_samples"]);
    let mut tv_by_checkpoint = Vec::new();
    for &cp in &cfg.checkpoints {
        let prefix = &path[cfg.burn_in.min(cp)..cp];
        let tv = tv_of(prefix);
        // moving-block bootstrap standard error of the TV estimate
        let se = block_bootstrap_tv_se(prefix, &tv_of, 50, 1000, master_seed);
        table.push(vec![
            (cp as f64).into(),
            tv.into(),
            se.into(),
            prefix.len().into(),
        ]);
        tv_by_checkpoint.push((cp, tv));
    }

    let last = tv_by_checkpoint.last().expect("checkpoints nonempty");
    let mut strictly_decreasing = true;
    for w in tv_by_checkpoint.windows(2) {
        if w[1].1 >= w[0].1 {
            strictly_decreasing = false;
        }
    }
    let verdicts = BTreeMap::from([
        (
            format!("TV < 0.05 at {} steps", last.0),
            last.1 < 0.05,
        ),
        (
            "TV strictly decreases along checkpoints".to_string(),
            strictly_decreasing,
        ),
    ]);

    let tables = vec![("posterior1d".to_string(), table)];
    let traces = if cfg.export_trace {
        vec![("trace".to_string(), trace.clone())]
    } else {
        Vec::new()
    };

    Ok(Outcome {
        summary: Summary {
            experiment: "posterior1d".into(),
            build: build_describe().into(),
            master_seed,
            config: cfg.resolved(),
            verdicts,
            body: Body {
                tv_by_checkpoint,
                oracle_mean: quad.mean(),
                accept_rate: trace.accept_rate(),
            },
        },
        tables,
        traces,
        data: None,
    })
}

fn block_bootstrap_tv_se(
    samples: &[f64],
    tv_of: &dyn Fn(&[f64]) -> f64,
    replicates: usize,
    block: usize,
    seed: u64,
) -> f64 {
    // short prefixes shrink the block so a standard error always exists
    let block = block.min((samples.len() / 4).max(1));
    let n_blocks = samples.len() / block;
    let mut rng = RngStream::replica(seed, u64::MAX);
    let mut tvs = Vec::with_capacity(replicates);
    let mut buf = vec![0.0; n_blocks * block];
    use rand::Rng;
    for _ in 0..replicates {
        for b in 0..n_blocks {
            let start = rng.random_range(0..samples.len() - block + 1);
            buf[b * block..(b + 1) * block].copy_from_slice(&samples[start..start + block]);
        }
        tvs.push(tv_of(&buf));
    }
    let (_, se_mean) = crate::stats::mean_and_se(&tvs).expect("nonempty");
    // spread of the bootstrap distribution, not the se of its mean
    se_mean * (replicates as f64).sqrt()
}
