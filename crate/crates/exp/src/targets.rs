//! Canonical targets assembled from core pieces: kernels, potentials and
//! priors wired together the way the experiments use them.

use anyhow::Result;

use rcar_core::basis::BasisSpec;
use rcar_core::measures::{
    sample_gamma_prior, CompoundPoissonSpec, GammaPriorSpec, GaussianPriorSpec,
};
use rcar_core::mh::{Innovation, ProposalKernel, Thinning};
use rcar_core::potential::{
    ConvolutionKernel, DeconvPotential, ScalarQuadratic, SslPotential, TailModParams, TailModified,
};
use rcar_core::rng::RngStream;

use crate::synth::{generate_deconv_data, generate_ssl_data};

/// Gamma-prior RCAR target with the sigmoid-observation potential.
pub struct GammaSslTarget {
    /// State basis.
    pub basis: BasisSpec,
    /// Beta-thinning / Gamma-innovation proposal.
    pub kernel: ProposalKernel,
    /// Sigmoid-observation misfit built from synthetic data.
    pub potential: SslPotential,
    /// The product Gamma prior.
    pub prior: GammaPriorSpec,
}

/// Builds the Gamma/Beta chain targeting a sigmoid-observation posterior with
/// synthetic data observed from a prior draw.
pub fn gamma_ssl_target(
    n_modes: usize,
    r: f64,
    beta: f64,
    h: f64,
    sigma: f64,
    n_obs: usize,
    data_seed: u64,
) -> Result<GammaSslTarget> {
    let basis = BasisSpec::new(n_modes)?;
    let prior = GammaPriorSpec::new(r, basis)?;
    let truth = sample_gamma_prior(&prior, &mut RngStream::replica(data_seed, 1));
    let data = generate_ssl_data(basis, &truth, h, sigma, n_obs, data_seed)?;
    let potential = SslPotential::new(data, h, basis)?;
    let kernel = ProposalKernel::new(
        Thinning::Beta { r, beta },
        Innovation::GammaProduct {
            r,
            beta,
            shape_deficit: 0.0,
        },
        basis,
    )?;
    Ok(GammaSslTarget {
        basis,
        kernel,
        potential,
        prior,
    })
}

/// Gaussian-prior pCN target with the sigmoid-observation potential.
pub struct PcnSslTarget {
    /// State basis.
    pub basis: BasisSpec,
    /// pCN proposal.
    pub kernel: ProposalKernel,
    /// Sigmoid-observation misfit built from synthetic data.
    pub potential: SslPotential,
    /// The Gaussian prior.
    pub prior: GaussianPriorSpec,
}

/// Builds the pCN chain targeting a sigmoid-observation posterior with
/// synthetic data observed from a prior draw.
pub fn pcn_ssl_target(
    n_modes: usize,
    beta: f64,
    h: f64,
    sigma: f64,
    n_obs: usize,
    data_seed: u64,
) -> Result<PcnSslTarget> {
    let basis = BasisSpec::new(n_modes)?;
    let prior = GaussianPriorSpec::new(basis);
    let truth = rcar_core::measures::sample_gaussian_prior(&prior, &mut RngStream::replica(data_seed, 1));
    let data = generate_ssl_data(basis, &truth, h, sigma, n_obs, data_seed)?;
    let potential = SslPotential::new(data, h, basis)?;
    let kernel = ProposalKernel::new(
        Thinning::Pcn { beta },
        Innovation::GaussianProduct { beta },
        basis,
    )?;
    Ok(PcnSslTarget {
        basis,
        kernel,
        potential,
        prior,
    })
}

/// Smoothing-convolution misfit with synthetic data, plus the tail-modified
/// variant and the scalars entering its growth inequality.
pub struct DeconvTarget {
    /// State basis.
    pub basis: BasisSpec,
    /// Unmodified quadratic misfit.
    pub potential: DeconvPotential,
    /// Tail-modified misfit.
    pub tail_modified: TailModified<DeconvPotential>,
    /// Tail parameters actually used.
    pub tail_params: TailModParams,
    /// Operator norm `‖G‖` of the forward map.
    pub g_norm: f64,
    /// Contraction scalar `c = b̃(1-β̃)` used in the growth inequality.
    pub contraction_c: f64,
    /// Gamma prior used to draw probe states.
    pub prior: GammaPriorSpec,
}

/// Builds the deconvolution probe target. When `eps_t` or `r0` are `None`
/// the tail slope defaults to 1.25 times the guidance bound
/// `2c²/(1-c²)‖G‖²` and the activation radius to 1.
#[allow(clippy::too_many_arguments)]
pub fn deconv_target(
    n_modes: usize,
    r: f64,
    sigma: f64,
    n_obs: usize,
    data_seed: u64,
    contraction_c: f64,
    eps_t: Option<f64>,
    r0: Option<f64>,
) -> Result<DeconvTarget> {
    let basis = BasisSpec::new(n_modes)?;
    let prior = GammaPriorSpec::new(r, basis)?;
    let truth = sample_gamma_prior(&prior, &mut RngStream::replica(data_seed, 1));
    let conv = ConvolutionKernel::gaussian(basis.max_frequency());
    let data = generate_deconv_data(basis, &conv, &truth, sigma, n_obs, data_seed)?;
    let potential = DeconvPotential::new(conv, data, basis);
    let g_norm = potential.op_norm();
    let eps_t = eps_t.unwrap_or_else(|| 1.25 * TailModParams::guidance_bound(contraction_c, g_norm));
    let r0 = r0.unwrap_or(1.0);
    let tail_params = TailModParams::new(eps_t, r0)?;
    let tail_modified = TailModified::new(potential.clone(), tail_params);
    Ok(DeconvTarget {
        basis,
        potential,
        tail_modified,
        tail_params,
        g_norm,
        contraction_c,
        prior,
    })
}

/// One-dimensional Gamma/Beta oracle chain with quadratic potential; a
/// positive `shape_deficit` removes an exact Gamma convolution factor from
/// the innovation.
pub fn oracle_1d(
    r: f64,
    beta: f64,
    center: f64,
    shape_deficit: f64,
) -> Result<(ProposalKernel, ScalarQuadratic, GammaPriorSpec)> {
    let basis = BasisSpec::new(1)?;
    let kernel = ProposalKernel::new(
        Thinning::Beta { r, beta },
        Innovation::GammaProduct {
            r,
            beta,
            shape_deficit,
        },
        basis,
    )?;
    Ok((
        kernel,
        ScalarQuadratic { center },
        GammaPriorSpec::new(r, basis)?,
    ))
}

/// One-dimensional chain with deterministic thinning and a compound Poisson
/// innovation; `truncated` switches to the small-jump-truncated innovation
/// with threshold `trunc_eps`.
pub fn cp_1d(
    beta: f64,
    rate: f64,
    jump_std: f64,
    trunc_eps: f64,
    truncated: bool,
    center: f64,
) -> Result<(ProposalKernel, ScalarQuadratic)> {
    let basis = BasisSpec::new(1)?;
    let spec = CompoundPoissonSpec::new(rate, jump_std, trunc_eps)?;
    let innovation = if truncated {
        Innovation::TruncatedCompoundPoisson(spec)
    } else {
        Innovation::CompoundPoisson(spec)
    };
    let kernel = ProposalKernel::new(Thinning::Pcn { beta }, innovation, basis)?;
    Ok((kernel, ScalarQuadratic { center }))
}
