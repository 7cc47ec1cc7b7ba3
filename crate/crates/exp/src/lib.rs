//! Experiment drivers, statistical gates and file formats around
//! `rcar-core`.
//!
//! Six experiments turn the sampler family's convergence and perturbation
//! behaviour into measurable curves with pass/fail gates:
//!
//! - `reversibility`: one-step prior stationarity of the proposal kernels,
//!   with a deliberately broken kernel as negative control;
//! - `posterior1d`: total-variation distance of a one-dimensional chain's
//!   histogram from an adaptive-quadrature oracle;
//! - `perturb-projection`: one-step and stationary gaps of pCN with a
//!   spectrally projected potential, swept over the cutoff;
//! - `perturb-innovation`: remainder moments and stationary gaps under
//!   small-jump truncation of a compound Poisson innovation;
//! - `mse-curve`: mean-squared error and bias of Cesàro averages in
//!   `(n, ε)` with plateau/slope fits;
//! - `diagnostics`: Lyapunov drift, one-step contraction, small-set probes
//!   and the weak-triangle constant, plus the deconvolution tail probe.
//!
//! Every experiment is reproducible bit for bit from its config and master
//! seed; sweep CSVs and `summary.json` files are written by a single
//! collector after a deterministic merge.

#![warn(missing_docs)]
// parameter guards use `!(x > 0.0)` so NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod experiments;
pub mod quadrature;
pub mod report;
pub mod stats;
pub mod synth;
pub mod targets;
