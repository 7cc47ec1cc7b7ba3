//! # rcar-core
//!
//! Random coefficient autoregressive (RCAR) Metropolis–Hastings kernels for
//! sampling measures of the form `dν/dμ ∝ exp(-Ψ)` on a function space, where
//! the reference measure `μ` may be non-Gaussian.
//!
//! An RCAR proposal thins the current state through a kernel `K_β` and adds an
//! independent innovation `ξ ~ μ_β`:
//!
//! ```text
//! v = ζ + ξ,    ζ ~ K_β(u, ·),    ξ ~ μ_β,
//! ```
//!
//! and the move is accepted with probability `1 ∧ exp(Ψ(u) - Ψ(v))`. The
//! preconditioned Crank–Nicolson (pCN) algorithm is the special case with
//! deterministic thinning `ζ = βu` and Gaussian innovation; the Gamma/Beta
//! pairing handles Gamma product priors.
//!
//! Beyond the samplers themselves, the crate provides the machinery used to
//! measure how such chains converge:
//!
//! - growth-weighted semimetrics `d_s` and their Lyapunov-weighted variants
//!   `d̃_s` ([`semimetric`]),
//! - the basic (same-noise, same-uniform) coupling of two chains and the
//!   estimators built on it: one-step contraction rates, Lyapunov drift fits,
//!   and small-set probes ([`coupling`]),
//! - exactly splittable innovation measures (compound Poisson with small-jump
//!   truncation, Gamma convolution factors) for studying perturbed kernels
//!   ([`measures`]).
//!
//! States live in a fixed real Fourier basis of `H¹(𝕋)` normalized so that
//! coefficient vectors carry the Sobolev norm directly ([`basis`]). All
//! randomness flows through explicitly seeded [`rng::RngStream`] values, so
//! every run is reproducible bit for bit.
//!
//! The crate is `no_std`-compatible (requires `alloc`); the default `std`
//! feature only switches the float math backend.

#![cfg_attr(not(feature = "std"), no_std)]
#![warn(missing_docs)]
// parameter guards use `!(x > 0.0)` so NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod basis;
pub mod coupling;
pub mod error;
pub mod measures;
pub mod mh;
pub mod potential;
pub mod rng;
pub mod semimetric;

pub use basis::{BasisSpec, FieldVector};
pub use error::{Error, Result};
pub use mh::{ChainConfig, ChainTrace, Functional, Innovation, ProposalKernel, Thinning};
pub use potential::Potential;
pub use rng::RngStream;
pub use semimetric::SemimetricParams;
