//! Likelihood potentials `Ψ` and their tail / projection modifications.
//!
//! Four families are provided:
//!
//! - [`SslPotential`]: sigmoid-observation misfit
//!   `Ψ(u) = (2σ²)^{-1} Σ_j (tanh(h u(x_j)) - y_j)²`, globally Lipschitz.
//! - [`DeconvPotential`]: quadratic misfit `½‖G(u) - y‖²` of a smoothing
//!   convolution forward map acting diagonally on the Fourier basis.
//! - [`TailModified`]: adds the growth term `max{0, ε‖u‖² - R₀²}`, which
//!   vanishes near the origin and restores uniform tail growth for strongly
//!   smoothing forward maps.
//! - [`Projected`]: evaluates the base potential on the spectral projection
//!   of the state, the standard Galerkin-type discretization.
//!
//! Potentials are immutable and evaluation is pure.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::basis::{BasisSpec, FieldVector};
use crate::error::{Error, Result};

#[cfg(not(feature = "std"))]
use num_traits::Float;

/// Evaluator for a likelihood potential `Ψ` plus the metadata the semimetric
/// layer needs.
pub trait Potential {
    /// Evaluates `Ψ(u)`.
    fn eval(&self, u: &FieldVector) -> Result<f64>;

    /// Local Lipschitz exponent `q` in
    /// `|Ψ(u) - Ψ(v)| ≤ L (1 ∨ ‖u‖^q ∨ ‖v‖^q) ‖u - v‖`.
    ///
    /// Used as the growth exponent `s` of the matching semimetric.
    fn lipschitz_q(&self) -> f64;
}

impl<P: Potential + ?Sized> Potential for &P {
    fn eval(&self, u: &FieldVector) -> Result<f64> {
        (**self).eval(u)
    }

    fn lipschitz_q(&self) -> f64 {
        (**self).lipschitz_q()
    }
}

/// The trivial potential `Ψ ≡ 0`; every proposal is accepted.
#[derive(Clone, Copy, Debug, Default)]
pub struct ZeroPotential;

impl Potential for ZeroPotential {
    fn eval(&self, _u: &FieldVector) -> Result<f64> {
        Ok(0.0)
    }

    fn lipschitz_q(&self) -> f64 {
        0.0
    }
}

/// Quadratic potential `Ψ(u) = ½ (u₀ - center)²` acting on the leading
/// coefficient; the standard one-dimensional oracle target.
#[derive(Clone, Copy, Debug)]
pub struct ScalarQuadratic {
    /// Center of the quadratic well.
    pub center: f64,
}

impl Potential for ScalarQuadratic {
    fn eval(&self, u: &FieldVector) -> Result<f64> {
        let d = u.coeff(0) - self.center;
        Ok(0.5 * d * d)
    }

    fn lipschitz_q(&self) -> f64 {
        1.0
    }
}

/// Observation locations, data values and noise level.
#[derive(Clone, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ObservationData {
    points: Vec<f64>,
    values: Vec<f64>,
    sigma: f64,
}

impl ObservationData {
    /// Validates distinct finite points in `[0, 2π)`, finite values matching
    /// in length, and `σ > 0`.
    pub fn new(points: Vec<f64>, values: Vec<f64>, sigma: f64) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyInput("observation points"));
        }
        if points.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: points.len(),
                actual: values.len(),
            });
        }
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidParameter("noise sigma must be > 0"));
        }
        if points.iter().any(|x| !x.is_finite() || *x < 0.0 || *x >= 2.0 * PI) {
            return Err(Error::InvalidParameter(
                "observation points must lie in [0, 2π)",
            ));
        }
        if values.iter().any(|y| !y.is_finite()) {
            return Err(Error::NonFinite("observation value"));
        }
        for i in 0..points.len() {
            for j in (i + 1)..points.len() {
                if points[i] == points[j] {
                    return Err(Error::InvalidParameter("observation points must be distinct"));
                }
            }
        }
        Ok(Self {
            points,
            values,
            sigma,
        })
    }

    /// Observation locations.
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Observed values.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Noise standard deviation.
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Number of observations.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// Always false; construction rejects empty data.
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Sigmoid-observation potential
/// `Ψ(u) = (2σ²)^{-1} Σ_j (tanh(h u(x_j)) - y_j)²`.
///
/// Bounded above by `(2σ²)^{-1} Σ_j (1 + |y_j|)²` since `tanh ∈ (-1, 1)`, and
/// globally Lipschitz in `u` (exponent `q = 0`).
#[derive(Clone, Debug)]
pub struct SslPotential {
    data: ObservationData,
    h: f64,
    basis: BasisSpec,
}

impl SslPotential {
    /// Validates the sigmoid steepness `h > 0`.
    pub fn new(data: ObservationData, h: f64, basis: BasisSpec) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::InvalidParameter("sigmoid steepness h must be > 0"));
        }
        Ok(Self { data, h, basis })
    }

    /// Observation data.
    pub fn data(&self) -> &ObservationData {
        &self.data
    }

    /// Sigmoid steepness.
    pub fn h(&self) -> f64 {
        self.h
    }
}

impl Potential for SslPotential {
    fn eval(&self, u: &FieldVector) -> Result<f64> {
        let inv = 0.5 / (self.data.sigma * self.data.sigma);
        let mut acc = 0.0;
        for (x, y) in self.data.points.iter().zip(&self.data.values) {
            let g = (self.h * self.basis.evaluate_at(u, *x)?).tanh();
            acc += (g - y) * (g - y);
        }
        let psi = inv * acc;
        if !psi.is_finite() {
            return Err(Error::NonFinite("potential value"));
        }
        Ok(psi)
    }

    fn lipschitz_q(&self) -> f64 {
        0.0
    }
}

/// Fourier multipliers of a smooth convolution kernel `g` on the circle.
///
/// Entry `k` is the cosine-series coefficient `ĝ_k` of
/// `g(x) = Σ_k ĝ_k cos(kx)`; frequencies beyond the stored symbol are treated
/// as zero.
#[derive(Clone, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConvolutionKernel {
    symbol: Vec<f64>,
}

impl ConvolutionKernel {
    /// Wraps a symbol, rejecting negative or non-finite entries.
    pub fn new(symbol: Vec<f64>) -> Result<Self> {
        if symbol.is_empty() {
            return Err(Error::EmptyInput("convolution symbol"));
        }
        if symbol.iter().any(|s| !s.is_finite() || *s < 0.0) {
            return Err(Error::InvalidParameter(
                "convolution symbol entries must be finite and ≥ 0",
            ));
        }
        Ok(Self { symbol })
    }

    /// Gaussian symbol `ĝ_k = exp(-k²/2)` up to `max_freq`; a rapidly
    /// smoothing kernel.
    pub fn gaussian(max_freq: u32) -> Self {
        let symbol = (0..=max_freq)
            .map(|k| (-0.5 * (k as f64) * (k as f64)).exp())
            .collect();
        Self { symbol }
    }

    /// Symbol scaled so that every retained multiplier equals one; the
    /// forward map then degenerates to pointwise evaluation.
    pub fn identity(max_freq: u32) -> Self {
        let symbol = (0..=max_freq)
            .map(|k| if k == 0 { 0.5 / PI } else { 1.0 / PI })
            .collect();
        Self { symbol }
    }

    /// Raw symbol entries.
    pub fn symbol(&self) -> &[f64] {
        &self.symbol
    }

    /// Diagonal multiplier on the coefficient pair at frequency `k`:
    /// `2π ĝ_0` for the constant mode and `π ĝ_k` for `k ≥ 1`.
    pub fn multiplier(&self, k: u32) -> f64 {
        let s = self.symbol.get(k as usize).copied().unwrap_or(0.0);
        if k == 0 {
            2.0 * PI * s
        } else {
            PI * s
        }
    }

    /// Kernel values `g(x) = Σ_k ĝ_k cos(kx)` reconstructed from the symbol.
    pub fn kernel_value(&self, x: f64) -> f64 {
        self.symbol
            .iter()
            .enumerate()
            .map(|(k, s)| s * ((k as f64) * x).cos())
            .sum()
    }
}

/// Forward convolution observations `(g ∗ u)(x_i)`.
///
/// The convolution acts diagonally on the Fourier basis, so each coefficient
/// is scaled by its frequency multiplier before pointwise evaluation; the map
/// is linear in `u`.
pub fn deconv_forward(
    kernel: &ConvolutionKernel,
    basis: BasisSpec,
    u: &FieldVector,
    points: &[f64],
) -> Result<Vec<f64>> {
    let scaled: Vec<f64> = u
        .coeffs()
        .iter()
        .enumerate()
        .map(|(j, c)| c * kernel.multiplier(basis.frequency(j)))
        .collect();
    let scaled = FieldVector::new(scaled).map_err(|_| Error::NonFinite("scaled state"))?;
    points.iter().map(|x| basis.evaluate_at(&scaled, *x)).collect()
}

/// Quadratic deconvolution potential `Ψ(u) = ½ ‖G(u) - y‖₂²`.
///
/// Zero exactly when the data equals the forward image. The noise level in
/// the attached data is used only for data generation; the misfit itself is
/// unweighted.
#[derive(Clone, Debug)]
pub struct DeconvPotential {
    kernel: ConvolutionKernel,
    data: ObservationData,
    basis: BasisSpec,
}

impl DeconvPotential {
    /// Bundles a convolution forward map with observation data.
    pub fn new(kernel: ConvolutionKernel, data: ObservationData, basis: BasisSpec) -> Self {
        Self {
            kernel,
            data,
            basis,
        }
    }

    /// Forward observations `G(u)`.
    pub fn forward(&self, u: &FieldVector) -> Result<Vec<f64>> {
        deconv_forward(&self.kernel, self.basis, u, &self.data.points)
    }

    /// Observation data.
    pub fn data(&self) -> &ObservationData {
        &self.data
    }

    /// Operator norm `‖G‖` of the forward map on the truncated space,
    /// estimated by power iteration on `GᵀG`.
    pub fn op_norm(&self) -> f64 {
        let n = self.basis.n_modes();
        let m = self.data.points.len();
        // rows of G in coefficient space
        let mut rows = Vec::with_capacity(m);
        for x in &self.data.points {
            let row: Vec<f64> = (0..n)
                .map(|j| self.kernel.multiplier(self.basis.frequency(j)) * self.basis.eval_mode(j, *x))
                .collect();
            rows.push(row);
        }
        let mut v = alloc::vec![1.0 / (n as f64).sqrt(); n];
        let mut sigma_sq = 0.0;
        for _ in 0..100 {
            // w = Gᵀ(Gv)
            let gv: Vec<f64> = rows
                .iter()
                .map(|row| row.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>())
                .collect();
            let mut w = alloc::vec![0.0; n];
            for (row, g) in rows.iter().zip(&gv) {
                for (wj, rj) in w.iter_mut().zip(row) {
                    *wj += rj * g;
                }
            }
            let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 {
                return 0.0;
            }
            sigma_sq = norm;
            for (vj, wj) in v.iter_mut().zip(&w) {
                *vj = wj / norm;
            }
        }
        sigma_sq.sqrt()
    }
}

impl Potential for DeconvPotential {
    fn eval(&self, u: &FieldVector) -> Result<f64> {
        let fwd = self.forward(u)?;
        if fwd.len() != self.data.values.len() {
            return Err(Error::DimensionMismatch {
                expected: self.data.values.len(),
                actual: fwd.len(),
            });
        }
        let psi = 0.5
            * fwd
                .iter()
                .zip(&self.data.values)
                .map(|(f, y)| (f - y) * (f - y))
                .sum::<f64>();
        if !psi.is_finite() {
            return Err(Error::NonFinite("potential value"));
        }
        Ok(psi)
    }

    fn lipschitz_q(&self) -> f64 {
        1.0
    }
}

/// Parameters of the tail growth term `max{0, ε‖u‖² - R₀²}`.
#[derive(Clone, Copy, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TailModParams {
    /// Tail slope `ε`.
    pub eps_t: f64,
    /// Activation radius scale `R₀`.
    pub r0: f64,
}

impl TailModParams {
    /// Validates both parameters strictly positive.
    pub fn new(eps_t: f64, r0: f64) -> Result<Self> {
        if !(eps_t > 0.0) || !eps_t.is_finite() {
            return Err(Error::InvalidParameter("tail slope eps_t must be > 0"));
        }
        if !(r0 > 0.0) || !r0.is_finite() {
            return Err(Error::InvalidParameter("activation radius R0 must be > 0"));
        }
        Ok(Self { eps_t, r0 })
    }

    /// Lower bound `2c²/(1-c²) ‖G‖²` that `eps_t` must exceed for the tail
    /// growth inequality to have a positive leading coefficient.
    pub fn guidance_bound(contraction_c: f64, g_norm: f64) -> f64 {
        2.0 * contraction_c * contraction_c / (1.0 - contraction_c * contraction_c)
            * g_norm
            * g_norm
    }

    /// Whether `eps_t` exceeds the guidance bound for the supplied scalars.
    pub fn meets_guidance(&self, contraction_c: f64, g_norm: f64) -> bool {
        self.eps_t > Self::guidance_bound(contraction_c, g_norm)
    }

    /// Norm radius `R₀/√ε` at which the tail term activates.
    pub fn activation_radius(&self) -> f64 {
        self.r0 / self.eps_t.sqrt()
    }
}

/// Base potential plus the tail growth term `max{0, ε‖u‖² - R₀²}`.
///
/// Equals the base exactly on the ball `‖u‖ ≤ R₀/√ε`, so chain dynamics near
/// the origin are unchanged.
#[derive(Clone, Debug)]
pub struct TailModified<P> {
    base: P,
    params: TailModParams,
}

impl<P: Potential> TailModified<P> {
    /// Wraps a base potential.
    pub fn new(base: P, params: TailModParams) -> Self {
        Self { base, params }
    }

    /// Tail parameters.
    pub fn params(&self) -> TailModParams {
        self.params
    }

    /// The wrapped potential.
    pub fn base(&self) -> &P {
        &self.base
    }
}

impl<P: Potential> Potential for TailModified<P> {
    fn eval(&self, u: &FieldVector) -> Result<f64> {
        let norm = u.h1_norm();
        let tail = (self.params.eps_t * norm * norm - self.params.r0 * self.params.r0).max(0.0);
        Ok(self.base.eval(u)? + tail)
    }

    fn lipschitz_q(&self) -> f64 {
        // the quadratic tail term has linear growth of its local Lipschitz
        // constant
        self.base.lipschitz_q().max(1.0)
    }
}

/// Base potential evaluated on the spectral projection `Π_m u`.
#[derive(Clone, Debug)]
pub struct Projected<P> {
    base: P,
    m_cut: usize,
}

impl<P: Potential> Projected<P> {
    /// Evaluates `base` on the first `m_cut` modes of the state.
    pub fn new(base: P, m_cut: usize) -> Self {
        Self { base, m_cut }
    }

    /// Projection cutoff.
    pub fn m_cut(&self) -> usize {
        self.m_cut
    }
}

impl<P: Potential> Potential for Projected<P> {
    fn eval(&self, u: &FieldVector) -> Result<f64> {
        if self.m_cut >= u.len() {
            return self.base.eval(u);
        }
        self.base.eval(&u.project(self.m_cut))
    }

    fn lipschitz_q(&self) -> f64 {
        self.base.lipschitz_q()
    }
}
