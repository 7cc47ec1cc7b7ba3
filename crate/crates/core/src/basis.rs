//! Finite-dimensional representation of `H¹(𝕋)` functions.
//!
//! Functions on the circle `𝕋 = [0, 2π)` are stored as coefficient vectors in
//! a real Fourier basis normalized in the `H¹` inner product
//! `⟨u, v⟩ = ∫ uv + u'v' dx`. The mode ordering is fixed:
//!
//! ```text
//! φ_0 = (2π)^{-1/2}
//! φ_{2k-1}(x) = (π(1+k²))^{-1/2} cos(kx),   k = 1, 2, ...
//! φ_{2k}(x)   = (π(1+k²))^{-1/2} sin(kx)
//! ```
//!
//! With this normalization the basis is orthonormal in `H¹(𝕋)`, so the
//! squared Sobolev norm of a truncated expansion is just the sum of squared
//! coefficients (Parseval), and a covariance with eigenvalues
//! `λ = (1+k²)^{-1}` is diagonal in it.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};

#[cfg(not(feature = "std"))]
use num_traits::Float;

/// Truncated real Fourier basis of `H¹(𝕋)`.
///
/// Stores only the number of retained modes; frequencies, covariance
/// eigenvalues and normalization amplitudes are derived from the fixed mode
/// ordering `[const, cos 1, sin 1, cos 2, sin 2, ...]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BasisSpec {
    n_modes: usize,
}

impl BasisSpec {
    /// Basis truncated to `n_modes` functions.
    pub fn new(n_modes: usize) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::InvalidParameter("n_modes must be positive"));
        }
        Ok(Self { n_modes })
    }

    /// Number of retained basis functions.
    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    /// Integer frequency `k` of mode `j` (0 for the constant mode).
    pub fn frequency(&self, j: usize) -> u32 {
        if j == 0 {
            0
        } else {
            j.div_ceil(2) as u32
        }
    }

    /// Largest frequency present in the truncation.
    pub fn max_frequency(&self) -> u32 {
        self.frequency(self.n_modes - 1)
    }

    /// Covariance eigenvalue `λ_j = (1 + k_j²)^{-1}` of mode `j`.
    ///
    /// Cosine and sine modes at the same frequency share an eigenvalue.
    pub fn eigenvalue(&self, j: usize) -> f64 {
        let k = self.frequency(j) as f64;
        1.0 / (1.0 + k * k)
    }

    /// `H¹` normalization amplitude of mode `j`.
    pub fn amplitude(&self, j: usize) -> f64 {
        if j == 0 {
            1.0 / (2.0 * PI).sqrt()
        } else {
            let k = self.frequency(j) as f64;
            1.0 / (PI * (1.0 + k * k)).sqrt()
        }
    }

    /// Pointwise value `φ_j(x)`.
    pub fn eval_mode(&self, j: usize, x: f64) -> f64 {
        let a = self.amplitude(j);
        let k = self.frequency(j) as f64;
        if j == 0 {
            a
        } else if j % 2 == 1 {
            a * (k * x).cos()
        } else {
            a * (k * x).sin()
        }
    }

    /// Pointwise derivative `φ_j'(x)`.
    pub fn eval_mode_deriv(&self, j: usize, x: f64) -> f64 {
        let a = self.amplitude(j);
        let k = self.frequency(j) as f64;
        if j == 0 {
            0.0
        } else if j % 2 == 1 {
            -a * k * (k * x).sin()
        } else {
            a * k * (k * x).cos()
        }
    }

    /// Evaluates the expansion `Σ_j coeffs_j φ_j(x)` at a point of `𝕋`.
    ///
    /// The result is 2π-periodic in `x`. Rejects non-finite `x`.
    pub fn evaluate_at(&self, u: &FieldVector, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::NonFinite("evaluation point"));
        }
        assert_eq!(u.len(), self.n_modes, "state length must match basis");
        // Recurrences for cos(kx)/sin(kx) keep this O(n) without repeated
        // trig calls: the cos/sin pair at k+1 follows from the pair at k.
        let (sin_x, cos_x) = (x.sin(), x.cos());
        let mut cos_kx = 1.0;
        let mut sin_kx = 0.0;
        let mut acc = u.coeffs[0] * self.amplitude(0);
        let mut j = 1;
        while j < self.n_modes {
            let next_cos = cos_kx * cos_x - sin_kx * sin_x;
            let next_sin = sin_kx * cos_x + cos_kx * sin_x;
            cos_kx = next_cos;
            sin_kx = next_sin;
            let a = self.amplitude(j);
            acc += u.coeffs[j] * a * cos_kx;
            if j + 1 < self.n_modes {
                acc += u.coeffs[j + 1] * a * sin_kx;
            }
            j += 2;
        }
        Ok(acc)
    }
}

/// Coefficient vector of a function in the `H¹`-orthonormal Fourier basis.
///
/// Every entry is finite; construction rejects NaN and infinities. Values are
/// immutable after construction and all operations are pure, so states can be
/// shared freely across concurrent replicas.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FieldVector {
    coeffs: Vec<f64>,
}

impl FieldVector {
    /// Wraps a coefficient vector, rejecting non-finite entries.
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::EmptyInput("coefficient vector"));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("field coefficient"));
        }
        Ok(Self { coeffs })
    }

    /// The zero function on `n` modes.
    pub fn zero(n: usize) -> Self {
        Self {
            coeffs: vec![0.0; n],
        }
    }

    /// Scalar state for one-dimensional chains (a single constant mode).
    pub fn scalar(value: f64) -> Result<Self> {
        Self::new(vec![value])
    }

    /// Number of coefficients.
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    /// True when the vector has no coefficients (never constructible).
    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient slice.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Single coefficient.
    pub fn coeff(&self, j: usize) -> f64 {
        self.coeffs[j]
    }

    /// `H¹(𝕋)` norm: `sqrt(Σ_j coeffs_j²)` by Parseval in the orthonormal
    /// basis. Zero exactly when the state is the zero function.
    pub fn h1_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// `H¹` distance `‖u - v‖` without allocating the difference.
    ///
    /// Panics if the lengths differ.
    pub fn h1_dist(&self, other: &Self) -> f64 {
        assert_eq!(self.len(), other.len(), "state lengths must match");
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// Coefficient-wise sum. Panics if the lengths differ.
    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.len(), other.len(), "state lengths must match");
        Self {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    /// Coefficient-wise difference. Panics if the lengths differ.
    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.len(), other.len(), "state lengths must match");
        Self {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    /// Scalar multiple.
    pub fn scale(&self, factor: f64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    /// Projection onto the span of the first `m_cut` basis functions: those
    /// coefficients are preserved, the rest set to zero. Idempotent; a cutoff
    /// at or beyond the truncation acts as the identity.
    pub fn project(&self, m_cut: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        for c in coeffs.iter_mut().skip(m_cut) {
            *c = 0.0;
        }
        Self { coeffs }
    }

    /// Consumes the state, returning its coefficients.
    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norm_zero_and_unit_vectors() {
        assert_eq!(FieldVector::zero(8).h1_norm(), 0.0);
        let mut e1 = vec![0.0; 8];
        e1[0] = 1.0;
        assert_eq!(FieldVector::new(e1).unwrap().h1_norm(), 1.0);
    }

    #[test]
    fn norm_pythagoras() {
        let u = FieldVector::new(vec![3.0, 4.0, 0.0, 0.0]).unwrap();
        assert_eq!(u.h1_norm(), 5.0);
    }

    #[test]
    fn non_finite_coefficient_rejected() {
        assert_eq!(
            FieldVector::new(vec![1.0, f64::NAN]),
            Err(Error::NonFinite("field coefficient"))
        );
        assert!(FieldVector::new(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn projection_identity_full_and_zero() {
        let u = FieldVector::new(vec![1.0, -2.0, 3.0, 0.5]).unwrap();
        assert_eq!(u.project(4), u);
        assert_eq!(u.project(9), u);
        assert_eq!(u.project(0), FieldVector::zero(4));
        // idempotence
        assert_eq!(u.project(3).project(3), u.project(3));
    }

    #[test]
    fn evaluate_constant_mode() {
        let basis = BasisSpec::new(5).unwrap();
        let c = 2.5;
        let mut coeffs = vec![0.0; 5];
        coeffs[0] = c;
        let u = FieldVector::new(coeffs).unwrap();
        let expect = c / (2.0 * PI).sqrt();
        for &x in &[0.0, 1.0, 3.7] {
            assert!((basis.evaluate_at(&u, x).unwrap() - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn evaluate_zero_everywhere() {
        let basis = BasisSpec::new(7).unwrap();
        let u = FieldVector::zero(7);
        assert_eq!(basis.evaluate_at(&u, 1.3).unwrap(), 0.0);
    }

    #[test]
    fn evaluate_periodic() {
        let basis = BasisSpec::new(9).unwrap();
        let u = FieldVector::new((0..9).map(|j| 0.3 * (j as f64) - 1.0).collect()).unwrap();
        for &x in &[0.0, 0.4, 2.0, 5.9] {
            let a = basis.evaluate_at(&u, x).unwrap();
            let b = basis.evaluate_at(&u, x + 2.0 * PI).unwrap();
            assert!((a - b).abs() < 1e-12, "not periodic at x={x}: {a} vs {b}");
        }
    }

    #[test]
    fn evaluate_rejects_non_finite_point() {
        let basis = BasisSpec::new(3).unwrap();
        let u = FieldVector::zero(3);
        assert!(basis.evaluate_at(&u, f64::NAN).is_err());
    }

    #[test]
    fn evaluate_matches_direct_trig() {
        // The cos/sin recurrence must agree with naive per-mode evaluation.
        let basis = BasisSpec::new(11).unwrap();
        let u = FieldVector::new((0..11).map(|j| ((j * 7 + 3) % 5) as f64 - 2.0).collect()).unwrap();
        for &x in &[0.1, 1.7, 4.2] {
            let direct: f64 = (0..11).map(|j| u.coeff(j) * basis.eval_mode(j, x)).sum();
            assert!((basis.evaluate_at(&u, x).unwrap() - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn mode_ordering_and_eigenvalues() {
        let basis = BasisSpec::new(6).unwrap();
        assert_eq!(
            (0..6).map(|j| basis.frequency(j)).collect::<Vec<_>>(),
            vec![0, 1, 1, 2, 2, 3]
        );
        assert_eq!(basis.eigenvalue(0), 1.0);
        assert_eq!(basis.eigenvalue(1), 0.5);
        assert_eq!(basis.eigenvalue(2), 0.5);
        assert_eq!(basis.eigenvalue(3), 0.2);
        // non-increasing along the ordering, all in (0, 1]
        for j in 1..6 {
            assert!(basis.eigenvalue(j) <= basis.eigenvalue(j - 1));
            assert!(basis.eigenvalue(j) > 0.0);
        }
    }

    /// Numerical-quadrature H¹ norm of every basis mode equals 1.
    #[test]
    fn modes_are_h1_normalized() {
        let basis = BasisSpec::new(41).unwrap();
        let n = 4096;
        let h = 2.0 * PI / n as f64;
        for j in 0..41 {
            let mut acc = 0.0;
            for i in 0..n {
                let x = i as f64 * h;
                let f = basis.eval_mode(j, x);
                let df = basis.eval_mode_deriv(j, x);
                acc += (f * f + df * df) * h;
            }
            assert!(
                (acc.sqrt() - 1.0).abs() < 1e-6,
                "mode {j} has quadrature H1 norm {}",
                acc.sqrt()
            );
        }
    }
}
