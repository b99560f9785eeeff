//! Gaussian states (mean + covariance) and linear quadrature combinations.

use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::mode::{ModeLabel, Quadrature, QuadratureOrdering};
use crate::symplectic::{symplectic_form, SymplecticTransform};

/// Variance of each quadrature of the vacuum, from `[x, p] = i/2`.
pub const VACUUM_VARIANCE: f64 = 0.25;

pub const SYMMETRY_TOL: f64 = 1e-12;
pub const UNCERTAINTY_TOL: f64 = 1e-9;

/// Real coefficient vector `u` defining `û = Σ u_k R_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureCombination {
    coefficients: DVector<f64>,
    label: String,
}

impl QuadratureCombination {
    pub fn new(coefficients: DVector<f64>, label: impl Into<String>) -> Result<Self> {
        let label = label.into();
        if coefficients.iter().all(|&c| c == 0.0) {
            return Err(Error::Validation(alloc::format!(
                "combination '{label}' has no nonzero coefficient"
            )));
        }
        Ok(Self {
            coefficients,
            label,
        })
    }

    /// Sums `weight · quadrature` terms; repeated quadratures accumulate.
    pub fn from_terms(
        ordering: &QuadratureOrdering,
        label: impl Into<String>,
        terms: &[(ModeLabel, Quadrature, f64)],
    ) -> Result<Self> {
        let mut c = DVector::zeros(ordering.dim());
        for &(mode, q, w) in terms {
            c[ordering.index(mode, q)?] += w;
        }
        Self::new(c, label)
    }

    pub fn coefficients(&self) -> &DVector<f64> {
        &self.coefficients
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }
}

/// The scalar `c` in `[û, v̂] = i c`, i.e. `½ uᵀ J v`.
pub fn commutator_coefficient(u: &QuadratureCombination, v: &QuadratureCombination) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::shape("commutator", u.len(), v.len()));
    }
    if !u.len().is_multiple_of(2) {
        return Err(Error::shape("commutator (even length)", u.len() + 1, u.len()));
    }
    let (u, v) = (u.coefficients(), v.coefficients());
    let mut acc = 0.0;
    for k in 0..u.len() / 2 {
        acc += u[2 * k] * v[2 * k + 1] - u[2 * k + 1] * v[2 * k];
    }
    Ok(0.5 * acc)
}

/// Mean plus covariance, with the covariance kept as `F · C0 · Fᵀ`.
///
/// `C0` is the covariance the state was created with and `F` accumulates every
/// transform applied since. Variances are evaluated as `(Fᵀu)ᵀ C0 (Fᵀu)`, which
/// keeps exact cancellations exact when `F` mixes strongly antisqueezed
/// quadratures; [`GaussianState::cov`] materializes the product.
#[derive(Debug, Clone)]
pub struct GaussianState {
    ordering: QuadratureOrdering,
    mean: DVector<f64>,
    factor: DMatrix<f64>,
    base: DMatrix<f64>,
}

/// Compares moments, not factorizations.
impl PartialEq for GaussianState {
    fn eq(&self, other: &Self) -> bool {
        self.ordering == other.ordering && self.mean == other.mean && self.cov() == other.cov()
    }
}

impl GaussianState {
    /// Validates shape, symmetry and the uncertainty relation.
    pub fn new(ordering: QuadratureOrdering, mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let n = ordering.dim();
        if mean.len() != n {
            return Err(Error::shape("state mean", n, mean.len()));
        }
        if cov.nrows() != n || cov.ncols() != n {
            return Err(Error::shape("state covariance", n, cov.nrows().max(cov.ncols())));
        }
        let asym = (&cov - cov.transpose()).amax();
        if asym > SYMMETRY_TOL {
            return Err(Error::NotSymmetric(asym));
        }
        let state = Self {
            ordering,
            mean,
            factor: DMatrix::identity(n, n),
            base: cov,
        };
        let margin = state.uncertainty_margin();
        if margin < -UNCERTAINTY_TOL {
            return Err(Error::UncertaintyViolated(margin));
        }
        Ok(state)
    }

    pub fn vacuum(ordering: QuadratureOrdering) -> Self {
        let n = ordering.dim();
        Self {
            ordering,
            mean: DVector::zeros(n),
            factor: DMatrix::identity(n, n),
            base: DMatrix::from_diagonal_element(n, n, VACUUM_VARIANCE),
        }
    }

    pub fn ordering(&self) -> &QuadratureOrdering {
        &self.ordering
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> DMatrix<f64> {
        let c = &self.factor * &self.base * self.factor.transpose();
        (&c + c.transpose()) * 0.5
    }

    /// `mean' = S mean`, `cov' = S cov Sᵀ`.
    pub fn apply(&self, s: &SymplecticTransform) -> Result<Self> {
        if s.dim() != self.ordering.dim() {
            return Err(Error::shape("transform application", self.ordering.dim(), s.dim()));
        }
        let m = s.matrix();
        Ok(Self {
            ordering: self.ordering.clone(),
            mean: m * &self.mean,
            factor: m * &self.factor,
            base: self.base.clone(),
        })
    }

    pub fn displaced(&self, delta: &DVector<f64>) -> Result<Self> {
        if delta.len() != self.mean.len() {
            return Err(Error::shape("displacement", self.mean.len(), delta.len()));
        }
        Ok(Self {
            ordering: self.ordering.clone(),
            mean: &self.mean + delta,
            factor: self.factor.clone(),
            base: self.base.clone(),
        })
    }

    /// `uᵀ cov u`; the mean never enters.
    pub fn variance(&self, u: &QuadratureCombination) -> Result<f64> {
        if u.len() != self.ordering.dim() {
            return Err(Error::shape("variance", self.ordering.dim(), u.len()));
        }
        let w = self.factor.tr_mul(u.coefficients());
        Ok(w.dot(&(&self.base * &w)))
    }

    pub fn expectation(&self, u: &QuadratureCombination) -> Result<f64> {
        if u.len() != self.ordering.dim() {
            return Err(Error::shape("expectation", self.ordering.dim(), u.len()));
        }
        Ok(u.coefficients().dot(&self.mean))
    }

    /// Smallest eigenvalue of the Hermitian matrix `cov + (i/4) J`; nonnegative
    /// for physical states, zero for pure ones.
    pub fn uncertainty_margin(&self) -> f64 {
        // A + iB is PSD iff [[A, -B], [B, A]] is; the real form doubles each eigenvalue.
        let n = self.ordering.dim();
        let cov = self.cov();
        let b = symplectic_form(self.ordering.n_modes()) * VACUUM_VARIANCE;
        let mut big = DMatrix::zeros(2 * n, 2 * n);
        big.view_mut((0, 0), (n, n)).copy_from(&cov);
        big.view_mut((n, n), (n, n)).copy_from(&cov);
        big.view_mut((0, n), (n, n)).copy_from(&(-&b));
        big.view_mut((n, 0), (n, n)).copy_from(&b);
        SymmetricEigen::new(big).eigenvalues.min()
    }

    /// Restriction to `modes`, in the given order.
    pub fn reduced(&self, modes: &[ModeLabel]) -> Result<Self> {
        let ordering = QuadratureOrdering::new(modes.to_vec())?;
        let idx = modes
            .iter()
            .map(|&m| self.ordering.position(m))
            .collect::<Result<Vec<_>>>()?;
        let quad: Vec<usize> = idx.iter().flat_map(|&k| [2 * k, 2 * k + 1]).collect();
        Ok(Self {
            ordering,
            mean: self.mean.select_rows(&quad),
            factor: self.factor.select_rows(&quad),
            base: self.base.clone(),
        })
    }

    /// Tensor product with a vacuum on `extra` appended after the existing modes.
    pub fn with_vacuum_modes(&self, extra: &[ModeLabel]) -> Result<Self> {
        let mut modes = self.ordering.modes().to_vec();
        modes.extend_from_slice(extra);
        let ordering = QuadratureOrdering::new(modes)?;
        let add = 2 * extra.len();
        let (n0, k0) = self.factor.shape();
        let mut mean = DVector::zeros(n0 + add);
        mean.rows_mut(0, n0).copy_from(&self.mean);
        let mut factor = DMatrix::zeros(n0 + add, k0 + add);
        factor.view_mut((0, 0), (n0, k0)).copy_from(&self.factor);
        factor.view_mut((n0, k0), (add, add)).fill_with_identity();
        let mut base = DMatrix::from_diagonal_element(k0 + add, k0 + add, VACUUM_VARIANCE);
        base.view_mut((0, 0), (k0, k0)).copy_from(&self.base);
        Ok(Self {
            ordering,
            mean,
            factor,
            base,
        })
    }
}
