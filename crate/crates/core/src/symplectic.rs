//! Symplectic form, validation and the transform newtype.
//!
//! Quadratures obey `[R_i, R_j] = (i/2) J_ij` with `J` block-diagonal in
//! `[[0, 1], [-1, 0]]`, so `J` itself carries unit entries and the factor of
//! one half lives in [`crate::commutator_coefficient`].

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::mode::{ModeLabel, QuadratureOrdering};

/// Construction-time tolerance on `max |S J Sᵀ - J|`.
pub const SYMPLECTIC_TOL: f64 = 1e-10;

pub fn symplectic_form(n_modes: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for k in 0..n_modes {
        j[(2 * k, 2 * k + 1)] = 1.0;
        j[(2 * k + 1, 2 * k)] = -1.0;
    }
    j
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymplecticCheck {
    pub passed: bool,
    /// `max |(S J Sᵀ - J)_ij|`
    pub residual: f64,
}

pub fn symplectic_residual(s: &DMatrix<f64>) -> Result<f64> {
    if s.nrows() != s.ncols() {
        return Err(Error::shape("symplectic check (square)", s.nrows(), s.ncols()));
    }
    if !s.nrows().is_multiple_of(2) {
        return Err(Error::shape("symplectic check (even dimension)", s.nrows() + 1, s.nrows()));
    }
    let j = symplectic_form(s.nrows() / 2);
    let diff = s * &j * s.transpose() - j;
    Ok(diff.amax())
}

pub fn check_symplectic(s: &DMatrix<f64>, tol: f64) -> Result<SymplecticCheck> {
    let residual = symplectic_residual(s)?;
    Ok(SymplecticCheck {
        passed: residual <= tol,
        residual,
    })
}

/// A real linear map on the quadrature vector that preserves `J`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticTransform {
    matrix: DMatrix<f64>,
}

impl SymplecticTransform {
    /// Validates `S J Sᵀ = J` to [`SYMPLECTIC_TOL`].
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let check = check_symplectic(&matrix, SYMPLECTIC_TOL)?;
        if !check.passed {
            return Err(Error::NotSymplectic {
                residual: check.residual,
            });
        }
        Ok(Self { matrix })
    }

    pub fn identity(n_modes: usize) -> Self {
        Self {
            matrix: DMatrix::identity(2 * n_modes, 2 * n_modes),
        }
    }

    /// Single-mode squeezer `diag(e^r, e^-r)`: x antisqueezed, p squeezed for `r > 0`.
    pub fn squeezer(r: f64) -> Result<Self> {
        if !r.is_finite() {
            return Err(Error::Validation(alloc::format!("squeezing parameter {r} is not finite")));
        }
        let e = libm::exp(r);
        Self::new(DMatrix::from_diagonal(&DVector::from_vec(alloc::vec![e, 1.0 / e])))
    }

    /// Reorders whole modes: output mode `i` is input mode `source[i]`.
    pub fn mode_permutation(source: &[usize]) -> Result<Self> {
        let n = source.len();
        let mut seen = alloc::vec![false; n];
        for &s in source {
            if s >= n || seen[s] {
                return Err(Error::Validation(alloc::format!(
                    "{source:?} is not a permutation of 0..{n}"
                )));
            }
            seen[s] = true;
        }
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        for (i, &s) in source.iter().enumerate() {
            m[(2 * i, 2 * s)] = 1.0;
            m[(2 * i + 1, 2 * s + 1)] = 1.0;
        }
        Ok(Self { matrix: m })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn n_modes(&self) -> usize {
        self.matrix.nrows() / 2
    }

    pub fn residual(&self) -> f64 {
        symplectic_residual(&self.matrix).unwrap_or(f64::INFINITY)
    }

    /// `next ∘ self`, i.e. apply `self` first.
    pub fn then(&self, next: &SymplecticTransform) -> Result<Self> {
        if next.dim() != self.dim() {
            return Err(Error::shape("transform composition", self.dim(), next.dim()));
        }
        Ok(Self {
            matrix: &next.matrix * &self.matrix,
        })
    }

    pub fn transpose_apply(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        if v.len() != self.dim() {
            return Err(Error::shape("transposed application", self.dim(), v.len()));
        }
        Ok(self.matrix.tr_mul(v))
    }

    /// Lifts a transform on `targets.len()` modes into `ordering`, acting as
    /// identity on every other mode. `targets[k]` receives the small transform's
    /// `k`-th mode block.
    pub fn embed(&self, targets: &[ModeLabel], ordering: &QuadratureOrdering) -> Result<Self> {
        if targets.len() != self.n_modes() {
            return Err(Error::shape("embed target count", self.n_modes(), targets.len()));
        }
        let positions = targets
            .iter()
            .map(|&t| ordering.position(t))
            .collect::<Result<Vec<_>>>()?;
        for (i, t) in targets.iter().enumerate() {
            if targets[..i].contains(t) {
                return Err(Error::DuplicateMode(*t));
            }
        }
        let mut m = DMatrix::identity(ordering.dim(), ordering.dim());
        // clear the target blocks, then scatter the small matrix into them
        for &pi in &positions {
            for &pj in &positions {
                for a in 0..2 {
                    for b in 0..2 {
                        m[(2 * pi + a, 2 * pj + b)] = 0.0;
                    }
                }
            }
        }
        for (i, &pi) in positions.iter().enumerate() {
            for (j, &pj) in positions.iter().enumerate() {
                for a in 0..2 {
                    for b in 0..2 {
                        m[(2 * pi + a, 2 * pj + b)] = self.matrix[(2 * i + a, 2 * j + b)];
                    }
                }
            }
        }
        Ok(Self { matrix: m })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mode::{ModeKind, ModeLabel};
    use alloc::vec;

    #[test]
    fn form_squares_to_minus_identity() {
        let j = symplectic_form(3);
        assert_eq!(&j + j.transpose(), DMatrix::zeros(6, 6));
        assert_eq!(&j * &j, -DMatrix::<f64>::identity(6, 6));
    }

    #[test]
    fn identity_has_zero_residual() {
        let c = check_symplectic(&DMatrix::identity(4, 4), 0.0).unwrap();
        assert!(c.passed);
        assert_eq!(c.residual, 0.0);
    }

    #[test]
    fn uniform_scaling_fails_with_residual_three() {
        let c = check_symplectic(&DMatrix::from_diagonal_element(2, 2, 2.0), 1e-10).unwrap();
        assert!(!c.passed);
        assert_eq!(c.residual, 3.0);
    }

    #[test]
    fn squeezers_pass_for_any_r() {
        for r in [-3.0, -0.5, 0.0, 0.7, 2.0, 8.0] {
            assert!(SymplecticTransform::squeezer(r).unwrap().residual() <= 1e-10);
        }
        assert!(SymplecticTransform::squeezer(f64::NAN).is_err());
    }

    #[test]
    fn odd_and_non_square_are_shape_errors() {
        assert!(matches!(
            check_symplectic(&DMatrix::identity(3, 3), 1e-10),
            Err(Error::Shape { .. })
        ));
        assert!(matches!(
            check_symplectic(&DMatrix::zeros(2, 4), 1e-10),
            Err(Error::Shape { .. })
        ));
    }

    #[test]
    fn new_rejects_non_symplectic() {
        let m = DMatrix::from_diagonal_element(2, 2, 2.0);
        assert_eq!(
            SymplecticTransform::new(m),
            Err(Error::NotSymplectic { residual: 3.0 })
        );
    }

    #[test]
    fn embedding_identity_is_identity() {
        let o = QuadratureOrdering::channels(ModeKind::Light, 5).unwrap();
        let e = SymplecticTransform::identity(2)
            .embed(&[ModeLabel::light(4), ModeLabel::light(2)], &o)
            .unwrap();
        assert_eq!(e, SymplecticTransform::identity(5));
    }

    #[test]
    fn embedding_respects_target_order() {
        let o = QuadratureOrdering::channels(ModeKind::Light, 3).unwrap();
        let sq = SymplecticTransform::squeezer(1.0).unwrap();
        let swap = SymplecticTransform::mode_permutation(&[1, 0]).unwrap();
        let small = sq.embed(&[ModeLabel::light(1)], &QuadratureOrdering::channels(ModeKind::Light, 2).unwrap()).unwrap();
        // swap then squeeze the first slot == squeeze what was the second mode
        let composed = swap.then(&small).unwrap();
        let big = composed.embed(&[ModeLabel::light(3), ModeLabel::light(1)], &o).unwrap();
        let m = big.matrix();
        // first target slot (L3) now reads L1 scaled by e
        assert!((m[(4, 0)] - libm::exp(1.0)).abs() < 1e-15);
        assert_eq!(m[(2, 2)], 1.0);
        assert!(big.residual() <= 1e-12);
    }

    #[test]
    fn embedding_rejects_unknown_and_repeated_targets() {
        let o = QuadratureOrdering::channels(ModeKind::Light, 2).unwrap();
        let id2 = SymplecticTransform::identity(2);
        assert_eq!(
            id2.embed(&[ModeLabel::light(1), ModeLabel::atom(1)], &o),
            Err(Error::UnknownMode(ModeLabel::atom(1)))
        );
        assert_eq!(
            id2.embed(&[ModeLabel::light(1), ModeLabel::light(1)], &o),
            Err(Error::DuplicateMode(ModeLabel::light(1)))
        );
    }

    #[test]
    fn permutation_validation() {
        assert!(SymplecticTransform::mode_permutation(&[0, 0]).is_err());
        let p = SymplecticTransform::mode_permutation(&[2, 0, 1]).unwrap();
        assert_eq!(p.residual(), 0.0);
        let v = DVector::from_vec(vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(
            (p.matrix() * v).as_slice(),
            &[5.0, 6.0, 1.0, 2.0, 3.0, 4.0]
        );
    }
}
