//! Heisenberg-picture oracle: every final quadrature is tracked as an explicit
//! coefficient list over the initial, mutually independent quadratures.
//!
//! This deliberately avoids covariance matrices so that it can cross-check
//! [`crate::GaussianState::apply`]. Initial quadratures must be uncorrelated.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::state::QuadratureCombination;
use crate::symplectic::SymplecticTransform;

#[derive(Debug, Clone)]
pub struct ModeExpansion {
    /// `rows[i][k]`: weight of initial quadrature `k` in final quadrature `i`.
    rows: Vec<Vec<f64>>,
    initial_variances: Vec<f64>,
}

impl ModeExpansion {
    pub fn new(chain: &[SymplecticTransform], initial_variances: Vec<f64>) -> Result<Self> {
        let n = initial_variances.len();
        let mut rows: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let mut r = vec![0.0; n];
                r[i] = 1.0;
                r
            })
            .collect();
        for s in chain {
            if s.dim() != n {
                return Err(Error::shape("expansion chain", n, s.dim()));
            }
            let m = s.matrix();
            let mut next = vec![vec![0.0; n]; n];
            for (i, out) in next.iter_mut().enumerate() {
                for (j, row) in rows.iter().enumerate() {
                    let w = m[(i, j)];
                    if w == 0.0 {
                        continue;
                    }
                    for (o, r) in out.iter_mut().zip(row) {
                        *o += w * r;
                    }
                }
            }
            rows = next;
        }
        Ok(Self {
            rows,
            initial_variances,
        })
    }

    pub fn dim(&self) -> usize {
        self.initial_variances.len()
    }

    /// Weights of a final-quadrature combination over the initial quadratures.
    pub fn expand(&self, u: &QuadratureCombination) -> Result<Vec<f64>> {
        if u.len() != self.dim() {
            return Err(Error::shape("expansion", self.dim(), u.len()));
        }
        let mut w = vec![0.0; self.dim()];
        for (ui, row) in u.coefficients().iter().zip(&self.rows) {
            if *ui == 0.0 {
                continue;
            }
            for (wk, r) in w.iter_mut().zip(row) {
                *wk += ui * r;
            }
        }
        Ok(w)
    }

    /// `Σ_k w_k² V_k` for the expanded weights `w`.
    pub fn variance(&self, u: &QuadratureCombination) -> Result<f64> {
        Ok(self
            .expand(u)?
            .iter()
            .zip(&self.initial_variances)
            .map(|(w, v)| w * w * v)
            .sum())
    }

    /// Mean of a final combination given initial means.
    pub fn expectation(&self, u: &QuadratureCombination, initial_mean: &[f64]) -> Result<f64> {
        if initial_mean.len() != self.dim() {
            return Err(Error::shape("expansion mean", self.dim(), initial_mean.len()));
        }
        Ok(self
            .expand(u)?
            .iter()
            .zip(initial_mean)
            .map(|(w, m)| w * m)
            .sum())
    }
}
