//! Pairwise variance witness for multipartite inseparability.
//!
//! For two combinations `u`, `v` and a split of the vertices into `A | B`, any
//! state that is separable across the split obeys
//! `V(u) + V(v) ≥ ½ (|Σ_{j∈A} h_j g_j| + |Σ_{j∈B} h_j g_j|)`, where
//! `h_j g_j = u_{x_j} v_{p_j} - u_{p_j} v_{x_j}` is the per-mode commutator
//! weight. The `½` is the vacuum-variance convention (`[x, p] = i/2`).
//! A sum strictly below the bound witnesses entanglement across the split.

use alloc::vec::Vec;

use crate::cluster::NullifierSet;
use crate::error::{Error, Result};
use crate::mode::Quadrature;
use crate::state::{GaussianState, QuadratureCombination};

/// Maps the per-side commutator sums `(Σ_A, Σ_B)` to a separability bound.
pub type BoundFn = fn(f64, f64) -> f64;

pub fn pairwise_variance_bound(side_a: f64, side_b: f64) -> f64 {
    0.5 * (side_a.abs() + side_b.abs())
}

/// Vertices (1-based) on side A; the remaining vertices form side B.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bipartition {
    side_a: Vec<usize>,
}

impl Bipartition {
    pub fn new(mut side_a: Vec<usize>) -> Self {
        side_a.sort_unstable();
        side_a.dedup();
        Self { side_a }
    }

    pub fn side_a(&self) -> &[usize] {
        &self.side_a
    }

    pub fn contains(&self, vertex: usize) -> bool {
        self.side_a.binary_search(&vertex).is_ok()
    }

    /// `{1..a} | {a+1..n}` for `a = 1..n-1`.
    pub fn chain_cuts(n: usize) -> Vec<Bipartition> {
        (1..n).map(|a| Bipartition::new((1..=a).collect())).collect()
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.side_a.is_empty() || self.side_a.len() >= n || self.side_a.iter().any(|&v| v == 0 || v > n) {
            return Err(Error::Validation(alloc::format!(
                "{:?} is not a proper bipartition of 1..={n}",
                self.side_a
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WitnessEntry {
    /// 1-based nullifier indices.
    pub pair: (usize, usize),
    pub side_a: Vec<usize>,
    pub variance_sum: f64,
    pub bound: f64,
    pub witnessed: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EntanglementReport {
    pub entries: Vec<WitnessEntry>,
}

impl EntanglementReport {
    /// Entries whose bound is positive; a zero bound can never be beaten.
    pub fn informative(&self) -> impl Iterator<Item = &WitnessEntry> {
        self.entries.iter().filter(|e| e.bound > 0.0)
    }
}

/// Per-vertex commutator weights `u_x v_p - u_p v_x` on the nullifier modes.
pub fn commutator_weights(
    state: &GaussianState,
    nullifiers: &NullifierSet,
    u: &QuadratureCombination,
    v: &QuadratureCombination,
) -> Result<Vec<f64>> {
    let o = state.ordering();
    if u.len() != o.dim() || v.len() != o.dim() {
        return Err(Error::shape("witness combination", o.dim(), u.len().min(v.len())));
    }
    let (uc, vc) = (u.coefficients(), v.coefficients());
    nullifiers
        .modes()
        .iter()
        .map(|&m| {
            let x = o.index(m, Quadrature::X)?;
            let p = o.index(m, Quadrature::P)?;
            Ok(uc[x] * vc[p] - uc[p] * vc[x])
        })
        .collect()
}

pub fn entanglement_report(
    state: &GaussianState,
    nullifiers: &NullifierSet,
    bipartitions: &[Bipartition],
) -> Result<EntanglementReport> {
    entanglement_report_with(state, nullifiers, bipartitions, pairwise_variance_bound)
}

/// Evaluates every consecutive nullifier pair `(a, a+1)` against every split.
pub fn entanglement_report_with(
    state: &GaussianState,
    nullifiers: &NullifierSet,
    bipartitions: &[Bipartition],
    bound: BoundFn,
) -> Result<EntanglementReport> {
    let n = nullifiers.len();
    for b in bipartitions {
        b.validate(n)?;
    }
    let combos = nullifiers.combinations();
    let variances = nullifiers.variances(state)?;
    let mut entries = Vec::new();
    for a in 0..n.saturating_sub(1) {
        let weights = commutator_weights(state, nullifiers, &combos[a], &combos[a + 1])?;
        let sum = variances[a] + variances[a + 1];
        for b in bipartitions {
            let (mut sa, mut sb) = (0.0, 0.0);
            for (j, w) in weights.iter().enumerate() {
                if b.contains(j + 1) {
                    sa += w;
                } else {
                    sb += w;
                }
            }
            let value = bound(sa, sb);
            entries.push(WitnessEntry {
                pair: (a + 1, a + 2),
                side_a: b.side_a().to_vec(),
                variance_sum: sum,
                bound: value,
                witnessed: sum < value,
            });
        }
    }
    Ok(EntanglementReport { entries })
}
