//! Cluster-state construction: the explicit four-mode linear network, a generic
//! edge-gate construction for arbitrary graphs, and graph nullifiers
//! `p_a - Σ_{b∈N(a)} x_b`.

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::FRAC_1_SQRT_2;
use core::fmt::Write;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::mode::{ModeKind, ModeLabel, Quadrature, QuadratureOrdering};
use crate::state::{GaussianState, QuadratureCombination};
use crate::symplectic::SymplecticTransform;

/// `1/√10`
pub const FRAC_1_SQRT_10: f64 = 0.316_227_766_016_837_94;

/// Undirected simple graph on vertices `1..=n_vertices`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphSpec {
    n_vertices: usize,
    edges: Vec<(usize, usize)>,
}

impl GraphSpec {
    pub fn new(n_vertices: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n_vertices == 0 {
            return Err(Error::Validation("graph needs at least one vertex".into()));
        }
        let mut normalized: Vec<(usize, usize)> = Vec::new();
        for (a, b) in edges {
            if a == 0 || b == 0 || a > n_vertices || b > n_vertices {
                return Err(Error::Validation(alloc::format!(
                    "edge ({a}, {b}) outside vertex range 1..={n_vertices}"
                )));
            }
            if a == b {
                return Err(Error::Validation(alloc::format!("self-loop on vertex {a}")));
            }
            let e = (a.min(b), a.max(b));
            if normalized.contains(&e) {
                return Err(Error::Validation(alloc::format!("duplicate edge ({a}, {b})")));
            }
            normalized.push(e);
        }
        Ok(Self {
            n_vertices,
            edges: normalized,
        })
    }

    /// Path graph `1 - 2 - ... - n`.
    pub fn linear(n: usize) -> Result<Self> {
        Self::new(n, (1..n).map(|a| (a, a + 1)))
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Neighbors of `a` in ascending order.
    pub fn neighbors(&self, a: usize) -> Vec<usize> {
        let mut n: Vec<usize> = self
            .edges
            .iter()
            .filter_map(|&(u, v)| {
                if u == a {
                    Some(v)
                } else if v == a {
                    Some(u)
                } else {
                    None
                }
            })
            .collect();
        n.sort_unstable();
        n
    }
}

/// One squeezing parameter per input mode. Negative values mean the x quadrature
/// is squeezed instead of p.
#[derive(Debug, Clone, PartialEq)]
pub struct SqueezingProfile(Vec<f64>);

impl SqueezingProfile {
    pub fn new(r: Vec<f64>) -> Result<Self> {
        if let Some(bad) = r.iter().find(|v| !v.is_finite()) {
            return Err(Error::Validation(alloc::format!("squeezing parameter {bad} is not finite")));
        }
        Ok(Self(r))
    }

    pub fn uniform(r: f64, n: usize) -> Result<Self> {
        Self::new(alloc::vec![r; n])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// One nullifier per vertex; vertex `a` lives on `modes[a - 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct NullifierSet {
    combinations: Vec<QuadratureCombination>,
    modes: Vec<ModeLabel>,
}

impl NullifierSet {
    pub fn combinations(&self) -> &[QuadratureCombination] {
        &self.combinations
    }

    pub fn modes(&self) -> &[ModeLabel] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.combinations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.combinations.is_empty()
    }

    pub fn variances(&self, state: &GaussianState) -> Result<Vec<f64>> {
        self.combinations.iter().map(|u| state.variance(u)).collect()
    }
}

/// Nullifiers on a standalone `Light`-mode ordering with one mode per vertex.
pub fn nullifiers(graph: &GraphSpec) -> Result<NullifierSet> {
    let ordering = QuadratureOrdering::channels(ModeKind::Light, graph.n_vertices())?;
    nullifiers_on(graph, &ordering, ModeKind::Light)
}

/// Nullifiers of `graph` with vertex `a` mapped onto mode `(kind, a)` of `ordering`.
pub fn nullifiers_on(
    graph: &GraphSpec,
    ordering: &QuadratureOrdering,
    kind: ModeKind,
) -> Result<NullifierSet> {
    let modes: Vec<ModeLabel> = (1..=graph.n_vertices()).map(|a| ModeLabel::new(kind, a)).collect();
    let mut combinations = Vec::with_capacity(modes.len());
    for a in 1..=graph.n_vertices() {
        let mut terms = alloc::vec![(modes[a - 1], Quadrature::P, 1.0)];
        let mut label = String::new();
        let _ = write!(label, "p{}", modes[a - 1]);
        for b in graph.neighbors(a) {
            terms.push((modes[b - 1], Quadrature::X, -1.0));
            let _ = write!(label, " - x{}", modes[b - 1]);
        }
        combinations.push(QuadratureCombination::from_terms(ordering, label, &terms)?);
    }
    Ok(NullifierSet {
        combinations,
        modes,
    })
}

/// Integer transcription of the four-mode linear-cluster network. Entry
/// `(i, j)` equals `root2[i][j] / √2 + root10[i][j] / √10`. Rows are the output
/// quadratures `X1, P1, ..., X4, P4`; columns the squeezed inputs in the same order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NetworkTable {
    pub root2: [[i8; 8]; 8],
    pub root10: [[i8; 8]; 8],
}

#[rustfmt::skip]
pub const LINEAR4_TABLE: NetworkTable = NetworkTable {
    root2: [
        //x1  p1  x2  p2  x3  p3  x4  p4
        [ 1,  0,  0,  0,  0,  0,  0,  0], // X1
        [ 0,  1,  0,  0,  0,  0,  0,  0], // P1
        [ 0, -1,  0,  0,  0,  0,  0,  0], // X2
        [ 1,  0,  0,  0,  0,  0,  0,  0], // P2
        [ 0,  0,  0,  0,  0,  0,  0, -1], // X3
        [ 0,  0,  0,  0,  0,  0,  1,  0], // P3
        [ 0,  0,  0,  0,  0,  0,  1,  0], // X4
        [ 0,  0,  0,  0,  0,  0,  0,  1], // P4
    ],
    root10: [
        [ 0,  0,  1,  0,  0, -2,  0,  0],
        [ 0,  0,  0,  1,  2,  0,  0,  0],
        [ 0,  0,  0,  1,  2,  0,  0,  0],
        [ 0,  0, -1,  0,  0,  2,  0,  0],
        [ 0,  0, -2,  0,  0, -1,  0,  0],
        [ 0,  0,  0, -2,  1,  0,  0,  0],
        [ 0,  0,  0,  2, -1,  0,  0,  0],
        [ 0,  0, -2,  0,  0, -1,  0,  0],
    ],
};

impl NetworkTable {
    pub fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(8, 8, |i, j| {
            f64::from(self.root2[i][j]) * FRAC_1_SQRT_2 + f64::from(self.root10[i][j]) * FRAC_1_SQRT_10
        })
    }
}

/// The 8×8 linear-cluster network with squeezing factors stripped.
pub fn linear4_network() -> SymplecticTransform {
    linear4_network_from_table(&LINEAR4_TABLE).expect("built-in network table is symplectic")
}

pub fn linear4_network_from_table(table: &NetworkTable) -> Result<SymplecticTransform> {
    SymplecticTransform::new(table.matrix())
}

/// Block-diagonal `diag(e^{r_i}, e^{-r_i})` per mode.
pub fn squeezer_bank(profile: &SqueezingProfile) -> SymplecticTransform {
    let n = profile.len();
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    for (k, &r) in profile.values().iter().enumerate() {
        let e = libm::exp(r);
        m[(2 * k, 2 * k)] = e;
        m[(2 * k + 1, 2 * k + 1)] = 1.0 / e;
    }
    SymplecticTransform::new(m).expect("diagonal determinant-one blocks are symplectic")
}

/// Vacuum → squeezers → linear network, on modes `L1..L4`.
pub fn build_linear4_cluster(profile: &SqueezingProfile) -> Result<GaussianState> {
    build_linear4_cluster_with(profile, &linear4_network())
}

pub(crate) fn build_linear4_cluster_with(
    profile: &SqueezingProfile,
    network: &SymplecticTransform,
) -> Result<GaussianState> {
    if profile.len() != 4 {
        return Err(Error::Validation(alloc::format!(
            "linear four-mode cluster needs 4 squeezing parameters, got {}",
            profile.len()
        )));
    }
    GaussianState::vacuum(QuadratureOrdering::channels(ModeKind::Light, 4)?)
        .apply(&squeezer_bank(profile))?
        .apply(network)
}

/// Shear gate `p_a += x_b`, `p_b += x_a` on an `n`-mode register (1-based vertices).
pub fn edge_gate(a: usize, b: usize, n_modes: usize) -> Result<SymplecticTransform> {
    if a == 0 || b == 0 || a > n_modes || b > n_modes || a == b {
        return Err(Error::Validation(alloc::format!(
            "edge gate ({a}, {b}) invalid for {n_modes} modes"
        )));
    }
    let mut m = DMatrix::identity(2 * n_modes, 2 * n_modes);
    m[(2 * (a - 1) + 1, 2 * (b - 1))] = 1.0;
    m[(2 * (b - 1) + 1, 2 * (a - 1))] = 1.0;
    SymplecticTransform::new(m)
}

/// p-squeezed vacua followed by one edge gate per edge.
pub fn build_graph_cluster(graph: &GraphSpec, profile: &SqueezingProfile) -> Result<GaussianState> {
    let n = graph.n_vertices();
    if profile.len() != n {
        return Err(Error::Validation(alloc::format!(
            "graph has {n} vertices but profile has {} entries",
            profile.len()
        )));
    }
    let mut state = GaussianState::vacuum(QuadratureOrdering::channels(ModeKind::Light, n)?)
        .apply(&squeezer_bank(profile))?;
    for &(a, b) in graph.edges() {
        state = state.apply(&edge_gate(a, b, n)?)?;
    }
    Ok(state)
}
