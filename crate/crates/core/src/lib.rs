//! Gaussian-state simulation of a four-mode continuous-variable cluster state
//! written into, and read back out of, four atomic-ensemble memories.
//!
//! Conventions: quadratures are interleaved `(x_1, p_1, x_2, p_2, ...)`,
//! `[x, p] = i/2`, and the vacuum has variance `1/4` in every quadrature.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

pub mod channel;
pub mod cluster;
mod error;
pub mod expansion;
pub mod mode;
pub mod protocol;
pub mod state;
pub mod symplectic;
pub mod witness;

pub use channel::{coefficients, transfer_beam_splitter, ChannelCoefficients, CouplingStrength};
pub use cluster::{
    build_graph_cluster, build_linear4_cluster, linear4_network, nullifiers, squeezer_bank, GraphSpec,
    NullifierSet, SqueezingProfile,
};
pub use error::{Error, Result};
pub use expansion::ModeExpansion;
pub use mode::{ModeKind, ModeLabel, Quadrature, QuadratureOrdering};
pub use protocol::{run_protocol, ProtocolConfig, ProtocolRun, Stage, StageReport};
pub use state::{commutator_coefficient, GaussianState, QuadratureCombination, VACUUM_VARIANCE};
pub use symplectic::{check_symplectic, symplectic_form, SymplecticCheck, SymplecticTransform};
