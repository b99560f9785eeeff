//! Mode labels and the interleaved quadrature ordering `(x_1, p_1, x_2, p_2, ...)`.

use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

/// Which physical system a mode belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModeKind {
    /// Write-in light pulse carrying the cluster state.
    Light,
    /// Collective spin of an atomic ensemble.
    Atom,
    /// Read-out light pulse.
    Readout,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModeLabel {
    pub kind: ModeKind,
    /// 1-based channel index.
    pub channel: usize,
}

impl ModeLabel {
    pub const fn new(kind: ModeKind, channel: usize) -> Self {
        Self { kind, channel }
    }

    pub const fn light(channel: usize) -> Self {
        Self::new(ModeKind::Light, channel)
    }

    pub const fn atom(channel: usize) -> Self {
        Self::new(ModeKind::Atom, channel)
    }

    pub const fn readout(channel: usize) -> Self {
        Self::new(ModeKind::Readout, channel)
    }
}

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.kind {
            ModeKind::Light => "L",
            ModeKind::Atom => "A",
            ModeKind::Readout => "L'",
        };
        write!(f, "{prefix}{}", self.channel)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quadrature {
    X,
    P,
}

/// Ordered list of modes. Mode `k` (0-based) owns quadrature indices `2k` (x) and `2k + 1` (p).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QuadratureOrdering {
    modes: Vec<ModeLabel>,
}

impl QuadratureOrdering {
    pub fn new(modes: Vec<ModeLabel>) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::Config("ordering must contain at least one mode".into()));
        }
        for (i, m) in modes.iter().enumerate() {
            if m.channel == 0 {
                return Err(Error::Config(alloc::format!(
                    "channel indices are 1-based, got {m:?}"
                )));
            }
            if modes[..i].contains(m) {
                return Err(Error::DuplicateMode(*m));
            }
        }
        Ok(Self { modes })
    }

    /// `kind` modes for channels `1..=n`.
    pub fn channels(kind: ModeKind, n: usize) -> Result<Self> {
        Self::new((1..=n).map(|c| ModeLabel::new(kind, c)).collect())
    }

    pub fn modes(&self) -> &[ModeLabel] {
        &self.modes
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    /// Length of the quadrature vector, `2 * n_modes`.
    pub fn dim(&self) -> usize {
        2 * self.modes.len()
    }

    pub fn position(&self, mode: ModeLabel) -> Result<usize> {
        self.modes
            .iter()
            .position(|m| *m == mode)
            .ok_or(Error::UnknownMode(mode))
    }

    pub fn index(&self, mode: ModeLabel, q: Quadrature) -> Result<usize> {
        let k = self.position(mode)?;
        Ok(match q {
            Quadrature::X => 2 * k,
            Quadrature::P => 2 * k + 1,
        })
    }
}
