//! Effective light–atom transfer: a beam-splitter-type map with transmission
//! `e^{-κ²/2}` acting identically on both quadratures.

use alloc::vec;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::mode::{ModeLabel, QuadratureOrdering};
use crate::symplectic::SymplecticTransform;

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct CouplingStrength(f64);

impl CouplingStrength {
    pub fn new(kappa: f64) -> Result<Self> {
        if !kappa.is_finite() || kappa < 0.0 {
            return Err(Error::Validation(alloc::format!(
                "coupling strength must be finite and non-negative, got {kappa}"
            )));
        }
        Ok(Self(kappa))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `e^{-κ²/2}`: weight kept by the mode's own input.
    pub fn transmission(self) -> f64 {
        libm::exp(-0.5 * self.0 * self.0)
    }

    /// `√(1 - e^{-κ²})`: weight swapped in from the partner mode.
    pub fn transfer(self) -> f64 {
        libm::sqrt(-libm::expm1(-self.0 * self.0))
    }
}

/// Weights of the write-light input, the read-light input and the atomic input
/// in the read-light output after a full store-and-retrieve cycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelCoefficients {
    /// `1 - e^{-κ²}`
    pub c1: f64,
    /// `e^{-κ²/2}`
    pub c2: f64,
    /// `e^{-κ²/2} √(1 - e^{-κ²})`
    pub c3: f64,
}

impl ChannelCoefficients {
    pub fn norm_sqr(&self) -> f64 {
        self.c1 * self.c1 + self.c2 * self.c2 + self.c3 * self.c3
    }
}

pub fn coefficients(kappa: CouplingStrength) -> ChannelCoefficients {
    let k2 = kappa.value() * kappa.value();
    let c2 = kappa.transmission();
    ChannelCoefficients {
        c1: -libm::expm1(-k2),
        c2,
        c3: c2 * kappa.transfer(),
    }
}

/// 4×4 map on `(atom, light)`:
/// `atom' = c·atom + s·light`, `light' = -s·atom + c·light` for both x and p.
pub fn transfer_beam_splitter(kappa: CouplingStrength) -> SymplecticTransform {
    let c = kappa.transmission();
    let s = kappa.transfer();
    #[rustfmt::skip]
    let m = DMatrix::from_row_slice(4, 4, &[
         c, 0.0,   s, 0.0,
       0.0,   c, 0.0,   s,
        -s, 0.0,   c, 0.0,
       0.0,  -s, 0.0,   c,
    ]);
    SymplecticTransform::new(m).expect("rotation with c² + s² = 1 is symplectic")
}

/// Stores from `L1` into `A1`, retrieves from `A1` into `L'1`, and returns the
/// largest deviation of the `L'1` output rows from
/// `-C1·L1 + C2·L'1 - C3·A1`.
pub fn composition_identity_check(kappa: CouplingStrength) -> f64 {
    let (a, l, r) = (ModeLabel::atom(1), ModeLabel::light(1), ModeLabel::readout(1));
    let ordering = QuadratureOrdering::new(vec![a, l, r]).expect("distinct modes");
    let bs = transfer_beam_splitter(kappa);
    let storage = bs.embed(&[a, l], &ordering).expect("modes in ordering");
    let retrieval = bs.embed(&[a, r], &ordering).expect("modes in ordering");
    let total = storage.then(&retrieval).expect("equal dimensions");
    let k = coefficients(kappa);
    let mut residual: f64 = 0.0;
    for q in 0..2 {
        // modes sit at positions A=0, L=1, L'=2
        let mut expected = [0.0; 6];
        expected[q] = -k.c3;
        expected[2 + q] = -k.c1;
        expected[4 + q] = k.c2;
        let row = total.matrix().row(4 + q);
        for (got, want) in row.iter().zip(expected) {
            residual = residual.max((got - want).abs());
        }
    }
    residual
}

/// Closed-form maximum of `C3(κ)`: at `e^{-κ²} = 1/2`, i.e. `κ = √ln 2`, `C3 = 1/2`.
pub fn c3_maximum() -> (f64, f64) {
    (libm::sqrt(core::f64::consts::LN_2), 0.5)
}

/// Brute-force argmax of `C3` over `start, start + step, ..., ≤ stop`.
pub fn c3_grid_maximum(start: f64, stop: f64, step: f64) -> Result<(f64, f64)> {
    if step.is_nan() || step <= 0.0 || start < 0.0 || stop < start {
        return Err(Error::Validation(alloc::format!(
            "bad grid [{start}, {stop}] step {step}"
        )));
    }
    let n = libm::floor((stop - start) / step + 1e-9) as usize;
    let mut best = (start, f64::NEG_INFINITY);
    for i in 0..=n {
        let kappa = start + i as f64 * step;
        let c3 = coefficients(CouplingStrength(kappa)).c3;
        if c3 > best.1 {
            best = (kappa, c3);
        }
    }
    Ok(best)
}
