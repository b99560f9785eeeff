//! Parameter sweeps over κ (channel coefficients) and r (stage variances).

use std::collections::BTreeMap;

use clustermem_core::protocol::{run_protocol, ProtocolConfig, Stage};
use clustermem_core::{coefficients, CouplingStrength};
use rayon::prelude::*;

use crate::error::CliError;

const MAX_POINTS: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    Kappa,
    R,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
    /// Values of the parameters not being swept, e.g. `"kappa"` for an r sweep.
    pub fixed: BTreeMap<String, f64>,
    pub stages: Vec<Stage>,
}

impl SweepSpec {
    pub fn kappa(start: f64, stop: f64, step: f64) -> Self {
        Self {
            variable: SweepVariable::Kappa,
            start,
            stop,
            step,
            fixed: BTreeMap::new(),
            stages: Vec::new(),
        }
    }

    pub fn r(start: f64, stop: f64, step: f64, kappa: f64) -> Self {
        Self {
            variable: SweepVariable::R,
            start,
            stop,
            step,
            fixed: BTreeMap::from([("kappa".to_string(), kappa)]),
            stages: Stage::ALL.to_vec(),
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let finite = self.start.is_finite() && self.stop.is_finite() && self.step.is_finite();
        if !finite || self.start > self.stop || self.step <= 0.0 {
            return Err(CliError::Usage(format!(
                "sweep range [{}, {}] with step {} is invalid",
                self.start, self.stop, self.step
            )));
        }
        if (self.stop - self.start) / self.step > MAX_POINTS {
            return Err(CliError::Usage("sweep exceeds 10^6 steps".into()));
        }
        Ok(())
    }

    /// `start, start + step, ...` up to and including `stop` (with 1e-9 slack).
    pub fn grid(&self) -> Result<Vec<f64>, CliError> {
        self.validate()?;
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        let inv = 1.0 / self.step;
        let per_unit = inv.round();
        // divide by an exact integer when possible so 0.57 prints as 0.57
        let exact = per_unit >= 1.0 && ((inv - per_unit) / per_unit).abs() < 1e-9;
        Ok((0..=n)
            .map(|i| {
                if exact {
                    self.start + i as f64 / per_unit
                } else {
                    self.start + i as f64 * self.step
                }
            })
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub abscissa: f64,
    /// Set for variance sweeps.
    pub stage: Option<Stage>,
    pub series: Vec<(String, f64)>,
}

impl SweepRecord {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.series.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    fn ensure_finite(self) -> Result<Self, CliError> {
        if let Some((name, v)) = self.series.iter().find(|(_, v)| !v.is_finite()) {
            return Err(CliError::Usage(format!(
                "{name} is {v} at abscissa {}",
                self.abscissa
            )));
        }
        Ok(self)
    }
}

pub const COEFFICIENT_SERIES: [&str; 3] = ["C1", "C2", "C3"];
pub const VARIANCE_SERIES: [&str; 4] = ["V1", "V2", "V3", "V4"];

/// One record per κ with series `C1, C2, C3`.
pub fn coefficient_sweep(spec: &SweepSpec) -> Result<Vec<SweepRecord>, CliError> {
    if spec.variable != SweepVariable::Kappa {
        return Err(CliError::Usage("coefficient sweep needs variable = kappa".into()));
    }
    if spec.start < 0.0 {
        return Err(CliError::Usage("coupling strength cannot be negative".into()));
    }
    spec.grid()?
        .into_par_iter()
        .map(|kappa| {
            let c = coefficients(CouplingStrength::new(kappa)?);
            SweepRecord {
                abscissa: kappa,
                stage: None,
                series: vec![("C1".into(), c.c1), ("C2".into(), c.c2), ("C3".into(), c.c3)],
            }
            .ensure_finite()
        })
        .collect()
}

/// One record per (r, stage) with series `V1..V4`, ordered by r then stage.
pub fn variance_sweep(spec: &SweepSpec) -> Result<Vec<SweepRecord>, CliError> {
    if spec.variable != SweepVariable::R {
        return Err(CliError::Usage("variance sweep needs variable = r".into()));
    }
    let kappa = *spec
        .fixed
        .get("kappa")
        .ok_or_else(|| CliError::Usage("variance sweep needs a fixed kappa".into()))?;
    let stages = if spec.stages.is_empty() {
        Stage::ALL.to_vec()
    } else {
        spec.stages.clone()
    };
    let rows: Vec<Vec<SweepRecord>> = spec
        .grid()?
        .into_par_iter()
        .map(|r| {
            let run = run_protocol(&ProtocolConfig::uniform(kappa, r)?)?;
            stages
                .iter()
                .map(|&stage| {
                    let v = run.report(stage).nullifier_variances;
                    SweepRecord {
                        abscissa: r,
                        stage: Some(stage),
                        series: VARIANCE_SERIES.iter().map(|s| s.to_string()).zip(v).collect(),
                    }
                    .ensure_finite()
                })
                .collect::<Result<Vec<_>, CliError>>()
        })
        .collect::<Result<_, _>>()?;
    Ok(rows.into_iter().flatten().collect())
}
