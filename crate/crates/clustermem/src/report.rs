//! JSON report written by `clustermem protocol`.

use clustermem_core::protocol::{linear4_nullifiers, protocol_ordering, Stage};
use clustermem_core::witness::{entanglement_report, Bipartition};
use clustermem_core::{coefficients, run_protocol, ProtocolConfig};
use serde::Serialize;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigEcho {
    pub kappa: f64,
    pub r: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientEcho {
    #[serde(rename = "C1")]
    pub c1: f64,
    #[serde(rename = "C2")]
    pub c2: f64,
    #[serde(rename = "C3")]
    pub c3: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageSummary {
    pub stage: &'static str,
    pub variances: [f64; 4],
    pub closed_form: [f64; 4],
    pub oracle: [f64; 4],
    pub max_deviation: f64,
    pub max_oracle_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessRow {
    pub stage: &'static str,
    pub pair: [usize; 2],
    pub side_a: Vec<usize>,
    pub variance_sum: f64,
    pub bound: f64,
    pub witnessed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProtocolReport {
    pub config: ConfigEcho,
    pub coefficients: CoefficientEcho,
    pub stages: Vec<StageSummary>,
    /// Stored variance minus the ideal input value, per nullifier.
    pub stored_correlation_residual: [f64; 4],
    pub entanglement: Vec<WitnessRow>,
    /// Largest deviation of any stage from its closed form.
    pub max_deviation: f64,
}

pub fn protocol_report(config: &ProtocolConfig) -> Result<ProtocolReport, CliError> {
    let mut cfg = config.clone();
    cfg.track_stage_snapshots = true;
    let run = run_protocol(&cfg)?;
    let c = coefficients(config.kappa);

    let stages: Vec<StageSummary> = run
        .reports
        .iter()
        .map(|rep| StageSummary {
            stage: rep.stage.name(),
            variances: rep.nullifier_variances,
            closed_form: rep.closed_form_variances,
            oracle: rep.oracle_variances,
            max_deviation: rep.max_deviation,
            max_oracle_deviation: rep.oracle_deviation(),
        })
        .collect();

    let stored = run.report(Stage::Stored).nullifier_variances;
    let input = run.report(Stage::Input).closed_form_variances;
    let residual = core::array::from_fn(|i| stored[i] - input[i]);

    let ordering = protocol_ordering();
    let cuts = Bipartition::chain_cuts(4);
    let mut entanglement = Vec::new();
    for (stage, state) in &run.snapshots {
        let set = linear4_nullifiers(&ordering, stage.carrier())?;
        for e in entanglement_report(state, &set, &cuts)?.entries {
            entanglement.push(WitnessRow {
                stage: stage.name(),
                pair: [e.pair.0, e.pair.1],
                side_a: e.side_a,
                variance_sum: e.variance_sum,
                bound: e.bound,
                witnessed: e.witnessed,
            });
        }
    }

    let max_deviation = stages.iter().map(|s| s.max_deviation).fold(0.0, f64::max);
    Ok(ProtocolReport {
        config: ConfigEcho {
            kappa: config.kappa.value(),
            r: config.profile.values().to_vec(),
        },
        coefficients: CoefficientEcho {
            c1: c.c1,
            c2: c.c2,
            c3: c.c3,
        },
        stages,
        stored_correlation_residual: residual,
        entanglement,
        max_deviation,
    })
}

