//! JSON documents: protocol configuration and cluster graphs.
//!
//! ```json
//! {"kappa": 1.5, "r": 1.0, "snapshots": false}
//! {"kappa": 1.5, "r": [1.0, 0.8, 0.8, 1.0]}
//! {"n": 4, "edges": [[1, 2], [2, 3], [3, 4]]}
//! ```

use std::path::Path;

use clustermem_core::protocol::CHANNELS;
use clustermem_core::{CouplingStrength, GraphSpec, ProtocolConfig, SqueezingProfile};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SqueezingSpec {
    Uniform(f64),
    PerMode(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolConfigDoc {
    pub kappa: f64,
    pub r: SqueezingSpec,
    #[serde(default)]
    pub snapshots: bool,
}

impl ProtocolConfigDoc {
    pub fn into_config(self) -> Result<ProtocolConfig, CliError> {
        let kappa = CouplingStrength::new(self.kappa)
            .map_err(|e| CliError::Config(format!("field `kappa`: {e}")))?;
        let profile = match self.r {
            SqueezingSpec::Uniform(r) => SqueezingProfile::uniform(r, CHANNELS),
            SqueezingSpec::PerMode(v) => {
                if v.len() != CHANNELS {
                    return Err(CliError::Config(format!(
                        "field `r`: expected a number or {CHANNELS} numbers, got {} numbers",
                        v.len()
                    )));
                }
                SqueezingProfile::new(v)
            }
        }
        .map_err(|e| CliError::Config(format!("field `r`: {e}")))?;
        ProtocolConfig::new(kappa, profile, self.snapshots).map_err(|e| CliError::Config(e.to_string()))
    }
}

fn parse_err(what: &str, e: serde_json::Error) -> CliError {
    // serde_json reports "... at line L column C"
    CliError::Config(format!("malformed {what}: {e}"))
}

pub fn parse_protocol_config(text: &str) -> Result<ProtocolConfig, CliError> {
    let doc: ProtocolConfigDoc = serde_json::from_str(text).map_err(|e| parse_err("protocol config", e))?;
    doc.into_config()
}

pub fn load_protocol_config(path: &Path) -> Result<ProtocolConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_protocol_config(&text)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDoc {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
}

pub fn parse_graph(text: &str) -> Result<GraphSpec, CliError> {
    let doc: GraphDoc = serde_json::from_str(text).map_err(|e| parse_err("graph", e))?;
    GraphSpec::new(doc.n, doc.edges.into_iter().map(|[a, b]| (a, b)))
        .map_err(|e| CliError::Config(format!("graph: {e}")))
}

pub fn load_graph(path: &Path) -> Result<GraphSpec, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_graph(&text)
}
