//! JSON experiment files.
//!
//! ```json
//! {
//!   "N": 3,
//!   "types": [
//!     {"name": "I1", "arrival": {"kind": "poisson", "mean": 1.5}, "rho": 0.75, "fu": 2, "unit_cost": 1},
//!     {"name": "I2", "arrival": {"kind": "table", "pmf": [0.4, 0.6]}, "rho": 0.8, "fu": 1}
//!   ]
//! }
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::distributions::ArrivalDist;
use crate::error::ModelError;
use crate::multi_type::{InstructionType, ModelConfig};
use crate::optimizer::FuCostParams;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    /// Malformed JSON or a field of the wrong type, with its position.
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    /// Well-formed file describing an invalid model.
    #[error("{field}: {source}")]
    Invalid {
        field: String,
        #[source]
        source: ModelError,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TypeSpec {
    #[serde(default)]
    pub name: String,
    pub arrival: ArrivalDist,
    pub rho: f64,
    #[serde(default = "default_fu")]
    pub fu: usize,
    #[serde(default)]
    pub unit_cost: Option<f64>,
}

fn default_fu() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentFile {
    #[serde(rename = "N")]
    pub capacity: usize,
    pub types: Vec<TypeSpec>,
}

impl ExperimentFile {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Validated model described by the file.
    pub fn model(&self) -> Result<ModelConfig, ConfigError> {
        let invalid = |field: String| move |source: ModelError| ConfigError::Invalid { field, source };
        if self.capacity == 0 {
            return Err(ConfigError::Invalid {
                field: "N".into(),
                source: ModelError::Domain("queue capacity must be >= 1".into()),
            });
        }
        let mut types = Vec::with_capacity(self.types.len());
        for (t, spec) in self.types.iter().enumerate() {
            spec.arrival
                .validate()
                .map_err(invalid(format!("types[{t}].arrival")))?;
            if spec.fu == 0 {
                return Err(ConfigError::Invalid {
                    field: format!("types[{t}].fu"),
                    source: ModelError::Domain("functional unit count must be >= 1".into()),
                });
            }
            let ty = InstructionType::new(spec.name.clone(), spec.arrival.clone(), spec.rho, spec.fu)
                .map_err(invalid(format!("types[{t}].rho")))?;
            types.push(ty);
        }
        ModelConfig::new(self.capacity, types).map_err(invalid("types".into()))
    }

    /// Per-type unit costs; every type must carry `unit_cost`.
    pub fn costs(&self, fu_max: usize) -> Result<FuCostParams, ConfigError> {
        let mut unit_cost = Vec::with_capacity(self.types.len());
        for (t, spec) in self.types.iter().enumerate() {
            let c = spec.unit_cost.ok_or_else(|| ConfigError::Invalid {
                field: format!("types[{t}].unit_cost"),
                source: ModelError::Domain("required for optimization".into()),
            })?;
            unit_cost.push(c);
        }
        let n = unit_cost.len();
        FuCostParams::with_bounds(unit_cost, vec![1; n], vec![fu_max; n]).map_err(|source| ConfigError::Invalid {
            field: "types[].unit_cost".into(),
            source,
        })
    }
}
