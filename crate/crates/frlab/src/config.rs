//! Versioned JSON experiment configuration.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    RatioScan,
    KnappCircle,
    CantorDichotomy,
    PolygonScaling,
    ConvexDegree,
    ApproxSweep,
    RecoveryPhase,
    DiscreteSuite,
    L2Counterexample,
}

impl Experiment {
    pub const ALL: [Experiment; 9] = [
        Self::RatioScan,
        Self::KnappCircle,
        Self::CantorDichotomy,
        Self::PolygonScaling,
        Self::ConvexDegree,
        Self::ApproxSweep,
        Self::RecoveryPhase,
        Self::DiscreteSuite,
        Self::L2Counterexample,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::RatioScan => "ratio_scan",
            Self::KnappCircle => "knapp_circle",
            Self::CantorDichotomy => "cantor_dichotomy",
            Self::PolygonScaling => "polygon_scaling",
            Self::ConvexDegree => "convex_degree",
            Self::ApproxSweep => "approx_sweep",
            Self::RecoveryPhase => "recovery_phase",
            Self::DiscreteSuite => "discrete_suite",
            Self::L2Counterexample => "l2_counterexample",
        }
    }
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: u32,
    pub experiment: Experiment,
    /// Scenario parameters; each scenario rejects keys it does not know.
    #[serde(default)]
    pub parameters: Map<String, Value>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment) -> Self {
        Self {
            schema: SCHEMA_VERSION,
            experiment,
            parameters: Map::new(),
            seed: 0,
            output_dir: default_output_dir(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        if cfg.schema != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema {} (expected {SCHEMA_VERSION})",
                cfg.schema
            )));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Typed view of `parameters`.
    pub fn params<P: DeserializeOwned>(&self) -> Result<P> {
        serde_json::from_value(Value::Object(self.parameters.clone()))
            .map_err(|e| Error::Config(format!("{}: {e}", self.experiment.name())))
    }
}
