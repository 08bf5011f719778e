//! JSON scenario files.
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "rules": { "breed_arity": 2, ... },
//!   "specs": { "adventure": { "reward_multiplier": 1.01, "collectibles_required": 1 } },
//!   "agents": [ { "id": 1, "strategy": "passive", "holdings": { "collectibles": 2 } } ],
//!   "run": { "steps": 50, "seed": 0, "price_update": "frozen_prices", "board": { ... } }
//! }
//! ```
//!
//! Unknown keys are rejected everywhere. `rules`, `specs`, `run.seed`,
//! `run.pricing` and `run.treasury` may be omitted.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::breeding::GameRules;
use crate::simulation::{
    ActivitySpecs, AgentSpec, CollectiblePricing, InitialBoard, PriceUpdate, SimConfig, SimError, TreasuryBalances,
};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid scenario at `{key}`: {message}")]
    Parse { key: String, message: String },
    #[error("unsupported schema_version {found} (expected {SCHEMA_VERSION})")]
    Version { found: u32 },
    #[error(transparent)]
    Invalid(#[from] SimError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub steps: u64,
    #[serde(default)]
    pub seed: u64,
    pub price_update: PriceUpdate,
    pub board: InitialBoard,
    #[serde(default = "default_pricing")]
    pub pricing: CollectiblePricing,
    #[serde(default)]
    pub treasury: TreasuryBalances,
}

fn default_pricing() -> CollectiblePricing {
    CollectiblePricing::Floor
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema_version: u32,
    #[serde(default)]
    pub rules: GameRules,
    #[serde(default)]
    pub specs: ActivitySpecs,
    pub agents: Vec<AgentSpec>,
    pub run: RunSection,
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let file: ScenarioFile = serde_path_to_error::deserialize(de).map_err(|e| {
            let key = e.path().to_string();
            ScenarioError::Parse { key, message: e.into_inner().to_string() }
        })?;
        if file.schema_version != SCHEMA_VERSION {
            return Err(ScenarioError::Version { found: file.schema_version });
        }
        Ok(file)
    }

    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text =
            std::fs::read_to_string(path).map_err(|source| ScenarioError::Io { path: path.to_path_buf(), source })?;
        Self::parse(&text)
    }

    pub fn from_config(config: &SimConfig) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            rules: config.rules.clone(),
            specs: config.specs.clone(),
            agents: config.agents.clone(),
            run: RunSection {
                steps: config.steps,
                seed: config.seed,
                price_update: config.price_update,
                board: config.board.clone(),
                pricing: config.pricing.clone(),
                treasury: config.treasury.clone(),
            },
        }
    }

    /// Validated simulation config.
    pub fn into_config(self) -> Result<SimConfig, ScenarioError> {
        let config = SimConfig {
            rules: self.rules,
            specs: self.specs,
            agents: self.agents,
            steps: self.run.steps,
            seed: self.run.seed,
            board: self.run.board,
            price_update: self.run.price_update,
            pricing: self.run.pricing,
            treasury: self.run.treasury,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }
}
