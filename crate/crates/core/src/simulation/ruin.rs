use serde::{Deserialize, Serialize};

use crate::economy::UserId;

use super::{run_on_stream, SimConfig, SimError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RuinEstimate {
    pub probability: f64,
    pub std_error: f64,
    pub trials: u64,
}

/// Monte Carlo estimate of the probability that `agent` can no longer afford
/// any activity within `config.steps` steps. Trial `i` runs on sub-stream
/// `i + 1` of the configured seed.
pub fn ruin_probability(config: &SimConfig, agent: UserId, trials: u64) -> Result<RuinEstimate, SimError> {
    if trials == 0 {
        return Err(SimError::InvalidConfig("at least one trial is required".into()));
    }
    if config.agent(agent).is_none() {
        return Err(SimError::UnknownAgent(agent));
    }
    let mut ruined = 0u64;
    for trial in 0..trials {
        let out = run_on_stream(config, trial + 1)?;
        if out.agents.iter().any(|a| a.id == agent && a.ruined) {
            ruined += 1;
        }
    }
    let p = ruined as f64 / trials as f64;
    Ok(RuinEstimate { probability: p, std_error: (p * (1.0 - p) / trials as f64).sqrt(), trials })
}
