//! Append-only record of every state transition in a run.

use serde::{Deserialize, Serialize};

use crate::activities::Side;
use crate::economy::{TokenId, UserId};

/// Tokens created or destroyed by one event. Transfers between holders do
/// not appear here.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TokenFlows {
    pub activity_minted: f64,
    pub activity_burned: f64,
    pub market_minted: f64,
    pub market_burned: f64,
}

impl TokenFlows {
    pub fn net_activity(&self) -> f64 {
        self.activity_minted - self.activity_burned
    }

    pub fn net_market(&self) -> f64 {
        self.market_minted - self.market_burned
    }

    /// Mint for positive `delta`, burn for negative.
    pub fn market_change(delta: f64) -> Self {
        if delta >= 0.0 {
            Self { market_minted: delta, ..Self::default() }
        } else {
            Self { market_burned: -delta, ..Self::default() }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Payout {
    pub agent: UserId,
    pub amount: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum Action {
    Genesis {
        tokens: Vec<TokenId>,
        price: f64,
    },
    Breed {
        parents: Vec<TokenId>,
        child: TokenId,
        child_price: f64,
        activity_cost: f64,
        market_cost: f64,
    },
    Battle {
        won: bool,
        market_before: f64,
        market_after: f64,
    },
    Adventure {
        market_before: f64,
        market_after: f64,
    },
    Lottery {
        won: bool,
        stake: f64,
        market_after: f64,
        activity_after: f64,
    },
    MinorityStake {
        side: Side,
        stake: f64,
        pool_total: f64,
    },
    MinoritySettle {
        winner: Option<Side>,
        payouts: Vec<Payout>,
        organizer_net: f64,
        subsidy: f64,
    },
    Pass {
        reason: String,
    },
    PriceUpdate {
        floor_price: f64,
        step_cost: f64,
    },
    Ruined,
}

impl Action {
    pub fn kind(&self) -> &'static str {
        match self {
            Action::Genesis { .. } => "genesis",
            Action::Breed { .. } => "breed",
            Action::Battle { .. } => "battle",
            Action::Adventure { .. } => "adventure",
            Action::Lottery { .. } => "lottery",
            Action::MinorityStake { .. } => "minority_stake",
            Action::MinoritySettle { .. } => "minority_settle",
            Action::Pass { .. } => "pass",
            Action::PriceUpdate { .. } => "price_update",
            Action::Ruined => "ruined",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub step: u64,
    /// Acting user; `0` for game-level events.
    pub agent: UserId,
    #[serde(flatten)]
    pub action: Action,
    pub flows: TokenFlows,
    /// Random draws consumed by this event.
    pub rng_draws: u64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EventLog {
    events: Vec<Event>,
}

impl EventLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, event: Event) {
        self.events.push(event);
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn last(&self) -> Option<&Event> {
        self.events.last()
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Events of a single step.
    pub fn at_step(&self, step: u64) -> impl Iterator<Item = &Event> {
        self.events.iter().filter(move |e| e.step == step)
    }

    /// One JSON object per line.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&serde_json::to_string(e).expect("events serialize"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self, serde_json::Error> {
        let events = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(serde_json::from_str)
            .collect::<Result<_, _>>()?;
        Ok(Self { events })
    }
}
