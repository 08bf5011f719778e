use serde::{Deserialize, Serialize};

use crate::activities::{AdventureSpec, BattleSpec, LotterySpec, MinorityGameSpec, StoppingRule, StrategyMix};
use crate::analytics::UtilitySpec;
use crate::breeding::GameRules;
use crate::economy::UserId;

use super::SimError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Sits out every round.
    Passive,
    /// Cycles through `breed` breedings, `battle` battles and `adventure`
    /// adventures, in that order.
    FixedMix(StrategyMix),
    /// Picks the action with the best expected utility change at average outcomes.
    GrowthMaximizer,
    /// Prefers the adventure (the lottery when one is configured), then battle.
    ThrillSeeker,
}

impl Strategy {
    pub fn label(&self) -> &'static str {
        match self {
            Strategy::Passive => "passive",
            Strategy::FixedMix(_) => "fixed_mix",
            Strategy::GrowthMaximizer => "growth_maximizer",
            Strategy::ThrillSeeker => "thrill_seeker",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialHoldings {
    /// Number of genesis collectibles minted to the agent.
    #[serde(default)]
    pub collectibles: u32,
    #[serde(default)]
    pub activity_balance: f64,
    #[serde(default)]
    pub market_balance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentSpec {
    pub id: usize,
    pub strategy: Strategy,
    #[serde(default = "default_utility")]
    pub utility: UtilitySpec,
    pub holdings: InitialHoldings,
}

fn default_utility() -> UtilitySpec {
    UtilitySpec::Log
}

/// Battle against the house: the committed market balance is multiplied by
/// `win_fraction` with probability `win_prob`, otherwise by `loss_fraction`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BattleConfig {
    pub team_size: usize,
    pub win_prob: f64,
    pub win_fraction: f64,
    pub loss_fraction: f64,
}

impl BattleConfig {
    /// Average-outcome view used for valuation.
    pub fn spec(&self) -> BattleSpec {
        BattleSpec {
            team_size: self.team_size,
            survival_fraction: self.win_prob * self.win_fraction + (1.0 - self.win_prob) * self.loss_fraction,
        }
    }
}

impl Default for BattleConfig {
    fn default() -> Self {
        Self { team_size: 3, win_prob: 0.5, win_fraction: 1.2, loss_fraction: 0.8 }
    }
}

/// Minority game used in place of the house battle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MinorityConfig {
    pub rake_fraction: f64,
    #[serde(default)]
    pub sponsor_subsidy: f64,
    pub stopping_rule: StoppingRule,
    /// Market tokens each participant commits.
    pub stake: f64,
}

impl MinorityConfig {
    pub fn spec(&self) -> MinorityGameSpec {
        MinorityGameSpec {
            rake_fraction: self.rake_fraction,
            sponsor_subsidy: self.sponsor_subsidy,
            stopping_rule: self.stopping_rule,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActivitySpecs {
    pub adventure: AdventureSpec,
    #[serde(default)]
    pub battle: BattleConfig,
    /// When set, adventures are played as this lottery.
    #[serde(default)]
    pub lottery: Option<LotterySpec>,
    /// When set, battles are played as rounds of this minority game.
    #[serde(default)]
    pub minority: Option<MinorityConfig>,
}

impl Default for ActivitySpecs {
    fn default() -> Self {
        Self {
            adventure: AdventureSpec { reward_multiplier: 1.01, collectibles_required: 1 },
            battle: BattleConfig::default(),
            lottery: None,
            minority: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriceUpdate {
    FrozenPrices,
    /// Collectible prices follow the forward-price recursion with the cost of
    /// a first breeding as the step cost.
    ForwardDrift,
}

/// Price assigned to newly bred collectibles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CollectiblePricing {
    Floor,
    /// Floor plus `Σ premium_i · trait_i`.
    TraitPremium(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialBoard {
    pub activity_price: f64,
    pub market_price: f64,
    pub floor_price: f64,
    /// Price of every genesis collectible.
    pub genesis_price: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreasuryBalances {
    #[serde(default)]
    pub activity_balance: f64,
    #[serde(default)]
    pub market_balance: f64,
}

/// Everything needed for one reproducible run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub rules: GameRules,
    pub specs: ActivitySpecs,
    pub agents: Vec<AgentSpec>,
    pub steps: u64,
    pub seed: u64,
    pub board: InitialBoard,
    pub price_update: PriceUpdate,
    pub pricing: CollectiblePricing,
    pub treasury: TreasuryBalances,
}

impl SimConfig {
    /// A small economy with the given agents and default game parameters.
    pub fn with_agents(agents: Vec<AgentSpec>) -> Self {
        Self {
            rules: GameRules::default(),
            specs: ActivitySpecs::default(),
            agents,
            steps: 10,
            seed: 0,
            board: InitialBoard { activity_price: 0.1, market_price: 1.0, floor_price: 1.0, genesis_price: 2.0 },
            price_update: PriceUpdate::FrozenPrices,
            pricing: CollectiblePricing::Floor,
            treasury: TreasuryBalances::default(),
        }
    }

    pub fn agent(&self, id: UserId) -> Option<&AgentSpec> {
        self.agents.iter().find(|a| a.id == id.0)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |msg: String| Err(SimError::InvalidConfig(msg));
        self.rules.validate().map_err(|e| SimError::InvalidConfig(e.to_string()))?;
        if self.steps == 0 {
            return bad("steps must be at least 1".into());
        }
        if self.agents.is_empty() {
            return bad("at least one agent is required".into());
        }
        let mut ids: Vec<usize> = self.agents.iter().map(|a| a.id).collect();
        ids.sort_unstable();
        if ids[0] == 0 {
            return bad("agent id 0 is reserved for the treasury".into());
        }
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return bad("agent ids must be unique".into());
        }
        for a in &self.agents {
            a.utility.validate().map_err(|e| SimError::InvalidConfig(format!("agent {}: {e}", a.id)))?;
            let h = &a.holdings;
            if !(h.activity_balance >= 0.0 && h.market_balance >= 0.0) {
                return bad(format!("agent {}: balances must be non-negative", a.id));
            }
        }
        let b = &self.board;
        for (name, v) in [
            ("activity_price", b.activity_price),
            ("market_price", b.market_price),
            ("floor_price", b.floor_price),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("board.{name} must be positive"));
            }
        }
        if !(b.genesis_price >= b.floor_price) {
            return bad("board.genesis_price must not be below floor_price".into());
        }
        let spec_err = |e: crate::activities::ActivityError| SimError::InvalidConfig(e.to_string());
        self.specs.adventure.validate().map_err(spec_err)?;
        self.specs.battle.spec().validate().map_err(spec_err)?;
        let bc = &self.specs.battle;
        if !(0.0..=1.0).contains(&bc.win_prob) || !(bc.win_fraction >= 0.0) || !(bc.loss_fraction >= 0.0) {
            return bad("battle win_prob must lie in [0, 1] and fractions must be non-negative".into());
        }
        if let Some(l) = &self.specs.lottery {
            l.validate().map_err(spec_err)?;
        }
        if let Some(m) = &self.specs.minority {
            m.spec().validate().map_err(spec_err)?;
            if !(m.stake > 0.0) {
                return bad("minority stake must be positive".into());
            }
        }
        if let CollectiblePricing::TraitPremium(p) = &self.pricing {
            if p.len() != self.rules.trait_count || p.iter().any(|x| !(*x >= 0.0)) {
                return bad("trait premiums need one non-negative entry per trait".into());
            }
        }
        if !(self.treasury.activity_balance >= 0.0 && self.treasury.market_balance >= 0.0) {
            return bad("treasury balances must be non-negative".into());
        }
        Ok(())
    }
}
