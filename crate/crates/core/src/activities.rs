//! Adventure, battle, lottery and minority-game payouts.
//!
//! Outcome randomness is replaced by the average outcome everywhere in this
//! module except [`minority_should_stop`]. Realised outcomes are drawn by the
//! simulation.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::economy::{PriceBoard, UserId};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ActivityError {
    #[error("expected {expected} collectibles, got {got}")]
    WrongCollectibleCount { expected: usize, got: usize },
    #[error("invalid {name}: {reason}")]
    InvalidSpec { name: &'static str, reason: String },
    #[error("outcome variance is zero, Sharpe ratio undefined")]
    ZeroVariance,
    #[error("minority game side {0} has no stakes")]
    EmptySide(u8),
    #[error("stake {stake} of {player} must be positive and finite")]
    NonPositiveStake { player: UserId, stake: f64 },
}

fn invalid(name: &'static str, reason: impl Into<String>) -> ActivityError {
    ActivityError::InvalidSpec { name, reason: reason.into() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdventureSpec {
    /// `n'`: market tokens held after the adventure per token committed.
    pub reward_multiplier: f64,
    pub collectibles_required: usize,
}

impl AdventureSpec {
    pub fn validate(&self) -> Result<(), ActivityError> {
        if !(self.reward_multiplier >= 1.0) || !self.reward_multiplier.is_finite() {
            return Err(invalid("adventure", format!("reward_multiplier {} must be >= 1", self.reward_multiplier)));
        }
        if self.collectibles_required == 0 {
            return Err(invalid("adventure", "collectibles_required must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BattleSpec {
    pub team_size: usize,
    /// `n''`: fraction of market tokens surviving the battle on average.
    pub survival_fraction: f64,
}

impl BattleSpec {
    pub fn validate(&self) -> Result<(), ActivityError> {
        if self.team_size == 0 {
            return Err(invalid("battle", "team_size must be positive"));
        }
        if !(self.survival_fraction >= 0.0) || !self.survival_fraction.is_finite() {
            return Err(invalid("battle", format!("survival_fraction {} must be >= 0", self.survival_fraction)));
        }
        Ok(())
    }
}

/// Portfolio value after an adventure at constant prices: `Σ p_j + n'·b`.
pub fn adventure_payout(collectible_values: &[f64], market_balance: f64, spec: &AdventureSpec) -> Result<f64, ActivityError> {
    if collectible_values.len() != spec.collectibles_required {
        return Err(ActivityError::WrongCollectibleCount {
            expected: spec.collectibles_required,
            got: collectible_values.len(),
        });
    }
    Ok(collectible_values.iter().sum::<f64>() + spec.reward_multiplier * market_balance)
}

/// Portfolio value after a battle: `Σ p_j + n''·b`.
pub fn battle_payout(team_values: &[f64], market_balance: f64, spec: &BattleSpec) -> Result<f64, ActivityError> {
    if team_values.len() != spec.team_size {
        return Err(ActivityError::WrongCollectibleCount { expected: spec.team_size, got: team_values.len() });
    }
    Ok(team_values.iter().sum::<f64>() + spec.survival_fraction * market_balance)
}

/// Counts of breed (`x1`), battle (`x2`) and adventure (`x3`) activities over a period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategyMix {
    pub breed: u32,
    pub battle: u32,
    pub adventure: u32,
}

impl StrategyMix {
    pub fn period(&self) -> u32 {
        self.breed + self.battle + self.adventure
    }
}

/// `x1·α + x2·β + x3·γ`.
pub fn total_earnings(mix: &StrategyMix, alpha: f64, beta: f64, gamma: f64) -> f64 {
    mix.breed as f64 * alpha + mix.battle as f64 * beta + mix.adventure as f64 * gamma
}

/// Two-outcome lottery: lose `stake` with probability `loss_prob`, otherwise
/// keep the stake and receive the prize.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LotterySpec {
    pub loss_prob: f64,
    /// Market tokens committed.
    pub stake: f64,
    /// Activity tokens won.
    pub win_game_tokens: f64,
    /// Market tokens won.
    pub win_market_tokens: f64,
}

impl LotterySpec {
    pub fn validate(&self) -> Result<(), ActivityError> {
        if !(0.0..=1.0).contains(&self.loss_prob) {
            return Err(invalid("lottery", format!("loss_prob {} outside [0, 1]", self.loss_prob)));
        }
        if !(self.stake > 0.0) || !self.stake.is_finite() {
            return Err(invalid("lottery", "stake must be positive"));
        }
        if !(self.win_game_tokens >= 0.0) || !(self.win_market_tokens >= 0.0) {
            return Err(invalid("lottery", "prizes must be non-negative"));
        }
        Ok(())
    }

    /// Prize expressed in market tokens; activity tokens convert at `B/C`.
    pub fn prize_in_market_tokens(&self, board: &PriceBoard) -> f64 {
        self.win_market_tokens + self.win_game_tokens * board.activity_price / board.market_price
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SponsorClass {
    SubsidyRequired,
    SelfFunding,
    Profitable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LotteryAssessment {
    /// Player's expected gain in market tokens.
    pub player_ev: f64,
    pub sponsor_class: SponsorClass,
}

/// Expected player gain and the sponsor's funding position.
pub fn classify_lottery(spec: &LotterySpec, board: &PriceBoard) -> LotteryAssessment {
    let p = spec.loss_prob;
    let player_ev = -p * spec.stake + (1.0 - p) * spec.prize_in_market_tokens(board);
    let sponsor_class = if player_ev.abs() <= 1e-12 {
        SponsorClass::SelfFunding
    } else if player_ev < 0.0 {
        SponsorClass::Profitable
    } else {
        SponsorClass::SubsidyRequired
    };
    LotteryAssessment { player_ev, sponsor_class }
}

/// Expected gain over the standard deviation of the two-point outcome.
pub fn lottery_sharpe(spec: &LotterySpec, board: &PriceBoard) -> Result<f64, ActivityError> {
    let p = spec.loss_prob;
    let win = spec.prize_in_market_tokens(board);
    let loss = -spec.stake;
    let mean = p * loss + (1.0 - p) * win;
    let variance = p * (loss - mean).powi(2) + (1.0 - p) * (win - mean).powi(2);
    if !(variance > 0.0) {
        return Err(ActivityError::ZeroVariance);
    }
    Ok(mean / variance.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StoppingRule {
    /// Stop once `T` steps have elapsed.
    FixedStep(u64),
    /// Stop with probability `q` at every step.
    GeometricRandom(f64),
    /// Stop as soon as the pool reaches the threshold.
    PoolCap(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MinorityGameSpec {
    /// `π`: share of the staked total handed to the winners.
    pub rake_fraction: f64,
    /// `S`: sponsor top-up added to the winners' pot.
    pub sponsor_subsidy: f64,
    pub stopping_rule: StoppingRule,
}

impl MinorityGameSpec {
    pub fn validate(&self) -> Result<(), ActivityError> {
        if !(self.rake_fraction > 0.0 && self.rake_fraction <= 1.0) {
            return Err(invalid("minority", format!("rake_fraction {} outside (0, 1]", self.rake_fraction)));
        }
        if !(self.sponsor_subsidy >= 0.0) || !self.sponsor_subsidy.is_finite() {
            return Err(invalid("minority", "sponsor_subsidy must be non-negative"));
        }
        match self.stopping_rule {
            StoppingRule::PoolCap(t) if !(t > 0.0) => Err(invalid("minority", "pool cap threshold must be positive")),
            StoppingRule::GeometricRandom(q) if !(0.0..=1.0).contains(&q) => {
                Err(invalid("minority", format!("stop probability {q} outside [0, 1]")))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    One,
    Two,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Settlement {
    /// `None` when the totals tie and every stake is refunded.
    pub winner: Option<Side>,
    /// What each player receives back; losers are listed with 0.
    pub payouts: BTreeMap<UserId, f64>,
    /// Rake kept minus subsidy paid. Payouts plus this equal the staked total.
    pub organizer_net: f64,
}

fn side_total(stakes: &[(UserId, f64)], side: u8) -> Result<f64, ActivityError> {
    if stakes.is_empty() {
        return Err(ActivityError::EmptySide(side));
    }
    stakes.iter().try_fold(0.0, |acc, &(player, stake)| {
        if stake > 0.0 && stake.is_finite() {
            Ok(acc + stake)
        } else {
            Err(ActivityError::NonPositiveStake { player, stake })
        }
    })
}

/// Settles with an externally decided winning side (coin flip, sports result).
pub fn settle_with_winner(
    side1: &[(UserId, f64)],
    side2: &[(UserId, f64)],
    winner: Side,
    spec: &MinorityGameSpec,
) -> Result<Settlement, ActivityError> {
    let x1 = side_total(side1, 1)?;
    let x2 = side_total(side2, 2)?;
    let total = x1 + x2;
    let (winners, losers, a) = match winner {
        Side::One => (side1, side2, x1),
        Side::Two => (side2, side1, x2),
    };
    let pot = spec.rake_fraction * total + spec.sponsor_subsidy;
    let mut payouts = BTreeMap::new();
    for &(player, _) in losers {
        payouts.entry(player).or_insert(0.0);
    }
    for &(player, stake) in winners {
        *payouts.entry(player).or_insert(0.0) += stake / a * pot;
    }
    Ok(Settlement {
        winner: Some(winner),
        payouts,
        organizer_net: (1.0 - spec.rake_fraction) * total - spec.sponsor_subsidy,
    })
}

/// Settles a minority game: the side with the strictly smaller total splits
/// `π·(X1 + X2) + S` in proportion to stakes.
///
/// Equal totals refund every stake and the subsidy is not paid.
pub fn minority_settle(
    side1: &[(UserId, f64)],
    side2: &[(UserId, f64)],
    spec: &MinorityGameSpec,
) -> Result<Settlement, ActivityError> {
    let x1 = side_total(side1, 1)?;
    let x2 = side_total(side2, 2)?;
    if x1 == x2 {
        let mut payouts = BTreeMap::new();
        for &(player, stake) in side1.iter().chain(side2) {
            *payouts.entry(player).or_insert(0.0) += stake;
        }
        return Ok(Settlement { winner: None, payouts, organizer_net: 0.0 });
    }
    let winner = if x1 < x2 { Side::One } else { Side::Two };
    settle_with_winner(side1, side2, winner, spec)
}

/// Whether a running minority round ends at `step` (steps elapsed in the round).
///
/// `GeometricRandom` always consumes exactly one draw.
pub fn minority_should_stop<R: Rng + ?Sized>(rule: &StoppingRule, step: u64, pool_total: f64, rng: &mut R) -> bool {
    match *rule {
        StoppingRule::FixedStep(t) => step >= t,
        StoppingRule::GeometricRandom(q) => rng.random::<f64>() < q,
        StoppingRule::PoolCap(threshold) => pool_total >= threshold,
    }
}
