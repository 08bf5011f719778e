//! Breeding: minting new collectibles from owned parents, and the valuation
//! consequences of breeding (population bound, forward prices, arbitrage,
//! lattice value of remaining breed charges).

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::economy::{Collectible, Holdings, Population, PriceBoard, TokenId};

/// Static breeding parameters of a game. Omitted fields take their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GameRules {
    /// Number of parents per breeding (`d`).
    pub breed_arity: usize,
    /// Maximum number of breedings a single collectible may join (`L`).
    pub breed_limit: u32,
    pub trait_count: usize,
    /// Number of distinct values a trait can take.
    pub trait_alphabet: u8,
    pub mutation_prob: f64,
    /// Steps a newborn waits before it can breed.
    pub maturity_delay: u64,
    /// Activity tokens consumed at the k-th breeding of the lead parent.
    pub activity_cost_schedule: Vec<f64>,
    /// Market tokens consumed at the k-th breeding of the lead parent.
    pub market_cost_schedule: Vec<f64>,
    /// Burn consumed tokens (default) or credit them to the treasury.
    pub burn_breeding_tokens: bool,
}

impl Default for GameRules {
    fn default() -> Self {
        Self {
            breed_arity: 2,
            breed_limit: 7,
            trait_count: 6,
            trait_alphabet: 4,
            mutation_prob: 0.1,
            maturity_delay: 1,
            activity_cost_schedule: vec![3.0, 4.5, 7.5, 12.0, 19.5, 31.5, 51.0],
            market_cost_schedule: vec![0.5; 7],
            burn_breeding_tokens: true,
        }
    }
}

impl GameRules {
    pub fn validate(&self) -> Result<(), BreedError> {
        let bad = |msg: String| Err(BreedError::InvalidRules(msg));
        if self.breed_arity == 0 {
            return bad("breed_arity must be at least 1".into());
        }
        if self.breed_limit == 0 {
            return bad("breed_limit must be at least 1".into());
        }
        if self.trait_alphabet == 0 {
            return bad("trait_alphabet must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.mutation_prob) {
            return bad(format!("mutation_prob {} outside [0, 1]", self.mutation_prob));
        }
        let limit = self.breed_limit as usize;
        for (name, schedule) in [
            ("activity_cost_schedule", &self.activity_cost_schedule),
            ("market_cost_schedule", &self.market_cost_schedule),
        ] {
            if schedule.len() != limit {
                return bad(format!("{name} has {} entries, breed_limit is {limit}", schedule.len()));
            }
            if schedule.iter().any(|c| !c.is_finite() || *c < 0.0) {
                return bad(format!("{name} entries must be finite and non-negative"));
            }
        }
        Ok(())
    }

    /// Cost of breeding when the lead parent has already bred `lead_breed_count` times.
    pub fn breed_cost(&self, lead_breed_count: u32, board: &PriceBoard) -> Option<BreedCost> {
        let k = lead_breed_count as usize;
        let activity_amount = *self.activity_cost_schedule.get(k)?;
        let market_amount = *self.market_cost_schedule.get(k)?;
        Some(BreedCost {
            activity_amount,
            market_amount,
            numeraire_total: activity_amount * board.activity_price
                + market_amount * board.market_price,
        })
    }

    /// Numéraire cost of the charge exercised when `k` charges remain, for
    /// `k = 1..=L`, in the layout expected by [`lattice_value`].
    pub fn remaining_charge_costs(&self, board: &PriceBoard) -> Vec<f64> {
        let limit = self.breed_limit;
        (1..=limit)
            .map(|k| {
                self.breed_cost(limit - k, board)
                    .map(|c| c.numeraire_total)
                    .unwrap_or(f64::INFINITY)
            })
            .collect()
    }

    fn is_mature(&self, c: &Collectible, step: u64) -> bool {
        c.is_genesis() || step.saturating_sub(c.birth_step) >= self.maturity_delay
    }
}

/// Tokens consumed by one breeding.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BreedCost {
    pub activity_amount: f64,
    pub market_amount: f64,
    pub numeraire_total: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Restriction {
    DuplicateParent,
    ParentChild,
    Siblings,
}

impl fmt::Display for Restriction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Restriction::DuplicateParent => "a collectible cannot breed with itself",
            Restriction::ParentChild => "parents cannot breed with their children",
            Restriction::Siblings => "siblings cannot breed with each other",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BreedError {
    #[error("invalid game rules: {0}")]
    InvalidRules(String),
    #[error("breeding needs {expected} parents, got {got}")]
    WrongArity { expected: usize, got: usize },
    #[error("unknown collectible {0}")]
    UnknownToken(TokenId),
    #[error("collectible {0} is not held by the breeder")]
    NotOwner(TokenId),
    #[error("restriction violated between {a} and {b}: {rule}")]
    RestrictionViolated { rule: Restriction, a: TokenId, b: TokenId },
    #[error("insufficient balance: need {activity} activity and {market} market tokens")]
    InsufficientBalance { activity: f64, market: f64 },
    #[error("collectible {0} has used all of its breed charges")]
    ExhaustedBreeder(TokenId),
    #[error("collectible {id} is {age} steps old, needs {required}")]
    ImmatureParent { id: TokenId, age: u64, required: u64 },
    #[error("price must be positive, got {0}")]
    NonPositivePrice(f64),
    #[error("breeds_remaining {requested} outside [0, {available}]")]
    OutOfRange { requested: usize, available: usize },
}

fn relation(a: &Collectible, b: &Collectible) -> Option<Restriction> {
    if a.id == b.id {
        Some(Restriction::DuplicateParent)
    } else if a.parents.contains(&b.id) || b.parents.contains(&a.id) {
        Some(Restriction::ParentChild)
    } else if a.parents.iter().any(|p| b.parents.contains(p)) {
        Some(Restriction::Siblings)
    } else {
        None
    }
}

/// Result of a successful breeding.
#[derive(Debug, Clone, PartialEq)]
pub struct BreedOutcome {
    pub child: Collectible,
    pub cost: BreedCost,
}

/// Breeds `parent_ids` (lead parent first) owned by `owner` at `current_step`.
///
/// On success the child is inserted in `population` and in `owner`'s
/// holdings, every parent loses one charge and the cost is debited from
/// `owner`. Where the consumed tokens go is up to the caller. Nothing is
/// modified on error.
#[allow(clippy::too_many_arguments)]
pub fn breed<R: Rng + ?Sized>(
    parent_ids: &[TokenId],
    owner: &mut Holdings,
    population: &mut Population,
    rules: &GameRules,
    board: &PriceBoard,
    current_step: u64,
    rng: &mut R,
) -> Result<BreedOutcome, BreedError> {
    if parent_ids.len() != rules.breed_arity {
        return Err(BreedError::WrongArity { expected: rules.breed_arity, got: parent_ids.len() });
    }
    let mut parents = Vec::with_capacity(parent_ids.len());
    for &id in parent_ids {
        let c = population.get(id).ok_or(BreedError::UnknownToken(id))?;
        if !owner.collectibles.contains(&id) {
            return Err(BreedError::NotOwner(id));
        }
        if c.breed_count >= rules.breed_limit {
            return Err(BreedError::ExhaustedBreeder(id));
        }
        if !rules.is_mature(c, current_step) {
            return Err(BreedError::ImmatureParent {
                id,
                age: current_step.saturating_sub(c.birth_step),
                required: rules.maturity_delay,
            });
        }
        parents.push(c);
    }
    for (i, a) in parents.iter().enumerate() {
        for b in &parents[i + 1..] {
            if let Some(rule) = relation(a, b) {
                return Err(BreedError::RestrictionViolated { rule, a: a.id, b: b.id });
            }
        }
    }
    let cost = rules
        .breed_cost(parents[0].breed_count, board)
        .ok_or(BreedError::ExhaustedBreeder(parents[0].id))?;
    if owner.activity_balance < cost.activity_amount || owner.market_balance < cost.market_amount {
        return Err(BreedError::InsufficientBalance {
            activity: cost.activity_amount,
            market: cost.market_amount,
        });
    }

    let traits = (0..rules.trait_count)
        .map(|i| {
            if rng.random::<f64>() < rules.mutation_prob {
                rng.random_range(0..rules.trait_alphabet)
            } else {
                let parent = parents[rng.random_range(0..parents.len())];
                parent.traits.get(i).copied().unwrap_or(0)
            }
        })
        .collect();

    let id = population.allocate_id();
    let child = Collectible {
        id,
        traits,
        parents: parent_ids.to_vec(),
        breed_count: 0,
        birth_step: current_step + 1,
    };
    for &pid in parent_ids {
        if let Some(p) = population.get_mut(pid) {
            p.breed_count += 1;
        }
    }
    population.insert(child.clone());
    owner.collectibles.insert(id);
    owner.activity_balance -= cost.activity_amount;
    owner.market_balance -= cost.market_amount;
    Ok(BreedOutcome { child, cost })
}

/// Greedily picks a compatible parent set from `owner`'s collectibles, oldest
/// (lowest id) first. Returns `None` when no full set can be formed.
pub fn find_breeding_set(
    owner: &Holdings,
    population: &Population,
    rules: &GameRules,
    current_step: u64,
) -> Option<Vec<TokenId>> {
    let mut chosen: Vec<&Collectible> = Vec::with_capacity(rules.breed_arity);
    for id in &owner.collectibles {
        let Some(c) = population.get(*id) else { continue };
        if c.breed_count >= rules.breed_limit || !rules.is_mature(c, current_step) {
            continue;
        }
        if chosen.iter().all(|p| relation(p, c).is_none()) {
            chosen.push(c);
            if chosen.len() == rules.breed_arity {
                return Some(chosen.iter().map(|c| c.id).collect());
            }
        }
    }
    None
}

/// Parameters of the deterministic population upper bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PopulationParams {
    pub arity: usize,
    /// `None` lifts the per-collectible breed limit.
    pub breed_limit: Option<u32>,
    pub maturity_delay: u64,
}

impl From<&GameRules> for PopulationParams {
    fn from(rules: &GameRules) -> Self {
        Self {
            arity: rules.breed_arity,
            breed_limit: Some(rules.breed_limit),
            maturity_delay: rules.maturity_delay,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    born: u64,
    count: u64,
    used: u32,
}

/// Maximal collectible count `N_0..=N_horizon` when every mature collectible
/// with charges left breeds at every step.
///
/// Each round pairs eligible collectibles oldest first into
/// `floor(eligible / d)` breedings. Genesis collectibles are mature from the
/// start; a child born in round `t` appears in `N_{t+1}` and becomes eligible
/// once `maturity_delay` further rounds have passed. With `d = 1` and a
/// one-step delay this is the Fibonacci sequence.
pub fn max_population(initial: u64, params: PopulationParams, horizon: usize) -> Vec<u64> {
    let d = params.arity.max(1) as u64;
    // segments stay in birth order; within a cohort, the first members breed first
    let mut segments = vec![Segment { born: 0, count: initial, used: 0 }];
    let mut totals = Vec::with_capacity(horizon + 1);
    let mut total = initial;
    totals.push(total);

    for round in 0..horizon as u64 {
        let eligible = |s: &Segment| {
            let mature = s.born == 0 || round >= s.born.saturating_add(params.maturity_delay);
            let charged = params.breed_limit.is_none_or(|l| s.used < l);
            mature && charged
        };
        let eligible_count: u64 = segments.iter().filter(|s| eligible(s)).map(|s| s.count).sum();
        let births = eligible_count / d;
        let mut need = births * d;

        let mut next = Vec::with_capacity(segments.len() + 2);
        for s in &segments {
            if need == 0 || !eligible(s) {
                next.push(*s);
                continue;
            }
            let take = need.min(s.count);
            need -= take;
            next.push(Segment { count: take, used: s.used + 1, ..*s });
            if s.count > take {
                next.push(Segment { count: s.count - take, ..*s });
            }
        }
        if births > 0 {
            next.push(Segment { born: round + 1, count: births, used: 0 });
        }
        // merge neighbours that became identical
        segments = next.into_iter().fold(Vec::new(), |mut acc: Vec<Segment>, s| {
            match acc.last_mut() {
                Some(last) if last.born == s.born && last.used == s.used => last.count += s.count,
                _ => acc.push(s),
            }
            acc
        });
        total = total.saturating_add(births);
        totals.push(total);
    }
    totals
}

/// One step of the no-arbitrage forward-price recursion
/// `p_{t+1} = d/(d+1)·p_t + cost/(d+1)`.
///
/// Evaluated as `p + (cost − p)/(d + 1)` so that `cost` is an exact fixed point.
pub fn forward_price_step(price: f64, arity: usize, step_cost_numeraire: f64) -> Result<f64, BreedError> {
    if !(price > 0.0) {
        return Err(BreedError::NonPositivePrice(price));
    }
    Ok(price + (step_cost_numeraire - price) / (arity as f64 + 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ArbitrageKind {
    NoArbitrage,
    LongBreedingArbitrage,
    /// Only exploitable indirectly: breeding cannot be reversed.
    ShortBreedingArbitrage,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArbitrageVerdict {
    pub kind: ArbitrageKind,
    /// `A·C − B`.
    pub magnitude: f64,
}

/// Compares breeding growth `A·C` on collectible capital `A` with the
/// external tokens `B` it consumes.
pub fn classify_breeding_arbitrage(capital: f64, growth: f64, cost: f64) -> ArbitrageVerdict {
    let gain = capital * growth;
    let magnitude = gain - cost;
    let tolerance = 1e-9 * gain.abs().max(cost.abs()).max(1.0);
    let kind = if magnitude.abs() <= tolerance {
        ArbitrageKind::NoArbitrage
    } else if magnitude > 0.0 {
        ArbitrageKind::LongBreedingArbitrage
    } else {
        ArbitrageKind::ShortBreedingArbitrage
    };
    ArbitrageVerdict { kind, magnitude }
}

/// Value of a collectible with `breeds_remaining` charges, built backwards
/// from an exhausted collectible worth `floor_price`.
///
/// `cost_schedule_numeraire[k - 1]` is the numéraire cost of breeding when
/// `k` charges remain. A charge is only exercised when it pays, so each
/// adds `max(0, child − cost)`.
pub fn lattice_value(
    breeds_remaining: usize,
    floor_price: f64,
    expected_child_value: f64,
    cost_schedule_numeraire: &[f64],
) -> Result<f64, BreedError> {
    if breeds_remaining > cost_schedule_numeraire.len() {
        return Err(BreedError::OutOfRange {
            requested: breeds_remaining,
            available: cost_schedule_numeraire.len(),
        });
    }
    Ok(cost_schedule_numeraire[..breeds_remaining]
        .iter()
        .fold(floor_price, |v, cost| v + (expected_child_value - cost).max(0.0)))
}
