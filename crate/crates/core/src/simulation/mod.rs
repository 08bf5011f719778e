//! Time-stepped, seed-deterministic economy simulation.
//!
//! Each step every agent (ascending id) takes at most one action, an open
//! minority round is checked against its stopping rule, prices are updated
//! and the economy invariants are verified. All randomness flows through a
//! single [`SimRng`], so a `(config, seed)` pair always produces the same
//! event log.

mod collateral;
mod config;
mod events;
mod ruin;

pub use collateral::{collateral_loop, CollateralOutcome, CollateralRun, CollateralSpec};
pub use config::{
    ActivitySpecs, AgentSpec, BattleConfig, CollectiblePricing, InitialBoard, InitialHoldings, MinorityConfig,
    PriceUpdate, SimConfig, Strategy, TreasuryBalances,
};
pub use events::{Action, Event, EventLog, Payout, TokenFlows};
pub use ruin::{ruin_probability, RuinEstimate};

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::activities::{classify_lottery, minority_settle, minority_should_stop, Settlement, Side};
use crate::breeding::{breed, find_breeding_set, forward_price_step, BreedCost};
use crate::economy::{
    collectible_pool_value, fungible_pool_values, holding_value, total_value, Collectible, Holdings,
    Population, PriceBoard, SupplyCounters, TokenId, UserId,
};
use crate::rng::SimRng;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invariant violated at step {step}: {detail}")]
    InvariantViolation {
        step: u64,
        detail: String,
        record: Option<Box<Event>>,
    },
    #[error("unknown agent {0}")]
    UnknownAgent(UserId),
}

/// Pool values and per-agent wealth after a step (step 0 is the initial state).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EconomySnapshot {
    pub step: u64,
    pub phi: f64,
    pub psi: f64,
    pub omega: f64,
    pub pi: f64,
    pub collectible_count: usize,
    /// Numéraire wealth of each agent, ascending agent id.
    pub agent_wealth: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionCounts {
    pub breed: u64,
    pub battle: u64,
    pub adventure: u64,
    pub pass: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentSummary {
    pub id: UserId,
    pub strategy: String,
    pub initial_wealth: f64,
    pub final_wealth: f64,
    /// Realised change in numéraire wealth over the run.
    pub total_earnings: f64,
    pub ruined: bool,
    pub ruin_step: Option<u64>,
    pub actions: ActionCounts,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOutput {
    pub log: EventLog,
    pub snapshots: Vec<EconomySnapshot>,
    pub agents: Vec<AgentSummary>,
}

impl SimOutput {
    pub fn final_snapshot(&self) -> &EconomySnapshot {
        self.snapshots.last().expect("a run has at least the initial snapshot")
    }
}

/// Runs `config` on the main random stream of `config.seed`.
pub fn run_simulation(config: &SimConfig) -> Result<SimOutput, SimError> {
    run_on_stream(config, 0)
}

/// Runs `config` on sub-stream `stream` of `config.seed`.
pub fn run_on_stream(config: &SimConfig, stream: u64) -> Result<SimOutput, SimError> {
    config.validate()?;
    let mut engine = Engine::new(config, SimRng::with_stream(config.seed, stream))?;
    for _ in 0..config.steps {
        engine.step()?;
    }
    Ok(engine.finish())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Intent {
    Breed,
    Battle,
    Adventure,
    Pass,
}

#[derive(Debug, Clone)]
struct MinorityRound {
    side1: Vec<(UserId, f64)>,
    side2: Vec<(UserId, f64)>,
    elapsed: u64,
}

impl MinorityRound {
    fn pool_total(&self) -> f64 {
        self.side1.iter().chain(&self.side2).map(|s| s.1).sum()
    }

    fn has_stake_from(&self, user: UserId) -> bool {
        self.side1.iter().chain(&self.side2).any(|s| s.0 == user)
    }
}

const BALANCE_TOLERANCE: f64 = 1e-9;

struct Engine<'a> {
    config: &'a SimConfig,
    /// Indices into `config.agents`, ascending id. Agent `order[i]` owns `holdings[i + 1]`.
    order: Vec<usize>,
    population: Population,
    holdings: Vec<Holdings>,
    board: PriceBoard,
    supply: SupplyCounters,
    round: Option<MinorityRound>,
    rng: SimRng,
    log: EventLog,
    snapshots: Vec<EconomySnapshot>,
    step: u64,
    ruin_step: Vec<Option<u64>>,
    counts: Vec<ActionCounts>,
}

impl<'a> Engine<'a> {
    fn new(config: &'a SimConfig, rng: SimRng) -> Result<Self, SimError> {
        let mut order: Vec<usize> = (0..config.agents.len()).collect();
        order.sort_by_key(|&i| config.agents[i].id);
        let mut holdings = vec![Holdings::with_balances(
            UserId::TREASURY,
            config.treasury.activity_balance,
            config.treasury.market_balance,
        )];
        for &i in &order {
            let a = &config.agents[i];
            holdings.push(Holdings::with_balances(
                UserId(a.id),
                a.holdings.activity_balance,
                a.holdings.market_balance,
            ));
        }
        let b = &config.board;
        let mut engine = Self {
            config,
            population: Population::new(),
            supply: SupplyCounters::from_holdings(&holdings),
            holdings,
            board: PriceBoard::new(b.activity_price, b.market_price, b.floor_price),
            round: None,
            rng,
            log: EventLog::new(),
            snapshots: Vec::new(),
            step: 0,
            ruin_step: vec![None; order.len()],
            counts: vec![ActionCounts::default(); order.len()],
            order,
        };
        engine.mint_genesis();
        engine.check_invariants()?;
        engine.detect_ruin();
        engine.snapshot()?;
        Ok(engine)
    }

    fn agent(&self, slot: usize) -> &'a crate::simulation::AgentSpec {
        &self.config.agents[self.order[slot - 1]]
    }

    fn user(&self, slot: usize) -> UserId {
        self.holdings[slot].owner
    }

    fn emit(&mut self, agent: UserId, action: Action, flows: TokenFlows, draws_before: u64) {
        self.supply.activity_supply += flows.net_activity();
        self.supply.market_supply += flows.net_market();
        self.log.push(Event {
            step: self.step,
            agent,
            action,
            flows,
            rng_draws: self.rng.draws() - draws_before,
        });
    }

    fn mint_genesis(&mut self) {
        let rules = &self.config.rules;
        let price = self.config.board.genesis_price;
        for slot in 1..self.holdings.len() {
            let draws = self.rng.draws();
            let mut tokens = Vec::new();
            for _ in 0..self.agent(slot).holdings.collectibles {
                let id = self.population.allocate_id();
                let traits = (0..rules.trait_count)
                    .map(|_| self.rng.random_range(0..rules.trait_alphabet))
                    .collect();
                self.population.insert(Collectible::genesis(id, traits));
                self.holdings[slot].collectibles.insert(id);
                self.board.collectible_prices.insert(id, price);
                tokens.push(id);
            }
            if !tokens.is_empty() {
                let user = self.user(slot);
                self.emit(user, Action::Genesis { tokens, price }, TokenFlows::default(), draws);
            }
        }
    }

    fn step(&mut self) -> Result<(), SimError> {
        self.step += 1;
        for slot in 1..self.holdings.len() {
            let intent = self.decide(slot);
            self.execute(slot, intent)?;
        }
        self.advance_minority_round()?;
        if self.config.price_update == PriceUpdate::ForwardDrift {
            self.drift_prices()?;
        }
        self.check_invariants()?;
        self.detect_ruin();
        self.snapshot()
    }

    // ---- feasibility -------------------------------------------------------

    fn breed_plan(&self, slot: usize) -> Option<(Vec<TokenId>, BreedCost)> {
        let rules = &self.config.rules;
        let owner = &self.holdings[slot];
        let parents = find_breeding_set(owner, &self.population, rules, self.step)?;
        let lead = self.population.get(parents[0])?;
        let cost = rules.breed_cost(lead.breed_count, &self.board)?;
        let affordable = owner.activity_balance >= cost.activity_amount && owner.market_balance >= cost.market_amount;
        affordable.then_some((parents, cost))
    }

    fn battle_feasible(&self, slot: usize) -> bool {
        let h = &self.holdings[slot];
        let team = h.collectibles.len() >= self.config.specs.battle.team_size;
        match &self.config.specs.minority {
            Some(m) => team && h.market_balance >= m.stake,
            None => team && h.market_balance > 0.0,
        }
    }

    fn adventure_feasible(&self, slot: usize) -> bool {
        let h = &self.holdings[slot];
        match &self.config.specs.lottery {
            Some(l) => h.market_balance >= l.stake,
            None => {
                h.collectibles.len() >= self.config.specs.adventure.collectibles_required && h.market_balance > 0.0
            }
        }
    }

    fn can_afford_any(&self, slot: usize) -> bool {
        self.breed_plan(slot).is_some() || self.battle_feasible(slot) || self.adventure_feasible(slot)
    }

    // ---- decisions ---------------------------------------------------------

    fn decide(&self, slot: usize) -> Option<Intent> {
        match self.agent(slot).strategy {
            Strategy::Passive => None,
            Strategy::FixedMix(mix) => {
                let period = mix.period() as u64;
                if period == 0 {
                    return Some(Intent::Pass);
                }
                let pos = (self.step - 1) % period;
                Some(if pos < mix.breed as u64 {
                    Intent::Breed
                } else if pos < (mix.breed + mix.battle) as u64 {
                    Intent::Battle
                } else {
                    Intent::Adventure
                })
            }
            Strategy::GrowthMaximizer => Some(self.growth_choice(slot)),
            Strategy::ThrillSeeker => Some(if self.adventure_feasible(slot) {
                Intent::Adventure
            } else if self.battle_feasible(slot) {
                Intent::Battle
            } else {
                Intent::Pass
            }),
        }
    }

    fn expected_child_price(&self) -> f64 {
        match &self.config.pricing {
            CollectiblePricing::Floor => self.board.floor_price,
            CollectiblePricing::TraitPremium(premium) => {
                let mean_trait = (self.config.rules.trait_alphabet as f64 - 1.0) / 2.0;
                self.board.floor_price + premium.iter().sum::<f64>() * mean_trait
            }
        }
    }

    /// Action with the highest utility change at average outcomes; ties go
    /// to the earlier of breed, battle, adventure, pass.
    fn growth_choice(&self, slot: usize) -> Intent {
        let h = &self.holdings[slot];
        let utility = self.agent(slot).utility;
        let Ok(wealth) = holding_value(h, &self.board) else { return Intent::Pass };
        let Ok(base) = utility.utility(wealth) else { return Intent::Pass };
        let c = self.board.market_price;
        let specs = &self.config.specs;

        let mut candidates: Vec<(Intent, f64)> = Vec::with_capacity(4);
        if let Some((_, cost)) = self.breed_plan(slot) {
            candidates.push((Intent::Breed, wealth - cost.numeraire_total + self.expected_child_price()));
        }
        if self.battle_feasible(slot) {
            let after = match &specs.minority {
                Some(m) => wealth + (m.rake_fraction - 1.0) * m.stake * c,
                None => wealth + (specs.battle.spec().survival_fraction - 1.0) * h.market_balance * c,
            };
            candidates.push((Intent::Battle, after));
        }
        if self.adventure_feasible(slot) {
            let after = match &specs.lottery {
                Some(l) => wealth + classify_lottery(l, &self.board).player_ev * c,
                None => wealth + (specs.adventure.reward_multiplier - 1.0) * h.market_balance * c,
            };
            candidates.push((Intent::Adventure, after));
        }
        candidates.push((Intent::Pass, wealth));

        let mut best = (Intent::Pass, f64::NEG_INFINITY);
        for (intent, after) in candidates {
            let gain = utility.utility(after).map(|u| u - base).unwrap_or(f64::NEG_INFINITY);
            if gain > best.1 {
                best = (intent, gain);
            }
        }
        best.0
    }

    // ---- execution ---------------------------------------------------------

    fn pass(&mut self, slot: usize, reason: &str) {
        let user = self.user(slot);
        self.counts[slot - 1].pass += 1;
        let draws = self.rng.draws();
        self.emit(user, Action::Pass { reason: reason.into() }, TokenFlows::default(), draws);
    }

    fn execute(&mut self, slot: usize, intent: Option<Intent>) -> Result<(), SimError> {
        match intent {
            None => {
                self.counts[slot - 1].pass += 1;
                Ok(())
            }
            Some(Intent::Pass) => {
                self.pass(slot, "no profitable or affordable action");
                Ok(())
            }
            Some(Intent::Breed) => match self.breed_plan(slot) {
                Some((parents, _)) => self.do_breed(slot, &parents),
                None => {
                    self.pass(slot, "breeding not possible");
                    Ok(())
                }
            },
            Some(Intent::Battle) if self.battle_feasible(slot) => {
                self.counts[slot - 1].battle += 1;
                if self.config.specs.minority.is_some() {
                    self.do_minority_stake(slot);
                } else {
                    self.do_house_battle(slot);
                }
                Ok(())
            }
            Some(Intent::Battle) => {
                self.pass(slot, "battle not affordable");
                Ok(())
            }
            Some(Intent::Adventure) if self.adventure_feasible(slot) => {
                self.counts[slot - 1].adventure += 1;
                if self.config.specs.lottery.is_some() {
                    self.do_lottery(slot);
                } else {
                    self.do_adventure(slot);
                }
                Ok(())
            }
            Some(Intent::Adventure) => {
                self.pass(slot, "adventure not affordable");
                Ok(())
            }
        }
    }

    fn child_price(&self, child: &Collectible) -> f64 {
        match &self.config.pricing {
            CollectiblePricing::Floor => self.board.floor_price,
            CollectiblePricing::TraitPremium(premium) => {
                self.board.floor_price
                    + premium.iter().zip(&child.traits).map(|(p, &t)| p * t as f64).sum::<f64>()
            }
        }
    }

    fn do_breed(&mut self, slot: usize, parents: &[TokenId]) -> Result<(), SimError> {
        let draws = self.rng.draws();
        let rules = &self.config.rules;
        let outcome = breed(
            parents,
            &mut self.holdings[slot],
            &mut self.population,
            rules,
            &self.board,
            self.step,
            &mut self.rng,
        )
        .map_err(|e| SimError::InvariantViolation {
            step: self.step,
            detail: format!("planned breeding failed: {e}"),
            record: self.log.last().cloned().map(Box::new),
        })?;
        let price = self.child_price(&outcome.child);
        self.board.collectible_prices.insert(outcome.child.id, price);
        let cost = outcome.cost;
        let flows = if rules.burn_breeding_tokens {
            TokenFlows { activity_burned: cost.activity_amount, market_burned: cost.market_amount, ..TokenFlows::default() }
        } else {
            let treasury = &mut self.holdings[0];
            treasury.activity_balance += cost.activity_amount;
            treasury.market_balance += cost.market_amount;
            TokenFlows::default()
        };
        self.counts[slot - 1].breed += 1;
        let user = self.user(slot);
        let action = Action::Breed {
            parents: parents.to_vec(),
            child: outcome.child.id,
            child_price: price,
            activity_cost: cost.activity_amount,
            market_cost: cost.market_amount,
        };
        self.emit(user, action, flows, draws);
        Ok(())
    }

    fn do_house_battle(&mut self, slot: usize) {
        let draws = self.rng.draws();
        let battle = &self.config.specs.battle;
        let won = self.rng.random::<f64>() < battle.win_prob;
        let fraction = if won { battle.win_fraction } else { battle.loss_fraction };
        let h = &mut self.holdings[slot];
        let before = h.market_balance;
        h.market_balance = before * fraction;
        let after = h.market_balance;
        let user = self.user(slot);
        self.emit(
            user,
            Action::Battle { won, market_before: before, market_after: after },
            TokenFlows::market_change(after - before),
            draws,
        );
    }

    fn do_minority_stake(&mut self, slot: usize) {
        let Some(m) = &self.config.specs.minority else { return };
        let draws = self.rng.draws();
        let side = if self.rng.random::<bool>() { Side::One } else { Side::Two };
        let user = self.user(slot);
        self.holdings[slot].market_balance -= m.stake;
        self.holdings[0].market_balance += m.stake;
        let round = self.round.get_or_insert_with(|| MinorityRound { side1: Vec::new(), side2: Vec::new(), elapsed: 0 });
        match side {
            Side::One => round.side1.push((user, m.stake)),
            Side::Two => round.side2.push((user, m.stake)),
        }
        let pool_total = round.pool_total();
        self.emit(user, Action::MinorityStake { side, stake: m.stake, pool_total }, TokenFlows::default(), draws);
    }

    fn do_adventure(&mut self, slot: usize) {
        let draws = self.rng.draws();
        let multiplier = self.config.specs.adventure.reward_multiplier;
        let h = &mut self.holdings[slot];
        let before = h.market_balance;
        h.market_balance = before * multiplier;
        let after = h.market_balance;
        let user = self.user(slot);
        self.emit(
            user,
            Action::Adventure { market_before: before, market_after: after },
            TokenFlows::market_change(after - before),
            draws,
        );
    }

    fn do_lottery(&mut self, slot: usize) {
        let Some(lottery) = &self.config.specs.lottery else { return };
        let draws = self.rng.draws();
        let won = self.rng.random::<f64>() >= lottery.loss_prob;
        let h = &mut self.holdings[slot];
        let flows = if won {
            h.market_balance += lottery.win_market_tokens;
            h.activity_balance += lottery.win_game_tokens;
            TokenFlows {
                market_minted: lottery.win_market_tokens,
                activity_minted: lottery.win_game_tokens,
                ..TokenFlows::default()
            }
        } else {
            h.market_balance -= lottery.stake;
            TokenFlows { market_burned: lottery.stake, ..TokenFlows::default() }
        };
        let action = Action::Lottery {
            won,
            stake: lottery.stake,
            market_after: h.market_balance,
            activity_after: h.activity_balance,
        };
        let user = self.user(slot);
        self.emit(user, action, flows, draws);
    }

    fn advance_minority_round(&mut self) -> Result<(), SimError> {
        let Some(m) = &self.config.specs.minority else { return Ok(()) };
        let Some(round) = self.round.as_mut() else { return Ok(()) };
        let draws = self.rng.draws();
        round.elapsed += 1;
        let pool = round.pool_total();
        if !minority_should_stop(&m.stopping_rule, round.elapsed, pool, &mut self.rng) {
            return Ok(());
        }
        let round = self.round.take().expect("round is open");
        let settlement = if round.side1.is_empty() || round.side2.is_empty() {
            let mut payouts = BTreeMap::new();
            for &(user, stake) in round.side1.iter().chain(&round.side2) {
                *payouts.entry(user).or_insert(0.0) += stake;
            }
            Settlement { winner: None, payouts, organizer_net: 0.0 }
        } else {
            minority_settle(&round.side1, &round.side2, &m.spec()).map_err(|e| SimError::InvariantViolation {
                step: self.step,
                detail: format!("minority settlement failed: {e}"),
                record: self.log.last().cloned().map(Box::new),
            })?
        };
        let subsidy = if settlement.winner.is_some() { m.sponsor_subsidy } else { 0.0 };
        self.holdings[0].market_balance += subsidy;
        for (&user, &payout) in &settlement.payouts {
            self.holdings[0].market_balance -= payout;
            let slot = self.slot_of(user).ok_or(SimError::UnknownAgent(user))?;
            self.holdings[slot].market_balance += payout;
        }
        let flows = TokenFlows { market_minted: subsidy, ..TokenFlows::default() };
        let action = Action::MinoritySettle {
            winner: settlement.winner,
            payouts: settlement.payouts.iter().map(|(&agent, &amount)| Payout { agent, amount }).collect(),
            organizer_net: settlement.organizer_net,
            subsidy,
        };
        self.emit(UserId::TREASURY, action, flows, draws);
        Ok(())
    }

    fn slot_of(&self, user: UserId) -> Option<usize> {
        self.holdings.iter().position(|h| h.owner == user)
    }

    fn drift_prices(&mut self) -> Result<(), SimError> {
        let draws = self.rng.draws();
        let rules = &self.config.rules;
        let step_cost = rules.breed_cost(0, &self.board).map(|c| c.numeraire_total).unwrap_or(0.0);
        let d = rules.breed_arity;
        let step = self.step;
        let err = |e: crate::breeding::BreedError| SimError::InvariantViolation {
            step,
            detail: format!("price drift failed: {e}"),
            record: None,
        };
        for p in self.board.collectible_prices.values_mut() {
            *p = forward_price_step(*p, d, step_cost).map_err(err)?;
        }
        self.board.floor_price = forward_price_step(self.board.floor_price, d, step_cost).map_err(err)?;
        let floor_price = self.board.floor_price;
        self.emit(UserId::TREASURY, Action::PriceUpdate { floor_price, step_cost }, TokenFlows::default(), draws);
        Ok(())
    }

    // ---- invariants and reporting -------------------------------------------

    fn violation(&self, detail: String) -> SimError {
        SimError::InvariantViolation {
            step: self.step,
            detail,
            record: self.log.last().cloned().map(Box::new),
        }
    }

    fn check_invariants(&self) -> Result<(), SimError> {
        let rules = &self.config.rules;
        let mut seen = BTreeSet::new();
        for h in &self.holdings {
            for &id in &h.collectibles {
                if !seen.insert(id) {
                    return Err(self.violation(format!("{id} held twice")));
                }
                if self.population.get(id).is_none() {
                    return Err(self.violation(format!("{} holds unknown {id}", h.owner)));
                }
            }
            if h.activity_balance < -BALANCE_TOLERANCE || h.market_balance < -BALANCE_TOLERANCE {
                return Err(self.violation(format!("{} has a negative balance", h.owner)));
            }
        }
        if seen.len() != self.population.len() {
            return Err(self.violation(format!(
                "{} collectibles owned but {} minted",
                seen.len(),
                self.population.len()
            )));
        }
        for c in self.population.iter() {
            if c.breed_count > rules.breed_limit {
                return Err(self.violation(format!("{} bred {} times", c.id, c.breed_count)));
            }
            for p in &c.parents {
                let parent_birth = self.population.get(*p).map(|p| p.birth_step).unwrap_or(u64::MAX);
                if parent_birth >= c.birth_step {
                    return Err(self.violation(format!("{} is not younger than parent {p}", c.id)));
                }
            }
        }
        self.board.validate().map_err(|e| self.violation(e.to_string()))?;
        let actual = SupplyCounters::from_holdings(&self.holdings);
        for (name, tracked, held) in [
            ("activity", self.supply.activity_supply, actual.activity_supply),
            ("market", self.supply.market_supply, actual.market_supply),
        ] {
            if (tracked - held).abs() > BALANCE_TOLERANCE * tracked.abs().max(1.0) {
                return Err(self.violation(format!(
                    "{name} supply {held} held but {tracked} after recorded mints and burns"
                )));
            }
        }
        Ok(())
    }

    fn detect_ruin(&mut self) {
        for slot in 1..self.holdings.len() {
            if self.ruin_step[slot - 1].is_some() {
                continue;
            }
            let user = self.user(slot);
            let pending = self.round.as_ref().is_some_and(|r| r.has_stake_from(user));
            if !pending && !self.can_afford_any(slot) {
                self.ruin_step[slot - 1] = Some(self.step);
                let draws = self.rng.draws();
                self.emit(user, Action::Ruined, TokenFlows::default(), draws);
            }
        }
    }

    fn snapshot(&mut self) -> Result<(), SimError> {
        let phi = collectible_pool_value(&self.holdings, &self.board).map_err(|e| self.violation(e.to_string()))?;
        let counters = SupplyCounters::from_holdings(&self.holdings);
        let (psi, omega) = fungible_pool_values(&counters, &self.board);
        let agent_wealth = self.holdings[1..]
            .iter()
            .map(|h| holding_value(h, &self.board))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| self.violation(e.to_string()))?;
        self.snapshots.push(EconomySnapshot {
            step: self.step,
            phi,
            psi,
            omega,
            pi: total_value(phi, psi, omega),
            collectible_count: self.population.len(),
            agent_wealth,
        });
        Ok(())
    }

    fn finish(self) -> SimOutput {
        let first = &self.snapshots[0];
        let last = self.snapshots.last().expect("initial snapshot");
        let agents = (1..self.holdings.len())
            .map(|slot| {
                let spec = self.agent(slot);
                let initial = first.agent_wealth[slot - 1];
                let fin = last.agent_wealth[slot - 1];
                AgentSummary {
                    id: UserId(spec.id),
                    strategy: spec.strategy.label().to_string(),
                    initial_wealth: initial,
                    final_wealth: fin,
                    total_earnings: fin - initial,
                    ruined: self.ruin_step[slot - 1].is_some(),
                    ruin_step: self.ruin_step[slot - 1],
                    actions: self.counts[slot - 1],
                }
            })
            .collect();
        SimOutput { log: self.log, snapshots: self.snapshots, agents }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::activities::{LotterySpec, StoppingRule, StrategyMix};
    use crate::analytics::UtilitySpec;

    fn agent(id: usize, strategy: Strategy, collectibles: u32, activity: f64, market: f64) -> AgentSpec {
        AgentSpec {
            id,
            strategy,
            utility: UtilitySpec::Log,
            holdings: InitialHoldings { collectibles, activity_balance: activity, market_balance: market },
        }
    }

    fn mixed_config() -> SimConfig {
        let mix = StrategyMix { breed: 1, battle: 1, adventure: 1 };
        let mut cfg = SimConfig::with_agents(vec![
            agent(1, Strategy::FixedMix(mix), 4, 100.0, 20.0),
            agent(2, Strategy::GrowthMaximizer, 4, 100.0, 20.0),
            agent(3, Strategy::ThrillSeeker, 3, 10.0, 5.0),
            agent(4, Strategy::Passive, 2, 1.0, 1.0),
        ]);
        cfg.steps = 30;
        cfg.seed = 7;
        cfg
    }

    #[test]
    fn same_seed_same_run() {
        let cfg = mixed_config();
        let a = run_simulation(&cfg).unwrap();
        let b = run_simulation(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.log.to_jsonl(), b.log.to_jsonl());
        assert_eq!(a.snapshots.len(), 31);
    }

    #[test]
    fn different_streams_differ() {
        let cfg = mixed_config();
        assert_ne!(run_on_stream(&cfg, 1).unwrap().log, run_on_stream(&cfg, 2).unwrap().log);
    }

    #[test]
    fn passive_economy_is_frozen() {
        let cfg = SimConfig::with_agents(vec![
            agent(1, Strategy::Passive, 3, 5.0, 5.0),
            agent(2, Strategy::Passive, 1, 0.0, 2.0),
        ]);
        let out = run_simulation(&cfg).unwrap();
        let first = &out.snapshots[0];
        for s in &out.snapshots {
            assert_eq!((s.phi, s.psi, s.omega, s.pi), (first.phi, first.psi, first.omega, first.pi));
            assert_eq!(s.agent_wealth, first.agent_wealth);
        }
        assert!(out.agents.iter().all(|a| !a.ruined && a.total_earnings == 0.0));
    }

    #[test]
    fn agents_act_in_id_order() {
        let mut cfg = mixed_config();
        cfg.agents.reverse();
        let out = run_simulation(&cfg).unwrap();
        for step in 1..=cfg.steps {
            let ids: Vec<usize> = out
                .log
                .at_step(step)
                .filter(|e| e.agent != UserId::TREASURY && e.action != Action::Ruined)
                .map(|e| e.agent.0)
                .collect();
            assert!(ids.windows(2).all(|w| w[0] < w[1]), "step {step}: {ids:?}");
        }
    }

    #[test]
    fn breeding_grows_population_and_burns_tokens() {
        let mix = StrategyMix { breed: 1, battle: 0, adventure: 0 };
        let mut cfg = SimConfig::with_agents(vec![agent(1, Strategy::FixedMix(mix), 2, 1000.0, 100.0)]);
        cfg.steps = 6;
        let out = run_simulation(&cfg).unwrap();
        let breeds = out.log.events().iter().filter(|e| e.action.kind() == "breed").count();
        assert!(breeds > 0);
        assert_eq!(out.final_snapshot().collectible_count, 2 + breeds);
        let burned: f64 = out.log.events().iter().map(|e| e.flows.activity_burned).sum();
        let psi_drop = out.snapshots[0].psi - out.final_snapshot().psi;
        assert!((psi_drop - burned * cfg.board.activity_price).abs() < 1e-9);
    }

    #[test]
    fn passive_agent_never_ruined_and_broke_agent_ruined_at_start() {
        let cfg = SimConfig::with_agents(vec![
            agent(1, Strategy::Passive, 0, 0.0, 0.0),
            agent(2, Strategy::Passive, 3, 50.0, 50.0),
        ]);
        let out = run_simulation(&cfg).unwrap();
        assert_eq!(out.agents[0].ruin_step, Some(0));
        assert!(!out.agents[1].ruined);
    }

    fn gambler(market: f64, steps: u64) -> SimConfig {
        let mut cfg = SimConfig::with_agents(vec![agent(1, Strategy::ThrillSeeker, 0, 0.0, market)]);
        cfg.specs.lottery =
            Some(LotterySpec { loss_prob: 0.5, stake: 1.0, win_game_tokens: 0.0, win_market_tokens: 1.0 });
        cfg.steps = steps;
        cfg
    }

    #[test]
    fn fair_lottery_ruin_matches_enumeration() {
        fn ruined(balance: i32, steps_left: u32) -> f64 {
            if balance < 1 {
                return 1.0;
            }
            if steps_left == 0 {
                return 0.0;
            }
            0.5 * ruined(balance + 1, steps_left - 1) + 0.5 * ruined(balance - 1, steps_left - 1)
        }
        let exact = ruined(2, 5);
        let est = ruin_probability(&gambler(2.0, 5), UserId(1), 4000).unwrap();
        assert!(
            (est.probability - exact).abs() < 3.0 * est.std_error,
            "{} vs {exact} (se {})",
            est.probability,
            est.std_error
        );
    }

    #[test]
    fn ruin_probability_extremes() {
        let broke = ruin_probability(&gambler(0.0, 3), UserId(1), 20).unwrap();
        assert_eq!(broke.probability, 1.0);
        let mut cfg = gambler(5.0, 3);
        cfg.agents[0].strategy = Strategy::Passive;
        assert_eq!(ruin_probability(&cfg, UserId(1), 20).unwrap().probability, 0.0);
        assert!(matches!(ruin_probability(&cfg, UserId(9), 1), Err(SimError::UnknownAgent(_))));
    }

    #[test]
    fn minority_rounds_conserve_value() {
        let mut cfg = SimConfig::with_agents(
            (1..=6).map(|i| agent(i, Strategy::FixedMix(StrategyMix { breed: 0, battle: 1, adventure: 0 }), 3, 0.0, 10.0)).collect(),
        );
        cfg.specs.minority = Some(MinorityConfig {
            rake_fraction: 0.9,
            sponsor_subsidy: 0.5,
            stopping_rule: StoppingRule::FixedStep(1),
            stake: 1.0,
        });
        cfg.steps = 12;
        let out = run_simulation(&cfg).unwrap();
        let mut settled = 0;
        for e in out.log.events() {
            if let Action::MinoritySettle { payouts, organizer_net, subsidy, .. } = &e.action {
                let staked: f64 = out
                    .log
                    .at_step(e.step)
                    .filter_map(|s| match s.action {
                        Action::MinorityStake { stake, .. } => Some(stake),
                        _ => None,
                    })
                    .sum();
                let paid: f64 = payouts.iter().map(|p| p.amount).sum();
                assert!((paid + organizer_net - staked).abs() < 1e-12);
                assert!(*subsidy >= 0.0);
                settled += 1;
            }
        }
        assert_eq!(settled, 12);
        let text = out.log.to_jsonl();
        assert_eq!(EventLog::from_jsonl(&text).unwrap(), out.log);
    }

    #[test]
    fn forward_drift_pulls_floor_toward_breeding_cost() {
        let mut cfg = SimConfig::with_agents(vec![agent(1, Strategy::Passive, 1, 0.0, 0.0)]);
        cfg.price_update = PriceUpdate::ForwardDrift;
        cfg.steps = 60;
        let out = run_simulation(&cfg).unwrap();
        let cost = cfg.rules.breed_cost(0, &PriceBoard::new(0.1, 1.0, 1.0)).unwrap().numeraire_total;
        let updates: Vec<f64> = out
            .log
            .events()
            .iter()
            .filter_map(|e| match e.action {
                Action::PriceUpdate { floor_price, .. } => Some(floor_price),
                _ => None,
            })
            .collect();
        let mut p = cfg.board.floor_price;
        for &u in &updates {
            p = forward_price_step(p, cfg.rules.breed_arity, cost).unwrap();
            assert_eq!(u, p);
        }
        assert!((p - cost).abs() < 1e-9);
    }

    #[test]
    fn invalid_config_rejected() {
        let cfg = SimConfig::with_agents(vec![agent(0, Strategy::Passive, 0, 0.0, 0.0)]);
        assert!(matches!(run_simulation(&cfg), Err(SimError::InvalidConfig(_))));
    }
}
