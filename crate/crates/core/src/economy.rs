//! Token universe, ownership state and pool valuations.
//!
//! A game economy holds three kinds of tokens: unique collectibles, a fungible
//! activity token and a fungible market token. All prices are quoted in an
//! external numéraire (e.g. a stablecoin). User `0` is the game's treasury.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Identifier of a single collectible. Assigned sequentially and never reused.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TokenId(pub u64);

impl fmt::Display for TokenId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Index of a user. `UserId::TREASURY` is reserved for the game itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UserId(pub usize);

impl UserId {
    pub const TREASURY: UserId = UserId(0);

    pub fn is_treasury(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for UserId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "user {}", self.0)
    }
}

/// A unique collectible with inherited traits and a lineage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Collectible {
    pub id: TokenId,
    pub traits: Vec<u8>,
    /// Empty for genesis collectibles, otherwise one entry per breeding parent.
    pub parents: Vec<TokenId>,
    pub breed_count: u32,
    pub birth_step: u64,
}

impl Collectible {
    pub fn genesis(id: TokenId, traits: Vec<u8>) -> Self {
        Self {
            id,
            traits,
            parents: Vec::new(),
            breed_count: 0,
            birth_step: 0,
        }
    }

    pub fn is_genesis(&self) -> bool {
        self.parents.is_empty()
    }
}

/// Per-user positions: one sparse row of the ownership matrix plus the two
/// fungible balances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Holdings {
    pub owner: UserId,
    pub collectibles: BTreeSet<TokenId>,
    pub activity_balance: f64,
    pub market_balance: f64,
}

impl Holdings {
    pub fn empty(owner: UserId) -> Self {
        Self {
            owner,
            collectibles: BTreeSet::new(),
            activity_balance: 0.0,
            market_balance: 0.0,
        }
    }

    pub fn with_balances(owner: UserId, activity_balance: f64, market_balance: f64) -> Self {
        Self {
            activity_balance,
            market_balance,
            ..Self::empty(owner)
        }
    }
}

/// Spot prices in the numéraire.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceBoard {
    pub collectible_prices: BTreeMap<TokenId, f64>,
    pub activity_price: f64,
    pub market_price: f64,
    pub floor_price: f64,
}

impl PriceBoard {
    pub fn new(activity_price: f64, market_price: f64, floor_price: f64) -> Self {
        Self {
            collectible_prices: BTreeMap::new(),
            activity_price,
            market_price,
            floor_price,
        }
    }

    pub fn price_of(&self, id: TokenId) -> Option<f64> {
        self.collectible_prices.get(&id).copied()
    }

    /// Checks positivity of every price and that the floor does not exceed
    /// any listed collectible.
    pub fn validate(&self) -> Result<(), EconomyError> {
        let positive = |name: &'static str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(EconomyError::InvalidPrice { name: name.into(), value: v })
            }
        };
        positive("activity_price", self.activity_price)?;
        positive("market_price", self.market_price)?;
        positive("floor_price", self.floor_price)?;
        for (id, &p) in &self.collectible_prices {
            if !(p.is_finite() && p > 0.0) {
                return Err(EconomyError::InvalidPrice { name: id.to_string(), value: p });
            }
            if p < self.floor_price {
                return Err(EconomyError::BelowFloor { id: *id, price: p, floor: self.floor_price });
            }
        }
        Ok(())
    }
}

/// Every collectible ever minted, keyed by id. Ids are handed out in
/// increasing order and never reused.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Population {
    members: BTreeMap<TokenId, Collectible>,
    next_id: u64,
}

impl Population {
    pub fn new() -> Self {
        Self::default()
    }

    /// Reserves the next unused id.
    pub fn allocate_id(&mut self) -> TokenId {
        let id = TokenId(self.next_id);
        self.next_id += 1;
        id
    }

    /// Inserts a collectible whose id was obtained from [`Population::allocate_id`].
    pub fn insert(&mut self, collectible: Collectible) {
        assert!(collectible.id.0 < self.next_id, "collectible id was not allocated");
        let previous = self.members.insert(collectible.id, collectible);
        assert!(previous.is_none(), "collectible id reused");
    }

    pub fn get(&self, id: TokenId) -> Option<&Collectible> {
        self.members.get(&id)
    }

    pub fn get_mut(&mut self, id: TokenId) -> Option<&mut Collectible> {
        self.members.get_mut(&id)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Collectible> {
        self.members.values()
    }
}

/// Outstanding fungible supply: `R` activity tokens and `S` market tokens.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SupplyCounters {
    pub activity_supply: f64,
    pub market_supply: f64,
}

impl SupplyCounters {
    /// Sums balances over every holder, treasury included.
    pub fn from_holdings(holdings: &[Holdings]) -> Self {
        holdings.iter().fold(Self::default(), |acc, h| Self {
            activity_supply: acc.activity_supply + h.activity_balance,
            market_supply: acc.market_supply + h.market_balance,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EconomyError {
    #[error("no price listed for owned collectible {0}")]
    MissingPrice(TokenId),
    #[error("collectible {id} is held by both {first} and {second}")]
    OwnershipConflict { id: TokenId, first: UserId, second: UserId },
    #[error("price {name} = {value} must be finite and positive")]
    InvalidPrice { name: String, value: f64 },
    #[error("collectible {id} priced at {price} below floor {floor}")]
    BelowFloor { id: TokenId, price: f64, floor: f64 },
    #[error("Φ by token ({flat}) differs from Φ by user ({by_user})")]
    PoolMismatch { flat: f64, by_user: f64 },
}

/// Builds the ownership column map TokenId → owner, rejecting double ownership.
fn ownership_columns(holdings: &[Holdings]) -> Result<BTreeMap<TokenId, UserId>, EconomyError> {
    let mut owners = BTreeMap::new();
    for h in holdings {
        for &id in &h.collectibles {
            if let Some(first) = owners.insert(id, h.owner) {
                return Err(EconomyError::OwnershipConflict { id, first, second: h.owner });
            }
        }
    }
    Ok(owners)
}

/// Φ as a flat sum `Σ_j â_j p_j` over tokens in ascending id order.
pub fn collectible_pool_value_flat(
    holdings: &[Holdings],
    board: &PriceBoard,
) -> Result<f64, EconomyError> {
    let owners = ownership_columns(holdings)?;
    owners.keys().try_fold(0.0, |acc, &id| {
        board
            .price_of(id)
            .map(|p| acc + p)
            .ok_or(EconomyError::MissingPrice(id))
    })
}

/// Φ_Mcap as the double sum `Σ_j Σ_k a_kj p_j`, tokens outermost.
pub fn collectible_pool_value_by_user(
    holdings: &[Holdings],
    board: &PriceBoard,
) -> Result<f64, EconomyError> {
    let owners = ownership_columns(holdings)?;
    let mut total = 0.0;
    for &id in owners.keys() {
        let price = board.price_of(id).ok_or(EconomyError::MissingPrice(id))?;
        let column: f64 = holdings
            .iter()
            .map(|h| if h.collectibles.contains(&id) { price } else { 0.0 })
            .sum();
        total += column;
    }
    Ok(total)
}

/// Capital deployed in the collectibles pool (Φ).
///
/// Both summation routes are evaluated; since every column of the ownership
/// matrix has a single non-zero entry they agree bit for bit, and any
/// difference is reported as [`EconomyError::PoolMismatch`].
pub fn collectible_pool_value(holdings: &[Holdings], board: &PriceBoard) -> Result<f64, EconomyError> {
    let flat = collectible_pool_value_flat(holdings, board)?;
    let by_user = collectible_pool_value_by_user(holdings, board)?;
    if flat.to_bits() != by_user.to_bits() {
        return Err(EconomyError::PoolMismatch { flat, by_user });
    }
    Ok(flat)
}

/// Activity-token pool Ψ = R·B and market-token pool Ω = S·C.
pub fn fungible_pool_values(counters: &SupplyCounters, board: &PriceBoard) -> (f64, f64) {
    (
        counters.activity_supply * board.activity_price,
        counters.market_supply * board.market_price,
    )
}

/// Total theoretical value Π = Φ + Ψ + Ω.
pub fn total_value(phi: f64, psi: f64, omega: f64) -> f64 {
    phi + psi + omega
}

/// Numéraire value of a single user's position.
pub fn holding_value(h: &Holdings, board: &PriceBoard) -> Result<f64, EconomyError> {
    let mut value = 0.0;
    for &id in &h.collectibles {
        value += board.price_of(id).ok_or(EconomyError::MissingPrice(id))?;
    }
    Ok(value + h.activity_balance * board.activity_price + h.market_balance * board.market_price)
}
