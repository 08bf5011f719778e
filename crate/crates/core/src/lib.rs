//! Deterministic simulator and analytics toolkit for NFT game economies.
//!
//! The crate models a game with three token kinds (collectibles, an activity
//! token and a market token), the activities players use them for, and the
//! valuation and portfolio tools needed to compare games.

pub mod activities;
pub mod analytics;
pub mod breeding;
pub mod economy;
pub mod report;
pub mod rng;
pub mod scenario;
pub mod simulation;
