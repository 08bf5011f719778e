use clap::Subcommand;
use nalgebra::{DMatrix, DVector};
use nftgame_core::analytics::{
    babylon_lottery, envelope_expected_gain, optimal_allocation, optimal_fraction_1d, propitious_check, sharpe_ratio,
    ReturnModel, UtilitySpec,
};
use nftgame_core::breeding::{classify_breeding_arbitrage, lattice_value, GameRules};
use nftgame_core::economy::PriceBoard;
use serde_json::{json, Value};

use crate::InputError;

fn finite(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|e| format!("{s:?}: {e}"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{s:?} is not finite"))
    }
}

/// Rows separated by `;`, entries by `,`.
fn matrix(s: &str) -> Result<Vec<Vec<f64>>, String> {
    s.split(';').map(|row| row.split(',').map(finite).collect()).collect()
}

#[derive(Debug, Subcommand)]
pub enum Analysis {
    /// Sharpe ratio over a horizon and the growth-optimal single-asset fraction.
    Sharpe {
        /// Expected return per unit time.
        #[arg(long, value_parser = finite, conflicts_with = "excess", required_unless_present = "excess")]
        mean: Option<f64>,
        /// Excess return over the riskless rate, instead of `--mean`.
        #[arg(long, value_parser = finite)]
        excess: Option<f64>,
        #[arg(long, value_parser = finite, default_value_t = 0.0)]
        riskless: f64,
        #[arg(long, value_parser = finite)]
        vol: f64,
        #[arg(long, value_parser = finite, default_value_t = 1.0)]
        horizon: f64,
    },
    /// Growth-optimal allocation across several assets.
    Allocate {
        /// Comma-separated drifts, one per asset.
        #[arg(long, value_parser = finite, value_delimiter = ',', required = true)]
        mean: Vec<f64>,
        #[arg(long, value_parser = finite, default_value_t = 0.0)]
        riskless: f64,
        /// Factor loadings: one row per factor separated by `;`, one column per asset.
        #[arg(long)]
        vol: String,
        #[arg(long, value_parser = finite, default_value_t = 1.0)]
        horizon: f64,
    },
    /// Expected gains of both sides of a currency envelope swap.
    Envelope {
        #[arg(long, value_parser = finite)]
        up: f64,
        #[arg(long, value_parser = finite)]
        down: f64,
        #[arg(long, value_parser = finite, default_value_t = 0.5)]
        prob: f64,
    },
    /// Utility check of the eleven-player lottery.
    Propitious {
        /// Power-utility exponent of the risk seeker.
        #[arg(long, value_parser = finite, default_value_t = 8.0)]
        seeker_exponent: f64,
        /// Power-utility exponent of the ten averse players (log utility if omitted).
        #[arg(long, value_parser = finite)]
        averse_exponent: Option<f64>,
    },
    /// Value of a collectible with breed charges left.
    Lattice {
        #[arg(long)]
        breeds_remaining: usize,
        #[arg(long, value_parser = finite)]
        floor: f64,
        #[arg(long, value_parser = finite)]
        child_value: f64,
        /// Numéraire cost when k charges remain, k = 1, 2, ... Defaults to the
        /// standard schedule at `--activity-price` and `--market-price`.
        #[arg(long, value_parser = finite, value_delimiter = ',')]
        costs: Option<Vec<f64>>,
        #[arg(long, value_parser = finite, default_value_t = 0.1)]
        activity_price: f64,
        #[arg(long, value_parser = finite, default_value_t = 1.0)]
        market_price: f64,
    },
    /// Compare breeding growth on collectible capital with the tokens it consumes.
    Arbitrage {
        #[arg(long, value_parser = finite)]
        capital: f64,
        #[arg(long, value_parser = finite)]
        growth: f64,
        #[arg(long, value_parser = finite)]
        cost: f64,
    },
}

fn input(msg: impl std::fmt::Display) -> anyhow::Error {
    InputError(msg.to_string()).into()
}

pub fn evaluate(analysis: Analysis) -> anyhow::Result<Value> {
    Ok(match analysis {
        Analysis::Sharpe { mean, excess, riskless, vol, horizon } => {
            let mean_return = mean.unwrap_or_else(|| riskless + excess.unwrap_or(0.0));
            json!({
                "analysis": "sharpe",
                "inputs": { "mean_return": mean_return, "riskless": riskless, "vol": vol, "horizon": horizon },
                "sharpe_ratio": sharpe_ratio(mean_return, riskless, vol, horizon).map_err(input)?,
                "optimal_fraction_1d": optimal_fraction_1d(mean_return, riskless, vol).map_err(input)?,
            })
        }
        Analysis::Allocate { mean, riskless, vol, horizon } => {
            let vol = matrix(&vol).map_err(|e| input(format!("--vol: {e}")))?;
            let cols = vol.first().map_or(0, Vec::len);
            if vol.iter().any(|r| r.len() != cols) {
                return Err(input("--vol rows must have equal length"));
            }
            let model = ReturnModel {
                mean: DVector::from_vec(mean.clone()),
                riskless,
                vol: DMatrix::from_fn(vol.len(), cols, |i, j| vol[i][j]),
                horizon,
            };
            let allocation = optimal_allocation(&model).map_err(input)?;
            json!({
                "analysis": "allocate",
                "inputs": { "mean": mean, "riskless": riskless, "vol": vol, "horizon": horizon },
                "optimal_allocation": allocation.iter().collect::<Vec<_>>(),
            })
        }
        Analysis::Envelope { up, down, prob } => {
            if !(up > 0.0 && down > 0.0 && (0.0..=1.0).contains(&prob)) {
                return Err(input("need --up > 0, --down > 0 and --prob in [0, 1]"));
            }
            let g = envelope_expected_gain(up, down, prob);
            json!({
                "analysis": "envelope",
                "inputs": { "up": up, "down": down, "up_prob": prob },
                "gain_player1": g.gain_player1,
                "gain_player2": g.gain_player2,
            })
        }
        Analysis::Propitious { seeker_exponent, averse_exponent } => {
            let averse = averse_exponent.map_or(UtilitySpec::Log, |exponent| UtilitySpec::Power { exponent });
            let seeker = UtilitySpec::Power { exponent: seeker_exponent };
            let game = babylon_lottery(averse, seeker);
            let report = propitious_check(&game).map_err(input)?;
            json!({
                "analysis": "propitious",
                "inputs": { "averse_utility": averse, "seeker_utility": seeker },
                "utility_gains": game.utility_gains().map_err(input)?,
                "per_player": report.per_player,
                "average_mode": report.average_mode,
                "propitious": report.is_propitious(),
            })
        }
        Analysis::Lattice { breeds_remaining, floor, child_value, costs, activity_price, market_price } => {
            let costs = match costs {
                Some(c) => c,
                None => GameRules::default()
                    .remaining_charge_costs(&PriceBoard::new(activity_price, market_price, floor)),
            };
            json!({
                "analysis": "lattice",
                "inputs": {
                    "breeds_remaining": breeds_remaining,
                    "floor_price": floor,
                    "expected_child_value": child_value,
                    "cost_schedule_numeraire": costs,
                },
                "lattice_value": lattice_value(breeds_remaining, floor, child_value, &costs).map_err(input)?,
            })
        }
        Analysis::Arbitrage { capital, growth, cost } => {
            if !(capital > 0.0 && cost >= 0.0) {
                return Err(input("need --capital > 0 and --cost >= 0"));
            }
            let v = classify_breeding_arbitrage(capital, growth, cost);
            json!({
                "analysis": "arbitrage",
                "inputs": { "capital": capital, "growth": growth, "cost": cost },
                "kind": v.kind,
                "magnitude": v.magnitude,
            })
        }
    })
}

pub fn run(analysis: Analysis) -> anyhow::Result<()> {
    println!("{}", serde_json::to_string(&evaluate(analysis)?)?);
    Ok(())
}
