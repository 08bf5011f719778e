//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Everything crosses the boundary as numbers, `Float64Array`s or JSON
//! strings so the page needs no bundler.

use nftgame_core::analytics::envelope_expected_gain;
use nftgame_core::breeding::{forward_price_step, max_population, PopulationParams};
use nftgame_core::simulation::{collateral_loop, CollateralOutcome, CollateralSpec};
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Runs the borrow-and-reinvest loop. A negative `shock_step` disables the
/// shock. Returns `{ trajectory, outcome, step?, value?, fixed_point }` as JSON.
#[wasm_bindgen]
pub fn collateral_trajectory(
    ltv: f64,
    impact: f64,
    initial_value: f64,
    shock_step: i32,
    shock_fraction: f64,
    max_iter: u32,
) -> Result<String, String> {
    let spec = CollateralSpec {
        ltv,
        impact,
        initial_value,
        liquidation_threshold: 1.0,
        shock_step: u64::try_from(shock_step).ok(),
        shock_fraction,
    };
    spec.validate()?;
    let run = collateral_loop(&spec, max_iter.into());
    let mut out = json!({
        "trajectory": run.trajectory,
        "outcome": run.outcome,
        "fixed_point": spec.fixed_point(),
    });
    if let CollateralOutcome::Converged { value } | CollateralOutcome::NotConverged { value } = run.outcome {
        out["value"] = value.into();
    }
    Ok(out.to_string())
}

/// `p_0, p_1, …, p_steps` under the forward-price recursion.
#[wasm_bindgen]
pub fn forward_price_path(p0: f64, arity: u32, step_cost: f64, steps: u32) -> Result<Vec<f64>, String> {
    if arity == 0 {
        return Err("arity must be at least 1".into());
    }
    let mut path = vec![p0];
    let mut p = p0;
    for _ in 0..steps {
        p = forward_price_step(p, arity as usize, step_cost).map_err(|e| e.to_string())?;
        path.push(p);
    }
    Ok(path)
}

/// Maximal collectible counts `N_0..=N_horizon`. `breed_limit == 0` means unlimited.
#[wasm_bindgen]
pub fn population_curve(initial: u32, arity: u32, breed_limit: u32, maturity_delay: u32, horizon: u32) -> Vec<f64> {
    let params = PopulationParams {
        arity: arity.max(1) as usize,
        breed_limit: (breed_limit > 0).then_some(breed_limit),
        maturity_delay: maturity_delay.into(),
    };
    max_population(initial.into(), params, horizon as usize).into_iter().map(|n| n as f64).collect()
}

/// `[gain_player1, gain_player2]` as fractions.
#[wasm_bindgen]
pub fn envelope_gains(up: f64, down: f64, up_prob: f64) -> Result<Vec<f64>, String> {
    if !(up > 0.0 && down > 0.0 && (0.0..=1.0).contains(&up_prob)) {
        return Err("need up > 0, down > 0 and a probability in [0, 1]".into());
    }
    let g = envelope_expected_gain(up, down, up_prob);
    Ok(vec![g.gain_player1, g.gain_player2])
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    #[test]
    fn collateral_reports_fixed_point() {
        let v: Value = serde_json::from_str(&collateral_trajectory(0.5, 1.0, 100.0, -1, 0.0, 1000).unwrap()).unwrap();
        assert_eq!(v["outcome"]["kind"], "converged");
        assert!((v["value"].as_f64().unwrap() - 200.0).abs() < 2e-7);
        assert_eq!(v["fixed_point"], 200.0);
    }

    #[test]
    fn collateral_shock_and_divergence() {
        let v: Value = serde_json::from_str(&collateral_trajectory(0.5, 1.0, 100.0, 5, 0.6, 100).unwrap()).unwrap();
        assert_eq!(v["outcome"]["kind"], "liquidated");
        let d: Value = serde_json::from_str(&collateral_trajectory(0.6, 2.0, 100.0, -1, 0.0, 20).unwrap()).unwrap();
        assert_eq!(d["outcome"]["kind"], "diverged");
        assert!(d["fixed_point"].is_null());
        assert!(collateral_trajectory(1.5, 1.0, 100.0, -1, 0.0, 10).is_err());
    }

    #[test]
    fn curves() {
        let path = forward_price_path(3.0, 2, 0.6, 1).unwrap();
        assert!((path[1] - 2.2).abs() < 1e-12);
        assert!(forward_price_path(1.0, 0, 0.6, 1).is_err());
        assert_eq!(population_curve(1, 1, 0, 1, 5), vec![1.0, 2.0, 3.0, 5.0, 8.0, 13.0]);
        assert_eq!(population_curve(2, 2, 0, 1, 6), vec![2.0, 3.0, 4.0, 5.0, 7.0, 9.0, 12.0]);
    }

    #[test]
    fn envelope() {
        assert_eq!(envelope_gains(2.0, 0.5, 0.5).unwrap(), vec![0.25, 0.25]);
        assert!(envelope_gains(0.0, 0.5, 0.5).is_err());
    }
}
