//! Leverage feedback from borrowing against game tokens.
//!
//! Borrowing a fraction `λ` of the collateral value and reinvesting it
//! lifts the value by `ψ` per unit reinvested, so
//! `V_{n+1} = V_0 + ψ·λ·V_n`. For `ψλ < 1` the loop settles at
//! `V_0 / (1 − ψλ)`; otherwise it runs away. A shock cuts the value and
//! liquidates positions once the collateral no longer covers the debt.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CollateralSpec {
    /// Loan-to-value ratio `λ`.
    pub ltv: f64,
    /// Value gained per unit reinvested, `ψ`.
    pub impact: f64,
    pub initial_value: f64,
    /// Liquidate when value falls below this multiple of the debt.
    pub liquidation_threshold: f64,
    #[serde(default)]
    pub shock_step: Option<u64>,
    #[serde(default)]
    pub shock_fraction: f64,
}

impl Default for CollateralSpec {
    fn default() -> Self {
        Self {
            ltv: 0.5,
            impact: 1.0,
            initial_value: 100.0,
            liquidation_threshold: 1.0,
            shock_step: None,
            shock_fraction: 0.0,
        }
    }
}

impl CollateralSpec {
    pub fn feedback(&self) -> f64 {
        self.impact * self.ltv
    }

    pub fn fixed_point(&self) -> Option<f64> {
        let k = self.feedback();
        (k < 1.0).then(|| self.initial_value / (1.0 - k))
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.ltv > 0.0 && self.ltv < 1.0) {
            return Err(format!("ltv {} outside (0, 1)", self.ltv));
        }
        if !(self.impact >= 0.0) {
            return Err("impact must be non-negative".into());
        }
        if !(self.initial_value > 0.0) {
            return Err("initial_value must be positive".into());
        }
        if !(self.liquidation_threshold > 0.0 && self.liquidation_threshold <= 1.0) {
            return Err("liquidation_threshold outside (0, 1]".into());
        }
        if self.shock_step.is_some() && !(self.shock_fraction > 0.0 && self.shock_fraction < 1.0) {
            return Err("shock_fraction outside (0, 1)".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum CollateralOutcome {
    Converged { value: f64 },
    /// `ψλ ≥ 1`: the loop never settles.
    Diverged,
    Liquidated { step: u64 },
    /// `ψλ < 1` but the iteration budget ran out first.
    NotConverged { value: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollateralRun {
    /// `V_0, V_1, …` including the shocked value when a shock hits.
    pub trajectory: Vec<f64>,
    pub outcome: CollateralOutcome,
}

/// Iterates the borrow-and-reinvest loop for at most `max_iter` rounds.
///
/// Converged once successive values differ by less than `1e-9·V_0`.
pub fn collateral_loop(spec: &CollateralSpec, max_iter: u64) -> CollateralRun {
    let v0 = spec.initial_value;
    let k = spec.feedback();
    let mut trajectory = vec![v0];
    let mut value = v0;
    for n in 1..=max_iter {
        let next = v0 + k * value;
        if spec.shock_step == Some(n) {
            let debt = spec.ltv * value;
            let shocked = next * (1.0 - spec.shock_fraction);
            trajectory.push(shocked);
            if shocked < spec.liquidation_threshold * debt {
                return CollateralRun { trajectory, outcome: CollateralOutcome::Liquidated { step: n } };
            }
            value = shocked;
            continue;
        }
        trajectory.push(next);
        if (next - value).abs() < 1e-9 * v0 {
            return CollateralRun { trajectory, outcome: CollateralOutcome::Converged { value: next } };
        }
        value = next;
    }
    let outcome = if k >= 1.0 {
        CollateralOutcome::Diverged
    } else {
        CollateralOutcome::NotConverged { value }
    };
    CollateralRun { trajectory, outcome }
}
