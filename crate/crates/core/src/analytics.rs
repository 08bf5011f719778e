//! Portfolio and utility analytics for comparing games.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative cutoff below which singular values are treated as zero.
pub const DEFAULT_RCOND: f64 = 1e-12;

const PROBABILITY_TOLERANCE: f64 = 1e-12;
const STRICT_GAIN_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticsError {
    #[error("volatility must be positive, got {0}")]
    NonPositiveVolatility(f64),
    #[error("horizon must be positive, got {0}")]
    NonPositiveHorizon(f64),
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("probabilities sum to {0}, expected 1")]
    InvalidProbabilities(f64),
    #[error("wealth multiplier {0} must be positive")]
    NonPositiveMultiplier(f64),
    #[error("power utility exponent must be non-zero")]
    ZeroExponent,
    #[error("outcome does not conserve committed stakes (net {0})")]
    NotConserved(f64),
}

/// Sharpe ratio over horizon `T` from per-unit-time inputs: `(μ − r)/σ · 1/√T`.
pub fn sharpe_ratio(mean_return: f64, riskless: f64, vol: f64, horizon: f64) -> Result<f64, AnalyticsError> {
    if !(vol > 0.0) {
        return Err(AnalyticsError::NonPositiveVolatility(vol));
    }
    if !(horizon > 0.0) {
        return Err(AnalyticsError::NonPositiveHorizon(horizon));
    }
    Ok((mean_return - riskless) / vol / horizon.sqrt())
}

/// Growth-optimal fraction in one dimension: `(μ − r)/σ²`.
pub fn optimal_fraction_1d(mean_return: f64, riskless: f64, vol: f64) -> Result<f64, AnalyticsError> {
    if !(vol > 0.0) {
        return Err(AnalyticsError::NonPositiveVolatility(vol));
    }
    Ok((mean_return - riskless) / (vol * vol))
}

/// Moore-Penrose inverse with the default relative cutoff.
pub fn pseudo_inverse(matrix: &DMatrix<f64>) -> Result<DMatrix<f64>, AnalyticsError> {
    pseudo_inverse_with_cutoff(matrix, DEFAULT_RCOND)
}

/// Moore-Penrose inverse `V Σ⁺ Uᵀ` from a thin SVD. Singular values below
/// `rcond · σ_max` are dropped.
pub fn pseudo_inverse_with_cutoff(matrix: &DMatrix<f64>, rcond: f64) -> Result<DMatrix<f64>, AnalyticsError> {
    if matrix.iter().any(|x| !x.is_finite()) {
        return Err(AnalyticsError::NonFinite);
    }
    let (rows, cols) = matrix.shape();
    if rows == 0 || cols == 0 {
        return Ok(DMatrix::zeros(cols, rows));
    }
    if rows < cols {
        return Ok(pseudo_inverse_with_cutoff(&matrix.transpose(), rcond)?.transpose());
    }
    let (u, singular, v) = jacobi_svd(matrix);
    let sigma_max = singular.iter().cloned().fold(0.0, f64::max);
    let cutoff = rcond * sigma_max;
    let mut result = DMatrix::zeros(cols, rows);
    for (k, &s) in singular.iter().enumerate() {
        if s <= cutoff || s == 0.0 {
            continue;
        }
        // rank-one update v_k (1/s) u_kᵀ
        result += (v.column(k) / s) * u.column(k).transpose();
    }
    Ok(result)
}

/// One-sided Jacobi SVD of a tall matrix (`rows ≥ cols`): returns `U`
/// (`rows × cols`), the singular values and `V` (`cols × cols`).
fn jacobi_svd(matrix: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>, DMatrix<f64>) {
    const MAX_SWEEPS: usize = 80;
    let n = matrix.ncols();
    let mut w = matrix.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = w.column(p).norm_squared();
                let beta = w.column(q).norm_squared();
                let gamma = w.column(p).dot(&w.column(q));
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for m in [&mut w, &mut v] {
                    for i in 0..m.nrows() {
                        let (a, b) = (m[(i, p)], m[(i, q)]);
                        m[(i, p)] = c * a - s * b;
                        m[(i, q)] = s * a + c * b;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let singular: Vec<f64> = (0..n).map(|k| w.column(k).norm()).collect();
    for (k, &s) in singular.iter().enumerate() {
        if s > 0.0 {
            w.column_mut(k).unscale_mut(s);
        }
    }
    (w, singular, v)
}

/// Drifts, riskless rate and factor loadings of a set of assets.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnModel {
    /// Per-asset drift `μ` per unit time.
    pub mean: DVector<f64>,
    pub riskless: f64,
    /// Factor loadings with one row per factor and one column per asset, so
    /// that `σᵀσ` is the asset covariance.
    pub vol: DMatrix<f64>,
    pub horizon: f64,
}

impl ReturnModel {
    pub fn covariance(&self) -> DMatrix<f64> {
        self.vol.transpose() * &self.vol
    }

    pub fn excess(&self) -> DVector<f64> {
        self.mean.map(|m| m - self.riskless)
    }
}

/// Growth-optimal allocation `(μ − r·1)(σᵀσ)⁺`.
///
/// `(σᵀσ)⁺` is symmetric, so the row-vector product equals
/// `(σᵀσ)⁺(μ − r·1)`, which is what is returned.
pub fn optimal_allocation(model: &ReturnModel) -> Result<DVector<f64>, AnalyticsError> {
    if model.vol.ncols() != model.mean.len() {
        return Err(AnalyticsError::DimensionMismatch(format!(
            "{} drifts but loadings cover {} assets",
            model.mean.len(),
            model.vol.ncols()
        )));
    }
    if !(model.horizon > 0.0) {
        return Err(AnalyticsError::NonPositiveHorizon(model.horizon));
    }
    let inverse = pseudo_inverse(&model.covariance())?;
    Ok(inverse * model.excess())
}

/// Expected percentage gains of both sides of a swap of equal envelopes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeGains {
    pub gain_player1: f64,
    pub gain_player2: f64,
}

/// Each player measures the swapped envelope in their own numéraire. The
/// exchange rate moves by `up` with probability `up_prob`, otherwise by
/// `down`; the counterparty sees the reciprocal move. Gains are fractions
/// (0.25 = 25%).
pub fn envelope_expected_gain(up: f64, down: f64, up_prob: f64) -> EnvelopeGains {
    let q = up_prob;
    EnvelopeGains {
        gain_player1: q * up + (1.0 - q) * down - 1.0,
        gain_player2: q / up + (1.0 - q) / down - 1.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UtilitySpec {
    Log,
    /// `x^η`; negative exponents are sign-flipped to stay increasing.
    Power { exponent: f64 },
}

impl UtilitySpec {
    pub fn validate(&self) -> Result<(), AnalyticsError> {
        match self {
            UtilitySpec::Power { exponent } if *exponent == 0.0 || !exponent.is_finite() => Err(AnalyticsError::ZeroExponent),
            _ => Ok(()),
        }
    }

    pub fn utility(&self, wealth: f64) -> Result<f64, AnalyticsError> {
        if !(wealth > 0.0) {
            return Err(AnalyticsError::NonPositiveMultiplier(wealth));
        }
        self.validate()?;
        Ok(match *self {
            UtilitySpec::Log => wealth.ln(),
            UtilitySpec::Power { exponent } => exponent.signum() * wealth.powf(exponent),
        })
    }

    pub fn is_risk_seeking(&self) -> bool {
        matches!(self, UtilitySpec::Power { exponent } if *exponent > 1.0)
    }
}

fn check_probabilities(probs: impl Iterator<Item = f64>) -> Result<(), AnalyticsError> {
    let mut sum = 0.0;
    for p in probs {
        if !(0.0..=1.0).contains(&p) {
            return Err(AnalyticsError::InvalidProbabilities(p));
        }
        sum += p;
    }
    if (sum - 1.0).abs() > PROBABILITY_TOLERANCE {
        return Err(AnalyticsError::InvalidProbabilities(sum));
    }
    Ok(())
}

/// `Σ p_i U(m_i)` over `(probability, wealth multiplier)` pairs.
pub fn expected_utility(outcomes: &[(f64, f64)], utility: &UtilitySpec) -> Result<f64, AnalyticsError> {
    check_probabilities(outcomes.iter().map(|o| o.0))?;
    outcomes
        .iter()
        .try_fold(0.0, |acc, &(p, m)| Ok(acc + p * utility.utility(m)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Player {
    pub utility: UtilitySpec,
    pub initial_wealth: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameOutcome {
    pub probability: f64,
    /// One wealth multiplier per player.
    pub multipliers: Vec<f64>,
}

/// A redistribution of committed tokens among players.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RedistributionGame {
    pub outcomes: Vec<GameOutcome>,
    pub players: Vec<Player>,
    /// Require every outcome to preserve total committed wealth.
    pub conserve_stakes: bool,
}

impl RedistributionGame {
    pub fn validate(&self) -> Result<(), AnalyticsError> {
        check_probabilities(self.outcomes.iter().map(|o| o.probability))?;
        let total: f64 = self.players.iter().map(|p| p.initial_wealth).sum();
        for p in &self.players {
            p.utility.validate()?;
            if !(p.initial_wealth > 0.0) {
                return Err(AnalyticsError::NonPositiveMultiplier(p.initial_wealth));
            }
        }
        for o in &self.outcomes {
            if o.multipliers.len() != self.players.len() {
                return Err(AnalyticsError::DimensionMismatch(format!(
                    "outcome has {} multipliers for {} players",
                    o.multipliers.len(),
                    self.players.len()
                )));
            }
            if let Some(&m) = o.multipliers.iter().find(|m| !(**m > 0.0)) {
                return Err(AnalyticsError::NonPositiveMultiplier(m));
            }
            if self.conserve_stakes {
                let net = self.net_transfer(o);
                if net.abs() > 1e-12 * total.max(1.0) {
                    return Err(AnalyticsError::NotConserved(net));
                }
            }
        }
        Ok(())
    }

    /// Change in total committed wealth under `outcome`.
    pub fn net_transfer(&self, outcome: &GameOutcome) -> f64 {
        self.players
            .iter()
            .zip(&outcome.multipliers)
            .map(|(p, m)| p.initial_wealth * (m - 1.0))
            .sum()
    }

    /// Expected utility gain `E[U(w·m)] − U(w)` of every player.
    pub fn utility_gains(&self) -> Result<Vec<f64>, AnalyticsError> {
        self.validate()?;
        self.players
            .iter()
            .enumerate()
            .map(|(i, player)| {
                let w = player.initial_wealth;
                let wealth: Vec<(f64, f64)> =
                    self.outcomes.iter().map(|o| (o.probability, w * o.multipliers[i])).collect();
                Ok(expected_utility(&wealth, &player.utility)? - player.utility.utility(w)?)
            })
            .collect()
    }

    /// Expected fractional wealth change of player `i`.
    pub fn expected_return(&self, i: usize) -> f64 {
        self.outcomes.iter().map(|o| o.probability * (o.multipliers[i] - 1.0)).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropitiousReport {
    pub per_player: Vec<bool>,
    pub average_mode: bool,
}

impl PropitiousReport {
    /// Propitious if either every player or the average gains utility.
    pub fn is_propitious(&self) -> bool {
        self.average_mode || (!self.per_player.is_empty() && self.per_player.iter().all(|&b| b))
    }
}

/// Strict expected-utility improvement test, per player and on average.
pub fn propitious_check(game: &RedistributionGame) -> Result<PropitiousReport, AnalyticsError> {
    let gains = game.utility_gains()?;
    let mean = if gains.is_empty() { 0.0 } else { gains.iter().sum::<f64>() / gains.len() as f64 };
    Ok(PropitiousReport {
        per_player: gains.iter().map(|g| *g > STRICT_GAIN_TOLERANCE).collect(),
        average_mode: mean > STRICT_GAIN_TOLERANCE,
    })
}

/// Probability of the common branch of the eleven-player lottery.
pub const BABYLON_COMMON_PROB: f64 = 0.95;
/// Number of risk-averse players in the eleven-player lottery.
pub const BABYLON_AVERSE_PLAYERS: usize = 10;
/// Figure commonly quoted for the risk seeker's expected loss in this
/// example. It does not follow from the stated probabilities and payouts,
/// which give −42.5%.
pub const PUBLISHED_SEEKER_EV: f64 = -0.375;

/// The eleven-player lottery: ten risk-averse players and one risk seeker
/// each commit one token. With probability 0.95 the averse players gain 5%
/// and the seeker loses 50%; otherwise the averse players lose 10% and the
/// seeker doubles.
pub fn babylon_lottery(averse: UtilitySpec, seeker: UtilitySpec) -> RedistributionGame {
    let n = BABYLON_AVERSE_PLAYERS;
    let branch = |probability: f64, averse_mult: f64, seeker_mult: f64| GameOutcome {
        probability,
        multipliers: std::iter::repeat_n(averse_mult, n).chain([seeker_mult]).collect(),
    };
    let mut players = vec![Player { utility: averse, initial_wealth: 1.0 }; n];
    players.push(Player { utility: seeker, initial_wealth: 1.0 });
    RedistributionGame {
        outcomes: vec![
            branch(BABYLON_COMMON_PROB, 1.05, 0.5),
            branch(1.0 - BABYLON_COMMON_PROB, 0.90, 2.0),
        ],
        players,
        conserve_stakes: true,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeterogeneousLotteryEv {
    pub risk_averse_ev: f64,
    pub risk_seeker_ev: f64,
}

/// Expected returns of the two player types in [`babylon_lottery`].
pub fn heterogeneous_lottery_ev() -> HeterogeneousLotteryEv {
    let game = babylon_lottery(UtilitySpec::Log, UtilitySpec::Power { exponent: 8.0 });
    HeterogeneousLotteryEv {
        risk_averse_ev: game.expected_return(0),
        risk_seeker_ev: game.expected_return(BABYLON_AVERSE_PLAYERS),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn sharpe_examples() {
        assert_abs_diff_eq!(sharpe_ratio(0.07, 0.02, 0.2, 1.0).unwrap(), 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(sharpe_ratio(0.07, 0.02, 0.2, 4.0).unwrap(), 0.125, epsilon = 1e-12);
        assert_eq!(sharpe_ratio(0.03, 0.03, 0.5, 9.0).unwrap(), 0.0);
        assert!(sharpe_ratio(0.1, 0.0, 0.0, 1.0).is_err());
        assert!(sharpe_ratio(0.1, 0.0, 0.1, 0.0).is_err());
    }

    #[test]
    fn fraction_examples() {
        assert_abs_diff_eq!(optimal_fraction_1d(0.10, 0.02, 0.2).unwrap(), 2.0, epsilon = 1e-12);
        assert_eq!(optimal_fraction_1d(0.05, 0.05, 0.3).unwrap(), 0.0);
        assert!(optimal_fraction_1d(0.01, 0.05, 0.3).unwrap() < 0.0);
        assert!(optimal_fraction_1d(0.01, 0.05, -0.3).is_err());
    }

    #[test]
    fn pinv_examples() {
        let id = DMatrix::<f64>::identity(3, 3);
        assert_abs_diff_eq!(pseudo_inverse(&id).unwrap(), id, epsilon = 1e-12);
        let d = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.0]);
        let expected = DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 0.0]);
        assert_abs_diff_eq!(pseudo_inverse(&d).unwrap(), expected, epsilon = 1e-12);
        let ones = DMatrix::from_element(2, 2, 1.0);
        assert_abs_diff_eq!(pseudo_inverse(&ones).unwrap(), DMatrix::from_element(2, 2, 0.25), epsilon = 1e-12);
        let mut bad = DMatrix::from_element(2, 2, 1.0);
        bad[(0, 1)] = f64::NAN;
        assert_eq!(pseudo_inverse(&bad), Err(AnalyticsError::NonFinite));
    }

    #[test]
    fn pinv_of_wide_and_zero() {
        let wide = DMatrix::from_row_slice(1, 2, &[3.0, 4.0]);
        let expected = DMatrix::from_row_slice(2, 1, &[3.0 / 25.0, 4.0 / 25.0]);
        assert_abs_diff_eq!(pseudo_inverse(&wide).unwrap(), expected, epsilon = 1e-12);
        let zero = DMatrix::<f64>::zeros(2, 3);
        assert_eq!(pseudo_inverse(&zero).unwrap(), DMatrix::zeros(3, 2));
    }

    #[test]
    fn allocation_examples() {
        let one = ReturnModel {
            mean: DVector::from_vec(vec![0.10]),
            riskless: 0.02,
            vol: DMatrix::from_element(1, 1, 0.2),
            horizon: 1.0,
        };
        assert_abs_diff_eq!(optimal_allocation(&one).unwrap()[0], 2.0, epsilon = 1e-12);

        let diag = ReturnModel {
            mean: DVector::from_vec(vec![0.10, 0.05]),
            riskless: 0.02,
            vol: DMatrix::from_row_slice(2, 2, &[0.2, 0.0, 0.0, 0.3]),
            horizon: 1.0,
        };
        let w = optimal_allocation(&diag).unwrap();
        assert_abs_diff_eq!(w[0], optimal_fraction_1d(0.10, 0.02, 0.2).unwrap(), epsilon = 1e-12);
        assert_abs_diff_eq!(w[1], optimal_fraction_1d(0.05, 0.02, 0.3).unwrap(), epsilon = 1e-12);

        let flat = ReturnModel { mean: DVector::from_vec(vec![0.02, 0.02]), ..diag.clone() };
        assert_eq!(optimal_allocation(&flat).unwrap(), DVector::zeros(2));

        let mismatched = ReturnModel { mean: DVector::from_vec(vec![0.1]), ..diag };
        assert!(matches!(optimal_allocation(&mismatched), Err(AnalyticsError::DimensionMismatch(_))));
    }

    #[test]
    fn envelope_examples() {
        let g = envelope_expected_gain(2.0, 0.5, 0.5);
        assert_eq!((g.gain_player1, g.gain_player2), (0.25, 0.25));
        let flat = envelope_expected_gain(1.0, 1.0, 0.3);
        assert_eq!((flat.gain_player1, flat.gain_player2), (0.0, 0.0));
        let big = envelope_expected_gain(4.0, 0.25, 0.5);
        assert_abs_diff_eq!(big.gain_player1, 1.125, epsilon = 1e-12);
        assert_abs_diff_eq!(big.gain_player2, 1.125, epsilon = 1e-12);
    }

    #[test]
    fn utility_examples() {
        assert_eq!(expected_utility(&[(1.0, 1.0)], &UtilitySpec::Log).unwrap(), 0.0);
        assert_eq!(expected_utility(&[(1.0, 1.0)], &UtilitySpec::Power { exponent: 3.0 }).unwrap(), 1.0);
        let averse = [(0.95, 1.05), (0.05, 0.90)];
        let oracle = 0.95 * 1.05f64.ln() + 0.05 * 0.9f64.ln();
        let eu = expected_utility(&averse, &UtilitySpec::Log).unwrap();
        assert_abs_diff_eq!(eu, oracle, epsilon = 1e-15);
        assert_abs_diff_eq!(eu, 0.04108, epsilon = 1e-5);
        let linear = expected_utility(&averse, &UtilitySpec::Power { exponent: 1.0 }).unwrap();
        assert_abs_diff_eq!(linear, 0.95 * 1.05 + 0.05 * 0.9, epsilon = 1e-15);
        assert!(expected_utility(&[(0.5, 1.0)], &UtilitySpec::Log).is_err());
        assert!(expected_utility(&[(1.0, 0.0)], &UtilitySpec::Log).is_err());
        assert!(UtilitySpec::Power { exponent: 0.0 }.utility(1.0).is_err());
    }

    #[test]
    fn negative_exponent_stays_increasing() {
        let u = UtilitySpec::Power { exponent: -1.0 };
        assert!(u.utility(2.0).unwrap() > u.utility(1.0).unwrap());
    }

    #[test]
    fn propitious_examples() {
        let eta2 = propitious_check(&babylon_lottery(UtilitySpec::Log, UtilitySpec::Power { exponent: 2.0 })).unwrap();
        assert!(eta2.per_player[..10].iter().all(|&b| b));
        assert!(!eta2.per_player[10]);
        assert!(!eta2.average_mode);
        assert!(!eta2.is_propitious());

        let eta8 = propitious_check(&babylon_lottery(UtilitySpec::Log, UtilitySpec::Power { exponent: 8.0 })).unwrap();
        assert!(eta8.per_player.iter().all(|&b| b));
        assert!(eta8.is_propitious());

        let still = RedistributionGame {
            outcomes: vec![GameOutcome { probability: 1.0, multipliers: vec![1.0, 1.0] }],
            players: vec![
                Player { utility: UtilitySpec::Log, initial_wealth: 1.0 },
                Player { utility: UtilitySpec::Power { exponent: 2.0 }, initial_wealth: 3.0 },
            ],
            conserve_stakes: true,
        };
        let r = propitious_check(&still).unwrap();
        assert_eq!(r.per_player, vec![false, false]);
        assert!(!r.average_mode);
    }

    #[test]
    fn seeker_expectation_under_power_two() {
        let game = babylon_lottery(UtilitySpec::Log, UtilitySpec::Power { exponent: 2.0 });
        let gains = game.utility_gains().unwrap();
        // E[U] = 0.95·0.25 + 0.05·4 = 0.4375 against U(1) = 1
        assert_abs_diff_eq!(gains[10], 0.4375 - 1.0, epsilon = 1e-12);
    }

    #[test]
    fn invalid_game_rejected() {
        let mut game = babylon_lottery(UtilitySpec::Log, UtilitySpec::Log);
        game.outcomes[0].probability = 0.9;
        assert!(matches!(propitious_check(&game), Err(AnalyticsError::InvalidProbabilities(_))));
        let mut game = babylon_lottery(UtilitySpec::Log, UtilitySpec::Log);
        game.outcomes[0].multipliers[10] = 0.6;
        assert!(matches!(game.validate(), Err(AnalyticsError::NotConserved(_))));
    }

    #[test]
    fn heterogeneous_lottery() {
        let ev = heterogeneous_lottery_ev();
        assert_abs_diff_eq!(ev.risk_averse_ev, 0.0425, epsilon = 1e-15);
        assert_abs_diff_eq!(ev.risk_seeker_ev, -0.425, epsilon = 1e-15);
        let game = babylon_lottery(UtilitySpec::Log, UtilitySpec::Log);
        for o in &game.outcomes {
            assert_abs_diff_eq!(game.net_transfer(o), 0.0, epsilon = 1e-12);
        }
    }
}
