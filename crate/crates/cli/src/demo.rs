use clap::ValueEnum;
use nftgame_core::activities::{minority_settle, settle_with_winner, MinorityGameSpec, Side, StoppingRule};
use nftgame_core::analytics::{
    babylon_lottery, envelope_expected_gain, heterogeneous_lottery_ev, propitious_check, UtilitySpec,
    PUBLISHED_SEEKER_EV,
};
use nftgame_core::economy::UserId;
use nftgame_core::rng::SimRng;
use nftgame_core::simulation::{collateral_loop, CollateralOutcome, CollateralSpec};
use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DemoName {
    TwoEnvelopes,
    BabylonLottery,
    CollateralCycle,
    Minority,
}

/// One row of a reference-versus-computed table.
pub struct Row {
    pub quantity: String,
    pub reference: String,
    pub computed: String,
    pub status: &'static str,
}

fn row(quantity: &str, reference: impl Into<String>, computed: impl Into<String>, ok: bool) -> Row {
    Row {
        quantity: quantity.into(),
        reference: reference.into(),
        computed: computed.into(),
        status: if ok { "match" } else { "MISMATCH" },
    }
}

fn pct(x: f64) -> String {
    format!("{:+.2}%", 100.0 * x)
}

pub struct Table {
    pub title: String,
    pub rows: Vec<Row>,
    pub notes: Vec<String>,
}

impl std::fmt::Display for Table {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "{}", self.title)?;
        let w0 = self.rows.iter().map(|r| r.quantity.len()).max().unwrap_or(0).max(8);
        let w1 = self.rows.iter().map(|r| r.reference.len()).max().unwrap_or(0).max(9);
        let w2 = self.rows.iter().map(|r| r.computed.len()).max().unwrap_or(0).max(8);
        writeln!(f, "{:<w0$}  {:>w1$}  {:>w2$}  status", "quantity", "reference", "computed")?;
        for r in &self.rows {
            writeln!(f, "{:<w0$}  {:>w1$}  {:>w2$}  {}", r.quantity, r.reference, r.computed, r.status)?;
        }
        for n in &self.notes {
            writeln!(f, "note: {n}")?;
        }
        Ok(())
    }
}

fn two_envelopes() -> Table {
    let g = envelope_expected_gain(2.0, 0.5, 0.5);
    Table {
        title: "Two envelopes: rate doubles or halves with equal probability".into(),
        rows: vec![
            row("gain player 1", "+25.00%", pct(g.gain_player1), (g.gain_player1 - 0.25).abs() < 1e-12),
            row("gain player 2", "+25.00%", pct(g.gain_player2), (g.gain_player2 - 0.25).abs() < 1e-12),
        ],
        notes: vec!["each player values the swap in their own numéraire, so both expect to gain".into()],
    }
}

fn babylon() -> Table {
    let ev = heterogeneous_lottery_ev();
    let strong = propitious_check(&babylon_lottery(UtilitySpec::Log, UtilitySpec::Power { exponent: 8.0 }))
        .map(|r| r.is_propitious())
        .unwrap_or(false);
    let weak = propitious_check(&babylon_lottery(UtilitySpec::Log, UtilitySpec::Power { exponent: 2.0 }))
        .map(|r| r.is_propitious())
        .unwrap_or(true);
    Table {
        title: "Eleven-player lottery: ten risk-averse players and one risk seeker".into(),
        rows: vec![
            row("risk-averse EV", "+4.25%", pct(ev.risk_averse_ev), (ev.risk_averse_ev - 0.0425).abs() < 1e-12),
            Row {
                quantity: "risk-seeker EV".into(),
                reference: pct(PUBLISHED_SEEKER_EV),
                computed: pct(ev.risk_seeker_ev),
                status: "discrepancy*",
            },
            row("propitious, seeker x^8", "yes", if strong { "yes" } else { "no" }, strong),
            row("propitious, seeker x^2", "no", if weak { "yes" } else { "no" }, !weak),
        ],
        notes: vec![format!(
            "* the published seeker figure is {}; the stated branches give 0.95*(-50%) + 0.05*(+100%) = {}",
            pct(PUBLISHED_SEEKER_EV),
            pct(ev.risk_seeker_ev)
        )],
    }
}

fn collateral_cycle() -> Table {
    let base = CollateralSpec::default();
    let converged = collateral_loop(&base, 1000);
    let runaway = collateral_loop(&CollateralSpec { impact: 2.0, ltv: 0.6, ..base.clone() }, 200);
    let shocked = collateral_loop(&CollateralSpec { shock_step: Some(5), shock_fraction: 0.6, ..base.clone() }, 1000);
    let value = match converged.outcome {
        CollateralOutcome::Converged { value } => value,
        _ => f64::NAN,
    };
    let expected = base.fixed_point().unwrap_or(f64::NAN);
    Table {
        title: "Collateral cycle: borrow at 50% LTV and reinvest with unit price impact".into(),
        rows: vec![
            row(
                "fixed point V0/(1-psi*lambda)",
                format!("{expected:.6}"),
                format!("{value:.6} after {} rounds", converged.trajectory.len() - 1),
                (value - expected).abs() <= 1e-9 * expected,
            ),
            row(
                "psi=2, lambda=0.6",
                "diverged",
                format!("{:?}", runaway.outcome),
                runaway.outcome == CollateralOutcome::Diverged,
            ),
            row(
                "60% shock at round 5",
                "liquidated",
                format!("{:?}", shocked.outcome),
                matches!(shocked.outcome, CollateralOutcome::Liquidated { .. }),
            ),
        ],
        notes: vec![],
    }
}

fn minority(seed: u64) -> Table {
    let mut rng = SimRng::new(seed);
    let mut side = |n: usize, offset: usize| -> Vec<(UserId, f64)> {
        (0..n).map(|i| (UserId(offset + i), rng.random_range(1.0..10.0))).collect()
    };
    let side1 = side(3, 1);
    let side2 = side(5, 10);
    let spec = MinorityGameSpec { rake_fraction: 0.9, sponsor_subsidy: 2.0, stopping_rule: StoppingRule::FixedStep(1) };
    let total: f64 = side1.iter().chain(&side2).map(|s| s.1).sum();
    let mut rows = Vec::new();
    if let Ok(s) = minority_settle(&side1, &side2, &spec) {
        let paid: f64 = s.payouts.values().sum();
        rows.push(row(
            "payouts + organizer net",
            format!("{total:.6}"),
            format!("{:.6}", paid + s.organizer_net),
            (paid + s.organizer_net - total).abs() < 1e-12,
        ));
        rows.push(row("winning side", "smaller total", format!("{:?}", s.winner), s.winner.is_some()));
    }
    let fair = MinorityGameSpec { rake_fraction: 1.0, sponsor_subsidy: 0.0, ..spec };
    if let Ok(s) = settle_with_winner(&side1, &side2, Side::One, &fair) {
        let a: f64 = side1.iter().map(|x| x.1).sum();
        let b: f64 = side2.iter().map(|x| x.1).sum();
        let worst = side1
            .iter()
            .map(|&(u, x)| (s.payouts[&u] - (x + b / a * x)).abs())
            .fold(0.0, f64::max);
        rows.push(row("winner payout x + (b/a)x", "0", format!("{worst:.1e}"), worst < 1e-12));
    }
    Table {
        title: format!("Minority game: 3 vs 5 random stakes (seed {seed}), 10% rake, subsidy 2"),
        rows,
        notes: vec![],
    }
}

pub fn table(name: DemoName, seed: u64) -> Table {
    match name {
        DemoName::TwoEnvelopes => two_envelopes(),
        DemoName::BabylonLottery => babylon(),
        DemoName::CollateralCycle => collateral_cycle(),
        DemoName::Minority => minority(seed),
    }
}

pub fn run(name: DemoName, seed: u64) -> anyhow::Result<()> {
    print!("{}", table(name, seed));
    Ok(())
}
