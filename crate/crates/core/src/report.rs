//! Output files of a simulation run.
//!
//! * `snapshots.csv`: `step,phi,psi,omega,pi,collectible_count` followed by
//!   one `agent_<id>_wealth` column per agent in ascending id order.
//! * `events.jsonl`: one event object per line.
//! * `summary.json`: see [`RunSummary`].

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::simulation::{AgentSummary, SimConfig, SimOutput};

pub const SNAPSHOTS_FILE: &str = "snapshots.csv";
pub const EVENTS_FILE: &str = "events.jsonl";
pub const SUMMARY_FILE: &str = "summary.json";

pub const SNAPSHOT_COLUMNS: [&str; 6] = ["step", "phi", "psi", "omega", "pi", "collectible_count"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalPools {
    pub phi: f64,
    pub psi: f64,
    pub omega: f64,
    pub pi: f64,
    pub collectible_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub seed: u64,
    pub steps: u64,
    pub final_pools: FinalPools,
    pub agents: Vec<AgentSummary>,
    /// Number of logged events per action kind.
    pub event_counts: BTreeMap<String, u64>,
}

impl RunSummary {
    pub fn new(config: &SimConfig, out: &SimOutput) -> Self {
        let last = out.final_snapshot();
        let mut event_counts = BTreeMap::new();
        for e in out.log.events() {
            *event_counts.entry(e.action.kind().to_string()).or_insert(0) += 1;
        }
        Self {
            seed: config.seed,
            steps: config.steps,
            final_pools: FinalPools {
                phi: last.phi,
                psi: last.psi,
                omega: last.omega,
                pi: last.pi,
                collectible_count: last.collectible_count,
            },
            agents: out.agents.clone(),
            event_counts,
        }
    }
}

pub fn snapshots_csv(out: &SimOutput) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let header = SNAPSHOT_COLUMNS
        .iter()
        .map(|c| c.to_string())
        .chain(out.agents.iter().map(|a| format!("agent_{}_wealth", a.id.0)));
    w.write_record(header).expect("in-memory write");
    for s in &out.snapshots {
        let row = [
            s.step.to_string(),
            s.phi.to_string(),
            s.psi.to_string(),
            s.omega.to_string(),
            s.pi.to_string(),
            s.collectible_count.to_string(),
        ]
        .into_iter()
        .chain(s.agent_wealth.iter().map(f64::to_string));
        w.write_record(row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}

pub fn summary_json(config: &SimConfig, out: &SimOutput) -> String {
    let mut text = serde_json::to_string_pretty(&RunSummary::new(config, out)).expect("summary serializes");
    text.push('\n');
    text
}

/// Writes the three output files into `dir`, creating it if needed.
pub fn write_outputs(dir: &Path, config: &SimConfig, out: &SimOutput) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(SNAPSHOTS_FILE), snapshots_csv(out))?;
    std::fs::write(dir.join(EVENTS_FILE), out.log.to_jsonl())?;
    std::fs::write(dir.join(SUMMARY_FILE), summary_json(config, out))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulation::{run_simulation, AgentSpec, InitialHoldings, Strategy};
    use crate::analytics::UtilitySpec;

    fn config() -> SimConfig {
        let mk = |id, strategy| AgentSpec {
            id,
            strategy,
            utility: UtilitySpec::Log,
            holdings: InitialHoldings { collectibles: 3, activity_balance: 20.0, market_balance: 4.0 },
        };
        let mut cfg = SimConfig::with_agents(vec![mk(3, Strategy::ThrillSeeker), mk(1, Strategy::Passive)]);
        cfg.steps = 4;
        cfg
    }

    #[test]
    fn csv_header_and_rows() {
        let cfg = config();
        let out = run_simulation(&cfg).unwrap();
        let text = snapshots_csv(&out);
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "step,phi,psi,omega,pi,collectible_count,agent_1_wealth,agent_3_wealth"
        );
        assert_eq!(lines.count(), 5);
    }

    #[test]
    fn summary_counts_events() {
        let cfg = config();
        let out = run_simulation(&cfg).unwrap();
        let summary = RunSummary::new(&cfg, &out);
        let total: u64 = summary.event_counts.values().sum();
        assert_eq!(total as usize, out.log.len());
        assert_eq!(summary.agents.len(), 2);
        let parsed: RunSummary = serde_json::from_str(&summary_json(&cfg, &out)).unwrap();
        assert_eq!(parsed, summary);
    }

    #[test]
    fn writes_three_files() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = config();
        let out = run_simulation(&cfg).unwrap();
        write_outputs(&dir.path().join("nested"), &cfg, &out).unwrap();
        for f in [SNAPSHOTS_FILE, EVENTS_FILE, SUMMARY_FILE] {
            assert!(dir.path().join("nested").join(f).is_file());
        }
    }
}
