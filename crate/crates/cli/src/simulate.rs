use std::path::Path;

use anyhow::Context;
use nftgame_core::report::write_outputs;
use nftgame_core::scenario::ScenarioFile;
use nftgame_core::simulation::run_simulation;

pub fn run(config_path: &Path, seed: Option<u64>, steps: Option<u64>, out: &Path) -> anyhow::Result<()> {
    let file = ScenarioFile::load(config_path).with_context(|| format!("config {}", config_path.display()))?;
    let mut config = file.into_config().with_context(|| format!("config {}", config_path.display()))?;
    if let Some(seed) = seed {
        config.seed = seed;
    }
    if let Some(steps) = steps {
        config.steps = steps;
        config.validate().with_context(|| "--steps")?;
    }
    let output = run_simulation(&config)?;
    write_outputs(out, &config, &output).with_context(|| format!("writing outputs to {}", out.display()))?;
    println!(
        "{} steps, {} events, seed {} -> {}",
        config.steps,
        output.log.len(),
        config.seed,
        out.display()
    );
    Ok(())
}
