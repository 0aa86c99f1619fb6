//! Uniform-random baseline on the PB reward: 1000 episodes per seed.
//!
//! ```text
//! cargo run --release --example random_baseline
//! ```

use ays_rl::agents::AgentKind;
use ays_rl::harness::{train, Preset, RunConfig};

fn main() -> ays_rl::Result<()> {
    let mut config = RunConfig::new(Preset::Pb, AgentKind::Random);
    config.frame_limit = u64::MAX;
    config.episode_limit = Some(1000);

    for &seed in &config.seeds {
        let run = train(&config, seed, None)?;
        let s = &run.summary;
        println!(
            "seed {seed}: {} episodes, mean return {:.2}, success rate {:.3}, outcomes {:?}",
            s.episodes,
            s.mean_return.unwrap_or(f64::NAN),
            s.success_rate.unwrap_or(f64::NAN),
            s.outcome_counts
        );
    }
    Ok(())
}
