//! A2C and PPO side by side on the PB reward. Actor-critics are noisy at
//! this scale; the point is the mechanics (rollouts, GAE, clipping).
//!
//! ```text
//! cargo run --release --example actor_critic -- [frames] [seed]
//! ```

use ays_rl::agents::AgentKind;
use ays_rl::harness::{train, Preset, RunConfig};

fn main() -> ays_rl::Result<()> {
    let mut args = std::env::args().skip(1);
    let frames: u64 = args.next().map_or(20_000, |a| a.parse().expect("frames"));
    let seed: u64 = args.next().map_or(0, |a| a.parse().expect("seed"));

    for kind in [AgentKind::A2c, AgentKind::Ppo] {
        let mut config = RunConfig::new(Preset::Pb, kind);
        config.frame_limit = frames;
        let spec = config.agent_spec()?;
        println!("{kind}: {}", serde_json::to_string(&spec).expect("spec"));
        let run = train(&config, seed, None)?;
        let first = &run.records[..run.records.len().min(50)];
        let early = first.iter().map(|r| r.episode_return).sum::<f64>() / first.len().max(1) as f64;
        println!(
            "  {} episodes, first-50 mean {:.1}, final ma50 {:.1}, success {:.3}, updates {}",
            run.summary.episodes,
            early,
            run.summary.final_moving_average.unwrap_or(0.0),
            run.summary.success_rate.unwrap_or(0.0),
            run.records.last().map_or(0, |r| r.agent.updates)
        );
    }
    Ok(())
}
