//! Trains DQN with its default hyperparameters on the PB reward and writes
//! the run files (`metrics.jsonl`, `summary.json`, `checkpoint.bin`).
//!
//! ```text
//! cargo run --release --example train_dqn -- [frames] [seed] [out_dir]
//! ```

use std::path::PathBuf;

use ays_rl::agents::AgentKind;
use ays_rl::harness::{train_with, Preset, RunConfig};

fn main() -> ays_rl::Result<()> {
    let mut args = std::env::args().skip(1);
    let frames: u64 = args.next().map_or(20_000, |a| a.parse().expect("frames"));
    let seed: u64 = args.next().map_or(0, |a| a.parse().expect("seed"));
    let out = PathBuf::from(args.next().unwrap_or_else(|| "runs/dqn".into()));

    let mut config = RunConfig::new(Preset::Pb, AgentKind::Dqn);
    config.frame_limit = frames;

    let run = train_with(&config, seed, Some(&out), |r| {
        if (r.episode + 1) % 25 == 0 {
            println!(
                "episode {:>5}  frames {:>7}  ma50 {:>7.1}  success {:.3}  eps {:.4}",
                r.episode + 1,
                r.frames,
                r.moving_average,
                r.success_rate,
                r.agent.epsilon.unwrap_or(0.0)
            );
        }
    })?;
    println!("{}", serde_json::to_string_pretty(&run.summary).expect("summary"));
    println!("run files in {}", out.display());
    Ok(())
}
