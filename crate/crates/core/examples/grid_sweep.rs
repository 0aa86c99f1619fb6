//! Trains a short DQN run and maps values, first actions and end states over
//! the initialization square.
//!
//! ```text
//! cargo run --release --example grid_sweep -- [frames] [resolution] [out_dir]
//! ```

use std::path::PathBuf;

use ays_rl::agents::AgentKind;
use ays_rl::harness::{grid_sweep, train, GridMode, GridSpec, Preset, RunConfig};

fn main() -> ays_rl::Result<()> {
    let mut args = std::env::args().skip(1);
    let frames: u64 = args.next().map_or(15_000, |a| a.parse().expect("frames"));
    let resolution: usize = args.next().map_or(11, |a| a.parse().expect("resolution"));
    let out = PathBuf::from(args.next().unwrap_or_else(|| "runs/grid".into()));
    std::fs::create_dir_all(&out).expect("output directory");

    let mut config = RunConfig::new(Preset::Pb, AgentKind::Dqn);
    config.frame_limit = frames;
    let run = train(&config, 0, None)?;
    let mut agent = run.checkpoint.restore_agent()?;

    let grid = GridSpec::with_resolution(resolution);
    for mode in [GridMode::Value, GridMode::FirstAction, GridMode::EndState] {
        let result = grid_sweep(agent.as_mut(), &config.env, &grid, mode, true)?;
        let path = out.join(result.file_name());
        result.write_csv(&path)?;
        println!("== {mode} -> {}", path.display());
        print!("{}", result.to_csv());
    }
    Ok(())
}
