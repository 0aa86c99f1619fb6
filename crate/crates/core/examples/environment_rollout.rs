//! Steps the AYS environment by hand with a fixed schedule (DG+ET first,
//! then ET) that reaches the Green fixed point, and writes the trajectory.
//!
//! ```text
//! cargo run --release --example environment_rollout -- [csv_path]
//! ```

use ays_rl::env::{Action, AysEnv, EnvConfig, NormState, Trajectory};

fn main() -> ays_rl::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "trajectory_manual.csv".into());
    let mut env = AysEnv::new(EnvConfig::default())?;
    env.reset_to(NormState::START)?;
    println!("boundaries: {:?}", env.boundaries());

    let mut trajectory = Trajectory::start(env.state());
    let mut total = 0.0;
    loop {
        let action = if env.steps() < 35 { Action::DgEt } else { Action::Et };
        let step = env.step(action)?;
        total += step.reward;
        trajectory.record(action, env.state(), step.reward, step.outcome);
        if let Some(outcome) = step.outcome {
            println!("{outcome:?} after {} steps, return {total:.1}", env.steps());
            break;
        }
    }
    trajectory.write_csv(path.as_ref())?;
    println!("wrote {path}");
    Ok(())
}
