//! The velocity-augmented observation: position plus the accumulated
//! normalized rate of change.
//!
//! ```text
//! cargo run --release --example markov_state
//! ```

use ays_rl::env::{Action, AysEnv, EnvConfig, NormState};
use ays_rl::harness::Preset;

fn main() -> ays_rl::Result<()> {
    let config: EnvConfig = Preset::Markov.env_config();
    let mut env = AysEnv::new(config)?;
    let obs = env.reset_to(NormState::START)?;
    println!("width {}, start {obs:?}", env.observation_width());

    for t in 1..=8 {
        let action = if t <= 4 { Action::DgEt } else { Action::Et };
        let step = env.step(action)?;
        let o = &step.observation;
        println!(
            "t {t}  {:<6} pos ({:.4}, {:.4}, {:.4})  vel ({:+.2e}, {:+.2e}, {:+.2e})",
            action.name(),
            o[0],
            o[1],
            o[2],
            o[3],
            o[4],
            o[5]
        );
    }
    Ok(())
}
