//! Dueling double DQN under the policy-cost reward, then a greedy rollout
//! from the centre start to see how often it can afford to do nothing.
//!
//! ```text
//! cargo run --release --example policy_cost -- [frames] [seed]
//! ```

use ays_rl::agents::AgentKind;
use ays_rl::env::{Action, NormState};
use ays_rl::harness::{evaluate, train, EvalOptions, Preset, RunConfig};

fn main() -> ays_rl::Result<()> {
    let mut args = std::env::args().skip(1);
    let frames: u64 = args.next().map_or(30_000, |a| a.parse().expect("frames"));
    let seed: u64 = args.next().map_or(0, |a| a.parse().expect("seed"));

    let mut config = RunConfig::new(Preset::PolicyCost, AgentKind::DuelDdqn);
    config.frame_limit = frames;
    let run = train(&config, seed, None)?;
    println!(
        "trained {} episodes, success rate {:.3}",
        run.summary.episodes,
        run.summary.success_rate.unwrap_or(0.0)
    );

    let mut agent = run.checkpoint.restore_agent()?;
    let eval = evaluate(
        agent.as_mut(),
        &config.env,
        &EvalOptions {
            episodes: 1,
            greedy: Some(true),
            start: Some(NormState::START),
            ..Default::default()
        },
    )?;
    let episode = &eval.details[0];
    println!(
        "greedy episode from s0: {:?} after {} steps, return {:.1}",
        episode.outcome, episode.length, episode.episode_return
    );
    for action in Action::ALL {
        println!("  {:<8} {:>5.1}%", action.name(), 100.0 * episode.action_share(action));
    }
    Ok(())
}
