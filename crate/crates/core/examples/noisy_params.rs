//! Parameter noise: the per-episode variance schedule, the clipped
//! multipliers it produces, and the fixed-draw test protocol.
//!
//! ```text
//! cargo run --release --example noisy_params -- [frames]
//! ```

use ays_rl::agents::AgentKind;
use ays_rl::env::{AysParams, NormState};
use ays_rl::harness::{evaluate, sample_test_params, train, EvalOptions, Preset, RunConfig};

fn main() -> ays_rl::Result<()> {
    let frames: u64 = std::env::args()
        .nth(1)
        .map_or(20_000, |a| a.parse().expect("frames"));
    let mut config = RunConfig::new(Preset::Noisy, AgentKind::Dqn);
    config.frame_limit = frames;

    let noise = config.env.noise;
    for episode in [0, 499, 500, 1000, 1500, 2000, 2500, 3000] {
        println!("episode {episode:>5}: variance {:.0e}", noise.variance_at(episode));
    }

    let base = AysParams::default();
    let test = sample_test_params(&base, 1e-3, 42)?;
    println!("test multipliers at variance 1e-3:");
    for (name, (t, b)) in ["tau_a", "tau_s", "beta", "sigma", "phi", "eps", "theta", "rho"]
        .iter()
        .zip(test.to_array().iter().zip(base.to_array()))
    {
        println!("  {name:<6} {:.4}", t / b);
    }

    let run = train(&config, 0, None)?;
    let mut agent = run.checkpoint.restore_agent()?;
    let eval = evaluate(
        agent.as_mut(),
        &config.env,
        &EvalOptions {
            episodes: 1,
            start: Some(NormState::START),
            fixed_params: Some(test),
            ..Default::default()
        },
    )?;
    println!(
        "after {} training episodes, greedy return on the test draw: {:.1} ({:?})",
        run.summary.episodes,
        eval.mean_return.unwrap_or(0.0),
        eval.details[0].outcome
    );
    Ok(())
}
