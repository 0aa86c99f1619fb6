use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::RunConfig;
use super::metrics::{outcome_counts, success_rate};
use super::train::{env_rng, RunCheckpoint};
use crate::agents::Agent;
use crate::env::{Action, AysEnv, AysParams, EnvConfig, NoiseSpec, NormState, Outcome, Trajectory};
use crate::error::{Error, Result};

#[derive(Clone, Debug, Default)]
pub struct EvalOptions {
    pub episodes: u64,
    /// `None` picks the agent's default: greedy for value agents, sampled
    /// for actor-critics.
    pub greedy: Option<bool>,
    /// Exact start state; otherwise the usual jittered reset.
    pub start: Option<NormState>,
    /// Parameters for every episode, bypassing noise.
    pub fixed_params: Option<AysParams>,
    /// Seeds the environment stream (start jitter and noise).
    pub seed: u64,
    /// Directory for `trajectory_<i>.csv`.
    pub trajectory_dir: Option<PathBuf>,
}

#[derive(Clone, Debug)]
pub struct EvalEpisode {
    pub episode_return: f64,
    pub length: u32,
    pub outcome: Outcome,
    pub trajectory: Trajectory,
}

impl EvalEpisode {
    /// Share of steps spent on `action`.
    pub fn action_share(&self, action: Action) -> f64 {
        let n = self.trajectory.actions().count();
        if n == 0 {
            return 0.0;
        }
        self.trajectory.actions().filter(|a| *a == action).count() as f64 / n as f64
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EvalSummary {
    pub episodes: u64,
    pub greedy: bool,
    pub mean_return: Option<f64>,
    pub success_rate: Option<f64>,
    pub outcome_counts: BTreeMap<String, u64>,
    /// Steps per action over all episodes.
    pub action_counts: BTreeMap<String, u64>,
    /// Share of Default steps over the successful episodes.
    pub default_share_on_success: Option<f64>,
    #[serde(skip)]
    pub details: Vec<EvalEpisode>,
}

/// Parameters for the noisy-environment test protocol: one draw at the given
/// variance, shared by every agent under test.
pub fn sample_test_params(base: &AysParams, variance: f64, seed: u64) -> Result<AysParams> {
    let spec = NoiseSpec::constant(variance);
    spec.validate()?;
    Ok(spec.sample_episode(base, 0, &mut env_rng(seed)))
}

/// Runs frozen-policy episodes. The agent's training counters are untouched.
pub fn evaluate(agent: &mut dyn Agent, env: &EnvConfig, opts: &EvalOptions) -> Result<EvalSummary> {
    let greedy = opts.greedy.unwrap_or(agent.kind().greedy_by_default());
    if agent.context().observation_width != env.observation_width() {
        return Err(Error::Config(format!(
            "agent expects {}-wide observations but the environment produces {}",
            agent.context().observation_width,
            env.observation_width()
        )));
    }
    let mut sim = AysEnv::new(*env)?;
    sim.set_fixed_params(opts.fixed_params)?;
    let mut rng = env_rng(opts.seed);
    let mut details = Vec::with_capacity(opts.episodes as usize);
    for _ in 0..opts.episodes {
        let mut obs = match opts.start {
            Some(s) => sim.reset_to(s)?,
            None => sim.reset(&mut rng),
        };
        let mut trajectory = Trajectory::start(sim.state());
        let mut total = 0.0;
        let outcome = loop {
            let action = Action::from_index(agent.act_eval(&obs, greedy)?)?;
            let step = sim.step(action)?;
            total += step.reward;
            trajectory.record(action, sim.state(), step.reward, step.outcome);
            obs = step.observation;
            if let Some(o) = step.outcome {
                break o;
            }
        };
        details.push(EvalEpisode {
            episode_return: total,
            length: sim.steps(),
            outcome,
            trajectory,
        });
    }

    if let Some(dir) = opts.trajectory_dir.as_deref().filter(|_| !details.is_empty()) {
        write_trajectories(dir, &details)?;
    }

    let outcomes: Vec<Outcome> = details.iter().map(|d| d.outcome).collect();
    let mut action_counts: BTreeMap<String, u64> =
        Action::ALL.iter().map(|a| (a.name().to_string(), 0)).collect();
    for d in &details {
        for a in d.trajectory.actions() {
            *action_counts.entry(a.name().to_string()).or_default() += 1;
        }
    }
    let successes: Vec<&EvalEpisode> = details
        .iter()
        .filter(|d| d.outcome == Outcome::GreenFixedPoint)
        .collect();
    let default_share_on_success = if successes.is_empty() {
        None
    } else {
        let steps: usize = successes.iter().map(|d| d.trajectory.actions().count()).sum();
        let default: usize = successes
            .iter()
            .map(|d| d.trajectory.actions().filter(|a| *a == Action::Default).count())
            .sum();
        Some(default as f64 / steps as f64)
    };
    Ok(EvalSummary {
        episodes: details.len() as u64,
        greedy,
        mean_return: (!details.is_empty())
            .then(|| details.iter().map(|d| d.episode_return).sum::<f64>() / details.len() as f64),
        success_rate: success_rate(&outcomes),
        outcome_counts: outcome_counts(&outcomes),
        action_counts,
        default_share_on_success,
        details,
    })
}

fn write_trajectories(dir: &Path, details: &[EvalEpisode]) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (i, d) in details.iter().enumerate() {
        d.trajectory.write_csv(&dir.join(format!("trajectory_{i:04}.csv")))?;
    }
    Ok(())
}

/// Evaluates a saved run under `config`, which must match the checkpoint's
/// agent kind and observation width.
pub fn evaluate_checkpoint(
    checkpoint: &RunCheckpoint,
    config: &RunConfig,
    opts: &EvalOptions,
) -> Result<EvalSummary> {
    let mut agent = checkpoint.restore_agent()?;
    if agent.kind() != config.agent {
        return Err(Error::Config(format!(
            "checkpoint holds a {} agent, config asks for {}",
            agent.kind(),
            config.agent
        )));
    }
    evaluate(agent.as_mut(), &config.env, opts)
}
