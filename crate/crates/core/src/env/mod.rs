//! The AYS World-Earth model as an episodic environment.
//!
//! Observations are the normalized state `(a, y, s)`, optionally followed by
//! the accumulated normalized velocity `(da, dy, ds)`.

mod dynamics;
mod noise;
mod params;
mod reward;
mod state;
mod termination;
mod trajectory;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use dynamics::{
    black_fixed_point, derivatives, fossil_share, integrate, integrate_raw, integrate_step,
    integrate_step_with, rk4_step, Lorenz, DEFAULT_SUBSTEPS,
};
pub use noise::{NoiseSchedule, NoiseSpec};
pub use params::{effective_params, Action, AysParams};
pub use reward::{pb_reward, policy_cost_multiplier, reward, PbMetric, RewardScheme, PB_TARGET};
pub use state::{
    denormalize, normalize, normalized_rate, MarkovState, NormState, RawState, REFERENCE_STATE,
};
pub use termination::{Boundaries, Outcome, A_PB_RAW, DEFAULT_TOLERANCE, Y_SF_RAW};
pub use trajectory::{format_sig, Trajectory, TrajectoryRow, TRAJECTORY_HEADER};

use crate::error::{Error, Result};

pub const DEFAULT_MAX_STEPS: u32 = 600;
pub const DEFAULT_GAMMA: f64 = 0.99;
/// Half-width of the uniform perturbation of `a` and `y` at reset.
pub const START_JITTER: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvConfig {
    pub params: AysParams,
    pub scheme: RewardScheme,
    pub pb_metric: PbMetric,
    pub noise: NoiseSpec,
    /// Append velocities to the observation.
    pub markov: bool,
    pub tolerance: f64,
    pub max_steps: u32,
    /// Discount used for the fixed-point terminal bonus.
    pub gamma: f64,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            params: AysParams::default(),
            scheme: RewardScheme::Pb,
            pb_metric: PbMetric::Norm,
            noise: NoiseSpec::default(),
            markov: false,
            tolerance: DEFAULT_TOLERANCE,
            max_steps: DEFAULT_MAX_STEPS,
            gamma: DEFAULT_GAMMA,
        }
    }
}

impl EnvConfig {
    pub fn observation_width(&self) -> usize {
        if self.markov {
            6
        } else {
            3
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.noise.validate()?;
        if !(self.tolerance > 0.0 && self.tolerance < 0.5) {
            return Err(Error::Config(format!(
                "vicinity tolerance must be in (0, 0.5), got {}",
                self.tolerance
            )));
        }
        if self.max_steps == 0 {
            return Err(Error::Config("max_steps must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(Error::Config(format!("gamma must be in [0, 1), got {}", self.gamma)));
        }
        Ok(())
    }
}

/// Result of one environment step.
#[derive(Clone, Debug, PartialEq)]
pub struct Step {
    pub observation: Vec<f64>,
    pub reward: f64,
    pub done: bool,
    pub outcome: Option<Outcome>,
}

#[derive(Clone, Debug)]
pub struct AysEnv {
    config: EnvConfig,
    boundaries: Boundaries,
    episode_params: AysParams,
    fixed_params: Option<AysParams>,
    state: MarkovState,
    steps: u32,
    episodes: u64,
    done: bool,
}

impl AysEnv {
    pub fn new(config: EnvConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            boundaries: Boundaries::new(&config.params, config.tolerance),
            episode_params: config.params,
            fixed_params: None,
            state: MarkovState::at_rest(NormState::START),
            steps: 0,
            episodes: 0,
            done: true,
            config,
        })
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn boundaries(&self) -> &Boundaries {
        &self.boundaries
    }

    pub fn observation_width(&self) -> usize {
        self.config.observation_width()
    }

    /// Parameters in force for the current episode (before action overlays).
    pub fn episode_params(&self) -> &AysParams {
        &self.episode_params
    }

    /// Pins the parameters used by every following episode, bypassing noise.
    /// `None` restores per-episode sampling.
    pub fn set_fixed_params(&mut self, params: Option<AysParams>) -> Result<()> {
        if let Some(p) = &params {
            p.validate()?;
        }
        self.fixed_params = params;
        Ok(())
    }

    pub fn state(&self) -> NormState {
        self.state.position
    }

    pub fn markov_state(&self) -> MarkovState {
        self.state
    }

    pub fn steps(&self) -> u32 {
        self.steps
    }

    /// Number of `reset` calls so far; indexes the noise schedule.
    pub fn episodes_started(&self) -> u64 {
        self.episodes
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    /// Starts an episode near `(0.5, 0.5, 0.5)` and draws its parameters.
    pub fn reset<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Vec<f64> {
        let start = NormState {
            a: 0.5 + rng.random_range(-START_JITTER..START_JITTER),
            y: 0.5 + rng.random_range(-START_JITTER..START_JITTER),
            s: 0.5,
        };
        let params = match self.fixed_params {
            Some(p) => p,
            None => self
                .config
                .noise
                .sample_episode(&self.config.params, self.episodes, rng),
        };
        self.begin(start, params)
    }

    /// Starts an episode at an exact state without consuming randomness.
    pub fn reset_to(&mut self, start: NormState) -> Result<Vec<f64>> {
        denormalize(start)?;
        let params = self.fixed_params.unwrap_or(self.config.params);
        Ok(self.begin(start, params))
    }

    fn begin(&mut self, start: NormState, params: AysParams) -> Vec<f64> {
        self.state = MarkovState::at_rest(start);
        self.episode_params = params;
        self.steps = 0;
        self.episodes += 1;
        self.done = false;
        self.observation()
    }

    pub fn observation(&self) -> Vec<f64> {
        if self.config.markov {
            self.state.to_array().to_vec()
        } else {
            self.state.position.to_array().to_vec()
        }
    }

    pub fn step(&mut self, action: Action) -> Result<Step> {
        if self.done {
            return Err(Error::Usage("step called on a finished episode; reset first".into()));
        }
        let raw = integrate_raw(
            denormalize(self.state.position)?,
            action,
            &self.episode_params,
            DEFAULT_SUBSTEPS,
        )
        .map_err(|e| match e {
            Error::Integration { detail, .. } => Error::Integration {
                time: f64::from(self.steps + 1),
                detail,
            },
            other => other,
        })?;
        let next = normalize(raw);
        self.steps += 1;
        if self.config.markov {
            let p = effective_params(&self.episode_params, action);
            let rate = normalized_rate(raw, derivatives(raw, &p));
            for (v, r) in self.state.velocity.iter_mut().zip(rate) {
                *v += r;
            }
        }
        self.state.position = next;

        let outcome = self.boundaries.check(next).or_else(|| {
            (self.steps >= self.config.max_steps).then_some(Outcome::FrameLimit)
        });
        let reward = reward(
            action,
            next,
            self.config.scheme,
            self.config.pb_metric,
            outcome,
            self.config.gamma,
        );
        self.done = outcome.is_some();
        Ok(Step {
            observation: self.observation(),
            reward,
            done: self.done,
            outcome,
        })
    }
}
