use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::agents::{AgentKind, AgentSpec, Overrides};
use crate::env::{EnvConfig, NoiseSchedule, NoiseSpec, PbMetric, RewardScheme};
use crate::error::{Error, Result};

pub const DEFAULT_FRAME_LIMIT: u64 = 500_000;
pub const DEFAULT_SEEDS: [u64; 3] = [0, 1, 2];
/// Episodes between the in-memory snapshots used when a run blows up.
pub const DEFAULT_STABLE_INTERVAL: u64 = 50;

/// The five experiments.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Pb,
    PolicyCost,
    Simple,
    Noisy,
    Markov,
}

impl Preset {
    pub const ALL: [Preset; 5] = [
        Preset::Pb,
        Preset::PolicyCost,
        Preset::Simple,
        Preset::Noisy,
        Preset::Markov,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Pb => "pb",
            Preset::PolicyCost => "policy_cost",
            Preset::Simple => "simple",
            Preset::Noisy => "noisy",
            Preset::Markov => "markov",
        }
    }

    pub fn env_config(self) -> EnvConfig {
        let base = EnvConfig::default();
        match self {
            Preset::Pb => base,
            Preset::PolicyCost => EnvConfig {
                scheme: RewardScheme::PolicyCost,
                ..base
            },
            Preset::Simple => EnvConfig {
                scheme: RewardScheme::Simple,
                ..base
            },
            Preset::Noisy => EnvConfig {
                noise: NoiseSpec::scheduled(NoiseSchedule::default()),
                ..base
            },
            Preset::Markov => EnvConfig {
                markov: true,
                ..base
            },
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let wanted = s.to_ascii_lowercase().replace('-', "_");
        Self::ALL
            .into_iter()
            .find(|p| p.name() == wanted)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown preset `{s}` (expected pb, policy_cost, simple, noisy or markov)"
                ))
            })
    }
}

/// Everything that determines a run, apart from the seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub preset: Preset,
    pub agent: AgentKind,
    pub env: EnvConfig,
    pub frame_limit: u64,
    /// Optional cap on episodes, checked between episodes.
    pub episode_limit: Option<u64>,
    pub seeds: Vec<u64>,
    pub overrides: Overrides,
    pub output_dir: Option<PathBuf>,
    pub stable_interval: u64,
}

/// Default configuration of a named experiment.
pub fn experiment_preset(name: &str) -> Result<RunConfig> {
    Ok(RunConfig::new(name.parse()?, AgentKind::Dqn))
}

impl RunConfig {
    pub fn new(preset: Preset, agent: AgentKind) -> Self {
        Self {
            preset,
            agent,
            env: preset.env_config(),
            frame_limit: DEFAULT_FRAME_LIMIT,
            episode_limit: None,
            seeds: DEFAULT_SEEDS.to_vec(),
            overrides: Overrides::default(),
            output_dir: None,
            stable_interval: DEFAULT_STABLE_INTERVAL,
        }
    }

    pub fn observation_width(&self) -> usize {
        self.env.observation_width()
    }

    /// Default hyperparameters for the agent kind with overrides and the run's γ applied.
    pub fn agent_spec(&self) -> Result<AgentSpec> {
        let mut spec = AgentSpec::build(self.agent, &self.overrides)?;
        spec.set_gamma(self.env.gamma);
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        self.env.validate()?;
        if self.stable_interval == 0 {
            return Err(Error::Config("stable_interval must be positive".into()));
        }
        self.agent_spec().map(|_| ())
    }

    /// Parses a flat TOML document. `preset` (default `pb`) picks the base
    /// configuration; every other key overrides it. Hyperparameter keys sit
    /// at the top level next to the run keys.
    pub fn from_toml(text: &str) -> Result<Self> {
        Self::from_toml_with_preset(text, None)
    }

    /// As [`RunConfig::from_toml`], with `preset` taking precedence over the
    /// file's own `preset` key.
    pub fn from_toml_with_preset(text: &str, preset: Option<Preset>) -> Result<Self> {
        let table: toml::Table =
            toml::from_str(text).map_err(|e| Error::Config(format!("config file: {e}")))?;
        let (hyper, run): (toml::Table, toml::Table) = table
            .into_iter()
            .partition(|(k, _)| Overrides::KEYS.contains(&k.as_str()));
        let file: RunFile = toml::Value::Table(run)
            .try_into()
            .map_err(|e| Error::Config(format!("config file: {e}")))?;
        let overrides: Overrides = toml::Value::Table(hyper)
            .try_into()
            .map_err(|e| Error::Config(format!("config file: {e}")))?;
        let preset = preset.or(file.preset).unwrap_or(Preset::Pb);
        let mut config = RunConfig::new(preset, file.agent.unwrap_or(AgentKind::Dqn));
        config.overrides = overrides;
        file.apply(&mut config);
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::load_with_preset(path, None)
    }

    pub fn load_with_preset(path: &Path, preset: Option<Preset>) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_with_preset(&text, preset)
    }
}

/// Run keys accepted in a config file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunFile {
    preset: Option<Preset>,
    agent: Option<AgentKind>,
    reward: Option<RewardScheme>,
    pb_metric: Option<PbMetric>,
    markov: Option<bool>,
    noise_variance: Option<f64>,
    noise_schedule: Option<bool>,
    noise_start: Option<f64>,
    noise_multiplier: Option<f64>,
    noise_period: Option<u64>,
    noise_cap: Option<f64>,
    noise_clip_low: Option<f64>,
    noise_clip_high: Option<f64>,
    frame_limit: Option<u64>,
    episode_limit: Option<u64>,
    max_steps: Option<u32>,
    seeds: Option<Vec<u64>>,
    gamma: Option<f64>,
    tolerance: Option<f64>,
    output_dir: Option<PathBuf>,
    stable_interval: Option<u64>,
}

impl RunFile {
    fn apply(self, c: &mut RunConfig) {
        fn set<T>(slot: &mut T, v: Option<T>) {
            if let Some(v) = v {
                *slot = v;
            }
        }
        let env = &mut c.env;
        set(&mut env.scheme, self.reward);
        set(&mut env.pb_metric, self.pb_metric);
        set(&mut env.markov, self.markov);
        set(&mut env.max_steps, self.max_steps);
        set(&mut env.gamma, self.gamma);
        set(&mut env.tolerance, self.tolerance);
        set(&mut env.noise.variance, self.noise_variance);
        set(&mut env.noise.clip_low, self.noise_clip_low);
        set(&mut env.noise.clip_high, self.noise_clip_high);

        let touches_schedule = self.noise_start.is_some()
            || self.noise_multiplier.is_some()
            || self.noise_period.is_some()
            || self.noise_cap.is_some();
        match self.noise_schedule {
            Some(false) => env.noise.schedule = None,
            Some(true) => {
                env.noise.schedule.get_or_insert_with(NoiseSchedule::default);
            }
            None if touches_schedule => {
                env.noise.schedule.get_or_insert_with(NoiseSchedule::default);
            }
            None => {}
        }
        if let Some(s) = env.noise.schedule.as_mut() {
            set(&mut s.start, self.noise_start);
            set(&mut s.multiplier, self.noise_multiplier);
            set(&mut s.period, self.noise_period);
            set(&mut s.cap, self.noise_cap);
        }

        set(&mut c.frame_limit, self.frame_limit);
        if self.episode_limit.is_some() {
            c.episode_limit = self.episode_limit;
        }
        set(&mut c.seeds, self.seeds);
        if self.output_dir.is_some() {
            c.output_dir = self.output_dir;
        }
        set(&mut c.stable_interval, self.stable_interval);
    }
}
