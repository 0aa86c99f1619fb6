//! Learning agents behind one interface: `act`, `observe`, `maybe_update`.
//!
//! Value-based agents ([`DqnAgent`], covering DQN and dueling double DQN with
//! prioritized replay) update once per environment step once their buffer
//! holds a batch. Actor-critics ([`A2cAgent`], [`PpoAgent`]) collect a full
//! rollout and update on it in one go.

mod actor_critic;
mod config;
mod dqn;
mod epsilon;
pub mod losses;
mod random;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use actor_critic::{A2cAgent, PpoAgent};
pub use config::{
    A2cConfig, AgentKind, AgentSpec, DqnConfig, Overrides, PerConfig, PpoConfig, TargetRule,
    DEFAULT_GAMMA, DEFAULT_HIDDEN, DEFAULT_MAX_GRAD_NORM,
};
pub use dqn::DqnAgent;
pub use epsilon::{EpsilonSchedule, EPSILON_FLOOR};
pub use random::RandomAgent;

use crate::codec::{Reader, Writer};
use crate::env::Action;
use crate::error::{Error, Result};
use crate::replay::Transition;

/// Run-level facts an agent needs at construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentContext {
    pub observation_width: usize,
    pub num_actions: usize,
    /// Length of training; sets the learning-rate and β schedules.
    pub total_frames: u64,
    pub seed: u64,
}

impl AgentContext {
    pub fn new(observation_width: usize, total_frames: u64, seed: u64) -> Self {
        Self {
            observation_width,
            num_actions: Action::COUNT,
            total_frames,
            seed,
        }
    }
}

/// Losses reported by one update.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum UpdateStats {
    Value { loss: f64 },
    ActorCritic { actor_loss: f64, critic_loss: f64, entropy: f64 },
}

/// Counters and buffer statistics for the metrics log.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AgentDiagnostics {
    pub updates: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub buffer_len: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_priority: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
}

pub trait Agent: Send {
    fn spec(&self) -> AgentSpec;

    fn context(&self) -> AgentContext;

    fn kind(&self) -> AgentKind {
        self.spec().kind()
    }

    /// Training-time action: ε-greedy for value agents, a policy sample for
    /// actor-critics (which also remember what they need for the rollout).
    fn act(&mut self, observation: &[f64]) -> Result<usize>;

    /// Frozen-policy action that leaves training counters alone. `greedy`
    /// takes the argmax of Q or of the policy; otherwise actor-critics sample
    /// and value agents explore with their current ε.
    fn act_eval(&mut self, observation: &[f64], greedy: bool) -> Result<usize>;

    /// Records the transition that followed the last `act`.
    fn observe(&mut self, transition: &Transition) -> Result<()>;

    /// Runs an update when one is due. `frame` is the number of environment
    /// steps taken so far in the run.
    fn maybe_update(&mut self, frame: u64) -> Result<Option<UpdateStats>>;

    /// `max_a Q(s, a)` for value agents, the critic's `v(s)` otherwise.
    fn state_value(&self, observation: &[f64]) -> Result<f64>;

    fn diagnostics(&self) -> AgentDiagnostics;

    /// All parameters finite.
    fn is_finite(&self) -> bool;

    /// Full training state: networks, optimizer moments, buffers, counters
    /// and the random stream.
    fn save(&self) -> Vec<u8>;
}

/// Builds a fresh agent. Network initialisation and the agent's random
/// stream are seeded from `ctx.seed`.
pub fn build_agent(spec: &AgentSpec, ctx: AgentContext) -> Result<Box<dyn Agent>> {
    spec.validate()?;
    if ctx.observation_width == 0 || ctx.num_actions == 0 {
        return Err(Error::Config(format!("invalid agent context {ctx:?}")));
    }
    Ok(match spec {
        AgentSpec::Random => Box::new(RandomAgent::new(ctx)),
        AgentSpec::Dqn(c) => Box::new(DqnAgent::new(c.clone(), false, ctx)?),
        AgentSpec::DuelDdqn(c) => Box::new(DqnAgent::new(c.clone(), true, ctx)?),
        AgentSpec::A2c(c) => Box::new(A2cAgent::new(c.clone(), ctx)?),
        AgentSpec::Ppo(c) => Box::new(PpoAgent::new(c.clone(), ctx)?),
    })
}

const MAGIC: &[u8] = b"AYSAGT";
const VERSION: u16 = 1;

pub(crate) fn write_header(w: &mut Writer, spec: &AgentSpec, ctx: &AgentContext) {
    w.bytes(MAGIC);
    w.u16(VERSION);
    w.u8(spec.kind().code());
    w.str(&serde_json::to_string(spec).expect("spec serializes"));
    w.str(&serde_json::to_string(ctx).expect("context serializes"));
}

pub(crate) fn write_rng(w: &mut Writer, rng: &ChaCha8Rng) {
    w.str(&serde_json::to_string(rng).expect("rng serializes"));
}

pub(crate) fn read_rng(r: &mut Reader<'_>) -> Result<ChaCha8Rng> {
    serde_json::from_str(r.str()?).map_err(|e| Error::Format(format!("rng state: {e}")))
}

/// Reads the kind, spec and context at the front of a checkpoint.
pub fn peek_checkpoint(bytes: &[u8]) -> Result<(AgentSpec, AgentContext)> {
    let mut r = Reader::new(bytes);
    read_header(&mut r)
}

fn read_header(r: &mut Reader<'_>) -> Result<(AgentSpec, AgentContext)> {
    r.expect(MAGIC)?;
    let version = r.u16()?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported agent checkpoint version {version}")));
    }
    let kind = AgentKind::from_code(r.u8()?)?;
    let spec: AgentSpec = serde_json::from_str(r.str()?)
        .map_err(|e| Error::Format(format!("agent spec: {e}")))?;
    if spec.kind() != kind {
        return Err(Error::Format(format!(
            "header says {kind} but spec describes {}",
            spec.kind()
        )));
    }
    let ctx: AgentContext = serde_json::from_str(r.str()?)
        .map_err(|e| Error::Format(format!("agent context: {e}")))?;
    Ok((spec, ctx))
}

/// Restores an agent saved with [`Agent::save`]; training resumes exactly
/// where it stopped.
pub fn load_agent(bytes: &[u8]) -> Result<Box<dyn Agent>> {
    let mut r = Reader::new(bytes);
    let (spec, ctx) = read_header(&mut r)?;
    let agent: Box<dyn Agent> = match spec {
        AgentSpec::Random => Box::new(RandomAgent::read_body(&mut r, ctx)?),
        AgentSpec::Dqn(c) => Box::new(DqnAgent::read_body(&mut r, c, false, ctx)?),
        AgentSpec::DuelDdqn(c) => Box::new(DqnAgent::read_body(&mut r, c, true, ctx)?),
        AgentSpec::A2c(c) => Box::new(A2cAgent::read_body(&mut r, c, ctx)?),
        AgentSpec::Ppo(c) => Box::new(PpoAgent::read_body(&mut r, c, ctx)?),
    };
    if !r.is_empty() {
        return Err(Error::Format("trailing bytes after agent checkpoint".into()));
    }
    Ok(agent)
}

pub(crate) fn check_observation(obs: &[f64], ctx: &AgentContext) -> Result<()> {
    if obs.len() != ctx.observation_width {
        return Err(Error::Shape(format!(
            "observation has width {}, agent expects {}",
            obs.len(),
            ctx.observation_width
        )));
    }
    Ok(())
}
