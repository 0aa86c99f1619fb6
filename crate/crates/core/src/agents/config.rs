use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_HIDDEN: [usize; 2] = [256, 256];
pub const DEFAULT_GAMMA: f64 = 0.99;
pub const DEFAULT_MAX_GRAD_NORM: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgentKind {
    /// Uniform random actions; the reference baseline.
    Random,
    Dqn,
    /// Dueling double DQN with prioritized replay.
    DuelDdqn,
    A2c,
    Ppo,
}

impl AgentKind {
    pub const ALL: [AgentKind; 5] = [
        AgentKind::Random,
        AgentKind::Dqn,
        AgentKind::DuelDdqn,
        AgentKind::A2c,
        AgentKind::Ppo,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AgentKind::Random => "random",
            AgentKind::Dqn => "dqn",
            AgentKind::DuelDdqn => "duelddqn",
            AgentKind::A2c => "a2c",
            AgentKind::Ppo => "ppo",
        }
    }

    pub(crate) fn code(self) -> u8 {
        self as u8
    }

    pub(crate) fn from_code(code: u8) -> Result<Self> {
        Self::ALL
            .get(code as usize)
            .copied()
            .ok_or_else(|| Error::Format(format!("unknown agent kind code {code}")))
    }

    /// Value-based agents act greedily at evaluation; actor-critics sample.
    pub fn greedy_by_default(self) -> bool {
        matches!(self, AgentKind::Dqn | AgentKind::DuelDdqn)
    }
}

impl fmt::Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AgentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s.to_ascii_lowercase())
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown agent kind `{s}` (expected random, dqn, duelddqn, a2c or ppo)"
                ))
            })
    }
}

/// How the bootstrap term of the Q-learning target is formed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetRule {
    /// `max_a Q_target(s', a)`.
    Max,
    /// Select with the target network, evaluate with the policy network.
    DoubleSelectTarget,
    /// Select with the policy network, evaluate with the target network.
    DoubleSelectPolicy,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerConfig {
    pub alpha: f64,
    /// Starting β; annealed linearly to 1 over the run.
    pub beta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DqnConfig {
    pub learning_rate: f64,
    /// ρ in `ε(t) = min(1, t^-ρ + 0.01)`.
    pub epsilon_decay: f64,
    pub batch_size: usize,
    pub buffer_size: usize,
    /// Target copy period, in updates.
    pub target_update: u64,
    pub decay_number: u32,
    pub hidden: Vec<usize>,
    pub gamma: f64,
    pub dueling: bool,
    pub per: Option<PerConfig>,
    pub target_rule: TargetRule,
}

impl DqnConfig {
    pub fn dqn() -> Self {
        Self {
            learning_rate: 0.002357,
            epsilon_decay: 0.7052,
            batch_size: 256,
            buffer_size: 32768,
            target_update: 12,
            decay_number: 6,
            hidden: DEFAULT_HIDDEN.to_vec(),
            gamma: DEFAULT_GAMMA,
            dueling: false,
            per: None,
            target_rule: TargetRule::Max,
        }
    }

    pub fn duel_ddqn() -> Self {
        Self {
            learning_rate: 0.004133,
            epsilon_decay: 0.5307,
            batch_size: 128,
            buffer_size: 32768,
            target_update: 54,
            decay_number: 10,
            hidden: DEFAULT_HIDDEN.to_vec(),
            gamma: DEFAULT_GAMMA,
            dueling: true,
            per: Some(PerConfig {
                alpha: 0.213,
                beta: 0.7389,
            }),
            target_rule: TargetRule::DoubleSelectTarget,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct A2cConfig {
    pub actor_learning_rate: f64,
    pub critic_learning_rate: f64,
    pub entropy_coef: f64,
    pub rollout_length: usize,
    pub decay_number: u32,
    pub hidden: Vec<usize>,
    pub gamma: f64,
    pub max_grad_norm: f64,
}

impl Default for A2cConfig {
    fn default() -> Self {
        Self {
            actor_learning_rate: 2.052e-4,
            critic_learning_rate: 2.627e-3,
            entropy_coef: 0.001672,
            rollout_length: 32,
            decay_number: 4,
            hidden: DEFAULT_HIDDEN.to_vec(),
            gamma: DEFAULT_GAMMA,
            max_grad_norm: DEFAULT_MAX_GRAD_NORM,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PpoConfig {
    pub actor_learning_rate: f64,
    pub critic_learning_rate: f64,
    pub entropy_coef: f64,
    pub batch_size: usize,
    pub rollout_length: usize,
    pub decay_number: u32,
    pub gae_lambda: f64,
    pub clip: f64,
    pub epochs: usize,
    pub hidden: Vec<usize>,
    pub gamma: f64,
    pub max_grad_norm: f64,
}

impl Default for PpoConfig {
    fn default() -> Self {
        Self {
            actor_learning_rate: 3.633e-4,
            critic_learning_rate: 4.864e-3,
            entropy_coef: 0.0001411,
            batch_size: 256,
            rollout_length: 2048,
            decay_number: 200,
            gae_lambda: 0.8845,
            clip: 0.2762,
            epochs: 50,
            hidden: DEFAULT_HIDDEN.to_vec(),
            gamma: DEFAULT_GAMMA,
            max_grad_norm: DEFAULT_MAX_GRAD_NORM,
        }
    }
}

/// Fully resolved hyperparameters for one agent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum AgentSpec {
    Random,
    Dqn(DqnConfig),
    #[serde(rename = "duelddqn")]
    DuelDdqn(DqnConfig),
    A2c(A2cConfig),
    Ppo(PpoConfig),
}

/// Hyperparameter overrides as they appear in a run config. Every key is
/// optional; keys that do not apply to the chosen agent are rejected.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    pub learning_rate: Option<f64>,
    pub actor_learning_rate: Option<f64>,
    pub critic_learning_rate: Option<f64>,
    pub epsilon_decay: Option<f64>,
    pub batch_size: Option<usize>,
    pub buffer_size: Option<usize>,
    pub target_update: Option<u64>,
    pub decay_number: Option<u32>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub target_rule: Option<TargetRule>,
    pub entropy_coef: Option<f64>,
    pub rollout_length: Option<usize>,
    pub gae_lambda: Option<f64>,
    pub clip: Option<f64>,
    pub epochs: Option<usize>,
    pub hidden_width: Option<usize>,
    pub hidden_layers: Option<usize>,
    pub max_grad_norm: Option<f64>,
}

impl Overrides {
    pub const KEYS: [&'static str; 19] = [
        "learning_rate",
        "actor_learning_rate",
        "critic_learning_rate",
        "epsilon_decay",
        "batch_size",
        "buffer_size",
        "target_update",
        "decay_number",
        "alpha",
        "beta",
        "target_rule",
        "entropy_coef",
        "rollout_length",
        "gae_lambda",
        "clip",
        "epochs",
        "hidden_width",
        "hidden_layers",
        "max_grad_norm",
    ];

    pub fn is_empty(&self) -> bool {
        self == &Overrides::default()
    }

    fn set_keys(&self) -> Vec<&'static str> {
        let mut keys = Vec::new();
        macro_rules! collect {
            ($($f:ident),*) => {$(if self.$f.is_some() { keys.push(stringify!($f)); })*};
        }
        collect!(
            learning_rate,
            actor_learning_rate,
            critic_learning_rate,
            epsilon_decay,
            batch_size,
            buffer_size,
            target_update,
            decay_number,
            alpha,
            beta,
            target_rule,
            entropy_coef,
            rollout_length,
            gae_lambda,
            clip,
            epochs,
            hidden_width,
            hidden_layers,
            max_grad_norm
        );
        keys
    }
}

fn applicable_keys(kind: AgentKind) -> &'static [&'static str] {
    const NET: [&str; 2] = ["hidden_width", "hidden_layers"];
    match kind {
        AgentKind::Random => &[],
        AgentKind::Dqn => &[
            "learning_rate",
            "epsilon_decay",
            "batch_size",
            "buffer_size",
            "target_update",
            "decay_number",
            "target_rule",
            NET[0],
            NET[1],
        ],
        AgentKind::DuelDdqn => &[
            "learning_rate",
            "epsilon_decay",
            "batch_size",
            "buffer_size",
            "target_update",
            "decay_number",
            "alpha",
            "beta",
            "target_rule",
            NET[0],
            NET[1],
        ],
        AgentKind::A2c => &[
            "actor_learning_rate",
            "critic_learning_rate",
            "entropy_coef",
            "rollout_length",
            "decay_number",
            "max_grad_norm",
            NET[0],
            NET[1],
        ],
        AgentKind::Ppo => &[
            "actor_learning_rate",
            "critic_learning_rate",
            "entropy_coef",
            "batch_size",
            "rollout_length",
            "decay_number",
            "gae_lambda",
            "clip",
            "epochs",
            "max_grad_norm",
            NET[0],
            NET[1],
        ],
    }
}

fn hidden_override(current: &[usize], o: &Overrides) -> Vec<usize> {
    let width = o.hidden_width.unwrap_or_else(|| current.first().copied().unwrap_or(256));
    let layers = o.hidden_layers.unwrap_or(current.len());
    vec![width; layers]
}

impl AgentSpec {
    /// Default hyperparameters for `kind`.
    pub fn defaults(kind: AgentKind) -> Self {
        match kind {
            AgentKind::Random => AgentSpec::Random,
            AgentKind::Dqn => AgentSpec::Dqn(DqnConfig::dqn()),
            AgentKind::DuelDdqn => AgentSpec::DuelDdqn(DqnConfig::duel_ddqn()),
            AgentKind::A2c => AgentSpec::A2c(A2cConfig::default()),
            AgentKind::Ppo => AgentSpec::Ppo(PpoConfig::default()),
        }
    }

    pub fn kind(&self) -> AgentKind {
        match self {
            AgentSpec::Random => AgentKind::Random,
            AgentSpec::Dqn(_) => AgentKind::Dqn,
            AgentSpec::DuelDdqn(_) => AgentKind::DuelDdqn,
            AgentSpec::A2c(_) => AgentKind::A2c,
            AgentSpec::Ppo(_) => AgentKind::Ppo,
        }
    }

    pub fn build(kind: AgentKind, overrides: &Overrides) -> Result<Self> {
        let mut spec = Self::defaults(kind);
        spec.apply(overrides)?;
        Ok(spec)
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<()> {
        let kind = self.kind();
        let allowed = applicable_keys(kind);
        if let Some(bad) = o.set_keys().into_iter().find(|k| !allowed.contains(k)) {
            return Err(Error::Config(format!(
                "override `{bad}` does not apply to agent `{kind}`"
            )));
        }
        match self {
            AgentSpec::Random => {}
            AgentSpec::Dqn(c) | AgentSpec::DuelDdqn(c) => {
                set(&mut c.learning_rate, o.learning_rate);
                set(&mut c.epsilon_decay, o.epsilon_decay);
                set(&mut c.batch_size, o.batch_size);
                set(&mut c.buffer_size, o.buffer_size);
                set(&mut c.target_update, o.target_update);
                set(&mut c.decay_number, o.decay_number);
                set(&mut c.target_rule, o.target_rule);
                c.hidden = hidden_override(&c.hidden, o);
                if let Some(per) = c.per.as_mut() {
                    set(&mut per.alpha, o.alpha);
                    set(&mut per.beta, o.beta);
                }
            }
            AgentSpec::A2c(c) => {
                set(&mut c.actor_learning_rate, o.actor_learning_rate);
                set(&mut c.critic_learning_rate, o.critic_learning_rate);
                set(&mut c.entropy_coef, o.entropy_coef);
                set(&mut c.rollout_length, o.rollout_length);
                set(&mut c.decay_number, o.decay_number);
                set(&mut c.max_grad_norm, o.max_grad_norm);
                c.hidden = hidden_override(&c.hidden, o);
            }
            AgentSpec::Ppo(c) => {
                set(&mut c.actor_learning_rate, o.actor_learning_rate);
                set(&mut c.critic_learning_rate, o.critic_learning_rate);
                set(&mut c.entropy_coef, o.entropy_coef);
                set(&mut c.batch_size, o.batch_size);
                set(&mut c.rollout_length, o.rollout_length);
                set(&mut c.decay_number, o.decay_number);
                set(&mut c.gae_lambda, o.gae_lambda);
                set(&mut c.clip, o.clip);
                set(&mut c.epochs, o.epochs);
                set(&mut c.max_grad_norm, o.max_grad_norm);
                c.hidden = hidden_override(&c.hidden, o);
            }
        }
        self.validate()
    }

    /// Discount factor used by the learning targets.
    pub fn set_gamma(&mut self, gamma: f64) {
        match self {
            AgentSpec::Random => {}
            AgentSpec::Dqn(c) | AgentSpec::DuelDdqn(c) => c.gamma = gamma,
            AgentSpec::A2c(c) => c.gamma = gamma,
            AgentSpec::Ppo(c) => c.gamma = gamma,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        let mut check = |ok: bool, what: &str| {
            if !ok {
                problems.push(what.to_string());
            }
        };
        let positive = |x: f64| x > 0.0 && x.is_finite();
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        let gamma_ok = |g: f64| (0.0..1.0).contains(&g);
        match self {
            AgentSpec::Random => {}
            AgentSpec::Dqn(c) | AgentSpec::DuelDdqn(c) => {
                check(positive(c.learning_rate), "learning_rate must be positive");
                check(unit(c.epsilon_decay), "epsilon_decay must lie in [0, 1]");
                check(c.batch_size > 0, "batch_size must be positive");
                check(c.buffer_size > 0, "buffer_size must be positive");
                check(c.batch_size <= c.buffer_size, "batch_size cannot exceed buffer_size");
                check(c.target_update > 0, "target_update must be positive");
                check(gamma_ok(c.gamma), "gamma must lie in [0, 1)");
                check(c.hidden.iter().all(|&h| h > 0), "hidden widths must be positive");
                if let Some(p) = c.per {
                    check(unit(p.alpha), "alpha must lie in [0, 1]");
                    check(unit(p.beta), "beta must lie in [0, 1]");
                }
            }
            AgentSpec::A2c(c) => {
                check(positive(c.actor_learning_rate), "actor_learning_rate must be positive");
                check(positive(c.critic_learning_rate), "critic_learning_rate must be positive");
                check(c.entropy_coef >= 0.0, "entropy_coef must be non-negative");
                check(c.rollout_length > 0, "rollout_length must be positive");
                check(positive(c.max_grad_norm), "max_grad_norm must be positive");
                check(gamma_ok(c.gamma), "gamma must lie in [0, 1)");
                check(c.hidden.iter().all(|&h| h > 0), "hidden widths must be positive");
            }
            AgentSpec::Ppo(c) => {
                check(positive(c.actor_learning_rate), "actor_learning_rate must be positive");
                check(positive(c.critic_learning_rate), "critic_learning_rate must be positive");
                check(c.entropy_coef >= 0.0, "entropy_coef must be non-negative");
                check(c.batch_size > 0, "batch_size must be positive");
                check(c.rollout_length > 0, "rollout_length must be positive");
                check(unit(c.gae_lambda), "gae_lambda must lie in [0, 1]");
                check(c.clip > 0.0 && c.clip < 1.0, "clip must lie in (0, 1)");
                check(c.epochs > 0, "epochs must be positive");
                check(positive(c.max_grad_norm), "max_grad_norm must be positive");
                check(gamma_ok(c.gamma), "gamma must lie in [0, 1)");
                check(c.hidden.iter().all(|&h| h > 0), "hidden widths must be positive");
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(format!("{}: {}", self.kind(), problems.join("; "))))
        }
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_hyperparameters() {
        let AgentSpec::Dqn(d) = AgentSpec::defaults(AgentKind::Dqn) else {
            panic!()
        };
        assert_eq!(d.learning_rate, 0.002357);
        assert_eq!((d.batch_size, d.buffer_size, d.target_update, d.decay_number), (256, 32768, 12, 6));
        let AgentSpec::Ppo(p) = AgentSpec::defaults(AgentKind::Ppo) else {
            panic!()
        };
        assert_eq!((p.gae_lambda, p.clip), (0.8845, 0.2762));
    }

    #[test]
    fn override_batch_size_only() {
        let o = Overrides {
            batch_size: Some(64),
            ..Overrides::default()
        };
        let AgentSpec::Dqn(d) = AgentSpec::build(AgentKind::Dqn, &o).unwrap() else {
            panic!()
        };
        assert_eq!(d.batch_size, 64);
        assert_eq!(AgentSpec::Dqn(DqnConfig { batch_size: 256, ..d }), AgentSpec::defaults(AgentKind::Dqn));
    }

    #[test]
    fn inapplicable_override_is_config_error() {
        let o = Overrides {
            clip: Some(0.1),
            ..Overrides::default()
        };
        assert!(matches!(AgentSpec::build(AgentKind::Dqn, &o), Err(Error::Config(_))));
        let o = Overrides {
            learning_rate: Some(-1.0),
            ..Overrides::default()
        };
        assert!(matches!(AgentSpec::build(AgentKind::Dqn, &o), Err(Error::Config(_))));
    }

    #[test]
    fn key_list_matches_fields() {
        let json = serde_json::to_value(Overrides::default()).unwrap();
        let mut fields: Vec<_> = json.as_object().unwrap().keys().cloned().collect();
        let mut keys: Vec<_> = Overrides::KEYS.iter().map(|k| k.to_string()).collect();
        fields.sort();
        keys.sort();
        assert_eq!(fields, keys);
    }

    #[test]
    fn kind_parsing() {
        assert_eq!("DuelDDQN".parse::<AgentKind>().unwrap(), AgentKind::DuelDdqn);
        assert!("sac".parse::<AgentKind>().is_err());
        for k in AgentKind::ALL {
            assert_eq!(AgentKind::from_code(k.code()).unwrap(), k);
            let json = serde_json::to_string(&k).unwrap();
            assert_eq!(json, format!("\"{}\"", k.name()));
        }
    }

    #[test]
    fn spec_json_round_trip() {
        for k in AgentKind::ALL {
            let s = AgentSpec::defaults(k);
            let json = serde_json::to_string(&s).unwrap();
            assert_eq!(serde_json::from_str::<AgentSpec>(&json).unwrap(), s);
        }
    }
}
