use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{DqnConfig, TargetRule};
use super::epsilon::EpsilonSchedule;
use super::losses::{q_targets, weighted_td_loss};
use super::{check_observation, read_rng, write_header, write_rng};
use super::{Agent, AgentContext, AgentDiagnostics, AgentSpec, UpdateStats};
use crate::codec::{Reader, Writer};
use crate::error::{Error, Result};
use crate::nn::{argmax, snapshot, AdamConfig, AdamState, HeadKind, LrSchedule, MlpNetwork};
use crate::replay::{annealed_beta, Batch, PrioritizedBuffer, ReplayBuffer, Transition};

#[derive(Clone, Debug, PartialEq)]
enum Memory {
    Uniform(ReplayBuffer),
    Prioritized(PrioritizedBuffer),
}

impl Memory {
    fn len(&self) -> usize {
        match self {
            Memory::Uniform(b) => b.len(),
            Memory::Prioritized(b) => b.len(),
        }
    }
}

/// Deep Q-learning with experience replay and a periodically copied target
/// network. With `dueling`, a prioritized buffer and a double-Q target rule
/// it is the dueling double DQN.
#[derive(Clone, Debug)]
pub struct DqnAgent {
    config: DqnConfig,
    double_flavour: bool,
    ctx: AgentContext,
    policy: MlpNetwork,
    target: MlpNetwork,
    adam: AdamState,
    schedule: LrSchedule,
    epsilon: EpsilonSchedule,
    epsilon_override: Option<f64>,
    memory: Memory,
    updates: u64,
    rng: ChaCha8Rng,
}

impl DqnAgent {
    /// `double_flavour` only decides which agent kind is reported and saved.
    pub fn new(config: DqnConfig, double_flavour: bool, ctx: AgentContext) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
        let head = if config.dueling {
            HeadKind::Dueling
        } else {
            HeadKind::ActionValues
        };
        let policy = MlpNetwork::new(
            ctx.observation_width,
            &config.hidden,
            head,
            ctx.num_actions,
            &mut rng,
        )?;
        let target = policy.clone();
        let memory = match config.per {
            None => Memory::Uniform(ReplayBuffer::new(config.buffer_size, ctx.observation_width)?),
            Some(p) => Memory::Prioritized(PrioritizedBuffer::new(
                config.buffer_size,
                ctx.observation_width,
                p.alpha,
                p.beta,
            )?),
        };
        Ok(Self {
            adam: AdamState::new(&policy, config.learning_rate, AdamConfig::default()),
            schedule: LrSchedule::new(config.learning_rate, config.decay_number, ctx.total_frames),
            epsilon: EpsilonSchedule::new(config.epsilon_decay),
            epsilon_override: None,
            memory,
            updates: 0,
            policy,
            target,
            rng,
            config,
            double_flavour,
            ctx,
        })
    }

    pub fn config(&self) -> &DqnConfig {
        &self.config
    }

    pub fn policy_net(&self) -> &MlpNetwork {
        &self.policy
    }

    pub fn policy_net_mut(&mut self) -> &mut MlpNetwork {
        &mut self.policy
    }

    pub fn target_net(&self) -> &MlpNetwork {
        &self.target
    }

    pub fn updates(&self) -> u64 {
        self.updates
    }

    pub fn epsilon_schedule(&self) -> &EpsilonSchedule {
        &self.epsilon
    }

    /// Replaces the schedule with a constant ε (tests and diagnostics).
    pub fn set_epsilon_override(&mut self, epsilon: Option<f64>) {
        self.epsilon_override = epsilon;
    }

    pub fn q_values(&self, observation: &[f64]) -> Result<Vec<f64>> {
        check_observation(observation, &self.ctx)?;
        self.policy.predict_one(observation)
    }

    pub fn memory_len(&self) -> usize {
        self.memory.len()
    }

    fn epsilon_greedy(&mut self, observation: &[f64], epsilon: f64) -> Result<usize> {
        if self.rng.random::<f64>() < epsilon {
            Ok(self.rng.random_range(0..self.ctx.num_actions))
        } else {
            Ok(argmax(&self.q_values(observation)?))
        }
    }

    /// One gradient step on a sampled minibatch; returns the loss.
    pub fn update(&mut self, frame: u64) -> Result<f64> {
        let batch_size = self.config.batch_size;
        let (batch, leaves, weights): (Batch, Option<Vec<usize>>, Vec<f64>) = match &mut self.memory {
            Memory::Uniform(b) => (b.sample(batch_size, &mut self.rng)?, None, vec![1.0; batch_size]),
            Memory::Prioritized(b) => {
                let beta0 = self.config.per.map_or(1.0, |p| p.beta);
                b.set_beta(annealed_beta(beta0, frame, self.ctx.total_frames));
                let s = b.sample(batch_size, &mut self.rng)?;
                (s.batch, Some(s.leaves), s.weights)
            }
        };
        let loss = self.train_on(&batch, &weights, frame)?;
        if let (Memory::Prioritized(b), Some(leaves)) = (&mut self.memory, leaves) {
            b.update_priorities(&leaves, &loss.1)?;
        }
        Ok(loss.0)
    }

    /// Gradient step on an explicit batch; returns the loss and TD errors.
    pub fn train_on(&mut self, batch: &Batch, weights: &[f64], frame: u64) -> Result<(f64, Vec<f64>)> {
        let next_target = self.target.predict(&batch.next_states)?;
        let next_policy = match self.config.target_rule {
            TargetRule::Max => None,
            _ => Some(self.policy.predict(&batch.next_states)?),
        };
        let targets = q_targets(
            self.config.target_rule,
            &next_target,
            next_policy.as_ref(),
            &batch.rewards,
            &batch.dones,
            self.config.gamma,
        )?;
        let (q, cache) = self.policy.forward_batch(&batch.states)?;
        let td = weighted_td_loss(&q, &batch.actions, &targets, weights)?;
        if !td.loss.is_finite() {
            return Err(Error::Numeric(format!("non-finite TD loss {}", td.loss)));
        }
        let grads = self.policy.backward(&cache, &td.grad)?;
        self.adam.learning_rate = self.schedule.rate_at(frame);
        self.adam.step(&mut self.policy, &grads)?;
        self.updates += 1;
        if self.updates.is_multiple_of(self.config.target_update) {
            self.target.copy_from(&self.policy)?;
        }
        Ok((td.loss, td.td_errors))
    }

    pub(crate) fn read_body(
        r: &mut Reader<'_>,
        config: DqnConfig,
        double_flavour: bool,
        ctx: AgentContext,
    ) -> Result<Self> {
        let policy = snapshot::read(r)?;
        let target = snapshot::read(r)?;
        let adam = AdamState::read(r, &policy)?;
        let epsilon = EpsilonSchedule {
            rho: config.epsilon_decay,
            t: r.u64()?,
        };
        let updates = r.u64()?;
        let memory = match r.u8()? {
            0 => Memory::Uniform(ReplayBuffer::read(r)?),
            1 => Memory::Prioritized(PrioritizedBuffer::read(r)?),
            other => return Err(Error::Format(format!("unknown replay tag {other}"))),
        };
        let rng = read_rng(r)?;
        if policy.input_width() != ctx.observation_width {
            return Err(Error::Format("network width does not match checkpoint context".into()));
        }
        Ok(Self {
            schedule: LrSchedule::new(config.learning_rate, config.decay_number, ctx.total_frames),
            epsilon_override: None,
            config,
            double_flavour,
            ctx,
            policy,
            target,
            adam,
            epsilon,
            memory,
            updates,
            rng,
        })
    }
}

impl Agent for DqnAgent {
    fn spec(&self) -> AgentSpec {
        if self.double_flavour {
            AgentSpec::DuelDdqn(self.config.clone())
        } else {
            AgentSpec::Dqn(self.config.clone())
        }
    }

    fn context(&self) -> AgentContext {
        self.ctx
    }

    fn act(&mut self, observation: &[f64]) -> Result<usize> {
        let scheduled = self.epsilon.advance();
        let eps = self.epsilon_override.unwrap_or(scheduled);
        self.epsilon_greedy(observation, eps)
    }

    fn act_eval(&mut self, observation: &[f64], greedy: bool) -> Result<usize> {
        let eps = if greedy {
            0.0
        } else {
            self.epsilon_override.unwrap_or_else(|| self.epsilon.current())
        };
        self.epsilon_greedy(observation, eps)
    }

    fn observe(&mut self, t: &Transition) -> Result<()> {
        match &mut self.memory {
            Memory::Uniform(b) => b.push(t),
            Memory::Prioritized(b) => b.push(t),
        }
    }

    fn maybe_update(&mut self, frame: u64) -> Result<Option<UpdateStats>> {
        if self.memory.len() < self.config.batch_size {
            return Ok(None);
        }
        Ok(Some(UpdateStats::Value {
            loss: self.update(frame)?,
        }))
    }

    fn state_value(&self, observation: &[f64]) -> Result<f64> {
        Ok(self
            .q_values(observation)?
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max))
    }

    fn diagnostics(&self) -> AgentDiagnostics {
        let (max_priority, beta) = match &self.memory {
            Memory::Prioritized(b) => (Some(b.max_priority()), Some(b.beta())),
            Memory::Uniform(_) => (None, None),
        };
        AgentDiagnostics {
            updates: self.updates,
            epsilon: Some(self.epsilon_override.unwrap_or_else(|| self.epsilon.current())),
            buffer_len: Some(self.memory.len()),
            max_priority,
            beta,
        }
    }

    fn is_finite(&self) -> bool {
        self.policy.is_finite() && self.target.is_finite()
    }

    fn save(&self) -> Vec<u8> {
        let mut w = Writer::new();
        write_header(&mut w, &self.spec(), &self.ctx);
        snapshot::write(&self.policy, &mut w);
        snapshot::write(&self.target, &mut w);
        self.adam.write(&mut w);
        w.u64(self.epsilon.t);
        w.u64(self.updates);
        match &self.memory {
            Memory::Uniform(b) => {
                w.u8(0);
                b.write(&mut w);
            }
            Memory::Prioritized(b) => {
                w.u8(1);
                b.write(&mut w);
            }
        }
        write_rng(&mut w, &self.rng);
        w.into_inner()
    }
}
