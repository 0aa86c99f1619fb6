use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::{A2cConfig, PpoConfig};
use super::losses::{a2c_actor_loss, critic_mse, normalize_advantages, ppo_actor_loss};
use super::{check_observation, read_rng, write_header, write_rng};
use super::{Agent, AgentContext, AgentDiagnostics, AgentSpec, UpdateStats};
use crate::codec::{Reader, Writer};
use crate::error::{Error, Result};
use crate::nn::{
    argmax, log_prob, sample_categorical, snapshot, softmax, AdamConfig, AdamState, HeadKind,
    LrSchedule, Matrix, MlpNetwork,
};
use crate::replay::{gae, Rollout, RolloutBuffer, RolloutStep, Transition};

#[derive(Clone, Debug, PartialEq)]
struct Pending {
    state: Vec<f64>,
    action: usize,
    log_prob: f64,
    value: f64,
}

/// Actor and critic networks, their optimizers and the rollout in progress.
#[derive(Clone, Debug)]
struct ActorCritic {
    ctx: AgentContext,
    actor: MlpNetwork,
    critic: MlpNetwork,
    actor_adam: AdamState,
    critic_adam: AdamState,
    actor_schedule: LrSchedule,
    critic_schedule: LrSchedule,
    max_grad_norm: f64,
    rollout: RolloutBuffer,
    pending: Option<Pending>,
    last_next_state: Option<Vec<f64>>,
    updates: u64,
    rng: ChaCha8Rng,
}

struct Rates {
    actor: f64,
    critic: f64,
    decay_number: u32,
}

impl ActorCritic {
    fn new(hidden: &[usize], rates: Rates, max_grad_norm: f64, rollout: usize, ctx: AgentContext) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
        let w = ctx.observation_width;
        let actor = MlpNetwork::new(w, hidden, HeadKind::ActionPreferences, ctx.num_actions, &mut rng)?;
        let critic = MlpNetwork::new(w, hidden, HeadKind::ScalarValue, ctx.num_actions, &mut rng)?;
        Ok(Self {
            actor_adam: AdamState::new(&actor, rates.actor, AdamConfig::default()),
            critic_adam: AdamState::new(&critic, rates.critic, AdamConfig::default()),
            actor_schedule: LrSchedule::new(rates.actor, rates.decay_number, ctx.total_frames),
            critic_schedule: LrSchedule::new(rates.critic, rates.decay_number, ctx.total_frames),
            max_grad_norm,
            rollout: RolloutBuffer::new(rollout)?,
            pending: None,
            last_next_state: None,
            updates: 0,
            actor,
            critic,
            rng,
            ctx,
        })
    }

    fn probs(&self, observation: &[f64]) -> Result<Vec<f64>> {
        check_observation(observation, &self.ctx)?;
        Ok(softmax(&self.actor.predict_one(observation)?))
    }

    fn value(&self, observation: &[f64]) -> Result<f64> {
        check_observation(observation, &self.ctx)?;
        Ok(self.critic.predict_one(observation)?[0])
    }

    fn act(&mut self, observation: &[f64]) -> Result<usize> {
        let probs = self.probs(observation)?;
        let action = sample_categorical(&probs, &mut self.rng);
        self.pending = Some(Pending {
            state: observation.to_vec(),
            action,
            log_prob: log_prob(&probs, action),
            value: self.value(observation)?,
        });
        Ok(action)
    }

    fn act_eval(&mut self, observation: &[f64], greedy: bool) -> Result<usize> {
        let probs = self.probs(observation)?;
        Ok(if greedy {
            argmax(&probs)
        } else {
            sample_categorical(&probs, &mut self.rng)
        })
    }

    fn observe(&mut self, t: &Transition) -> Result<()> {
        let p = self
            .pending
            .take()
            .ok_or_else(|| Error::Usage("observe called without a preceding act".into()))?;
        if p.state != t.state || p.action != t.action {
            return Err(Error::Usage(
                "transition does not match the last action taken".into(),
            ));
        }
        self.rollout.push(
            RolloutStep {
                state: p.state,
                action: p.action,
                log_prob: p.log_prob,
                value: p.value,
                reward: t.reward,
                done: t.done,
            },
            self.actor.generation(),
        )?;
        self.last_next_state = Some(t.next_state.clone());
        Ok(())
    }

    /// Takes a full rollout collected by the current actor parameters.
    fn take_rollout(&mut self) -> Result<Option<(Rollout, Vec<f64>)>> {
        if !self.rollout.is_full() {
            return Ok(None);
        }
        let rollout = self.rollout.take()?;
        if rollout.generation != self.actor.generation() {
            return Err(Error::Usage(format!(
                "rollout was collected by actor generation {} but the actor is at {}",
                rollout.generation,
                self.actor.generation()
            )));
        }
        let next = self
            .last_next_state
            .take()
            .ok_or_else(|| Error::Usage("rollout has no final next state".into()))?;
        Ok(Some((rollout, next)))
    }

    fn set_rates(&mut self, frame: u64) {
        self.actor_adam.learning_rate = self.actor_schedule.rate_at(frame);
        self.critic_adam.learning_rate = self.critic_schedule.rate_at(frame);
    }

    fn step_actor(&mut self, cache: &crate::nn::ForwardCache, grad: &Matrix) -> Result<()> {
        let mut g = self.actor.backward(cache, grad)?;
        g.clip_to_norm(self.max_grad_norm);
        self.actor_adam.step(&mut self.actor, &g)
    }

    fn step_critic(&mut self, cache: &crate::nn::ForwardCache, grad: &Matrix) -> Result<()> {
        let mut g = self.critic.backward(cache, grad)?;
        g.clip_to_norm(self.max_grad_norm);
        self.critic_adam.step(&mut self.critic, &g)
    }

    fn diagnostics(&self) -> AgentDiagnostics {
        AgentDiagnostics {
            updates: self.updates,
            buffer_len: Some(self.rollout.len()),
            ..AgentDiagnostics::default()
        }
    }

    fn write(&self, w: &mut Writer) {
        snapshot::write(&self.actor, w);
        snapshot::write(&self.critic, w);
        self.actor_adam.write(w);
        self.critic_adam.write(w);
        w.u64(self.updates);
        // A partial rollout is saved too, so resuming mid-rollout is exact.
        w.u64(self.rollout.len() as u64);
        for s in self.rollout.steps() {
            w.f64s(&s.state);
            w.u64(s.action as u64);
            w.f64(s.log_prob);
            w.f64(s.value);
            w.f64(s.reward);
            w.u8(s.done as u8);
        }
        match &self.last_next_state {
            Some(v) => {
                w.u8(1);
                w.f64s(v);
            }
            None => w.u8(0),
        }
        write_rng(w, &self.rng);
    }

    fn read(
        r: &mut Reader<'_>,
        rates: Rates,
        max_grad_norm: f64,
        rollout_len: usize,
        ctx: AgentContext,
    ) -> Result<Self> {
        let actor = snapshot::read(r)?;
        let critic = snapshot::read(r)?;
        let actor_adam = AdamState::read(r, &actor)?;
        let critic_adam = AdamState::read(r, &critic)?;
        let updates = r.u64()?;
        let n = r.u64()? as usize;
        // Generation counters are process-local, so they are not saved: the
        // restored actor is the one that collected the partial rollout.
        let mut rollout = RolloutBuffer::new(rollout_len)?;
        let generation = actor.generation();
        for _ in 0..n {
            let step = RolloutStep {
                state: r.f64s()?,
                action: r.u64()? as usize,
                log_prob: r.f64()?,
                value: r.f64()?,
                reward: r.f64()?,
                done: r.u8()? != 0,
            };
            rollout
                .push(step, generation)
                .map_err(|e| Error::Format(e.to_string()))?;
        }
        let last_next_state = match r.u8()? {
            0 => None,
            _ => Some(r.f64s()?),
        };
        let rng = read_rng(r)?;
        if actor.input_width() != ctx.observation_width {
            return Err(Error::Format("network width does not match checkpoint context".into()));
        }
        Ok(Self {
            actor_schedule: LrSchedule::new(rates.actor, rates.decay_number, ctx.total_frames),
            critic_schedule: LrSchedule::new(rates.critic, rates.decay_number, ctx.total_frames),
            max_grad_norm,
            rollout,
            pending: None,
            last_next_state,
            updates,
            actor,
            critic,
            actor_adam,
            critic_adam,
            rng,
            ctx,
        })
    }
}

/// Advantage actor-critic with one-step TD advantages and one update per
/// full rollout.
#[derive(Clone, Debug)]
pub struct A2cAgent {
    config: A2cConfig,
    core: ActorCritic,
}

impl A2cAgent {
    pub fn new(config: A2cConfig, ctx: AgentContext) -> Result<Self> {
        let core = ActorCritic::new(
            &config.hidden,
            Self::rates(&config),
            config.max_grad_norm,
            config.rollout_length,
            ctx,
        )?;
        Ok(Self { config, core })
    }

    fn rates(c: &A2cConfig) -> Rates {
        Rates {
            actor: c.actor_learning_rate,
            critic: c.critic_learning_rate,
            decay_number: c.decay_number,
        }
    }

    pub fn config(&self) -> &A2cConfig {
        &self.config
    }

    pub fn actor(&self) -> &MlpNetwork {
        &self.core.actor
    }

    pub fn critic(&self) -> &MlpNetwork {
        &self.core.critic
    }

    pub fn actor_mut(&mut self) -> &mut MlpNetwork {
        &mut self.core.actor
    }

    pub fn rollout_len(&self) -> usize {
        self.core.rollout.len()
    }

    /// One actor and one critic step on the whole rollout.
    pub fn update_on(&mut self, rollout: &Rollout, last_next_state: &[f64], frame: u64) -> Result<(f64, f64, f64)> {
        let gamma = self.config.gamma;
        let states = rollout.states()?;
        let n = rollout.len();
        let w = self.core.ctx.observation_width;
        let mut next = Vec::with_capacity(n * w);
        for t in 1..n {
            next.extend_from_slice(&rollout.steps[t].state);
        }
        next.extend_from_slice(last_next_state);
        let next_values = self.core.critic.predict(&Matrix::from_vec(n, w, next)?)?;

        let (values, critic_cache) = self.core.critic.forward_batch(&states)?;
        let targets: Vec<f64> = rollout
            .steps
            .iter()
            .enumerate()
            .map(|(t, s)| {
                let live = if s.done { 0.0 } else { 1.0 };
                s.reward + live * gamma * next_values.get(t, 0)
            })
            .collect();
        let advantages: Vec<f64> = (0..n).map(|t| targets[t] - values.get(t, 0)).collect();
        let actions: Vec<usize> = rollout.steps.iter().map(|s| s.action).collect();

        self.core.set_rates(frame);
        let (critic_loss, critic_grad) = critic_mse(&values, &targets)?;
        let (logits, actor_cache) = self.core.actor.forward_batch(&states)?;
        let actor = a2c_actor_loss(&logits, &actions, &advantages, self.config.entropy_coef)?;
        if !(actor.loss.is_finite() && critic_loss.is_finite()) {
            return Err(Error::Numeric(format!(
                "non-finite A2C losses (actor {}, critic {critic_loss})",
                actor.loss
            )));
        }
        self.core.step_critic(&critic_cache, &critic_grad)?;
        self.core.step_actor(&actor_cache, &actor.grad)?;
        self.core.updates += 1;
        Ok((actor.loss, critic_loss, actor.entropy))
    }

    pub(crate) fn read_body(r: &mut Reader<'_>, config: A2cConfig, ctx: AgentContext) -> Result<Self> {
        let core = ActorCritic::read(
            r,
            Self::rates(&config),
            config.max_grad_norm,
            config.rollout_length,
            ctx,
        )?;
        Ok(Self { config, core })
    }
}

/// Proximal policy optimisation with GAE, advantage normalisation per
/// minibatch and an unclipped value loss.
#[derive(Clone, Debug)]
pub struct PpoAgent {
    config: PpoConfig,
    core: ActorCritic,
    last_ratio_deviation: Option<f64>,
}

impl PpoAgent {
    pub fn new(config: PpoConfig, ctx: AgentContext) -> Result<Self> {
        let core = ActorCritic::new(
            &config.hidden,
            Self::rates(&config),
            config.max_grad_norm,
            config.rollout_length,
            ctx,
        )?;
        Ok(Self {
            config,
            core,
            last_ratio_deviation: None,
        })
    }

    fn rates(c: &PpoConfig) -> Rates {
        Rates {
            actor: c.actor_learning_rate,
            critic: c.critic_learning_rate,
            decay_number: c.decay_number,
        }
    }

    pub fn config(&self) -> &PpoConfig {
        &self.config
    }

    pub fn actor(&self) -> &MlpNetwork {
        &self.core.actor
    }

    pub fn critic(&self) -> &MlpNetwork {
        &self.core.critic
    }

    pub fn actor_mut(&mut self) -> &mut MlpNetwork {
        &mut self.core.actor
    }

    pub fn rollout_len(&self) -> usize {
        self.core.rollout.len()
    }

    /// `max |ρ_t − 1|` over the last rollout, measured before its first step.
    pub fn last_ratio_deviation(&self) -> Option<f64> {
        self.last_ratio_deviation
    }

    pub fn update_on(&mut self, rollout: &Rollout, last_next_state: &[f64], frame: u64) -> Result<(f64, f64, f64)> {
        let c = &self.config;
        let n = rollout.len();
        let last_done = rollout.steps.last().is_some_and(|s| s.done);
        let bootstrap = if last_done {
            0.0
        } else {
            self.core.critic.predict_one(last_next_state)?[0]
        };
        let (advantages, returns) = gae(
            &rollout.rewards(),
            &rollout.values(),
            &rollout.dones(),
            bootstrap,
            c.gamma,
            c.gae_lambda,
        )?;
        let states = rollout.states()?;
        let actions: Vec<usize> = rollout.steps.iter().map(|s| s.action).collect();
        let old_log_probs: Vec<f64> = rollout.steps.iter().map(|s| s.log_prob).collect();

        let logits = self.core.actor.predict(&states)?;
        self.last_ratio_deviation = Some(
            (0..n)
                .map(|i| {
                    let lp = log_prob(&softmax(logits.row(i)), actions[i]);
                    ((lp - old_log_probs[i]).exp() - 1.0).abs()
                })
                .fold(0.0, f64::max),
        );

        self.core.set_rates(frame);
        let w = states.cols();
        let mut order: Vec<usize> = (0..n).collect();
        let (mut actor_sum, mut critic_sum, mut entropy_sum, mut batches) = (0.0, 0.0, 0.0, 0usize);
        for _ in 0..c.epochs {
            order.shuffle(&mut self.core.rng);
            for chunk in order.chunks(c.batch_size) {
                let mut rows = Vec::with_capacity(chunk.len() * w);
                for &i in chunk {
                    rows.extend_from_slice(states.row(i));
                }
                let batch_states = Matrix::from_vec(chunk.len(), w, rows)?;
                let batch_actions: Vec<usize> = chunk.iter().map(|&i| actions[i]).collect();
                let batch_old: Vec<f64> = chunk.iter().map(|&i| old_log_probs[i]).collect();
                let mut batch_adv: Vec<f64> = chunk.iter().map(|&i| advantages[i]).collect();
                let batch_ret: Vec<f64> = chunk.iter().map(|&i| returns[i]).collect();
                normalize_advantages(&mut batch_adv);

                let (logits, actor_cache) = self.core.actor.forward_batch(&batch_states)?;
                let actor = ppo_actor_loss(
                    &logits,
                    &batch_actions,
                    &batch_old,
                    &batch_adv,
                    c.clip,
                    c.entropy_coef,
                )?;
                let (values, critic_cache) = self.core.critic.forward_batch(&batch_states)?;
                let (critic_loss, critic_grad) = critic_mse(&values, &batch_ret)?;
                if !(actor.loss.is_finite() && critic_loss.is_finite()) {
                    return Err(Error::Numeric(format!(
                        "non-finite PPO losses (actor {}, critic {critic_loss})",
                        actor.loss
                    )));
                }
                self.core.step_actor(&actor_cache, &actor.grad)?;
                self.core.step_critic(&critic_cache, &critic_grad)?;
                actor_sum += actor.loss;
                critic_sum += critic_loss;
                entropy_sum += actor.entropy;
                batches += 1;
            }
        }
        self.core.updates += 1;
        let b = batches.max(1) as f64;
        Ok((actor_sum / b, critic_sum / b, entropy_sum / b))
    }

    pub(crate) fn read_body(r: &mut Reader<'_>, config: PpoConfig, ctx: AgentContext) -> Result<Self> {
        let core = ActorCritic::read(
            r,
            Self::rates(&config),
            config.max_grad_norm,
            config.rollout_length,
            ctx,
        )?;
        Ok(Self {
            config,
            core,
            last_ratio_deviation: None,
        })
    }
}

macro_rules! impl_actor_critic_agent {
    ($ty:ident, $variant:ident) => {
        impl Agent for $ty {
            fn spec(&self) -> AgentSpec {
                AgentSpec::$variant(self.config.clone())
            }

            fn context(&self) -> AgentContext {
                self.core.ctx
            }

            fn act(&mut self, observation: &[f64]) -> Result<usize> {
                self.core.act(observation)
            }

            fn act_eval(&mut self, observation: &[f64], greedy: bool) -> Result<usize> {
                self.core.act_eval(observation, greedy)
            }

            fn observe(&mut self, transition: &Transition) -> Result<()> {
                self.core.observe(transition)
            }

            fn maybe_update(&mut self, frame: u64) -> Result<Option<UpdateStats>> {
                let Some((rollout, next)) = self.core.take_rollout()? else {
                    return Ok(None);
                };
                let (actor_loss, critic_loss, entropy) = self.update_on(&rollout, &next, frame)?;
                Ok(Some(UpdateStats::ActorCritic {
                    actor_loss,
                    critic_loss,
                    entropy,
                }))
            }

            fn state_value(&self, observation: &[f64]) -> Result<f64> {
                self.core.value(observation)
            }

            fn diagnostics(&self) -> AgentDiagnostics {
                self.core.diagnostics()
            }

            fn is_finite(&self) -> bool {
                self.core.actor.is_finite() && self.core.critic.is_finite()
            }

            fn save(&self) -> Vec<u8> {
                let mut w = Writer::new();
                write_header(&mut w, &self.spec(), &self.core.ctx);
                self.core.write(&mut w);
                w.into_inner()
            }
        }
    };
}

impl_actor_critic_agent!(A2cAgent, A2c);
impl_actor_critic_agent!(PpoAgent, Ppo);
