use crate::error::{Error, Result};
use crate::nn::Matrix;

/// One on-policy step with the acting policy's log-probability and the
/// critic's estimate at collection time.
#[derive(Clone, Debug, PartialEq)]
pub struct RolloutStep {
    pub state: Vec<f64>,
    pub action: usize,
    pub log_prob: f64,
    pub value: f64,
    pub reward: f64,
    pub done: bool,
}

/// A full rollout handed to an update, tagged with the policy generation
/// that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct Rollout {
    pub steps: Vec<RolloutStep>,
    pub generation: u64,
}

impl Rollout {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn states(&self) -> Result<Matrix> {
        let width = self.steps.first().map_or(0, |s| s.state.len());
        Matrix::from_rows(width, self.steps.iter().map(|s| s.state.as_slice()))
    }

    pub fn rewards(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.reward).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.value).collect()
    }

    pub fn dones(&self) -> Vec<bool> {
        self.steps.iter().map(|s| s.done).collect()
    }
}

/// Ordered on-policy buffer, consumed whole and then cleared.
#[derive(Clone, Debug, PartialEq)]
pub struct RolloutBuffer {
    capacity: usize,
    steps: Vec<RolloutStep>,
    generation: Option<u64>,
}

impl RolloutBuffer {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::Config("rollout length must be positive".into()));
        }
        Ok(Self {
            capacity,
            steps: Vec::with_capacity(capacity),
            generation: None,
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.steps.len() == self.capacity
    }

    pub fn steps(&self) -> &[RolloutStep] {
        &self.steps
    }

    /// Generation of the policy that collected the current contents.
    pub fn generation(&self) -> Option<u64> {
        self.generation
    }

    /// Appends a step; every step in one rollout must come from the same
    /// policy generation.
    pub fn push(&mut self, step: RolloutStep, generation: u64) -> Result<()> {
        if self.is_full() {
            return Err(Error::Usage("rollout buffer is full; take it first".into()));
        }
        match self.generation {
            Some(g) if g != generation => {
                return Err(Error::Usage(format!(
                    "rollout collected by generation {g} cannot accept a step from generation {generation}"
                )))
            }
            _ => self.generation = Some(generation),
        }
        self.steps.push(step);
        Ok(())
    }

    /// Hands out the full rollout and leaves the buffer empty.
    pub fn take(&mut self) -> Result<Rollout> {
        if !self.is_full() {
            return Err(Error::Usage(format!(
                "rollout holds {} of {} steps",
                self.steps.len(),
                self.capacity
            )));
        }
        let generation = self.generation.take().expect("non-empty rollout has a generation");
        let steps = std::mem::replace(&mut self.steps, Vec::with_capacity(self.capacity));
        Ok(Rollout { steps, generation })
    }

    pub fn clear(&mut self) {
        self.steps.clear();
        self.generation = None;
    }
}

/// Generalized advantage estimation by backward recursion.
///
/// `bootstrap` is `v` of the state reached after the last step; it is masked
/// out when that step is terminal. Returns `(advantages, lambda_returns)`.
pub fn gae(
    rewards: &[f64],
    values: &[f64],
    dones: &[bool],
    bootstrap: f64,
    gamma: f64,
    lambda: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = rewards.len();
    if n == 0 {
        return Err(Error::Usage("GAE over an empty rollout".into()));
    }
    if values.len() != n || dones.len() != n {
        return Err(Error::Shape(format!(
            "GAE inputs differ in length: {n} rewards, {} values, {} dones",
            values.len(),
            dones.len()
        )));
    }
    let mut adv = vec![0.0; n];
    let mut next_adv = 0.0;
    let mut next_value = bootstrap;
    for t in (0..n).rev() {
        let live = if dones[t] { 0.0 } else { 1.0 };
        let delta = rewards[t] + live * gamma * next_value - values[t];
        next_adv = delta + live * gamma * lambda * next_adv;
        adv[t] = next_adv;
        next_value = values[t];
    }
    let returns = adv.iter().zip(values).map(|(a, v)| a + v).collect();
    Ok((adv, returns))
}
