use rand::Rng;

use crate::codec::{Reader, Writer};
use crate::error::{Error, Result};
use crate::nn::Matrix;

/// One agent-environment interaction.
#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub state: Vec<f64>,
    pub action: usize,
    pub reward: f64,
    pub next_state: Vec<f64>,
    pub done: bool,
}

/// A minibatch laid out for batched forward passes.
#[derive(Clone, Debug, PartialEq)]
pub struct Batch {
    pub states: Matrix,
    pub actions: Vec<usize>,
    pub rewards: Vec<f64>,
    pub next_states: Matrix,
    pub dones: Vec<bool>,
}

impl Batch {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn from_transitions(items: &[Transition]) -> Result<Self> {
        let width = items.first().map_or(0, |t| t.state.len());
        Ok(Self {
            states: Matrix::from_rows(width, items.iter().map(|t| t.state.as_slice()))?,
            actions: items.iter().map(|t| t.action).collect(),
            rewards: items.iter().map(|t| t.reward).collect(),
            next_states: Matrix::from_rows(width, items.iter().map(|t| t.next_state.as_slice()))?,
            dones: items.iter().map(|t| t.done).collect(),
        })
    }
}

/// Fixed-capacity ring of transitions stored column-wise.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Storage {
    width: usize,
    capacity: usize,
    len: usize,
    cursor: usize,
    states: Vec<f64>,
    next_states: Vec<f64>,
    actions: Vec<usize>,
    rewards: Vec<f64>,
    dones: Vec<bool>,
}

impl Storage {
    pub(crate) fn new(capacity: usize, width: usize) -> Result<Self> {
        if capacity == 0 || width == 0 {
            return Err(Error::Config(format!(
                "replay capacity and state width must be positive (got {capacity}, {width})"
            )));
        }
        Ok(Self {
            width,
            capacity,
            len: 0,
            cursor: 0,
            states: vec![0.0; capacity * width],
            next_states: vec![0.0; capacity * width],
            actions: vec![0; capacity],
            rewards: vec![0.0; capacity],
            dones: vec![false; capacity],
        })
    }

    pub(crate) fn len(&self) -> usize {
        self.len
    }

    pub(crate) fn capacity(&self) -> usize {
        self.capacity
    }

    pub(crate) fn width(&self) -> usize {
        self.width
    }

    /// Writes `t` over the oldest slot once full; returns the slot used.
    pub(crate) fn push(&mut self, t: &Transition) -> Result<usize> {
        if t.state.len() != self.width || t.next_state.len() != self.width {
            return Err(Error::Shape(format!(
                "transition widths {}/{} do not match buffer width {}",
                t.state.len(),
                t.next_state.len(),
                self.width
            )));
        }
        let slot = self.cursor;
        let w = self.width;
        self.states[slot * w..(slot + 1) * w].copy_from_slice(&t.state);
        self.next_states[slot * w..(slot + 1) * w].copy_from_slice(&t.next_state);
        self.actions[slot] = t.action;
        self.rewards[slot] = t.reward;
        self.dones[slot] = t.done;
        self.cursor = (self.cursor + 1) % self.capacity;
        self.len = (self.len + 1).min(self.capacity);
        Ok(slot)
    }

    pub(crate) fn get(&self, slot: usize) -> Option<Transition> {
        (slot < self.len).then(|| {
            let w = self.width;
            Transition {
                state: self.states[slot * w..(slot + 1) * w].to_vec(),
                action: self.actions[slot],
                reward: self.rewards[slot],
                next_state: self.next_states[slot * w..(slot + 1) * w].to_vec(),
                done: self.dones[slot],
            }
        })
    }

    pub(crate) fn gather(&self, slots: &[usize]) -> Batch {
        let w = self.width;
        let mut states = Vec::with_capacity(slots.len() * w);
        let mut next_states = Vec::with_capacity(slots.len() * w);
        for &i in slots {
            states.extend_from_slice(&self.states[i * w..(i + 1) * w]);
            next_states.extend_from_slice(&self.next_states[i * w..(i + 1) * w]);
        }
        Batch {
            states: Matrix::from_vec(slots.len(), w, states).expect("gathered rows"),
            actions: slots.iter().map(|&i| self.actions[i]).collect(),
            rewards: slots.iter().map(|&i| self.rewards[i]).collect(),
            next_states: Matrix::from_vec(slots.len(), w, next_states).expect("gathered rows"),
            dones: slots.iter().map(|&i| self.dones[i]).collect(),
        }
    }

    pub(crate) fn write(&self, w: &mut Writer) {
        for v in [self.width, self.capacity, self.len, self.cursor] {
            w.u64(v as u64);
        }
        let n = self.len;
        w.f64s(&self.states[..n * self.width]);
        w.f64s(&self.next_states[..n * self.width]);
        w.f64s(&self.rewards[..n]);
        for i in 0..n {
            w.u8(self.actions[i] as u8);
            w.u8(self.dones[i] as u8);
        }
    }

    pub(crate) fn read(r: &mut Reader<'_>) -> Result<Self> {
        let width = r.u64()? as usize;
        let capacity = r.u64()? as usize;
        let len = r.u64()? as usize;
        let cursor = r.u64()? as usize;
        if len > capacity || cursor >= capacity.max(1) || capacity > (1 << 32) {
            return Err(Error::Format(format!(
                "inconsistent replay header: len {len}, cursor {cursor}, capacity {capacity}"
            )));
        }
        let mut s = Self::new(capacity, width).map_err(|e| Error::Format(e.to_string()))?;
        s.len = len;
        s.cursor = cursor;
        let states = r.f64s()?;
        let next_states = r.f64s()?;
        let rewards = r.f64s()?;
        if states.len() != len * width || next_states.len() != len * width || rewards.len() != len
        {
            return Err(Error::Format("replay payload length mismatch".into()));
        }
        s.states[..len * width].copy_from_slice(&states);
        s.next_states[..len * width].copy_from_slice(&next_states);
        s.rewards[..len].copy_from_slice(&rewards);
        for i in 0..len {
            s.actions[i] = r.u8()? as usize;
            s.dones[i] = r.u8()? != 0;
        }
        Ok(s)
    }
}

/// Uniform experience replay.
#[derive(Clone, Debug, PartialEq)]
pub struct ReplayBuffer {
    storage: Storage,
}

impl ReplayBuffer {
    pub fn new(capacity: usize, width: usize) -> Result<Self> {
        Ok(Self {
            storage: Storage::new(capacity, width)?,
        })
    }

    pub fn len(&self) -> usize {
        self.storage.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn capacity(&self) -> usize {
        self.storage.capacity()
    }

    pub fn width(&self) -> usize {
        self.storage.width()
    }

    pub fn push(&mut self, t: &Transition) -> Result<()> {
        self.storage.push(t).map(|_| ())
    }

    /// Transition at ring slot `slot` (not insertion order once wrapped).
    pub fn get(&self, slot: usize) -> Option<Transition> {
        self.storage.get(slot)
    }

    /// Uniform draws with replacement over occupied slots.
    pub fn sample_slots<R: Rng + ?Sized>(&self, batch: usize, rng: &mut R) -> Result<Vec<usize>> {
        if self.is_empty() {
            return Err(Error::Usage("cannot sample from an empty replay buffer".into()));
        }
        Ok((0..batch).map(|_| rng.random_range(0..self.len())).collect())
    }

    pub fn sample<R: Rng + ?Sized>(&self, batch: usize, rng: &mut R) -> Result<Batch> {
        Ok(self.storage.gather(&self.sample_slots(batch, rng)?))
    }

    pub(crate) fn write(&self, w: &mut Writer) {
        self.storage.write(w);
    }

    pub(crate) fn read(r: &mut Reader<'_>) -> Result<Self> {
        Ok(Self {
            storage: Storage::read(r)?,
        })
    }
}
