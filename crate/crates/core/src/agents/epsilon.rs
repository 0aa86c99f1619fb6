use serde::{Deserialize, Serialize};

pub const EPSILON_FLOOR: f64 = 0.01;

/// `ε(t) = min(1, t^-ρ + 0.01)`, with `t` counting actions from 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsilonSchedule {
    pub rho: f64,
    /// Actions taken so far.
    pub t: u64,
}

impl EpsilonSchedule {
    pub fn new(rho: f64) -> Self {
        Self { rho, t: 0 }
    }

    /// `t = 0` is treated as `t = 1`.
    pub fn value(&self, t: u64) -> f64 {
        let t = t.max(1) as f64;
        (t.powf(-self.rho) + EPSILON_FLOOR).min(1.0)
    }

    pub fn current(&self) -> f64 {
        self.value(self.t)
    }

    /// Advances the counter and returns ε for the new action.
    pub fn advance(&mut self) -> f64 {
        self.t += 1;
        self.current()
    }
}
