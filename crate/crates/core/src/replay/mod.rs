//! Experience storage: uniform and prioritized replay for the value-based
//! agents and an on-policy rollout buffer for the actor-critics.

mod prioritized;
mod ring;
mod rollout;
mod tree;

pub use prioritized::{
    annealed_beta, PrioritizedBatch, PrioritizedBuffer, INITIAL_MAX_PRIORITY, PRIORITY_FLOOR,
};
pub use ring::{Batch, ReplayBuffer, Transition};
pub use rollout::{gae, Rollout, RolloutBuffer, RolloutStep};
pub use tree::{MinTree, SumTree};
