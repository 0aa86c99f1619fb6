//! Deep reinforcement-learning agents for the AYS World-Earth model.
//!
//! The crate bundles four pieces that are usually spread across several
//! frameworks:
//!
//! - [`nn`]: a small dense-network engine in `f64` with exact reverse-mode
//!   gradients, Adam, step-decay learning rates and the dueling head.
//! - [`env`]: the AYS dynamical system (carbon, economic output, renewable
//!   knowledge) wrapped as an episodic environment with planetary-boundary
//!   termination, three reward schemes, parameter noise and a 6-wide
//!   velocity-augmented observation.
//! - [`replay`]: uniform and prioritized replay (sum/min trees) plus an
//!   on-policy rollout buffer with GAE.
//! - [`agents`]: DQN, dueling double DQN with prioritized replay, A2C and PPO
//!   behind the [`agents::Agent`] trait.
//! - [`harness`]: run configuration, seeded training and evaluation loops,
//!   metrics, experiment presets and initial-state grid sweeps.
//!
//! Runnable walkthroughs live in `examples/`; the `ays-rl` binary exposes the
//! `train`, `evaluate` and `grid` commands.

pub mod agents;
pub mod codec;
pub mod env;
pub mod error;
pub mod harness;
pub mod nn;
pub mod replay;

pub use error::{Error, Result};
