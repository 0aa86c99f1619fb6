//! Five states in a row; 0 and 4 are terminal. Moving left into 0 pays
//! 0.5, moving right into 4 pays 1.

use ays_rl::agents::{Agent, AgentContext, DqnAgent, DqnConfig, TargetRule};
use ays_rl::harness::env_rng;
use ays_rl::replay::Transition;
use rand::Rng;

pub const N: usize = 5;
pub const GAMMA: f64 = 0.5;

pub fn step(s: usize, a: usize) -> (usize, f64, bool) {
    let next = if a == 0 { s - 1 } else { s + 1 };
    let reward = match next {
        0 => 0.5,
        4 => 1.0,
        _ => 0.0,
    };
    (next, reward, next == 0 || next == N - 1)
}

pub fn one_hot(s: usize) -> Vec<f64> {
    let mut v = vec![0.0; N];
    v[s] = 1.0;
    v
}

/// Greedy policy of the value-iteration fixed point on states 1..=3.
pub fn optimal_policy() -> Vec<usize> {
    let mut v = [0.0; N];
    for _ in 0..200 {
        let mut next = v;
        for s in 1..N - 1 {
            next[s] = (0..2)
                .map(|a| {
                    let (s2, r, done) = step(s, a);
                    r + if done { 0.0 } else { GAMMA * v[s2] }
                })
                .fold(f64::NEG_INFINITY, f64::max);
        }
        v = next;
    }
    (1..N - 1)
        .map(|s| {
            let q = |a| {
                let (s2, r, done) = step(s, a);
                r + if done { 0.0 } else { GAMMA * v[s2] }
            };
            usize::from(q(1) > q(0))
        })
        .collect()
}

/// Greedy actions on states 1..=3 after training a small DQN.
pub fn chain_dqn_policy(seed: u64, steps: u64) -> Vec<usize> {
    let config = DqnConfig {
        learning_rate: 1e-3,
        epsilon_decay: 0.3,
        batch_size: 32,
        buffer_size: 5_000,
        target_update: 50,
        decay_number: 0,
        hidden: vec![16],
        gamma: GAMMA,
        dueling: false,
        per: None,
        target_rule: TargetRule::Max,
    };
    let ctx = AgentContext {
        observation_width: N,
        num_actions: 2,
        total_frames: steps,
        seed,
    };
    let mut agent = DqnAgent::new(config, false, ctx).unwrap();
    let mut r = env_rng(seed);
    let mut s = r.random_range(1..N - 1);
    for f in 1..=steps {
        let obs = one_hot(s);
        let a = agent.act(&obs).unwrap();
        let (s2, reward, done) = step(s, a);
        agent
            .observe(&Transition {
                state: obs,
                action: a,
                reward,
                next_state: one_hot(s2),
                done,
            })
            .unwrap();
        agent.maybe_update(f).unwrap();
        s = if done { r.random_range(1..N - 1) } else { s2 };
    }
    (1..N - 1)
        .map(|s| agent.act_eval(&one_hot(s), true).unwrap())
        .collect()
}
