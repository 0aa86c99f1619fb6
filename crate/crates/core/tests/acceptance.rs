//! Acceptance criteria, one test per criterion. Each prints a single
//! `PASS`/`FAIL criterion N` line with the measured value and the bound.
//!
//! Criteria 2-4 train agents for 100k-150k frames and take roughly an hour
//! together on one core. Set `AYS_SKIP_TRAINING=1` to report them as
//! skipped. The extended 500k-frame criteria are `#[ignore]`d; run them with
//! `cargo test --release --test acceptance -- --ignored`.

mod common;

use std::io::Write;

use ays_rl::agents::losses::{a2c_actor_loss, critic_mse, ppo_actor_loss, weighted_td_loss};
use ays_rl::agents::AgentKind;
use ays_rl::env::{
    black_fixed_point, derivatives, integrate, integrate_step_with, normalize, Action, AysEnv,
    AysParams, Boundaries, EnvConfig, Lorenz, NormState, DEFAULT_SUBSTEPS, DEFAULT_TOLERANCE,
};
use ays_rl::harness::{
    evaluate_checkpoint, train, EvalOptions, Preset, RunConfig, TrainOutput, METRICS_FILE,
};
use ays_rl::nn::{log_prob, softmax, HeadKind, Matrix, MlpNetwork};
use ays_rl::replay::{gae, MinTree, PrioritizedBuffer, SumTree, Transition};
use common::chain::{self, chain_dqn_policy};
use common::{chi_square, chi_square_3sigma, max_rel_err, numeric_grad, random_matrix, rng};
use rand::Rng;

/// Writes past the test harness's output capture so the line always shows.
fn report(criterion: u32, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    writeln!(out, "{verdict} criterion {criterion}: {detail}").unwrap();
    out.flush().unwrap();
    assert!(pass, "criterion {criterion}: {detail}");
}

fn skip_training(criterion: u32) -> bool {
    let skip = std::env::var_os("AYS_SKIP_TRAINING").is_some_and(|v| v != "0");
    if skip {
        let mut out = std::io::stdout().lock();
        writeln!(out, "SKIP criterion {criterion}: AYS_SKIP_TRAINING is set").unwrap();
    }
    skip
}

fn run(preset: Preset, agent: AgentKind, frames: u64, seed: u64) -> TrainOutput {
    let mut config = RunConfig::new(preset, agent);
    config.frame_limit = frames;
    train(&config, seed, None).unwrap()
}

fn random_baseline(seed: u64, dir: Option<&std::path::Path>) -> TrainOutput {
    let mut config = RunConfig::new(Preset::Pb, AgentKind::Random);
    config.frame_limit = u64::MAX;
    config.episode_limit = Some(1_000);
    train(&config, seed, dir).unwrap()
}

#[test]
fn criterion_01_random_baseline() {
    let means: Vec<f64> = (0..3).map(|s| random_baseline(s, None).summary.mean_return.unwrap()).collect();
    let mean = means.iter().sum::<f64>() / 3.0;
    let pass = (12.0..=25.0).contains(&mean) && means.iter().all(|m| (12.0..=25.0).contains(m));
    report(
        1,
        pass,
        &format!("random policy mean return {mean:.2} (per seed {means:.2?}), need [12, 25]"),
    );
}

#[test]
fn criterion_02_dqn_reduced_scale() {
    if skip_training(2) {
        return;
    }
    let out = run(Preset::Pb, AgentKind::Dqn, 100_000, 0);
    let mean = out.summary.mean_return.unwrap();
    report(
        2,
        mean >= 200.0,
        &format!("DQN 100k frames seed 0 mean return {mean:.1}, need >= 200"),
    );
}

#[test]
fn criterion_03_success_rate_proxy() {
    if skip_training(3) {
        return;
    }
    let mut rates = Vec::new();
    for kind in [AgentKind::Dqn, AgentKind::DuelDdqn] {
        let out = run(Preset::Pb, kind, 150_000, 0);
        rates.push((kind, out.summary.success_rate.unwrap_or(0.0)));
    }
    let pass = rates.iter().all(|(_, r)| *r >= 0.25);
    report(
        3,
        pass,
        &format!("success rate at 150k frames {rates:.3?}, need >= 0.25 each"),
    );
}

#[test]
fn criterion_04_policy_cost_prefers_default() {
    if skip_training(4) {
        return;
    }
    let out = run(Preset::PolicyCost, AgentKind::DuelDdqn, 150_000, 0);
    let eval = evaluate_checkpoint(
        &out.checkpoint,
        &out.checkpoint.config,
        &EvalOptions {
            episodes: 1,
            greedy: Some(true),
            start: Some(NormState::START),
            ..Default::default()
        },
    )
    .unwrap();
    let share = eval.default_share_on_success;
    let outcome = eval.details[0].outcome.name();
    report(
        4,
        share.is_some_and(|s| s >= 0.4),
        &format!("greedy episode from s0 ends {outcome}, default share {share:?}, need >= 0.4 on success"),
    );
}

#[test]
fn criterion_05_fixed_points() {
    let params = AysParams::default();
    let black = black_fixed_point(&params);
    let d = derivatives(black, &params);
    let residual = d
        .iter()
        .zip([black.a, black.y, 1.0])
        .map(|(di, scale)| di.abs() / scale)
        .fold(0.0, f64::max);
    let b = Boundaries::new(&params, DEFAULT_TOLERANCE);
    let gap = b
        .green
        .to_array()
        .iter()
        .zip(b.black.to_array())
        .map(|(g, k)| (g - k).abs())
        .fold(0.0, f64::max);
    let n = normalize(black);
    report(
        5,
        residual < 1e-9 && gap > 2.0 * b.tolerance,
        &format!(
            "black fixed point ({:.4}, {:.4}, {}) relative residual {residual:.1e} (< 1e-9), \
             region gap {gap:.3} (> {})",
            n.a,
            n.y,
            n.s,
            2.0 * b.tolerance
        ),
    );
}

#[test]
fn criterion_06_integrator_accuracy() {
    let params = AysParams::default();
    let mut env = AysEnv::new(EnvConfig::default()).unwrap();
    let mut r = rng(61);
    let mut ays: f64 = 0.0;
    for episode in 0..100 {
        env.reset(&mut r);
        loop {
            let action = if episode % 2 == 0 {
                Action::from_index(r.random_range(0..4)).unwrap()
            } else if env.steps() < 35 {
                Action::DgEt
            } else {
                Action::Et
            };
            let start = env.state();
            let coarse = integrate_step_with(start, action, &params, DEFAULT_SUBSTEPS).unwrap();
            let fine = integrate_step_with(start, action, &params, DEFAULT_SUBSTEPS * 100).unwrap();
            for (c, f) in coarse.to_array().iter().zip(fine.to_array()) {
                ays = ays.max((c - f).abs());
            }
            if env.step(action).unwrap().done {
                break;
            }
        }
    }
    let lorenz = Lorenz::default();
    let coarse = integrate([1.0, 1.0, 1.0], 1.0, 1_000, |v| lorenz.rhs(v));
    let fine = integrate([1.0, 1.0, 1.0], 1.0, 100_000, |v| lorenz.rhs(v));
    let lz = coarse.iter().zip(fine).map(|(c, f)| (c - f).abs()).fold(0.0, f64::max);
    report(
        6,
        ays < 1e-8 && lz < 1e-6,
        &format!("one-year AYS step error {ays:.1e} (< 1e-8), Lorenz error {lz:.1e} (< 1e-6)"),
    );
}

#[test]
fn criterion_07_gradients() {
    const H: f64 = 1e-6;
    let mut r = rng(71);
    let n = 8;
    let actions: Vec<usize> = (0..n).map(|_| r.random_range(0..4)).collect();
    let targets: Vec<f64> = (0..n).map(|_| r.random_range(-2.0..2.0)).collect();
    let weights: Vec<f64> = (0..n).map(|_| r.random_range(0.1..1.0)).collect();
    let adv: Vec<f64> = (0..n).map(|i| if i % 3 == 1 { 0.8 } else { r.random_range(-1.5..1.5) }).collect();
    let q = random_matrix(n, 4, 2.0, &mut r);
    let v = random_matrix(n, 1, 2.0, &mut r);
    let logits = random_matrix(n, 4, 1.5, &mut r);
    let clip = 0.2;
    let old: Vec<f64> = actions
        .iter()
        .enumerate()
        .map(|(i, &a)| {
            let ratio = [1.05, 1.0 + 2.0 * clip, 1.0 - 2.0 * clip][i % 3];
            log_prob(&softmax(logits.row(i)), a) - f64::ln(ratio)
        })
        .collect();

    let mut errs = Vec::new();
    let td = weighted_td_loss(&q, &actions, &targets, &weights).unwrap().grad;
    let num = numeric_grad(&q, H, |m| weighted_td_loss(m, &actions, &targets, &weights).unwrap().loss);
    errs.push(("td", max_rel_err(&td, &num, 1e-8)));
    let (_, g) = critic_mse(&v, &targets).unwrap();
    let num = numeric_grad(&v, H, |m| critic_mse(m, &targets).unwrap().0);
    errs.push(("critic", max_rel_err(&g, &num, 1e-8)));
    let g = a2c_actor_loss(&logits, &actions, &adv, 0.01).unwrap().grad;
    let num = numeric_grad(&logits, H, |m| a2c_actor_loss(m, &actions, &adv, 0.01).unwrap().loss);
    errs.push(("a2c", max_rel_err(&g, &num, 1e-8)));
    let g = ppo_actor_loss(&logits, &actions, &old, &adv, clip, 0.01).unwrap().grad;
    let num = numeric_grad(&logits, H, |m| ppo_actor_loss(m, &actions, &old, &adv, clip, 0.01).unwrap().loss);
    errs.push(("ppo", max_rel_err(&g, &num, 1e-8)));
    let worst = errs.iter().map(|e| e.1).fold(0.0, f64::max);
    let listed: Vec<String> = errs.iter().map(|(k, e)| format!("{k} {e:.1e}")).collect();

    let net = MlpNetwork::new(3, &[8, 8], HeadKind::Dueling, 4, &mut r).unwrap();
    let x = random_matrix(64, 3, 1.0, &mut r);
    let (q, cache) = net.forward_batch(&x).unwrap();
    let value: &Matrix = &cache.head_outputs()[0];
    let mean_adv = (0..q.rows())
        .map(|i| (q.row(i).iter().map(|qa| qa - value.get(i, 0)).sum::<f64>() / 4.0).abs())
        .fold(0.0, f64::max);
    report(
        7,
        worst < 1e-4 && mean_adv < 1e-12,
        &format!("loss gradient rel err [{}] (< 1e-4), dueling mean advantage {mean_adv:.1e} (< 1e-12)", listed.join(", ")),
    );
}

fn transition(i: usize) -> Transition {
    Transition {
        state: vec![i as f64, 0.0, 0.0],
        action: i % 4,
        reward: i as f64,
        next_state: vec![0.0; 3],
        done: false,
    }
}

#[test]
fn criterion_08_buffers() {
    let mut r = rng(81);
    let n = 37;
    let (mut sum, mut min) = (SumTree::new(n), MinTree::new(n));
    let mut values = vec![f64::INFINITY; n];
    let mut tree_ok = true;
    for _ in 0..10_000 {
        let leaf = r.random_range(0..n);
        let v = r.random_range(0.0..10.0);
        sum.update(leaf, v).unwrap();
        min.update(leaf, v).unwrap();
        values[leaf] = v;
        let total: f64 = values.iter().filter(|v| v.is_finite()).sum();
        let scan_min = values.iter().copied().fold(f64::INFINITY, f64::min);
        tree_ok &= (sum.root() - total).abs() <= 1e-9 * total.max(1.0) && min.root() == scan_min;
    }

    let alpha = 0.6;
    let mut b = PrioritizedBuffer::new(8, 3, alpha, 0.4).unwrap();
    for i in 0..8 {
        b.push(&transition(i)).unwrap();
    }
    let leaves: Vec<usize> = (0..8).collect();
    let tds = [0.1, 0.5, 1.0, 2.0, 0.05, 3.0, 0.7, 1.5];
    b.update_priorities(&leaves, &tds).unwrap();
    let p: Vec<f64> = tds.iter().map(|d| (d + 1e-6f64).powf(alpha)).collect();
    let total: f64 = p.iter().sum();
    let probs: Vec<f64> = p.iter().map(|x| x / total).collect();
    let mut counts = [0u64; 8];
    for _ in 0..2_000 {
        for l in b.sample_leaves(32, &mut r).unwrap() {
            counts[l] += 1;
        }
    }
    let chi = chi_square(&counts, &probs);
    let weights_ok = b.weights(&leaves).iter().all(|w| *w > 0.0 && *w <= 1.0);

    let mut flat = PrioritizedBuffer::new(8, 3, alpha, 0.0).unwrap();
    for i in 0..8 {
        flat.push(&transition(i)).unwrap();
    }
    flat.update_priorities(&leaves, &tds).unwrap();
    let beta_zero_ok = flat.weights(&leaves).iter().all(|w| *w == 1.0);
    flat.set_beta(0.9);
    flat.update_priorities(&leaves, &[1.3; 8]).unwrap();
    let uniform_ok = flat.weights(&leaves).iter().all(|w| *w == 1.0);

    let mut gae_err: f64 = 0.0;
    for _ in 0..200 {
        let len = r.random_range(1..50);
        let rewards: Vec<f64> = (0..len).map(|_| r.random_range(-5.0..5.0)).collect();
        let values: Vec<f64> = (0..len).map(|_| r.random_range(-5.0..5.0)).collect();
        let dones: Vec<bool> = (0..len).map(|_| r.random_bool(0.2)).collect();
        let (gamma, lambda, boot) = (r.random_range(0.0..1.0), r.random_range(0.0..1.0), r.random_range(-5.0..5.0));
        let (adv, _) = gae(&rewards, &values, &dones, boot, gamma, lambda).unwrap();
        let delta = |t: usize| {
            let next = if t + 1 < len { values[t + 1] } else { boot };
            rewards[t] + if dones[t] { 0.0 } else { gamma * next } - values[t]
        };
        for t in 0..len {
            let (mut direct, mut factor) = (0.0, 1.0);
            for k in t..len {
                direct += factor * delta(k);
                if dones[k] {
                    break;
                }
                factor *= gamma * lambda;
            }
            gae_err = gae_err.max((adv[t] - direct).abs());
        }
    }
    let pass = tree_ok && chi < chi_square_3sigma(7) && weights_ok && beta_zero_ok && uniform_ok && gae_err < 1e-10;
    report(
        8,
        pass,
        &format!(
            "trees match scan over 1e4 ops: {tree_ok}; PER chi2 {chi:.2} (< {}); weights in (0,1]: {weights_ok}; \
             beta=0 -> 1: {beta_zero_ok}; uniform -> 1: {uniform_ok}; GAE err {gae_err:.1e} (< 1e-10)",
            chi_square_3sigma(7)
        ),
    );
}

#[test]
fn criterion_09_chain_mdp() {
    let optimal = chain::optimal_policy();
    let policies: Vec<Vec<usize>> = (0..3).map(|s| chain_dqn_policy(s, 20_000)).collect();
    let matched = policies.iter().filter(|p| **p == optimal).count();
    report(
        9,
        matched == 3,
        &format!("greedy policies {policies:?} vs optimal {optimal:?}: {matched}/3 seeds match"),
    );
}

#[test]
fn criterion_10_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    random_baseline(0, Some(&a));
    random_baseline(0, Some(&b));
    let random_same = std::fs::read(a.join(METRICS_FILE)).unwrap() == std::fs::read(b.join(METRICS_FILE)).unwrap();

    let mut config = RunConfig::new(Preset::Pb, AgentKind::DuelDdqn);
    config.frame_limit = 5_000;
    for d in ["c", "d"] {
        train(&config, 0, Some(&dir.path().join(d))).unwrap();
    }
    let read = |d: &str| std::fs::read(dir.path().join(d).join(METRICS_FILE)).unwrap();
    let learner_same = read("c") == read("d");
    report(
        10,
        random_same && learner_same,
        &format!("repeated runs byte-identical metrics.jsonl: random {random_same}, duelddqn {learner_same}"),
    );
}

#[test]
#[ignore]
fn extended_success_rate_500k() {
    let mut rates = Vec::new();
    for kind in [AgentKind::Dqn, AgentKind::DuelDdqn] {
        let per_seed: Vec<f64> = (0..3)
            .map(|s| run(Preset::Pb, kind, 500_000, s).summary.success_rate.unwrap_or(0.0))
            .collect();
        rates.push((kind, per_seed.iter().sum::<f64>() / 3.0, per_seed));
    }
    report(
        3,
        rates.iter().all(|(_, m, _)| *m >= 0.45),
        &format!("extended: mean success rate over 3 seeds at 500k {rates:.3?}, need >= 0.45"),
    );
}

#[test]
#[ignore]
fn extended_ppo_beats_random() {
    let random = (0..3).map(|s| random_baseline(s, None).summary.mean_return.unwrap()).sum::<f64>() / 3.0;
    let ppo = run(Preset::Pb, AgentKind::Ppo, 500_000, 0).summary.mean_return.unwrap();
    report(
        3,
        ppo > 5.0 * random,
        &format!("extended: PPO 500k mean return {ppo:.1}, need > 5 x random {random:.1}"),
    );
}
