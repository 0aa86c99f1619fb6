//! Loss values and their gradients with respect to network outputs.
//!
//! Each function returns the scalar loss and `∂loss/∂output` laid out like
//! the network output, ready for [`crate::nn::MlpNetwork::backward`].

use super::config::TargetRule;
use crate::error::{Error, Result};
use crate::nn::{argmax, categorical_entropy, softmax, Matrix, PROB_FLOOR};

/// `r + 1[not done]·γ·Q_θ(s', argmax_a Q_θ⁻(s', a))`: the action is chosen by
/// the target network and scored by the policy network.
pub fn double_q_target(
    q_policy_next: &[f64],
    q_target_next: &[f64],
    reward: f64,
    done: bool,
    gamma: f64,
) -> f64 {
    if done {
        return reward;
    }
    reward + gamma * q_policy_next[argmax(q_target_next)]
}

/// Bootstrapped targets for a batch under `rule`. `next_policy` is only read
/// by the double rules.
pub fn q_targets(
    rule: TargetRule,
    next_target: &Matrix,
    next_policy: Option<&Matrix>,
    rewards: &[f64],
    dones: &[bool],
    gamma: f64,
) -> Result<Vec<f64>> {
    let n = rewards.len();
    if next_target.rows() != n || dones.len() != n {
        return Err(Error::Shape(format!(
            "{} target rows, {n} rewards, {} dones",
            next_target.rows(),
            dones.len()
        )));
    }
    let policy = match rule {
        TargetRule::Max => None,
        _ => Some(next_policy.ok_or_else(|| {
            Error::Usage("double-Q targets need the policy network's next-state values".into())
        })?),
    };
    Ok((0..n)
        .map(|i| {
            let t = next_target.row(i);
            match (rule, policy) {
                (TargetRule::DoubleSelectTarget, Some(p)) => {
                    double_q_target(p.row(i), t, rewards[i], dones[i], gamma)
                }
                (TargetRule::DoubleSelectPolicy, Some(p)) => {
                    double_q_target(t, p.row(i), rewards[i], dones[i], gamma)
                }
                _ => {
                    let best = t.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    if dones[i] {
                        rewards[i]
                    } else {
                        rewards[i] + gamma * best
                    }
                }
            }
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct TdLoss {
    pub loss: f64,
    /// `∂loss/∂Q`, nonzero only in the taken-action column.
    pub grad: Matrix,
    /// `y − Q(s, a)` per sample.
    pub td_errors: Vec<f64>,
}

/// `mean_i w_i·(Q(s_i, a_i) − y_i)²`.
pub fn weighted_td_loss(
    q: &Matrix,
    actions: &[usize],
    targets: &[f64],
    weights: &[f64],
) -> Result<TdLoss> {
    let n = q.rows();
    if actions.len() != n || targets.len() != n || weights.len() != n || n == 0 {
        return Err(Error::Shape(format!(
            "TD loss over {n} rows with {} actions, {} targets, {} weights",
            actions.len(),
            targets.len(),
            weights.len()
        )));
    }
    let mut grad = Matrix::zeros(n, q.cols());
    let mut td_errors = Vec::with_capacity(n);
    let mut loss = 0.0;
    for i in 0..n {
        let a = actions[i];
        if a >= q.cols() {
            return Err(Error::Shape(format!("action {a} outside Q width {}", q.cols())));
        }
        let delta = targets[i] - q.get(i, a);
        td_errors.push(delta);
        loss += weights[i] * delta * delta;
        grad.set(i, a, -2.0 * weights[i] * delta / n as f64);
    }
    Ok(TdLoss {
        loss: loss / n as f64,
        grad,
        td_errors,
    })
}

/// `mean_i (target_i − v_i)²` for a single-column value output.
pub fn critic_mse(values: &Matrix, targets: &[f64]) -> Result<(f64, Matrix)> {
    let n = values.rows();
    if values.cols() != 1 || targets.len() != n || n == 0 {
        return Err(Error::Shape(format!(
            "critic loss over {}x{} values and {} targets",
            n,
            values.cols(),
            targets.len()
        )));
    }
    let mut grad = Matrix::zeros(n, 1);
    let mut loss = 0.0;
    for i in 0..n {
        let d = targets[i] - values.get(i, 0);
        loss += d * d;
        grad.set(i, 0, -2.0 * d / n as f64);
    }
    Ok((loss / n as f64, grad))
}

/// `∂H/∂z` for `H = −Σ p ln p`, `p = softmax(z)`.
fn entropy_grad(probs: &[f64], out: &mut [f64]) {
    let h = categorical_entropy(probs);
    for (o, &p) in out.iter_mut().zip(probs) {
        *o = -p * (p.max(PROB_FLOOR).ln() + h);
    }
}

/// Adds `scale·∂ln π(a)/∂z = scale·(onehot(a) − p)` into `out`.
fn add_log_prob_grad(probs: &[f64], action: usize, scale: f64, out: &mut [f64]) {
    for (j, (o, &p)) in out.iter_mut().zip(probs).enumerate() {
        let onehot = if j == action { 1.0 } else { 0.0 };
        *o += scale * (onehot - p);
    }
}

fn check_policy_batch(logits: &Matrix, actions: &[usize], per_sample: &[&[f64]]) -> Result<()> {
    let n = logits.rows();
    if n == 0 || actions.len() != n || per_sample.iter().any(|v| v.len() != n) {
        return Err(Error::Shape(format!(
            "policy loss over {n} rows with mismatched per-sample inputs"
        )));
    }
    if let Some(&a) = actions.iter().find(|&&a| a >= logits.cols()) {
        return Err(Error::Shape(format!("action {a} outside policy width {}", logits.cols())));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct PolicyLoss {
    pub loss: f64,
    pub grad: Matrix,
    pub entropy: f64,
}

/// `−mean[A·ln π(a|s)] − c_H·mean H(π(·|s))` with advantages held fixed.
pub fn a2c_actor_loss(
    logits: &Matrix,
    actions: &[usize],
    advantages: &[f64],
    entropy_coef: f64,
) -> Result<PolicyLoss> {
    check_policy_batch(logits, actions, &[advantages])?;
    let n = logits.rows();
    let inv_n = 1.0 / n as f64;
    let mut grad = Matrix::zeros(n, logits.cols());
    let mut loss = 0.0;
    let mut entropy = 0.0;
    let mut dh = vec![0.0; logits.cols()];
    for i in 0..n {
        let p = softmax(logits.row(i));
        let h = categorical_entropy(&p);
        let logp = p[actions[i]].max(PROB_FLOOR).ln();
        loss += -advantages[i] * logp - entropy_coef * h;
        entropy += h;
        let row = grad.row_mut(i);
        entropy_grad(&p, &mut dh);
        for (g, d) in row.iter_mut().zip(&dh) {
            *g = -entropy_coef * inv_n * d;
        }
        add_log_prob_grad(&p, actions[i], -advantages[i] * inv_n, row);
    }
    Ok(PolicyLoss {
        loss: loss * inv_n,
        grad,
        entropy: entropy * inv_n,
    })
}

/// `min(ρ·A, clip(ρ, 1−η, 1+η)·A)`.
pub fn clipped_surrogate(ratio: f64, advantage: f64, clip: f64) -> f64 {
    (ratio * advantage).min(ratio.clamp(1.0 - clip, 1.0 + clip) * advantage)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PpoActorLoss {
    pub loss: f64,
    pub grad: Matrix,
    pub entropy: f64,
    /// Fraction of samples where the clipped branch was active.
    pub clip_fraction: f64,
    pub ratios: Vec<f64>,
}

/// `−mean[min(ρ·Â, clip(ρ)·Â)] − c_H·mean H` with
/// `ρ = exp(ln π_new(a|s) − ln π_old(a|s))`.
pub fn ppo_actor_loss(
    logits: &Matrix,
    actions: &[usize],
    old_log_probs: &[f64],
    advantages: &[f64],
    clip: f64,
    entropy_coef: f64,
) -> Result<PpoActorLoss> {
    check_policy_batch(logits, actions, &[old_log_probs, advantages])?;
    let n = logits.rows();
    let inv_n = 1.0 / n as f64;
    let mut grad = Matrix::zeros(n, logits.cols());
    let mut loss = 0.0;
    let mut entropy = 0.0;
    let mut clipped = 0usize;
    let mut ratios = Vec::with_capacity(n);
    let mut dh = vec![0.0; logits.cols()];
    for i in 0..n {
        let p = softmax(logits.row(i));
        let h = categorical_entropy(&p);
        let logp = p[actions[i]].max(PROB_FLOOR).ln();
        let ratio = (logp - old_log_probs[i]).exp();
        let adv = advantages[i];
        let unclipped = ratio * adv;
        let surrogate = clipped_surrogate(ratio, adv, clip);
        loss += -surrogate - entropy_coef * h;
        entropy += h;
        ratios.push(ratio);
        // d surrogate / d ln π is ρ·Â on the unclipped branch, 0 when the
        // clipped constant is the minimum.
        let dsurr = if unclipped <= surrogate { unclipped } else { 0.0 };
        if unclipped > surrogate {
            clipped += 1;
        }
        let row = grad.row_mut(i);
        entropy_grad(&p, &mut dh);
        for (g, d) in row.iter_mut().zip(&dh) {
            *g = -entropy_coef * inv_n * d;
        }
        add_log_prob_grad(&p, actions[i], -dsurr * inv_n, row);
    }
    Ok(PpoActorLoss {
        loss: loss * inv_n,
        grad,
        entropy: entropy * inv_n,
        clip_fraction: clipped as f64 * inv_n,
        ratios,
    })
}

/// Shifts and scales to mean 0, population std 1 (std floored at 1e-8).
pub fn normalize_advantages(adv: &mut [f64]) {
    if adv.is_empty() {
        return;
    }
    let n = adv.len() as f64;
    let mean = adv.iter().sum::<f64>() / n;
    let var = adv.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n;
    let std = var.sqrt().max(1e-8);
    for a in adv.iter_mut() {
        *a = (*a - mean) / std;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn double_q_printed_form() {
        assert_eq!(double_q_target(&[4.0, 1.0], &[0.0, 9.0], 0.0, false, 1.0), 1.0);
        assert_eq!(double_q_target(&[4.0, 1.0], &[0.0, 9.0], 2.5, true, 1.0), 2.5);
    }

    #[test]
    fn double_with_identical_nets_is_max() {
        let next = Matrix::from_vec(2, 3, vec![1.0, 5.0, 2.0, -1.0, -3.0, 0.5]).unwrap();
        let r = [0.1, 0.2];
        let d = [false, false];
        let max = q_targets(TargetRule::Max, &next, None, &r, &d, 0.9).unwrap();
        for rule in [TargetRule::DoubleSelectTarget, TargetRule::DoubleSelectPolicy] {
            assert_eq!(q_targets(rule, &next, Some(&next), &r, &d, 0.9).unwrap(), max);
        }
        assert_eq!(max, vec![0.1 + 0.9 * 5.0, 0.2 + 0.9 * 0.5]);
    }

    #[test]
    fn td_loss_examples() {
        let q = Matrix::from_vec(2, 2, vec![0.0, 2.0, 0.0, 0.0]).unwrap();
        let l = weighted_td_loss(&q, &[1, 0], &[2.0, 1.0], &[1.0, 1.0]).unwrap();
        assert_eq!(l.td_errors, vec![0.0, 1.0]);
        assert_eq!(l.loss, 0.5);
    }

    #[test]
    fn surrogate_clip_arithmetic() {
        assert_eq!(clipped_surrogate(2.0, 1.0, 0.2), 1.2);
        assert_eq!(clipped_surrogate(0.5, -1.0, 0.2), -0.8);
        assert_eq!(clipped_surrogate(1.0, 0.7, 0.2), 0.7);
    }

    #[test]
    fn normalized_advantages() {
        let mut a = vec![1.0, 2.0, 3.0, 10.0];
        normalize_advantages(&mut a);
        let mean: f64 = a.iter().sum::<f64>() / 4.0;
        let var: f64 = a.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 4.0;
        assert!(mean.abs() < 1e-12);
        assert!((var.sqrt() - 1.0).abs() < 1e-12);
        let mut single = vec![5.0];
        normalize_advantages(&mut single);
        assert_eq!(single, vec![0.0]);
    }

    #[test]
    fn zero_advantage_leaves_entropy_gradient() {
        let logits = Matrix::from_vec(1, 3, vec![0.3, -0.2, 1.1]).unwrap();
        let with = a2c_actor_loss(&logits, &[1], &[0.0], 0.5).unwrap();
        let p = softmax(logits.row(0));
        let mut dh = vec![0.0; 3];
        entropy_grad(&p, &mut dh);
        for (g, d) in with.grad.row(0).iter().zip(&dh) {
            assert!((g + 0.5 * d).abs() < 1e-15);
        }
    }
}
