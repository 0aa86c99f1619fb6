//! Categorical-policy helpers for the actor networks.

use rand::Rng;

/// Probabilities are floored here before taking logarithms.
pub const PROB_FLOOR: f64 = 1e-12;

/// Max-subtracted softmax.
pub fn softmax(preferences: &[f64]) -> Vec<f64> {
    let max = preferences.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = preferences.iter().map(|p| (p - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// Shannon entropy in nats; zero-probability entries contribute nothing.
pub fn categorical_entropy(probs: &[f64]) -> f64 {
    -probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.max(PROB_FLOOR).ln())
        .sum::<f64>()
}

pub fn log_prob(probs: &[f64], action: usize) -> f64 {
    probs[action].max(PROB_FLOOR).ln()
}

/// Inverse-CDF draw from a categorical distribution.
pub fn sample_categorical<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut cumulative = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        cumulative += p;
        if u < cumulative {
            return i;
        }
    }
    // Rounding left `u` above the total mass: take the last supported index.
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn softmax_examples() {
        assert_eq!(softmax(&[0.0; 4]), vec![0.25; 4]);
        let p = softmax(&[1f64.ln(), 2f64.ln(), 3f64.ln(), 4f64.ln()]);
        for (got, want) in p.iter().zip([0.1, 0.2, 0.3, 0.4]) {
            assert!((got - want).abs() < 1e-12);
        }
        let big = softmax(&[1000.0, 1000.0]);
        assert_eq!(big, vec![0.5, 0.5]);
    }

    #[test]
    fn entropy_examples() {
        assert!((categorical_entropy(&[0.25; 4]) - 4f64.ln()).abs() < 1e-12);
        assert_eq!(categorical_entropy(&[0.0, 1.0, 0.0, 0.0]), 0.0);
        assert!((categorical_entropy(&[0.5, 0.5, 0.0, 0.0]) - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn one_hot_always_samples_its_index() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let probs = [0.0, 0.0, 1.0, 0.0];
        assert!((0..1000).all(|_| sample_categorical(&probs, &mut rng) == 2));
    }

    #[test]
    fn same_seed_same_draws() {
        let probs = [0.1, 0.2, 0.3, 0.4];
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..64)
                .map(|_| sample_categorical(&probs, &mut rng))
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(9), draw(9));
    }

    #[test]
    fn argmax_breaks_ties_low() {
        assert_eq!(argmax(&[1.0, 5.0, 2.0, 0.0]), 1);
        assert_eq!(argmax(&[3.0, 3.0, 0.0, 0.0]), 0);
    }
}
