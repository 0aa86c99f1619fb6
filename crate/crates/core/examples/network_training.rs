//! The dense-network engine on its own: fit a small regression with Adam,
//! check one gradient against central differences, and show the dueling
//! recombination.
//!
//! ```text
//! cargo run --release --example network_training
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ays_rl::nn::{dueling_combine, AdamConfig, AdamState, HeadKind, Matrix, MlpNetwork};

fn mse(out: &Matrix, y: &[f64]) -> (f64, Matrix) {
    let n = y.len() as f64;
    let mut grad = Matrix::zeros(out.rows(), 1);
    let mut loss = 0.0;
    for (i, target) in y.iter().enumerate() {
        let d = out.get(i, 0) - target;
        loss += d * d / n;
        grad.set(i, 0, 2.0 * d / n);
    }
    (loss, grad)
}

fn main() -> ays_rl::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut net = MlpNetwork::new(2, &[32, 32], HeadKind::ScalarValue, 1, &mut rng)?;
    let xs: Vec<[f64; 2]> = (0..128).map(|_| [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]).collect();
    let y: Vec<f64> = xs.iter().map(|[a, b]| (3.0 * a).sin() * b).collect();
    let x = Matrix::from_rows(2, xs.iter().map(|r| &r[..]))?;

    let mut adam = AdamState::new(&net, 1e-2, AdamConfig::default());
    for epoch in 0..=600 {
        let (out, cache) = net.forward_batch(&x)?;
        let (loss, grad) = mse(&out, &y);
        let grads = net.backward(&cache, &grad)?;
        adam.step(&mut net, &grads)?;
        if epoch % 100 == 0 {
            println!("epoch {epoch:>4}  mse {loss:.5}");
        }
    }

    let (out, cache) = net.forward_batch(&x)?;
    let (_, grad) = mse(&out, &y);
    let analytic = net.backward(&cache, &grad)?.layers[0].weights[0];
    let h = 1e-6;
    let mut probe = net.clone();
    probe.layers_mut()[0].weights[0] += h;
    let up = mse(&probe.predict(&x)?, &y).0;
    probe.layers_mut()[0].weights[0] -= 2.0 * h;
    let down = mse(&probe.predict(&x)?, &y).0;
    println!("dL/dw[0]: analytic {analytic:.8}, central difference {:.8}", (up - down) / (2.0 * h));

    let q = dueling_combine(2.0, &[0.5, -0.5, 1.0, -1.0])?;
    println!("dueling: V = 2, A = (0.5, -0.5, 1, -1) -> Q = {q:?}");
    Ok(())
}
