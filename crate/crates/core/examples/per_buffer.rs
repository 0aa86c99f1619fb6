//! Prioritized replay: proportional sampling, importance weights and
//! priority updates.
//!
//! ```text
//! cargo run --release --example per_buffer
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ays_rl::replay::{annealed_beta, PrioritizedBuffer, Transition};

fn main() -> ays_rl::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut buffer = PrioritizedBuffer::new(8, 1, 0.6, 0.4)?;
    for i in 0..8 {
        buffer.push(&Transition {
            state: vec![i as f64],
            action: 0,
            reward: 0.0,
            next_state: vec![i as f64],
            done: false,
        })?;
    }
    let leaves: Vec<usize> = (0..8).collect();
    let td: Vec<f64> = (0..8).map(|i| 0.5 * i as f64).collect();
    buffer.update_priorities(&leaves, &td)?;

    let draws = 80_000;
    let mut counts = [0usize; 8];
    for _ in 0..draws / 32 {
        for leaf in buffer.sample_leaves(32, &mut rng)? {
            counts[leaf] += 1;
        }
    }
    let weights = buffer.weights(&leaves);
    println!("leaf  |td|  expected  observed  weight");
    for i in 0..8 {
        let expected = buffer.mass(i) / buffer.total_mass();
        println!(
            "{i:>4}  {:>4.1}  {expected:>8.4}  {:>8.4}  {:>6.3}",
            td[i],
            counts[i] as f64 / draws as f64,
            weights[i]
        );
    }
    println!("max priority {:.3}", buffer.max_priority());
    for frame in [0, 25_000, 50_000, 100_000] {
        println!("beta at frame {frame:>6}: {:.3}", annealed_beta(0.4, frame, 100_000));
    }
    Ok(())
}
