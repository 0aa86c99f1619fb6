use rand::Rng;

use super::ring::{Batch, Storage, Transition};
use super::tree::{MinTree, SumTree};
use crate::codec::{Reader, Writer};
use crate::error::{Error, Result};

pub const PRIORITY_FLOOR: f64 = 1e-6;
pub const INITIAL_MAX_PRIORITY: f64 = 1.0;

/// A prioritized minibatch: the transitions, their slots for later priority
/// updates, and max-normalized importance weights.
#[derive(Clone, Debug, PartialEq)]
pub struct PrioritizedBatch {
    pub batch: Batch,
    pub leaves: Vec<usize>,
    pub weights: Vec<f64>,
}

/// Proportional prioritized replay over a sum tree and a min tree.
#[derive(Clone, Debug, PartialEq)]
pub struct PrioritizedBuffer {
    storage: Storage,
    sum: SumTree,
    min: MinTree,
    alpha: f64,
    beta: f64,
    max_priority: f64,
}

impl PrioritizedBuffer {
    pub fn new(capacity: usize, width: usize, alpha: f64, beta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) || !(0.0..=1.0).contains(&beta) {
            return Err(Error::Config(format!(
                "PER alpha and beta must lie in [0, 1] (got {alpha}, {beta})"
            )));
        }
        Ok(Self {
            storage: Storage::new(capacity, width)?,
            sum: SumTree::new(capacity),
            min: MinTree::new(capacity),
            alpha,
            beta,
            max_priority: INITIAL_MAX_PRIORITY,
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

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn max_priority(&self) -> f64 {
        self.max_priority
    }

    /// Total of `p^α` over stored items.
    pub fn total_mass(&self) -> f64 {
        self.sum.root()
    }

    /// Tree value `p^α` at `leaf`.
    pub fn mass(&self, leaf: usize) -> f64 {
        self.sum.get(leaf)
    }

    pub fn get(&self, leaf: usize) -> Option<Transition> {
        self.storage.get(leaf)
    }

    /// Sets β; it may only grow.
    pub fn set_beta(&mut self, beta: f64) {
        self.beta = beta.clamp(self.beta, 1.0);
    }

    /// New items enter at the largest priority seen so far.
    pub fn push(&mut self, t: &Transition) -> Result<()> {
        let leaf = self.storage.push(t)?;
        self.set_priority(leaf, self.max_priority)
    }

    fn set_priority(&mut self, leaf: usize, priority: f64) -> Result<()> {
        let p = priority.powf(self.alpha);
        self.sum.update(leaf, p)?;
        self.min.update(leaf, p)
    }

    /// Stratified proportional sampling: one draw in each of `batch` equal
    /// slices of the total mass.
    pub fn sample_leaves<R: Rng + ?Sized>(&self, batch: usize, rng: &mut R) -> Result<Vec<usize>> {
        if self.is_empty() {
            return Err(Error::Usage("cannot sample from an empty prioritized buffer".into()));
        }
        let total = self.total_mass();
        let segment = total / batch as f64;
        (0..batch)
            .map(|i| {
                let u: f64 = rng.random();
                let mass = ((i as f64 + u) * segment).min(total * (1.0 - f64::EPSILON));
                self.sum.prefix_find(mass)
            })
            .collect()
    }

    /// `w_i = (N·P_i)^(−β) / (N·P_min)^(−β)`, so every weight is in (0, 1].
    pub fn weights(&self, leaves: &[usize]) -> Vec<f64> {
        let min = self.min.root();
        leaves
            .iter()
            .map(|&l| (self.sum.get(l) / min).powf(-self.beta).min(1.0))
            .collect()
    }

    pub fn sample<R: Rng + ?Sized>(&self, batch: usize, rng: &mut R) -> Result<PrioritizedBatch> {
        let leaves = self.sample_leaves(batch, rng)?;
        Ok(PrioritizedBatch {
            batch: self.storage.gather(&leaves),
            weights: self.weights(&leaves),
            leaves,
        })
    }

    /// Sets `p_i = |δ_i| + floor` for each sampled leaf.
    pub fn update_priorities(&mut self, leaves: &[usize], td_errors: &[f64]) -> Result<()> {
        if leaves.len() != td_errors.len() {
            return Err(Error::Shape(format!(
                "{} leaves but {} TD errors",
                leaves.len(),
                td_errors.len()
            )));
        }
        for (&leaf, &delta) in leaves.iter().zip(td_errors) {
            if !delta.is_finite() {
                return Err(Error::Numeric(format!("non-finite TD error {delta}")));
            }
            if leaf >= self.len() {
                return Err(Error::Usage(format!("leaf {leaf} is not occupied")));
            }
            let p = delta.abs() + PRIORITY_FLOOR;
            self.max_priority = self.max_priority.max(p);
            self.set_priority(leaf, p)?;
        }
        Ok(())
    }

    pub(crate) fn write(&self, w: &mut Writer) {
        self.storage.write(w);
        w.f64(self.alpha);
        w.f64(self.beta);
        w.f64(self.max_priority);
        let masses: Vec<f64> = (0..self.len()).map(|i| self.sum.get(i)).collect();
        w.f64s(&masses);
    }

    pub(crate) fn read(r: &mut Reader<'_>) -> Result<Self> {
        let storage = Storage::read(r)?;
        let alpha = r.f64()?;
        let beta = r.f64()?;
        let max_priority = r.f64()?;
        let masses = r.f64s()?;
        if masses.len() != storage.len() {
            return Err(Error::Format("priority count does not match replay size".into()));
        }
        let mut out = Self {
            sum: SumTree::new(storage.capacity()),
            min: MinTree::new(storage.capacity()),
            storage,
            alpha,
            beta,
            max_priority,
        };
        for (i, m) in masses.into_iter().enumerate() {
            out.sum.update(i, m).map_err(|e| Error::Format(e.to_string()))?;
            out.min.update(i, m).map_err(|e| Error::Format(e.to_string()))?;
        }
        Ok(out)
    }
}

/// Linear β schedule from `beta0` at frame 0 to 1 at `total_frames`.
pub fn annealed_beta(beta0: f64, frame: u64, total_frames: u64) -> f64 {
    if total_frames == 0 {
        return 1.0;
    }
    let frac = (frame as f64 / total_frames as f64).min(1.0);
    beta0 + (1.0 - beta0) * frac
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn t(x: f64) -> Transition {
        Transition {
            state: vec![x],
            action: 0,
            reward: x,
            next_state: vec![x],
            done: false,
        }
    }

    #[test]
    fn first_push_gets_unit_priority() {
        let mut b = PrioritizedBuffer::new(8, 1, 0.6, 0.4).unwrap();
        b.push(&t(0.0)).unwrap();
        assert_eq!(b.mass(0), 1.0);
        assert_eq!(b.max_priority(), INITIAL_MAX_PRIORITY);
    }

    #[test]
    fn new_items_inherit_max_priority() {
        let mut b = PrioritizedBuffer::new(8, 1, 1.0, 0.4).unwrap();
        b.push(&t(0.0)).unwrap();
        b.update_priorities(&[0], &[-3.0]).unwrap();
        b.push(&t(1.0)).unwrap();
        assert_eq!(b.mass(1), 3.0 + PRIORITY_FLOOR);
    }

    #[test]
    fn alpha_zero_is_uniform() {
        let mut b = PrioritizedBuffer::new(8, 1, 0.0, 0.4).unwrap();
        for i in 0..5 {
            b.push(&t(i as f64)).unwrap();
        }
        b.update_priorities(&[0, 1, 2], &[10.0, 0.0, -0.5]).unwrap();
        for i in 0..5 {
            assert_eq!(b.mass(i), 1.0);
        }
        assert_eq!(b.weights(&[0, 1, 2, 3, 4]), vec![1.0; 5]);
    }

    #[test]
    fn hand_computed_weights() {
        let mut b = PrioritizedBuffer::new(2, 1, 1.0, 1.0).unwrap();
        b.push(&t(0.0)).unwrap();
        b.push(&t(1.0)).unwrap();
        // Set exact priorities 1 and 3 on the trees (bypassing the floor).
        b.set_priority(0, 1.0).unwrap();
        b.set_priority(1, 3.0).unwrap();
        let w = b.weights(&[0, 1]);
        assert_eq!(w[0], 1.0);
        assert!((w[1] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn zero_td_error_falls_to_floor() {
        let mut b = PrioritizedBuffer::new(4, 1, 1.0, 0.5).unwrap();
        b.push(&t(0.0)).unwrap();
        b.update_priorities(&[0], &[0.0]).unwrap();
        assert_eq!(b.mass(0), PRIORITY_FLOOR);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(b.sample(3, &mut rng).unwrap().leaves, vec![0, 0, 0]);
    }

    #[test]
    fn single_item_weight_is_one() {
        let mut b = PrioritizedBuffer::new(4, 1, 0.7, 1.0).unwrap();
        b.push(&t(0.0)).unwrap();
        b.update_priorities(&[0], &[0.37]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(b.sample(2, &mut rng).unwrap().weights, vec![1.0, 1.0]);
    }

    #[test]
    fn beta_anneals_to_one() {
        assert_eq!(annealed_beta(0.7389, 0, 1000), 0.7389);
        assert_eq!(annealed_beta(0.7389, 1000, 1000), 1.0);
        assert!((annealed_beta(0.5, 500, 1000) - 0.75).abs() < 1e-15);
        let mut b = PrioritizedBuffer::new(2, 1, 0.5, 0.6).unwrap();
        b.set_beta(0.5);
        assert_eq!(b.beta(), 0.6);
        b.set_beta(2.0);
        assert_eq!(b.beta(), 1.0);
    }

    #[test]
    fn checkpoint_round_trip() {
        let mut b = PrioritizedBuffer::new(3, 1, 0.3, 0.6).unwrap();
        for i in 0..4 {
            b.push(&t(i as f64)).unwrap();
        }
        b.update_priorities(&[1, 2], &[0.4, -2.0]).unwrap();
        let mut w = Writer::new();
        b.write(&mut w);
        let bytes = w.into_inner();
        let back = PrioritizedBuffer::read(&mut Reader::new(&bytes)).unwrap();
        assert_eq!(back, b);
    }
}
