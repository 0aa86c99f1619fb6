use crate::error::{Error, Result};

/// Complete binary tree over a power-of-two number of leaves where every
/// internal node holds `combine(left, right)`.
#[derive(Clone, Debug, PartialEq)]
struct SegmentTree {
    capacity: usize,
    nodes: Vec<f64>,
    op: Op,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Op {
    Sum,
    Min,
}

impl Op {
    fn neutral(self) -> f64 {
        match self {
            Op::Sum => 0.0,
            Op::Min => f64::INFINITY,
        }
    }

    fn combine(self, a: f64, b: f64) -> f64 {
        match self {
            Op::Sum => a + b,
            Op::Min => a.min(b),
        }
    }
}

impl SegmentTree {
    fn new(min_capacity: usize, op: Op) -> Self {
        let capacity = min_capacity.max(1).next_power_of_two();
        Self {
            capacity,
            nodes: vec![op.neutral(); 2 * capacity],
            op,
        }
    }

    fn update(&mut self, leaf: usize, value: f64) -> Result<()> {
        if leaf >= self.capacity {
            return Err(Error::Usage(format!(
                "leaf {leaf} out of range for tree of capacity {}",
                self.capacity
            )));
        }
        let mut i = leaf + self.capacity;
        self.nodes[i] = value;
        while i > 1 {
            i /= 2;
            self.nodes[i] = self.op.combine(self.nodes[2 * i], self.nodes[2 * i + 1]);
        }
        Ok(())
    }

    fn get(&self, leaf: usize) -> f64 {
        self.nodes.get(leaf + self.capacity).copied().unwrap_or(self.op.neutral())
    }
}

/// Sum tree used for proportional sampling.
#[derive(Clone, Debug, PartialEq)]
pub struct SumTree(SegmentTree);

impl SumTree {
    /// Rounds `min_capacity` up to a power of two.
    pub fn new(min_capacity: usize) -> Self {
        Self(SegmentTree::new(min_capacity, Op::Sum))
    }

    pub fn capacity(&self) -> usize {
        self.0.capacity
    }

    pub fn update(&mut self, leaf: usize, value: f64) -> Result<()> {
        if !(value >= 0.0 && value.is_finite()) {
            return Err(Error::Numeric(format!("sum-tree value must be finite and >= 0, got {value}")));
        }
        self.0.update(leaf, value)
    }

    pub fn get(&self, leaf: usize) -> f64 {
        self.0.get(leaf)
    }

    pub fn root(&self) -> f64 {
        self.0.nodes[1]
    }

    /// First leaf whose inclusive prefix sum exceeds `mass`.
    pub fn prefix_find(&self, mass: f64) -> Result<usize> {
        let root = self.root();
        if !(mass >= 0.0 && mass < root) {
            return Err(Error::Usage(format!(
                "prefix mass {mass} outside [0, {root})"
            )));
        }
        let nodes = &self.0.nodes;
        let mut i = 1;
        let mut rest = mass;
        while i < self.0.capacity {
            let left = nodes[2 * i];
            if rest < left {
                i *= 2;
            } else {
                rest -= left;
                i = 2 * i + 1;
            }
        }
        let mut leaf = i - self.0.capacity;
        // Rounding in the partial sums can land on an empty leaf past the last
        // occupied one; step back to the nearest leaf with mass.
        while self.get(leaf) == 0.0 && leaf > 0 {
            leaf -= 1;
        }
        Ok(leaf)
    }
}

/// Min tree over the occupied leaves; empty leaves hold `+∞`.
#[derive(Clone, Debug, PartialEq)]
pub struct MinTree(SegmentTree);

impl MinTree {
    pub fn new(min_capacity: usize) -> Self {
        Self(SegmentTree::new(min_capacity, Op::Min))
    }

    pub fn capacity(&self) -> usize {
        self.0.capacity
    }

    pub fn update(&mut self, leaf: usize, value: f64) -> Result<()> {
        if value.is_nan() {
            return Err(Error::Numeric("min-tree value is NaN".into()));
        }
        self.0.update(leaf, value)
    }

    pub fn get(&self, leaf: usize) -> f64 {
        self.0.get(leaf)
    }

    pub fn root(&self) -> f64 {
        self.0.nodes[1]
    }
}
