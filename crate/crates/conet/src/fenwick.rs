//! Fenwick (binary indexed) tree over integer weights, used wherever a
//! draw proportional to per-item counts is needed: preferential
//! attachment targets and occurrence-weighted concept selection.
//!
//! Supports append, point update, and O(log n) sampling by descending
//! the implicit prefix-sum tree. Weights are u64 counts; an item with
//! weight 0 is never drawn, which is what temporarily-excluded items
//! are set to during without-replacement draws.

use rand::Rng;

#[derive(Debug, Clone, Default)]
pub struct FenwickTree {
    tree: Vec<u64>,
    weights: Vec<u64>,
    total: u64,
}

impl FenwickTree {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_weights(weights: &[u64]) -> Self {
        let mut t = FenwickTree::new();
        for &w in weights {
            t.push(w);
        }
        t
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    #[inline]
    pub fn total(&self) -> u64 {
        self.total
    }

    #[inline]
    pub fn weight(&self, index: usize) -> u64 {
        self.weights[index]
    }

    /// Appends an item with the given weight.
    pub fn push(&mut self, weight: u64) {
        // tree is 1-indexed; slot i covers weights[i - lowbit(i) .. i].
        let i = self.tree.len() + 1;
        let mut sum = weight;
        // Fold in the sibling ranges this new slot subsumes.
        let mut step = 1;
        while step < lowbit(i) {
            sum += self.tree[i - 1 - step];
            step <<= 1;
        }
        self.tree.push(sum);
        self.weights.push(weight);
        self.total += weight;
    }

    /// Adds `delta` to the weight at `index`.
    pub fn add(&mut self, index: usize, delta: u64) {
        self.weights[index] += delta;
        self.total += delta;
        let mut i = index + 1;
        while i <= self.tree.len() {
            self.tree[i - 1] += delta;
            i += lowbit(i);
        }
    }

    /// Sets the weight at `index`, returning the previous value.
    pub fn set(&mut self, index: usize, weight: u64) -> u64 {
        let old = self.weights[index];
        if weight >= old {
            self.add(index, weight - old);
        } else {
            let delta = old - weight;
            self.weights[index] = weight;
            self.total -= delta;
            let mut i = index + 1;
            while i <= self.tree.len() {
                self.tree[i - 1] -= delta;
                i += lowbit(i);
            }
        }
        old
    }

    /// Draws an index with probability proportional to its weight.
    /// Returns `None` when the total weight is zero.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<usize> {
        if self.total == 0 {
            return None;
        }
        let target = rng.gen_range(0..self.total);
        Some(self.index_of_prefix(target))
    }

    /// Largest index whose preceding cumulative weight is <= `target`,
    /// i.e. the item owning position `target` in [0, total).
    fn index_of_prefix(&self, mut target: u64) -> usize {
        debug_assert!(target < self.total);
        let mut pos = 0usize;
        let mut step = self.tree.len().next_power_of_two();
        while step > 0 {
            let next = pos + step;
            if next <= self.tree.len() && self.tree[next - 1] <= target {
                target -= self.tree[next - 1];
                pos = next;
            }
            step >>= 1;
        }
        // pos items have cumulative weight <= target, so item pos owns it;
        // zero-weight items are skipped because their range is empty.
        debug_assert!(self.weights[pos] > 0);
        pos
    }
}

#[inline]
fn lowbit(i: usize) -> usize {
    i & i.wrapping_neg()
}
