//! Proportional prioritized replay backed by a sum-tree.

use rand::Rng;

use crate::env::Transition;

/// Binary tree over leaf priorities where each node stores its subtree sum.
#[derive(Debug, Clone)]
pub struct SumTree {
    leaves: usize,
    nodes: Vec<f64>,
}

impl SumTree {
    pub fn new(capacity: usize) -> Self {
        let leaves = capacity.max(1).next_power_of_two();
        Self { leaves, nodes: vec![0.0; 2 * leaves] }
    }

    pub fn total(&self) -> f64 {
        self.nodes[1]
    }

    pub fn get(&self, i: usize) -> f64 {
        self.nodes[self.leaves + i]
    }

    pub fn set(&mut self, i: usize, value: f64) {
        let mut n = self.leaves + i;
        self.nodes[n] = value;
        while n > 1 {
            n /= 2;
            self.nodes[n] = self.nodes[2 * n] + self.nodes[2 * n + 1];
        }
    }

    /// Leaf whose cumulative range contains `mass`, for `mass` in `[0, total)`.
    pub fn find(&self, mut mass: f64) -> usize {
        let mut n = 1;
        while n < self.leaves {
            let left = self.nodes[2 * n];
            if mass < left || self.nodes[2 * n + 1] <= 0.0 {
                n *= 2;
            } else {
                mass -= left;
                n = 2 * n + 1;
            }
        }
        n - self.leaves
    }
}

#[derive(Debug, Clone)]
pub struct ReplayMemory {
    capacity: usize,
    alpha: f64,
    items: Vec<Transition>,
    next: usize,
    tree: SumTree,
    max_priority: f64,
}

/// Indices into the memory plus normalized importance-sampling weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub indices: Vec<usize>,
    pub weights: Vec<f64>,
}

impl ReplayMemory {
    pub fn new(capacity: usize, alpha: f64) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        Self { capacity, alpha, items: Vec::new(), next: 0, tree: SumTree::new(capacity), max_priority: 1.0 }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn get(&self, i: usize) -> &Transition {
        &self.items[i]
    }

    /// Stores `t` with the largest priority seen so far, evicting the oldest
    /// entry when full.
    pub fn push(&mut self, mut t: Transition) {
        t.priority = self.max_priority;
        let slot = self.next;
        if self.items.len() < self.capacity {
            self.items.push(t);
        } else {
            self.items[slot] = t;
        }
        self.tree.set(slot, self.max_priority.powf(self.alpha));
        self.next = (slot + 1) % self.capacity;
    }

    pub fn priority(&self, i: usize) -> f64 {
        self.items[i].priority
    }

    pub fn set_priority(&mut self, i: usize, p: f64) {
        assert!(p > 0.0 && p.is_finite(), "priority {p} must be positive");
        self.items[i].priority = p;
        self.tree.set(i, p.powf(self.alpha));
        self.max_priority = self.max_priority.max(p);
    }

    /// Probability of drawing item `i`.
    pub fn probability(&self, i: usize) -> f64 {
        self.tree.get(i) / self.tree.total()
    }
}

/// Draws `batch` items i.i.d. in proportion to `priority^alpha` and returns
/// weights `(N P(i))^-beta` divided by their batch maximum.
pub fn sample_prioritized<R: Rng>(mem: &ReplayMemory, batch: usize, beta: f64, rng: &mut R) -> Sample {
    assert!(!mem.is_empty(), "cannot sample an empty memory");
    let total = mem.tree.total();
    let n = mem.len() as f64;
    let mut indices = Vec::with_capacity(batch);
    let mut weights = Vec::with_capacity(batch);
    for _ in 0..batch {
        let i = mem.tree.find(rng.random::<f64>() * total).min(mem.len() - 1);
        indices.push(i);
        weights.push((n * mem.probability(i)).powf(-beta));
    }
    let max = weights.iter().cloned().fold(0.0, f64::max);
    for w in &mut weights {
        *w /= max;
    }
    Sample { indices, weights }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attention::ImportanceDist;
    use crate::env::EnvState;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn transition(reward: f64) -> Transition {
        let d = ImportanceDist::from_masses(&[1.0, 1.0]).unwrap();
        let s = EnvState::new(0.5, 0.5, &d, 5.0);
        Transition { state: s.clone(), action: 0, reward, next_state: s, t_as: 1.0, horizon: 1.0, priority: 1.0 }
    }

    fn memory(priorities: &[f64], alpha: f64) -> ReplayMemory {
        let mut m = ReplayMemory::new(priorities.len(), alpha);
        for (i, p) in priorities.iter().enumerate() {
            m.push(transition(i as f64));
            m.set_priority(i, *p);
        }
        m
    }

    #[test]
    fn tree_sums_and_finds() {
        let mut t = SumTree::new(5);
        for (i, p) in [1.0, 2.0, 3.0, 4.0, 0.5].iter().enumerate() {
            t.set(i, *p);
        }
        assert_eq!(t.total(), 10.5);
        assert_eq!(t.find(0.0), 0);
        assert_eq!(t.find(0.99), 0);
        assert_eq!(t.find(1.0), 1);
        assert_eq!(t.find(5.9), 2);
        assert_eq!(t.find(10.4), 4);
        assert_eq!(t.find(10.5), 4);
    }

    #[test]
    fn ring_buffer_evicts_oldest() {
        let mut m = ReplayMemory::new(3, 0.6);
        for r in 0..5 {
            m.push(transition(r as f64));
        }
        assert_eq!(m.len(), 3);
        let rewards: Vec<f64> = (0..3).map(|i| m.get(i).reward).collect();
        assert_eq!(rewards, vec![3.0, 4.0, 2.0]);
    }

    #[test]
    fn new_items_take_max_priority() {
        let mut m = memory(&[1.0, 7.0], 0.6);
        m.push(transition(9.0));
        assert_eq!(m.priority(0), 7.0);
    }

    #[test]
    fn equal_priorities_give_unit_weights() {
        let m = memory(&[2.0; 8], 0.6);
        let s = sample_prioritized(&m, 64, 0.4, &mut ChaCha8Rng::seed_from_u64(0));
        assert!(s.weights.iter().all(|w| (w - 1.0).abs() < 1e-12));
    }

    #[test]
    fn beta_zero_gives_unit_weights() {
        let m = memory(&[1.0, 5.0, 0.2], 0.6);
        let s = sample_prioritized(&m, 64, 0.0, &mut ChaCha8Rng::seed_from_u64(0));
        assert!(s.weights.iter().all(|w| *w == 1.0));
    }

    #[test]
    fn dominant_priority_is_nearly_always_drawn() {
        let m = memory(&[1e6, 1.0, 1.0, 1.0], 1.0);
        let s = sample_prioritized(&m, 100_000, 0.4, &mut ChaCha8Rng::seed_from_u64(3));
        let hits = s.indices.iter().filter(|i| **i == 0).count();
        assert!(hits as f64 / 1e5 >= 0.999);
    }

    #[test]
    fn frequencies_follow_priorities_within_three_sigma() {
        let ps = [0.5, 1.0, 2.0, 4.0, 0.1, 3.0];
        let alpha = 0.6;
        let m = memory(&ps, alpha);
        let draws = 100_000;
        let s = sample_prioritized(&m, draws, 0.4, &mut ChaCha8Rng::seed_from_u64(11));
        let z: f64 = ps.iter().map(|p| p.powf(alpha)).sum();
        for (i, p) in ps.iter().enumerate() {
            let prob = p.powf(alpha) / z;
            let count = s.indices.iter().filter(|k| **k == i).count() as f64;
            let sigma = (draws as f64 * prob * (1.0 - prob)).sqrt();
            assert!((count - draws as f64 * prob).abs() < 3.0 * sigma, "item {i}: {count}");
        }
    }

    #[test]
    fn weights_are_normalized_by_batch_max() {
        let m = memory(&[1.0, 9.0], 1.0);
        let s = sample_prioritized(&m, 500, 1.0, &mut ChaCha8Rng::seed_from_u64(5));
        let max = s.weights.iter().cloned().fold(0.0, f64::max);
        assert_eq!(max, 1.0);
        // low-priority item is upweighted 9x relative to the high one
        let (i_lo, i_hi) = (s.indices.iter().position(|i| *i == 0).unwrap(), s.indices.iter().position(|i| *i == 1).unwrap());
        assert!((s.weights[i_lo] / s.weights[i_hi] - 9.0).abs() < 1e-9);
    }
}
