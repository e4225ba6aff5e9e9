//! Exact-integer weighted sampling over a growing population, uniform
//! distinct-subset sampling, and the seeded random source every run uses.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use smallvec::SmallVec;
use thiserror::Error;

/// Name of the generator family, recorded in run manifests.
pub const GENERATOR_FAMILY: &str = "ChaCha8Rng (rand_chacha 0.3; seed_from_u64 + set_stream)";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SamplingError {
    #[error("weights must be at least 1")]
    ZeroWeight,
    #[error("item {id} out of range (count {count})")]
    OutOfRange { id: usize, count: usize },
    #[error("cannot draw from an empty weight tree")]
    Empty,
    #[error("cannot choose {k} distinct items out of {n}")]
    BadSubset { n: usize, k: usize },
}

#[inline]
fn lowbit(i: usize) -> usize {
    i & i.wrapping_neg()
}

/// Append-only Fenwick tree over positive integer weights.
///
/// Items are dense indices `0..len()`. Append, increment and weighted draw are
/// all `O(log n)`, and the total is exact.
#[derive(Debug, Clone, Default)]
pub struct WeightTree {
    // 1-based Fenwick array, slot 0 unused.
    tree: Vec<u64>,
    weights: Vec<u64>,
    total: u64,
}

impl WeightTree {
    pub fn new() -> Self {
        Self {
            tree: vec![0],
            weights: Vec::new(),
            total: 0,
        }
    }

    pub fn with_capacity(cap: usize) -> Self {
        let mut tree = Vec::with_capacity(cap + 1);
        tree.push(0);
        Self {
            tree,
            weights: Vec::with_capacity(cap),
            total: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn weight(&self, id: usize) -> Option<u64> {
        self.weights.get(id).copied()
    }

    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    /// Adds a new item and returns its id (the previous count).
    pub fn append(&mut self, w: u64) -> Result<usize, SamplingError> {
        if w == 0 {
            return Err(SamplingError::ZeroWeight);
        }
        if self.tree.is_empty() {
            self.tree.push(0);
        }
        let idx = self.weights.len() + 1;
        // Slot idx covers (idx - lowbit(idx), idx]; its children are the slots
        // reached from idx - 1 by repeatedly stripping the low bit.
        let stop = idx - lowbit(idx);
        let mut sum = w;
        let mut j = idx - 1;
        while j > stop {
            sum += self.tree[j];
            j -= lowbit(j);
        }
        self.tree.push(sum);
        self.weights.push(w);
        self.total += w;
        Ok(idx - 1)
    }

    /// Raises the weight of `id` by `delta` and returns the new total.
    pub fn increment(&mut self, id: usize, delta: u64) -> Result<u64, SamplingError> {
        if id >= self.weights.len() {
            return Err(SamplingError::OutOfRange {
                id,
                count: self.weights.len(),
            });
        }
        if delta == 0 {
            return Err(SamplingError::ZeroWeight);
        }
        self.weights[id] += delta;
        self.total += delta;
        let mut i = id + 1;
        while i < self.tree.len() {
            self.tree[i] += delta;
            i += lowbit(i);
        }
        Ok(self.total)
    }

    /// Sum of the weights of items `0..end`.
    pub fn prefix_sum(&self, end: usize) -> u64 {
        let mut i = end.min(self.weights.len());
        let mut sum = 0;
        while i > 0 {
            sum += self.tree[i];
            i -= lowbit(i);
        }
        sum
    }

    /// Item whose cumulative range `[prefix(id), prefix(id + 1))` contains `target`.
    pub fn locate(&self, target: u64) -> Option<usize> {
        if target >= self.total {
            return None;
        }
        let n = self.weights.len();
        let mut pos = 0;
        let mut rest = target;
        let mut step = 1usize << (usize::BITS - 1 - n.leading_zeros());
        while step > 0 {
            let next = pos + step;
            if next <= n && self.tree[next] <= rest {
                pos = next;
                rest -= self.tree[next];
            }
            step >>= 1;
        }
        Some(pos)
    }

    /// Draws an item with probability `weight / total`.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<usize, SamplingError> {
        if self.total == 0 {
            return Err(SamplingError::Empty);
        }
        let target = rng.gen_range(0..self.total);
        Ok(self.locate(target).expect("target below total"))
    }
}

/// Seeded generator for one replication. Equal `(seed, stream)` pairs give
/// equal draw sequences.
#[derive(Debug, Clone)]
pub struct RandomSource {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

impl RandomSource {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { seed, stream, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }
}

impl RngCore for RandomSource {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        self.rng.try_fill_bytes(dest)
    }
}

/// Sorted index set returned by [`uniform_subset`].
pub type Subset = SmallVec<[u32; 8]>;

/// Chooses `k` distinct indices out of `0..n`, every `k`-subset equally likely.
///
/// Floyd's algorithm: exactly `k` draws regardless of how close `k` is to `n`.
pub fn uniform_subset<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    rng: &mut R,
) -> Result<Subset, SamplingError> {
    if k == 0 || k > n || n > u32::MAX as usize {
        return Err(SamplingError::BadSubset { n, k });
    }
    let mut chosen = Subset::new();
    for j in (n - k)..n {
        let t = rng.gen_range(0..=j) as u32;
        if chosen.contains(&t) {
            chosen.push(j as u32);
        } else {
            chosen.push(t);
        }
    }
    chosen.sort_unstable();
    Ok(chosen)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{prop_assert_eq, proptest};
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    use std::collections::HashMap;

    fn chi_square_p(observed: &[u64], expected: &[f64]) -> f64 {
        let stat: f64 = observed
            .iter()
            .zip(expected)
            .map(|(&o, &e)| (o as f64 - e).powi(2) / e)
            .sum();
        let dist = ChiSquared::new((observed.len() - 1) as f64).unwrap();
        1.0 - dist.cdf(stat)
    }

    #[test]
    fn append_assigns_dense_ids() {
        let mut t = WeightTree::new();
        assert_eq!(t.append(1), Ok(0));
        assert_eq!(t.total(), 1);
        t.append(1).unwrap();
        t.append(1).unwrap();
        assert_eq!(t.append(1), Ok(3));
        assert_eq!(t.total(), 4);
    }

    #[test]
    fn append_rejects_zero() {
        let mut t = WeightTree::new();
        t.append(3).unwrap();
        assert_eq!(t.append(0), Err(SamplingError::ZeroWeight));
        assert_eq!(t.len(), 1);
    }

    #[test]
    fn increment_updates_one_item() {
        let mut t = WeightTree::new();
        t.append(1).unwrap();
        t.append(1).unwrap();
        assert_eq!(t.increment(0, 1), Ok(3));
        assert_eq!(t.weights(), &[2, 1]);
        assert_eq!(t.increment(1, 1), Ok(4));
        assert_eq!(t.weights(), &[2, 2]);
        assert_eq!(
            t.increment(5, 1),
            Err(SamplingError::OutOfRange { id: 5, count: 2 })
        );
    }

    #[test]
    fn draw_from_empty_fails() {
        let t = WeightTree::new();
        let mut rng = RandomSource::new(1, 0);
        assert_eq!(t.draw(&mut rng), Err(SamplingError::Empty));
    }

    #[test]
    fn single_item_always_drawn() {
        let mut t = WeightTree::new();
        t.append(7).unwrap();
        let mut rng = RandomSource::new(3, 0);
        for _ in 0..1000 {
            assert_eq!(t.draw(&mut rng), Ok(0));
        }
    }

    #[test]
    fn draw_frequency_one_three() {
        let mut t = WeightTree::new();
        t.append(1).unwrap();
        t.append(3).unwrap();
        let mut rng = RandomSource::new(11, 0);
        let m = 100_000;
        let hits = (0..m).filter(|_| t.draw(&mut rng).unwrap() == 1).count();
        let freq = hits as f64 / m as f64;
        assert!((freq - 0.75).abs() < 0.01, "freq {freq}");
    }

    #[test]
    fn draw_uniform_chi_square() {
        let mut t = WeightTree::new();
        for _ in 0..3 {
            t.append(1).unwrap();
        }
        let mut rng = RandomSource::new(5, 2);
        let mut counts = [0u64; 3];
        for _ in 0..30_000 {
            counts[t.draw(&mut rng).unwrap()] += 1;
        }
        assert!(chi_square_p(&counts, &[10_000.0; 3]) > 1e-3);
    }

    #[test]
    fn draw_matches_arbitrary_weights() {
        let weights = [5u64, 1, 9, 2, 2, 13, 1, 7, 4];
        let mut t = WeightTree::new();
        for &w in &weights {
            t.append(w).unwrap();
        }
        let total: u64 = weights.iter().sum();
        let mut rng = RandomSource::new(99, 4);
        let m = 100_000;
        let mut counts = vec![0u64; weights.len()];
        for _ in 0..m {
            counts[t.draw(&mut rng).unwrap()] += 1;
        }
        let expected: Vec<f64> = weights
            .iter()
            .map(|&w| m as f64 * w as f64 / total as f64)
            .collect();
        assert!(chi_square_p(&counts, &expected) > 1e-3);
    }

    #[test]
    fn equal_seed_and_stream_repeat() {
        let mut a = RandomSource::new(42, 7);
        let mut b = RandomSource::new(42, 7);
        let mut c = RandomSource::new(42, 8);
        let xa: Vec<u64> = (0..32).map(|_| a.next_u64()).collect();
        let xb: Vec<u64> = (0..32).map(|_| b.next_u64()).collect();
        let xc: Vec<u64> = (0..32).map(|_| c.next_u64()).collect();
        assert_eq!(xa, xb);
        assert_ne!(xa, xc);
    }

    #[test]
    fn subset_full_set() {
        let mut rng = RandomSource::new(0, 0);
        for _ in 0..100 {
            assert_eq!(
                uniform_subset(3, 3, &mut rng).unwrap().as_slice(),
                &[0, 1, 2]
            );
        }
    }

    #[test]
    fn subset_rejects_oversize() {
        let mut rng = RandomSource::new(0, 0);
        assert_eq!(
            uniform_subset(2, 3, &mut rng),
            Err(SamplingError::BadSubset { n: 2, k: 3 })
        );
    }

    #[test]
    fn subset_pairs_distinct() {
        let mut rng = RandomSource::new(8, 1);
        for _ in 0..10_000 {
            let s = uniform_subset(3, 2, &mut rng).unwrap();
            assert_ne!(s[0], s[1]);
        }
    }

    #[test]
    fn subset_pairs_of_four_uniform() {
        let mut rng = RandomSource::new(21, 0);
        let m = 60_000;
        let mut counts: HashMap<(u32, u32), u64> = HashMap::new();
        for _ in 0..m {
            let s = uniform_subset(4, 2, &mut rng).unwrap();
            *counts.entry((s[0], s[1])).or_default() += 1;
        }
        assert_eq!(counts.len(), 6);
        for &c in counts.values() {
            assert!((c as f64 / m as f64 - 1.0 / 6.0).abs() < 0.01);
        }
    }

    #[test]
    fn subsets_uniform_small_populations() {
        let mut rng = RandomSource::new(1234, 3);
        for n in 1..=6usize {
            for k in 1..=3usize.min(n) {
                let m = 20_000;
                let mut counts: HashMap<Subset, u64> = HashMap::new();
                for _ in 0..m {
                    *counts
                        .entry(uniform_subset(n, k, &mut rng).unwrap())
                        .or_default() += 1;
                }
                let c = binom(n, k);
                assert_eq!(counts.len(), c, "n={n} k={k}");
                if c > 1 {
                    let obs: Vec<u64> = counts.values().copied().collect();
                    let exp = vec![m as f64 / c as f64; c];
                    assert!(chi_square_p(&obs, &exp) > 1e-3, "n={n} k={k}");
                }
            }
        }
    }

    fn binom(n: usize, k: usize) -> usize {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    proptest! {
        #[test]
        fn total_is_exact_sum(ops in proptest::collection::vec((0u8..2, 1u64..50, 0usize..64), 1..200)) {
            let mut t = WeightTree::new();
            let mut shadow: Vec<u64> = Vec::new();
            for (kind, w, id) in ops {
                if kind == 0 || shadow.is_empty() {
                    prop_assert_eq!(t.append(w).unwrap(), shadow.len());
                    shadow.push(w);
                } else {
                    let id = id % shadow.len();
                    t.increment(id, w).unwrap();
                    shadow[id] += w;
                }
                prop_assert_eq!(t.total(), shadow.iter().sum::<u64>());
            }
            prop_assert_eq!(t.weights(), shadow.as_slice());
            let mut acc = 0;
            for (i, &w) in shadow.iter().enumerate() {
                prop_assert_eq!(t.prefix_sum(i), acc);
                prop_assert_eq!(t.locate(acc), Some(i));
                prop_assert_eq!(t.locate(acc + w - 1), Some(i));
                acc += w;
            }
            prop_assert_eq!(t.locate(acc), None);
        }
    }
}
