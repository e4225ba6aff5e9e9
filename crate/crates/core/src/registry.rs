//! Storage for vertices and m-cliques: canonical keys, integer weights,
//! degrees, and weight histograms.

use std::collections::BTreeMap;
use std::hash::{BuildHasher, Hasher};

use hashbrown::HashTable;
use rand::Rng;
use rustc_hash::FxBuildHasher;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sampling::{SamplingError, WeightTree};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RegistryError {
    #[error("clique key {key:?} is not a strictly increasing {order}-tuple")]
    NonCanonical { key: Vec<u32>, order: usize },
    #[error("unknown clique id {id} (registry holds {count})")]
    UnknownClique { id: usize, count: usize },
    #[error("unknown vertex {id} (table holds {count})")]
    UnknownVertex { id: u32, count: usize },
    #[error(transparent)]
    Sampling(#[from] SamplingError),
}

/// True when `key` is strictly increasing.
pub fn is_canonical(key: &[u32]) -> bool {
    key.windows(2).all(|w| w[0] < w[1])
}

/// Registry of all m-cliques of one fixed order `m`.
///
/// Keys live in a flat arena (`m` ids per clique) and the hash table stores
/// only clique ids, so an entry costs `4m + 4` bytes plus the weight tree.
#[derive(Clone)]
pub struct CliqueRegistry {
    order: usize,
    keys: Vec<u32>,
    table: HashTable<u32>,
    hasher: FxBuildHasher,
    weights: WeightTree,
    born: Vec<u64>,
}

impl std::fmt::Debug for CliqueRegistry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CliqueRegistry")
            .field("order", &self.order)
            .field("len", &self.len())
            .field("total", &self.total())
            .finish()
    }
}

impl CliqueRegistry {
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "clique order must be positive");
        Self {
            order,
            keys: Vec::new(),
            table: HashTable::new(),
            hasher: FxBuildHasher,
            weights: WeightTree::new(),
            born: Vec::new(),
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.born.len()
    }

    pub fn is_empty(&self) -> bool {
        self.born.is_empty()
    }

    /// Sum of all clique weights.
    pub fn total(&self) -> u64 {
        self.weights.total()
    }

    pub fn weight(&self, id: usize) -> Option<u64> {
        self.weights.weight(id)
    }

    pub fn weights(&self) -> &[u64] {
        self.weights.weights()
    }

    /// Step index at which the clique was created (0 for the seed clique).
    pub fn born_at(&self, id: usize) -> Option<u64> {
        self.born.get(id).copied()
    }

    pub fn key(&self, id: usize) -> Option<&[u32]> {
        let start = id.checked_mul(self.order)?;
        self.keys.get(start..start + self.order)
    }

    fn key_unchecked(keys: &[u32], order: usize, id: u32) -> &[u32] {
        let start = id as usize * order;
        &keys[start..start + order]
    }

    fn hash_key(hasher: &FxBuildHasher, key: &[u32]) -> u64 {
        let mut h = hasher.build_hasher();
        for &v in key {
            h.write_u32(v);
        }
        h.finish()
    }

    fn check_key(&self, key: &[u32]) -> Result<(), RegistryError> {
        if key.len() != self.order || !is_canonical(key) {
            return Err(RegistryError::NonCanonical {
                key: key.to_vec(),
                order: self.order,
            });
        }
        Ok(())
    }

    pub fn find(&self, key: &[u32]) -> Option<usize> {
        if key.len() != self.order {
            return None;
        }
        let hash = Self::hash_key(&self.hasher, key);
        let keys = &self.keys;
        let order = self.order;
        self.table
            .find(hash, |&id| Self::key_unchecked(keys, order, id) == key)
            .map(|&id| id as usize)
    }

    /// Looks up `key`, inserting it with weight 1 when absent.
    ///
    /// Returns the clique id and whether it was created. Never changes the
    /// weight of an existing clique.
    pub fn ensure(&mut self, key: &[u32], step: u64) -> Result<(usize, bool), RegistryError> {
        self.check_key(key)?;
        let hash = Self::hash_key(&self.hasher, key);
        let order = self.order;
        let keys = &self.keys;
        if let Some(&id) = self
            .table
            .find(hash, |&id| Self::key_unchecked(keys, order, id) == key)
        {
            return Ok((id as usize, false));
        }
        let id = self.weights.append(1)?;
        let id32 = u32::try_from(id).expect("clique count exceeds u32 ids");
        self.keys.extend_from_slice(key);
        self.born.push(step);
        let hasher = &self.hasher;
        let keys = &self.keys;
        self.table.insert_unique(hash, id32, |&other| {
            Self::hash_key(hasher, Self::key_unchecked(keys, order, other))
        });
        Ok((id, true))
    }

    /// Adds one interaction to clique `id`; returns its new weight.
    pub fn bump(&mut self, id: usize) -> Result<u64, RegistryError> {
        self.weights
            .increment(id, 1)
            .map_err(|_| RegistryError::UnknownClique {
                id,
                count: self.len(),
            })?;
        Ok(self.weights.weight(id).expect("checked above"))
    }

    /// Draws a clique with probability proportional to its weight.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<usize, RegistryError> {
        Ok(self.weights.draw(rng)?)
    }

    pub fn histogram(&self, cutoff: u64) -> Histogram {
        Histogram::from_weights(self.weights().iter().copied(), cutoff)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[u32], u64)> + '_ {
        self.keys
            .chunks_exact(self.order)
            .zip(self.weights().iter().copied())
    }
}

/// Per-vertex weights and distinct-neighbor degrees.
///
/// Adjacency itself is the edge registry; this table only keeps counts.
#[derive(Debug, Clone, Default)]
pub struct VertexTable {
    weights: Vec<u64>,
    degrees: Vec<u32>,
    total: u64,
}

impl VertexTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn total_weight(&self) -> u64 {
        self.total
    }

    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    pub fn weight(&self, v: u32) -> Option<u64> {
        self.weights.get(v as usize).copied()
    }

    pub fn degree(&self, v: u32) -> Option<u32> {
        self.degrees.get(v as usize).copied()
    }

    /// New vertex with weight 1 and degree 0.
    pub fn add_vertex(&mut self) -> u32 {
        let id = u32::try_from(self.weights.len()).expect("vertex count exceeds u32 ids");
        self.weights.push(1);
        self.degrees.push(0);
        self.total += 1;
        id
    }

    pub fn bump(&mut self, v: u32) -> Result<u64, RegistryError> {
        let count = self.len();
        let w = self
            .weights
            .get_mut(v as usize)
            .ok_or(RegistryError::UnknownVertex { id: v, count })?;
        *w += 1;
        self.total += 1;
        Ok(*w)
    }

    /// Records a newly created edge between `a` and `b`.
    pub fn link(&mut self, a: u32, b: u32) -> Result<(), RegistryError> {
        let count = self.len();
        for v in [a, b] {
            if v as usize >= count {
                return Err(RegistryError::UnknownVertex { id: v, count });
            }
        }
        self.degrees[a as usize] += 1;
        self.degrees[b as usize] += 1;
        Ok(())
    }

    pub fn weight_histogram(&self, cutoff: u64) -> Histogram {
        Histogram::from_weights(self.weights.iter().copied(), cutoff)
    }

    pub fn degree_histogram(&self, cutoff: u64) -> Histogram {
        Histogram::from_weights(self.degrees.iter().map(|&d| d as u64), cutoff)
    }
}

/// Counts of items per integer value. Values up to `cutoff` are binned
/// densely; larger values are kept exactly in `overflow`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Histogram {
    pub cutoff: u64,
    /// `counts[w - 1]` is the number of items with value `w`, for `w <= cutoff`.
    /// Value 0 (isolated vertex degree) is kept in `zero`.
    pub counts: Vec<u64>,
    #[serde(default)]
    pub zero: u64,
    pub overflow: BTreeMap<u64, u64>,
}

impl Histogram {
    pub fn new(cutoff: u64) -> Self {
        let cutoff = cutoff.max(1);
        Self {
            cutoff,
            counts: Vec::new(),
            zero: 0,
            overflow: BTreeMap::new(),
        }
    }

    pub fn from_weights<I: IntoIterator<Item = u64>>(values: I, cutoff: u64) -> Self {
        let mut h = Self::new(cutoff);
        for v in values {
            h.add(v, 1);
        }
        h.trim();
        h
    }

    pub fn add(&mut self, value: u64, count: u64) {
        if value == 0 {
            self.zero += count;
        } else if value <= self.cutoff {
            let i = (value - 1) as usize;
            if self.counts.len() <= i {
                self.counts.resize(i + 1, 0);
            }
            self.counts[i] += count;
        } else {
            *self.overflow.entry(value).or_default() += count;
        }
    }

    fn trim(&mut self) {
        while self.counts.last() == Some(&0) {
            self.counts.pop();
        }
    }

    pub fn count(&self, value: u64) -> u64 {
        if value == 0 {
            self.zero
        } else if value <= self.cutoff {
            self.counts.get((value - 1) as usize).copied().unwrap_or(0)
        } else {
            self.overflow.get(&value).copied().unwrap_or(0)
        }
    }

    /// Nonzero `(value, count)` pairs in increasing value order.
    pub fn iter(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        let zero = (self.zero > 0).then_some((0, self.zero));
        zero.into_iter()
            .chain(
                self.counts
                    .iter()
                    .enumerate()
                    .filter(|(_, &c)| c > 0)
                    .map(|(i, &c)| (i as u64 + 1, c)),
            )
            .chain(self.overflow.iter().map(|(&w, &c)| (w, c)))
    }

    /// Items binned below or at the cutoff (including value 0).
    pub fn binned_items(&self) -> u64 {
        self.zero + self.counts.iter().sum::<u64>()
    }

    /// Items above the cutoff.
    pub fn overflow_items(&self) -> u64 {
        self.overflow.values().sum()
    }

    pub fn items(&self) -> u64 {
        self.binned_items() + self.overflow_items()
    }

    /// Σ value × count over all items.
    pub fn mass(&self) -> u64 {
        self.iter().map(|(w, c)| w * c).sum()
    }

    /// Σ value × count over items above the cutoff.
    pub fn overflow_mass(&self) -> u64 {
        self.overflow.iter().map(|(w, c)| w * c).sum()
    }

    pub fn max_value(&self) -> u64 {
        self.iter().last().map(|(w, _)| w).unwrap_or(0)
    }
}
