//! The N-interactions evolution engine.
//!
//! Each step picks `N` vertices (a new vertex plus `N - 1` old ones with
//! probability `p`, otherwise `N` old ones), completes them into an N-clique
//! and adds one interaction to every tracked sub-clique.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;
use thiserror::Error;

use crate::registry::{is_canonical, CliqueRegistry, Histogram, RegistryError, VertexTable};
use crate::sampling::{uniform_subset, RandomSource, SamplingError, Subset};

/// Largest supported interaction size.
pub const MAX_N: usize = 16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvolutionError {
    #[error("invalid parameter `{key}`: {reason}")]
    InvalidParams { key: &'static str, reason: String },
    #[error("invalid forced step: {0}")]
    BadForcedStep(String),
    #[error(transparent)]
    Registry(#[from] RegistryError),
    #[error(transparent)]
    Sampling(#[from] SamplingError),
}

/// Model and run parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Interaction size N (3 for the three-interactions model).
    pub n_model: usize,
    /// Probability of adding a new vertex.
    pub p: f64,
    /// Probability of choosing an old N-clique by weight (no new vertex).
    pub q: f64,
    /// Probability of choosing an (N-1)-clique by weight (new vertex).
    pub r: f64,
    pub steps: u64,
    /// Track every level 1..=N instead of {1, 2, N-1, N}.
    pub track_all_levels: bool,
    /// Histogram values above this are kept in the exact overflow map.
    pub cutoff: u64,
    /// Explicit checkpoint steps; empty means the geometric default.
    pub checkpoints: Vec<u64>,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            n_model: 3,
            p: 0.5,
            q: 0.5,
            r: 0.5,
            steps: 100_000,
            track_all_levels: false,
            cutoff: 1000,
            checkpoints: Vec::new(),
        }
    }
}

impl ModelParams {
    pub fn three(p: f64, q: f64, r: f64) -> Self {
        Self {
            p,
            q,
            r,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), EvolutionError> {
        let bad = |key, reason: String| Err(EvolutionError::InvalidParams { key, reason });
        if !(3..=MAX_N).contains(&self.n_model) {
            return bad(
                "n-model",
                format!("must be in 3..={MAX_N}, got {}", self.n_model),
            );
        }
        if !(self.p > 0.0 && self.p <= 1.0) {
            return bad("p", format!("must satisfy 0 < p <= 1, got {}", self.p));
        }
        if !(0.0..=1.0).contains(&self.q) {
            return bad("q", format!("must lie in [0, 1], got {}", self.q));
        }
        if !(0.0..=1.0).contains(&self.r) {
            return bad("r", format!("must lie in [0, 1], got {}", self.r));
        }
        if self.cutoff == 0 {
            return bad("cutoff", "must be at least 1".into());
        }
        if self.checkpoints.iter().any(|&c| c > self.steps) {
            return bad("checkpoints", "checkpoint beyond the last step".into());
        }
        Ok(())
    }

    /// Clique orders with a registry (the vertex table covers order 1).
    pub fn tracked_levels(&self) -> Vec<usize> {
        let n = self.n_model;
        let mut levels: Vec<usize> = if self.track_all_levels {
            (1..=n).collect()
        } else {
            vec![1, 2, n - 1, n]
        };
        levels.sort_unstable();
        levels.dedup();
        levels
    }

    /// Sorted, deduplicated checkpoint steps, always ending with `steps`.
    pub fn checkpoint_schedule(&self) -> Vec<u64> {
        let mut points = if self.checkpoints.is_empty() {
            geometric_checkpoints(self.steps)
        } else {
            self.checkpoints.clone()
        };
        points.push(self.steps);
        points.sort_unstable();
        points.dedup();
        points
    }
}

/// Four log-spaced checkpoints per decade, `round(10^(k/4))`, below `steps`.
pub fn geometric_checkpoints(steps: u64) -> Vec<u64> {
    let mut out = Vec::new();
    for k in 0.. {
        let c = 10f64.powf(k as f64 / 4.0).round() as u64;
        if c >= steps {
            break;
        }
        if out.last() != Some(&c) {
            out.push(c);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StepKind {
    /// New vertex joins an (N-1)-clique drawn by weight.
    NewViaAttachment,
    /// New vertex joins N-1 old vertices chosen uniformly.
    NewViaUniform,
    /// An N-clique drawn by weight interacts again.
    OldViaTop,
    /// N old vertices chosen uniformly interact.
    OldViaUniform,
}

impl StepKind {
    pub const ALL: [StepKind; 4] = [
        StepKind::NewViaAttachment,
        StepKind::NewViaUniform,
        StepKind::OldViaTop,
        StepKind::OldViaUniform,
    ];

    pub fn adds_vertex(self) -> bool {
        matches!(self, StepKind::NewViaAttachment | StepKind::NewViaUniform)
    }

    /// Probability of this kind under `(p, q, r)`.
    pub fn probability(self, p: f64, q: f64, r: f64) -> f64 {
        match self {
            StepKind::NewViaAttachment => p * r,
            StepKind::NewViaUniform => p * (1.0 - r),
            StepKind::OldViaTop => (1.0 - p) * q,
            StepKind::OldViaUniform => (1.0 - p) * (1.0 - q),
        }
    }
}

impl fmt::Display for StepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            StepKind::NewViaAttachment => "new-via-attachment",
            StepKind::NewViaUniform => "new-via-uniform",
            StepKind::OldViaTop => "old-via-top",
            StepKind::OldViaUniform => "old-via-uniform",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelChange {
    pub level: usize,
    pub created: u32,
    pub bumped: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepOutcome {
    pub kind: StepKind,
    /// Sorted ids of the N interacting vertices.
    pub participants: Vec<u32>,
    /// One entry per tracked level, in increasing level order.
    pub changes: Vec<LevelChange>,
}

impl StepOutcome {
    pub fn change(&self, level: usize) -> Option<LevelChange> {
        self.changes.iter().copied().find(|c| c.level == level)
    }
}

/// Full model state after `steps_done()` interactions.
#[derive(Debug, Clone)]
pub struct GraphState {
    n_model: usize,
    steps_done: u64,
    vertices: VertexTable,
    // Indexed by clique order; slots 0 and 1 are unused.
    registries: Vec<Option<CliqueRegistry>>,
    levels: Vec<usize>,
}

impl GraphState {
    /// The seed graph: one N-clique with every tracked sub-clique at weight 1.
    pub fn new(params: &ModelParams) -> Result<Self, EvolutionError> {
        params.validate()?;
        let n = params.n_model;
        let levels = params.tracked_levels();
        let mut registries: Vec<Option<CliqueRegistry>> = (0..=n).map(|_| None).collect();
        for &m in levels.iter().filter(|&&m| m >= 2) {
            registries[m] = Some(CliqueRegistry::new(m));
        }
        let mut state = Self {
            n_model: n,
            steps_done: 0,
            vertices: VertexTable::new(),
            registries,
            levels,
        };
        for _ in 0..n {
            state.vertices.add_vertex();
        }
        let all: Subset = (0..n as u32).collect();
        for &m in state.levels.iter().rev().filter(|&&m| m >= 2) {
            let reg = state.registries[m].as_mut().expect("tracked level");
            for_each_subset(&all, m, |key| {
                reg.ensure(key, 0).map(|_| ())?;
                if m == 2 {
                    state.vertices.link(key[0], key[1])?;
                }
                Ok::<_, RegistryError>(())
            })?;
        }
        Ok(state)
    }

    pub fn n_model(&self) -> usize {
        self.n_model
    }

    /// Number of completed steps.
    pub fn steps_done(&self) -> u64 {
        self.steps_done
    }

    pub fn levels(&self) -> &[usize] {
        &self.levels
    }

    pub fn vertices(&self) -> &VertexTable {
        &self.vertices
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn registry(&self, order: usize) -> Option<&CliqueRegistry> {
        self.registries.get(order).and_then(Option::as_ref)
    }

    pub fn edges(&self) -> &CliqueRegistry {
        self.registry(2).expect("edges are always tracked")
    }

    /// Registry of (N-1)-cliques, the targets of weighted attachment.
    pub fn attachment(&self) -> &CliqueRegistry {
        self.registry(self.n_model - 1)
            .expect("attachment level is always tracked")
    }

    /// Registry of N-cliques.
    pub fn top(&self) -> &CliqueRegistry {
        self.registry(self.n_model)
            .expect("top level is always tracked")
    }

    pub fn adjacent(&self, a: u32, b: u32) -> bool {
        let key = if a < b { [a, b] } else { [b, a] };
        a != b && self.edges().find(&key).is_some()
    }

    /// Sum of weights at `order` (1 = vertices).
    pub fn level_total(&self, order: usize) -> Option<u64> {
        if order == 1 {
            Some(self.vertices.total_weight())
        } else {
            self.registry(order).map(CliqueRegistry::total)
        }
    }

    /// One random step.
    pub fn step<R: Rng + ?Sized>(
        &mut self,
        params: &ModelParams,
        rng: &mut R,
    ) -> Result<StepOutcome, EvolutionError> {
        let kind = if rng.gen_bool(params.p) {
            if rng.gen_bool(params.r) {
                StepKind::NewViaAttachment
            } else {
                StepKind::NewViaUniform
            }
        } else if rng.gen_bool(params.q) {
            StepKind::OldViaTop
        } else {
            StepKind::OldViaUniform
        };
        let n = self.n_model;
        let old: Subset = match kind {
            StepKind::NewViaAttachment => {
                let reg = self.attachment();
                let id = reg.draw(rng)?;
                reg.key(id)
                    .expect("drawn id exists")
                    .iter()
                    .copied()
                    .collect()
            }
            StepKind::NewViaUniform => uniform_subset(self.vertex_count(), n - 1, rng)?,
            StepKind::OldViaTop => {
                let reg = self.top();
                let id = reg.draw(rng)?;
                reg.key(id)
                    .expect("drawn id exists")
                    .iter()
                    .copied()
                    .collect()
            }
            StepKind::OldViaUniform => uniform_subset(self.vertex_count(), n, rng)?,
        };
        self.interact(kind, &old)
    }

    /// Applies a chosen step kind with chosen old participants.
    ///
    /// Only for oracle tests. `old` must be sorted; weighted kinds require it
    /// to be an existing clique of the corresponding level.
    pub fn apply_forced(
        &mut self,
        kind: StepKind,
        old: &[u32],
    ) -> Result<StepOutcome, EvolutionError> {
        let n = self.n_model;
        let want = if kind.adds_vertex() { n - 1 } else { n };
        if old.len() != want || !is_canonical(old) {
            return Err(EvolutionError::BadForcedStep(format!(
                "{kind} needs {want} sorted distinct vertices, got {old:?}"
            )));
        }
        if let Some(&v) = old.iter().find(|&&v| v as usize >= self.vertex_count()) {
            return Err(EvolutionError::BadForcedStep(format!(
                "vertex {v} does not exist"
            )));
        }
        match kind {
            StepKind::NewViaAttachment if self.attachment().find(old).is_none() => {
                return Err(EvolutionError::BadForcedStep(format!(
                    "{old:?} is not an attachment clique"
                )));
            }
            StepKind::OldViaTop if self.top().find(old).is_none() => {
                return Err(EvolutionError::BadForcedStep(format!(
                    "{old:?} is not a top clique"
                )));
            }
            _ => {}
        }
        self.interact(kind, old)
    }

    fn interact(&mut self, kind: StepKind, old: &[u32]) -> Result<StepOutcome, EvolutionError> {
        let step = self.steps_done + 1;
        let mut participants: Subset = old.iter().copied().collect();
        let mut vertex_change = LevelChange {
            level: 1,
            created: 0,
            bumped: 0,
        };
        for &v in old {
            self.vertices.bump(v)?;
            vertex_change.bumped += 1;
        }
        if kind.adds_vertex() {
            // The new id exceeds every old id, so the set stays sorted.
            participants.push(self.vertices.add_vertex());
            vertex_change.created += 1;
        }

        let mut changes: SmallVec<[LevelChange; 8]> = SmallVec::new();
        let vertices = &mut self.vertices;
        for &m in self.levels.iter().rev().filter(|&&m| m >= 2) {
            let reg = self.registries[m].as_mut().expect("tracked level");
            let mut change = LevelChange {
                level: m,
                created: 0,
                bumped: 0,
            };
            for_each_subset(&participants, m, |key| {
                let (id, created) = reg.ensure(key, step)?;
                if created {
                    change.created += 1;
                    if m == 2 {
                        vertices.link(key[0], key[1])?;
                    }
                } else {
                    reg.bump(id)?;
                    change.bumped += 1;
                }
                Ok::<_, RegistryError>(())
            })?;
            changes.push(change);
        }
        changes.push(vertex_change);
        changes.reverse();
        self.steps_done = step;
        Ok(StepOutcome {
            kind,
            participants: participants.to_vec(),
            changes: changes.into_vec(),
        })
    }

    pub fn snapshot(&self, cutoff: u64) -> Snapshot {
        let mut levels = BTreeMap::new();
        levels.insert(1, self.vertices.weight_histogram(cutoff));
        for &m in self.levels.iter().filter(|&&m| m >= 2) {
            levels.insert(
                m,
                self.registries[m]
                    .as_ref()
                    .expect("tracked")
                    .histogram(cutoff),
            );
        }
        Snapshot {
            n: self.steps_done,
            n_model: self.n_model,
            vertices: self.vertex_count() as u64,
            edges: self.edges().len() as u64,
            top: self.top().len() as u64,
            levels,
            degrees: self.vertices.degree_histogram(cutoff),
        }
    }
}

/// Calls `f` on every `m`-subset of the sorted slice `items`, in
/// lexicographic order.
pub fn for_each_subset<E, F>(items: &[u32], m: usize, mut f: F) -> Result<(), E>
where
    F: FnMut(&[u32]) -> Result<(), E>,
{
    let n = items.len();
    if m == 0 || m > n {
        return Ok(());
    }
    let mut idx: SmallVec<[usize; MAX_N]> = (0..m).collect();
    let mut key: SmallVec<[u32; MAX_N]> = idx.iter().map(|&i| items[i]).collect();
    loop {
        f(&key)?;
        // Advance the rightmost index that still has room.
        let mut i = m;
        while i > 0 && idx[i - 1] == n - m + (i - 1) {
            i -= 1;
        }
        if i == 0 {
            return Ok(());
        }
        idx[i - 1] += 1;
        for j in i..m {
            idx[j] = idx[j - 1] + 1;
        }
        for j in (i - 1)..m {
            key[j] = items[idx[j]];
        }
    }
}

/// Counts and weight histograms at one checkpoint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snapshot {
    /// Completed steps.
    pub n: u64,
    pub n_model: usize,
    /// V_n
    pub vertices: u64,
    /// E_n
    pub edges: u64,
    /// K_n (number of N-cliques)
    pub top: u64,
    /// Weight histogram per tracked level; level 1 holds vertex weights.
    pub levels: BTreeMap<usize, Histogram>,
    /// Distinct-neighbor degree histogram.
    pub degrees: Histogram,
}

impl Snapshot {
    pub fn level(&self, order: usize) -> Option<&Histogram> {
        self.levels.get(&order)
    }

    pub fn vertex_weights(&self) -> &Histogram {
        &self.levels[&1]
    }

    pub fn edge_weights(&self) -> &Histogram {
        &self.levels[&2]
    }

    pub fn top_weights(&self) -> &Histogram {
        &self.levels[&self.n_model]
    }
}

/// Snapshots of one replication. `aborted` is set when a lower layer failed
/// and the trajectory stopped early.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub stream: u64,
    pub snapshots: Vec<Snapshot>,
    pub aborted: Option<EvolutionError>,
}

impl Trajectory {
    pub fn last(&self) -> &Snapshot {
        self.snapshots
            .last()
            .expect("a trajectory has at least one snapshot")
    }
}

/// Runs one replication, handing each checkpoint snapshot to `on_snapshot`.
pub fn run_with<F, E>(
    params: &ModelParams,
    seed: u64,
    stream: u64,
    mut on_snapshot: F,
) -> Result<GraphState, RunError<E>>
where
    F: FnMut(&Snapshot) -> Result<(), E>,
{
    let mut state = GraphState::new(params).map_err(RunError::Model)?;
    let mut rng = RandomSource::new(seed, stream);
    for target in params.checkpoint_schedule() {
        while state.steps_done() < target {
            state.step(params, &mut rng).map_err(RunError::Model)?;
        }
        on_snapshot(&state.snapshot(params.cutoff)).map_err(RunError::Sink)?;
    }
    Ok(state)
}

#[derive(Debug, Error)]
pub enum RunError<E> {
    #[error(transparent)]
    Model(EvolutionError),
    #[error("snapshot sink failed: {0}")]
    Sink(E),
}

/// Runs one replication and collects every checkpoint snapshot.
pub fn run(params: &ModelParams, seed: u64, stream: u64) -> Result<Trajectory, EvolutionError> {
    params.validate()?;
    let mut snapshots = Vec::new();
    let res = run_with(params, seed, stream, |s| {
        snapshots.push(s.clone());
        Ok::<_, std::convert::Infallible>(())
    });
    let aborted = match res {
        Ok(_) => None,
        Err(RunError::Model(e)) => Some(e),
        Err(RunError::Sink(e)) => match e {},
    };
    Ok(Trajectory {
        stream,
        snapshots,
        aborted,
    })
}
