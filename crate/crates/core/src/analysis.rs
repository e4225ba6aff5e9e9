//! Empirical weight distributions against the limit laws: normalization,
//! gap tables, log-log slope fits and convergence of the growth ratios.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::evolution::{ModelParams, Snapshot, Trajectory};
use crate::registry::Histogram;
use crate::theory::{self, DerivedConstants, HypothesisWarning, TheoryError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("parameter mismatch: run has {run}, reference has {reference}")]
    ParamMismatch { run: String, reference: String },
    #[error(transparent)]
    Theory(#[from] TheoryError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightKind {
    /// X(n,w) / V_n
    Vertex,
    /// E(n,v) / E_n
    Edge,
    /// K(n,w) / K_n
    Clique,
    /// Distinct-neighbor degree counts / V_n
    Degree,
}

impl WeightKind {
    pub const WEIGHTS: [WeightKind; 3] = [WeightKind::Vertex, WeightKind::Edge, WeightKind::Clique];

    pub fn name(self) -> &'static str {
        match self {
            WeightKind::Vertex => "vertex",
            WeightKind::Edge => "edge",
            WeightKind::Clique => "clique",
            WeightKind::Degree => "degree",
        }
    }

    fn histogram(self, snap: &Snapshot) -> &Histogram {
        match self {
            WeightKind::Vertex => snap.vertex_weights(),
            WeightKind::Edge => snap.edge_weights(),
            WeightKind::Clique => snap.top_weights(),
            WeightKind::Degree => &snap.degrees,
        }
    }

    fn denominator(self, snap: &Snapshot) -> u64 {
        match self {
            WeightKind::Vertex | WeightKind::Degree => snap.vertices,
            WeightKind::Edge => snap.edges,
            WeightKind::Clique => snap.top,
        }
    }
}

/// Fractions of items at each value up to the histogram cutoff.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalDistribution {
    pub kind: WeightKind,
    pub n: u64,
    pub denominator: u64,
    /// `(value, count)` for every binned value with a nonzero count.
    pub counts: Vec<(u64, u64)>,
    /// Items above the cutoff (excluded from `counts`).
    pub overflow_count: u64,
}

impl EmpiricalDistribution {
    pub fn fraction(&self, value: u64) -> f64 {
        self.counts
            .binary_search_by_key(&value, |&(v, _)| v)
            .map(|i| self.counts[i].1 as f64 / self.denominator as f64)
            .unwrap_or(0.0)
    }

    pub fn count(&self, value: u64) -> u64 {
        self.counts
            .binary_search_by_key(&value, |&(v, _)| v)
            .map(|i| self.counts[i].1)
            .unwrap_or(0)
    }

    pub fn overflow_fraction(&self) -> f64 {
        self.overflow_count as f64 / self.denominator as f64
    }
}

/// Empirical distribution of `kind` in `snap`.
pub fn normalize(
    snap: &Snapshot,
    kind: WeightKind,
) -> Result<EmpiricalDistribution, AnalysisError> {
    let denominator = kind.denominator(snap);
    if denominator == 0 {
        return Err(AnalysisError::Domain(format!(
            "no {} items to normalize",
            kind.name()
        )));
    }
    let hist = kind.histogram(snap);
    let counts: Vec<(u64, u64)> = hist.iter().filter(|&(v, _)| v <= hist.cutoff).collect();
    Ok(EmpiricalDistribution {
        kind,
        n: snap.n,
        denominator,
        counts,
        overflow_count: hist.overflow_items(),
    })
}

/// Least-squares line through `(ln index, ln value)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual in log space.
    pub residual: f64,
    pub points: usize,
    pub window: (u64, u64),
}

/// Fits `ln value = slope · ln index + intercept` over indices in
/// `window` (inclusive) whose count is at least `min_count` and whose
/// value is positive. Points are `(index, value, count)`.
pub fn fit_slope<I>(
    points: I,
    window: (u64, u64),
    min_count: f64,
) -> Result<SlopeFit, AnalysisError>
where
    I: IntoIterator<Item = (u64, f64, f64)>,
{
    let (xs, ys): (Vec<f64>, Vec<f64>) = points
        .into_iter()
        .filter(|&(i, v, c)| i >= window.0 && i <= window.1 && i > 0 && v > 0.0 && c >= min_count)
        .map(|(i, v, _)| ((i as f64).ln(), v.ln()))
        .unzip();
    let m = xs.len();
    if m < 3 {
        return Err(AnalysisError::Domain(format!(
            "slope fit over {window:?} needs at least 3 usable points, found {m}"
        )));
    }
    let mf = m as f64;
    let mx = xs.iter().sum::<f64>() / mf;
    let my = ys.iter().sum::<f64>() / mf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(AnalysisError::Domain(
            "slope fit needs distinct indices".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - (slope * x + intercept)).powi(2))
        .sum();
    Ok(SlopeFit {
        slope,
        intercept,
        residual: (ss / mf).sqrt(),
        points: m,
        window,
    })
}

/// Slope of a limit sequence over every integer index in `window`.
pub fn fit_theoretical_slope(
    dist: &theory::TheoreticalDistribution,
    window: (u64, u64),
) -> Result<SlopeFit, AnalysisError> {
    fit_slope(
        (window.0..=window.1.min(dist.max_index())).map(|i| (i, dist.at(i), f64::INFINITY)),
        window,
        0.0,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: u64,
    pub vertices_per_step: f64,
    pub edges_per_step: f64,
    pub cliques_per_step: f64,
}

/// `(n, V_n/n, E_n/n, K_n/n)` for every snapshot with `n >= 1`.
pub fn convergence_series(snapshots: &[Snapshot]) -> Vec<ConvergenceRow> {
    snapshots
        .iter()
        .filter(|s| s.n >= 1)
        .map(|s| {
            let n = s.n as f64;
            ConvergenceRow {
                n: s.n,
                vertices_per_step: s.vertices as f64 / n,
                edges_per_step: s.edges as f64 / n,
                cliques_per_step: s.top as f64 / n,
            }
        })
        .collect()
}

/// Reference values per kind, indexed from 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reference {
    pub n_model: usize,
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub vertex: Option<Vec<f64>>,
    pub edge: Option<Vec<f64>>,
    pub clique: Vec<f64>,
}

impl Reference {
    /// Limit laws up to `max_index`. Vertex and edge laws exist for N = 3 only.
    pub fn from_theory(params: &ModelParams, max_index: usize) -> Result<Self, AnalysisError> {
        let c = DerivedConstants::from_params(params)?;
        let three = params.n_model == 3;
        Ok(Self {
            n_model: params.n_model,
            p: params.p,
            q: params.q,
            r: params.r,
            vertex: three.then(|| theory::vertex_weight_dist(&c, max_index).values),
            edge: three.then(|| theory::edge_weight_dist(&c, max_index).values),
            clique: theory::clique_weight_dist(&c, max_index).values,
        })
    }

    pub fn values(&self, kind: WeightKind) -> Option<&[f64]> {
        match kind {
            WeightKind::Vertex => self.vertex.as_deref(),
            WeightKind::Edge => self.edge.as_deref(),
            WeightKind::Clique => Some(&self.clique),
            WeightKind::Degree => None,
        }
    }

    pub fn at(&self, kind: WeightKind, index: u64) -> Option<f64> {
        let v = self.values(kind)?;
        Some(if index == 0 {
            0.0
        } else {
            v.get(index as usize - 1).copied().unwrap_or(0.0)
        })
    }

    fn describe(n_model: usize, p: f64, q: f64, r: f64) -> String {
        format!("N={n_model} p={p} q={q} r={r}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareOptions {
    /// Indices over which sup gaps are taken.
    pub gap_range: (u64, u64),
    /// Slope-fit windows per kind.
    pub vertex_window: (u64, u64),
    pub edge_window: (u64, u64),
    pub clique_window: (u64, u64),
    pub degree_window: (u64, u64),
    /// Minimum mean count per replication for an index to enter a fit.
    pub min_count: f64,
    /// Largest index listed in the per-index tables.
    pub table_max: u64,
}

impl Default for CompareOptions {
    fn default() -> Self {
        Self {
            gap_range: (1, 20),
            vertex_window: (3, 30),
            edge_window: (3, 30),
            clique_window: (2, 20),
            degree_window: (4, 60),
            min_count: 10.0,
            table_max: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub index: u64,
    /// Mean over replications of count / denominator.
    pub empirical: f64,
    pub theoretical: Option<f64>,
    pub gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KindReport {
    pub kind: WeightKind,
    pub rows: Vec<TableRow>,
    /// Mean overflow fraction across replications.
    pub overflow_fraction: f64,
    /// Largest gap over the configured index range, at the final checkpoint.
    pub sup_gap: Option<f64>,
    pub empirical_slope: Option<SlopeFit>,
    /// Fit of the reference sequence over the same window.
    pub reference_slope: Option<SlopeFit>,
    /// -(1 + 1/rate) from the asymptotic law.
    pub asymptotic_slope: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupGapRow {
    pub n: u64,
    pub vertex: Option<f64>,
    pub edge: Option<f64>,
    pub clique: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub params: ModelParams,
    pub replications: usize,
    pub final_n: u64,
    pub constants: DerivedConstants,
    /// Limits of V_n/n, E_n/n, K_n/n: p, A, B.
    pub targets: (f64, f64, f64),
    pub kinds: Vec<KindReport>,
    pub sup_gaps: Vec<SupGapRow>,
    /// Replication means of the growth ratios.
    pub convergence: Vec<ConvergenceRow>,
    pub warnings: Vec<HypothesisWarning>,
    pub options: CompareOptions,
}

impl ComparisonReport {
    pub fn kind(&self, kind: WeightKind) -> Option<&KindReport> {
        self.kinds.iter().find(|k| k.kind == kind)
    }
}

/// `(index, mean fraction, mean count)` rows.
type MeanRows = Vec<(u64, f64, f64)>;

/// Replication-mean fractions of `kind` at checkpoint `idx`, plus the mean
/// overflow fraction.
fn mean_distribution(
    trajectories: &[Trajectory],
    idx: usize,
    kind: WeightKind,
) -> Result<(MeanRows, f64), AnalysisError> {
    use std::collections::BTreeMap;
    let reps = trajectories.len() as f64;
    let mut acc: BTreeMap<u64, (f64, f64)> = BTreeMap::new();
    let mut overflow = 0.0;
    for t in trajectories {
        let d = normalize(&t.snapshots[idx], kind)?;
        for &(v, c) in &d.counts {
            let e = acc.entry(v).or_default();
            e.0 += c as f64 / d.denominator as f64 / reps;
            e.1 += c as f64 / reps;
        }
        overflow += d.overflow_fraction() / reps;
    }
    Ok((
        acc.into_iter().map(|(v, (f, c))| (v, f, c)).collect(),
        overflow,
    ))
}

fn sup_gap(
    dist: &[(u64, f64, f64)],
    reference: &Reference,
    kind: WeightKind,
    range: (u64, u64),
) -> Option<f64> {
    reference.values(kind)?;
    let lookup = |i: u64| {
        dist.binary_search_by_key(&i, |&(v, _, _)| v)
            .map(|k| dist[k].1)
            .unwrap_or(0.0)
    };
    (range.0..=range.1)
        .map(|i| (lookup(i) - reference.at(kind, i).unwrap_or(0.0)).abs())
        .reduce(f64::max)
}

/// Compares replications of one parameter set against `reference`.
///
/// All trajectories must share the checkpoint schedule. Empirical values are
/// replication means of per-run fractions.
pub fn compare(
    trajectories: &[Trajectory],
    params: &ModelParams,
    reference: &Reference,
    options: &CompareOptions,
) -> Result<ComparisonReport, AnalysisError> {
    if (reference.n_model, reference.p, reference.q, reference.r)
        != (params.n_model, params.p, params.q, params.r)
    {
        return Err(AnalysisError::ParamMismatch {
            run: Reference::describe(params.n_model, params.p, params.q, params.r),
            reference: Reference::describe(
                reference.n_model,
                reference.p,
                reference.q,
                reference.r,
            ),
        });
    }
    let first = trajectories
        .first()
        .ok_or_else(|| AnalysisError::Domain("no trajectories to compare".into()))?;
    let schedule: Vec<u64> = first.snapshots.iter().map(|s| s.n).collect();
    if schedule.is_empty() {
        return Err(AnalysisError::Domain("trajectory without snapshots".into()));
    }
    for t in trajectories {
        if t.snapshots.iter().map(|s| s.n).ne(schedule.iter().copied()) {
            return Err(AnalysisError::Domain(
                "replications have different checkpoint schedules".into(),
            ));
        }
        if t.snapshots.iter().any(|s| s.n_model != params.n_model) {
            return Err(AnalysisError::ParamMismatch {
                run: format!("snapshots with N={}", t.snapshots[0].n_model),
                reference: format!("N={}", params.n_model),
            });
        }
    }
    let constants = DerivedConstants::from_params(params)?;
    let reps = trajectories.len() as f64;
    let last = schedule.len() - 1;

    let mut kinds = Vec::new();
    for kind in [
        WeightKind::Degree,
        WeightKind::Vertex,
        WeightKind::Edge,
        WeightKind::Clique,
    ] {
        let (dist, overflow_fraction) = mean_distribution(trajectories, last, kind)?;
        let theo = |i: u64| reference.at(kind, i);
        let rows = dist
            .iter()
            .filter(|&&(v, _, _)| v <= options.table_max)
            .map(|&(v, f, _)| {
                let t = theo(v);
                TableRow {
                    index: v,
                    empirical: f,
                    theoretical: t,
                    gap: t.map(|t| (f - t).abs()),
                }
            })
            .collect();
        let window = match kind {
            WeightKind::Vertex => options.vertex_window,
            WeightKind::Edge => options.edge_window,
            WeightKind::Clique => options.clique_window,
            WeightKind::Degree => options.degree_window,
        };
        let empirical_slope = fit_slope(dist.iter().copied(), window, options.min_count).ok();
        let reference_slope = reference.values(kind).and_then(|vals| {
            fit_slope(
                (window.0..=window.1).map(|i| {
                    (
                        i,
                        vals.get(i as usize - 1).copied().unwrap_or(0.0),
                        f64::INFINITY,
                    )
                }),
                window,
                0.0,
            )
            .ok()
        });
        let asymptotic_slope = match kind {
            WeightKind::Vertex if reference.vertex.is_some() => Some(-constants.vertex_exponent),
            WeightKind::Edge if reference.edge.is_some() => Some(-constants.edge_exponent),
            WeightKind::Clique => Some(-constants.clique_exponent),
            _ => None,
        };
        kinds.push(KindReport {
            kind,
            rows,
            overflow_fraction,
            sup_gap: sup_gap(&dist, reference, kind, options.gap_range),
            empirical_slope,
            reference_slope,
            asymptotic_slope,
        });
    }

    let mut sup_gaps = Vec::new();
    for (idx, &n) in schedule.iter().enumerate() {
        let gap = |kind| -> Result<Option<f64>, AnalysisError> {
            let (d, _) = mean_distribution(trajectories, idx, kind)?;
            Ok(sup_gap(&d, reference, kind, options.gap_range))
        };
        sup_gaps.push(SupGapRow {
            n,
            vertex: gap(WeightKind::Vertex)?,
            edge: gap(WeightKind::Edge)?,
            clique: gap(WeightKind::Clique)?,
        });
    }

    let mut convergence = convergence_series(&first.snapshots);
    for row in convergence.iter_mut() {
        *row = ConvergenceRow {
            n: row.n,
            vertices_per_step: 0.0,
            edges_per_step: 0.0,
            cliques_per_step: 0.0,
        };
    }
    for t in trajectories {
        for (row, r) in convergence.iter_mut().zip(convergence_series(&t.snapshots)) {
            row.vertices_per_step += r.vertices_per_step / reps;
            row.edges_per_step += r.edges_per_step / reps;
            row.cliques_per_step += r.cliques_per_step / reps;
        }
    }

    Ok(ComparisonReport {
        params: params.clone(),
        replications: trajectories.len(),
        final_n: schedule[last],
        targets: (params.p, constants.edge_growth, constants.clique_growth),
        constants,
        kinds,
        sup_gaps,
        convergence,
        warnings: theory::hypothesis_warnings(params),
        options: options.clone(),
    })
}
