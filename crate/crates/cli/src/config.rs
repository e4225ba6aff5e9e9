//! Flat `key = value` run configuration. Command-line flags override the
//! file, the file overrides the defaults.

use std::path::{Path, PathBuf};

use cliqueweight::analysis::CompareOptions;
use cliqueweight::ModelParams;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub n_model: usize,
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub steps: u64,
    /// Number of replications; replication `i` uses stream `i`.
    pub seeds: u64,
    pub seed_base: u64,
    /// Empty means the geometric default schedule.
    pub checkpoints: Vec<u64>,
    pub cutoff: u64,
    pub track_all_levels: bool,
    pub out: PathBuf,
    pub max_index: usize,
    /// Worker threads; 0 uses every core.
    pub jobs: usize,
    /// Monte Carlo replications for the oracle suite.
    pub replications: u64,
    pub gap_range: (u64, u64),
    pub vertex_window: (u64, u64),
    pub edge_window: (u64, u64),
    pub clique_window: (u64, u64),
    pub degree_window: (u64, u64),
    pub min_count: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let model = ModelParams::default();
        let opts = CompareOptions::default();
        Self {
            n_model: model.n_model,
            p: model.p,
            q: model.q,
            r: model.r,
            steps: model.steps,
            seeds: 1,
            seed_base: 1,
            checkpoints: Vec::new(),
            cutoff: model.cutoff,
            track_all_levels: false,
            out: PathBuf::from("run"),
            max_index: 1000,
            jobs: 0,
            replications: 100_000,
            gap_range: opts.gap_range,
            vertex_window: opts.vertex_window,
            edge_window: opts.edge_window,
            clique_window: opts.clique_window,
            degree_window: opts.degree_window,
            min_count: opts.min_count,
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text)
            .map_err(|e| CliError::Usage(format!("config: {}", e.to_string().trim_end())))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn serialize(&self) -> String {
        toml::to_string(self).expect("config is plain data")
    }

    pub fn model(&self) -> ModelParams {
        ModelParams {
            n_model: self.n_model,
            p: self.p,
            q: self.q,
            r: self.r,
            steps: self.steps,
            track_all_levels: self.track_all_levels,
            cutoff: self.cutoff,
            checkpoints: self.checkpoints.clone(),
        }
    }

    pub fn compare_options(&self) -> CompareOptions {
        CompareOptions {
            gap_range: self.gap_range,
            vertex_window: self.vertex_window,
            edge_window: self.edge_window,
            clique_window: self.clique_window,
            degree_window: self.degree_window,
            min_count: self.min_count,
            table_max: CompareOptions::default().table_max,
        }
    }

    /// Checks everything a run depends on; errors name the offending key.
    pub fn validate(&self) -> Result<(), CliError> {
        self.model()
            .validate()
            .map_err(|e| CliError::Usage(e.to_string()))?;
        if self.seeds == 0 {
            return Err(CliError::Usage(
                "seeds: need at least one replication".into(),
            ));
        }
        if self.replications < 2 {
            return Err(CliError::Usage("replications: need at least 2".into()));
        }
        for (key, (lo, hi)) in [
            ("gap_range", self.gap_range),
            ("vertex_window", self.vertex_window),
            ("edge_window", self.edge_window),
            ("clique_window", self.clique_window),
            ("degree_window", self.degree_window),
        ] {
            if lo == 0 || lo > hi {
                return Err(CliError::Usage(format!(
                    "{key}: need 1 <= lo <= hi, got {lo}:{hi}"
                )));
            }
        }
        if self.min_count.is_nan() || self.min_count < 0.0 {
            return Err(CliError::Usage("min_count: must be nonnegative".into()));
        }
        Ok(())
    }

    /// Applies a `kind=lo:hi` window override.
    pub fn set_window(&mut self, spec: &str) -> Result<(), CliError> {
        let bad = || CliError::Usage(format!("window: expected kind=lo:hi, got {spec:?}"));
        let (kind, range) = spec.split_once('=').ok_or_else(bad)?;
        let (lo, hi) = range.split_once(':').ok_or_else(bad)?;
        let w = (
            lo.trim().parse().map_err(|_| bad())?,
            hi.trim().parse().map_err(|_| bad())?,
        );
        match kind.trim() {
            "vertex" => self.vertex_window = w,
            "edge" => self.edge_window = w,
            "clique" | "triangle" => self.clique_window = w,
            "degree" => self.degree_window = w,
            "gap" => self.gap_range = w,
            other => {
                return Err(CliError::Usage(format!(
                    "window: unknown kind {other:?} (vertex, edge, clique, degree, gap)"
                )))
            }
        }
        Ok(())
    }
}

/// Comma-separated checkpoint list; empty selects the default schedule.
pub fn parse_checkpoints(text: &str) -> Result<Vec<u64>, CliError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| CliError::Usage(format!("checkpoints: {s:?} is not a step count")))
        })
        .collect()
}
