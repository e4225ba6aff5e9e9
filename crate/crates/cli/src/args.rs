use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{parse_checkpoints, RunConfig};
use crate::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "cliqueweight",
    version,
    about = "Clique-weight preferential attachment simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run replications and write snapshot files plus a manifest.
    Simulate(Flags),
    /// Print limit constants, exponents and sequence tables.
    Theory(Flags),
    /// Compare a run directory with the limit sequences.
    Compare {
        run_dir: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
    /// Check the one-step expectation formulas against enumeration and sampling.
    Oracle(Flags),
    /// Re-hash every file listed in a run manifest.
    ManifestVerify { run_dir: PathBuf },
}

/// Settings shared by the verbs. Unset flags fall back to `--config`, then
/// to the built-in defaults.
#[derive(Debug, Default, Clone, Args)]
pub struct Flags {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Interaction size N.
    #[arg(long)]
    pub n_model: Option<usize>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long)]
    pub steps: Option<u64>,
    /// Number of replications.
    #[arg(long)]
    pub seeds: Option<u64>,
    #[arg(long)]
    pub seed_base: Option<u64>,
    /// Comma-separated step counts; empty for the geometric schedule.
    #[arg(long)]
    pub checkpoints: Option<String>,
    /// Largest value binned individually in histograms.
    #[arg(long)]
    pub cutoff: Option<u64>,
    /// Track sub-cliques of every order.
    #[arg(long)]
    pub track_all_levels: bool,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Largest index in theory tables and reference sequences.
    #[arg(long)]
    pub max_index: Option<usize>,
    /// Fit window or gap range as `kind=lo:hi` (vertex, edge, clique, degree, gap); repeatable.
    #[arg(long)]
    pub window: Vec<String>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Monte Carlo replications for the oracle suite.
    #[arg(long)]
    pub replications: Option<u64>,
    /// Minimum mean count per replication for a slope-fit point.
    #[arg(long)]
    pub min_count: Option<f64>,
}

impl Flags {
    /// Defaults, overridden by the config file, overridden by flags.
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let base = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        self.apply(base)
    }

    /// Applies the config file (if any) and flags on top of `base`.
    pub fn resolve_onto(&self, base: RunConfig) -> Result<RunConfig, CliError> {
        let base = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => base,
        };
        self.apply(base)
    }

    fn apply(&self, mut c: RunConfig) -> Result<RunConfig, CliError> {
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = &self.$field {
                    c.$field = v.clone();
                }
            )*};
        }
        set!(
            n_model,
            p,
            q,
            r,
            steps,
            seeds,
            seed_base,
            cutoff,
            out,
            max_index,
            jobs,
            replications,
            min_count
        );
        if let Some(text) = &self.checkpoints {
            c.checkpoints = parse_checkpoints(text)?;
        }
        if self.track_all_levels {
            c.track_all_levels = true;
        }
        for w in &self.window {
            c.set_window(w)?;
        }
        Ok(c)
    }
}
