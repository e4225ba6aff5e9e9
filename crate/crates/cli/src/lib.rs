//! Command-line front end: configuration, multi-seed runs with snapshot
//! files and a digest manifest, theory tables, comparison reports and the
//! one-step oracle suite.

use std::path::{Path, PathBuf};

pub mod args;
pub mod commands;
pub mod config;
pub mod manifest;
pub mod report;
pub mod snapfile;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Domain(String),
    #[error("run directory has problems:\n  {}", .0.join("\n  "))]
    Corrupt(Vec<String>),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// 2 for usage errors, 1 for everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}
