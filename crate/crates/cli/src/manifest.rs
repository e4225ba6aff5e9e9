//! Run manifest: everything needed to reproduce a run directory, plus a
//! SHA-256 inventory of the files in it.

use std::io::Read;
use std::path::{Path, PathBuf};

use cliqueweight::ModelParams;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::CliError;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    /// Path relative to the run directory, `/`-separated.
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedEntry {
    pub seed: u64,
    pub stream: u64,
    pub dir: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub artifact_version: String,
    pub generator: String,
    pub config: RunConfig,
    pub params: ModelParams,
    pub seeds: Vec<SeedEntry>,
    pub checkpoints: Vec<u64>,
    pub started: String,
    pub finished: String,
    /// Set when any worker failed; `errors` says why.
    pub partial: bool,
    pub errors: Vec<String>,
    pub files: Vec<FileEntry>,
}

impl RunManifest {
    pub fn load(dir: &Path) -> Result<Self, CliError> {
        let path = dir.join(MANIFEST_FILE);
        let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Corrupt(vec![format!("{}: {e}", path.display())]))
    }

    pub fn store(&self, dir: &Path) -> Result<(), CliError> {
        let path = dir.join(MANIFEST_FILE);
        let mut text = serde_json::to_string_pretty(self).expect("manifest is plain data");
        text.push('\n');
        std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))
    }

    pub fn entry(&self, path: &str) -> Option<&FileEntry> {
        self.files.iter().find(|f| f.path == path)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

pub fn file_entry(root: &Path, rel: &str) -> Result<FileEntry, CliError> {
    let path = root.join(rel);
    let mut file = std::fs::File::open(&path).map_err(|e| CliError::io(&path, e))?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    let mut bytes = 0u64;
    loop {
        let k = file.read(&mut buf).map_err(|e| CliError::io(&path, e))?;
        if k == 0 {
            break;
        }
        hasher.update(&buf[..k]);
        bytes += k as u64;
    }
    Ok(FileEntry {
        path: rel.to_string(),
        bytes,
        sha256: format!("{:x}", hasher.finalize()),
    })
}

/// Re-hashes every inventoried file. Returns one line per problem.
pub fn verify(dir: &Path, manifest: &RunManifest) -> Vec<String> {
    let mut problems = Vec::new();
    if manifest.partial {
        problems.push(format!("run is partial: {}", manifest.errors.join("; ")));
    }
    for f in &manifest.files {
        match file_entry(dir, &f.path) {
            Ok(now) if now.sha256 == f.sha256 && now.bytes == f.bytes => {}
            Ok(_) => problems.push(format!("{}: digest mismatch", f.path)),
            Err(e) => problems.push(format!("{}: {e}", f.path)),
        }
    }
    problems
}

pub fn rel_path(parts: &[&str]) -> String {
    parts.join("/")
}

pub fn abs_path(root: &Path, rel: &str) -> PathBuf {
    rel.split('/').fold(root.to_path_buf(), |p, s| p.join(s))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_digest() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn verify_detects_changes() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("a.txt"), "one\n").unwrap();
        let entry = file_entry(dir.path(), "a.txt").unwrap();
        assert_eq!(entry.sha256, sha256_hex(b"one\n"));
        let manifest = RunManifest {
            artifact_version: ARTIFACT_VERSION.into(),
            generator: String::new(),
            config: RunConfig::default(),
            params: ModelParams::default(),
            seeds: vec![],
            checkpoints: vec![],
            started: String::new(),
            finished: String::new(),
            partial: false,
            errors: vec![],
            files: vec![entry],
        };
        manifest.store(dir.path()).unwrap();
        let loaded = RunManifest::load(dir.path()).unwrap();
        assert_eq!(loaded, manifest);
        assert!(verify(dir.path(), &loaded).is_empty());
        std::fs::write(dir.path().join("a.txt"), "two\n").unwrap();
        assert_eq!(
            verify(dir.path(), &loaded),
            vec!["a.txt: digest mismatch".to_string()]
        );
        std::fs::remove_file(dir.path().join("a.txt")).unwrap();
        assert_eq!(verify(dir.path(), &loaded).len(), 1);
    }
}
