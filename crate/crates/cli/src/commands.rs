use std::path::{Path, PathBuf};

use cliqueweight::analysis::{compare, AnalysisError, ComparisonReport, Reference, WeightKind};
use cliqueweight::evolution::{run_with, RunError, Trajectory};
use cliqueweight::oracle::{run_suite, OracleReport};
use cliqueweight::sampling::GENERATOR_FAMILY;
use cliqueweight::theory::{self, hypothesis_warnings, DerivedConstants};
use rayon::prelude::*;
use serde::Serialize;

use crate::args::{Cli, Command, Flags};
use crate::config::RunConfig;
use crate::manifest::{self, abs_path, file_entry, rel_path, FileEntry, RunManifest, SeedEntry};
use crate::{report, snapfile, CliError};

pub const CONFIG_FILE: &str = "config.toml";

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn mkdir(path: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(path).map_err(|e| CliError::io(path, e))
}

fn seed_dir(stream: u64) -> String {
    format!("seed-{stream:03}")
}

fn snapshot_name(n: u64, ext: &str) -> String {
    format!("snapshot-{n:012}.{ext}")
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Failed(format!("thread pool: {e}")))
}

/// Runs one replication, writing a text and a JSON file per checkpoint.
fn simulate_seed(cfg: &RunConfig, root: &Path, stream: u64) -> Result<Vec<FileEntry>, String> {
    let params = cfg.model();
    let dir = seed_dir(stream);
    mkdir(&root.join(&dir)).map_err(|e| e.to_string())?;
    let mut files = Vec::new();
    let res = run_with(&params, cfg.seed_base, stream, |snap| {
        for (ext, text) in [
            ("txt", snapfile::render(snap)),
            (
                "json",
                serde_json::to_string(snap).expect("snapshot is plain data") + "\n",
            ),
        ] {
            let rel = rel_path(&[&dir, &snapshot_name(snap.n, ext)]);
            write(&abs_path(root, &rel), &text)?;
            files.push(file_entry(root, &rel)?);
        }
        Ok::<_, CliError>(())
    });
    match res {
        Ok(_) => Ok(files),
        Err(RunError::Model(e)) => Err(format!("{dir}: model error: {e}")),
        Err(RunError::Sink(e)) => Err(format!("{dir}: {e}")),
    }
}

/// Writes one directory per replication and the manifest last. A failed
/// replication marks the manifest partial and makes the result an error.
pub fn simulate(cfg: &RunConfig) -> Result<RunManifest, CliError> {
    cfg.validate()?;
    let started = now();
    let root = cfg.out.clone();
    mkdir(&root)?;
    write(&root.join(CONFIG_FILE), &cfg.serialize())?;
    let mut files = vec![file_entry(&root, CONFIG_FILE)?];

    let results: Vec<Result<Vec<FileEntry>, String>> = pool(cfg.jobs)?.install(|| {
        (0..cfg.seeds)
            .into_par_iter()
            .map(|s| simulate_seed(cfg, &root, s))
            .collect()
    });
    let mut errors = Vec::new();
    for r in results {
        match r {
            Ok(f) => files.extend(f),
            Err(e) => errors.push(e),
        }
    }

    let params = cfg.model();
    let manifest = RunManifest {
        artifact_version: manifest::ARTIFACT_VERSION.into(),
        generator: GENERATOR_FAMILY.into(),
        config: cfg.clone(),
        checkpoints: params.checkpoint_schedule(),
        params,
        seeds: (0..cfg.seeds)
            .map(|s| SeedEntry {
                seed: cfg.seed_base,
                stream: s,
                dir: seed_dir(s),
            })
            .collect(),
        started,
        finished: now(),
        partial: !errors.is_empty(),
        errors: errors.clone(),
        files,
    };
    manifest.store(&root)?;
    if errors.is_empty() {
        Ok(manifest)
    } else {
        Err(CliError::Failed(format!(
            "run incomplete, manifest marked partial:\n  {}",
            errors.join("\n  ")
        )))
    }
}

/// Reads every replication listed in a verified manifest.
pub fn load_run(run_dir: &Path) -> Result<(RunManifest, Vec<Trajectory>), CliError> {
    let manifest = RunManifest::load(run_dir)?;
    let problems = manifest::verify(run_dir, &manifest);
    if !problems.is_empty() {
        return Err(CliError::Corrupt(problems));
    }
    let mut problems = Vec::new();
    let mut trajectories = Vec::new();
    for seed in &manifest.seeds {
        let prefix = format!("{}/snapshot-", seed.dir);
        let mut paths: Vec<&str> = manifest
            .files
            .iter()
            .map(|f| f.path.as_str())
            .filter(|p| p.starts_with(&prefix) && p.ends_with(".txt"))
            .collect();
        paths.sort_unstable();
        let mut snapshots = Vec::new();
        for rel in paths {
            let path = abs_path(run_dir, rel);
            match std::fs::read_to_string(&path) {
                Ok(text) => match snapfile::parse(&text) {
                    Ok(s) => snapshots.push(s),
                    Err(e) => problems.push(format!("{rel}: {e}")),
                },
                Err(e) => problems.push(format!("{rel}: {e}")),
            }
        }
        let schedule: Vec<u64> = snapshots.iter().map(|s| s.n).collect();
        if problems.is_empty() && schedule != manifest.checkpoints {
            problems.push(format!(
                "{}: snapshots at {schedule:?}, manifest lists {:?}",
                seed.dir, manifest.checkpoints
            ));
        }
        trajectories.push(Trajectory {
            stream: seed.stream,
            snapshots,
            aborted: None,
        });
    }
    if problems.is_empty() {
        Ok((manifest, trajectories))
    } else {
        Err(CliError::Corrupt(problems))
    }
}

/// Compares a run directory with the limit laws and writes `report.json`,
/// `report.txt` and the plot-data files. Returns the report and the
/// directory written to.
pub fn compare_run(run_dir: &Path, flags: &Flags) -> Result<(ComparisonReport, PathBuf), CliError> {
    let (manifest, trajectories) = load_run(run_dir)?;
    let cfg = flags.resolve_onto(manifest.config.clone())?;
    cfg.validate()?;
    let reference = Reference::from_theory(&cfg.model(), cfg.max_index)
        .map_err(|e| CliError::Domain(e.to_string()))?;
    let mut options = cfg.compare_options();
    options.table_max = cfg.max_index as u64;
    let rep =
        compare(&trajectories, &manifest.params, &reference, &options).map_err(|e| match e {
            AnalysisError::ParamMismatch { run, reference } => CliError::Domain(format!(
            "refusing to compare: run parameters {run} differ from requested parameters {reference}"
        )),
            other => CliError::Domain(other.to_string()),
        })?;

    let out = flags.out.clone().unwrap_or_else(|| run_dir.join("compare"));
    mkdir(&out)?;
    let mut json = serde_json::to_string_pretty(&rep).expect("report is plain data");
    json.push('\n');
    write(&out.join("report.json"), &json)?;
    write(
        &out.join("report.txt"),
        &report::comparison_text(&rep, cfg.gap_range.1.max(30)),
    )?;
    for kind in [
        WeightKind::Degree,
        WeightKind::Vertex,
        WeightKind::Edge,
        WeightKind::Clique,
    ] {
        let k = rep.kind(kind).expect("every kind reported");
        write(
            &out.join(report::plot_file(kind, rep.params.n_model)),
            &report::plot_data(&rep, k),
        )?;
    }
    Ok((rep, out))
}

#[derive(Serialize)]
struct TheoryTables {
    n_model: usize,
    constants: DerivedConstants,
    warnings: Vec<theory::HypothesisWarning>,
    x: Vec<f64>,
    u: Vec<f64>,
    e: Vec<f64>,
    t: Vec<f64>,
    k: Vec<f64>,
}

/// Theory tables as text; with `out` also writes `theory.txt` and `theory.json`.
pub fn theory_tables(cfg: &RunConfig, out: Option<&Path>) -> Result<String, CliError> {
    let params = cfg.model();
    let c = DerivedConstants::from_params(&params).map_err(|e| CliError::Domain(e.to_string()))?;
    let warnings = hypothesis_warnings(&params);
    let text = report::theory_text(cfg.n_model, &c, &warnings, cfg.max_index);
    if let Some(dir) = out {
        mkdir(dir)?;
        write(&dir.join("theory.txt"), &text)?;
        let m = cfg.max_index;
        let tables = TheoryTables {
            n_model: cfg.n_model,
            x: theory::vertex_weight_dist(&c, m).values,
            u: theory::edge_weight_dist(&c, m).values,
            e: theory::edge_rate_dist(&c, m).values,
            t: theory::clique_weight_dist(&c, m).values,
            k: theory::clique_rate_dist(&c, m).values,
            constants: c,
            warnings,
        };
        let mut json = serde_json::to_string_pretty(&tables).expect("tables are plain data");
        json.push('\n');
        write(&dir.join("theory.json"), &json)?;
    }
    Ok(text)
}

/// Runs the oracle suite; with `out` also writes `oracle.json`.
pub fn oracle(cfg: &RunConfig, out: Option<&Path>) -> Result<OracleReport, CliError> {
    if cfg.replications < 2 {
        return Err(CliError::Usage("replications: need at least 2".into()));
    }
    let rep =
        run_suite(cfg.replications, cfg.seed_base).map_err(|e| CliError::Domain(e.to_string()))?;
    if let Some(dir) = out {
        mkdir(dir)?;
        let mut json = serde_json::to_string_pretty(&rep).expect("report is plain data");
        json.push('\n');
        write(&dir.join("oracle.json"), &json)?;
    }
    Ok(rep)
}

pub fn manifest_verify(run_dir: &Path) -> Result<usize, CliError> {
    let manifest = RunManifest::load(run_dir)?;
    let problems = manifest::verify(run_dir, &manifest);
    if problems.is_empty() {
        Ok(manifest.files.len())
    } else {
        Err(CliError::Corrupt(problems))
    }
}

pub fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(flags) => {
            let cfg = flags.resolve()?;
            let manifest = simulate(&cfg)?;
            for seed in &manifest.seeds {
                let last = manifest
                    .files
                    .iter()
                    .rfind(|f| f.path.starts_with(&seed.dir) && f.path.ends_with(".txt"));
                if let Some(f) = last {
                    let text = std::fs::read_to_string(abs_path(&cfg.out, &f.path))
                        .map_err(|e| CliError::io(&cfg.out, e))?;
                    println!("{}: {}", seed.dir, text.lines().next().unwrap_or_default());
                }
            }
            println!(
                "wrote {} files to {}",
                manifest.files.len() + 1,
                cfg.out.display()
            );
        }
        Command::Theory(flags) => {
            let cfg = flags.resolve()?;
            print!("{}", theory_tables(&cfg, flags.out.as_deref())?);
        }
        Command::Compare { run_dir, flags } => {
            let (rep, out) = compare_run(&run_dir, &flags)?;
            for k in &rep.kinds {
                if let Some(gap) = k.sup_gap {
                    println!("{} sup gap {}", k.kind.name(), report::g6(gap));
                }
            }
            println!("report written to {}", out.display());
        }
        Command::Oracle(flags) => {
            let cfg = flags.resolve()?;
            let rep = oracle(&cfg, flags.out.as_deref())?;
            for c in &rep.checks {
                println!("{}", report::oracle_line(c));
            }
            let failed = rep.failures().count();
            let total = rep.checks.iter().filter(|c| !c.informational).count();
            println!("{} of {total} checks passed", total - failed);
            if failed > 0 {
                return Err(CliError::Failed(format!("{failed} oracle checks failed")));
            }
        }
        Command::ManifestVerify { run_dir } => {
            let n = manifest_verify(&run_dir)?;
            println!("{n} files verified");
        }
    }
    Ok(())
}
