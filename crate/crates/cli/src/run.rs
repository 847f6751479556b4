//! Run directories and manifests.

use std::path::{Path, PathBuf};

use chrono::Utc;
use mediasent_core::report::{FileRecord, RunManifest};
use mediasent_core::{Error, Result};

use crate::jobs::{Job, Ledger};

fn fresh_dir(out: Option<&Path>, runs_dir: &Path, command: &str) -> Result<PathBuf> {
    if let Some(dir) = out {
        if dir.exists() {
            let non_empty = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?.next().is_some();
            if non_empty {
                return Err(Error::Config(format!(
                    "output directory {} is not empty; runs never overwrite each other",
                    dir.display()
                )));
            }
        }
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        return Ok(dir.to_path_buf());
    }
    std::fs::create_dir_all(runs_dir).map_err(|e| Error::io(runs_dir, e))?;
    let stamp = Utc::now().format("%Y%m%dT%H%M%S");
    let base = format!("{command}-{stamp}-{}", std::process::id());
    for n in 0.. {
        let name = if n == 0 { base.clone() } else { format!("{base}-{n}") };
        let dir = runs_dir.join(name);
        match std::fs::create_dir(&dir) {
            Ok(()) => return Ok(dir),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => continue,
            Err(e) => return Err(Error::io(&dir, e)),
        }
    }
    unreachable!()
}

fn records(paths: &[PathBuf]) -> Vec<FileRecord> {
    paths
        .iter()
        .filter_map(|p| match FileRecord::of(p) {
            Ok(r) => Some(r),
            Err(e) => {
                log::warn!("not recorded in manifest: {e}");
                None
            }
        })
        .collect()
}

/// Runs `job` in a new directory and writes its `manifest.json`, also when
/// the job fails.
pub fn run(job: Job, out: Option<&Path>, runs_dir: &Path) -> Result<PathBuf> {
    let dir = fresh_dir(out, runs_dir, job.name())?;
    let started_at = Utc::now().to_rfc3339();
    let mut ledger = Ledger::default();
    log::info!("{} -> {}", job.name(), dir.display());
    let outcome = job.execute(&dir, &mut ledger);
    let manifest = RunManifest {
        command: job.name().to_string(),
        config: serde_json::to_value(&job)?,
        seed: job.seed(),
        inputs: records(&ledger.inputs),
        artifacts: records(&ledger.artifacts),
        started_at,
        finished_at: Utc::now().to_rfc3339(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        status: match &outcome {
            Ok(()) => "ok".to_string(),
            Err(e) => format!("failed ({}): {e}", e.category().as_str()),
        },
    };
    manifest.save(&dir.join("manifest.json"))?;
    outcome.map(|()| dir)
}
