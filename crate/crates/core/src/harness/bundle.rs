use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::Result;

use super::ensemble::{EnsembleStats, Prepared};
use super::scenario::Scenario;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ManifestEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Writes the files of one output bundle and records a checksum for each.
/// A single writer owns the directory, so the manifest always matches what
/// is on disk.
pub struct BundleWriter {
    root: PathBuf,
    entries: Vec<ManifestEntry>,
    warnings: Vec<String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl BundleWriter {
    pub fn create(root: &Path) -> Result<Self> {
        std::fs::create_dir_all(root)?;
        Ok(Self { root: root.to_path_buf(), entries: Vec::new(), warnings: Vec::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Writes `bytes` to `rel` (forward slashes) under the bundle root.
    pub fn write(&mut self, rel: &str, bytes: &[u8]) -> Result<()> {
        let target = self.root.join(rel);
        if let Some(dir) = target.parent() {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(&target, bytes)?;
        self.entries.push(ManifestEntry { path: rel.to_string(), sha256: sha256_hex(bytes), bytes: bytes.len() as u64 });
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, rel: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_vec_pretty(value)?;
        text.push(b'\n');
        self.write(rel, &text)
    }

    pub fn warn(&mut self, message: String) {
        self.warnings.push(message);
    }

    pub fn entries(&self) -> &[ManifestEntry] {
        &self.entries
    }

    /// Writes `manifest.json` with the file list, warnings and `extra`
    /// fields merged in at the top level.
    pub fn finish(self, extra: Value) -> Result<PathBuf> {
        let mut manifest = json!({ "files": self.entries, "warnings": self.warnings });
        if let (Some(m), Value::Object(extra)) = (manifest.as_object_mut(), extra) {
            m.extend(extra);
        }
        let path = self.root.join("manifest.json");
        let mut text = serde_json::to_vec_pretty(&manifest)?;
        text.push(b'\n');
        std::fs::write(&path, text)?;
        Ok(path)
    }
}

/// Outcome of [`run_scenario`].
#[derive(Debug)]
pub struct ScenarioRun {
    pub stats: EnsembleStats,
    pub manifest: PathBuf,
    pub analysis: Value,
}

pub fn path_file_name(index: u64) -> String {
    format!("paths/path_{index:04}.csv")
}

/// Reduction, simulation of every path and the artifact bundle:
/// `scenario.json` (resolved), `analysis.json`, one CSV per path,
/// `ensemble.json` and `manifest.json`.
pub fn run_scenario(config: &Scenario, out_dir: &Path) -> Result<ScenarioRun> {
    let prepared = Prepared::new(config)?;
    let runs = prepared.run_all(true)?;

    let mut out = BundleWriter::create(out_dir)?;
    out.write_json("scenario.json", &prepared.scenario)?;
    let analysis = prepared.analysis.to_json();
    out.write_json("analysis.json", &analysis)?;
    let mut verdicts = Vec::with_capacity(runs.len());
    for run in runs {
        let v = run.verdict;
        match (&run.observables, v.blow_up) {
            (Some(obs), _) => {
                let mut buf = Vec::new();
                obs.write_csv(&mut buf)?;
                out.write(&path_file_name(v.index), &buf)?;
                if obs.gap_count() > 0 {
                    out.warn(format!("path {} left the outer region at {} samples", v.index, obs.gap_count()));
                }
            }
            (None, Some(t)) => out.warn(format!(
                "path {} exceeded the overflow guard after t = {t}; recorded as not captured",
                v.index
            )),
            (None, None) => {}
        }
        verdicts.push(v);
    }
    let stats = EnsembleStats::from_verdicts(verdicts);
    out.write_json("ensemble.json", &stats)?;
    let manifest = out.finish(json!({
        "name": prepared.scenario.name,
        "master_seed": prepared.scenario.ensemble.master_seed,
        "path_count": prepared.scenario.ensemble.path_count,
        "t_end": prepared.t_end,
        "scenario": &prepared.scenario,
    }))?;
    Ok(ScenarioRun { stats, manifest, analysis })
}
