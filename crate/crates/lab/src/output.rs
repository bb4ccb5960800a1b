//! Writing a run to disk: scenario outputs, the verdict block and a manifest
//! with a SHA-256 inventory.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::error::LabError;
use crate::runner::{run_scenario, Outcome};
use crate::scenario::Scenario;

pub const VERDICTS_FILE: &str = "verdicts.json";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub name: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub scenario: String,
    pub kind: String,
    pub scenario_hash: String,
    pub seed: u64,
    pub versions: BTreeMap<String, String>,
    /// Not reproducible; excluded from determinism comparisons together with
    /// the rest of this file.
    pub wall_time_s: f64,
    pub passed: bool,
    pub verdicts: BTreeMap<String, bool>,
    pub files: Vec<FileEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Runs `scenario` and writes everything under `dir`.
pub fn execute(scenario: &Scenario, dir: &Path) -> Result<RunManifest, LabError> {
    let start = Instant::now();
    let outcome = run_scenario(scenario)?;
    let wall_time_s = start.elapsed().as_secs_f64();
    write_run(scenario, &outcome, dir, wall_time_s)
}

fn write_run(
    scenario: &Scenario,
    outcome: &Outcome,
    dir: &Path,
    wall_time_s: f64,
) -> Result<RunManifest, LabError> {
    fs::create_dir_all(dir)?;
    let verdicts = json!({
        "scenario": scenario.name,
        "kind": scenario.body.name(),
        "seed": scenario.seed,
        "anchor": scenario.anchor,
        "verdicts": outcome.verdicts,
        "passed": outcome.passed(),
        "details": outcome.details,
    });
    let verdict_text = serde_json::to_string_pretty(&verdicts).expect("verdicts serialize") + "\n";
    let mut files = Vec::new();
    let all = outcome
        .files
        .iter()
        .map(|(n, b)| (n.as_str(), b.as_slice()))
        .chain(std::iter::once((VERDICTS_FILE, verdict_text.as_bytes())));
    for (name, bytes) in all {
        fs::write(dir.join(name), bytes)?;
        files.push(FileEntry {
            name: name.to_string(),
            bytes: bytes.len() as u64,
            sha256: sha256_hex(bytes),
        });
    }
    let manifest = RunManifest {
        scenario: scenario.name.clone(),
        kind: scenario.body.name().to_string(),
        scenario_hash: sha256_hex(scenario.canonical_json().as_bytes()),
        seed: scenario.seed,
        versions: BTreeMap::from([
            (
                "formsum-core".to_string(),
                formsum_core::VERSION.to_string(),
            ),
            (
                "formsum-lab".to_string(),
                env!("CARGO_PKG_VERSION").to_string(),
            ),
        ]),
        wall_time_s,
        passed: outcome.passed(),
        verdicts: outcome.verdicts.clone(),
        files,
    };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    fs::write(dir.join(MANIFEST_FILE), text)?;
    Ok(manifest)
}
