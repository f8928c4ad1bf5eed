//! Experiment runner for the peer assessment simulations in
//! `peerpred-core`: JSON configs, parallel replications, CSV results, and
//! run manifests.

pub mod config;
pub mod experiments;
pub mod output;

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};

use config::ExperimentConfig;
use output::{summarize, write_csv, write_manifest};

/// Runs `config` and writes its CSVs, `summary.csv`, and `manifest.json`
/// into `out`. Returns the names of the files written.
pub fn run_to_dir(config: &ExperimentConfig, out: &Path) -> Result<Vec<String>> {
    let result = experiments::run(config)?;
    fs::create_dir_all(out).with_context(|| format!("cannot create {}", out.display()))?;
    let mut files = Vec::new();
    let mut all = Vec::new();
    for (name, records) in &result.records {
        write_csv(&out.join(name), records)?;
        files.push(name.clone());
        all.extend(records.iter().cloned());
    }
    if !all.is_empty() {
        write_csv(&out.join("summary.csv"), &summarize(&all))?;
        files.push("summary.csv".into());
    }
    if !result.validation.is_empty() {
        write_csv(&out.join("validate_estimation.csv"), &result.validation)?;
        files.push("validate_estimation.csv".into());
    }
    write_manifest(out, config, &files)?;
    files.push("manifest.json".into());
    Ok(files)
}
