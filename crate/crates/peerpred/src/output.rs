//! Result files: per-replication records, their summary, and the run manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;

/// One measurement from one replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub experiment: String,
    pub mechanism: String,
    pub effort_model: String,
    pub biased: bool,
    pub sweep_value: Option<u32>,
    pub replication: u32,
    pub metric: String,
    pub value: f64,
}

/// Aggregate of the records sharing everything but the replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub experiment: String,
    pub mechanism: String,
    pub effort_model: String,
    pub biased: bool,
    pub sweep_value: Option<u32>,
    pub metric: String,
    pub count: usize,
    pub mean: f64,
    pub median: f64,
    pub variance: f64,
}

/// One row of the estimation validation study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationRow {
    pub method: String,
    pub setting: String,
    pub replication: u32,
    pub mse: f64,
}

/// One point of the integrity/robustness trade-off.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeoffRow {
    pub mechanism: String,
    /// Negated mean rank gain over strategies and strategic counts.
    pub robustness: f64,
    /// Mean AUC over the numbers of active graders.
    pub integrity: f64,
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Population variance.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64
}

pub fn summarize(records: &[Record]) -> Vec<SummaryRow> {
    type Key = (String, String, String, bool, Option<u32>, String);
    let mut groups: BTreeMap<Key, Vec<f64>> = BTreeMap::new();
    for r in records {
        let key = (
            r.experiment.clone(),
            r.mechanism.clone(),
            r.effort_model.clone(),
            r.biased,
            r.sweep_value,
            r.metric.clone(),
        );
        groups.entry(key).or_default().push(r.value);
    }
    groups
        .into_iter()
        .map(|((experiment, mechanism, effort_model, biased, sweep_value, metric), values)| SummaryRow {
            experiment,
            mechanism,
            effort_model,
            biased,
            sweep_value,
            metric,
            count: values.len(),
            mean: mean(&values),
            median: median(&values),
            variance: variance(&values),
        })
        .collect()
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("cannot write {}", path.display()))?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("cannot read {}", path.display()))?;
    r.deserialize().map(|row| row.map_err(Into::into)).collect()
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub master_seed: u64,
    pub config: ExperimentConfig,
    pub files: Vec<String>,
    /// Conventions the results depend on that the config does not capture.
    pub conventions: BTreeMap<String, String>,
}

pub fn conventions() -> BTreeMap<String, String> {
    [
        ("auc_ties", "tied cross-class pairs count one half"),
        ("ranks", "descending, ties share the mid-rank"),
        ("rank_gain", "truthful rank minus strategic rank"),
        ("pairing", "per-task reward averages over co-graders; task rewards are summed"),
        ("mse_rewards", "squared errors are averaged over an agent's tasks"),
        ("pts_history", "reset at the start of every semester"),
        ("phi_div_split", "half the submissions estimate the ratio used on the other half"),
        ("estimation_start", "scores 7, biases 0, reliabilities 1/1.05"),
        ("continuous_draws", "1 + Poisson(effort) drawn afresh for every task"),
        ("ground_truth_partner", "reliability 1/0.7 and bias 0"),
        ("degenerate_correlation", "constant inputs earn 0"),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v.to_string()))
    .collect()
}

pub fn write_manifest(dir: &Path, config: &ExperimentConfig, files: &[String]) -> Result<()> {
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        master_seed: config.master_seed,
        config: config.clone(),
        files: files.to_vec(),
        conventions: conventions(),
    };
    let path = dir.join("manifest.json");
    fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")
        .with_context(|| format!("cannot write {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(mechanism: &str, sweep: Option<u32>, replication: u32, value: f64) -> Record {
        Record {
            experiment: "e".into(),
            mechanism: mechanism.into(),
            effort_model: "binary".into(),
            biased: false,
            sweep_value: sweep,
            replication,
            metric: "auc".into(),
            value,
        }
    }

    #[test]
    fn statistics() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert_eq!(variance(&[1.0, 3.0]), 1.0);
        assert_eq!(mean(&[1.0, 2.0, 6.0]), 3.0);
    }

    #[test]
    fn summary_groups_by_everything_but_replication() {
        let records = vec![rec("mse", Some(10), 0, 0.5), rec("mse", Some(10), 1, 0.7), rec("oa", Some(10), 0, 0.6)];
        let s = summarize(&records);
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].mechanism, "mse");
        assert_eq!(s[0].count, 2);
        assert!((s[0].mean - 0.6).abs() < 1e-12);
    }

    #[test]
    fn csv_round_trip_keeps_column_order() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        let rows = vec![rec("mse", None, 0, 0.25), rec("phi_div:h2", Some(30), 4, -1.5)];
        write_csv(&path, &rows).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            "experiment,mechanism,effort_model,biased,sweep_value,replication,metric,value"
        );
        assert_eq!(read_csv::<Record>(&path).unwrap(), rows);
    }
}
