use std::collections::BTreeMap;

use anyhow::{bail, Result};

use crate::output::{mean, Record, TradeoffRow};

/// Mean over groups of the per-group mean of `metric`, per mechanism.
fn mean_of_means<'a>(
    records: impl Iterator<Item = &'a Record>,
    metric: &str,
    group: impl Fn(&Record) -> String,
) -> BTreeMap<String, f64> {
    let mut groups: BTreeMap<(String, String), Vec<f64>> = BTreeMap::new();
    for r in records.filter(|r| r.metric == metric) {
        groups.entry((r.mechanism.clone(), group(r))).or_default().push(r.value);
    }
    let mut per_mechanism: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for ((mechanism, _), values) in groups {
        per_mechanism.entry(mechanism).or_default().push(mean(&values));
    }
    per_mechanism.into_iter().map(|(m, v)| (m, mean(&v))).collect()
}

/// One point per mechanism found in both inputs. Integrity is the mean AUC
/// over the numbers of active graders; robustness is the negated mean rank
/// gain over every strategy and number of strategic agents.
pub fn tradeoff(integrity: &[Record], deviation: &[Record]) -> Result<Vec<TradeoffRow>> {
    let y = mean_of_means(
        integrity.iter().filter(|r| r.experiment == "measurement_integrity"),
        "auc",
        |r| format!("{:?}", r.sweep_value),
    );
    let x = mean_of_means(
        deviation.iter().filter(|r| r.experiment.starts_with("deviation:")),
        "rank_gain",
        |r| format!("{}/{:?}", r.experiment, r.sweep_value),
    );
    let rows: Vec<TradeoffRow> = y
        .iter()
        .filter_map(|(m, &integrity)| {
            x.get(m).map(|&gain| TradeoffRow { mechanism: m.clone(), robustness: -gain, integrity })
        })
        .collect();
    if rows.is_empty() {
        bail!("no mechanism has both binary-effort AUC records and deviation records");
    }
    Ok(rows)
}
