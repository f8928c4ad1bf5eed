use anyhow::Result;
use peerpred_core::Strategy;
use rayon::prelude::*;

use super::{fixed_parts, integrity_metric, progress, record, semester_spec, semester_stream, Semester};
use crate::config::ExperimentConfig;
use crate::output::{mean, variance, Record};

/// For every outer replication the population and submissions are fixed
/// while grading graphs, signals, and mechanism randomness are redrawn for
/// each inner replication. Records the variance (and mean) of the metric
/// over the inner loop.
pub fn run_metric_variance(config: &ExperimentConfig) -> Result<Vec<Record>> {
    let setting = config.setting()?;
    let mechanisms = config.mechanisms()?;
    let spec = semester_spec(config, setting, None);
    let batch: Vec<Vec<Record>> = (0..config.replications)
        .into_par_iter()
        .map(|outer| -> Result<Vec<Record>> {
            let rng = semester_stream(config.master_seed, setting, None, outer);
            let (population, true_scores) = fixed_parts(&spec, &rng)?;
            let truthful = vec![Strategy::Truthful; config.n_students];
            let mut values = vec![Vec::new(); mechanisms.len()];
            for inner in 0..config.inner_replications {
                let stream = rng.derive("inner").index(u64::from(inner));
                let semester = Semester::resimulate(&population, &true_scores, &mechanisms, stream)?;
                let totals = semester.totals(&mechanisms, &truthful, setting.biased)?;
                for (v, t) in values.iter_mut().zip(&totals) {
                    v.push(integrity_metric(setting, &population, t)?.1);
                }
            }
            let mut out = Vec::new();
            for (&m, v) in mechanisms.iter().zip(&values) {
                out.push(record("metric_variance", m, setting, None, outer, "variance", variance(v)));
                out.push(record("metric_variance", m, setting, None, outer, "mean", mean(v)));
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    progress("metric_variance", format_args!("{} outer replications", config.replications));
    Ok(batch.into_iter().flatten().collect())
}
