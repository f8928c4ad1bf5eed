use anyhow::Result;
use peerpred_core::Strategy;
use rayon::prelude::*;

use super::{integrity_metric, progress, record, semester_spec, semester_stream, strategic_profile, Semester};
use crate::config::ExperimentConfig;
use crate::output::Record;

/// The measurement integrity experiment with `count` agents playing
/// `strategy`. With no strategic agents it reproduces the integrity
/// experiment on the same seed.
pub fn run_ranking_quality(config: &ExperimentConfig, strategy: Strategy) -> Result<Vec<Record>> {
    let setting = config.setting()?;
    let mechanisms = config.mechanisms()?;
    let spec = semester_spec(config, setting, None);
    let label = format!("ranking_quality:{strategy}");
    let n = config.n_students;
    let mut records = Vec::new();
    for count in config.sweep()? {
        let batch: Vec<Vec<Record>> = (0..config.replications)
            .into_par_iter()
            .map(|rep| -> Result<Vec<Record>> {
                let rng = semester_stream(config.master_seed, setting, None, rep);
                let semester = Semester::generate(&spec, &mechanisms, rng)?;
                let profile = strategic_profile(n, count as usize, strategy, &rng.derive("strategic").index(u64::from(count)));
                let totals = semester.totals(&mechanisms, &profile, setting.biased)?;
                mechanisms
                    .iter()
                    .zip(&totals)
                    .map(|(&m, t)| {
                        let (metric, value) = integrity_metric(setting, semester.population(), t)?;
                        Ok(record(&label, m, setting, Some(count), rep, metric, value))
                    })
                    .collect()
            })
            .collect::<Result<_>>()?;
        records.extend(batch.into_iter().flatten());
        progress(&label, format_args!("{count} strategic"));
    }
    Ok(records)
}
