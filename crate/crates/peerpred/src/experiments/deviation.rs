use anyhow::{ensure, Result};
use peerpred_core::metrics::{auc, rank_gain, rank_of};
use peerpred_core::{Strategy, RngStream};
use rand::seq::IndexedRandom;
use rayon::prelude::*;

use super::{progress, record, semester_spec, semester_stream, strategic_profile, Semester};
use crate::config::ExperimentConfig;
use crate::output::Record;

/// The strategic agents of a deviation iteration and the truthful agent who
/// switches in the second pass.
pub fn deviation_profiles(n: usize, count: usize, strategy: Strategy, rng: &RngStream) -> (Vec<Strategy>, usize, Vec<Strategy>) {
    let first = strategic_profile(n, count, strategy, &rng.derive("strategic").index(count as u64));
    let truthful: Vec<usize> = (0..n).filter(|&k| first[k] == Strategy::Truthful).collect();
    let flipped = *truthful.choose(&mut rng.derive("flip").index(count as u64).rng()).expect("a truthful agent");
    let mut second = first.clone();
    second[flipped] = strategy;
    (first, flipped, second)
}

/// Rewards are computed twice on the same semester with the same mechanism
/// randomness: once with `count` strategic agents and once more after one
/// truthful agent also switches. Records that agent's rank gain and, from
/// the first pass, the AUC of rewards separating truthful from strategic
/// agents.
pub fn run_deviation(config: &ExperimentConfig, strategy: Strategy) -> Result<Vec<Record>> {
    ensure!(strategy != Strategy::Truthful, "deviation needs a non-truthful strategy");
    let setting = config.setting()?;
    let mechanisms = config.mechanisms()?;
    let spec = semester_spec(config, setting, None);
    let label = format!("deviation:{strategy}");
    let n = config.n_students;
    let mut records = Vec::new();
    for count in config.sweep()? {
        let batch: Vec<Vec<Record>> = (0..config.replications)
            .into_par_iter()
            .map(|rep| -> Result<Vec<Record>> {
                let rng = semester_stream(config.master_seed, setting, None, rep);
                let semester = Semester::generate(&spec, &mechanisms, rng)?;
                let (first, flipped, second) = deviation_profiles(n, count as usize, strategy, &rng);
                let before = semester.totals(&mechanisms, &first, setting.biased)?;
                let after = semester.totals(&mechanisms, &second, setting.biased)?;
                let truthful: Vec<bool> = first.iter().map(|&s| s == Strategy::Truthful).collect();
                let mut out = Vec::new();
                for ((&m, b), a) in mechanisms.iter().zip(&before).zip(&after) {
                    let gain = rank_gain(rank_of(flipped, b), rank_of(flipped, a));
                    out.push(record(&label, m, setting, Some(count), rep, "rank_gain", gain));
                    out.push(record(&label, m, setting, Some(count), rep, "truthful_auc", auc(b, &truthful)?));
                }
                Ok(out)
            })
            .collect::<Result<_>>()?;
        records.extend(batch.into_iter().flatten());
        progress(&label, format_args!("{count} strategic"));
    }
    Ok(records)
}
