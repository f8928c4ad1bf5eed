use anyhow::Result;
use peerpred_core::metrics::{auc, kendall_tau_b};
use peerpred_core::model::{EffortModel, GraderProfile, Setting};
use peerpred_core::Strategy;
use rayon::prelude::*;

use super::{progress, record, semester_spec, semester_stream, Semester};
use crate::config::ExperimentConfig;
use crate::output::Record;

/// How well semester totals reflect effort: AUC against the active/passive
/// split for binary effort, τ_B against the effort level otherwise. Totals
/// with no ranking information at all (every agent tied) score 0 on τ_B.
pub fn integrity_metric(setting: Setting, population: &[GraderProfile], totals: &[f64]) -> Result<(&'static str, f64)> {
    match setting.effort {
        EffortModel::Binary => {
            let labels: Vec<bool> = population.iter().map(|g| g.effort.is_active()).collect();
            Ok(("auc", auc(totals, &labels)?))
        }
        EffortModel::Continuous => {
            let effort: Vec<f64> = population.iter().map(|g| g.effort.level()).collect();
            Ok(("tau_b", kendall_tau_b(totals, &effort).unwrap_or(0.0)))
        }
    }
}

pub fn run_measurement_integrity(config: &ExperimentConfig) -> Result<Vec<Record>> {
    let setting = config.setting()?;
    let mechanisms = config.mechanisms()?;
    let sweep: Vec<Option<u32>> = match setting.effort {
        EffortModel::Binary => config.sweep()?.into_iter().map(Some).collect(),
        EffortModel::Continuous => vec![None],
    };
    let mut records = Vec::new();
    for n_active in sweep {
        let spec = semester_spec(config, setting, n_active);
        let batch: Vec<Vec<Record>> = (0..config.replications)
            .into_par_iter()
            .map(|rep| -> Result<Vec<Record>> {
                let rng = semester_stream(config.master_seed, setting, n_active, rep);
                let semester = Semester::generate(&spec, &mechanisms, rng)?;
                let truthful = vec![Strategy::Truthful; config.n_students];
                let totals = semester.totals(&mechanisms, &truthful, setting.biased)?;
                mechanisms
                    .iter()
                    .zip(&totals)
                    .map(|(&m, t)| {
                        let (metric, value) = integrity_metric(setting, semester.population(), t)?;
                        Ok(record("measurement_integrity", m, setting, n_active, rep, metric, value))
                    })
                    .collect()
            })
            .collect::<Result<_>>()?;
        records.extend(batch.into_iter().flatten());
        match n_active {
            Some(n) => progress("measurement_integrity", format_args!("{n} active")),
            None => progress("measurement_integrity", "all replications"),
        }
    }
    Ok(records)
}
