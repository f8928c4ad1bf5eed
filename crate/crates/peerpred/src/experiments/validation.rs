use anyhow::Result;
use peerpred_core::estimation::estimate_pg1;
use peerpred_core::mechanism::nonparametric::consensus;
use peerpred_core::model::Setting;
use peerpred_core::{Assessment, GraphKind, SemesterData};
use rayon::prelude::*;

use super::{progress, semester_spec, semester_stream};
use crate::config::ExperimentConfig;
use crate::output::ValidationRow;

pub const METHODS: [&str; 3] = ["consensus", "procedure_nb", "procedure"];

pub fn validation_setting_name(setting: Setting) -> String {
    format!("{}_{}", setting.effort, if setting.biased { "biased" } else { "unbiased" })
}

/// Squared errors of the three true-score estimates on one assignment:
/// the mean report, the procedure with biases fixed at zero, and the full
/// procedure.
pub fn squared_errors(a: &Assessment<'_>, truth: &[u8]) -> [f64; 3] {
    let unbiased = estimate_pg1(a, false);
    let biased = estimate_pg1(a, true);
    let mut sse = [0.0; 3];
    for (s, &t) in truth.iter().enumerate() {
        let t = f64::from(t);
        for (i, g) in [consensus(a, s), unbiased.scores[s], biased.scores[s]].into_iter().enumerate() {
            sse[i] += (g - t) * (g - t);
        }
    }
    sse
}

/// Truthful grading with the configured effort model, once with biased and
/// once with unbiased agents. Each replication is a semester of
/// `n_assignments` assignments; its row holds the mean squared error over
/// every submission.
pub fn run_validation(config: &ExperimentConfig) -> Result<Vec<ValidationRow>> {
    let effort = config.setting()?.effort;
    let mut rows = Vec::new();
    for biased in [true, false] {
        let setting = Setting { effort, biased };
        let spec = semester_spec(config, setting, None);
        let name = validation_setting_name(setting);
        let batch: Vec<Vec<ValidationRow>> = (0..config.replications)
            .into_par_iter()
            .map(|rep| -> Result<Vec<ValidationRow>> {
                let rng = semester_stream(config.master_seed, setting, None, rep);
                let data = SemesterData::generate(&spec, GraphKind::Regular, &rng)?;
                let reports = data.truthful_reports();
                let mut sse = [0.0; 3];
                let mut count = 0usize;
                for (a, assignment) in data.assessments(&reports).iter().zip(&data.assignments) {
                    for (total, e) in sse.iter_mut().zip(squared_errors(a, &assignment.true_scores)) {
                        *total += e;
                    }
                    count += assignment.true_scores.len();
                }
                Ok(METHODS
                    .iter()
                    .zip(sse)
                    .map(|(m, e)| ValidationRow {
                        method: (*m).into(),
                        setting: name.clone(),
                        replication: rep,
                        mse: e / count as f64,
                    })
                    .collect())
            })
            .collect::<Result<_>>()?;
        rows.extend(batch.into_iter().flatten());
        progress("validate_estimation", &name);
    }
    Ok(rows)
}
