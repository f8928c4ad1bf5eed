//! Experiment protocols. Each replication owns its random streams, so
//! replications run in parallel and results do not depend on the thread
//! count.

mod deviation;
mod integrity;
mod ranking;
mod tradeoff;
mod validation;
mod variance;

pub use deviation::{deviation_profiles, run_deviation};
pub use integrity::{integrity_metric, run_measurement_integrity};
pub use ranking::run_ranking_quality;
pub use tradeoff::tradeoff;
pub use validation::{run_validation, squared_errors, validation_setting_name, METHODS};
pub use variance::run_metric_variance;

use anyhow::Result;
use peerpred_core::graph::GraphKind;
use peerpred_core::model::{draw_true_scores, sample_population, GraderProfile, Score, Setting};
use peerpred_core::{estimate_pg1, score_semester, Mechanism, RngStream, SemesterData, SemesterSpec, Strategy};
use rand::seq::index::sample;

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::output::Record;

/// Address of the semester for one replication. It does not depend on the
/// experiment, the mechanisms, or the strategic agents, so all of them see
/// the same population and submissions for the same seed.
pub fn semester_stream(master_seed: u64, setting: Setting, n_active: Option<u32>, replication: u32) -> RngStream {
    RngStream::new(master_seed)
        .derive("semester")
        .derive(setting.effort.name())
        .index(u64::from(setting.biased))
        .index(n_active.map_or(u64::MAX, u64::from))
        .index(u64::from(replication))
}

/// A semester simulated on every graph kind the mechanisms need.
#[derive(Debug)]
pub struct Semester {
    regular: Option<SemesterData>,
    clusters: Option<SemesterData>,
    rng: RngStream,
}

fn needs(mechanisms: &[Mechanism], kind: GraphKind) -> bool {
    mechanisms.iter().any(|m| m.graph_kind() == kind)
}

impl Semester {
    pub fn generate(spec: &SemesterSpec, mechanisms: &[Mechanism], rng: RngStream) -> Result<Self> {
        let build = |kind| -> Result<Option<SemesterData>> {
            Ok(if needs(mechanisms, kind) { Some(SemesterData::generate(spec, kind, &rng)?) } else { None })
        };
        Ok(Semester { regular: build(GraphKind::Regular)?, clusters: build(GraphKind::Clusters)?, rng })
    }

    /// Fresh grading graphs and signals for a fixed population and fixed
    /// submissions.
    pub fn resimulate(
        population: &[GraderProfile],
        true_scores: &[Vec<Score>],
        mechanisms: &[Mechanism],
        rng: RngStream,
    ) -> Result<Self> {
        let build = |kind| -> Result<Option<SemesterData>> {
            Ok(if needs(mechanisms, kind) {
                Some(SemesterData::simulate(population.to_vec(), true_scores, kind, &rng)?)
            } else {
                None
            })
        };
        Ok(Semester { regular: build(GraphKind::Regular)?, clusters: build(GraphKind::Clusters)?, rng })
    }

    pub fn data(&self, kind: GraphKind) -> Option<&SemesterData> {
        match kind {
            GraphKind::Regular => self.regular.as_ref(),
            GraphKind::Clusters => self.clusters.as_ref(),
        }
    }

    pub fn population(&self) -> &[GraderProfile] {
        let data = self.regular.as_ref().or(self.clusters.as_ref()).expect("at least one graph kind");
        &data.population
    }

    /// Reports on graphs of `kind` when agent `k` plays `strategies[k]`.
    pub fn reports(&self, kind: GraphKind, strategies: &[Strategy]) -> Option<Vec<Vec<Score>>> {
        self.data(kind).map(|d| d.reports(strategies, &self.rng))
    }

    /// Semester totals of every mechanism, in order. Mechanism randomness
    /// comes from a stream fixed per semester, so two calls that differ only
    /// in `strategies` share every random draw.
    pub fn totals(&self, mechanisms: &[Mechanism], strategies: &[Strategy], biased: bool) -> Result<Vec<Vec<f64>>> {
        let mut out = vec![Vec::new(); mechanisms.len()];
        let stream = self.rng.derive("mechanism");
        for kind in [GraphKind::Regular, GraphKind::Clusters] {
            let Some(data) = self.data(kind) else { continue };
            let wanted: Vec<usize> = (0..mechanisms.len()).filter(|&i| mechanisms[i].graph_kind() == kind).collect();
            if wanted.is_empty() {
                continue;
            }
            let reports = data.reports(strategies, &self.rng);
            let assessments = data.assessments(&reports);
            let estimates = wanted
                .iter()
                .any(|&i| mechanisms[i].is_parametric())
                .then(|| assessments.iter().map(|a| estimate_pg1(a, biased)).collect::<Vec<_>>());
            for i in wanted {
                let table = score_semester(mechanisms[i], &assessments, estimates.as_deref(), &stream)?;
                out[i] = table.totals();
            }
        }
        Ok(out)
    }
}

/// Strategy profile with a uniformly random set of `count` strategic agents.
pub fn strategic_profile(n: usize, count: usize, strategy: Strategy, rng: &RngStream) -> Vec<Strategy> {
    let mut profile = vec![Strategy::Truthful; n];
    for k in sample(&mut rng.rng(), n, count) {
        profile[k] = strategy;
    }
    profile
}

pub fn semester_spec(config: &ExperimentConfig, setting: Setting, n_active: Option<u32>) -> SemesterSpec {
    SemesterSpec {
        n_students: config.n_students,
        n_assignments: config.n_assignments,
        setting,
        n_active: n_active.map(|n| n as usize),
    }
}

/// Population and submissions for one replication, from the same streams a
/// full semester would use.
pub fn fixed_parts(spec: &SemesterSpec, rng: &RngStream) -> Result<(Vec<GraderProfile>, Vec<Vec<Score>>)> {
    let population = sample_population(&rng.derive("population"), spec.n_students, spec.setting, spec.n_active)?;
    let true_scores = draw_true_scores(&rng.derive("true_scores"), spec.n_students, spec.n_assignments);
    Ok((population, true_scores))
}

pub(crate) fn record(
    experiment: &str,
    mechanism: Mechanism,
    setting: Setting,
    sweep_value: Option<u32>,
    replication: u32,
    metric: &str,
    value: f64,
) -> Record {
    Record {
        experiment: experiment.into(),
        mechanism: mechanism.name(),
        effort_model: setting.effort.name().into(),
        biased: setting.biased,
        sweep_value,
        replication,
        metric: metric.into(),
        value,
    }
}

/// Output of one configured run, keyed by file name.
#[derive(Debug, Default)]
pub struct RunOutput {
    pub records: Vec<(String, Vec<Record>)>,
    pub validation: Vec<crate::output::ValidationRow>,
}

pub fn run(config: &ExperimentConfig) -> Result<RunOutput> {
    config.validate()?;
    let mut out = RunOutput::default();
    match config.experiment {
        ExperimentKind::MeasurementIntegrity => {
            out.records.push(("measurement_integrity.csv".into(), run_measurement_integrity(config)?));
        }
        ExperimentKind::MetricVariance => {
            out.records.push(("metric_variance.csv".into(), run_metric_variance(config)?));
        }
        ExperimentKind::Deviation => {
            let mut all = Vec::new();
            for strategy in config.strategies()? {
                all.extend(run_deviation(config, strategy)?);
            }
            out.records.push(("deviation.csv".into(), all));
        }
        ExperimentKind::RankingQuality => {
            let mut all = Vec::new();
            for strategy in config.strategies()? {
                all.extend(run_ranking_quality(config, strategy)?);
            }
            out.records.push(("ranking_quality.csv".into(), all));
        }
        ExperimentKind::ValidateEstimation => out.validation = run_validation(config)?,
    }
    Ok(out)
}

pub(crate) fn progress(experiment: &str, what: impl std::fmt::Display) {
    eprintln!("{experiment}: {what} done");
}
