//! Simulating a semester of peer grading: populations, submissions, grading
//! graphs, signals, and the reports that strategies derive from them.

use alloc::vec::Vec;
use core::ops::Range;

use crate::error::{Error, Result};
use crate::graph::{build_grading_graph, GraphKind, GradingGraph};
use crate::model::{draw_true_scores, generate_signal, num_draws, sample_population, GraderProfile, Score, Setting, MAX_SCORE};
use crate::rng::RngStream;
use crate::strategy::{Strategy, StrategyContext};

/// Reports for one assignment, aligned with the edges of its grading graph.
#[derive(Debug, Clone, Copy)]
pub struct Assessment<'a> {
    pub graph: &'a GradingGraph,
    pub reports: &'a [Score],
}

impl<'a> Assessment<'a> {
    pub fn new(graph: &'a GradingGraph, reports: &'a [Score]) -> Result<Self> {
        if reports.len() != graph.n_edges() {
            return Err(Error::MissingReports { expected: graph.n_edges(), found: reports.len() });
        }
        if reports.iter().any(|&r| r > MAX_SCORE) {
            return Err(Error::InvalidArgument("report outside the score space"));
        }
        Ok(Assessment { graph, reports })
    }

    /// Edges (grading tasks) of submission `s`.
    pub fn edges_of(&self, s: usize) -> Range<usize> {
        let d = self.graph.degree();
        s * d..(s + 1) * d
    }

    pub fn report(&self, edge: usize) -> Score {
        self.reports[edge]
    }
}

/// Sizes and setting of a simulated semester.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemesterSpec {
    pub n_students: usize,
    pub n_assignments: usize,
    pub setting: Setting,
    /// Active graders in a binary-effort population (defaults to half).
    pub n_active: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssignmentData {
    pub true_scores: Vec<Score>,
    pub graph: GradingGraph,
    /// Signal per grading task (edge).
    pub signals: Vec<Score>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SemesterData {
    pub population: Vec<GraderProfile>,
    pub contexts: Vec<StrategyContext>,
    pub assignments: Vec<AssignmentData>,
}

/// Signals for every grading task of one assignment. The number of latent
/// draws is resampled for every task.
pub fn simulate_assignment(
    population: &[GraderProfile],
    true_scores: &[Score],
    graph: &GradingGraph,
    rng: &RngStream,
) -> Vec<Score> {
    let mut gen = rng.rng();
    (0..graph.n_edges())
        .map(|edge| {
            let profile = &population[graph.grader(edge)];
            let draws = num_draws(profile, &mut gen);
            generate_signal(true_scores[graph.submission(edge)], profile.bias, draws, &mut gen)
        })
        .collect()
}

fn graph_label(kind: GraphKind) -> &'static str {
    match kind {
        GraphKind::Regular => "regular",
        GraphKind::Clusters => "clusters",
    }
}

impl SemesterData {
    /// A full semester: population and submissions come from streams that do
    /// not depend on `kind`, so semesters with either graph kind share them.
    pub fn generate(spec: &SemesterSpec, kind: GraphKind, rng: &RngStream) -> Result<Self> {
        let population =
            sample_population(&rng.derive("population"), spec.n_students, spec.setting, spec.n_active)?;
        let true_scores = draw_true_scores(&rng.derive("true_scores"), spec.n_students, spec.n_assignments);
        Self::simulate(population, &true_scores, kind, rng)
    }

    /// Grading graphs, signals, and strategy contexts for a fixed population
    /// and fixed submissions (`true_scores[assignment][student]`).
    pub fn simulate(
        population: Vec<GraderProfile>,
        true_scores: &[Vec<Score>],
        kind: GraphKind,
        rng: &RngStream,
    ) -> Result<Self> {
        let n = population.len();
        let mut ctx_rng = rng.derive("strategy_context").rng();
        let contexts = population.iter().map(|p| StrategyContext::draw(p, &mut ctx_rng)).collect();
        let graph_rng = rng.derive(graph_label(kind));
        let assignments = true_scores
            .iter()
            .enumerate()
            .map(|(j, scores)| {
                if scores.len() != n {
                    return Err(Error::InvalidArgument("true scores do not match population size"));
                }
                let stream = graph_rng.index(j as u64);
                let graph = build_grading_graph(&stream.derive("graph"), n, kind)?;
                let signals = simulate_assignment(&population, scores, &graph, &stream.derive("signals"));
                Ok(AssignmentData { true_scores: scores.clone(), graph, signals })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SemesterData { population, contexts, assignments })
    }

    pub fn n_agents(&self) -> usize {
        self.population.len()
    }

    pub fn truthful_reports(&self) -> Vec<Vec<Score>> {
        self.assignments.iter().map(|a| a.signals.clone()).collect()
    }

    /// Reports when agent `k` follows `strategies[k]`. Randomized strategies
    /// draw from a stream owned by (agent, assignment), so one agent's
    /// choice never shifts another agent's noise.
    pub fn reports(&self, strategies: &[Strategy], rng: &RngStream) -> Vec<Vec<Score>> {
        let stream = rng.derive("reports");
        self.assignments
            .iter()
            .enumerate()
            .map(|(j, a)| {
                let mut reports = a.signals.clone();
                for (k, &strategy) in strategies.iter().enumerate() {
                    if strategy == Strategy::Truthful {
                        continue;
                    }
                    let mut gen = stream.index(k as u64).index(j as u64).rng();
                    for &edge in a.graph.tasks_of(k) {
                        reports[edge] = strategy.apply(a.signals[edge], &self.contexts[k], &mut gen);
                    }
                }
                reports
            })
            .collect()
    }

    /// Per-assignment views pairing each grading graph with `reports`.
    pub fn assessments<'a>(&'a self, reports: &'a [Vec<Score>]) -> Vec<Assessment<'a>> {
        self.assignments
            .iter()
            .zip(reports)
            .map(|(a, r)| Assessment { graph: &a.graph, reports: r })
            .collect()
    }
}
