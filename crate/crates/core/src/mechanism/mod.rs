//! Peer prediction mechanisms and semester-level scoring.
//!
//! Every mechanism maps one assignment's reports to one reward per agent.
//! Where a mechanism pairs an agent with each co-grader of a task, the
//! per-task reward is the average over those pairings, and per-task rewards
//! are summed over the agent's tasks (the MSE-style mechanisms instead
//! average squared errors over tasks). A semester reward is the sum over
//! assignments.

pub mod nonparametric;
pub mod parametric;

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::estimation::Pg1Estimate;
use crate::graph::{GraphKind, GradingGraph};
use crate::phi::Divergence;
use crate::rng::RngStream;
pub use crate::semester::Assessment;

use nonparametric::{DmiPlan, PairingPlan, PtsState};
use parametric::GroundTruthPlan;

/// Per-agent, per-assignment rewards.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardTable {
    n_agents: usize,
    n_assignments: usize,
    rewards: Vec<f64>,
}

impl RewardTable {
    pub fn new(n_agents: usize, n_assignments: usize) -> Self {
        RewardTable { n_agents, n_assignments, rewards: vec![0.0; n_agents * n_assignments] }
    }

    pub fn n_agents(&self) -> usize {
        self.n_agents
    }

    pub fn n_assignments(&self) -> usize {
        self.n_assignments
    }

    pub fn get(&self, agent: usize, assignment: usize) -> f64 {
        self.rewards[agent * self.n_assignments + assignment]
    }

    pub fn set_assignment(&mut self, assignment: usize, rewards: &[f64]) {
        assert_eq!(rewards.len(), self.n_agents, "one reward per agent");
        for (k, &r) in rewards.iter().enumerate() {
            self.rewards[k * self.n_assignments + assignment] = r;
        }
    }

    /// Sum of each agent's rewards over all assignments.
    pub fn totals(&self) -> Vec<f64> {
        self.rewards.chunks_exact(self.n_assignments.max(1)).map(|row| row.iter().sum()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mechanism {
    /// Negative mean squared distance from the consensus (mean) grade.
    Mse,
    /// Output agreement.
    Oa,
    /// Peer truth serum.
    Pts,
    /// Φ-divergence pairing with an empirical joint-to-marginal ratio.
    PhiDiv(Divergence),
    /// Determinant mutual information on binarised reports.
    Dmi,
    /// MSE of bias-corrected reports against estimated true scores.
    MseP,
    /// Φ-divergence pairing with the closed-form Gaussian ratio.
    PhiDivP(Divergence),
    /// Parametric Φ-divergence pairing against estimated true scores.
    PhiDivPStar(Divergence),
    /// Coefficient of determination against estimated true scores.
    RSquared,
    /// Pearson correlation against estimated true scores.
    Corr,
    /// Maximal correlation under the fitted Gaussian model.
    Mcc,
    /// MSE_P with a penalty for reporting close to the prior mean.
    AmseP,
}

impl Mechanism {
    /// Every mechanism, in listing order.
    pub fn all() -> Vec<Mechanism> {
        let mut all = vec![Mechanism::Mse, Mechanism::Oa, Mechanism::Pts];
        all.extend(Divergence::ALL.map(Mechanism::PhiDiv));
        all.extend([Mechanism::Dmi, Mechanism::MseP]);
        all.extend(Divergence::ALL.map(Mechanism::PhiDivP));
        all.extend(Divergence::ALL.map(Mechanism::PhiDivPStar));
        all.extend([Mechanism::RSquared, Mechanism::Corr, Mechanism::Mcc, Mechanism::AmseP]);
        all
    }

    pub fn name(&self) -> String {
        match self {
            Mechanism::Mse => "mse".into(),
            Mechanism::Oa => "oa".into(),
            Mechanism::Pts => "pts".into(),
            Mechanism::PhiDiv(d) => format!("phi_div:{d}"),
            Mechanism::Dmi => "dmi".into(),
            Mechanism::MseP => "mse_p".into(),
            Mechanism::PhiDivP(d) => format!("phi_div_p:{d}"),
            Mechanism::PhiDivPStar(d) => format!("phi_div_p_star:{d}"),
            Mechanism::RSquared => "r2".into(),
            Mechanism::Corr => "corr".into(),
            Mechanism::Mcc => "mcc".into(),
            Mechanism::AmseP => "amse_p".into(),
        }
    }

    /// Graph kind the mechanism is run on: clusters for DMI, regular
    /// graphs for everything else.
    pub fn graph_kind(&self) -> GraphKind {
        match self {
            Mechanism::Dmi => GraphKind::Clusters,
            _ => GraphKind::Regular,
        }
    }

    /// Whether the mechanism consumes parameter estimates.
    pub fn is_parametric(&self) -> bool {
        matches!(
            self,
            Mechanism::MseP
                | Mechanism::PhiDivP(_)
                | Mechanism::PhiDivPStar(_)
                | Mechanism::RSquared
                | Mechanism::Corr
                | Mechanism::Mcc
                | Mechanism::AmseP
        )
    }

    /// Tag of the random stream the mechanism draws from. Variants that
    /// differ only in the divergence share draws.
    fn stream_label(&self) -> &'static str {
        match self {
            Mechanism::PhiDiv(_) => "phi_div",
            Mechanism::PhiDivP(_) => "phi_div_p",
            Mechanism::PhiDivPStar(_) => "phi_div_p_star",
            Mechanism::Dmi => "dmi",
            _ => "deterministic",
        }
    }
}

impl fmt::Display for Mechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for Mechanism {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let unknown = || Error::UnknownMechanism(s.into());
        if let Some((family, divergence)) = s.split_once(':') {
            let d: Divergence = divergence.parse().map_err(|_| unknown())?;
            return match family {
                "phi_div" => Ok(Mechanism::PhiDiv(d)),
                "phi_div_p" => Ok(Mechanism::PhiDivP(d)),
                "phi_div_p_star" => Ok(Mechanism::PhiDivPStar(d)),
                _ => Err(unknown()),
            };
        }
        match s {
            "mse" => Ok(Mechanism::Mse),
            "oa" => Ok(Mechanism::Oa),
            "pts" => Ok(Mechanism::Pts),
            "dmi" => Ok(Mechanism::Dmi),
            "mse_p" => Ok(Mechanism::MseP),
            "r2" => Ok(Mechanism::RSquared),
            "corr" => Ok(Mechanism::Corr),
            "mcc" => Ok(Mechanism::Mcc),
            "amse_p" => Ok(Mechanism::AmseP),
            _ => Err(unknown()),
        }
    }
}

/// Sums per-edge rewards into per-agent rewards.
pub(crate) fn agent_totals(graph: &GradingGraph, edge_rewards: &[f64]) -> Vec<f64> {
    (0..graph.n_agents())
        .map(|k| graph.tasks_of(k).iter().map(|&e| edge_rewards[e]).sum())
        .collect()
}

/// Scores one assignment. `pts` is the running peer-truth-serum state and
/// is updated after scoring; `rng` addresses the assignment's mechanism
/// randomness, which never depends on the reports.
pub fn score_assignment(
    mechanism: Mechanism,
    a: &Assessment<'_>,
    estimate: Option<&Pg1Estimate>,
    pts: &mut PtsState,
    rng: &RngStream,
) -> Result<Vec<f64>> {
    let estimate = || estimate.ok_or_else(|| Error::MissingEstimate(mechanism.name()));
    match mechanism {
        Mechanism::Mse => Ok(nonparametric::score_mse(a)),
        Mechanism::Oa => Ok(nonparametric::score_oa(a)),
        Mechanism::Pts => Ok(nonparametric::score_pts(a, pts)),
        Mechanism::PhiDiv(d) => {
            let plan = PairingPlan::draw(a.graph, rng)?;
            nonparametric::score_phi_div(a, d, &plan)
        }
        Mechanism::Dmi => {
            let plan = DmiPlan::draw(a.graph, rng)?;
            nonparametric::score_dmi(a, &plan)
        }
        Mechanism::MseP => Ok(parametric::score_mse_p(a, estimate()?)),
        Mechanism::PhiDivP(d) => {
            let plan = PairingPlan::draw(a.graph, rng)?;
            parametric::score_phi_div_p(a, estimate()?, d, &plan)
        }
        Mechanism::PhiDivPStar(d) => {
            let plan = GroundTruthPlan::draw(a.graph, rng)?;
            parametric::score_phi_div_p_star(a, estimate()?, d, &plan)
        }
        Mechanism::RSquared => Ok(parametric::score_r_squared(a, estimate()?)),
        Mechanism::Corr => Ok(parametric::score_corr(a, estimate()?)),
        Mechanism::Mcc => Ok(parametric::score_mcc(a, estimate()?)),
        Mechanism::AmseP => Ok(parametric::score_amse_p(a, estimate()?)),
    }
}

/// Scores every assignment of a semester in order, threading the
/// peer-truth-serum state from one assignment to the next.
pub fn score_semester(
    mechanism: Mechanism,
    assessments: &[Assessment<'_>],
    estimates: Option<&[Pg1Estimate]>,
    rng: &RngStream,
) -> Result<RewardTable> {
    let n_agents = assessments.first().map_or(0, |a| a.graph.n_agents());
    let mut table = RewardTable::new(n_agents, assessments.len());
    let mut pts = PtsState::new();
    let stream = rng.derive(mechanism.stream_label());
    for (j, a) in assessments.iter().enumerate() {
        let estimate = estimates.and_then(|e| e.get(j));
        let rewards = score_assignment(mechanism, a, estimate, &mut pts, &stream.index(j as u64))?;
        table.set_assignment(j, &rewards);
    }
    Ok(table)
}
