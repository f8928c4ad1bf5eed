//! Mechanisms built on the fitted PG1 parameters.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::IndexedRandom;

use super::agent_totals;
use super::nonparametric::{pairing_rewards, PairingPlan};
use crate::error::{Error, Result};
use crate::estimation::{estimate_pg1_excluding, Pg1Estimate};
use crate::graph::{relabel_edge, GradingGraph};
use crate::model::{PRIOR_MEAN, PRIOR_VARIANCE, TRUE_SCORE_P};
use crate::phi::Divergence;
use crate::rng::RngStream;
use crate::semester::Assessment;

/// Reliability assumed for every agent by the Φ-divergence mechanisms: that
/// of an active grader.
pub const ACTIVE_RELIABILITY: f64 = 1.0 / TRUE_SCORE_P;

/// Weight of the prior-mean penalty in AMSE_P.
pub const AMSE_PRIOR_WEIGHT: f64 = 0.1;

/// Means and reliabilities of two reports under the Gaussian model, where
/// report = true score + bias + noise of precision τ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JpParams {
    pub mean_i: f64,
    pub mean_j: f64,
    pub tau_i: f64,
    pub tau_j: f64,
}

impl JpParams {
    pub fn new(bias_i: f64, bias_j: f64, tau_i: f64, tau_j: f64) -> Result<Self> {
        for tau in [tau_i, tau_j] {
            if !(tau > 0.0 && tau.is_finite()) {
                return Err(Error::Domain(tau));
            }
        }
        Ok(JpParams { mean_i: PRIOR_MEAN + bias_i, mean_j: PRIOR_MEAN + bias_j, tau_i, tau_j })
    }

    /// Both reports from active graders with the given biases.
    pub fn active(bias_i: f64, bias_j: f64) -> Self {
        JpParams {
            mean_i: PRIOR_MEAN + bias_i,
            mean_j: PRIOR_MEAN + bias_j,
            tau_i: ACTIVE_RELIABILITY,
            tau_j: ACTIVE_RELIABILITY,
        }
    }

    /// Ratio of the joint density of the two reports at `(x, y)` to the
    /// product of their marginal densities.
    pub fn ratio(&self, x: f64, y: f64) -> f64 {
        let v = PRIOR_VARIANCE;
        let (ti, tj) = (self.tau_i, self.tau_j);
        let a = v + 1.0 / ti;
        let c = v + 1.0 / tj;
        let (dx, dy) = (x - self.mean_i, y - self.mean_j);
        let g = v * c * dx * dx - 2.0 * a * c * dx * dy + v * a * dy * dy;
        let scale = 0.5 * v * ti * tj / ((v * ti + v * tj + 1.0) * a * c);
        libm::sqrt(a * c / (a * c - v * v)) * libm::exp(-scale * g)
    }
}

/// Checked form of [`JpParams::ratio`].
pub fn jp_ratio(x: f64, y: f64, params: &JpParams) -> Result<f64> {
    JpParams::new(params.mean_i - PRIOR_MEAN, params.mean_j - PRIOR_MEAN, params.tau_i, params.tau_j)?;
    Ok(params.ratio(x, y))
}

fn check_estimate(a: &Assessment<'_>, est: &Pg1Estimate) -> Result<()> {
    let n = a.graph.n_agents();
    if est.scores.len() != n || est.biases.len() != n || est.reliabilities.len() != n {
        return Err(Error::InvalidArgument("estimate does not match the assignment"));
    }
    Ok(())
}

/// Bias-corrected report on `edge`.
fn corrected(a: &Assessment<'_>, est: &Pg1Estimate, edge: usize) -> f64 {
    f64::from(a.report(edge)) - est.biases[a.graph.grader(edge)]
}

fn per_agent_mean(a: &Assessment<'_>, mut f: impl FnMut(usize) -> f64) -> Vec<f64> {
    let g = a.graph;
    (0..g.n_agents())
        .map(|k| {
            let tasks = g.tasks_of(k);
            tasks.iter().map(|&e| f(e)).sum::<f64>() / tasks.len() as f64
        })
        .collect()
}

/// Negative mean squared error of bias-corrected reports against the
/// estimated true scores.
pub fn score_mse_p(a: &Assessment<'_>, est: &Pg1Estimate) -> Vec<f64> {
    per_agent_mean(a, |e| {
        let d = corrected(a, est, e) - est.scores[a.graph.submission(e)];
        -d * d
    })
}

/// MSE_P plus a reward for reporting away from the prior mean.
pub fn score_amse_p(a: &Assessment<'_>, est: &Pg1Estimate) -> Vec<f64> {
    per_agent_mean(a, |e| {
        let r = corrected(a, est, e);
        let d = r - est.scores[a.graph.submission(e)];
        let m = r - PRIOR_MEAN;
        -d * d + AMSE_PRIOR_WEIGHT * m * m
    })
}

/// Φ-divergence pairing with the closed-form ratio. Every agent is treated
/// as an active grader; only the estimated biases are used.
pub fn score_phi_div_p(
    a: &Assessment<'_>,
    est: &Pg1Estimate,
    div: Divergence,
    plan: &PairingPlan,
) -> Result<Vec<f64>> {
    check_estimate(a, est)?;
    let g = a.graph;
    let ratio = |e: usize, o: usize| {
        let params = JpParams::active(est.biases[g.grader(e)], est.biases[g.grader(o)]);
        params.ratio(f64::from(a.report(e)), f64::from(a.report(o)))
    };
    pairing_rewards(a, plan, |ei, ej, p, q| div.pair_payment(ratio(ei, ej), ratio(p, q)))
}

/// Randomness of a Φ-Div_P* round: for every edge, another task of the same
/// grader and a submission that grader did not grade.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruthPlan {
    /// Indexed by edge: `(penalty edge, penalty submission)`.
    pub penalties: Vec<(usize, usize)>,
}

impl GroundTruthPlan {
    pub fn draw(graph: &GradingGraph, rng: &RngStream) -> Result<Self> {
        let mut gen = rng.derive("penalty").rng();
        let n = graph.n_agents();
        let mut penalties = Vec::with_capacity(graph.n_edges());
        for e in 0..graph.n_edges() {
            let k = graph.grader(e);
            let s = graph.submission(e);
            let others: Vec<usize> = graph.tasks_of(k).iter().copied().filter(|&t| t != e).collect();
            let p = *others.choose(&mut gen).ok_or(Error::InsufficientTasks)?;
            let ungraded: Vec<usize> = (0..n).filter(|&q| graph.edge_of(k, q).is_none()).collect();
            let q = *ungraded.choose(&mut gen).ok_or(Error::InsufficientTasks)?;
            debug_assert_ne!(q, s);
            penalties.push((p, q));
        }
        Ok(GroundTruthPlan { penalties })
    }

    pub fn relabel(&self, perm: &[usize], degree: usize) -> Self {
        let mut penalties = vec![(0, 0); self.penalties.len()];
        for (e, &(p, q)) in self.penalties.iter().enumerate() {
            penalties[relabel_edge(e, degree, perm)] = (relabel_edge(p, degree, perm), perm[q]);
        }
        GroundTruthPlan { penalties }
    }
}

/// Φ-divergence pairing of each agent with the estimated true scores. The
/// bonus partner is the estimate without the agent's own report; the
/// penalty partner is the full estimate on a submission the agent did not
/// grade.
pub fn score_phi_div_p_star(
    a: &Assessment<'_>,
    est: &Pg1Estimate,
    div: Divergence,
    plan: &GroundTruthPlan,
) -> Result<Vec<f64>> {
    check_estimate(a, est)?;
    let g = a.graph;
    if plan.penalties.len() != g.n_edges() {
        return Err(Error::InvalidArgument("penalty plan does not match the graph"));
    }
    let mut edge = vec![0.0; g.n_edges()];
    for (e, reward) in edge.iter_mut().enumerate() {
        let k = g.grader(e);
        let params = JpParams::active(est.biases[k], 0.0);
        let truth = estimate_pg1_excluding(a, est, k, g.submission(e))?;
        let bonus = params.ratio(f64::from(a.report(e)), truth);
        let (p, q) = plan.penalties[e];
        let penalty = params.ratio(f64::from(a.report(p)), est.scores[q]);
        *reward = div.pair_payment(bonus, penalty)?;
    }
    Ok(agent_totals(g, &edge))
}

/// Per-agent `(bias-corrected reports, estimated scores)` over its tasks.
fn paired_values(a: &Assessment<'_>, est: &Pg1Estimate, k: usize) -> (Vec<f64>, Vec<f64>) {
    let tasks = a.graph.tasks_of(k);
    let x = tasks.iter().map(|&e| corrected(a, est, e)).collect();
    let y = tasks.iter().map(|&e| est.scores[a.graph.submission(e)]).collect();
    (x, y)
}

fn centred_sums(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        sxx += (xi - mx) * (xi - mx);
        syy += (yi - my) * (yi - my);
        sxy += (xi - mx) * (yi - my);
    }
    (sxx, syy, sxy)
}

/// Coefficient of determination of the estimated scores (observed) by the
/// bias-corrected reports (predicted). Constant inputs score 0.
pub fn score_r_squared(a: &Assessment<'_>, est: &Pg1Estimate) -> Vec<f64> {
    (0..a.graph.n_agents())
        .map(|k| {
            let (x, y) = paired_values(a, est, k);
            let (sxx, syy, _) = centred_sums(&x, &y);
            if sxx == 0.0 || syy == 0.0 {
                return 0.0;
            }
            let ss_res: f64 = x.iter().zip(&y).map(|(xi, yi)| (yi - xi) * (yi - xi)).sum();
            1.0 - ss_res / syy
        })
        .collect()
}

/// Pearson correlation of bias-corrected reports with the estimated scores.
/// Constant inputs score 0.
pub fn score_corr(a: &Assessment<'_>, est: &Pg1Estimate) -> Vec<f64> {
    (0..a.graph.n_agents())
        .map(|k| {
            let (x, y) = paired_values(a, est, k);
            let (sxx, syy, sxy) = centred_sums(&x, &y);
            if sxx == 0.0 || syy == 0.0 {
                return 0.0;
            }
            (sxy / libm::sqrt(sxx * syy)).clamp(-1.0, 1.0)
        })
        .collect()
}

/// Maximal correlation between two graders' reports implied by their
/// estimated reliabilities.
pub fn max_correlation(tau_i: f64, tau_j: f64) -> f64 {
    let v = PRIOR_VARIANCE;
    v / (libm::sqrt(v + 1.0 / tau_i) * libm::sqrt(v + 1.0 / tau_j))
}

/// Per task, the mean maximal correlation with the co-graders.
pub fn score_mcc(a: &Assessment<'_>, est: &Pg1Estimate) -> Vec<f64> {
    let g = a.graph;
    let mut edge = vec![0.0; g.n_edges()];
    for s in 0..g.n_agents() {
        let edges = a.edges_of(s);
        let peers = (edges.len() - 1) as f64;
        for e in edges.clone() {
            let tau = est.reliabilities[g.grader(e)];
            edge[e] = edges
                .clone()
                .filter(|&o| o != e)
                .map(|o| max_correlation(tau, est.reliabilities[g.grader(o)]))
                .sum::<f64>()
                / peers;
        }
    }
    agent_totals(g, &edge)
}
