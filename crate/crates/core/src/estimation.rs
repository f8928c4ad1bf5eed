//! Point estimates of true scores, grader biases, and grader reliabilities
//! under a Gaussian peer grading model, fit per assignment by alternating
//! posterior-mean updates.
//!
//! Model: true score `g ~ N(7, 2.1)`, reliability `τ ~ Gamma(10/1.05, 10)`
//! (shape, rate), bias `b ~ N(0, 1)`, report `r ~ N(g + b, 1/τ)`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::model::{PRIOR_MEAN, PRIOR_VARIANCE};
use crate::semester::Assessment;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pg1Hyperparams {
    pub score_mean: f64,
    pub score_variance: f64,
    /// Gamma prior shape `α₀` of the reliabilities.
    pub reliability_shape: f64,
    /// Gamma prior rate `β₀` of the reliabilities.
    pub reliability_rate: f64,
    /// Variance of the zero-mean normal prior on biases.
    pub bias_variance: f64,
    /// Stop once the ℓ₂ change of the score vector is at most this.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for Pg1Hyperparams {
    fn default() -> Self {
        Pg1Hyperparams {
            score_mean: PRIOR_MEAN,
            score_variance: PRIOR_VARIANCE,
            reliability_shape: 10.0 / 1.05,
            reliability_rate: 10.0,
            bias_variance: 1.0,
            tolerance: 1e-4,
            max_iterations: 1000,
        }
    }
}

impl Pg1Hyperparams {
    /// Weight of the score prior in the true score update.
    pub fn prior_weight(&self) -> f64 {
        libm::sqrt(1.0 / self.score_variance)
    }

    /// Prior mean of the reliabilities.
    pub fn reliability_mean(&self) -> f64 {
        self.reliability_shape / self.reliability_rate
    }
}

/// Estimates for one assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct Pg1Estimate {
    /// Estimated true score per submission.
    pub scores: Vec<f64>,
    /// Estimated bias per agent (all zero in unbiased settings).
    pub biases: Vec<f64>,
    /// Estimated reliability per agent.
    pub reliabilities: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl Pg1Estimate {
    /// Every parameter at its prior mean.
    pub fn initial(n: usize, hp: &Pg1Hyperparams) -> Self {
        Pg1Estimate {
            scores: vec![hp.score_mean; n],
            biases: vec![0.0; n],
            reliabilities: vec![hp.reliability_mean(); n],
            iterations: 0,
            converged: false,
        }
    }
}

pub fn estimate_pg1(a: &Assessment<'_>, biased: bool) -> Pg1Estimate {
    estimate_pg1_with(a, biased, &Pg1Hyperparams::default())
}

/// Runs score, bias, and reliability updates in that order (each using the
/// values just computed) until the scores settle or the iteration cap hits.
/// With `biased == false` biases stay fixed at zero.
pub fn estimate_pg1_with(a: &Assessment<'_>, biased: bool, hp: &Pg1Hyperparams) -> Pg1Estimate {
    let n = a.graph.n_agents();
    let mut est = Pg1Estimate::initial(n, hp);
    let mut previous = est.scores.clone();
    while est.iterations < hp.max_iterations {
        update_scores(a, &mut est, hp);
        if biased {
            update_biases(a, &mut est, hp);
        }
        update_reliabilities(a, &mut est, hp);
        est.iterations += 1;
        let change = l2_distance(&previous, &est.scores);
        if change <= hp.tolerance {
            est.converged = true;
            break;
        }
        previous.copy_from_slice(&est.scores);
    }
    est
}

fn l2_distance(a: &[f64], b: &[f64]) -> f64 {
    libm::sqrt(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum())
}

/// `ĝ = (7·w₀ + Σ √τ_k (r_k − b_k)) / (w₀ + Σ √τ_k)` with `w₀ = √(1/2.1)`.
pub fn update_scores(a: &Assessment<'_>, est: &mut Pg1Estimate, hp: &Pg1Hyperparams) {
    let w0 = hp.prior_weight();
    for s in 0..a.graph.n_agents() {
        let (mut num, mut den) = (hp.score_mean * w0, w0);
        for edge in a.edges_of(s) {
            let k = a.graph.grader(edge);
            let w = libm::sqrt(est.reliabilities[k]);
            num += w * (f64::from(a.reports[edge]) - est.biases[k]);
            den += w;
        }
        est.scores[s] = num / den;
    }
}

/// Posterior mean of each bias under the `N(0, 1)` prior:
/// `b = τ Σ (r − ĝ) / (1 + n τ)`.
pub fn update_biases(a: &Assessment<'_>, est: &mut Pg1Estimate, hp: &Pg1Hyperparams) {
    let prior_precision = 1.0 / hp.bias_variance;
    for k in 0..a.graph.n_agents() {
        let tasks = a.graph.tasks_of(k);
        let residual: f64 = tasks
            .iter()
            .map(|&e| f64::from(a.reports[e]) - est.scores[a.graph.submission(e)])
            .sum();
        let tau = est.reliabilities[k];
        est.biases[k] = tau * residual / (prior_precision + tasks.len() as f64 * tau);
    }
}

/// Posterior mean of each reliability under the Gamma prior:
/// `τ = (α₀ + n/2) / (β₀ + ½ Σ (r − (ĝ + b))²)`.
pub fn update_reliabilities(a: &Assessment<'_>, est: &mut Pg1Estimate, hp: &Pg1Hyperparams) {
    for k in 0..a.graph.n_agents() {
        let tasks = a.graph.tasks_of(k);
        let sse: f64 = tasks
            .iter()
            .map(|&e| {
                let r = f64::from(a.reports[e]) - (est.scores[a.graph.submission(e)] + est.biases[k]);
                r * r
            })
            .sum();
        est.reliabilities[k] =
            (hp.reliability_shape + tasks.len() as f64 / 2.0) / (hp.reliability_rate + 0.5 * sse);
    }
}

/// True score estimate for `submission` from every grader except `agent`,
/// using the biases and reliabilities already in `est`.
pub fn estimate_pg1_excluding(
    a: &Assessment<'_>,
    est: &Pg1Estimate,
    agent: usize,
    submission: usize,
) -> Result<f64> {
    if a.graph.edge_of(agent, submission).is_none() {
        return Err(Error::NotAGrader { agent, submission });
    }
    let hp = Pg1Hyperparams::default();
    let w0 = hp.prior_weight();
    let (mut num, mut den) = (hp.score_mean * w0, w0);
    for edge in a.edges_of(submission) {
        let k = a.graph.grader(edge);
        if k == agent {
            continue;
        }
        let w = libm::sqrt(est.reliabilities[k]);
        num += w * (f64::from(a.reports[edge]) - est.biases[k]);
        den += w;
    }
    Ok(num / den)
}
