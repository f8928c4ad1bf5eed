//! Mechanisms that use only the reports: consensus MSE, output agreement,
//! peer truth serum, Φ-divergence pairing and DMI.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

use super::agent_totals;
use crate::error::{Error, Result};
use crate::graph::{relabel_edge, GradingGraph, CLUSTER_SIZE};
use crate::model::{Score, NUM_SCORES};
use crate::phi::Divergence;
use crate::rng::RngStream;
use crate::semester::Assessment;

/// Threshold of the binary projection used by DMI.
pub const DMI_THRESHOLD: Score = 7;

/// Mean of the reports on submission `s`.
pub fn consensus(a: &Assessment<'_>, s: usize) -> f64 {
    let edges = a.edges_of(s);
    let n = edges.len() as f64;
    edges.map(|e| f64::from(a.report(e))).sum::<f64>() / n
}

/// Negative mean squared distance of each agent's reports from the
/// consensus of the submissions it graded.
pub fn score_mse(a: &Assessment<'_>) -> Vec<f64> {
    let g = a.graph;
    let consensus: Vec<f64> = (0..g.n_agents()).map(|s| consensus(a, s)).collect();
    (0..g.n_agents())
        .map(|k| {
            let tasks = g.tasks_of(k);
            let sse: f64 = tasks
                .iter()
                .map(|&e| {
                    let d = f64::from(a.report(e)) - consensus[g.submission(e)];
                    d * d
                })
                .sum();
            -sse / tasks.len() as f64
        })
        .collect()
}

/// Per-edge average over co-graders of `f(edge, co_edge)`.
fn co_grader_mean(a: &Assessment<'_>, f: impl Fn(usize, usize) -> f64) -> Vec<f64> {
    let mut out = vec![0.0; a.graph.n_edges()];
    for s in 0..a.graph.n_agents() {
        let edges = a.edges_of(s);
        let peers = (edges.len() - 1) as f64;
        for e in edges.clone() {
            let total: f64 = edges.clone().filter(|&o| o != e).map(|o| f(e, o)).sum();
            out[e] = total / peers;
        }
    }
    out
}

/// Output agreement: per task, the fraction of co-graders reporting the
/// same score.
pub fn score_oa(a: &Assessment<'_>) -> Vec<f64> {
    let edge = co_grader_mean(a, |e, o| if a.report(e) == a.report(o) { 1.0 } else { 0.0 });
    agent_totals(a.graph, &edge)
}

/// Running histogram of reports for the peer truth serum. It starts empty
/// each semester and absorbs an assignment's reports after that assignment
/// is scored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PtsState {
    counts: [u64; NUM_SCORES],
}

impl Default for PtsState {
    fn default() -> Self {
        Self::new()
    }
}

impl PtsState {
    pub fn new() -> Self {
        PtsState { counts: [0; NUM_SCORES] }
    }

    /// Add-one smoothed frequency of every score.
    pub fn distribution(&self) -> [f64; NUM_SCORES] {
        let total: u64 = self.counts.iter().sum();
        let denom = (total + NUM_SCORES as u64) as f64;
        self.counts.map(|c| (c + 1) as f64 / denom)
    }

    pub fn record(&mut self, reports: &[Score]) {
        for &r in reports {
            self.counts[usize::from(r)] += 1;
        }
    }
}

/// Peer truth serum: `1 / R[r]` for every co-grader that matches, averaged
/// over co-graders. `state` is updated with this assignment's reports.
pub fn score_pts(a: &Assessment<'_>, state: &mut PtsState) -> Vec<f64> {
    let freq = state.distribution();
    let edge = co_grader_mean(a, |e, o| {
        let r = a.report(e);
        if r == a.report(o) {
            1.0 / freq[usize::from(r)]
        } else {
            0.0
        }
    });
    state.record(a.reports);
    agent_totals(a.graph, &edge)
}

/// Slot pairs `(i, j)`, `i < j`, of one submission's graders.
pub fn slot_pairs(degree: usize) -> impl Iterator<Item = (usize, usize)> + Clone {
    (0..degree).flat_map(move |i| (i + 1..degree).map(move |j| (i, j)))
}

pub fn pairs_per_submission(degree: usize) -> usize {
    degree * degree.saturating_sub(1) / 2
}

/// Randomness of a Φ-divergence pairing round, drawn without looking at
/// the reports.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairingPlan {
    /// Which half each submission falls in for cross-fitting.
    pub half: Vec<bool>,
    /// For submission `s` and slot pair index `t`, entry
    /// `s * pairs_per_submission + t` holds the penalty edges `(p, q)`:
    /// `p` is another task of the first grader and `q` a task of the second
    /// grader on neither `s` nor the submission of `p`.
    pub penalties: Vec<(usize, usize)>,
}

impl PairingPlan {
    pub fn draw(graph: &GradingGraph, rng: &RngStream) -> Result<Self> {
        let n = graph.n_agents();
        let d = graph.degree();
        let mut gen = rng.derive("half").rng();
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut gen);
        let mut half = vec![false; n];
        for &s in &order[n / 2..] {
            half[s] = true;
        }

        let mut gen = rng.derive("penalty").rng();
        let mut penalties = Vec::with_capacity(n * pairs_per_submission(d));
        for s in 0..n {
            let graders = graph.graders_of(s);
            for (i, j) in slot_pairs(d) {
                let (k, l) = (graders[i], graders[j]);
                let p = pick(&mut gen, graph.tasks_of(k), |e| graph.submission(e) != s)?;
                let sp = graph.submission(p);
                let q = pick(&mut gen, graph.tasks_of(l), |e| {
                    let t = graph.submission(e);
                    t != s && t != sp
                })?;
                penalties.push((p, q));
            }
        }
        Ok(PairingPlan { half, penalties })
    }

    /// The same plan after renaming agents (and their submissions) by `perm`.
    pub fn relabel(&self, perm: &[usize], degree: usize) -> Self {
        let n = self.half.len();
        let per = pairs_per_submission(degree);
        let mut half = vec![false; n];
        let mut penalties = vec![(0, 0); self.penalties.len()];
        for s in 0..n {
            half[perm[s]] = self.half[s];
            for t in 0..per {
                let (p, q) = self.penalties[s * per + t];
                penalties[perm[s] * per + t] = (relabel_edge(p, degree, perm), relabel_edge(q, degree, perm));
            }
        }
        PairingPlan { half, penalties }
    }

    fn check(&self, graph: &GradingGraph) -> Result<()> {
        if self.half.len() != graph.n_agents()
            || self.penalties.len() != graph.n_agents() * pairs_per_submission(graph.degree())
        {
            return Err(Error::InvalidArgument("pairing plan does not match the graph"));
        }
        Ok(())
    }
}

fn pick<R: Rng>(gen: &mut R, edges: &[usize], keep: impl Fn(usize) -> bool) -> Result<usize> {
    let candidates: Vec<usize> = edges.iter().copied().filter(|&e| keep(e)).collect();
    candidates.choose(gen).copied().ok_or(Error::InsufficientTasks)
}

/// Runs the pairing round: for every submission and pair of its graders,
/// `pay(bonus_first, bonus_second, penalty_first, penalty_second)` is
/// credited to both graders as a share of their task reward on that
/// submission. Per-task rewards are summed per agent.
pub(crate) fn pairing_rewards(
    a: &Assessment<'_>,
    plan: &PairingPlan,
    mut pay: impl FnMut(usize, usize, usize, usize) -> Result<f64>,
) -> Result<Vec<f64>> {
    let g = a.graph;
    plan.check(g)?;
    let d = g.degree();
    let per = pairs_per_submission(d);
    let peers = (d - 1) as f64;
    let mut edge = vec![0.0; g.n_edges()];
    for s in 0..g.n_agents() {
        for (t, (i, j)) in slot_pairs(d).enumerate() {
            let (ei, ej) = (s * d + i, s * d + j);
            let (p, q) = plan.penalties[s * per + t];
            let payment = pay(ei, ej, p, q)? / peers;
            edge[ei] += payment;
            edge[ej] += payment;
        }
    }
    Ok(agent_totals(g, &edge))
}

/// Add-one smoothed joint and marginal report frequencies, counting every
/// ordered pair of co-graders.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalJp {
    joint: [[u64; NUM_SCORES]; NUM_SCORES],
    marginal: [u64; NUM_SCORES],
}

impl EmpiricalJp {
    pub fn from_submissions(a: &Assessment<'_>, submissions: impl IntoIterator<Item = usize>) -> Self {
        let mut joint = [[0u64; NUM_SCORES]; NUM_SCORES];
        let mut marginal = [0u64; NUM_SCORES];
        for s in submissions {
            let edges = a.edges_of(s);
            for e in edges.clone() {
                let x = usize::from(a.report(e));
                marginal[x] += 1;
                for o in edges.clone().filter(|&o| o != e) {
                    joint[x][usize::from(a.report(o))] += 1;
                }
            }
        }
        EmpiricalJp { joint, marginal }
    }

    /// Estimated `P(x, y) / (P(x) P(y))`.
    pub fn ratio(&self, x: Score, y: Score) -> f64 {
        let n = NUM_SCORES as f64;
        let pairs: u64 = self.joint.iter().flatten().sum();
        let reports: u64 = self.marginal.iter().sum();
        let (x, y) = (usize::from(x), usize::from(y));
        let pj = (self.joint[x][y] + 1) as f64 / (pairs as f64 + n * n);
        let m = reports as f64 + n;
        let px = (self.marginal[x] + 1) as f64 / m;
        let py = (self.marginal[y] + 1) as f64 / m;
        pj / (px * py)
    }
}

/// Φ-divergence pairing with the ratio estimated on the other half of the
/// submissions.
pub fn score_phi_div(a: &Assessment<'_>, div: Divergence, plan: &PairingPlan) -> Result<Vec<f64>> {
    plan.check(a.graph)?;
    let n = a.graph.n_agents();
    let tables = [
        EmpiricalJp::from_submissions(a, (0..n).filter(|&s| plan.half[s])),
        EmpiricalJp::from_submissions(a, (0..n).filter(|&s| !plan.half[s])),
    ];
    pairing_rewards(a, plan, |ei, ej, p, q| {
        // A submission in the `true` half is scored with the `false` half's table.
        let table = &tables[usize::from(plan.half[a.graph.submission(ei)])];
        let bonus = table.ratio(a.report(ei), a.report(ej));
        let penalty = table.ratio(a.report(p), a.report(q));
        div.pair_payment(bonus, penalty)
    })
}

/// Random split of each cluster's four tasks into two groups of two.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DmiPlan {
    /// Per cluster, its graded submissions in random order; the first two
    /// form one group and the last two the other.
    pub groups: Vec<[usize; CLUSTER_SIZE]>,
}

impl DmiPlan {
    pub fn draw(graph: &GradingGraph, rng: &RngStream) -> Result<Self> {
        let clusters = graph.clusters().ok_or(Error::NotClustered)?;
        let mut gen = rng.derive("split").rng();
        let groups = clusters
            .target
            .iter()
            .map(|&t| {
                let mut tasks = clusters.members[t];
                tasks.shuffle(&mut gen);
                tasks
            })
            .collect();
        Ok(DmiPlan { groups })
    }

    pub fn relabel(&self, perm: &[usize]) -> Self {
        DmiPlan { groups: self.groups.iter().map(|g| g.map(|s| perm[s])).collect() }
    }
}

fn project(r: Score) -> usize {
    usize::from(r >= DMI_THRESHOLD)
}

/// Determinant mutual information on reports projected to {0, 1}. Each pair
/// of cluster members is paid `det(M1) * det(M2)` over the two task groups,
/// and an agent's reward is the sum over its three partners.
pub fn score_dmi(a: &Assessment<'_>, plan: &DmiPlan) -> Result<Vec<f64>> {
    let g = a.graph;
    let clusters = g.clusters().ok_or(Error::NotClustered)?;
    if plan.groups.len() != clusters.members.len() {
        return Err(Error::InvalidArgument("split plan does not match the clusters"));
    }
    let report = |k: usize, s: usize| -> Result<Score> {
        g.edge_of(k, s).map(|e| a.report(e)).ok_or(Error::NotAGrader { agent: k, submission: s })
    };
    let mut rewards = vec![0.0; g.n_agents()];
    for (members, tasks) in clusters.members.iter().zip(&plan.groups) {
        for (i, j) in slot_pairs(CLUSTER_SIZE) {
            let (k, l) = (members[i], members[j]);
            let mut payment = 1i64;
            for group in tasks.chunks_exact(2) {
                let mut m = [[0i64; 2]; 2];
                for &s in group {
                    m[project(report(k, s)?)][project(report(l, s)?)] += 1;
                }
                payment *= m[0][0] * m[1][1] - m[0][1] * m[1][0];
            }
            rewards[k] += payment as f64;
            rewards[l] += payment as f64;
        }
    }
    Ok(rewards)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_clique_assignment, build_regular_grading_graph};

    fn regular(n: usize, seed: u64) -> GradingGraph {
        build_regular_grading_graph(&RngStream::new(seed), n, 4).unwrap()
    }

    #[test]
    fn unanimous_reports() {
        let g = regular(20, 1);
        let reports = vec![8u8; g.n_edges()];
        let a = Assessment::new(&g, &reports).unwrap();
        assert!(score_mse(&a).iter().all(|&r| r == 0.0));
        assert!(score_oa(&a).iter().all(|&r| r == 4.0));
        let mut state = PtsState::new();
        // Empty history gives R[r] = 1/11.
        assert!(score_pts(&a, &mut state).iter().all(|&r| (r - 44.0).abs() < 1e-12));
        assert_eq!(state.counts[8], 80);
    }

    #[test]
    fn mse_against_consensus() {
        let g = regular(10, 2);
        let mut reports = vec![5u8; g.n_edges()];
        reports[0] = 9; // submission 0, slot 0
        let a = Assessment::new(&g, &reports).unwrap();
        let rewards = score_mse(&a);
        let k = g.grader(0);
        // Consensus 6: the outlier is off by 3 on one of four tasks.
        assert!((rewards[k] + 9.0 / 4.0).abs() < 1e-12);
        let other = g.grader(1);
        assert!((rewards[other] + 1.0 / 4.0).abs() < 1e-12);
    }

    #[test]
    fn pts_distribution_is_smoothed() {
        let mut s = PtsState::new();
        s.record(&[3, 3, 10]);
        let d = s.distribution();
        assert!((d[3] - 3.0 / 14.0).abs() < 1e-15);
        assert!((d[0] - 1.0 / 14.0).abs() < 1e-15);
        assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn plan_penalties_are_valid() {
        let g = regular(30, 3);
        let plan = PairingPlan::draw(&g, &RngStream::new(4)).unwrap();
        assert_eq!(plan.half.iter().filter(|&&h| h).count(), 15);
        for s in 0..30 {
            let graders = g.graders_of(s);
            for (t, (i, j)) in slot_pairs(4).enumerate() {
                let (p, q) = plan.penalties[s * 6 + t];
                assert_eq!(g.grader(p), graders[i]);
                assert_eq!(g.grader(q), graders[j]);
                assert_ne!(g.submission(p), s);
                assert_ne!(g.submission(q), s);
                assert_ne!(g.submission(q), g.submission(p));
            }
        }
    }

    #[test]
    fn empirical_ratio_uniform_reports() {
        let g = regular(10, 5);
        let reports = vec![4u8; g.n_edges()];
        let a = Assessment::new(&g, &reports).unwrap();
        let jp = EmpiricalJp::from_submissions(&a, 0..10);
        // 120 ordered pairs, 40 reports, all on score 4.
        let expected = (121.0 / 241.0) / (41.0 / 51.0f64).powi(2);
        assert!((jp.ratio(4, 4) - expected).abs() < 1e-12);
        let off = (1.0 / 241.0) / (41.0 / 51.0 * 1.0 / 51.0);
        assert!((jp.ratio(4, 5) - off).abs() < 1e-12);
    }

    #[test]
    fn dmi_requires_clusters() {
        let g = regular(12, 6);
        assert_eq!(DmiPlan::draw(&g, &RngStream::new(0)), Err(Error::NotClustered));
    }

    #[test]
    fn dmi_perfectly_informative_cluster() {
        let g = build_clique_assignment(&RngStream::new(7), 8).unwrap();
        let plan = DmiPlan::draw(&g, &RngStream::new(8)).unwrap();
        // Within each group, one submission is high and one low; every grader
        // agrees, so each pair pays 1 * 1.
        let mut reports = vec![0u8; g.n_edges()];
        for group in &plan.groups {
            for pair in group.chunks_exact(2) {
                for e in a_edges(&g, pair[0]) {
                    reports[e] = 9;
                }
                for e in a_edges(&g, pair[1]) {
                    reports[e] = 2;
                }
            }
        }
        let a = Assessment::new(&g, &reports).unwrap();
        assert!(score_dmi(&a, &plan).unwrap().iter().all(|&r| r == 3.0));
    }

    fn a_edges(g: &GradingGraph, s: usize) -> core::ops::Range<usize> {
        s * g.degree()..(s + 1) * g.degree()
    }
}
