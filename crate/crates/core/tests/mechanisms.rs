use peerpred_core::graph::{build_clique_assignment, build_regular_grading_graph, relabel_edge, GradingGraph};
use peerpred_core::mechanism::nonparametric::{
    score_dmi, score_mse, score_oa, score_phi_div, score_pts, slot_pairs, DmiPlan, PairingPlan, PtsState,
};
use peerpred_core::mechanism::parametric::{
    score_amse_p, score_corr, score_mcc, score_mse_p, score_phi_div_p, score_phi_div_p_star, score_r_squared,
    GroundTruthPlan, JpParams,
};
use peerpred_core::mechanism::score_semester;
use peerpred_core::model::Score;
use peerpred_core::{estimate_pg1, Assessment, Divergence, Error, Mechanism, Pg1Estimate, RngStream};
use proptest::prelude::*;

fn random_reports(graph: &GradingGraph, seed: u64) -> Vec<Score> {
    use rand::Rng;
    let mut rng = RngStream::new(seed).rng();
    (0..graph.n_edges()).map(|_| rng.random_range(0..=10)).collect()
}

fn permutation(n: usize, seed: u64) -> Vec<usize> {
    use rand::seq::SliceRandom;
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(&mut RngStream::new(seed).rng());
    p
}

fn relabel_reports(reports: &[Score], degree: usize, perm: &[usize]) -> Vec<Score> {
    let mut out = vec![0; reports.len()];
    for (e, &r) in reports.iter().enumerate() {
        out[relabel_edge(e, degree, perm)] = r;
    }
    out
}

fn assert_permuted(original: &[f64], relabelled: &[f64], perm: &[usize]) {
    for (k, &r) in original.iter().enumerate() {
        assert!((relabelled[perm[k]] - r).abs() < 1e-9, "agent {k}: {r} vs {}", relabelled[perm[k]]);
    }
}

/// Every mechanism on a regular graph, with explicit plans.
fn all_regular(a: &Assessment<'_>, est: &Pg1Estimate, pairing: &PairingPlan, truth: &GroundTruthPlan) -> Vec<Vec<f64>> {
    let d = Divergence::SquaredHellinger;
    vec![
        score_mse(a),
        score_oa(a),
        score_pts(a, &mut PtsState::new()),
        score_phi_div(a, Divergence::Kl, pairing).unwrap(),
        score_mse_p(a, est),
        score_phi_div_p(a, est, d, pairing).unwrap(),
        score_phi_div_p_star(a, est, d, truth).unwrap(),
        score_r_squared(a, est),
        score_corr(a, est),
        score_mcc(a, est),
        score_amse_p(a, est),
    ]
}

#[test]
fn rewards_do_not_depend_on_agent_names() {
    for seed in 0..5 {
        let g = build_regular_grading_graph(&RngStream::new(seed), 40, 4).unwrap();
        let reports = random_reports(&g, seed + 10);
        let perm = permutation(40, seed + 20);
        let g2 = g.relabel(&perm);
        let reports2 = relabel_reports(&reports, 4, &perm);
        let a = Assessment::new(&g, &reports).unwrap();
        let a2 = Assessment::new(&g2, &reports2).unwrap();

        let pairing = PairingPlan::draw(&g, &RngStream::new(seed + 30)).unwrap();
        let truth = GroundTruthPlan::draw(&g, &RngStream::new(seed + 40)).unwrap();
        let est = estimate_pg1(&a, true);
        let est2 = estimate_pg1(&a2, true);
        for s in 0..40 {
            assert!((est.scores[s] - est2.scores[perm[s]]).abs() < 1e-9);
        }
        let before = all_regular(&a, &est, &pairing, &truth);
        let after = all_regular(&a2, &est2, &pairing.relabel(&perm, 4), &truth.relabel(&perm, 4));
        for (x, y) in before.iter().zip(&after) {
            assert_permuted(x, y, &perm);
        }
    }
}

#[test]
fn dmi_does_not_depend_on_agent_names() {
    let g = build_clique_assignment(&RngStream::new(1), 40).unwrap();
    let reports = random_reports(&g, 2);
    let perm = permutation(40, 3);
    let plan = DmiPlan::draw(&g, &RngStream::new(4)).unwrap();
    let a = Assessment::new(&g, &reports).unwrap();
    let g2 = g.relabel(&perm);
    let reports2 = relabel_reports(&reports, 4, &perm);
    let a2 = Assessment::new(&g2, &reports2).unwrap();
    assert_permuted(&score_dmi(&a, &plan).unwrap(), &score_dmi(&a2, &plan.relabel(&perm)).unwrap(), &perm);
}

/// Output agreement computed agent by agent: for each task, enumerate the
/// co-graders and average the match indicator.
fn oa_by_enumeration(g: &GradingGraph, reports: &[Score]) -> Vec<f64> {
    (0..g.n_agents())
        .map(|k| {
            let mut total = 0.0;
            for s in 0..g.n_agents() {
                let Some(mine) = g.edge_of(k, s) else { continue };
                let peers: Vec<usize> = g.graders_of(s).iter().copied().filter(|&l| l != k).collect();
                let hits = peers.iter().filter(|&&l| reports[g.edge_of(l, s).unwrap()] == reports[mine]).count();
                total += hits as f64 / peers.len() as f64;
            }
            total
        })
        .collect()
}

/// Φ-divergence rewards computed agent by agent with a separately counted
/// joint/marginal table.
fn phi_div_by_enumeration(g: &GradingGraph, reports: &[Score], plan: &PairingPlan, d: Divergence) -> Vec<f64> {
    let n = g.n_agents();
    let table = |half: bool| {
        let mut joint = [[0.0f64; 11]; 11];
        let mut marg = [0.0f64; 11];
        for s in (0..n).filter(|&s| plan.half[s] == half) {
            let graders = g.graders_of(s);
            for &k in graders {
                let x = reports[g.edge_of(k, s).unwrap()] as usize;
                marg[x] += 1.0;
                for &l in graders.iter().filter(|&&l| l != k) {
                    joint[x][reports[g.edge_of(l, s).unwrap()] as usize] += 1.0;
                }
            }
        }
        let jt: f64 = joint.iter().flatten().sum();
        let mt: f64 = marg.iter().sum();
        move |x: Score, y: Score| {
            let (x, y) = (x as usize, y as usize);
            ((joint[x][y] + 1.0) / (jt + 121.0)) / (((marg[x] + 1.0) / (mt + 11.0)) * ((marg[y] + 1.0) / (mt + 11.0)))
        }
    };
    let tables = [table(true), table(false)];
    let mut rewards = vec![0.0; n];
    for s in 0..n {
        let graders = g.graders_of(s);
        let ratio = &tables[usize::from(plan.half[s])];
        for (t, (i, j)) in slot_pairs(4).enumerate() {
            let (k, l) = (graders[i], graders[j]);
            let (p, q) = plan.penalties[s * 6 + t];
            let bonus = ratio(reports[g.edge_of(k, s).unwrap()], reports[g.edge_of(l, s).unwrap()]);
            let penalty = ratio(reports[p], reports[q]);
            let pay = d.subgradient(bonus).unwrap() - d.conjugate(d.subgradient(penalty).unwrap()).unwrap();
            rewards[k] += pay / 3.0;
            rewards[l] += pay / 3.0;
        }
    }
    rewards
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn pairing_mechanisms_match_enumeration(seed in 0u64..1_000_000, n in 3usize..15) {
        let n = 2 * n;
        let g = build_regular_grading_graph(&RngStream::new(seed), n, 4).unwrap();
        let reports = random_reports(&g, seed ^ 0xAB);
        let a = Assessment::new(&g, &reports).unwrap();
        let oa = score_oa(&a);
        for (x, y) in oa.iter().zip(oa_by_enumeration(&g, &reports)) {
            prop_assert!((x - y).abs() < 1e-12);
        }
        let plan = PairingPlan::draw(&g, &RngStream::new(seed + 1)).unwrap();
        for d in Divergence::ALL {
            let got = score_phi_div(&a, d, &plan).unwrap();
            let want = phi_div_by_enumeration(&g, &reports, &plan, d);
            for (x, y) in got.iter().zip(&want) {
                prop_assert!((x - y).abs() < 1e-9 * (1.0 + y.abs()), "{}: {} vs {}", d, x, y);
            }
        }
    }

    #[test]
    fn bounded_rewards(seed in 0u64..1_000_000) {
        let g = build_regular_grading_graph(&RngStream::new(seed), 20, 4).unwrap();
        let reports = random_reports(&g, seed + 7);
        let a = Assessment::new(&g, &reports).unwrap();
        let est = estimate_pg1(&a, true);
        for r in score_oa(&a) {
            prop_assert!((0.0..=4.0).contains(&r));
        }
        for r in score_mse(&a) {
            prop_assert!((-100.0..=0.0).contains(&r));
        }
        for r in score_corr(&a, &est) {
            prop_assert!((-1.0..=1.0).contains(&r));
        }
        for r in score_r_squared(&a, &est) {
            prop_assert!(r <= 1.0);
        }
        for r in score_mcc(&a, &est) {
            prop_assert!(r > 0.0 && r < 4.0);
        }
    }
}

#[test]
fn tvd_rewards_are_bounded() {
    let g = build_regular_grading_graph(&RngStream::new(5), 30, 4).unwrap();
    let reports = random_reports(&g, 6);
    let a = Assessment::new(&g, &reports).unwrap();
    let plan = PairingPlan::draw(&g, &RngStream::new(7)).unwrap();
    for r in score_phi_div(&a, Divergence::Tvd, &plan).unwrap() {
        assert!(r.abs() <= 4.0 + 1e-12);
    }
}

#[test]
fn uninformative_reports_earn_nothing_from_dmi() {
    let g = build_clique_assignment(&RngStream::new(8), 16).unwrap();
    let plan = DmiPlan::draw(&g, &RngStream::new(9)).unwrap();
    let reports = vec![10u8; g.n_edges()];
    let a = Assessment::new(&g, &reports).unwrap();
    assert!(score_dmi(&a, &plan).unwrap().iter().all(|&r| r == 0.0));
}

#[test]
fn ground_truth_pairing_closed_form() {
    // Reports equal to the leave-one-out estimate and a penalty pair at
    // ratio one pay ∂Φ(JP(ĝ, ĝ)) − Φ*(∂Φ(1)).
    let g = build_regular_grading_graph(&RngStream::new(10), 12, 4).unwrap();
    let reports = vec![7u8; g.n_edges()];
    let a = Assessment::new(&g, &reports).unwrap();
    let est = estimate_pg1(&a, false);
    assert!(est.scores.iter().all(|&s| (s - 7.0).abs() < 1e-12));
    let plan = GroundTruthPlan::draw(&g, &RngStream::new(11)).unwrap();
    let d = Divergence::SquaredHellinger;
    let jp = JpParams::active(0.0, 0.0).ratio(7.0, 7.0);
    let per_task = d.pair_payment(jp, jp).unwrap();
    for r in score_phi_div_p_star(&a, &est, d, &plan).unwrap() {
        assert!((r - 4.0 * per_task).abs() < 1e-12);
    }
    let e = d.subgradient(jp).unwrap() - d.conjugate(d.subgradient(1.0).unwrap()).unwrap();
    assert!(e > 0.0);
}

#[test]
fn semester_scoring_threads_the_histogram() {
    let g = build_regular_grading_graph(&RngStream::new(12), 20, 4).unwrap();
    let first = vec![3u8; g.n_edges()];
    let second = vec![3u8; g.n_edges()];
    let assessments = [Assessment::new(&g, &first).unwrap(), Assessment::new(&g, &second).unwrap()];
    let table = score_semester(Mechanism::Pts, &assessments, None, &RngStream::new(0)).unwrap();
    // First assignment: R[3] = 1/11. Second: R[3] = 81/91.
    assert!((table.get(0, 0) - 44.0).abs() < 1e-12);
    assert!((table.get(0, 1) - 4.0 * 91.0 / 81.0).abs() < 1e-12);
}

#[test]
fn parametric_mechanisms_need_estimates() {
    let g = build_regular_grading_graph(&RngStream::new(13), 20, 4).unwrap();
    let reports = random_reports(&g, 14);
    let assessments = [Assessment::new(&g, &reports).unwrap()];
    for m in Mechanism::all().into_iter().filter(|m| m.is_parametric()) {
        assert_eq!(
            score_semester(m, &assessments, None, &RngStream::new(0)),
            Err(Error::MissingEstimate(m.name()))
        );
    }
    assert_eq!(score_semester(Mechanism::Dmi, &assessments, None, &RngStream::new(0)), Err(Error::NotClustered));
}

#[test]
fn mechanism_randomness_ignores_reports() {
    // Same stream, different reports: the plan is identical, so a report
    // change on one submission cannot move the penalty choices elsewhere.
    let g = build_regular_grading_graph(&RngStream::new(15), 30, 4).unwrap();
    let p1 = PairingPlan::draw(&g, &RngStream::new(16)).unwrap();
    let p2 = PairingPlan::draw(&g, &RngStream::new(16)).unwrap();
    assert_eq!(p1, p2);
}
