use peerpred_core::Divergence;
use proptest::prelude::*;

/// `sup_x (x y − Φ(x))` over `x ∈ (0, hi]` by golden-section search; the
/// objective is concave in `x`.
fn numeric_conjugate(d: Divergence, y: f64) -> f64 {
    let f = |x: f64| x * y - d.phi(x).unwrap();
    let (mut lo, mut hi) = (1e-12, 200.0);
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..400 {
        let m1 = hi - ratio * (hi - lo);
        let m2 = lo + ratio * (hi - lo);
        if f(m1) < f(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    // Piecewise-linear Φ puts the maximiser at a kink, so also try the grid.
    let grid = (1..=20000).map(|i| i as f64 * 0.01).map(f).fold(f64::NEG_INFINITY, f64::max);
    f(0.5 * (lo + hi)).max(grid).max(f(1e-12))
}

#[test]
fn fenchel_equality_on_a_grid() {
    for d in Divergence::ALL {
        for i in 1..=400 {
            let x = i as f64 * 0.025;
            let y = d.subgradient(x).unwrap();
            let lhs = d.phi(x).unwrap() + d.conjugate(y).unwrap();
            assert!((lhs - x * y).abs() < 1e-12, "{d} at x = {x}: {lhs} vs {}", x * y);
        }
    }
}

#[test]
fn conjugate_matches_numeric_supremum() {
    let cases: [(Divergence, &[f64]); 4] = [
        (Divergence::Tvd, &[-0.5, -0.2, 0.0, 0.3, 0.5]),
        (Divergence::Kl, &[-2.0, -0.5, 0.0, 1.0, 2.5]),
        (Divergence::ChiSquared, &[0.0, 0.5, 1.5, 4.0, 10.0]),
        (Divergence::SquaredHellinger, &[-3.0, -1.0, 0.0, 0.4, 0.8]),
    ];
    for (d, ys) in cases {
        for &y in ys {
            let exact = d.conjugate(y).unwrap();
            let numeric = numeric_conjugate(d, y);
            assert!((exact - numeric).abs() < 1e-6 * (1.0 + exact.abs()), "{d} at y = {y}: {exact} vs {numeric}");
        }
    }
}

#[test]
fn payment_vanishes_when_both_ratios_are_one() {
    for d in Divergence::ALL {
        assert_eq!(d.pair_payment(1.0, 1.0).unwrap(), 0.0);
    }
}

proptest! {
    #[test]
    fn fenchel_equality_random(x in 1e-3f64..50.0) {
        for d in Divergence::ALL {
            let y = d.subgradient(x).unwrap();
            let lhs = d.phi(x).unwrap() + d.conjugate(y).unwrap();
            prop_assert!((lhs - x * y).abs() <= 1e-12 * (1.0 + (x * y).abs()));
        }
    }

    #[test]
    fn fenchel_young_inequality(x in 1e-3f64..20.0, t in 0.0f64..1.0) {
        for d in Divergence::ALL {
            // Any y in the conjugate's domain.
            let y = match d {
                Divergence::Tvd => t - 0.5,
                Divergence::SquaredHellinger => 0.99 - 5.0 * t,
                _ => 6.0 * t - 3.0,
            };
            prop_assert!(d.phi(x).unwrap() + d.conjugate(y).unwrap() >= x * y - 1e-12);
        }
    }

    #[test]
    fn truthful_pairing_beats_independent_pairing(bonus in 1.0f64..5.0) {
        // With the penalty at one the payment is ∂Φ(bonus) − ∂Φ(1), and
        // subgradients of a convex Φ are monotone.
        for d in Divergence::ALL {
            prop_assert!(d.pair_payment(bonus, 1.0).unwrap() >= -1e-12);
        }
    }
}
