use peerpred_core::mechanism::parametric::{jp_ratio, JpParams};

const V: f64 = 2.1;

fn normal_pdf(x: f64, mean: f64, var: f64) -> f64 {
    (-(x - mean).powi(2) / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).sqrt()
}

/// Explicit bivariate normal density over the product of its marginals.
fn density_ratio(x: f64, y: f64, mi: f64, mj: f64, ti: f64, tj: f64) -> f64 {
    let (s11, s22, s12) = (V + 1.0 / ti, V + 1.0 / tj, V);
    let det = s11 * s22 - s12 * s12;
    let (dx, dy) = (x - mi, y - mj);
    let q = (s22 * dx * dx - 2.0 * s12 * dx * dy + s11 * dy * dy) / det;
    let joint = (-0.5 * q).exp() / (2.0 * std::f64::consts::PI * det.sqrt());
    joint / (normal_pdf(x, mi, s11) * normal_pdf(y, mj, s22))
}

const TAUS: [f64; 4] = [0.5, 1.0, 1.0 / 0.7, 2.0];

#[test]
fn matches_density_ratio_on_grid() {
    let mut worst = 0.0f64;
    for &ti in &TAUS {
        for &tj in &TAUS {
            for (bi, bj) in [(0.0, 0.0), (0.8, -1.3)] {
                let p = JpParams::new(bi, bj, ti, tj).unwrap();
                for i in 0..=20 {
                    for j in 0..=20 {
                        let (x, y) = (i as f64 * 0.5, j as f64 * 0.5);
                        let got = jp_ratio(x, y, &p).unwrap();
                        let want = density_ratio(x, y, 7.0 + bi, 7.0 + bj, ti, tj);
                        assert!(got > 0.0);
                        worst = worst.max((got / want - 1.0).abs());
                    }
                }
            }
        }
    }
    assert!(worst < 1e-9, "worst relative error {worst}");
}

#[test]
fn covariance_determinant() {
    for &ti in &TAUS {
        for &tj in &TAUS {
            let det = (V + 1.0 / ti) * (V + 1.0 / tj) - V * V;
            let closed = (V * ti + V * tj + 1.0) / (ti * tj);
            assert!((det - closed).abs() < 1e-12);
        }
    }
}

#[test]
fn exchange_symmetry() {
    for &ti in &TAUS {
        for &tj in &TAUS {
            let p = JpParams::new(0.4, -0.9, ti, tj).unwrap();
            let q = JpParams::new(-0.9, 0.4, tj, ti).unwrap();
            for (x, y) in [(0.0, 10.0), (3.5, 7.0), (9.0, 8.0)] {
                let a = jp_ratio(x, y, &p).unwrap();
                let b = jp_ratio(y, x, &q).unwrap();
                assert!((a - b).abs() <= 1e-14 * a);
            }
        }
    }
}
