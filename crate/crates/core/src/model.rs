//! The generative model of peer assessment: true scores, grader profiles,
//! and noisy signal construction.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Binomial, Distribution, Normal, Poisson};

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// An integer rubric value in `0..=MAX_SCORE`.
pub type Score = u8;

pub const MIN_SCORE: Score = 0;
pub const MAX_SCORE: Score = 10;
/// Number of distinct scores in the report space.
pub const NUM_SCORES: usize = MAX_SCORE as usize + 1;
/// True scores are `Binomial(10, TRUE_SCORE_P)`.
pub const TRUE_SCORE_P: f64 = 0.7;
/// Mean of the true score distribution, also the prior mean used by the
/// strategies and the parametric model.
pub const PRIOR_MEAN: f64 = 7.0;
/// Variance of the true score distribution.
pub const PRIOR_VARIANCE: f64 = 2.1;

pub const ACTIVE_DRAWS: u32 = 3;
pub const PASSIVE_DRAWS: u32 = 1;
/// Upper end of the continuous effort interval `(0, 2]`.
pub const MAX_EFFORT: f64 = 2.0;

/// Round half up (towards `+inf`).
pub fn round_half_up(x: f64) -> f64 {
    libm::floor(x + 0.5)
}

/// Round half up and clamp into the score space.
pub fn to_score(x: f64) -> Score {
    round_half_up(x).clamp(f64::from(MIN_SCORE), f64::from(MAX_SCORE)) as Score
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EffortModel {
    Binary,
    Continuous,
}

impl EffortModel {
    pub fn name(self) -> &'static str {
        match self {
            EffortModel::Binary => "binary",
            EffortModel::Continuous => "continuous",
        }
    }
}

impl fmt::Display for EffortModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EffortModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "binary" => Ok(EffortModel::Binary),
            "continuous" => Ok(EffortModel::Continuous),
            _ => Err(Error::InvalidArgument("effort model must be `binary` or `continuous`")),
        }
    }
}

/// Effort model and whether graders are biased.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Setting {
    pub effort: EffortModel,
    pub biased: bool,
}

/// A grader's latent effort.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Effort {
    Active,
    Passive,
    /// Effort intensity `lambda` in `(0, 2]`.
    Continuous(f64),
}

impl Effort {
    /// Scalar effort used as the ground truth for rankings: 1/0 for
    /// active/passive graders, `lambda` otherwise.
    pub fn level(self) -> f64 {
        match self {
            Effort::Active => 1.0,
            Effort::Passive => 0.0,
            Effort::Continuous(lambda) => lambda,
        }
    }

    pub fn is_active(self) -> bool {
        matches!(self, Effort::Active)
    }
}

/// One agent's hidden quality: effort and grading bias.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraderProfile {
    pub effort: Effort,
    pub bias: f64,
}

impl GraderProfile {
    pub fn unbiased(effort: Effort) -> Self {
        GraderProfile { effort, bias: 0.0 }
    }
}

/// True scores for every (assignment, student) submission, indexed
/// `[assignment][student]`, each i.i.d. `Binomial(10, 0.7)`.
pub fn draw_true_scores(rng: &RngStream, n_students: usize, n_assignments: usize) -> Vec<Vec<Score>> {
    let mut gen = rng.rng();
    let dist = Binomial::new(u64::from(MAX_SCORE), TRUE_SCORE_P).expect("valid binomial");
    (0..n_assignments)
        .map(|_| (0..n_students).map(|_| dist.sample(&mut gen) as Score).collect())
        .collect()
}

/// Samples a population of `n` grader profiles.
///
/// Binary populations contain exactly `n_active` active graders at uniformly
/// random positions. Continuous efforts are uniform on `(0, 2]`. Biases are
/// standard normal when `setting.biased`, otherwise exactly zero.
pub fn sample_population(
    rng: &RngStream,
    n: usize,
    setting: Setting,
    n_active: Option<usize>,
) -> Result<Vec<GraderProfile>> {
    let mut gen = rng.rng();
    let efforts: Vec<Effort> = match setting.effort {
        EffortModel::Binary => {
            let n_active = n_active.unwrap_or(n / 2);
            if n_active > n {
                return Err(Error::ActiveCountOutOfRange { n_active, population: n });
            }
            let mut efforts: Vec<Effort> = (0..n)
                .map(|i| if i < n_active { Effort::Active } else { Effort::Passive })
                .collect();
            efforts.shuffle(&mut gen);
            efforts
        }
        EffortModel::Continuous => (0..n)
            // 2 * (1 - u) with u in [0, 1) covers exactly (0, 2].
            .map(|_| Effort::Continuous(MAX_EFFORT * (1.0 - gen.random::<f64>())))
            .collect(),
    };
    let normal = Normal::new(0.0, 1.0).expect("valid normal");
    Ok(efforts
        .into_iter()
        .map(|effort| GraderProfile {
            effort,
            bias: if setting.biased { normal.sample(&mut gen) } else { 0.0 },
        })
        .collect())
}

/// Number of latent draws averaged into one signal.
pub fn num_draws<R: Rng + ?Sized>(profile: &GraderProfile, rng: &mut R) -> u32 {
    match profile.effort {
        Effort::Active => ACTIVE_DRAWS,
        Effort::Passive => PASSIVE_DRAWS,
        Effort::Continuous(lambda) => {
            let extra: f64 = Poisson::new(lambda).expect("positive effort").sample(rng);
            1 + extra as u32
        }
    }
}

/// Builds one signal: the rounded (half up) mean of `n_draws` draws from
/// `Binomial(10, clamp(true_score + bias, 0, 10) / 10)`.
pub fn generate_signal<R: Rng + ?Sized>(true_score: Score, bias: f64, n_draws: u32, rng: &mut R) -> Score {
    let n_draws = n_draws.max(1);
    let p = (f64::from(true_score) + bias).clamp(0.0, f64::from(MAX_SCORE)) / f64::from(MAX_SCORE);
    let dist = Binomial::new(u64::from(MAX_SCORE), p).expect("p clamped into [0, 1]");
    let total: u64 = (0..n_draws).map(|_| dist.sample(rng)).sum();
    // round(total / n) half up, in exact integer arithmetic
    let n = u64::from(n_draws);
    ((2 * total + n) / (2 * n)) as Score
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_is_half_up() {
        assert_eq!(round_half_up(7.5), 8.0);
        assert_eq!(round_half_up(7.49), 7.0);
        assert_eq!(round_half_up(-0.5), 0.0);
        assert_eq!(to_score(10.5), 10);
        assert_eq!(to_score(-1.2), 0);
    }

    #[test]
    fn integer_rounding_matches_float_rounding() {
        for n in 1..8u32 {
            for total in 0..=(10 * n as u64) {
                let exact = ((2 * total + n as u64) / (2 * n as u64)) as f64;
                assert_eq!(exact, round_half_up(total as f64 / n as f64), "{total}/{n}");
            }
        }
    }

    #[test]
    fn degenerate_latent_distributions_are_exact() {
        let mut rng = RngStream::new(2).rng();
        for n in 1..6 {
            assert_eq!(generate_signal(10, 0.0, n, &mut rng), 10);
            assert_eq!(generate_signal(0, 0.0, n, &mut rng), 0);
            // bias pushes the success parameter past the bounds and is clamped
            assert_eq!(generate_signal(9, 3.0, n, &mut rng), 10);
            assert_eq!(generate_signal(1, -2.5, n, &mut rng), 0);
        }
    }

    #[test]
    fn binary_population_has_exact_active_count() {
        let setting = Setting { effort: EffortModel::Binary, biased: false };
        for k in [0, 1, 50, 99, 100] {
            let pop = sample_population(&RngStream::new(k as u64), 100, setting, Some(k)).unwrap();
            assert_eq!(pop.iter().filter(|p| p.effort.is_active()).count(), k);
            assert!(pop.iter().all(|p| p.bias == 0.0));
        }
        assert_eq!(
            sample_population(&RngStream::new(0), 10, setting, Some(11)),
            Err(Error::ActiveCountOutOfRange { n_active: 11, population: 10 })
        );
    }

    #[test]
    fn biased_population_has_nonzero_biases() {
        let setting = Setting { effort: EffortModel::Continuous, biased: true };
        let pop = sample_population(&RngStream::new(3), 100, setting, None).unwrap();
        assert!(pop.iter().all(|p| p.bias != 0.0));
        assert!(pop
            .iter()
            .all(|p| matches!(p.effort, Effort::Continuous(l) if l > 0.0 && l <= MAX_EFFORT)));
    }

    #[test]
    fn draw_counts_by_effort() {
        let mut rng = RngStream::new(4).rng();
        assert_eq!(num_draws(&GraderProfile::unbiased(Effort::Passive), &mut rng), 1);
        assert_eq!(num_draws(&GraderProfile::unbiased(Effort::Active), &mut rng), 3);
        let p = GraderProfile::unbiased(Effort::Continuous(0.3));
        assert!((0..1000).all(|_| num_draws(&p, &mut rng) >= 1));
    }
}
