//! Reporting strategies: maps from a private signal to a report.

use core::fmt;
use core::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::model::{to_score, GraderProfile, Score, PRIOR_MEAN};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    Truthful,
    /// Always report the maximum score.
    AllTens,
    /// Always report the prior mean.
    RevertPrior,
    /// Report the posterior mean under a Beta(7, 3) prior: `(signal + 7) / 2`.
    Hedge,
    /// Subtract (or add) a per-semester correction in the direction of the
    /// grader's own bias.
    FixBias,
    /// Add standard normal noise to every report.
    AddNoise,
    /// Coarsen the report space to {0, 3, 6, 7, 10}.
    Merge,
}

impl Strategy {
    pub const ALL: [Strategy; 7] = [
        Strategy::Truthful,
        Strategy::AllTens,
        Strategy::RevertPrior,
        Strategy::Hedge,
        Strategy::FixBias,
        Strategy::AddNoise,
        Strategy::Merge,
    ];

    /// Every strategy except truthful reporting.
    pub const DEVIATIONS: [Strategy; 6] = [
        Strategy::AllTens,
        Strategy::RevertPrior,
        Strategy::Hedge,
        Strategy::FixBias,
        Strategy::AddNoise,
        Strategy::Merge,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Truthful => "truthful",
            Strategy::AllTens => "all_tens",
            Strategy::RevertPrior => "revert_prior",
            Strategy::Hedge => "hedge",
            Strategy::FixBias => "fix_bias",
            Strategy::AddNoise => "add_noise",
            Strategy::Merge => "merge",
        }
    }

    /// Uninformed strategies ignore the signal.
    pub fn is_uninformed(self) -> bool {
        matches!(self, Strategy::AllTens | Strategy::RevertPrior)
    }

    /// Whether [`Strategy::apply`] consumes randomness.
    pub fn is_random(self) -> bool {
        matches!(self, Strategy::AddNoise)
    }

    pub fn apply<R: Rng + ?Sized>(self, signal: Score, ctx: &StrategyContext, rng: &mut R) -> Score {
        let s = f64::from(signal);
        match self {
            Strategy::Truthful => signal,
            Strategy::AllTens => 10,
            Strategy::RevertPrior => PRIOR_MEAN as Score,
            Strategy::Hedge => to_score((s + PRIOR_MEAN) / 2.0),
            Strategy::FixBias => to_score(s - f64::from(ctx.bias_sign) * ctx.correction),
            Strategy::AddNoise => {
                let nu: f64 = StandardNormal.sample(rng);
                to_score(s + nu)
            }
            Strategy::Merge => merge(signal),
        }
    }
}

fn merge(signal: Score) -> Score {
    match signal {
        0 => 0,
        1..=3 => 3,
        4..=6 => 6,
        7..=9 => 7,
        _ => 10,
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| Error::UnknownStrategy(s.into()))
    }
}

/// Per-agent, per-semester inputs to a strategy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrategyContext {
    /// Sign of the agent's true bias: -1, 0 or +1.
    pub bias_sign: i8,
    /// Fix Bias correction magnitude, drawn once per semester from |N(0, 1)|.
    pub correction: f64,
}

impl StrategyContext {
    pub fn draw<R: Rng + ?Sized>(profile: &GraderProfile, rng: &mut R) -> Self {
        let z: f64 = StandardNormal.sample(rng);
        let bias_sign = if profile.bias > 0.0 {
            1
        } else if profile.bias < 0.0 {
            -1
        } else {
            0
        };
        StrategyContext { bias_sign, correction: libm::fabs(z) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    const NEUTRAL: StrategyContext = StrategyContext { bias_sign: 0, correction: 0.0 };

    #[test]
    fn merge_table() {
        let expected = [0, 3, 3, 3, 6, 6, 6, 7, 7, 7, 10];
        let mut rng = RngStream::new(0).rng();
        for s in 0..=10u8 {
            assert_eq!(Strategy::Merge.apply(s, &NEUTRAL, &mut rng), expected[s as usize]);
        }
    }

    #[test]
    fn hedge_examples() {
        let mut rng = RngStream::new(0).rng();
        assert_eq!(Strategy::Hedge.apply(9, &NEUTRAL, &mut rng), 8);
        assert_eq!(Strategy::Hedge.apply(7, &NEUTRAL, &mut rng), 7);
        // 7.5 rounds up
        assert_eq!(Strategy::Hedge.apply(8, &NEUTRAL, &mut rng), 8);
        assert_eq!(Strategy::Hedge.apply(0, &NEUTRAL, &mut rng), 4);
    }

    #[test]
    fn fix_bias_examples() {
        let mut rng = RngStream::new(0).rng();
        let up = StrategyContext { bias_sign: 1, correction: 1.4 };
        assert_eq!(Strategy::FixBias.apply(9, &up, &mut rng), 8);
        let down = StrategyContext { bias_sign: -1, correction: 1.4 };
        assert_eq!(Strategy::FixBias.apply(9, &down, &mut rng), 10);
        assert_eq!(Strategy::FixBias.apply(1, &up, &mut rng), 0);
        let zero = StrategyContext { bias_sign: 0, correction: 1.4 };
        assert_eq!(Strategy::FixBias.apply(4, &zero, &mut rng), 4);
    }

    #[test]
    fn uninformed_strategies_are_constant() {
        let mut rng = RngStream::new(0).rng();
        for s in 0..=10u8 {
            assert_eq!(Strategy::AllTens.apply(s, &NEUTRAL, &mut rng), 10);
            assert_eq!(Strategy::RevertPrior.apply(s, &NEUTRAL, &mut rng), 7);
        }
    }

    #[test]
    fn context_signs() {
        let mut rng = RngStream::new(1).rng();
        let ctx = StrategyContext::draw(&GraderProfile { effort: crate::model::Effort::Active, bias: -0.2 }, &mut rng);
        assert_eq!(ctx.bias_sign, -1);
        assert!(ctx.correction >= 0.0);
    }

    #[test]
    fn names_round_trip() {
        for s in Strategy::ALL {
            assert_eq!(s.name().parse::<Strategy>().unwrap(), s);
        }
        assert_eq!("foo".parse::<Strategy>(), Err(Error::UnknownStrategy("foo".into())));
    }
}
