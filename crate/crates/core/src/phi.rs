//! Convex functions defining Φ-divergences, with their subgradients and
//! convex conjugates.

use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Divergence {
    /// Total variation distance, `Φ(x) = |x - 1| / 2`.
    Tvd,
    /// Kullback-Leibler, `Φ(x) = x log x`.
    Kl,
    /// χ², `Φ(x) = x² - 1`.
    ChiSquared,
    /// Squared Hellinger, `Φ(x) = (1 - √x)²`.
    SquaredHellinger,
}

impl Divergence {
    pub const ALL: [Divergence; 4] =
        [Divergence::Tvd, Divergence::Kl, Divergence::ChiSquared, Divergence::SquaredHellinger];

    pub fn name(self) -> &'static str {
        match self {
            Divergence::Tvd => "tvd",
            Divergence::Kl => "kl",
            Divergence::ChiSquared => "chi2",
            Divergence::SquaredHellinger => "h2",
        }
    }

    pub fn phi(self, x: f64) -> Result<f64> {
        check_positive(x)?;
        Ok(match self {
            Divergence::Tvd => 0.5 * libm::fabs(x - 1.0),
            Divergence::Kl => x * libm::log(x),
            Divergence::ChiSquared => x * x - 1.0,
            Divergence::SquaredHellinger => {
                let r = 1.0 - libm::sqrt(x);
                r * r
            }
        })
    }

    /// A subgradient of Φ at `x`. For TVD the kink at 1 maps to 0.
    pub fn subgradient(self, x: f64) -> Result<f64> {
        check_positive(x)?;
        Ok(match self {
            Divergence::Tvd => {
                if x < 1.0 {
                    -0.5
                } else if x > 1.0 {
                    0.5
                } else {
                    0.0
                }
            }
            Divergence::Kl => libm::log(x) + 1.0,
            Divergence::ChiSquared => 2.0 * x,
            Divergence::SquaredHellinger => 1.0 - 1.0 / libm::sqrt(x),
        })
    }

    /// Convex conjugate `Φ*(y) = sup_x { x y - Φ(x) }`.
    ///
    /// Arguments outside the effective domain (`|y| > 1/2` for TVD, `y >= 1`
    /// for squared Hellinger) are rejected.
    pub fn conjugate(self, y: f64) -> Result<f64> {
        if !y.is_finite() {
            return Err(Error::Domain(y));
        }
        match self {
            Divergence::Tvd if (-0.5..=0.5).contains(&y) => Ok(y),
            Divergence::Tvd => Err(Error::Domain(y)),
            Divergence::Kl => Ok(libm::exp(y - 1.0)),
            Divergence::ChiSquared => Ok(y * y / 4.0 + 1.0),
            Divergence::SquaredHellinger if y < 1.0 => Ok(y / (1.0 - y)),
            Divergence::SquaredHellinger => Err(Error::Domain(y)),
        }
    }

    /// The pair payment `∂Φ(bonus) - Φ*(∂Φ(penalty))` given the
    /// joint-to-marginal-product ratios at the bonus and penalty report pairs.
    pub fn pair_payment(self, bonus_ratio: f64, penalty_ratio: f64) -> Result<f64> {
        Ok(self.subgradient(bonus_ratio)? - self.conjugate(self.subgradient(penalty_ratio)?)?)
    }
}

fn check_positive(x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(x))
    }
}

impl fmt::Display for Divergence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Divergence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Divergence::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| Error::UnknownDivergence(s.into()))
    }
}
