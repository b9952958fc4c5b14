use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{factorize, ArithError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RationalError {
    #[error("target {0} is not positive")]
    NotPositive(String),
    #[error("target {0} is not in lowest terms")]
    NotReduced(String),
    #[error("cannot parse rational {0:?}: expected p/q or an integer")]
    Parse(String),
}

/// A positive rational `num/den` in lowest terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PositiveRational {
    pub num: u64,
    pub den: u64,
}

impl PositiveRational {
    pub const ONE: PositiveRational = PositiveRational { num: 1, den: 1 };

    /// Checked constructor; rejects zero, negative signs and common factors.
    pub fn new(num: i128, den: i128) -> Result<Self, RationalError> {
        let text = format!("{num}/{den}");
        if num <= 0 || den <= 0 {
            return Err(RationalError::NotPositive(text));
        }
        if num.gcd(&den) != 1 {
            return Err(RationalError::NotReduced(text));
        }
        let num = u64::try_from(num).map_err(|_| RationalError::Parse(text.clone()))?;
        let den = u64::try_from(den).map_err(|_| RationalError::Parse(text))?;
        Ok(PositiveRational { num, den })
    }

    pub fn integer(n: u64) -> Self {
        assert!(n > 0);
        PositiveRational { num: n, den: 1 }
    }

    /// Prime exponents: positive for the numerator, negative for the denominator.
    pub fn exponents(&self) -> Result<Vec<(u64, i64)>, ArithError> {
        let mut out: Vec<(u64, i64)> = factorize(self.num)?.factors().iter().map(|&(p, e)| (p, e as i64)).collect();
        out.extend(factorize(self.den)?.factors().iter().map(|&(p, e)| (p, -(e as i64))));
        out.sort_unstable();
        Ok(out)
    }
}

impl FromStr for PositiveRational {
    type Err = RationalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || RationalError::Parse(s.to_string());
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n.parse::<i128>().map_err(|_| bad())?, d.parse::<i128>().map_err(|_| bad())?),
            None => (s.parse::<i128>().map_err(|_| bad())?, 1),
        };
        PositiveRational::new(n, d)
    }
}

impl fmt::Display for PositiveRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse() {
        assert_eq!("26".parse::<PositiveRational>().unwrap(), PositiveRational::integer(26));
        assert_eq!("7/3".parse::<PositiveRational>().unwrap(), PositiveRational { num: 7, den: 3 });
        assert!(matches!("4/6".parse::<PositiveRational>(), Err(RationalError::NotReduced(_))));
        assert!(matches!("-2".parse::<PositiveRational>(), Err(RationalError::NotPositive(_))));
        assert!(matches!("x".parse::<PositiveRational>(), Err(RationalError::Parse(_))));
        assert_eq!("12/35".parse::<PositiveRational>().unwrap().exponents().unwrap(), vec![(2, 2), (3, 1), (5, -1), (7, -1)]);
    }
}
