use std::fmt;
use std::ops::Mul;

use num_complex::Complex64;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

/// The root of unity `exp(2πi·exponent/order)`, kept in lowest terms so that
/// equality is exact.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "RootRepr")]
pub struct RootOfUnity {
    order: u64,
    exponent: u64,
}

#[derive(Deserialize)]
struct RootRepr {
    order: u64,
    exponent: i64,
}

impl From<RootRepr> for RootOfUnity {
    fn from(r: RootRepr) -> Self {
        RootOfUnity::new(r.exponent as i128, r.order.max(1))
    }
}

impl RootOfUnity {
    pub const ONE: RootOfUnity = RootOfUnity { order: 1, exponent: 0 };
    pub const MINUS_ONE: RootOfUnity = RootOfUnity { order: 2, exponent: 1 };

    /// `exp(2πi·exponent/order)`; `order` must be positive.
    pub fn new(exponent: i128, order: u64) -> Self {
        assert!(order > 0, "root of unity of order zero");
        let m = order as i128;
        let j = exponent.rem_euclid(m);
        let g = j.gcd(&m);
        RootOfUnity { order: (m / g) as u64, exponent: (j / g) as u64 }
    }

    pub fn order(self) -> u64 {
        self.order
    }

    pub fn exponent(self) -> u64 {
        self.exponent
    }

    pub fn is_one(self) -> bool {
        self.order == 1
    }

    pub fn conj(self) -> Self {
        RootOfUnity::new(-(self.exponent as i128), self.order)
    }

    pub fn pow(self, k: i128) -> Self {
        let m = self.order as u128;
        let k = k.rem_euclid(m as i128) as u128;
        RootOfUnity::new((self.exponent as u128 * k % m) as i128, self.order)
    }

    /// Every `z` with `z^d == self`.
    pub fn roots(self, d: u64) -> Vec<RootOfUnity> {
        assert!(d > 0);
        let m = self.order as i128 * d as i128;
        (0..d as i128)
            .map(|k| RootOfUnity::new(self.exponent as i128 + k * self.order as i128, m as u64))
            .collect()
    }

    /// The exponent expressed over the common denominator `denominator`,
    /// which must be a multiple of the order.
    pub fn numerator_over(self, denominator: u64) -> u64 {
        debug_assert_eq!(denominator % self.order, 0);
        self.exponent * (denominator / self.order)
    }

    pub fn to_complex(self) -> Complex64 {
        let theta = 2.0 * std::f64::consts::PI * self.exponent as f64 / self.order as f64;
        Complex64::new(theta.cos(), theta.sin())
    }
}

impl Default for RootOfUnity {
    fn default() -> Self {
        RootOfUnity::ONE
    }
}

impl Mul for RootOfUnity {
    type Output = RootOfUnity;

    fn mul(self, rhs: RootOfUnity) -> RootOfUnity {
        let l = self.order.lcm(&rhs.order) as u128;
        let j = self.exponent as u128 * (l / self.order as u128) + rhs.exponent as u128 * (l / rhs.order as u128);
        RootOfUnity::new((j % l) as i128, l as u64)
    }
}

impl fmt::Display for RootOfUnity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.order, self.exponent) {
            (1, _) => write!(f, "1"),
            (2, _) => write!(f, "-1"),
            (4, 1) => write!(f, "i"),
            (4, 3) => write!(f, "-i"),
            (m, j) => write!(f, "e({}/{})", j, m),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduces_to_lowest_terms() {
        assert_eq!(RootOfUnity::new(10, 20), RootOfUnity::MINUS_ONE);
        assert_eq!(RootOfUnity::new(-1, 4), RootOfUnity::new(3, 4));
        assert_eq!(RootOfUnity::new(6, 6), RootOfUnity::ONE);
    }

    #[test]
    fn arithmetic() {
        let i = RootOfUnity::new(1, 4);
        assert_eq!(i * i, RootOfUnity::MINUS_ONE);
        assert_eq!(i * i.conj(), RootOfUnity::ONE);
        assert_eq!(i.pow(-1), i.conj());
        assert_eq!(RootOfUnity::new(1, 3) * RootOfUnity::new(1, 6), RootOfUnity::MINUS_ONE);
        let r = RootOfUnity::new(1, 3).roots(2);
        assert_eq!(r.len(), 2);
        assert!(r.iter().all(|z| z.pow(2) == RootOfUnity::new(1, 3)));
        assert_eq!(format!("{}", i), "i");
        assert_eq!(format!("{}", RootOfUnity::new(2, 5)), "e(2/5)");
    }
}
