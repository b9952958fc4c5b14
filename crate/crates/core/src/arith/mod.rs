//! Exact integer arithmetic used throughout the crate: trial-division
//! factorization, modular helpers, the Chinese remainder theorem, unit-group
//! structure modulo `q`, and exact roots of unity.

mod cyclotomic;
mod root;
mod unit_group;

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cyclotomic::{abs_squared_equals, cyclotomic_polynomial, exact_sum, sum_is_zero, CyclotomicSum};
pub use root::RootOfUnity;
pub use unit_group::{unit_group, PrimePowerPart, UnitGroup};

/// Default largest trial divisor used by [`factorize`].
pub const DEFAULT_FACTOR_CEILING: u64 = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ArithError {
    #[error("{value} is not a unit modulo {modulus}")]
    NotAUnit { value: i128, modulus: u64 },
    #[error("moduli {0} and {1} are not coprime")]
    ModuliNotCoprime(u64, u64),
    #[error("cannot factor {n}: cofactor {cofactor} has no divisor below the ceiling {ceiling} and exceeds its square")]
    FactorizationTooLarge { n: u64, cofactor: u64, ceiling: u64 },
    #[error("zero has no prime factorization")]
    ZeroInput,
}

/// A canonical prime factorization: primes strictly increasing, exponents
/// at least one.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Factorization {
    factors: Vec<(u64, u32)>,
}

impl Factorization {
    pub fn from_pairs(mut factors: Vec<(u64, u32)>) -> Self {
        factors.retain(|&(_, e)| e > 0);
        factors.sort_unstable();
        let mut merged: Vec<(u64, u32)> = Vec::with_capacity(factors.len());
        for (p, e) in factors {
            match merged.last_mut() {
                Some((q, f)) if *q == p => *f += e,
                _ => merged.push((p, e)),
            }
        }
        Factorization { factors: merged }
    }

    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn valuation(&self, p: u64) -> u32 {
        self.factors.iter().find(|&&(q, _)| q == p).map_or(0, |&(_, e)| e)
    }

    /// Product of `prime^exponent`; `None` on overflow.
    pub fn reconstruct(&self) -> Option<u64> {
        self.factors.iter().try_fold(1u64, |acc, &(p, e)| acc.checked_mul(p.checked_pow(e)?))
    }

    /// The prime powers `p^e` exactly dividing the factored number.
    pub fn prime_powers(&self) -> Vec<u64> {
        self.factors.iter().map(|&(p, e)| p.pow(e)).collect()
    }
}

/// Trial division with a bound on the largest divisor tried.
#[derive(Clone, Copy, Debug)]
pub struct Factorizer {
    pub ceiling: u64,
}

impl Default for Factorizer {
    fn default() -> Self {
        Factorizer { ceiling: DEFAULT_FACTOR_CEILING }
    }
}

impl Factorizer {
    pub fn new(ceiling: u64) -> Self {
        Factorizer { ceiling: ceiling.max(2) }
    }

    pub fn factorize(&self, n: u64) -> Result<Factorization, ArithError> {
        if n == 0 {
            return Err(ArithError::ZeroInput);
        }
        let mut rest = n;
        let mut factors = Vec::new();
        let mut push = |p: u64, rest: &mut u64| {
            let mut e = 0;
            while (*rest).is_multiple_of(p) {
                *rest /= p;
                e += 1;
            }
            if e > 0 {
                factors.push((p, e));
            }
        };
        push(2, &mut rest);
        let mut d = 3u64;
        while d <= self.ceiling && d.saturating_mul(d) <= rest {
            push(d, &mut rest);
            d += 2;
        }
        if rest > 1 {
            // Every prime below `d` has been removed, so `rest` is prime
            // whenever `d^2` exceeds it.
            if d.saturating_mul(d) <= rest {
                return Err(ArithError::FactorizationTooLarge { n, cofactor: rest, ceiling: self.ceiling });
            }
            factors.push((rest, 1));
        }
        Ok(Factorization { factors })
    }
}

/// Factor `n` with the default trial-division ceiling.
pub fn factorize(n: u64) -> Result<Factorization, ArithError> {
    Factorizer::default().factorize(n)
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Sieve of Eratosthenes.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let limit = limit as usize;
    let mut composite = vec![false; limit + 1];
    let mut primes = Vec::new();
    for i in 2..=limit {
        if !composite[i] {
            primes.push(i as u64);
            let mut j = i * i;
            while j <= limit {
                composite[j] = true;
                j += i;
            }
        }
    }
    primes
}

pub fn euler_phi(n: u64) -> u64 {
    // Small moduli only; the trial-division ceiling is never reached here.
    let f = factorize(n.max(1)).expect("phi of a desk-scale modulus");
    f.factors().iter().map(|&(p, e)| (p - 1) * p.pow(e - 1)).product()
}

/// Exponent of the prime `p` in `n` (`n != 0`).
pub fn valuation(mut n: u128, p: u64) -> u32 {
    let p = p as u128;
    let mut e = 0;
    while n != 0 && n.is_multiple_of(p) {
        n /= p;
        e += 1;
    }
    e
}

pub fn mod_pow(base: u64, mut exp: u64, modulus: u64) -> u64 {
    if modulus == 1 {
        return 0;
    }
    let m = modulus as u128;
    let mut b = (base as u128) % m;
    let mut acc = 1u128;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    acc as u64
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn mod_inv(a: i128, m: u64) -> Option<u64> {
    if m == 1 {
        return Some(0);
    }
    let m = m as i128;
    let g = a.rem_euclid(m).extended_gcd(&m);
    if g.gcd != 1 {
        return None;
    }
    Some(g.x.rem_euclid(m) as u64)
}

/// Combine congruences `x = value (mod modulus)` with pairwise coprime moduli
/// into the unique residue modulo their product.
pub fn crt_combine(residues: &[(u64, u64)]) -> Result<(u64, u64), ArithError> {
    let mut acc = (0u64, 1u64);
    for &(value, modulus) in residues {
        let (r1, m1) = acc;
        if m1.gcd(&modulus) != 1 {
            return Err(ArithError::ModuliNotCoprime(m1, modulus));
        }
        let r2 = value % modulus;
        let inv = mod_inv(m1 as i128, modulus).expect("coprime moduli");
        let diff = (r2 as i128 - r1 as i128).rem_euclid(modulus as i128) as u128;
        let t = diff * inv as u128 % modulus as u128;
        let m = m1 as u128 * modulus as u128;
        let x = (r1 as u128 + m1 as u128 * t) % m;
        acc = (x as u64, m as u64);
    }
    Ok(acc)
}

pub fn lcm(a: u64, b: u64) -> u64 {
    a.lcm(&b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorize_examples() {
        assert!(factorize(1).unwrap().is_empty());
        assert_eq!(factorize(300).unwrap().factors(), &[(2, 2), (3, 1), (5, 2)]);
        assert_eq!(factorize(676).unwrap().factors(), &[(2, 2), (13, 2)]);
        assert_eq!(factorize(0), Err(ArithError::ZeroInput));
    }

    #[test]
    fn factorize_respects_ceiling() {
        let f = Factorizer::new(100);
        assert_eq!(f.factorize(97 * 89).unwrap().factors(), &[(89, 1), (97, 1)]);
        // 1009 * 1013 has no factor below 100 and exceeds 100^2.
        assert!(matches!(f.factorize(1009 * 1013), Err(ArithError::FactorizationTooLarge { .. })));
        // A prime above the ceiling but below its square is still certified.
        assert_eq!(f.factorize(9973).unwrap().factors(), &[(9973, 1)]);
    }

    #[test]
    fn crt_examples() {
        assert_eq!(crt_combine(&[(1, 3), (1, 25)]).unwrap(), (1, 75));
        assert_eq!(crt_combine(&[(2, 3), (4, 5)]).unwrap(), (14, 15));
        assert_eq!(crt_combine(&[(0, 1)]).unwrap(), (0, 1));
        assert_eq!(crt_combine(&[(1, 6), (1, 4)]), Err(ArithError::ModuliNotCoprime(6, 4)));
    }

    #[test]
    fn modular_helpers() {
        assert_eq!(mod_pow(2, 10, 25), 24);
        assert_eq!(mod_inv(3, 5), Some(2));
        assert_eq!(mod_inv(-1, 7), Some(6));
        assert_eq!(mod_inv(5, 25), None);
        assert_eq!(euler_phi(300), 80);
        assert_eq!(euler_phi(1), 1);
        assert_eq!(valuation(24, 2), 3);
        assert_eq!(primes_up_to(20), vec![2, 3, 5, 7, 11, 13, 17, 19]);
    }
}
