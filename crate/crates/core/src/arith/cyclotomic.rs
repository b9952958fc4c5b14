//! Exact sums of roots of unity in `Z[ζ_m]`, reduced modulo the cyclotomic
//! polynomial `Φ_m`.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_integer::Integer;

use super::RootOfUnity;

/// `Φ_m` as a coefficient vector, lowest degree first.
pub fn cyclotomic_polynomial(m: u64) -> Vec<i64> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Vec<i64>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(p) = cache.lock().unwrap().get(&m) {
        return p.clone();
    }
    assert!(m > 0);
    // x^m - 1 divided by Φ_d for every proper divisor d.
    let mut num = vec![0i64; m as usize + 1];
    num[0] = -1;
    num[m as usize] = 1;
    for d in (1..m).filter(|d| m.is_multiple_of(*d)) {
        num = div_monic(&num, &cyclotomic_polynomial(d));
    }
    cache.lock().unwrap().insert(m, num.clone());
    num
}

fn div_monic(num: &[i64], den: &[i64]) -> Vec<i64> {
    let dn = den.len() - 1;
    let mut rem = num.to_vec();
    let mut q = vec![0i64; num.len() - dn];
    for i in (dn..num.len()).rev() {
        let c = rem[i];
        if c != 0 {
            q[i - dn] = c;
            for (j, &d) in den.iter().enumerate() {
                rem[i - dn + j] -= c * d;
            }
        }
    }
    debug_assert!(rem.iter().all(|&c| c == 0), "inexact cyclotomic division");
    q
}

/// An element of `Z[ζ_m]` in its reduced representation (degree below `φ(m)`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CyclotomicSum {
    pub conductor: u64,
    pub coefficients: Vec<i64>,
}

impl CyclotomicSum {
    fn from_powers(conductor: u64, counts: &[i64]) -> Self {
        let phi = cyclotomic_polynomial(conductor);
        let deg = phi.len() - 1;
        let mut c = counts.to_vec();
        for i in (deg..c.len()).rev() {
            let lead = c[i];
            if lead != 0 {
                for (j, &p) in phi.iter().enumerate() {
                    c[i - deg + j] -= lead * p;
                }
            }
        }
        c.truncate(deg);
        CyclotomicSum { conductor, coefficients: c }
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.iter().all(|&c| c == 0)
    }

    /// True when the element is the rational integer `k`.
    pub fn equals_integer(&self, k: i64) -> bool {
        let mut it = self.coefficients.iter();
        let c0 = it.next().copied().unwrap_or(0);
        c0 == k && it.all(|&c| c == 0)
    }
}

fn common_order(values: &[RootOfUnity]) -> u64 {
    values.iter().fold(1u64, |acc, z| acc.lcm(&z.order()))
}

/// `Σ values` in `Z[ζ_m]` with `m` the lcm of the orders.
pub fn exact_sum(values: &[RootOfUnity]) -> CyclotomicSum {
    let m = common_order(values);
    let mut counts = vec![0i64; m as usize];
    for z in values {
        counts[z.numerator_over(m) as usize] += 1;
    }
    CyclotomicSum::from_powers(m, &counts)
}

pub fn sum_is_zero(values: &[RootOfUnity]) -> bool {
    exact_sum(values).is_zero()
}

/// Decide `|Σ values|^2 == target` exactly.
pub fn abs_squared_equals(values: &[RootOfUnity], target: i64) -> bool {
    let m = common_order(values);
    let mu = m as usize;
    let mut counts = vec![0i64; mu];
    for z in values {
        counts[z.numerator_over(m) as usize] += 1;
    }
    let mut sq = vec![0i64; mu];
    for (e, &ce) in counts.iter().enumerate().filter(|(_, &c)| c != 0) {
        for (f, &cf) in counts.iter().enumerate().filter(|(_, &c)| c != 0) {
            sq[(e + mu - f) % mu] += ce * cf;
        }
    }
    CyclotomicSum::from_powers(m, &sq).equals_integer(target)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cyclotomic_polynomials() {
        assert_eq!(cyclotomic_polynomial(1), vec![-1, 1]);
        assert_eq!(cyclotomic_polynomial(2), vec![1, 1]);
        assert_eq!(cyclotomic_polynomial(4), vec![1, 0, 1]);
        assert_eq!(cyclotomic_polynomial(6), vec![1, -1, 1]);
        assert_eq!(cyclotomic_polynomial(12), vec![1, 0, -1, 0, 1]);
        assert_eq!(cyclotomic_polynomial(5).len(), 5);
    }

    #[test]
    fn exact_sums() {
        let all_fifth: Vec<_> = (0..5).map(|j| RootOfUnity::new(j, 5)).collect();
        assert!(sum_is_zero(&all_fifth));
        assert!(!sum_is_zero(&all_fifth[..4]));
        // |1 + i|^2 = 2
        let v = [RootOfUnity::ONE, RootOfUnity::new(1, 4)];
        assert!(abs_squared_equals(&v, 2));
        assert!(!abs_squared_equals(&v, 4));
        // |ζ3 + ζ3 + ζ3|^2 = 9
        let z = RootOfUnity::new(1, 3);
        assert!(abs_squared_equals(&[z, z, z], 9));
        assert!(abs_squared_equals(&[], 0));
    }
}
