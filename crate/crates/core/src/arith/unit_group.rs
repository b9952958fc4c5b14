use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use num_integer::Integer;

use super::{crt_combine, factorize, mod_pow, ArithError};

/// The unit group of `Z/p^k`, with its generators and a discrete-log table.
#[derive(Clone, Debug)]
pub struct PrimePowerPart {
    pub prime: u64,
    pub exponent: u32,
    pub modulus: u64,
    /// Generators as residues modulo `modulus`.
    pub generators: Vec<u64>,
    pub orders: Vec<u64>,
    /// Position of this part's first generator in the global tuple.
    pub offset: usize,
    unit: Vec<bool>,
    logs: Vec<u32>,
}

impl PrimePowerPart {
    fn new(prime: u64, exponent: u32, offset: usize) -> Self {
        let modulus = prime.pow(exponent);
        let (generators, orders) = if prime == 2 {
            match exponent {
                1 => (vec![], vec![]),
                2 => (vec![3], vec![2]),
                k => (vec![modulus - 1, 5], vec![2, 1u64 << (k - 2)]),
            }
        } else {
            let phi = (prime - 1) * prime.pow(exponent - 1);
            (vec![primitive_root(prime, modulus, phi)], vec![phi])
        };
        let rank = generators.len();
        let mut unit = vec![false; modulus as usize];
        let mut logs = vec![0u32; modulus as usize * rank];
        // Walk every exponent tuple once; the orders multiply to φ(p^k).
        let total: u64 = orders.iter().product();
        let mut tuple = vec![0u64; rank];
        for _ in 0..total {
            let x = generators
                .iter()
                .zip(&tuple)
                .fold(1u64 % modulus, |acc, (&g, &e)| (acc as u128 * mod_pow(g, e, modulus) as u128 % modulus as u128) as u64);
            debug_assert!(!unit[x as usize], "generators do not give unique logs");
            unit[x as usize] = true;
            for i in 0..rank {
                logs[x as usize * rank + i] = tuple[i] as u32;
            }
            for i in (0..rank).rev() {
                tuple[i] += 1;
                if tuple[i] < orders[i] {
                    break;
                }
                tuple[i] = 0;
            }
        }
        if rank == 0 {
            unit[1 % modulus as usize] = true;
        }
        PrimePowerPart { prime, exponent, modulus, generators, orders, offset, unit, logs }
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    pub fn is_unit(&self, x: u64) -> bool {
        self.unit[(x % self.modulus) as usize]
    }

    /// Local discrete log of a unit residue.
    pub fn log(&self, x: u64) -> Option<&[u32]> {
        let r = (x % self.modulus) as usize;
        if !self.unit[r] {
            return None;
        }
        let k = self.rank();
        Some(&self.logs[r * k..r * k + k])
    }
}

fn primitive_root(p: u64, modulus: u64, phi: u64) -> u64 {
    let phi_primes: Vec<u64> = factorize(phi).expect("small totient").primes().collect();
    (2..modulus)
        .find(|&g| g % p != 0 && phi_primes.iter().all(|&r| mod_pow(g, phi / r, modulus) != 1))
        .unwrap_or(1)
}

/// Structure of `(Z/q)^*` as a product of cyclic groups, assembled by CRT
/// from its prime-power parts.
#[derive(Clone, Debug)]
pub struct UnitGroup {
    modulus: u64,
    parts: Vec<PrimePowerPart>,
    generators: Vec<u64>,
    orders: Vec<u64>,
    exponent: u64,
}

impl UnitGroup {
    pub fn new(q: u64) -> Self {
        assert!(q >= 1, "modulus must be positive");
        let fact = factorize(q).expect("desk-scale modulus");
        let mut parts = Vec::new();
        let mut offset = 0;
        for &(p, e) in fact.factors() {
            let part = PrimePowerPart::new(p, e, offset);
            offset += part.rank();
            parts.push(part);
        }
        let mut generators = Vec::new();
        let mut orders = Vec::new();
        for (i, part) in parts.iter().enumerate() {
            for (&g, &o) in part.generators.iter().zip(&part.orders) {
                let congruences: Vec<(u64, u64)> = parts
                    .iter()
                    .enumerate()
                    .map(|(j, other)| (if i == j { g } else { 1 % other.modulus }, other.modulus))
                    .collect();
                generators.push(crt_combine(&congruences).expect("prime powers are coprime").0);
                orders.push(o);
            }
        }
        let exponent = orders.iter().fold(1u64, |acc, &o| acc.lcm(&o));
        UnitGroup { modulus: q, parts, generators, orders, exponent }
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn parts(&self) -> &[PrimePowerPart] {
        &self.parts
    }

    pub fn generators(&self) -> &[u64] {
        &self.generators
    }

    pub fn orders(&self) -> &[u64] {
        &self.orders
    }

    pub fn rank(&self) -> usize {
        self.orders.len()
    }

    /// Exponent of the group: the lcm of the generator orders.
    pub fn exponent(&self) -> u64 {
        self.exponent
    }

    pub fn order(&self) -> u64 {
        self.orders.iter().product()
    }

    pub fn is_unit(&self, x: i128) -> bool {
        let r = x.rem_euclid(self.modulus as i128) as u64;
        self.parts.iter().all(|p| p.is_unit(r))
    }

    /// Write the exponent tuple of `x` into `out`; false if `x` is not a unit.
    pub fn log_into(&self, x: i128, out: &mut [u32]) -> bool {
        let r = x.rem_euclid(self.modulus as i128) as u64;
        for part in &self.parts {
            match part.log(r) {
                Some(l) => out[part.offset..part.offset + l.len()].copy_from_slice(l),
                None => return false,
            }
        }
        true
    }

    pub fn discrete_log(&self, x: i128) -> Result<Vec<u32>, ArithError> {
        let mut out = vec![0u32; self.rank()];
        if self.log_into(x, &mut out) {
            Ok(out)
        } else {
            Err(ArithError::NotAUnit { value: x, modulus: self.modulus })
        }
    }

    /// Residue with the given exponent tuple.
    pub fn element(&self, exponents: &[u32]) -> u64 {
        self.generators
            .iter()
            .zip(exponents)
            .fold(1 % self.modulus, |acc, (&g, &e)| {
                (acc as u128 * mod_pow(g, e as u64, self.modulus) as u128 % self.modulus as u128) as u64
            })
    }
}

/// Shared, lazily built unit group for `q`.
pub fn unit_group(q: u64) -> Arc<UnitGroup> {
    static CACHE: OnceLock<RwLock<HashMap<u64, Arc<UnitGroup>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(g) = cache.read().unwrap().get(&q) {
        return Arc::clone(g);
    }
    let built = Arc::new(UnitGroup::new(q));
    Arc::clone(cache.write().unwrap().entry(q).or_insert(built))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::euler_phi;

    #[test]
    fn unit_group_examples() {
        let g5 = unit_group(5);
        assert_eq!(g5.generators(), &[2]);
        assert_eq!(g5.orders(), &[4]);
        let g25 = unit_group(25);
        assert_eq!(g25.generators(), &[2]);
        assert_eq!(g25.orders(), &[20]);
        let g8 = unit_group(8);
        assert_eq!(g8.generators(), &[7, 5]);
        assert_eq!(g8.orders(), &[2, 2]);
        assert_eq!(unit_group(4).generators(), &[3]);
        assert_eq!(unit_group(2).rank(), 0);
        assert_eq!(unit_group(1).rank(), 0);
    }

    #[test]
    fn discrete_log_examples() {
        assert_eq!(unit_group(5).discrete_log(1).unwrap(), vec![0]);
        assert_eq!(unit_group(5).discrete_log(2).unwrap(), vec![1]);
        assert_eq!(unit_group(25).discrete_log(24).unwrap(), vec![10]);
        assert_eq!(unit_group(25).discrete_log(-1).unwrap(), vec![10]);
        assert!(matches!(unit_group(25).discrete_log(10), Err(ArithError::NotAUnit { .. })));
        assert_eq!(unit_group(1).discrete_log(0).unwrap(), Vec::<u32>::new());
    }

    #[test]
    fn orders_and_logs_are_consistent() {
        for q in 1..=1000u64 {
            let g = unit_group(q);
            assert_eq!(g.order(), euler_phi(q), "q = {q}");
            for (&gen, &ord) in g.generators().iter().zip(g.orders()) {
                let mut x = 1 % q;
                for k in 1..=ord {
                    x = x * gen % q;
                    assert_eq!(x == 1 % q, k == ord, "generator {gen} mod {q}");
                }
            }
            let mut seen = std::collections::HashSet::new();
            for x in 0..q {
                if x.gcd(&q) == 1 {
                    let l = g.discrete_log(x as i128).unwrap();
                    assert_eq!(g.element(&l), x % q);
                    assert!(seen.insert(l));
                }
            }
        }
    }
}
