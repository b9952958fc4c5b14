//! Explicit product representations with exponents in `{-1, 0, 1}` over a
//! factor base of smooth generator values.

mod hnf;
mod search;

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use hnf::hnf_solve;
pub use search::{bounded_search, SearchOptions, SearchStats};

use crate::arith::{factorize, ArithError, Factorization};
use crate::family::{FractionFamily, Mode};
use crate::membership::Target;

pub const DEFAULT_N0: i64 = 10;
pub const DEFAULT_NMAX: i64 = 5000;
pub const DEFAULT_PRIME_BOUND: u64 = 30011;
pub const DEFAULT_MAX_TERMS: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FinderError {
    #[error("target prime {prime} exceeds the factor-base bound {bound}")]
    TargetNotSmooth { prime: u64, bound: u64 },
    #[error("no representation with at most {max_terms} terms found ({nodes} nodes searched); increase N, P or max_terms")]
    SearchExhausted { max_terms: usize, nodes: u64 },
    #[error("{mode} basis cannot represent target {target}")]
    ModeMismatch { mode: Mode, target: String },
    #[error(transparent)]
    Arith(#[from] ArithError),
}

/// One retained generator: its index `n` and sparse exponent vector.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorRow {
    pub n: i64,
    /// `(column, exponent)`, columns increasing, exponents nonzero.
    pub entries: Vec<(usize, i64)>,
}

impl GeneratorRow {
    pub fn get(&self, column: usize) -> i64 {
        self.entries.binary_search_by_key(&column, |e| e.0).map_or(0, |i| self.entries[i].1)
    }

    /// Largest prime in the row; used to order rows in the search.
    fn largest_prime(&self, columns: &[(u8, u64)]) -> u64 {
        self.entries.iter().map(|&(c, _)| columns[c].1).max().unwrap_or(1)
    }
}

/// Exponent vectors of the `P`-smooth generators with `n0 < n <= N`.
/// Columns are `(coordinate, prime)`; in single mode every column has
/// coordinate 1 and denominator exponents are negative.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorBasis {
    pub family: FractionFamily,
    pub mode: Mode,
    pub n0: i64,
    pub nmax: i64,
    pub prime_bound: u64,
    pub columns: Vec<(u8, u64)>,
    pub rows: Vec<GeneratorRow>,
    pub dropped: usize,
}

impl GeneratorBasis {
    pub fn column(&self, coordinate: u8, prime: u64) -> Option<usize> {
        self.columns.binary_search(&(coordinate, prime)).ok()
    }

    pub fn row(&self, n: i64) -> Option<&GeneratorRow> {
        self.rows.binary_search_by_key(&n, |r| r.n).ok().map(|i| &self.rows[i])
    }

    /// Sparse target vector over the columns; `None` if the target contains a
    /// prime at most `P` that no retained generator contains.
    pub fn target_vector(&self, target: &Target) -> Result<Option<Vec<(usize, i64)>>, FinderError> {
        if target.mode() != self.mode {
            return Err(FinderError::ModeMismatch { mode: self.mode, target: target.to_string() });
        }
        let mut out = BTreeMap::new();
        for (coord, p, e) in target.exponents()? {
            if p > self.prime_bound {
                return Err(FinderError::TargetNotSmooth { prime: p, bound: self.prime_bound });
            }
            match self.column(coord, p) {
                Some(c) => *out.entry(c).or_insert(0) += e,
                None => return Ok(None),
            }
        }
        Ok(Some(out.into_iter().filter(|&(_, e)| e != 0).collect()))
    }
}

/// `(coordinate, prime)`.
type Column = (u8, u64);

fn smooth(f: &Factorization, bound: u64) -> bool {
    f.primes().all(|p| p <= bound)
}

/// Factor each generator with `n0 < n <= nmax` and keep the `P`-smooth ones.
pub fn build_basis(f: &FractionFamily, mode: Mode, nmax: i64, prime_bound: u64) -> Result<GeneratorBasis, FinderError> {
    let mut raw: Vec<(i64, Vec<(Column, i64)>)> = Vec::new();
    let mut dropped = 0;
    for n in f.n0 + 1..=nmax {
        let num = factorize(f.numerator(n) as u64)?;
        let den = factorize(f.denominator(n) as u64)?;
        if !smooth(&num, prime_bound) || !smooth(&den, prime_bound) {
            dropped += 1;
            continue;
        }
        let second = if mode == Mode::Single { (1u8, -1i64) } else { (2u8, 1i64) };
        let mut entries: BTreeMap<(u8, u64), i64> = BTreeMap::new();
        for &(p, e) in num.factors() {
            *entries.entry((1, p)).or_insert(0) += e as i64;
        }
        for &(p, e) in den.factors() {
            *entries.entry((second.0, p)).or_insert(0) += second.1 * e as i64;
        }
        raw.push((n, entries.into_iter().filter(|&(_, e)| e != 0).collect()));
    }
    let mut columns: Vec<(u8, u64)> = raw.iter().flat_map(|(_, e)| e.iter().map(|&(k, _)| k)).collect();
    columns.sort_unstable();
    columns.dedup();
    let rows = raw
        .into_iter()
        .map(|(n, e)| GeneratorRow {
            n,
            entries: e.into_iter().map(|(k, x)| (columns.binary_search(&k).expect("collected column"), x)).collect(),
        })
        .collect();
    Ok(GeneratorBasis { family: *f, mode, n0: f.n0, nmax, prime_bound, columns, rows, dropped })
}

/// A product of generators, `(n, ε)` with `ε = ±1` and `n` increasing.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepresentationCertificate {
    pub family: FractionFamily,
    pub mode: Mode,
    pub n0: i64,
    pub terms: Vec<(i64, i8)>,
    pub target: Target,
}

fn power(base: i128, e: i8) -> BigRational {
    let b = BigRational::from_integer(BigInt::from(base));
    if e > 0 {
        b
    } else {
        b.recip()
    }
}

/// The products of the generator values, coordinate by coordinate, computed
/// from scratch in exact rational arithmetic.
pub fn certificate_product(cert: &RepresentationCertificate) -> (BigRational, BigRational) {
    let f = &cert.family;
    let mut first = BigRational::one();
    let mut second = BigRational::one();
    for &(n, e) in &cert.terms {
        first *= power(f.numerator(n), e);
        second *= power(f.denominator(n), e);
    }
    (first, second)
}

fn rational(r: &crate::rational::PositiveRational) -> BigRational {
    BigRational::new(BigInt::from(r.num), BigInt::from(r.den))
}

/// Check a certificate against a target independently of any exponent
/// vectors: indices above `n0`, strictly increasing, signs `±1`, and the
/// exact product equal to the target.
pub fn verify(cert: &RepresentationCertificate, f: &FractionFamily, target: &Target) -> bool {
    if cert.family != *f || cert.target != *target || cert.mode != target.mode() {
        return false;
    }
    let well_formed = cert.terms.iter().all(|&(n, e)| n > f.n0 && (e == 1 || e == -1))
        && cert.terms.windows(2).all(|w| w[0].0 < w[1].0);
    if !well_formed {
        return false;
    }
    let (first, second) = certificate_product(cert);
    match target {
        Target::Single(r) => first / second == rational(r),
        Target::Pair(r, s) => first == rational(r) && second == rational(s),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::PositiveRational;

    fn family() -> FractionFamily {
        FractionFamily::new(5, 1, 5, -1).unwrap()
    }

    fn pair(a: u64, b: u64) -> Target {
        Target::Pair(PositiveRational::integer(a), PositiveRational::integer(b))
    }

    #[test]
    fn basis_examples() {
        let b = build_basis(&family(), Mode::Simultaneous, 20, 100).unwrap();
        let row = b.row(2).unwrap();
        assert_eq!(row.get(b.column(1, 11).unwrap()), 1);
        assert_eq!(row.get(b.column(2, 3).unwrap()), 2);
        assert_eq!(row.entries.len(), 2);
        // 5·20+1 = 101 exceeds the bound.
        assert_eq!((b.rows.len(), b.dropped), (19, 1));
        assert!(b.row(20).is_none());

        let g = FractionFamily::new(3, 1, 5, 2).unwrap();
        let b = build_basis(&g, Mode::Single, 5, 100).unwrap();
        let row = b.row(1).unwrap();
        assert_eq!(row.get(b.column(1, 2).unwrap()), 2);
        assert_eq!(row.get(b.column(1, 7).unwrap()), -1);
    }

    #[test]
    fn verify_examples() {
        let f = family();
        let cert = RepresentationCertificate { family: f, mode: Mode::Simultaneous, n0: 0, terms: vec![(2, 1)], target: pair(11, 9) };
        assert!(verify(&cert, &f, &pair(11, 9)));
        let wrong = RepresentationCertificate { target: pair(11, 8), ..cert.clone() };
        assert!(!verify(&wrong, &f, &pair(11, 8)));
        let repeated = RepresentationCertificate { terms: vec![(2, 1), (2, 1)], ..cert };
        assert!(!verify(&repeated, &f, &pair(11, 9)));
    }
}
