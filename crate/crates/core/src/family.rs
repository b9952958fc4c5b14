//! The fraction family `(an+b)/(An+B)`, its reduced constraints and the
//! modulus bounds for the characters of the associated quotient groups.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::factorize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FamilyError {
    #[error("degenerate family: aB - Ab = 0")]
    DegenerateFamily,
    #[error("leading coefficients must be nonzero")]
    ZeroLeadingCoefficient,
    #[error("single-fraction mode needs a and A of the same sign")]
    NegativeFraction,
    #[error("with n0 = {n0} some generator value is not positive (need n0 >= {min})")]
    NonPositiveGenerators { n0: i64, min: i64 },
    #[error("cannot parse family {0:?}: expected \"a,b,A,B\"")]
    Parse(String),
}

/// Which quotient is studied: `Q*/Γ` for the fractions, or `(Q*)^2/Γ` for
/// the pairs `(an+b) ⊗ (An+B)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Single,
    Simultaneous,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "single" | "fraction" => Ok(Mode::Single),
            "pair" | "simultaneous" => Ok(Mode::Simultaneous),
            other => Err(format!("unknown mode {other:?} (expected single or pair)")),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Single => "single",
            Mode::Simultaneous => "pair",
        })
    }
}

/// Coefficients of `(an+b)/(An+B)` with positive leading coefficients.
///
/// A negative leading coefficient is absorbed by negating that coordinate;
/// `negated` records which coordinates were flipped. Generators are the
/// values at `n > n0`, and `n0` defaults to the smallest bound making every
/// numerator and denominator positive.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FractionFamily {
    pub a: i64,
    pub b: i64,
    #[serde(rename = "A")]
    pub big_a: i64,
    #[serde(rename = "B")]
    pub big_b: i64,
    pub n0: i64,
    pub negated: [bool; 2],
}

impl FractionFamily {
    pub fn new(a: i64, b: i64, big_a: i64, big_b: i64) -> Result<Self, FamilyError> {
        if a == 0 || big_a == 0 {
            return Err(FamilyError::ZeroLeadingCoefficient);
        }
        if a as i128 * big_b as i128 - big_a as i128 * b as i128 == 0 {
            return Err(FamilyError::DegenerateFamily);
        }
        let (a, b, na) = if a < 0 { (-a, -b, true) } else { (a, b, false) };
        let (big_a, big_b, nb) = if big_a < 0 { (-big_a, -big_b, true) } else { (big_a, big_b, false) };
        let mut f = FractionFamily { a, b, big_a, big_b, n0: 0, negated: [na, nb] };
        f.n0 = f.min_n0();
        Ok(f)
    }

    /// Smallest `n0 >= 0` with every value at `n > n0` positive.
    pub fn min_n0(&self) -> i64 {
        let first = Integer::div_floor(&-self.b, &self.a);
        let second = Integer::div_floor(&-self.big_b, &self.big_a);
        first.max(second).max(0)
    }

    pub fn with_n0(mut self, n0: i64) -> Result<Self, FamilyError> {
        let min = self.min_n0();
        if n0 < min {
            return Err(FamilyError::NonPositiveGenerators { n0, min });
        }
        self.n0 = n0;
        Ok(self)
    }

    pub fn check_mode(&self, mode: Mode) -> Result<(), FamilyError> {
        if mode == Mode::Single && self.negated[0] != self.negated[1] {
            return Err(FamilyError::NegativeFraction);
        }
        Ok(())
    }

    pub fn numerator(&self, n: i64) -> i128 {
        self.a as i128 * n as i128 + self.b as i128
    }

    pub fn denominator(&self, n: i64) -> i128 {
        self.big_a as i128 * n as i128 + self.big_b as i128
    }

    pub fn delta(&self) -> i64 {
        self.a * self.big_b - self.big_a * self.b
    }

    /// Primes `p` that divide no value of the given coordinate:
    /// `p | a` and `p ∤ b` (coordinate 0), likewise for `A, B`.
    pub fn absent_primes(&self, coordinate: usize) -> Vec<u64> {
        let (lead, constant) = if coordinate == 0 { (self.a, self.b) } else { (self.big_a, self.big_b) };
        factorize(lead.unsigned_abs())
            .expect("desk-scale coefficient")
            .primes()
            .filter(|&p| constant.rem_euclid(p as i64) != 0)
            .collect()
    }

    pub fn constraints(&self) -> FamilyConstraints {
        derive_constraints(self)
    }
}

impl FromStr for FractionFamily {
    type Err = FamilyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<i64> = s
            .split(',')
            .map(|t| t.parse::<i64>())
            .collect::<Result<_, _>>()
            .map_err(|_| FamilyError::Parse(s.to_string()))?;
        match parts[..] {
            [a, b, big_a, big_b] => FractionFamily::new(a, b, big_a, big_b),
            _ => Err(FamilyError::Parse(s.to_string())),
        }
    }
}

impl fmt::Display for FractionFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}n{:+})/({}n{:+})", self.a, self.b, self.big_a, self.big_b)
    }
}

/// `α = (a,b)`, `β = (A,B)`, the reduced coefficients and both discriminants;
/// `Δ = αβΔ₁`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FamilyConstraints {
    pub alpha: i64,
    pub beta: i64,
    pub a1: i64,
    pub b1: i64,
    #[serde(rename = "A1")]
    pub big_a1: i64,
    #[serde(rename = "B1")]
    pub big_b1: i64,
    pub delta: i64,
    pub delta1: i64,
}

pub fn derive_constraints(f: &FractionFamily) -> FamilyConstraints {
    let alpha = f.a.gcd(&f.b);
    let beta = f.big_a.gcd(&f.big_b);
    let (a1, b1) = (f.a / alpha, f.b / alpha);
    let (big_a1, big_b1) = (f.big_a / beta, f.big_b / beta);
    FamilyConstraints {
        alpha,
        beta,
        a1,
        b1,
        big_a1,
        big_b1,
        delta: f.delta(),
        delta1: a1 * big_b1 - big_a1 * b1,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    Sharp,
    SimultaneousG1,
    SimultaneousG2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SupportStatus {
    /// `p = 2`, or `p` divides the relevant leading coefficient.
    Retained,
    /// `p = 3`, `3 ∥ δ` and `3 ∤ a₁A₁Δ₁`: the local filter decides.
    RetainedException,
    Stripped,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrimeSupportNote {
    pub bound: BoundKind,
    pub prime: u64,
    /// Exponent of the prime in the bound before refinement.
    pub exponent: u32,
    pub status: SupportStatus,
}

/// Moduli for the representing Dirichlet characters. All bounds are positive.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModulusBounds {
    /// `6(a,A)(aA)^2|Δ|^3`.
    #[serde(with = "decimal")]
    pub legacy: BigUint,
    /// `6|Δ₁|`.
    pub sharp: u64,
    /// `6|a₁Δ₁|`, for the first coordinate.
    pub simultaneous_g1: u64,
    /// `6|A₁Δ₁|`, for the second coordinate.
    pub simultaneous_g2: u64,
    pub prime_support_notes: Vec<PrimeSupportNote>,
}

impl ModulusBounds {
    pub fn get(&self, kind: BoundKind) -> u64 {
        match kind {
            BoundKind::Sharp => self.sharp,
            BoundKind::SimultaneousG1 => self.simultaneous_g1,
            BoundKind::SimultaneousG2 => self.simultaneous_g2,
        }
    }

    fn set(&mut self, kind: BoundKind, value: u64) {
        match kind {
            BoundKind::Sharp => self.sharp = value,
            BoundKind::SimultaneousG1 => self.simultaneous_g1 = value,
            BoundKind::SimultaneousG2 => self.simultaneous_g2 = value,
        }
    }
}

mod decimal {
    use num_bigint::BigUint;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_str_radix(10))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let s = String::deserialize(d)?;
        BigUint::parse_bytes(s.as_bytes(), 10).ok_or_else(|| serde::de::Error::custom("invalid decimal"))
    }
}

pub fn modulus_bounds(c: &FamilyConstraints) -> ModulusBounds {
    let a = (c.alpha * c.a1).unsigned_abs();
    let big_a = (c.beta * c.big_a1).unsigned_abs();
    let d = BigUint::from(c.delta.unsigned_abs());
    let legacy = BigUint::from(6u32) * BigUint::from(a.gcd(&big_a)) * (BigUint::from(a) * BigUint::from(big_a)).pow(2) * d.pow(3);
    let d1 = c.delta1.unsigned_abs();
    ModulusBounds {
        legacy,
        sharp: 6 * d1,
        simultaneous_g1: 6 * c.a1.unsigned_abs() * d1,
        simultaneous_g2: 6 * c.big_a1.unsigned_abs() * d1,
        prime_support_notes: Vec::new(),
    }
}

/// Strip prime powers the local analysis rules out: `p >= 5` not dividing the
/// relevant coefficient (`(a₁,A₁)` for the fraction bound, `a₁` resp. `A₁`
/// for the simultaneous ones), and `p = 3` likewise unless `3 ∥ δ` and
/// `3 ∤ a₁A₁Δ₁`. The powers of 2 are always kept.
pub fn refine_prime_support(c: &FamilyConstraints, bounds: &ModulusBounds) -> ModulusBounds {
    let mut out = bounds.clone();
    let a1 = c.a1.unsigned_abs();
    let big_a1 = c.big_a1.unsigned_abs();
    let witness_product = a1 as u128 * big_a1 as u128 * c.delta1.unsigned_abs() as u128;
    for kind in [BoundKind::Sharp, BoundKind::SimultaneousG1, BoundKind::SimultaneousG2] {
        let coefficient = match kind {
            BoundKind::Sharp => a1.gcd(&big_a1),
            BoundKind::SimultaneousG1 => a1,
            BoundKind::SimultaneousG2 => big_a1,
        };
        let value = bounds.get(kind);
        let mut refined = 1u64;
        for &(p, e) in factorize(value).expect("bound is desk scale").factors() {
            let status = if p == 2 || coefficient % p == 0 {
                SupportStatus::Retained
            } else if p == 3 && e == 1 && !witness_product.is_multiple_of(3) {
                SupportStatus::RetainedException
            } else {
                SupportStatus::Stripped
            };
            if status != SupportStatus::Stripped {
                refined *= p.pow(e);
            }
            if !out.prime_support_notes.iter().any(|n| n.bound == kind && n.prime == p) {
                out.prime_support_notes.push(PrimeSupportNote { bound: kind, prime: p, exponent: e, status });
            }
        }
        out.set(kind, refined);
    }
    out
}
