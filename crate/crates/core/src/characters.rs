//! Dirichlet characters identified by exponent tuples on the generators of
//! `(Z/q)^*`. Values are exact roots of unity; the Gauss sum is the only
//! floating-point quantity.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::Mul;
use std::sync::Arc;

use num_complex::Complex64;
use num_integer::Integer;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::arith::{unit_group, RootOfUnity, UnitGroup};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CharacterError {
    #[error("characters have different moduli {0} and {1}")]
    ModulusMismatch(u64, u64),
    #[error("exponent tuple {exponents:?} is invalid for modulus {modulus}")]
    InvalidExponents { modulus: u64, exponents: Vec<u32> },
    #[error("character mod {modulus} with conductor {conductor} has no counterpart mod {target}")]
    NotInducible { modulus: u64, conductor: u64, target: u64 },
}

/// A value of a Dirichlet character: zero off the units, a root of unity on them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CharacterValue {
    Zero,
    Unit(RootOfUnity),
}

impl CharacterValue {
    pub const ONE: CharacterValue = CharacterValue::Unit(RootOfUnity::ONE);

    pub fn is_zero(self) -> bool {
        matches!(self, CharacterValue::Zero)
    }

    pub fn root(self) -> Option<RootOfUnity> {
        match self {
            CharacterValue::Zero => None,
            CharacterValue::Unit(z) => Some(z),
        }
    }

    pub fn conj(self) -> Self {
        match self {
            CharacterValue::Zero => CharacterValue::Zero,
            CharacterValue::Unit(z) => CharacterValue::Unit(z.conj()),
        }
    }

    pub fn to_complex(self) -> Complex64 {
        self.root().map_or(Complex64::new(0.0, 0.0), RootOfUnity::to_complex)
    }
}

impl Mul for CharacterValue {
    type Output = CharacterValue;

    fn mul(self, rhs: CharacterValue) -> CharacterValue {
        match (self, rhs) {
            (CharacterValue::Unit(a), CharacterValue::Unit(b)) => CharacterValue::Unit(a * b),
            _ => CharacterValue::Zero,
        }
    }
}

impl fmt::Display for CharacterValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CharacterValue::Zero => write!(f, "0"),
            CharacterValue::Unit(z) => write!(f, "{}", z),
        }
    }
}

/// A Dirichlet character modulo `q`: `χ(g_i) = e(c_i / ord_i)` on the
/// generators of [`UnitGroup`].
#[derive(Clone)]
pub struct DirichletCharacter {
    group: Arc<UnitGroup>,
    exponents: Vec<u32>,
}

impl DirichletCharacter {
    pub fn new(modulus: u64, exponents: Vec<u32>) -> Result<Self, CharacterError> {
        let group = unit_group(modulus.max(1));
        let valid = exponents.len() == group.rank()
            && exponents.iter().zip(group.orders()).all(|(&c, &o)| (c as u64) < o);
        if !valid || modulus == 0 {
            return Err(CharacterError::InvalidExponents { modulus, exponents });
        }
        Ok(DirichletCharacter { group, exponents })
    }

    pub fn principal(modulus: u64) -> Self {
        let group = unit_group(modulus);
        let exponents = vec![0; group.rank()];
        DirichletCharacter { group, exponents }
    }

    fn from_parts_unchecked(group: Arc<UnitGroup>, exponents: Vec<u32>) -> Self {
        DirichletCharacter { group, exponents }
    }

    pub fn modulus(&self) -> u64 {
        self.group.modulus()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    pub fn group(&self) -> &UnitGroup {
        &self.group
    }

    pub fn is_principal(&self) -> bool {
        self.exponents.iter().all(|&c| c == 0)
    }

    /// Position in the canonical (lexicographic) enumeration.
    pub fn index(&self) -> u64 {
        self.exponents
            .iter()
            .zip(self.group.orders())
            .fold(0u64, |acc, (&c, &o)| acc * o + c as u64)
    }

    pub fn from_index(modulus: u64, mut index: u64) -> Option<Self> {
        let group = unit_group(modulus);
        if index >= group.order() {
            return None;
        }
        let mut exps = vec![0u32; group.rank()];
        for (i, &o) in group.orders().iter().enumerate().rev() {
            exps[i] = (index % o) as u32;
            index /= o;
        }
        Some(DirichletCharacter { group, exponents: exps })
    }

    /// Angle numerator over the group exponent for a given log tuple.
    fn angle(&self, logs: &[u32]) -> u64 {
        let l = self.group.exponent() as u128;
        let mut acc = 0u128;
        for ((&c, &e), &o) in self.exponents.iter().zip(logs).zip(self.group.orders()) {
            acc += c as u128 * e as u128 * (l / o as u128);
        }
        (acc % l) as u64
    }

    pub fn evaluate(&self, n: i128) -> CharacterValue {
        let mut logs = [0u32; 16];
        let logs = &mut logs[..self.group.rank()];
        if !self.group.log_into(n, logs) {
            return CharacterValue::Zero;
        }
        CharacterValue::Unit(RootOfUnity::new(self.angle(logs) as i128, self.group.exponent()))
    }

    /// Value on a known unit; panics if `n` shares a factor with the modulus.
    pub fn evaluate_unit(&self, n: i128) -> RootOfUnity {
        self.evaluate(n).root().expect("argument is not a unit")
    }

    pub fn conj(&self) -> Self {
        let exponents = self
            .exponents
            .iter()
            .zip(self.group.orders())
            .map(|(&c, &o)| ((o - c as u64) % o) as u32)
            .collect();
        Self::from_parts_unchecked(Arc::clone(&self.group), exponents)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, CharacterError> {
        if self.modulus() != other.modulus() {
            return Err(CharacterError::ModulusMismatch(self.modulus(), other.modulus()));
        }
        let exponents = self
            .exponents
            .iter()
            .zip(&other.exponents)
            .zip(self.group.orders())
            .map(|((&a, &b), &o)| ((a as u64 + b as u64) % o) as u32)
            .collect();
        Ok(Self::from_parts_unchecked(Arc::clone(&self.group), exponents))
    }

    pub fn pow(&self, k: i64) -> Self {
        let exponents = self
            .exponents
            .iter()
            .zip(self.group.orders())
            .map(|(&c, &o)| ((c as i128 * k as i128).rem_euclid(o as i128)) as u32)
            .collect();
        Self::from_parts_unchecked(Arc::clone(&self.group), exponents)
    }

    pub fn order(&self) -> u64 {
        self.exponents
            .iter()
            .zip(self.group.orders())
            .fold(1u64, |acc, (&c, &o)| acc.lcm(&(o / (c as u64).gcd(&o))))
    }

    /// `χ(-1)` as `+1` or `-1`.
    pub fn parity(&self) -> i8 {
        let q = self.modulus();
        match self.evaluate(q as i128 - 1) {
            CharacterValue::Unit(z) if z.is_one() => 1,
            CharacterValue::Unit(_) => -1,
            CharacterValue::Zero => 1,
        }
    }

    /// Prime-power components, one per part of the unit group.
    pub fn components(&self) -> Vec<DirichletCharacter> {
        self.group
            .parts()
            .iter()
            .map(|part| {
                let exps = self.exponents[part.offset..part.offset + part.rank()].to_vec();
                DirichletCharacter::from_parts_unchecked(unit_group(part.modulus), exps)
            })
            .collect()
    }

    /// Product of characters with pairwise coprime moduli, as a character
    /// modulo the product of the moduli.
    pub fn from_components(components: &[DirichletCharacter]) -> Self {
        let mut by_prime: Vec<DirichletCharacter> = components
            .iter()
            .flat_map(|c| c.components())
            .filter(|c| c.modulus() > 1)
            .collect();
        by_prime.sort_by_key(|c| c.group.parts()[0].prime);
        let modulus: u64 = by_prime.iter().map(|c| c.modulus()).product();
        let group = unit_group(modulus);
        let exponents = by_prime.iter().flat_map(|c| c.exponents.iter().copied()).collect::<Vec<_>>();
        debug_assert_eq!(exponents.len(), group.rank());
        Self::from_parts_unchecked(group, exponents)
    }

    /// The smallest `f` such that the character is induced from one mod `f`.
    pub fn conductor(&self) -> u64 {
        self.components().iter().map(prime_power_conductor).product()
    }

    pub fn is_primitive(&self) -> bool {
        self.conductor() == self.modulus()
    }

    /// The character mod `target` agreeing with `self` on integers coprime to
    /// both moduli. Exists exactly when the conductor divides `target`; this
    /// covers induction to a multiple of the modulus and restriction to its
    /// conductor.
    pub fn transfer(&self, target: u64) -> Result<Self, CharacterError> {
        let conductor = self.conductor();
        if target == 0 || !target.is_multiple_of(conductor) {
            return Err(CharacterError::NotInducible { modulus: self.modulus(), conductor, target });
        }
        let group = unit_group(target);
        let q = self.modulus() as i128;
        let exponents = group
            .generators()
            .iter()
            .zip(group.orders())
            .map(|(&g, &o)| {
                // A lift of g coprime to the source modulus.
                let mut x = g as i128;
                while (x.gcd(&q)) != 1 {
                    x += target as i128;
                }
                let z = self.evaluate_unit(x);
                (z.exponent() * (o / z.order())) as u32
            })
            .collect();
        Ok(Self::from_parts_unchecked(group, exponents))
    }

    /// Induce to a multiple of the modulus.
    pub fn induce(&self, target: u64) -> Result<Self, CharacterError> {
        if !target.is_multiple_of(self.modulus()) {
            return Err(CharacterError::NotInducible { modulus: self.modulus(), conductor: self.conductor(), target });
        }
        self.transfer(target)
    }

    /// The primitive character inducing this one.
    pub fn primitive(&self) -> Self {
        self.transfer(self.conductor()).expect("conductor always admits a transfer")
    }

    /// `Σ_{r mod q} χ(r) exp(2πi r/q)` by direct summation.
    pub fn gauss_sum(&self) -> Complex64 {
        let q = self.modulus();
        (0..q)
            .map(|r| {
                let theta = 2.0 * std::f64::consts::PI * r as f64 / q as f64;
                self.evaluate(r as i128).to_complex() * Complex64::new(theta.cos(), theta.sin())
            })
            .sum()
    }
}

fn prime_power_conductor(chi: &DirichletCharacter) -> u64 {
    let q = chi.modulus();
    let parts = chi.group.parts();
    if parts.is_empty() || chi.is_principal() {
        return 1;
    }
    let p = parts[0].prime;
    let k = parts[0].exponent;
    for j in 1..=k {
        let f = p.pow(j);
        let trivial = (0..q / f).all(|t| match chi.evaluate((1 + f * t) as i128) {
            CharacterValue::Unit(z) => z.is_one(),
            CharacterValue::Zero => true,
        });
        if trivial {
            return f;
        }
    }
    q
}

/// All `φ(q)` characters modulo `q` in canonical order; the principal one first.
pub fn enumerate_characters(q: u64) -> Vec<DirichletCharacter> {
    let group = unit_group(q);
    (0..group.order())
        .map(|i| DirichletCharacter::from_index(q, i).expect("index below the group order"))
        .collect()
}

/// The primitive characters modulo `q`, in canonical order.
pub fn primitive_characters(q: u64) -> Vec<DirichletCharacter> {
    enumerate_characters(q).into_iter().filter(DirichletCharacter::is_primitive).collect()
}

impl PartialEq for DirichletCharacter {
    fn eq(&self, other: &Self) -> bool {
        self.modulus() == other.modulus() && self.exponents == other.exponents
    }
}

impl Eq for DirichletCharacter {}

impl Hash for DirichletCharacter {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.modulus().hash(state);
        self.exponents.hash(state);
    }
}

impl PartialOrd for DirichletCharacter {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for DirichletCharacter {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.modulus(), &self.exponents).cmp(&(other.modulus(), &other.exponents))
    }
}

impl fmt::Debug for DirichletCharacter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "χ[{}]{:?}", self.modulus(), self.exponents)
    }
}

impl fmt::Display for DirichletCharacter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "mod {} {:?}", self.modulus(), self.exponents)
    }
}

#[derive(Serialize, Deserialize)]
struct CharacterRepr {
    modulus: u64,
    exponents: Vec<u32>,
}

impl Serialize for DirichletCharacter {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        CharacterRepr { modulus: self.modulus(), exponents: self.exponents.clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for DirichletCharacter {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = CharacterRepr::deserialize(d)?;
        DirichletCharacter::new(r.modulus, r.exponents).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chi(q: u64, e: &[u32]) -> DirichletCharacter {
        DirichletCharacter::new(q, e.to_vec()).unwrap()
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_characters(5).len(), 4);
        assert_eq!(enumerate_characters(25).len(), 20);
        let one = enumerate_characters(1);
        assert_eq!(one.len(), 1);
        assert!((-5..5).all(|n| one[0].evaluate(n) == CharacterValue::ONE));
        assert!(enumerate_characters(300)[0].is_principal());
    }

    #[test]
    fn evaluation_examples() {
        assert_eq!(DirichletCharacter::principal(5).evaluate(7), CharacterValue::ONE);
        let quad = chi(5, &[2]);
        assert_eq!(quad.evaluate(2), CharacterValue::Unit(RootOfUnity::MINUS_ONE));
        assert_eq!(quad.evaluate(4), CharacterValue::ONE);
        for c in enumerate_characters(25) {
            assert_eq!(c.evaluate(10), CharacterValue::Zero);
        }
    }

    #[test]
    fn conductor_and_induction() {
        assert_eq!(DirichletCharacter::principal(25).conductor(), 1);
        let w = chi(25, &[1]);
        assert_eq!(w.order(), 20);
        assert_eq!(w.conductor(), 25);
        let quad = chi(5, &[2]);
        let induced = quad.induce(25).unwrap();
        assert_eq!(induced.modulus(), 25);
        assert_eq!(induced.order(), 2);
        assert_eq!(induced.exponents(), &[10]);
        assert_eq!(induced.conductor(), 5);
        assert_eq!(induced.primitive(), quad);
        assert!(quad.induce(7).is_err());
        assert!(w.transfer(5).is_err());
    }

    #[test]
    fn group_operations() {
        let w = chi(25, &[1]);
        assert!(w.try_mul(&w.conj()).unwrap().is_principal());
        assert_eq!(w.pow(2).parity(), 1);
        assert_eq!(w.parity(), -1);
        assert!(matches!(w.try_mul(&chi(5, &[1])), Err(CharacterError::ModulusMismatch(25, 5))));
        let c = DirichletCharacter::from_index(300, 17).unwrap();
        assert_eq!(c.index(), 17);
    }

    #[test]
    fn gauss_sum_examples() {
        let g1 = DirichletCharacter::principal(1).gauss_sum();
        assert!((g1 - Complex64::new(1.0, 0.0)).norm() < 1e-9);
        let quad = chi(5, &[2]).gauss_sum();
        assert!((quad - Complex64::new(5f64.sqrt(), 0.0)).norm() < 1e-9);
        for c in primitive_characters(25) {
            assert!((c.gauss_sum().norm() - 5.0).abs() < 1e-9);
        }
    }

    #[test]
    fn components_round_trip() {
        for c in enumerate_characters(300) {
            assert_eq!(DirichletCharacter::from_components(&c.components()), c);
        }
    }
}
