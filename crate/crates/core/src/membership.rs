//! Classification of rationals and pairs against an assembled dual group.

use std::collections::BTreeSet;

use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{lcm, ArithError, RootOfUnity};
use crate::dual::{DualCharacter, DualGroup};
use crate::family::Mode;
use crate::rational::{PositiveRational, RationalError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MembershipError {
    #[error("target is not positive: {0}")]
    TargetNotPositive(String),
    #[error("target is not in lowest terms: {0}")]
    TargetNotReduced(String),
    #[error("{mode} mode needs {expected}")]
    ModeMismatch { mode: Mode, expected: &'static str },
    #[error("residue table would have {0} rows")]
    TableTooLarge(u128),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

impl From<RationalError> for MembershipError {
    fn from(e: RationalError) -> Self {
        match e {
            RationalError::NotPositive(s) | RationalError::Parse(s) => MembershipError::TargetNotPositive(s),
            RationalError::NotReduced(s) => MembershipError::TargetNotReduced(s),
        }
    }
}

/// A rational (single mode) or a pair of rationals (simultaneous mode).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Single(PositiveRational),
    Pair(PositiveRational, PositiveRational),
}

impl Target {
    pub fn mode(&self) -> Mode {
        match self {
            Target::Single(_) => Mode::Single,
            Target::Pair(..) => Mode::Simultaneous,
        }
    }

    /// `(coordinate, prime, exponent)` over the target's factorization. In
    /// single mode everything is coordinate 1.
    pub fn exponents(&self) -> Result<Vec<(u8, u64, i64)>, ArithError> {
        Ok(match self {
            Target::Single(r) => r.exponents()?.into_iter().map(|(p, e)| (1, p, e)).collect(),
            Target::Pair(r, s) => {
                let mut v: Vec<(u8, u64, i64)> = r.exponents()?.into_iter().map(|(p, e)| (1, p, e)).collect();
                v.extend(s.exponents()?.into_iter().map(|(p, e)| (2, p, e)));
                v
            }
        })
    }
}

impl std::fmt::Display for Target {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Target::Single(r) => write!(f, "{r}"),
            Target::Pair(r, s) => write!(f, "{r} ⊗ {s}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Member,
    NonMember,
    Undetermined,
}

impl Verdict {
    /// CLI exit code for the verdict.
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Member => 0,
            Verdict::NonMember => 1,
            Verdict::Undetermined => 3,
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Member => "member",
            Verdict::NonMember => "non-member",
            Verdict::Undetermined => "undetermined",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateEntry {
    pub element: usize,
    /// `None` when an unpinned bad prime is needed.
    pub value: Option<RootOfUnity>,
    pub required: RootOfUnity,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MembershipVerdict {
    pub target: Target,
    pub verdict: Verdict,
    pub certificate: Vec<CertificateEntry>,
    pub failing_element: Option<usize>,
    /// `(coordinate, prime)` pairs whose values are needed but unpinned.
    pub undetermined_primes: Vec<(u8, u64)>,
    /// `(coordinate, prime)` pairs in the target that no generator contains.
    pub forbidden_primes: Vec<(u8, u64)>,
}

/// `(coordinate, prime)` pairs dividing no generator value: `p | a`, `p ∤ b`
/// for the first coordinate, likewise for the second. In single mode a prime
/// must be absent from both numerators and denominators.
pub fn forbidden_primes(dg: &DualGroup) -> BTreeSet<(u8, u64)> {
    let first: BTreeSet<u64> = dg.family.absent_primes(0).into_iter().collect();
    let second: BTreeSet<u64> = dg.family.absent_primes(1).into_iter().collect();
    match dg.mode {
        Mode::Single => first.intersection(&second).map(|&p| (1, p)).collect(),
        Mode::Simultaneous => first.iter().map(|&p| (1, p)).chain(second.iter().map(|&p| (2, p))).collect(),
    }
}

fn evaluate(e: &DualCharacter, exps: &[(u8, u64, i64)], missing: &mut BTreeSet<(u8, u64)>) -> Option<RootOfUnity> {
    let mut acc = Some(RootOfUnity::ONE);
    for &(coord, p, k) in exps {
        match e.value_at_prime(coord, p) {
            Some(z) => acc = acc.map(|a| a * z.pow(k as i128)),
            None => {
                missing.insert((coord, p));
                acc = None;
            }
        }
    }
    acc
}

/// Classify a target: member iff every dual element is 1 on it.
pub fn classify(target: &Target, dg: &DualGroup) -> Result<MembershipVerdict, MembershipError> {
    if target.mode() != dg.mode {
        let expected = match dg.mode {
            Mode::Single => "one target",
            Mode::Simultaneous => "a pair of targets",
        };
        return Err(MembershipError::ModeMismatch { mode: dg.mode, expected });
    }
    let exps = target.exponents()?;
    let forbidden_set = forbidden_primes(dg);
    let forbidden: Vec<(u8, u64)> =
        exps.iter().map(|&(c, p, _)| (c, p)).filter(|k| forbidden_set.contains(k)).collect::<BTreeSet<_>>().into_iter().collect();
    if !forbidden.is_empty() {
        return Ok(MembershipVerdict {
            target: *target,
            verdict: Verdict::NonMember,
            certificate: Vec::new(),
            failing_element: None,
            undetermined_primes: Vec::new(),
            forbidden_primes: forbidden,
        });
    }
    let mut missing = BTreeSet::new();
    let certificate: Vec<CertificateEntry> = dg
        .elements
        .iter()
        .enumerate()
        .map(|(i, e)| CertificateEntry { element: i, value: evaluate(e, &exps, &mut missing), required: RootOfUnity::ONE })
        .collect();
    let failing_element = certificate.iter().find(|c| matches!(c.value, Some(z) if !z.is_one())).map(|c| c.element);
    let verdict = if failing_element.is_some() {
        Verdict::NonMember
    } else if !missing.is_empty() {
        Verdict::Undetermined
    } else {
        Verdict::Member
    };
    Ok(MembershipVerdict {
        target: *target,
        verdict,
        certificate,
        failing_element,
        undetermined_primes: missing.into_iter().collect(),
        forbidden_primes: Vec::new(),
    })
}

/// Classify many targets in parallel; output order follows the input.
pub fn classify_many(targets: &[Target], dg: &DualGroup) -> Vec<Result<MembershipVerdict, MembershipError>> {
    targets.par_iter().map(|t| classify(t, dg)).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriterionRow {
    /// Residue of the first coordinate modulo `moduli.0`.
    pub first: u64,
    /// Residue of the second coordinate (0 in single mode).
    pub second: u64,
    pub verdict: Verdict,
}

/// Verdicts on every coprime residue class modulo the lcm of the conductors.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriterionTable {
    pub mode: Mode,
    pub moduli: (u64, u64),
    pub rows: Vec<CriterionRow>,
    /// Primes that make any target a non-member.
    pub forbidden_primes: Vec<(u8, u64)>,
}

impl CriterionTable {
    pub fn members(&self) -> impl Iterator<Item = &CriterionRow> {
        self.rows.iter().filter(|r| r.verdict == Verdict::Member)
    }

    pub fn verdict(&self, first: u64, second: u64) -> Option<Verdict> {
        let key = (first % self.moduli.0, second % self.moduli.1.max(1));
        self.rows.iter().find(|r| (r.first, r.second) == key).map(|r| r.verdict)
    }
}

/// Smallest `x ≡ r (mod l)` coprime to `m`; `None` if `(r, l)` shares a
/// prime with `m` that also divides `l`.
fn coprime_lift(r: u64, l: u64, m: u64) -> Option<u64> {
    (0..m.max(1)).map(|k| r + k * l).find(|&x| x > 0 && x.gcd(&m) == 1)
}

/// Tabulate the membership criterion. Each class is evaluated through a
/// lift coprime to the coordinate's modulus, so only good primes enter.
pub fn criterion_table(dg: &DualGroup, max_rows: usize) -> Result<CriterionTable, MembershipError> {
    let l1 = dg.elements.iter().fold(1, |acc, e| lcm(acc, e.character(1).conductor()));
    let l2 = match dg.mode {
        Mode::Single => 1,
        Mode::Simultaneous => dg.elements.iter().fold(1, |acc, e| lcm(acc, e.character(2).conductor())),
    };
    let size = l1 as u128 * l2 as u128;
    if size > max_rows as u128 {
        return Err(MembershipError::TableTooLarge(size));
    }
    let (m1, m2) = dg.moduli;
    let classes1: Vec<(u64, u64)> = (0..l1).filter(|r| r.gcd(&l1) == 1).filter_map(|r| coprime_lift(r, l1, m1).map(|x| (r, x))).collect();
    let classes2: Vec<(u64, u64)> = (0..l2).filter(|r| r.gcd(&l2) == 1).filter_map(|r| coprime_lift(r, l2, m2).map(|x| (r, x))).collect();
    let mut rows = Vec::with_capacity(classes1.len() * classes2.len());
    for &(r1, x1) in &classes1 {
        for &(r2, x2) in &classes2 {
            let target = match dg.mode {
                Mode::Single => Target::Single(PositiveRational::integer(x1)),
                Mode::Simultaneous => Target::Pair(PositiveRational::integer(x1), PositiveRational::integer(x2)),
            };
            let v = classify(&target, dg)?;
            rows.push(CriterionRow { first: r1, second: r2, verdict: v.verdict });
        }
    }
    Ok(CriterionTable { mode: dg.mode, moduli: (l1, l2), rows, forbidden_primes: forbidden_primes(dg).into_iter().collect() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dual::assemble_dual;
    use crate::family::FractionFamily;

    fn pair(a: u64, b: u64) -> Target {
        Target::Pair(PositiveRational::integer(a), PositiveRational::integer(b))
    }

    #[test]
    fn classify_examples() {
        let dg = assemble_dual(&FractionFamily::new(5, 1, 5, -1).unwrap(), Mode::Simultaneous).unwrap();
        assert_eq!(classify(&pair(26, 26), &dg).unwrap().verdict, Verdict::Member);
        let v = classify(&pair(2, 2), &dg).unwrap();
        assert_eq!(v.verdict, Verdict::NonMember);
        assert!(!v.certificate[v.failing_element.unwrap()].value.unwrap().is_one());
        let v = classify(&pair(5, 1), &dg).unwrap();
        assert_eq!((v.verdict, v.forbidden_primes.clone()), (Verdict::NonMember, vec![(1, 5)]));
        assert!(classify(&Target::Single(PositiveRational::ONE), &dg).is_err());

        let dg = assemble_dual(&FractionFamily::new(3, 1, 5, 2).unwrap(), Mode::Simultaneous).unwrap();
        assert_eq!(classify(&pair(7, 3), &dg).unwrap().verdict, Verdict::Member);
    }

    #[test]
    fn criterion_tables() {
        let dg = assemble_dual(&FractionFamily::new(3, 1, 5, 2).unwrap(), Mode::Simultaneous).unwrap();
        let t = criterion_table(&dg, 10_000).unwrap();
        assert_eq!(t.moduli, (3, 1));
        let members: Vec<_> = t.members().map(|r| r.first).collect();
        assert_eq!(members, vec![1]);
        assert_eq!(t.forbidden_primes, vec![(1, 3), (2, 5)]);

        let dg = assemble_dual(&FractionFamily::new(1, 0, 1, 1).unwrap(), Mode::Single).unwrap();
        let t = criterion_table(&dg, 10).unwrap();
        assert!(t.rows.iter().all(|r| r.verdict == Verdict::Member));
    }
}
