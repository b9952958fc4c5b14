//! Local character sums `η(β, γ)` at a prime power, the equal-summand
//! candidate filter built on them, and a brute-force scan for constancy of
//! primitive characters on a fraction family.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{abs_squared_equals, valuation, RootOfUnity};
use crate::characters::{enumerate_characters, primitive_characters, CharacterValue, DirichletCharacter};
use crate::family::{FamilyConstraints, Mode};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EtaError {
    #[error("stratum ({beta}, {gamma}) at {prime} has no admissible u")]
    StratumEmpty { prime: u64, beta: u32, gamma: u32 },
    #[error("characters must both have modulus {expected}, got {got:?}")]
    ModulusMismatch { expected: u64, got: (u64, u64) },
    #[error("degenerate quadruple: need u1, u2 >= 0, (u_j, v_j) = 1 and u1 v2 - u2 v1 != 0")]
    DegenerateQuadruple,
}

/// One divisibility pattern `ℓ^β | a₁u+b₁`, `ℓ^γ | A₁u+B₁` at a prime `ℓ`,
/// with `ℓ^α` the character modulus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Stratum {
    pub prime: u64,
    pub local_exponent: u32,
    pub beta: u32,
    pub gamma: u32,
}

impl Stratum {
    pub fn modulus(&self) -> u64 {
        self.prime.pow(self.local_exponent)
    }

    /// Length of the summation range, `ℓ^{α+max(β,γ)}`.
    pub fn range(&self) -> u64 {
        self.prime.pow(self.local_exponent + self.beta.max(self.gamma))
    }
}

/// Default stratum depth `v_ℓ(Δ₁) + 2α + 1`.
pub fn default_cap(c: &FamilyConstraints, prime: u64, alpha: u32) -> u32 {
    valuation(c.delta1.unsigned_abs() as u128, prime) + 2 * alpha + 1
}

/// Solutions of `m | a u + b` as a class `u ≡ r (mod m')`, or `None`.
fn solve_linear(a: i128, b: i128, m: i128) -> Option<(i128, i128)> {
    let g = a.gcd(&m);
    if b.rem_euclid(g) != 0 {
        return None;
    }
    let m1 = m / g;
    if m1 == 1 {
        return Some((0, 1));
    }
    let inv = crate::arith::mod_inv(a / g, m1 as u64)? as i128;
    Some(((-b / g).rem_euclid(m1) * inv % m1, m1))
}

/// The admissible `u` of a stratum as one residue class `t (mod step)`.
fn admissible_class(c: &FamilyConstraints, s: &Stratum) -> Option<(i128, i128)> {
    let l = s.prime as i128;
    let (r1, m1) = solve_linear(c.a1 as i128, c.b1 as i128, l.pow(s.beta))?;
    let (r2, m2) = solve_linear(c.big_a1 as i128, c.big_b1 as i128, l.pow(s.gamma))?;
    // Both moduli are powers of ℓ, so the coarser class must contain the finer one.
    let (fine, coarse) = if m1 >= m2 { ((r1, m1), (r2, m2)) } else { ((r2, m2), (r1, m1)) };
    if fine.0.rem_euclid(coarse.1) != coarse.0 {
        return None;
    }
    Some(fine)
}

fn stratum_possible(c: &FamilyConstraints, s: &Stratum) -> bool {
    let m = s.prime.pow(s.beta.min(s.gamma));
    c.delta1.unsigned_abs().is_multiple_of(m) && admissible_class(c, s).is_some()
}

/// All nonempty strata with `β, γ ≤ cap` (default [`default_cap`]).
pub fn enumerate_strata(c: &FamilyConstraints, prime: u64, alpha: u32, cap: Option<u32>) -> Vec<Stratum> {
    let cap = cap.unwrap_or_else(|| default_cap(c, prime, alpha));
    let mut out = Vec::new();
    for beta in 0..=cap {
        for gamma in 0..=cap {
            let s = Stratum { prime, local_exponent: alpha, beta, gamma };
            if stratum_possible(c, &s) {
                out.push(s);
            }
        }
    }
    out
}

/// The arguments `((a₁u+b₁)/ℓ^β, (A₁u+B₁)/ℓ^γ)` for every admissible
/// `u (mod ℓ^{α+max(β,γ)})`, in increasing `u`.
fn stratum_arguments(c: &FamilyConstraints, s: &Stratum) -> Option<Vec<(i128, i128)>> {
    let (t, step) = admissible_class(c, s)?;
    let l = s.prime as i128;
    let (db, dg) = (l.pow(s.beta), l.pow(s.gamma));
    let range = s.range() as i128;
    Some(
        (0..range / step)
            .map(|k| {
                let u = t + step * k;
                ((c.a1 as i128 * u + c.b1 as i128) / db, (c.big_a1 as i128 * u + c.big_b1 as i128) / dg)
            })
            .collect(),
    )
}

/// A formal sum `ℓ^{-α} Σ count·ζ` of roots of unity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormalSum {
    pub scale: u64,
    pub terms: Vec<(RootOfUnity, u64)>,
}

impl FormalSum {
    fn from_values(scale: u64, values: &[CharacterValue]) -> Self {
        let mut counts: BTreeMap<RootOfUnity, u64> = BTreeMap::new();
        for z in values.iter().filter_map(|v| v.root()) {
            *counts.entry(z).or_default() += 1;
        }
        FormalSum { scale, terms: counts.into_iter().collect() }
    }
}

/// One `η(β, γ)` for one character pair.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EtaResult {
    pub stratum: Stratum,
    pub chi1: DirichletCharacter,
    pub chi2: DirichletCharacter,
    pub summands: Vec<CharacterValue>,
    pub value: FormalSum,
    pub nonzero_count: u64,
}

impl EtaResult {
    /// `(all nonzero summands equal, their common value)`.
    pub fn constancy(&self) -> (bool, Option<RootOfUnity>) {
        all_nonzero_equal(&self.summands)
    }

    /// Exact test of `|Σ summands| = nonzero_count`.
    pub fn has_maximal_modulus(&self) -> bool {
        let roots: Vec<RootOfUnity> = self.summands.iter().filter_map(|v| v.root()).collect();
        abs_squared_equals(&roots, (self.nonzero_count * self.nonzero_count) as i64)
    }
}

/// `η(β, γ)` with `χ₁` on the numerator and `χ₂` on the denominator; both
/// characters must have modulus `ℓ^α`.
pub fn compute_eta(
    c: &FamilyConstraints,
    s: &Stratum,
    chi1: &DirichletCharacter,
    chi2: &DirichletCharacter,
) -> Result<EtaResult, EtaError> {
    let q = s.modulus();
    if chi1.modulus() != q || chi2.modulus() != q {
        return Err(EtaError::ModulusMismatch { expected: q, got: (chi1.modulus(), chi2.modulus()) });
    }
    let args = stratum_arguments(c, s)
        .filter(|_| stratum_possible(c, s))
        .ok_or(EtaError::StratumEmpty { prime: s.prime, beta: s.beta, gamma: s.gamma })?;
    let summands: Vec<CharacterValue> = args.iter().map(|&(x, y)| chi1.evaluate(x) * chi2.evaluate(y)).collect();
    let nonzero_count = summands.iter().filter(|v| !v.is_zero()).count() as u64;
    Ok(EtaResult {
        stratum: *s,
        chi1: chi1.clone(),
        chi2: chi2.clone(),
        value: FormalSum::from_values(q, &summands),
        summands,
        nonzero_count,
    })
}

/// Whether every nonzero value is the same root of unity, and which one.
pub fn all_nonzero_equal(values: &[CharacterValue]) -> (bool, Option<RootOfUnity>) {
    let mut common = None;
    for z in values.iter().filter_map(|v| v.root()) {
        match common {
            None => common = Some(z),
            Some(w) if w != z => return (false, None),
            _ => {}
        }
    }
    (true, common)
}

/// A character pair passing the local filter, with the constant it takes in
/// each stratum that has nonzero summands.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalCandidate {
    pub chi1: DirichletCharacter,
    pub chi2: DirichletCharacter,
    pub constants: Vec<(Stratum, RootOfUnity)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalCandidateSet {
    pub prime: u64,
    /// Exponents of `ℓ` in the moduli of `χ₁` and `χ₂`.
    pub exponents: (u32, u32),
    pub mode: Mode,
    pub strata: Vec<Stratum>,
    pub survivors: Vec<LocalCandidate>,
}

impl LocalCandidateSet {
    pub fn modulus(&self) -> u64 {
        self.prime.pow(self.exponents.0.max(self.exponents.1))
    }

    pub fn contains(&self, chi1: &DirichletCharacter, chi2: &DirichletCharacter) -> bool {
        self.survivors.iter().any(|s| &s.chi1 == chi1 && &s.chi2 == chi2)
    }
}

/// Filter character pairs modulo `ℓ^α` (single mode: `(χ, χ̄)`).
pub fn local_candidates(c: &FamilyConstraints, prime: u64, alpha: u32, mode: Mode) -> LocalCandidateSet {
    local_candidates_with(c, prime, (alpha, alpha), mode, None)
}

/// The general filter: `χ₁` runs over characters mod `ℓ^{α₁}`, `χ₂` over
/// characters mod `ℓ^{α₂}`, both evaluated at the working modulus
/// `ℓ^{max(α₁,α₂)}`. A pair survives when in every nonempty stratum its
/// nonzero summands are equal and as many as the principal pair's.
pub fn local_candidates_with(
    c: &FamilyConstraints,
    prime: u64,
    exponents: (u32, u32),
    mode: Mode,
    cap: Option<u32>,
) -> LocalCandidateSet {
    let alpha = exponents.0.max(exponents.1);
    let q = prime.pow(alpha);
    let strata = enumerate_strata(c, prime, alpha, cap);
    let args: Vec<(Stratum, Vec<(i128, i128)>)> =
        strata.iter().filter_map(|s| stratum_arguments(c, s).map(|a| (*s, a))).collect();

    let pairs: Vec<(DirichletCharacter, DirichletCharacter)> = match mode {
        Mode::Single => enumerate_characters(q).into_iter().map(|x| {
            let y = x.conj();
            (x, y)
        }).collect(),
        Mode::Simultaneous => {
            let first = enumerate_characters(prime.pow(exponents.0));
            let second = enumerate_characters(prime.pow(exponents.1));
            first.iter().flat_map(|x| second.iter().map(move |y| (x.clone(), y.clone()))).collect()
        }
    };

    let principal_counts: Vec<usize> = args
        .iter()
        .map(|(_, a)| a.iter().filter(|&&(x, y)| x.gcd(&(prime as i128)) == 1 && y.gcd(&(prime as i128)) == 1).count())
        .collect();

    let survivors: Vec<LocalCandidate> = pairs
        .par_iter()
        .filter_map(|(x, y)| {
            let wx = x.transfer(q).expect("conductor divides the working modulus");
            let wy = y.transfer(q).expect("conductor divides the working modulus");
            let mut constants = Vec::new();
            for ((s, a), &expected) in args.iter().zip(&principal_counts) {
                let values: Vec<CharacterValue> = a.iter().map(|&(u, v)| wx.evaluate(u) * wy.evaluate(v)).collect();
                let nonzero = values.iter().filter(|v| !v.is_zero()).count();
                match all_nonzero_equal(&values) {
                    (true, common) if nonzero == expected => {
                        if let Some(z) = common {
                            constants.push((*s, z));
                        }
                    }
                    _ => return None,
                }
            }
            Some(LocalCandidate { chi1: x.clone(), chi2: y.clone(), constants })
        })
        .collect();

    LocalCandidateSet { prime, exponents, mode, strata, survivors }
}

/// One row of the `eta` report.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EtaRow {
    pub beta: u32,
    pub gamma: u32,
    pub chi1_index: u64,
    pub chi2_index: u64,
    pub nonzero_count: u64,
    pub all_equal: bool,
    pub constant: Option<RootOfUnity>,
}

/// Every `η(β, γ)` for every character (pair) modulo `ℓ^α`.
pub fn eta_table(c: &FamilyConstraints, prime: u64, alpha: u32, mode: Mode, cap: Option<u32>) -> Vec<EtaRow> {
    let q = prime.pow(alpha);
    let chars = enumerate_characters(q);
    let pairs: Vec<(&DirichletCharacter, DirichletCharacter)> = match mode {
        Mode::Single => chars.iter().map(|x| (x, x.conj())).collect(),
        Mode::Simultaneous => chars.iter().flat_map(|x| chars.iter().map(move |y| (x, y.clone()))).collect(),
    };
    let mut rows = Vec::new();
    for s in enumerate_strata(c, prime, alpha, cap) {
        for (x, y) in &pairs {
            let r = compute_eta(c, &s, x, y).expect("enumerated strata are nonempty");
            let (all_equal, constant) = r.constancy();
            rows.push(EtaRow {
                beta: s.beta,
                gamma: s.gamma,
                chi1_index: x.index(),
                chi2_index: y.index(),
                nonzero_count: r.nonzero_count,
                all_equal,
                constant,
            });
        }
    }
    rows
}

/// Outcome of the constancy scan for one primitive character.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstancyReport {
    pub character: DirichletCharacter,
    /// First admissible `k` when the character is constant on the family.
    pub k0: Option<u64>,
}

fn cached_primitive_characters(d: u64) -> Arc<Vec<DirichletCharacter>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Arc<Vec<DirichletCharacter>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(v) = cache.lock().unwrap().get(&d) {
        return Arc::clone(v);
    }
    let v = Arc::new(primitive_characters(d));
    cache.lock().unwrap().insert(d, Arc::clone(&v));
    v
}

/// For each primitive `χ (mod D)`, whether `χ((u₁k+v₁)/(u₂k+v₂))` takes one
/// value over all `k (mod D)` with both entries coprime to `D`.
pub fn lemma6_scan(quadruple: (i64, i64, i64, i64), d: u64) -> Result<Vec<ConstancyReport>, EtaError> {
    let (u1, v1, u2, v2) = quadruple;
    if u1 < 0 || u2 < 0 || u1.gcd(&v1) != 1 || u2.gcd(&v2) != 1 || u1 * v2 - u2 * v1 == 0 {
        return Err(EtaError::DegenerateQuadruple);
    }
    let m = d as i128;
    let mut ratios = BTreeSet::new();
    let mut k0 = None;
    for k in 0..m {
        let x = u1 as i128 * k + v1 as i128;
        let y = u2 as i128 * k + v2 as i128;
        if x.gcd(&m) == 1 && y.gcd(&m) == 1 {
            let inv = crate::arith::mod_inv(y, d).expect("coprime to D") as i128;
            ratios.insert((x.rem_euclid(m) * inv).rem_euclid(m));
            k0.get_or_insert(k as u64);
        }
    }
    let quotients: Vec<i128> = match ratios.iter().next() {
        Some(&r0) => {
            let inv = crate::arith::mod_inv(r0, d).expect("unit") as i128;
            ratios.iter().map(|&r| r * inv % m).collect()
        }
        None => Vec::new(),
    };
    Ok(cached_primitive_characters(d)
        .iter()
        .map(|chi| {
            let constant = k0.is_some() && quotients.iter().all(|&r| chi.evaluate_unit(r).is_one());
            ConstancyReport { character: chi.clone(), k0: if constant { k0 } else { None } }
        })
        .collect())
}

/// A non-principal primitive constancy witness found by [`lemma6_property_scan`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lemma6Witness {
    pub quadruple: (i64, i64, i64, i64),
    pub modulus: u64,
    pub character: DirichletCharacter,
    /// `D | 6|Δ₁|`.
    pub divides_six_delta: bool,
    /// `p^t | Δ₁` for `p >= 5`, `p^{t-1} | Δ₁` for `p ∈ {2, 3}`.
    pub local_form_holds: bool,
}

/// Scan seeded random coprime quadruples with entries in `[-bound, bound]`
/// (`u_j >= 1`) against every prime-power modulus up to `max_modulus`,
/// returning every non-principal witness found.
pub fn lemma6_property_scan(seed: u64, count: usize, bound: i64, max_modulus: u64) -> Vec<Lemma6Witness> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut quads = Vec::with_capacity(count);
    while quads.len() < count {
        let q = (rng.gen_range(1..=bound), rng.gen_range(-bound..=bound), rng.gen_range(1..=bound), rng.gen_range(-bound..=bound));
        if q.0.gcd(&q.1) == 1 && q.2.gcd(&q.3) == 1 && q.0 * q.3 - q.2 * q.1 != 0 {
            quads.push(q);
        }
    }
    let moduli: Vec<(u64, u64, u32)> = crate::arith::primes_up_to(max_modulus)
        .into_iter()
        .flat_map(|p| (1..).map(move |t| (p, t)).take_while(move |&(p, t)| p.pow(t) <= max_modulus).map(|(p, t)| (p.pow(t), p, t)))
        .collect();
    quads
        .par_iter()
        .flat_map_iter(|&quad| {
            let delta1 = (quad.0 * quad.3 - quad.2 * quad.1).unsigned_abs();
            moduli.iter().flat_map(move |&(d, p, t)| {
                lemma6_scan(quad, d)
                    .expect("quadruple is valid")
                    .into_iter()
                    .filter(|r| r.k0.is_some() && !r.character.is_principal())
                    .map(move |r| {
                        let local = if p >= 5 { p.pow(t) } else { p.pow(t - 1) };
                        Lemma6Witness {
                            quadruple: quad,
                            modulus: d,
                            character: r.character,
                            divides_six_delta: (6 * delta1) % d == 0,
                            local_form_holds: delta1 % local == 0,
                        }
                    })
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::FractionFamily;

    fn constraints(a: i64, b: i64, big_a: i64, big_b: i64) -> FamilyConstraints {
        FractionFamily::new(a, b, big_a, big_b).unwrap().constraints()
    }

    fn has(strata: &[Stratum], beta: u32, gamma: u32) -> bool {
        strata.iter().any(|s| s.beta == beta && s.gamma == gamma)
    }

    #[test]
    fn strata_examples() {
        let c = constraints(5, 1, 5, -1);
        assert!(has(&enumerate_strata(&c, 3, 1, None), 0, 1));
        assert!(has(&enumerate_strata(&c, 2, 2, None), 1, 3));
        let at5 = enumerate_strata(&c, 5, 2, None);
        assert_eq!(at5.len(), 1);
        assert!(has(&at5, 0, 0));
    }

    #[test]
    fn eta_examples() {
        let c = constraints(5, 1, 5, -1);
        let s = Stratum { prime: 5, local_exponent: 2, beta: 0, gamma: 0 };
        let p = DirichletCharacter::principal(25);
        let r = compute_eta(&c, &s, &p, &p).unwrap();
        assert_eq!(r.summands.len(), 25);
        assert_eq!(r.constancy(), (true, Some(RootOfUnity::ONE)));
        assert_eq!(r.value, FormalSum { scale: 25, terms: vec![(RootOfUnity::ONE, 25)] });

        let w = DirichletCharacter::new(25, vec![1]).unwrap();
        for u in 0..20 {
            for v in 0..20 {
                let r = compute_eta(&c, &s, &w.pow(u), &w.pow(v)).unwrap();
                assert_eq!(r.constancy().0, (u - v) % 5 == 0, "u = {u}, v = {v}");
                assert_eq!(r.has_maximal_modulus(), r.constancy().0);
            }
        }

        let s3 = Stratum { prime: 3, local_exponent: 1, beta: 0, gamma: 1 };
        let quad = DirichletCharacter::new(3, vec![1]).unwrap();
        let r = compute_eta(&c, &s3, &DirichletCharacter::principal(3), &quad).unwrap();
        let distinct: BTreeSet<_> = r.summands.iter().filter_map(|v| v.root()).collect();
        assert!(distinct.len() > 1);

        let empty = Stratum { prime: 5, local_exponent: 2, beta: 1, gamma: 0 };
        assert!(matches!(compute_eta(&c, &empty, &p, &p), Err(EtaError::StratumEmpty { .. })));
    }

    #[test]
    fn all_nonzero_equal_examples() {
        use CharacterValue::{Unit, Zero};
        let one = RootOfUnity::ONE;
        let i = RootOfUnity::new(1, 4);
        assert_eq!(all_nonzero_equal(&[Unit(one), Unit(one), Zero, Unit(one)]), (true, Some(one)));
        assert!(!all_nonzero_equal(&[Unit(one), Unit(i)]).0);
        assert_eq!(all_nonzero_equal(&[]), (true, None));
    }

    #[test]
    fn local_candidates_for_five_n_pm_one() {
        let c = constraints(5, 1, 5, -1);
        let principal_only = |l: u64, a: u32| {
            let set = local_candidates(&c, l, a, Mode::Simultaneous);
            set.survivors.len() == 1 && set.survivors[0].chi1.is_principal() && set.survivors[0].chi2.is_principal()
        };
        assert!(principal_only(3, 1));
        assert!(principal_only(2, 2));
        let set = local_candidates(&c, 5, 2, Mode::Simultaneous);
        assert_eq!(set.survivors.len(), 80);
        let w = DirichletCharacter::new(25, vec![1]).unwrap();
        for u in 0..20 {
            for v in 0..20 {
                assert_eq!(set.contains(&w.pow(u), &w.pow(v)), (u - v) % 5 == 0);
            }
        }
    }

    #[test]
    fn lemma6_examples() {
        for r in lemma6_scan((1, 0, 0, 1), 5).unwrap() {
            assert_eq!(r.k0.is_some(), r.character.is_principal());
        }
        let r = lemma6_scan((1, 1, 1, -1), 8).unwrap();
        assert_eq!(r.len(), 2);
        assert!(r.iter().all(|x| x.k0.is_none()));
        // Only k ≡ 0 (mod 3) is admissible, so every character mod 3 is constant.
        let r = lemma6_scan((5, 1, 5, -1), 3).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].k0, Some(0));
        assert!(lemma6_scan((2, 4, 1, 1), 5).is_err());
    }
}
