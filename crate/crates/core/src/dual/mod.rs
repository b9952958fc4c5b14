//! Assembly of the dual group from local candidates: CRT combination,
//! constancy over a full period, and pinning of the values at primes
//! dividing the character moduli.

mod relations;

use std::collections::{BTreeMap, BTreeSet, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use relations::RelationSystem;

use crate::arith::{factorize, lcm, valuation, ArithError, RootOfUnity};
use crate::characters::{CharacterValue, DirichletCharacter};
use crate::eta::{local_candidates_with, LocalCandidate};
use crate::family::{modulus_bounds, refine_prime_support, FamilyError, FractionFamily, Mode, ModulusBounds};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DualError {
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "status", content = "value")]
pub enum PrimeStatus {
    Pinned(RootOfUnity),
    Undetermined,
}

/// The value of one coordinate of a dual element at a prime dividing that
/// coordinate's modulus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BadPrimeValue {
    /// 1 or 2.
    pub coordinate: u8,
    pub prime: u64,
    pub status: PrimeStatus,
}

/// One character of the quotient. Off the bad primes, coordinate `j` agrees
/// with the Dirichlet character `χ_gj`; in single mode the second
/// coordinate is the conjugate of the first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DualCharacter {
    pub mode: Mode,
    pub chi_g1: DirichletCharacter,
    pub chi_g2: Option<DirichletCharacter>,
    /// Common value of `χ_g1(an+b)·χ_g2(An+B)` over `n` with both arguments
    /// coprime to the moduli; `None` when there is no such `n`.
    pub constant: Option<RootOfUnity>,
    pub bad_primes: Vec<BadPrimeValue>,
}

impl DualCharacter {
    /// Dirichlet character of the given coordinate (1 or 2).
    pub fn character(&self, coordinate: u8) -> DirichletCharacter {
        match (coordinate, &self.chi_g2) {
            (1, _) => self.chi_g1.clone(),
            (_, Some(c)) => c.clone(),
            (_, None) => self.chi_g1.conj(),
        }
    }

    fn lookup(&self, coordinate: u8, p: u64) -> Option<PrimeStatus> {
        self.bad_primes.iter().find(|b| b.coordinate == coordinate && b.prime == p).map(|b| b.status)
    }

    /// Value at a prime, or `None` if the prime is bad and unpinned. In
    /// single mode only coordinate 1 is stored.
    pub fn value_at_prime(&self, coordinate: u8, p: u64) -> Option<RootOfUnity> {
        if self.mode == Mode::Single && coordinate == 2 {
            return self.value_at_prime(1, p).map(RootOfUnity::conj);
        }
        match self.lookup(coordinate, p) {
            Some(PrimeStatus::Pinned(z)) => Some(z),
            Some(PrimeStatus::Undetermined) => None,
            None => self.character(coordinate).evaluate(p as i128).root(),
        }
    }

    pub fn is_principal(&self) -> bool {
        self.chi_g1.is_principal()
            && self.chi_g2.as_ref().is_none_or(DirichletCharacter::is_principal)
            && self.bad_primes.iter().all(|b| !matches!(b.status, PrimeStatus::Pinned(z) if !z.is_one()))
    }

    /// Order in the dual group (pinned values only).
    pub fn order(&self) -> u64 {
        let mut o = lcm(self.chi_g1.order(), self.chi_g2.as_ref().map_or(1, |c| c.order()));
        for b in &self.bad_primes {
            if let PrimeStatus::Pinned(z) = b.status {
                o = lcm(o, z.order());
            }
        }
        o
    }

    /// Pointwise product; undetermined values stay undetermined.
    pub fn multiply(&self, other: &DualCharacter) -> DualCharacter {
        let chi_g1 = self.chi_g1.try_mul(&other.chi_g1).expect("elements of one group share moduli");
        let chi_g2 = match (&self.chi_g2, &other.chi_g2) {
            (Some(x), Some(y)) => Some(x.try_mul(y).expect("elements of one group share moduli")),
            _ => None,
        };
        let bad_primes = self
            .bad_primes
            .iter()
            .map(|b| {
                let status = match (b.status, other.lookup(b.coordinate, b.prime)) {
                    (PrimeStatus::Pinned(x), Some(PrimeStatus::Pinned(y))) => PrimeStatus::Pinned(x * y),
                    _ => PrimeStatus::Undetermined,
                };
                BadPrimeValue { status, ..*b }
            })
            .collect();
        let constant = match (self.constant, other.constant) {
            (Some(x), Some(y)) => Some(x * y),
            _ => None,
        };
        DualCharacter { mode: self.mode, chi_g1, chi_g2, constant, bad_primes }
    }

    /// Identity used for closure checks: characters and pinned values.
    fn key(&self) -> (u64, u64, Vec<BadPrimeValue>) {
        (self.chi_g1.index(), self.chi_g2.as_ref().map_or(0, |c| c.index()), self.bad_primes.clone())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DualOptions {
    /// Stratum depth for the local filter; `None` uses the default cap.
    pub stratum_cap: Option<u32>,
    /// Length of the pinning window; `None` uses `10·L·rad(L)` with
    /// `L = lcm(M₁, M₂)`.
    pub pin_window: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalSummary {
    pub prime: u64,
    pub exponents: (u32, u32),
    pub strata: usize,
    pub survivors: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DualGroup {
    pub family: FractionFamily,
    pub mode: Mode,
    /// Refined modulus bounds.
    pub bounds: ModulusBounds,
    /// Moduli `(M₁, M₂)` of the two coordinates.
    pub moduli: (u64, u64),
    pub local: Vec<LocalSummary>,
    /// Number of CRT combinations of local survivors.
    pub combinations: usize,
    /// Combinations failing constancy over a full period.
    pub rejected_by_constancy: usize,
    /// Combinations with no consistent assignment at the bad primes.
    pub rejected_by_pinning: usize,
    /// `n` range `(start, end]` used for pinning.
    pub pin_window: (i64, i64),
    pub elements: Vec<DualCharacter>,
    pub order: usize,
    pub order_histogram: BTreeMap<u64, usize>,
}

impl DualGroup {
    /// Elements with an undetermined bad-prime value.
    pub fn undetermined_primes(&self) -> BTreeSet<(u8, u64)> {
        self.elements
            .iter()
            .flat_map(|e| e.bad_primes.iter())
            .filter(|b| b.status == PrimeStatus::Undetermined)
            .map(|b| (b.coordinate, b.prime))
            .collect()
    }
}

/// One generator value split into its part over the bad primes and the rest.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Relation {
    exponents: Vec<i128>,
    coprime: (u64, u64),
}

/// Deduplicated relations from the generators in a window of `n`.
#[derive(Clone, Debug)]
pub struct RelationWindow {
    mode: Mode,
    columns: Vec<(u8, u64)>,
    relations: Vec<Relation>,
    range: (i64, i64),
}

fn split(value: i128, primes: &[u64]) -> (Vec<u32>, u128) {
    let mut rest = value as u128;
    let exps = primes
        .iter()
        .map(|&p| {
            let v = valuation(rest, p);
            rest /= (p as u128).pow(v);
            v
        })
        .collect();
    (exps, rest)
}

impl RelationWindow {
    pub fn new(f: &FractionFamily, mode: Mode, moduli: (u64, u64), length: u64) -> Result<Self, DualError> {
        let primes1: Vec<u64> = factorize(moduli.0)?.primes().collect();
        let primes2: Vec<u64> = factorize(moduli.1)?.primes().collect();
        let mut columns: Vec<(u8, u64)> = primes1.iter().map(|&p| (1, p)).collect();
        if mode == Mode::Simultaneous {
            columns.extend(primes2.iter().map(|&p| (2u8, p)));
        }
        let start = f.n0;
        let end = f.n0 + length as i64;
        let mut seen = HashSet::new();
        let mut relations = Vec::new();
        for n in start + 1..=end {
            let (e1, m1) = split(f.numerator(n), &primes1);
            let (e2, m2) = split(f.denominator(n), &primes2);
            let mut exponents: Vec<i128> = e1.iter().map(|&e| e as i128).collect();
            match mode {
                Mode::Simultaneous => exponents.extend(e2.iter().map(|&e| e as i128)),
                Mode::Single => {
                    for (x, &e) in exponents.iter_mut().zip(&e2) {
                        *x -= e as i128;
                    }
                }
            }
            let rel = Relation {
                exponents,
                coprime: ((m1 % moduli.0 as u128) as u64, (m2 % moduli.1 as u128) as u64),
            };
            if seen.insert(rel.clone()) {
                relations.push(rel);
            }
        }
        Ok(RelationWindow { mode, columns, relations, range: (start, end) })
    }

    pub fn len(&self) -> usize {
        self.relations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relations.is_empty()
    }

    pub fn range(&self) -> (i64, i64) {
        self.range
    }

    /// Solve for the bad-prime values of a character pair that is constant on
    /// coprime generators. Each finite solution is one element; an empty
    /// result means the pair does not extend to a character of the quotient.
    pub fn pin(&self, chi1: &DirichletCharacter, chi2: &DirichletCharacter, constant: Option<RootOfUnity>) -> Vec<DualCharacter> {
        let mut system = RelationSystem::new(self.columns.len());
        for rel in &self.relations {
            let value = chi1.evaluate(rel.coprime.0 as i128) * chi2.evaluate(rel.coprime.1 as i128);
            let rhs = value.root().expect("coprime parts are units").conj();
            if !system.add(&rel.exponents, rhs) {
                return Vec::new();
            }
        }
        system
            .solutions()
            .into_iter()
            .map(|sol| DualCharacter {
                mode: self.mode,
                chi_g1: chi1.clone(),
                chi_g2: (self.mode == Mode::Simultaneous).then(|| chi2.clone()),
                constant,
                bad_primes: self
                    .columns
                    .iter()
                    .zip(sol)
                    .map(|(&(coordinate, prime), v)| BadPrimeValue {
                        coordinate,
                        prime,
                        status: v.map_or(PrimeStatus::Undetermined, PrimeStatus::Pinned),
                    })
                    .collect(),
            })
            .collect()
    }
}

/// Default pinning window `10·L·rad(L)`.
pub fn default_pin_window(moduli: (u64, u64)) -> u64 {
    let l = lcm(moduli.0, moduli.1);
    let rad: u64 = factorize(l).expect("small modulus").primes().product();
    10 * l * rad
}

/// Moduli of the two coordinates after refinement.
pub fn coordinate_moduli(bounds: &ModulusBounds, mode: Mode) -> (u64, u64) {
    match mode {
        Mode::Single => (bounds.sharp, bounds.sharp),
        Mode::Simultaneous => (bounds.simultaneous_g1, bounds.simultaneous_g2),
    }
}

/// Common value of `χ₁(an+b)·χ₂(An+B)` over one period, skipping zeros.
/// `Err(())` if two values differ.
fn period_constant(
    f: &FractionFamily,
    chi1: &DirichletCharacter,
    chi2: &DirichletCharacter,
    period: u64,
) -> Result<Option<RootOfUnity>, ()> {
    let mut common = None;
    for n in f.n0 + 1..=f.n0 + period as i64 {
        if let CharacterValue::Unit(z) = chi1.evaluate(f.numerator(n)) * chi2.evaluate(f.denominator(n)) {
            match common {
                None => common = Some(z),
                Some(w) if w != z => return Err(()),
                _ => {}
            }
        }
    }
    Ok(common)
}

/// Re-run the candidate pinning for one element against a fresh window.
pub fn pin_bad_primes(d: &DualCharacter, f: &FractionFamily) -> Result<Vec<DualCharacter>, DualError> {
    let moduli = (d.chi_g1.modulus(), d.character(2).modulus());
    let window = RelationWindow::new(f, d.mode, moduli, default_pin_window(moduli))?;
    Ok(window.pin(&d.chi_g1, &d.character(2), d.constant))
}

pub fn assemble_dual(f: &FractionFamily, mode: Mode) -> Result<DualGroup, DualError> {
    assemble_dual_with(f, mode, DualOptions::default())
}

pub fn assemble_dual_with(f: &FractionFamily, mode: Mode, options: DualOptions) -> Result<DualGroup, DualError> {
    f.check_mode(mode)?;
    if f.delta() == 0 {
        return Err(FamilyError::DegenerateFamily.into());
    }
    let c = f.constraints();
    let bounds = refine_prime_support(&c, &modulus_bounds(&c));
    let moduli = coordinate_moduli(&bounds, mode);
    let m1 = factorize(moduli.0)?;
    let m2 = factorize(moduli.1)?;
    let primes: BTreeSet<u64> = m1.primes().chain(m2.primes()).collect();

    let mut local = Vec::new();
    let mut sets: Vec<Vec<LocalCandidate>> = Vec::new();
    for &p in &primes {
        let exps = (m1.valuation(p), m2.valuation(p));
        let set = local_candidates_with(&c, p, exps, mode, options.stratum_cap);
        log::debug!("local candidates at {p}^{exps:?}: {} survivors", set.survivors.len());
        local.push(LocalSummary { prime: p, exponents: exps, strata: set.strata.len(), survivors: set.survivors.len() });
        sets.push(set.survivors);
    }

    // CRT combinations, in canonical order of the local survivors.
    let mut combos: Vec<Vec<&LocalCandidate>> = vec![Vec::new()];
    for set in &sets {
        combos = combos
            .into_iter()
            .flat_map(|prefix| {
                set.iter().map(move |cand| {
                    let mut v = prefix.clone();
                    v.push(cand);
                    v
                })
            })
            .collect();
    }
    let combinations = combos.len();
    let pairs: Vec<(DirichletCharacter, DirichletCharacter)> = combos
        .iter()
        .map(|parts| {
            let x: Vec<DirichletCharacter> = parts.iter().map(|p| p.chi1.clone()).collect();
            let y: Vec<DirichletCharacter> = parts.iter().map(|p| p.chi2.clone()).collect();
            let x = DirichletCharacter::from_components(&x).transfer(moduli.0).expect("components multiply to the modulus");
            let y = DirichletCharacter::from_components(&y).transfer(moduli.1).expect("components multiply to the modulus");
            (x, y)
        })
        .collect();

    let period = lcm(moduli.0, moduli.1);
    let window_len = options.pin_window.unwrap_or_else(|| default_pin_window(moduli));
    let window = RelationWindow::new(f, mode, moduli, window_len)?;
    log::debug!("{} combinations, {} distinct relations", combinations, window.len());

    let outcomes: Vec<(bool, Vec<DualCharacter>)> = pairs
        .par_iter()
        .map(|(x, y)| match period_constant(f, x, y, period) {
            Err(()) => (false, Vec::new()),
            Ok(constant) => (true, window.pin(x, y, constant)),
        })
        .collect();

    let rejected_by_constancy = outcomes.iter().filter(|o| !o.0).count();
    let rejected_by_pinning = outcomes.iter().filter(|o| o.0 && o.1.is_empty()).count();
    let mut elements: Vec<DualCharacter> = outcomes.into_iter().flat_map(|o| o.1).collect();
    elements.sort_by_key(|a| a.key());

    let mut order_histogram = BTreeMap::new();
    for e in &elements {
        *order_histogram.entry(e.order()).or_insert(0) += 1;
    }
    Ok(DualGroup {
        family: *f,
        mode,
        bounds,
        moduli,
        local,
        combinations,
        rejected_by_constancy,
        rejected_by_pinning,
        pin_window: window.range(),
        order: elements.len(),
        elements,
        order_histogram,
    })
}

/// Order, order histogram, a greedily chosen generating set and the
/// invariant factors of the assembled group.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupStructure {
    pub order: usize,
    pub order_histogram: BTreeMap<u64, usize>,
    /// Indices into the element list.
    pub generators: Vec<usize>,
    pub invariant_factors: Vec<u64>,
    pub closed: bool,
}

pub fn group_structure(dg: &DualGroup) -> GroupStructure {
    let index: BTreeMap<_, usize> = dg.elements.iter().enumerate().map(|(i, e)| (e.key(), i)).collect();
    let closed = dg
        .elements
        .par_iter()
        .all(|x| dg.elements.iter().all(|y| index.contains_key(&x.multiply(y).key())));

    // Greedy generators: repeatedly add an element of largest order outside
    // the subgroup generated so far.
    let mut by_order: Vec<usize> = (0..dg.elements.len()).collect();
    by_order.sort_by_key(|&i| (std::cmp::Reverse(dg.elements[i].order()), i));
    let mut generators = Vec::new();
    let mut span: BTreeSet<usize> = dg.elements.iter().position(DualCharacter::is_principal).into_iter().collect();
    if closed {
        for &g in &by_order {
            if span.contains(&g) || span.len() == dg.elements.len() {
                continue;
            }
            generators.push(g);
            let mut frontier: Vec<usize> = span.iter().copied().collect();
            while let Some(i) = frontier.pop() {
                let j = index[&dg.elements[i].multiply(&dg.elements[g]).key()];
                if span.insert(j) {
                    frontier.push(j);
                }
            }
        }
    }

    GroupStructure {
        order: dg.elements.len(),
        order_histogram: dg.order_histogram.clone(),
        generators,
        invariant_factors: if closed { invariant_factors(&dg.order_histogram) } else { Vec::new() },
        closed,
    }
}

/// Invariant factors `d₁ | d₂ | …` of a finite abelian group from the
/// number of elements of each order.
pub fn invariant_factors(histogram: &BTreeMap<u64, usize>) -> Vec<u64> {
    let order: usize = histogram.values().sum();
    if order <= 1 {
        return Vec::new();
    }
    let mut factors: Vec<u64> = Vec::new();
    for (p, _) in factorize(order as u64).expect("small order").factors() {
        let p = *p;
        // s_k = log_p #{x : x^{p^k} = 1}; s_k - s_{k-1} counts cyclic factors of exponent >= k.
        let mut levels = Vec::new();
        let mut prev = 0u32;
        for k in 1.. {
            let pk = p.pow(k);
            let count: usize = histogram.iter().filter(|(&o, _)| pk % o == 0).map(|(_, &c)| c).sum();
            let s = valuation(count as u128, p);
            if s == prev {
                break;
            }
            levels.push(s - prev);
            prev = s;
        }
        // levels[k-1] = number of factors with exponent >= k; list exponents descending.
        let largest = levels.first().copied().unwrap_or(0) as usize;
        let mut exps = vec![0u32; largest];
        for (k, &n) in levels.iter().enumerate() {
            for e in exps.iter_mut().take(n as usize) {
                *e = k as u32 + 1;
            }
        }
        // exps sorted descending; merge into factors aligned from the largest.
        if factors.len() < exps.len() {
            let pad = exps.len() - factors.len();
            let mut grown = vec![1u64; pad];
            grown.extend(factors.iter());
            factors = grown;
        }
        let offset = factors.len() - exps.len();
        for (i, &e) in exps.iter().rev().enumerate() {
            factors[offset + i] *= p.pow(e);
        }
    }
    factors
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn invariant_factor_examples() {
        // C2 × C20: orders from the product of C2 and C4 × C5.
        let mut h = BTreeMap::new();
        for a in [1u64, 2] {
            for b in [1u64, 2, 4, 4] {
                for c in [1u64, 5, 5, 5, 5] {
                    *h.entry(lcm(lcm(a, b), c)).or_insert(0) += 1;
                }
            }
        }
        assert_eq!(invariant_factors(&h), vec![2, 20]);
        let cyclic: BTreeMap<u64, usize> = [(1, 1), (2, 1), (3, 2), (6, 2)].into_iter().collect();
        assert_eq!(invariant_factors(&cyclic), vec![6]);
        assert_eq!(invariant_factors(&[(1u64, 1usize)].into_iter().collect()), Vec::<u64>::new());
    }

    #[test]
    fn five_n_pm_one_pair() {
        let f = FractionFamily::new(5, 1, 5, -1).unwrap();
        let dg = assemble_dual(&f, Mode::Simultaneous).unwrap();
        eprintln!("{:?} {} {} {}", dg.local, dg.combinations, dg.rejected_by_constancy, dg.rejected_by_pinning);
        assert_eq!(dg.order, 40);
        let gs = group_structure(&dg);
        assert!(gs.closed);
        assert_eq!(gs.invariant_factors, vec![2, 20]);
    }

    #[test]
    fn three_n_plus_one_pair() {
        let f = FractionFamily::new(3, 1, 5, 2).unwrap();
        let dg = assemble_dual(&f, Mode::Simultaneous).unwrap();
        eprintln!("{:?} {} {} {}", dg.local, dg.combinations, dg.rejected_by_constancy, dg.rejected_by_pinning);
        for e in &dg.elements { eprintln!("{:?} {:?} {:?}", e.chi_g1, e.chi_g2, e.bad_primes); }
        assert_eq!(dg.order, 2);
    }

    #[test]
    fn trivial_single_mode() {
        let f = FractionFamily::new(1, 0, 1, 1).unwrap();
        let dg = assemble_dual(&f, Mode::Single).unwrap();
        assert_eq!(dg.order, 1);
        assert!(dg.elements[0].is_principal());
    }
}
