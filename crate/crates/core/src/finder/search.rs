//! Iterative-deepening search for `ε ∈ {-1, 0, 1}^rows` with
//! `Σ ε_n · row_n = target`.
//!
//! At each node the column with a nonzero residual and the fewest rows able
//! to reduce it is chosen; some row must move that column toward zero, so
//! the node branches on which row is the first (in canonical order) to do
//! so. Earlier rows are then barred from that sign, which keeps branches
//! disjoint without losing solutions.

use serde::{Deserialize, Serialize};

use super::{FinderError, GeneratorBasis, RepresentationCertificate};
use crate::membership::Target;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchOptions {
    pub max_terms: usize,
    /// Total nodes over all deepening rounds.
    pub node_budget: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { max_terms: super::DEFAULT_MAX_TERMS, node_budget: 50_000_000 }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    pub nodes: u64,
    pub depth_reached: usize,
}

const BAN_PLUS: u8 = 1;
const BAN_MINUS: u8 = 2;

fn ban_bit(sign: i64) -> u8 {
    if sign > 0 {
        BAN_PLUS
    } else {
        BAN_MINUS
    }
}

/// Columns with nonzero residual, with O(1) insert and remove.
struct ActiveSet {
    items: Vec<usize>,
    position: Vec<usize>,
}

impl ActiveSet {
    fn new(n: usize) -> Self {
        ActiveSet { items: Vec::new(), position: vec![usize::MAX; n] }
    }

    fn insert(&mut self, c: usize) {
        if self.position[c] == usize::MAX {
            self.position[c] = self.items.len();
            self.items.push(c);
        }
    }

    fn remove(&mut self, c: usize) {
        let p = self.position[c];
        if p != usize::MAX {
            let last = self.items.pop().expect("nonempty");
            if last != c {
                self.items[p] = last;
                self.position[last] = p;
            }
            self.position[c] = usize::MAX;
        }
    }
}

struct Searcher<'a> {
    basis: &'a GeneratorBasis,
    /// Rows per column in canonical order: `(row, exponent)`.
    incidence: Vec<Vec<(usize, i64)>>,
    residual: Vec<i64>,
    active: ActiveSet,
    value: Vec<i8>,
    bans: Vec<u8>,
    /// Sum of `|e|` over unused rows that may still push the column up / down.
    cap_up: Vec<i64>,
    cap_down: Vec<i64>,
    count_up: Vec<u32>,
    count_down: Vec<u32>,
    max_support: usize,
    nodes: u64,
    budget: u64,
}

impl<'a> Searcher<'a> {
    fn new(basis: &'a GeneratorBasis, target: &[(usize, i64)], budget: u64) -> Self {
        let k = basis.columns.len();
        let mut order: Vec<usize> = (0..basis.rows.len()).collect();
        order.sort_by_key(|&i| (basis.rows[i].largest_prime(&basis.columns), basis.rows[i].n));
        let mut incidence = vec![Vec::new(); k];
        for &i in &order {
            for &(c, e) in &basis.rows[i].entries {
                incidence[c].push((i, e));
            }
        }
        let mut s = Searcher {
            basis,
            incidence,
            residual: vec![0; k],
            active: ActiveSet::new(k),
            value: vec![0; basis.rows.len()],
            bans: vec![0; basis.rows.len()],
            cap_up: vec![0; k],
            cap_down: vec![0; k],
            count_up: vec![0; k],
            count_down: vec![0; k],
            max_support: basis.rows.iter().map(|r| r.entries.len()).max().unwrap_or(1).max(1),
            nodes: 0,
            budget,
        };
        for &(c, e) in target {
            s.residual[c] = e;
            s.active.insert(c);
        }
        for r in &basis.rows {
            for &(c, e) in &r.entries {
                s.cap_up[c] += e.abs();
                s.cap_down[c] += e.abs();
                s.count_up[c] += 1;
                s.count_down[c] += 1;
            }
        }
        s
    }

    /// Capacity bookkeeping when row `i` may no longer take sign `sign`.
    fn withdraw(&mut self, i: usize, sign: i64, delta: i64) {
        for &(c, e) in &self.basis.rows[i].entries {
            // With ε = sign the row moves column c by sign·e.
            if sign * e > 0 {
                self.cap_up[c] -= delta * e.abs();
                self.count_up[c] = (self.count_up[c] as i64 - delta) as u32;
            } else {
                self.cap_down[c] -= delta * e.abs();
                self.count_down[c] = (self.count_down[c] as i64 - delta) as u32;
            }
        }
    }

    fn allowed(&self, i: usize, sign: i64) -> bool {
        self.value[i] == 0 && self.bans[i] & ban_bit(sign) == 0
    }

    fn ban(&mut self, i: usize, sign: i64) {
        self.bans[i] |= ban_bit(sign);
        self.withdraw(i, sign, 1);
    }

    fn unban(&mut self, i: usize, sign: i64) {
        self.bans[i] &= !ban_bit(sign);
        self.withdraw(i, sign, -1);
    }

    fn apply(&mut self, i: usize, sign: i64) {
        for s in [1, -1] {
            if self.bans[i] & ban_bit(s) == 0 {
                self.withdraw(i, s, 1);
            }
        }
        self.value[i] = sign as i8;
        for k in 0..self.basis.rows[i].entries.len() {
            let (c, e) = self.basis.rows[i].entries[k];
            self.residual[c] -= sign * e;
            if self.residual[c] == 0 {
                self.active.remove(c);
            } else {
                self.active.insert(c);
            }
        }
    }

    fn revert(&mut self, i: usize, sign: i64) {
        for k in 0..self.basis.rows[i].entries.len() {
            let (c, e) = self.basis.rows[i].entries[k];
            self.residual[c] += sign * e;
            if self.residual[c] == 0 {
                self.active.remove(c);
            } else {
                self.active.insert(c);
            }
        }
        self.value[i] = 0;
        for s in [1, -1] {
            if self.bans[i] & ban_bit(s) == 0 {
                self.withdraw(i, s, -1);
            }
        }
    }

    /// The column to branch on, or `None` if some column cannot be balanced.
    fn choose_column(&self) -> Option<usize> {
        let mut best: Option<(u32, usize)> = None;
        for &c in &self.active.items {
            let r = self.residual[c];
            let (cap, count) = if r > 0 { (self.cap_up[c], self.count_up[c]) } else { (self.cap_down[c], self.count_down[c]) };
            if cap < r.abs() {
                return None;
            }
            if best.is_none_or(|(n, bc)| (count, c) < (n, bc)) {
                best = Some((count, c));
            }
        }
        best.map(|b| b.1)
    }

    fn dfs(&mut self, used: usize, limit: usize) -> Result<bool, ()> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(());
        }
        if self.active.items.is_empty() {
            return Ok(true);
        }
        if used + self.active.items.len().div_ceil(self.max_support) > limit {
            return Ok(false);
        }
        let Some(c) = self.choose_column() else {
            return Ok(false);
        };
        let direction = self.residual[c].signum();
        let mut banned = Vec::new();
        let mut found = false;
        for k in 0..self.incidence[c].len() {
            let (i, e) = self.incidence[c][k];
            // ε_i = sign moves column c by sign·e in the needed direction.
            let sign = direction * e.signum();
            if !self.allowed(i, sign) {
                continue;
            }
            self.apply(i, sign);
            let outcome = self.dfs(used + 1, limit);
            if matches!(outcome, Ok(true)) {
                found = true;
                break;
            }
            self.revert(i, sign);
            if outcome.is_err() {
                for (j, s) in banned {
                    self.unban(j, s);
                }
                return Err(());
            }
            self.ban(i, sign);
            banned.push((i, sign));
        }
        for (j, s) in banned {
            self.unban(j, s);
        }
        Ok(found)
    }
}

/// Search for a representation of `target` with at most `max_terms` terms.
/// The result is the first certificate in the canonical search order, so it
/// is reproducible.
pub fn bounded_search(
    basis: &GeneratorBasis,
    target: &Target,
    options: SearchOptions,
) -> Result<(RepresentationCertificate, SearchStats), FinderError> {
    let exhausted = |nodes| FinderError::SearchExhausted { max_terms: options.max_terms, nodes };
    let Some(t) = basis.target_vector(target)? else {
        return Err(exhausted(0));
    };
    let mut searcher = Searcher::new(basis, &t, options.node_budget);
    for limit in 0..=options.max_terms {
        match searcher.dfs(0, limit) {
            Ok(true) => {
                let terms: Vec<(i64, i8)> = basis
                    .rows
                    .iter()
                    .zip(&searcher.value)
                    .filter(|(_, &v)| v != 0)
                    .map(|(r, &v)| (r.n, v))
                    .collect();
                let cert = RepresentationCertificate {
                    family: basis.family,
                    mode: basis.mode,
                    n0: basis.n0,
                    terms,
                    target: *target,
                };
                return Ok((cert, SearchStats { nodes: searcher.nodes, depth_reached: limit }));
            }
            Ok(false) => log::debug!("no representation with {limit} terms after {} nodes", searcher.nodes),
            Err(()) => return Err(exhausted(searcher.nodes)),
        }
    }
    Err(exhausted(searcher.nodes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{FractionFamily, Mode};
    use crate::finder::{build_basis, verify};
    use crate::rational::PositiveRational;

    fn pair(a: u64, b: u64) -> Target {
        Target::Pair(PositiveRational::integer(a), PositiveRational::integer(b))
    }

    #[test]
    fn trivial_targets() {
        let f = FractionFamily::new(5, 1, 5, -1).unwrap();
        let basis = build_basis(&f, Mode::Simultaneous, 50, 200).unwrap();
        let (cert, _) = bounded_search(&basis, &pair(11, 9), SearchOptions::default()).unwrap();
        assert_eq!(cert.terms, vec![(2, 1)]);
        let (cert, _) = bounded_search(&basis, &pair(1, 1), SearchOptions::default()).unwrap();
        assert!(cert.terms.is_empty());
        assert!(matches!(
            bounded_search(&basis, &pair(5, 1), SearchOptions::default()),
            Err(FinderError::SearchExhausted { .. })
        ));
    }

    #[test]
    fn twenty_six_small_scale() {
        let f = FractionFamily::new(5, 1, 5, -1).unwrap().with_n0(10).unwrap();
        let basis = build_basis(&f, Mode::Simultaneous, 5000, 200).unwrap();
        let (cert, _) = bounded_search(&basis, &pair(26, 26), SearchOptions::default()).unwrap();
        assert!(verify(&cert, &f, &pair(26, 26)));
        assert!(cert.terms.iter().all(|&(n, e)| n > 10 && e.abs() == 1));
    }
}
