//! Integer lattice membership: is the target an integer combination of the
//! generator rows? The echelon form is triangular like a Hermite form but
//! built sparsely, so the transform never goes dense.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{FinderError, GeneratorBasis};
use crate::membership::Target;

/// Sparse integer vector, indices increasing, entries nonzero.
type Sparse = Vec<(usize, BigInt)>;

/// `a + k·b`.
fn axpy(a: &Sparse, k: &BigInt, b: &Sparse) -> Sparse {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let take_a = j == b.len() || (i < a.len() && a[i].0 < b[j].0);
        let take_b = i == a.len() || (j < b.len() && b[j].0 < a[i].0);
        if take_a {
            out.push(a[i].clone());
            i += 1;
        } else if take_b {
            out.push((b[j].0, k * &b[j].1));
            j += 1;
        } else {
            let v = &a[i].1 + k * &b[j].1;
            if !v.is_zero() {
                out.push((a[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

fn entry(v: &Sparse, c: usize) -> Option<&BigInt> {
    v.binary_search_by_key(&c, |e| e.0).ok().map(|i| &v[i].1)
}

/// A working row: its current value and the combination of original rows
/// that produces it.
struct Work {
    value: Sparse,
    combo: Sparse,
}

/// Echelon form by sparse integer elimination. Columns are processed in the
/// given order; within a column the row with the smallest entry is the
/// pivot and the others are reduced against it, Euclid style, until one row
/// is left. Returns `(column, pivot row)` in processing order.
fn echelon(mut pool: Vec<Work>, order: &[usize], columns: usize) -> Vec<(usize, Work)> {
    let mut incidence: Vec<std::collections::BTreeSet<usize>> = vec![Default::default(); columns];
    for (i, w) in pool.iter().enumerate() {
        for (c, _) in &w.value {
            incidence[*c].insert(i);
        }
    }
    let mut alive = vec![true; pool.len()];
    let mut pivots = Vec::new();
    for &col in order {
        loop {
            let members: Vec<usize> = incidence[col].iter().copied().filter(|&i| alive[i]).collect();
            if members.is_empty() {
                break;
            }
            let p = *members
                .iter()
                .min_by(|&&a, &&b| {
                    let (ea, eb) = (entry(&pool[a].value, col).unwrap().abs(), entry(&pool[b].value, col).unwrap().abs());
                    ea.cmp(&eb).then(pool[a].value.len().cmp(&pool[b].value.len())).then(a.cmp(&b))
                })
                .expect("nonempty");
            if members.len() == 1 {
                alive[p] = false;
                let w = std::mem::replace(&mut pool[p], Work { value: Vec::new(), combo: Vec::new() });
                for (c, _) in &w.value {
                    incidence[*c].remove(&p);
                }
                pivots.push((col, w));
                break;
            }
            let pv = entry(&pool[p].value, col).unwrap().clone();
            let (pval, pcombo) = (pool[p].value.clone(), pool[p].combo.clone());
            for &j in members.iter().filter(|&&j| j != p) {
                let q = -entry(&pool[j].value, col).unwrap().div_floor(&pv);
                let q = if q.is_zero() { continue } else { q };
                for (c, _) in &pool[j].value {
                    incidence[*c].remove(&j);
                }
                pool[j].value = axpy(&pool[j].value, &q, &pval);
                pool[j].combo = axpy(&pool[j].combo, &q, &pcombo);
                for (c, _) in &pool[j].value {
                    incidence[*c].insert(j);
                }
                if pool[j].value.is_empty() {
                    alive[j] = false;
                }
            }
        }
    }
    pivots
}

/// Integer coefficients `x` with `Σ x_n · row_n = target`, or `None` if the
/// target is outside the row lattice. Columns met by a single row are
/// solved directly; the rest go through sparse echelon elimination.
pub fn hnf_solve(basis: &GeneratorBasis, target: &Target) -> Result<Option<Vec<BigInt>>, FinderError> {
    let Some(t) = basis.target_vector(target)? else {
        return Ok(None);
    };
    let mut residual: BTreeMap<usize, BigInt> = t.into_iter().map(|(c, e)| (c, BigInt::from(e))).collect();
    let mut x = vec![BigInt::zero(); basis.rows.len()];
    let mut active: Vec<bool> = vec![true; basis.rows.len()];
    let mut incidence: Vec<Vec<usize>> = vec![Vec::new(); basis.columns.len()];
    for (i, r) in basis.rows.iter().enumerate() {
        for &(c, _) in &r.entries {
            incidence[c].push(i);
        }
    }
    let mut live: Vec<usize> = incidence.iter().map(Vec::len).collect();

    // Singleton cascade.
    let mut queue: Vec<usize> = (0..basis.columns.len()).filter(|&c| live[c] == 1).collect();
    while let Some(c) = queue.pop() {
        if live[c] != 1 {
            continue;
        }
        let i = *incidence[c].iter().find(|&&i| active[i]).expect("one live row");
        let row = &basis.rows[i];
        let need = residual.get(&c).cloned().unwrap_or_default();
        let coef = BigInt::from(row.get(c));
        if !need.is_multiple_of(&coef) {
            return Ok(None);
        }
        let xi = &need / &coef;
        for &(cc, e) in &row.entries {
            let r = residual.entry(cc).or_default();
            *r -= &xi * e;
            live[cc] -= 1;
            if live[cc] == 1 {
                queue.push(cc);
            }
        }
        x[i] = xi;
        active[i] = false;
    }
    // Columns with no remaining rows must already be balanced.
    if residual.iter().any(|(&c, v)| live[c] == 0 && !v.is_zero()) {
        return Ok(None);
    }

    let rest: Vec<usize> = (0..basis.rows.len()).filter(|&i| active[i]).collect();
    let pool: Vec<Work> = rest
        .iter()
        .map(|&i| Work {
            value: basis.rows[i].entries.iter().map(|&(c, e)| (c, BigInt::from(e))).collect(),
            combo: vec![(i, BigInt::one())],
        })
        .collect();
    // Large primes first: their columns are sparse with unit entries.
    let mut order: Vec<usize> = (0..basis.columns.len()).filter(|&c| live[c] > 0).collect();
    order.sort_by_key(|&c| (std::cmp::Reverse(basis.columns[c].1), basis.columns[c].0));
    let pivots = echelon(pool, &order, basis.columns.len());
    let mut t: Sparse = residual.into_iter().filter(|(_, v)| !v.is_zero()).collect();
    for (col, w) in &pivots {
        let Some(tc) = entry(&t, *col).cloned() else {
            continue;
        };
        let pc = entry(&w.value, *col).expect("pivot entry");
        if !tc.is_multiple_of(pc) {
            return Ok(None);
        }
        let y = &tc / pc;
        t = axpy(&t, &-&y, &w.value);
        for (i, k) in &w.combo {
            x[*i] += &y * k;
        }
    }
    if !t.is_empty() {
        return Ok(None);
    }
    Ok(Some(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{FractionFamily, Mode};
    use crate::finder::build_basis;
    use crate::rational::PositiveRational;

    fn recombine(basis: &GeneratorBasis, x: &[BigInt]) -> BTreeMap<usize, BigInt> {
        let mut out = BTreeMap::new();
        for (r, xi) in basis.rows.iter().zip(x) {
            for &(c, e) in &r.entries {
                *out.entry(c).or_insert_with(BigInt::zero) += xi * e;
            }
        }
        out.retain(|_, v| !v.is_zero());
        out
    }

    fn pair(a: u64, b: u64) -> Target {
        Target::Pair(PositiveRational::integer(a), PositiveRational::integer(b))
    }

    #[test]
    fn hnf_examples() {
        let f = FractionFamily::new(5, 1, 5, -1).unwrap();
        let basis = build_basis(&f, Mode::Simultaneous, 40, 1000).unwrap();
        let x = hnf_solve(&basis, &pair(11, 9)).unwrap().unwrap();
        let nz: Vec<_> = x.iter().enumerate().filter(|(_, v)| !v.is_zero()).collect();
        assert_eq!(nz.len(), 1);
        assert_eq!(basis.rows[nz[0].0].n, 2);
        assert_eq!(*nz[0].1, BigInt::one());
        let x = hnf_solve(&basis, &pair(1, 1)).unwrap().unwrap();
        assert!(x.iter().all(Zero::is_zero));

        let f = f.with_n0(10).unwrap();
        let basis = build_basis(&f, Mode::Simultaneous, 200, 1000).unwrap();
        let x = hnf_solve(&basis, &pair(26, 26)).unwrap().expect("26 ⊗ 26 lies in the lattice");
        let t: BTreeMap<usize, BigInt> = basis
            .target_vector(&pair(26, 26))
            .unwrap()
            .unwrap()
            .into_iter()
            .map(|(c, e)| (c, BigInt::from(e)))
            .collect();
        assert_eq!(recombine(&basis, &x), t);
        assert_eq!(hnf_solve(&basis, &pair(5, 1)).unwrap(), None);
    }

    #[test]
    fn default_scale_stays_small() {
        let f = FractionFamily::new(5, 1, 5, -1).unwrap().with_n0(10).unwrap();
        let basis = build_basis(&f, Mode::Simultaneous, crate::finder::DEFAULT_NMAX, crate::finder::DEFAULT_PRIME_BOUND).unwrap();
        let x = hnf_solve(&basis, &pair(26, 26)).unwrap().expect("in the lattice");
        assert!(x.iter().all(|v| v.bits() < 64));
        assert_eq!(hnf_solve(&basis, &pair(2, 2)).unwrap(), None);
    }
}
