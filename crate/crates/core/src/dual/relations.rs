//! Linear systems `Σ v_i x_i = r` over `Q/Z`, with integer coefficients and
//! right-hand sides stored as exact roots of unity.

use num_integer::Integer;

use crate::arith::RootOfUnity;

/// Largest number of solutions enumerated before branching columns are
/// reported as undetermined.
const MAX_SOLUTIONS: usize = 4096;

fn extended_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    let e = a.extended_gcd(&b);
    if e.gcd < 0 {
        (-e.gcd, -e.x, -e.y)
    } else {
        (e.gcd, e.x, e.y)
    }
}

fn combine(r1: RootOfUnity, k1: i128, r2: RootOfUnity, k2: i128) -> RootOfUnity {
    r1.pow(k1) * r2.pow(k2)
}

/// Row echelon form built one relation at a time. Row operations are
/// unimodular, so the solution set never changes.
#[derive(Clone, Debug)]
pub struct RelationSystem {
    columns: usize,
    /// Rows with positive pivots, sorted by pivot column.
    rows: Vec<(usize, Vec<i128>, RootOfUnity)>,
    inconsistent: bool,
}

impl RelationSystem {
    pub fn new(columns: usize) -> Self {
        RelationSystem { columns, rows: Vec::new(), inconsistent: false }
    }

    pub fn is_consistent(&self) -> bool {
        !self.inconsistent
    }

    /// Add `Σ row_i x_i = rhs`; returns false once the system is inconsistent.
    pub fn add(&mut self, row: &[i128], rhs: RootOfUnity) -> bool {
        if self.inconsistent {
            return false;
        }
        debug_assert_eq!(row.len(), self.columns);
        let mut row = row.to_vec();
        let mut rhs = rhs;
        for col in 0..self.columns {
            if row[col] == 0 {
                continue;
            }
            match self.rows.binary_search_by_key(&col, |r| r.0) {
                Err(pos) => {
                    if row[col] < 0 {
                        row.iter_mut().for_each(|x| *x = -*x);
                        rhs = rhs.conj();
                    }
                    self.rows.insert(pos, (col, row, rhs));
                    return true;
                }
                Ok(pos) => {
                    let (_, basis, basis_rhs) = &self.rows[pos];
                    let (p, q) = (basis[col], row[col]);
                    let (g, s, t) = extended_gcd(p, q);
                    let merged: Vec<i128> = basis.iter().zip(&row).map(|(&x, &y)| s * x + t * y).collect();
                    let merged_rhs = combine(*basis_rhs, s, rhs, t);
                    let reduced: Vec<i128> = basis.iter().zip(&row).map(|(&x, &y)| (q / g) * x - (p / g) * y).collect();
                    let reduced_rhs = combine(*basis_rhs, q / g, rhs, -(p / g));
                    self.rows[pos] = (col, merged, merged_rhs);
                    row = reduced;
                    rhs = reduced_rhs;
                }
            }
        }
        if !rhs.is_one() {
            self.inconsistent = true;
        }
        !self.inconsistent
    }

    /// Every solution, with `None` for coordinates not fixed by the
    /// relations (free columns and those depending on them). Empty when
    /// inconsistent.
    pub fn solutions(&self) -> Vec<Vec<Option<RootOfUnity>>> {
        if self.inconsistent {
            return Vec::new();
        }
        let total: usize = self
            .rows
            .iter()
            .try_fold(1usize, |acc, r| acc.checked_mul(r.1[r.0] as usize))
            .unwrap_or(usize::MAX);
        let branch = total <= MAX_SOLUTIONS;
        let mut partial: Vec<Vec<Option<RootOfUnity>>> = vec![vec![None; self.columns]];
        for (col, row, rhs) in self.rows.iter().rev() {
            let d = row[*col];
            let mut next = Vec::with_capacity(partial.len());
            for assignment in partial {
                let mut target = Some(*rhs);
                for j in col + 1..self.columns {
                    if row[j] != 0 {
                        target = match (target, assignment[j]) {
                            (Some(t), Some(x)) => Some(t * x.pow(-row[j])),
                            _ => None,
                        };
                    }
                }
                match target {
                    Some(t) if d == 1 => {
                        let mut a = assignment;
                        a[*col] = Some(t);
                        next.push(a);
                    }
                    Some(t) if branch => {
                        for z in t.roots(d as u64) {
                            let mut a = assignment.clone();
                            a[*col] = Some(z);
                            next.push(a);
                        }
                    }
                    _ => next.push(assignment),
                }
            }
            partial = next;
        }
        partial.sort();
        partial.dedup();
        partial
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unique_solution() {
        // x + y = 1/2, x - y = 0  =>  2x = 1/2: x ∈ {1/4, 3/4}, y = x.
        let mut s = RelationSystem::new(2);
        assert!(s.add(&[1, 1], RootOfUnity::new(1, 2)));
        assert!(s.add(&[1, -1], RootOfUnity::ONE));
        let sols = s.solutions();
        assert_eq!(sols.len(), 2);
        for sol in &sols {
            let (x, y) = (sol[0].unwrap(), sol[1].unwrap());
            assert_eq!(x, y);
            assert_eq!(x * y, RootOfUnity::MINUS_ONE);
        }
    }

    #[test]
    fn inconsistency_and_free_columns() {
        let mut s = RelationSystem::new(2);
        assert!(s.add(&[2, 0], RootOfUnity::ONE));
        assert!(s.add(&[0, 0], RootOfUnity::ONE));
        let sols = s.solutions();
        assert_eq!(sols.len(), 2);
        assert!(sols.iter().all(|v| v[1].is_none()));
        assert!(!s.add(&[4, 0], RootOfUnity::new(1, 3)));
        assert!(s.solutions().is_empty());
    }

    #[test]
    fn dependent_on_free_column() {
        let mut s = RelationSystem::new(2);
        s.add(&[1, 1], RootOfUnity::ONE);
        let sols = s.solutions();
        assert_eq!(sols, vec![vec![None, None]]);
    }
}
