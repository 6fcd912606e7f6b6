//! Dense exact Gaussian elimination.

use num::{One, Zero};

use crate::rational::Q;

/// Reduces `m` (rows of equal length) to reduced row echelon form in place and
/// returns the pivot column of each nonzero row.
pub fn rref(m: &mut Vec<Vec<Q>>, ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == m.len() {
            break;
        }
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = Q::one() / &m[r][c];
        for v in m[r].iter_mut() {
            *v *= &inv;
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    m.truncate(r);
    pivots
}

pub fn rank(rows: &[Vec<Q>]) -> usize {
    let Some(first) = rows.first() else { return 0 };
    let n = first.len();
    let mut m = rows.to_vec();
    let piv = rref(&mut m, n);
    piv.len()
}

/// Solves `a x = b` and returns `x` when the system is consistent with a
/// unique solution.
pub fn solve_unique(a: &[Vec<Q>], b: &[Q], n: usize) -> Option<Vec<Q>> {
    let mut m: Vec<Vec<Q>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    let piv = rref(&mut m, n + 1);
    if piv.contains(&n) || piv.len() != n {
        return None;
    }
    Some(m.iter().map(|row| row[n].clone()).collect())
}

/// A basis of `{x : rows x = 0}`.
pub fn null_space(rows: &[Vec<Q>], n: usize) -> Vec<Vec<Q>> {
    let mut m = rows.to_vec();
    let piv = rref(&mut m, n);
    let free: Vec<usize> = (0..n).filter(|c| !piv.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Q::zero(); n];
            v[f] = Q::one();
            for (row, &pc) in m.iter().zip(&piv) {
                v[pc] = -row[f].clone();
            }
            v
        })
        .collect()
}
