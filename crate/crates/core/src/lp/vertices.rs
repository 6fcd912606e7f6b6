//! Vertex enumeration by tight-constraint subsets.

use std::collections::BTreeSet;

use itertools::Itertools;
use num::Zero;

use super::{lp_solve, Constraint, LinearProgram, LpOutcome, Relation};
use crate::error::{Error, Result};
use crate::linalg::{rank, solve_unique};
use crate::rational::Q;

pub const DEFAULT_DIM_CAP: usize = 16;
const SUBSET_CAP: u128 = 20_000_000;

/// `{x : every constraint holds}` with all variables otherwise free.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Polytope {
    pub names: Vec<String>,
    pub constraints: Vec<Constraint>,
}

impl Polytope {
    pub fn new(dim: usize) -> Self {
        Polytope {
            names: (0..dim).map(|i| format!("x{i}")).collect(),
            constraints: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn add(&mut self, coeffs: Vec<(usize, Q)>, rel: Relation, rhs: Q) {
        assert!(coeffs.iter().all(|(j, _)| *j < self.dim()));
        self.constraints.push(Constraint::new(coeffs, rel, rhs));
    }

    pub fn contains(&self, x: &[Q]) -> bool {
        self.constraints.iter().all(|c| c.holds(x))
    }

    fn as_lp(&self) -> LinearProgram {
        let mut lp = LinearProgram::new();
        for n in &self.names {
            lp.add_free_var(n.clone());
        }
        lp.constraints = self.constraints.clone();
        lp
    }
}

fn binom(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) as u128 / (i + 1) as u128;
        if r > u128::MAX / 1024 {
            return u128::MAX / 1024;
        }
    }
    r
}

/// All vertices of a bounded polytope, each once, in lexicographic order.
pub fn enumerate_vertices(poly: &Polytope, dim_cap: usize) -> Result<Vec<Vec<Q>>> {
    let d = poly.dim();
    if d > dim_cap {
        return Err(Error::capacity(format!(
            "polytope dimension {d} exceeds cap {dim_cap}"
        )));
    }
    let base = poly.as_lp();
    for j in 0..d {
        for sign in [1, -1] {
            let mut lp = base.clone();
            lp.set_objective(j, Q::from_integer(sign.into()));
            match lp_solve(&lp) {
                LpOutcome::Infeasible => return Ok(Vec::new()),
                LpOutcome::Unbounded => {
                    return Err(Error::input(format!(
                        "polytope is unbounded along {}{}",
                        if sign > 0 { "+" } else { "-" },
                        poly.names[j]
                    )))
                }
                LpOutcome::Optimal { .. } => {}
            }
        }
    }
    if d == 0 {
        return Ok(vec![Vec::new()]);
    }

    let mut eq_rows = Vec::new();
    let mut eq_rhs = Vec::new();
    let mut ineq: Vec<(Vec<Q>, Q)> = Vec::new();
    for c in &poly.constraints {
        let row = c.dense(d);
        match c.rel {
            Relation::Eq => {
                eq_rows.push(row);
                eq_rhs.push(c.rhs.clone());
            }
            Relation::Le => ineq.push((row, c.rhs.clone())),
            Relation::Ge => ineq.push((row.into_iter().map(|v| -v).collect(), -c.rhs.clone())),
        }
    }
    let r = rank(&eq_rows);
    let k = d - r;

    let mut candidates: Vec<usize> = (0..ineq.len()).filter(|&i| ineq[i].0.iter().any(|v| !v.is_zero())).collect();
    if binom(candidates.len(), k) > 8 * candidates.len() as u128 {
        // Rows that never touch the polytope cannot be tight at a vertex.
        candidates.retain(|&i| {
            let mut lp = base.clone();
            let coeffs = ineq[i].0.iter().cloned().enumerate().filter(|(_, v)| !v.is_zero()).collect();
            lp.add_constraint(coeffs, Relation::Eq, ineq[i].1.clone());
            !matches!(lp_solve(&lp), LpOutcome::Infeasible)
        });
    }
    if binom(candidates.len(), k) > SUBSET_CAP {
        return Err(Error::capacity(format!(
            "vertex enumeration needs C({}, {k}) tight subsets",
            candidates.len()
        )));
    }

    let mut found: BTreeSet<Vec<Q>> = BTreeSet::new();
    for subset in candidates.iter().copied().combinations(k) {
        let mut a = eq_rows.clone();
        let mut b = eq_rhs.clone();
        for &i in &subset {
            a.push(ineq[i].0.clone());
            b.push(ineq[i].1.clone());
        }
        let Some(x) = solve_unique(&a, &b, d) else { continue };
        let feasible = ineq
            .iter()
            .all(|(row, rhs)| row.iter().zip(&x).fold(Q::zero(), |s, (p, v)| s + p * v) <= *rhs);
        if feasible {
            found.insert(x);
        }
    }
    Ok(found.into_iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;
    use num::One;

    fn unit_simplex(d: usize) -> Polytope {
        let mut p = Polytope::new(d);
        for j in 0..d {
            p.add(vec![(j, Q::one())], Relation::Ge, q(0));
        }
        p.add((0..d).map(|j| (j, Q::one())).collect(), Relation::Eq, q(1));
        p
    }

    #[test]
    fn simplex_vertices() {
        let v = enumerate_vertices(&unit_simplex(2), DEFAULT_DIM_CAP).unwrap();
        assert_eq!(v, vec![vec![q(0), q(1)], vec![q(1), q(0)]]);
    }

    #[test]
    fn square_vertices() {
        let mut p = Polytope::new(2);
        for j in 0..2 {
            p.add(vec![(j, Q::one())], Relation::Ge, q(0));
            p.add(vec![(j, Q::one())], Relation::Le, q(1));
        }
        let v = enumerate_vertices(&p, DEFAULT_DIM_CAP).unwrap();
        assert_eq!(v.len(), 4);
        assert_eq!(v[0], vec![q(0), q(0)]);
        assert_eq!(v[3], vec![q(1), q(1)]);
    }

    #[test]
    fn errors_and_empty() {
        let mut p = Polytope::new(1);
        p.add(vec![(0, Q::one())], Relation::Ge, q(0));
        assert!(matches!(enumerate_vertices(&p, 16), Err(Error::Input(_))));
        assert!(matches!(enumerate_vertices(&unit_simplex(3), 2), Err(Error::Capacity(_))));
        let mut p = Polytope::new(1);
        p.add(vec![(0, Q::one())], Relation::Ge, q(2));
        p.add(vec![(0, Q::one())], Relation::Le, q(1));
        assert!(enumerate_vertices(&p, 16).unwrap().is_empty());
    }

    #[test]
    fn degenerate_apex_reported_once() {
        // Square pyramid: four facets meet at the apex.
        let mut p = Polytope::new(3);
        let z = 2;
        p.add(vec![(z, Q::one())], Relation::Ge, q(0));
        for j in 0..2 {
            p.add(vec![(j, Q::one()), (z, Q::one())], Relation::Le, q(1));
            p.add(vec![(j, -Q::one()), (z, Q::one())], Relation::Le, q(1));
        }
        let v = enumerate_vertices(&p, 16).unwrap();
        assert_eq!(v.len(), 5);
        assert!(v.contains(&vec![q(0), q(0), q(1)]));
    }
}
