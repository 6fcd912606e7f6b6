//! Regions of the belief simplex cut out by homogeneous value inequalities.

use num::One;

use crate::error::{Error, Result};
use crate::lp::{enumerate_vertices, lp_solve, LinearProgram, LpOutcome, Relation, DEFAULT_DIM_CAP};
use crate::model::{agent_cell_rows, PreferenceProfile, Side, Valuations};
use crate::rational::Q;

/// `{p >= 0 : sum p = 1, r . p <= 0 for every row r}` as a program with zero objective.
pub fn region_lp(rows: &[Vec<Q>], w: usize) -> LinearProgram {
    let mut lp = LinearProgram::new();
    for j in 0..w {
        lp.add_var(format!("p{j}"));
    }
    lp.add_constraint((0..w).map(|j| (j, Q::one())).collect(), Relation::Eq, Q::one());
    for r in rows {
        lp.add_constraint(r.iter().cloned().enumerate().collect(), Relation::Le, Q::from_integer(0.into()));
    }
    lp
}

pub fn region_nonempty(rows: &[Vec<Q>], w: usize) -> bool {
    !matches!(lp_solve(&region_lp(rows, w)), LpOutcome::Infeasible)
}

/// Vertices of the region, in lexicographic order.
pub fn region_vertices(rows: &[Vec<Q>], w: usize) -> Result<Vec<Vec<Q>>> {
    enumerate_vertices(&region_lp(rows, w).feasible_region(), DEFAULT_DIM_CAP.max(w))
}

/// Maximizes `c . p` over the region.
pub fn region_max(rows: &[Vec<Q>], c: &[Q]) -> Option<(Q, Vec<Q>)> {
    let mut lp = region_lp(rows, c.len());
    for (j, v) in c.iter().enumerate() {
        lp.set_objective(j, v.clone());
    }
    match lp_solve(&lp) {
        LpOutcome::Optimal { value, x } => Some((value, x)),
        _ => None,
    }
}

/// All profiles drawn from `orders` (per side) whose cell meets the simplex,
/// found by depth-first search over agents with incremental feasibility pruning.
pub fn feasible_profiles<V: Valuations>(
    v: &V,
    orders_a: &[Vec<Vec<usize>>],
    orders_b: &[Vec<Vec<usize>>],
    cap: usize,
) -> Result<Vec<(PreferenceProfile, Vec<Vec<Q>>)>> {
    let w = v.num_worlds();
    let mut agents: Vec<(Side, usize)> = Vec::new();
    for side in [Side::A, Side::B] {
        for x in 0..v.side_len(side) {
            agents.push((side, x));
        }
    }
    // Per-agent candidates whose own rows are satisfiable.
    let mut cands: Vec<Vec<(Vec<Vec<usize>>, Vec<Vec<Q>>)>> = Vec::new();
    for &(side, x) in &agents {
        let orders = if side == Side::A { orders_a } else { orders_b };
        let mut list = Vec::new();
        for o in orders {
            let rows = agent_cell_rows(v, side, x, o);
            if region_nonempty(&rows, w) {
                list.push((o.clone(), rows));
            }
        }
        cands.push(list);
    }
    let mut out = Vec::new();
    let mut chosen: Vec<usize> = Vec::new();
    let mut stack_rows: Vec<Vec<Vec<Q>>> = vec![Vec::new()];
    fn rec(
        depth: usize,
        w: usize,
        cands: &[Vec<(Vec<Vec<usize>>, Vec<Vec<Q>>)>],
        agents: &[(Side, usize)],
        chosen: &mut Vec<usize>,
        stack_rows: &mut Vec<Vec<Vec<Q>>>,
        out: &mut Vec<(PreferenceProfile, Vec<Vec<Q>>)>,
        cap: usize,
    ) -> Result<()> {
        if depth == agents.len() {
            if out.len() >= cap {
                return Err(Error::capacity(format!("more than {cap} feasible profiles")));
            }
            let mut p = PreferenceProfile { a: Vec::new(), b: Vec::new() };
            for (k, &(side, _)) in agents.iter().enumerate() {
                let o = cands[k][chosen[k]].0.clone();
                match side {
                    Side::A => p.a.push(o),
                    Side::B => p.b.push(o),
                }
            }
            out.push((p, stack_rows.last().expect("root rows").clone()));
            return Ok(());
        }
        for (i, (_, rows)) in cands[depth].iter().enumerate() {
            let mut acc = stack_rows.last().expect("root rows").clone();
            for r in rows {
                if !acc.contains(r) {
                    acc.push(r.clone());
                }
            }
            let grew = acc.len() != stack_rows.last().expect("root rows").len();
            if grew && !region_nonempty(&acc, w) {
                continue;
            }
            chosen.push(i);
            stack_rows.push(acc);
            rec(depth + 1, w, cands, agents, chosen, stack_rows, out, cap)?;
            stack_rows.pop();
            chosen.pop();
        }
        Ok(())
    }
    rec(0, w, &cands, &agents, &mut chosen, &mut stack_rows, &mut out, cap)?;
    Ok(out)
}
