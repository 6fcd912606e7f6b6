//! Private signals at subtype granularity, solved by column generation with
//! one pricing program per candidate matching.
//!
//! The signal of a subtype `(s, t)` is summarized by its envy set: the
//! opposite types it strictly prefers to its partner type `t`. Stability only
//! depends on these sets, and a posterior is consistent with envy set `E` when
//! no type outside `E` is strictly better than `t`.

use std::collections::BTreeMap;

use num::{One, Signed, Zero};

use super::{
    check_type_cap, star_vertices, subtypes_of, PrototypeMatching, Subtype, TypedCaps,
    TypedInstance, TypedPolicy, TypedSignal, TypedSolution, TypedView,
};
use crate::cells::{region_max, region_nonempty};
use crate::error::{Error, Result};
use crate::lp::{lp_solve, LinearProgram, LpOutcome, Relation};
use crate::model::{order_label, Side, Valuations};
use crate::rational::{dot, Q};

struct EnvySet {
    members: Vec<usize>,
    rows: Vec<Vec<Q>>,
}

struct Block {
    matching: PrototypeMatching,
    subtypes: Vec<Subtype>,
    /// Candidate envy sets per subtype.
    envy: Vec<Vec<EnvySet>>,
    /// Joint choices: one envy-set index per subtype.
    tuples: Vec<Vec<usize>>,
    /// `u(M | w)` per world.
    utility: Vec<Q>,
}

fn diff(a: &[Q], b: &[Q]) -> Vec<Q> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn envy_sets(ti: &TypedInstance, st: Subtype) -> Vec<EnvySet> {
    let w = ti.worlds.len();
    let opp = ti.side_len(st.side.other());
    let others: Vec<usize> = (0..opp).filter(|&y| y != st.partner).collect();
    let base = ti.values(st.side, st.own, st.partner);
    let mut out = Vec::new();
    for mask in 0u32..(1u32 << others.len()) {
        let members: Vec<usize> = others.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &y)| y).collect();
        let rows: Vec<Vec<Q>> = others
            .iter()
            .filter(|y| !members.contains(y))
            .map(|&y| diff(ti.values(st.side, st.own, y), base))
            .filter(|r| r.iter().any(|c| !c.is_zero()))
            .collect();
        if !region_nonempty(&rows, w) {
            continue;
        }
        let tight = members.iter().all(|&y| {
            region_max(&rows, &diff(ti.values(st.side, st.own, y), base)).is_some_and(|(v, _)| v.is_positive())
        });
        if tight {
            out.push(EnvySet { members, rows });
        }
    }
    out
}

fn compatible(a: Subtype, ea: &EnvySet, b: Subtype, eb: &EnvySet) -> bool {
    !(ea.members.contains(&b.own) && eb.members.contains(&a.own))
}

fn build_block(ti: &TypedInstance, m: &PrototypeMatching, cap: usize) -> Result<Block> {
    let subtypes = subtypes_of(m);
    let envy: Vec<Vec<EnvySet>> = subtypes.iter().map(|&st| envy_sets(ti, st)).collect();
    let mut tuples = Vec::new();
    let mut cur = Vec::with_capacity(subtypes.len());
    fn rec(
        k: usize,
        subtypes: &[Subtype],
        envy: &[Vec<EnvySet>],
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
        cap: usize,
    ) -> Result<()> {
        if k == subtypes.len() {
            if out.len() >= cap {
                return Err(Error::capacity(format!("more than {cap} joint subtype signals for one matching")));
            }
            out.push(cur.clone());
            return Ok(());
        }
        for (i, e) in envy[k].iter().enumerate() {
            let ok = (0..k).all(|j| {
                let (a, b) = (subtypes[j], subtypes[k]);
                let (ea, eb) = (&envy[j][cur[j]], e);
                match (a.side, b.side) {
                    (Side::A, Side::B) => compatible(a, ea, b, eb),
                    (Side::B, Side::A) => compatible(b, eb, a, ea),
                    _ => true,
                }
            });
            if ok {
                cur.push(i);
                rec(k + 1, subtypes, envy, cur, out, cap)?;
                cur.pop();
            }
        }
        Ok(())
    }
    rec(0, &subtypes, &envy, &mut cur, &mut tuples, cap)?;
    let w = ti.worlds.len();
    let utility = (0..w)
        .map(|j| {
            let mut e = vec![Q::zero(); w];
            e[j] = Q::one();
            ti.matching_value(m, &e)
        })
        .collect();
    Ok(Block { matching: m.clone(), subtypes, envy, tuples, utility })
}

/// Joint-signal probabilities `y[g * |worlds| + w]` of one block, scaled so they sum to one.
#[derive(Clone)]
struct Column {
    block: usize,
    y: Vec<Q>,
    z: Vec<Q>,
    value: Q,
}

fn column(ti: &TypedInstance, blocks: &[Block], block: usize, y: Vec<Q>) -> Column {
    let w = ti.worlds.len();
    let mut z = vec![Q::zero(); w];
    for (i, v) in y.iter().enumerate() {
        z[i % w] += v;
    }
    let value = (0..w).map(|j| &ti.prior[j] * &blocks[block].utility[j] * &z[j]).sum();
    Column { block, y, z, value }
}

/// Maximizes `sum y(g, w) (mu(w) u(w) - pi(w))` over the block's normalized cone.
fn price(ti: &TypedInstance, b: &Block, pi: &[Q]) -> Option<(Q, Vec<Q>)> {
    let w = ti.worlds.len();
    let mut lp = LinearProgram::new();
    for g in 0..b.tuples.len() {
        for j in 0..w {
            let v = lp.add_var(format!("y{g}_{j}"));
            lp.set_objective(v, &ti.prior[j] * &b.utility[j] - &pi[j]);
        }
    }
    for (k, sets) in b.envy.iter().enumerate() {
        for (e, set) in sets.iter().enumerate() {
            let members: Vec<usize> = (0..b.tuples.len()).filter(|&g| b.tuples[g][k] == e).collect();
            if members.is_empty() {
                continue;
            }
            for r in &set.rows {
                let coeffs: Vec<(usize, Q)> = members
                    .iter()
                    .flat_map(|&g| (0..w).map(move |j| (g, j)))
                    .map(|(g, j)| (g * w + j, &ti.prior[j] * &r[j]))
                    .filter(|(_, c)| !c.is_zero())
                    .collect();
                if !coeffs.is_empty() {
                    lp.add_constraint(coeffs, Relation::Le, Q::zero());
                }
            }
        }
    }
    lp.add_constraint((0..b.tuples.len() * w).map(|i| (i, Q::one())).collect(), Relation::Eq, Q::one());
    match lp_solve(&lp) {
        LpOutcome::Optimal { value, x } => Some((value, x)),
        _ => None,
    }
}

/// Full revelation of world `w` to a joint signal whose regions all contain it.
fn seed(ti: &TypedInstance, blocks: &[Block], block: usize, w: usize) -> Option<Column> {
    let b = &blocks[block];
    let nw = ti.worlds.len();
    let g = b.tuples.iter().position(|t| {
        t.iter().enumerate().all(|(k, &e)| b.envy[k][e].rows.iter().all(|r| !r[w].is_positive()))
    })?;
    let mut y = vec![Q::zero(); b.tuples.len() * nw];
    y[g * nw + w] = Q::one();
    Some(column(ti, blocks, block, y))
}

fn master(columns: &[Column], w: usize) -> Result<(Q, Vec<Q>)> {
    let mut lp = LinearProgram::new();
    for (c, col) in columns.iter().enumerate() {
        let v = lp.add_var(format!("l{c}"));
        lp.set_objective(v, col.value.clone());
    }
    for j in 0..w {
        let coeffs: Vec<(usize, Q)> = columns
            .iter()
            .enumerate()
            .filter(|(_, col)| !col.z[j].is_zero())
            .map(|(c, col)| (c, col.z[j].clone()))
            .collect();
        lp.add_constraint(coeffs, Relation::Eq, Q::one());
    }
    match lp_solve(&lp) {
        LpOutcome::Optimal { value, x } => Ok((value, x)),
        _ => Err(Error::internal("restricted master program has no optimum")),
    }
}

fn duals(columns: &[Column], w: usize) -> Result<Vec<Q>> {
    let mut lp = LinearProgram::new();
    for j in 0..w {
        let v = lp.add_free_var(format!("pi{j}"));
        lp.set_objective(v, -Q::one());
    }
    for col in columns {
        lp.add_constraint(col.z.iter().cloned().enumerate().collect(), Relation::Ge, col.value.clone());
    }
    match lp_solve(&lp) {
        LpOutcome::Optimal { x, .. } => Ok(x),
        _ => Err(Error::internal("dual of the restricted master program has no optimum")),
    }
}

/// Optimal private policy in which agents of one subtype always see the same
/// component; each component is labelled by the weak order over opposite types
/// that its posterior induces.
pub fn solve_private_typed(ti: &TypedInstance, caps: TypedCaps) -> Result<TypedSolution> {
    ti.validate()?;
    check_type_cap(ti, caps.types)?;
    let w = ti.worlds.len();
    let blocks: Vec<Block> = star_vertices(ti)?
        .iter()
        .map(|m| build_block(ti, m, caps.tuples))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .filter(|b| !b.tuples.is_empty())
        .collect();
    let mut columns = Vec::new();
    for j in 0..w {
        let before = columns.len();
        for k in 0..blocks.len() {
            columns.extend(seed(ti, &blocks, k, j));
        }
        if columns.len() == before {
            return Err(Error::internal("no stable matching found under full revelation"));
        }
    }
    let (value, lambda) = loop {
        let pi = duals(&columns, w)?;
        let mut added = false;
        for k in 0..blocks.len() {
            if let Some((rc, y)) = price(ti, &blocks[k], &pi) {
                if rc.is_positive() {
                    columns.push(column(ti, &blocks, k, y));
                    added = true;
                }
            }
        }
        if !added {
            break master(&columns, w)?;
        }
    };
    // Aggregate joint-signal probabilities per block.
    let mut per_block: BTreeMap<usize, Vec<Q>> = BTreeMap::new();
    for (col, l) in columns.iter().zip(&lambda) {
        if l.is_positive() {
            let acc = per_block.entry(col.block).or_insert_with(|| vec![Q::zero(); col.y.len()]);
            for (a, v) in acc.iter_mut().zip(&col.y) {
                *a += l * v;
            }
        }
    }
    let mut merged: BTreeMap<TypedSignal, Vec<Q>> = BTreeMap::new();
    for (k, y) in per_block {
        let b = &blocks[k];
        let mut labels: Vec<BTreeMap<usize, String>> = vec![BTreeMap::new(); b.subtypes.len()];
        for (i, st) in b.subtypes.iter().enumerate() {
            for e in 0..b.envy[i].len() {
                let mut mass = vec![Q::zero(); w];
                for (g, t) in b.tuples.iter().enumerate() {
                    if t[i] == e {
                        for j in 0..w {
                            mass[j] += &ti.prior[j] * &y[g * w + j];
                        }
                    }
                }
                let total: Q = mass.iter().sum();
                if !total.is_positive() {
                    continue;
                }
                let p: Vec<Q> = mass.iter().map(|x| x / &total).collect();
                let names = match st.side {
                    Side::A => &ti.b_types,
                    Side::B => &ti.a_types,
                };
                let tiers = own_order(ti, *st, &p);
                labels[i].insert(e, order_label(names, &tiers));
            }
        }
        for (g, t) in b.tuples.iter().enumerate() {
            let row = &y[g * w..(g + 1) * w];
            if !row.iter().any(Signed::is_positive) {
                continue;
            }
            let view: BTreeMap<Subtype, String> =
                b.subtypes.iter().enumerate().map(|(i, st)| (*st, labels[i][&t[i]].clone())).collect();
            let sig = TypedSignal { view: TypedView::Private(view), matching: b.matching.clone() };
            let acc = merged.entry(sig).or_insert_with(|| vec![Q::zero(); w]);
            for (a, v) in acc.iter_mut().zip(row) {
                *a += v;
            }
        }
    }
    let signals: Vec<TypedSignal> = merged.keys().cloned().collect();
    let kernel: Vec<Vec<Q>> = merged.into_values().collect();
    Ok(TypedSolution { value, policy: TypedPolicy { signals, kernel } })
}

/// Weak order over opposite types held by a subtype at posterior `p`.
fn own_order(ti: &TypedInstance, st: Subtype, p: &[Q]) -> Vec<Vec<usize>> {
    let opp = ti.side_len(st.side.other());
    let vals: Vec<Q> = (0..opp).map(|y| dot(ti.values(st.side, st.own, y), p)).collect();
    let mut order: Vec<usize> = (0..opp).collect();
    order.sort_by(|&i, &j| vals[j].cmp(&vals[i]).then(i.cmp(&j)));
    let mut tiers: Vec<Vec<usize>> = Vec::new();
    for y in order {
        match tiers.last_mut() {
            Some(t) if vals[t[0]] == vals[y] => t.push(y),
            _ => tiers.push(vec![y]),
        }
    }
    tiers
}
