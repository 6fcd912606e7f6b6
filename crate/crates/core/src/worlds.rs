//! Exact public persuasion for a small number of worlds.

use num::{BigInt, One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::cells::region_max;
use crate::error::{Error, Result};
use crate::io::{matching_to_json, profile_to_json, qjson};
use crate::linalg::rank;
use crate::lp::{enumerate_vertices, lp_solve, LinearProgram, LpOutcome, Polytope, Relation};
use crate::matching::{wsm_strict, WsmProblem};
use crate::model::{
    cell_rows, induced_profile, Agent, Instance, Matching, MetaSignal, PreferenceProfile, PublicPolicy,
    Side, Valuations,
};
use crate::rational::{dot, fmt_q, Q};

pub const DEFAULT_WORLD_CAP: usize = 3;
pub const DEFAULT_SUBSET_CAP: u128 = 5_000_000;
pub const DEFAULT_MULTISET_CAP: u128 = 2_000_000;
const NOISE_GRID: i64 = 1_000_000;

/// `v_x(y | .) - v_x(y' | .)` for one agent `x` and two partners `y < y'`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DifferenceVector {
    pub owner: Agent,
    pub pair: (usize, usize),
    pub vec: Vec<Q>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Degeneracy {
    NonDegenerate,
    Degenerate { witness: Vec<DifferenceVector> },
}

impl Degeneracy {
    pub fn is_degenerate(&self) -> bool {
        matches!(self, Degeneracy::Degenerate { .. })
    }
}

fn difference_vectors(inst: &Instance) -> Vec<DifferenceVector> {
    let mut out = Vec::new();
    for side in [Side::A, Side::B] {
        let opp = inst.side_len(side.other());
        for x in 0..inst.side_len(side) {
            for y in 0..opp {
                for y2 in y + 1..opp {
                    let vec = inst
                        .values(side, x, y)
                        .iter()
                        .zip(inst.values(side, x, y2))
                        .map(|(a, b)| a - b)
                        .collect();
                    out.push(DifferenceVector { owner: Agent { side, idx: x }, pair: (y, y2), vec });
                }
            }
        }
    }
    out
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let mut r: u128 = 1;
    for i in 0..k.min(n - k) {
        r = r.saturating_mul(n - i) / (i + 1);
    }
    r
}

/// Whether the chosen pairs of every agent form vertex-disjoint simple paths,
/// which is exactly when they can all be consecutive in one strict order.
fn realizable(vectors: &[DifferenceVector], chosen: &[usize]) -> bool {
    let mut owners: Vec<Agent> = chosen.iter().map(|&i| vectors[i].owner).collect();
    owners.sort();
    owners.dedup();
    for owner in owners {
        let edges: Vec<(usize, usize)> =
            chosen.iter().filter(|&&i| vectors[i].owner == owner).map(|&i| vectors[i].pair).collect();
        let size = edges.iter().map(|&(a, b)| a.max(b)).max().unwrap_or(0) + 1;
        let mut parent: Vec<usize> = (0..size).collect();
        let mut degree = vec![0usize; size];
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for (a, b) in edges {
            degree[a] += 1;
            degree[b] += 1;
            if degree[a] > 2 || degree[b] > 2 {
                return false;
            }
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra == rb {
                return false;
            }
            parent[ra] = rb;
        }
    }
    true
}

/// Checks that every realizable set of `|worlds|` difference vectors is linearly
/// independent; on failure the first dependent set is returned.
pub fn check_non_degenerate(inst: &Instance, cap: u128) -> Result<Degeneracy> {
    inst.validate()?;
    let vectors = difference_vectors(inst);
    let w = inst.num_worlds();
    let total = binomial(vectors.len() as u128, w as u128);
    if total > cap {
        return Err(Error::capacity(format!(
            "{total} difference-vector subsets exceed the cap of {cap}; perturb the instance and spot-check instead"
        )));
    }
    if vectors.len() < w {
        return Ok(Degeneracy::NonDegenerate);
    }
    let mut chosen = Vec::with_capacity(w);
    if let Some(found) = search_dependent(&vectors, w, 0, &mut chosen) {
        let witness = found.into_iter().map(|i| vectors[i].clone()).collect();
        return Ok(Degeneracy::Degenerate { witness });
    }
    Ok(Degeneracy::NonDegenerate)
}

fn search_dependent(
    vectors: &[DifferenceVector],
    w: usize,
    start: usize,
    chosen: &mut Vec<usize>,
) -> Option<Vec<usize>> {
    if chosen.len() == w {
        let rows: Vec<Vec<Q>> = chosen.iter().map(|&i| vectors[i].vec.clone()).collect();
        return (rank(&rows) < w).then(|| chosen.clone());
    }
    for i in start..vectors.len() {
        if vectors.len() - i < w - chosen.len() {
            break;
        }
        chosen.push(i);
        if realizable(vectors, chosen) {
            if let Some(found) = search_dependent(vectors, w, i + 1, chosen) {
                return Some(found);
            }
        }
        chosen.pop();
    }
    None
}

/// Adds independent noise from the grid `{eps * k / N : -N < k < N}` to every
/// valuation; utilities are left unchanged.
pub fn perturb(inst: &Instance, eps: &Q, seed: u64) -> Result<Instance> {
    if !eps.is_positive() {
        return Err(Error::input("perturbation size must be positive"));
    }
    inst.validate()?;
    let mut out = inst.materialized();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = Q::from_integer(BigInt::from(NOISE_GRID));
    for table in [&mut out.va, &mut out.vb] {
        for row in table.iter_mut() {
            for cell in row.iter_mut() {
                for v in cell.iter_mut() {
                    let k: i64 = rng.gen_range(1..2 * NOISE_GRID) - NOISE_GRID;
                    *v += eps * Q::from_integer(BigInt::from(k)) / &grid;
                }
            }
        }
    }
    Ok(out)
}

/// A full-dimensional region of beliefs on which every agent's order is strict.
#[derive(Debug, Clone, PartialEq)]
pub struct ProperCell {
    pub profile: PreferenceProfile,
    /// Rows `r` with the closed cell equal to `{p in simplex : r . p <= 0}`.
    pub rows: Vec<Vec<Q>>,
    /// A point strictly inside the cell.
    pub witness: Vec<Q>,
    /// For two worlds, the cell as an interval of `p(second world)`.
    pub interval: Option<(Q, Q)>,
}

/// Distinct indifference hyperplanes, scaled so the first nonzero entry is 1.
fn indifference_hyperplanes(inst: &Instance) -> Vec<Vec<Q>> {
    let mut out: Vec<Vec<Q>> = Vec::new();
    for d in difference_vectors(inst) {
        let Some(lead) = d.vec.iter().find(|c| !c.is_zero()).cloned() else {
            continue;
        };
        let h: Vec<Q> = d.vec.iter().map(|c| c / &lead).collect();
        if !out.contains(&h) {
            out.push(h);
        }
    }
    out
}

/// The strict profile at `p`, with remaining exact ties broken by index.
fn strict_profile_at(inst: &Instance, p: &[Q]) -> Result<PreferenceProfile> {
    let weak = induced_profile(inst, p, None)?;
    let split = |lists: Vec<Vec<Vec<usize>>>| {
        lists
            .into_iter()
            .map(|tiers| tiers.into_iter().flatten().map(|y| vec![y]).collect())
            .collect()
    };
    Ok(PreferenceProfile { a: split(weak.a), b: split(weak.b) })
}

fn make_cell(inst: &Instance, witness: Vec<Q>, interval: Option<(Q, Q)>) -> Result<ProperCell> {
    let profile = strict_profile_at(inst, &witness)?;
    let rows = cell_rows(inst, &profile);
    Ok(ProperCell { profile, rows, witness, interval })
}

/// Crossing points of the indifference lines with the open segment, sorted.
pub fn crossing_points(inst: &Instance) -> Vec<Q> {
    let mut xs: Vec<Q> = Vec::new();
    for h in indifference_hyperplanes(inst) {
        let slope = &h[1] - &h[0];
        if slope.is_zero() {
            continue;
        }
        let x = -&h[0] / slope;
        if x.is_positive() && x < Q::one() && !xs.contains(&x) {
            xs.push(x);
        }
    }
    xs.sort();
    xs
}

/// All cells with nonempty interior, for at most `cap` worlds.
pub fn enumerate_proper_cells(inst: &Instance, cap: usize) -> Result<Vec<ProperCell>> {
    inst.validate()?;
    let w = inst.num_worlds();
    if w > cap {
        return Err(Error::capacity(format!("cell enumeration supports at most {cap} worlds, got {w}")));
    }
    match w {
        1 => Ok(vec![make_cell(inst, vec![Q::one()], None)?]),
        2 => {
            let mut bounds = vec![Q::zero()];
            bounds.extend(crossing_points(inst));
            bounds.push(Q::one());
            bounds
                .windows(2)
                .map(|s| {
                    let mid = (&s[0] + &s[1]) / Q::from_integer(2.into());
                    make_cell(inst, vec![Q::one() - &mid, mid], Some((s[0].clone(), s[1].clone())))
                })
                .collect()
        }
        _ => split_cells(inst),
    }
}

/// Generic incremental construction: hyperplanes are inserted one at a time and
/// every cell they properly cut is replaced by its two sides.
pub fn split_cells(inst: &Instance) -> Result<Vec<ProperCell>> {
    let w = inst.num_worlds();
    let mut regions: Vec<Vec<Vec<Q>>> = vec![Vec::new()];
    for h in indifference_hyperplanes(inst) {
        let neg: Vec<Q> = h.iter().map(|c| -c).collect();
        let mut next = Vec::with_capacity(regions.len() * 2);
        for rows in regions {
            let hi = region_max(&rows, &h).map(|(v, _)| v);
            let lo = region_max(&rows, &neg).map(|(v, _)| -v);
            match (hi, lo) {
                (Some(hi), Some(lo)) if hi.is_positive() && lo.is_negative() => {
                    let mut below = rows.clone();
                    below.push(h.clone());
                    let mut above = rows;
                    above.push(neg.clone());
                    next.push(below);
                    next.push(above);
                }
                _ => next.push(rows),
            }
        }
        regions = next;
    }
    regions
        .into_iter()
        .map(|rows| {
            let witness = interior_point(&rows, w)
                .ok_or_else(|| Error::internal("split produced a cell without interior"))?;
            make_cell(inst, witness, None)
        })
        .collect()
}

/// The point maximizing the smallest slack over the region's rows and the
/// simplex facets, provided that slack is positive.
pub fn interior_point(rows: &[Vec<Q>], w: usize) -> Option<Vec<Q>> {
    let mut lp = LinearProgram::new();
    for j in 0..w {
        lp.add_var(format!("p{j}"));
    }
    let t = lp.add_var("t");
    lp.set_objective(t, Q::one());
    lp.add_constraint((0..w).map(|j| (j, Q::one())).collect(), Relation::Eq, Q::one());
    lp.add_constraint(vec![(t, Q::one())], Relation::Le, Q::one());
    for r in rows {
        let mut c: Vec<(usize, Q)> = r.iter().cloned().enumerate().collect();
        c.push((t, Q::one()));
        lp.add_constraint(c, Relation::Le, Q::zero());
    }
    for j in 0..w {
        lp.add_constraint(vec![(j, Q::one()), (t, -Q::one())], Relation::Ge, Q::zero());
    }
    match lp_solve(&lp) {
        LpOutcome::Optimal { value, mut x } if value.is_positive() => {
            x.truncate(w);
            Some(x)
        }
        _ => None,
    }
}

/// Solves one weighted stable matching per signal with weights aggregated by `gamma`.
pub fn solve_bmp(
    inst: &Instance,
    profiles: &[PreferenceProfile],
    gamma: &[Vec<Q>],
) -> Result<(Vec<Matching>, Q)> {
    if profiles.len() != gamma.len() {
        return Err(Error::input("one assignment row is needed per profile"));
    }
    let n = inst.n();
    let mut matchings = Vec::with_capacity(profiles.len());
    let mut total = Q::zero();
    for (profile, g) in profiles.iter().zip(gamma) {
        let mass: Vec<Q> = inst.prior.iter().zip(g).map(|(m, x)| m * x).collect();
        let weights = (0..n).map(|a| (0..n).map(|b| dot(inst.u(a, b), &mass)).collect()).collect();
        let (m, v) = wsm_strict(&WsmProblem { profile: profile.clone(), weights })?;
        total += v;
        matchings.push(m);
    }
    Ok((matchings, total))
}

/// Feasible region of the assignment program for a multiset of cells; variable
/// `l * |worlds| + w` is the probability of signal `l` in world `w`.
pub fn assignment_polytope(inst: &Instance, cells: &[&ProperCell]) -> Polytope {
    let w = inst.num_worlds();
    let mut poly = Polytope::new(cells.len() * w);
    for (l, cell) in cells.iter().enumerate() {
        for r in &cell.rows {
            let coeffs: Vec<(usize, Q)> = (0..w)
                .map(|j| (l * w + j, &inst.prior[j] * &r[j]))
                .filter(|(_, c)| !c.is_zero())
                .collect();
            if !coeffs.is_empty() {
                poly.add(coeffs, Relation::Le, Q::zero());
            }
        }
        for j in 0..w {
            poly.add(vec![(l * w + j, Q::one())], Relation::Ge, Q::zero());
        }
    }
    for j in 0..w {
        poly.add((0..cells.len()).map(|l| (l * w + j, Q::one())).collect(), Relation::Eq, Q::one());
    }
    poly
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorldsSolution {
    pub value: Q,
    pub policy: PublicPolicy,
    pub degeneracy: Option<Degeneracy>,
    pub cells: Vec<ProperCell>,
}

impl WorldsSolution {
    /// Optimality is only guaranteed when the instance is known to be non-degenerate.
    pub fn label(&self) -> &'static str {
        match self.degeneracy {
            Some(Degeneracy::NonDegenerate) => "optimal",
            Some(Degeneracy::Degenerate { .. }) => "heuristic (degeneracy detected)",
            None => "heuristic (degeneracy unchecked)",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct WorldsCaps {
    pub worlds: usize,
    pub subsets: u128,
    pub multisets: u128,
}

impl Default for WorldsCaps {
    fn default() -> Self {
        WorldsCaps { worlds: DEFAULT_WORLD_CAP, subsets: DEFAULT_SUBSET_CAP, multisets: DEFAULT_MULTISET_CAP }
    }
}

/// Searches every multiset of `|worlds|` proper cells, every vertex of its
/// assignment polytope and the best matchings for it.
pub fn solve_public_small_worlds(inst: &Instance, caps: WorldsCaps) -> Result<WorldsSolution> {
    inst.validate()?;
    let degeneracy = match check_non_degenerate(inst, caps.subsets) {
        Ok(d) => Some(d),
        Err(Error::Capacity(_)) => None,
        Err(e) => return Err(e),
    };
    let cells = enumerate_proper_cells(inst, caps.worlds)?;
    let w = inst.num_worlds();
    let count = binomial((cells.len() + w - 1) as u128, w as u128);
    if count > caps.multisets {
        return Err(Error::capacity(format!(
            "{count} cell multisets exceed the cap of {}",
            caps.multisets
        )));
    }
    let mut best: Option<(Q, Vec<usize>, Vec<Vec<Q>>, Vec<Matching>)> = None;
    let mut idx = vec![0usize; w];
    loop {
        let chosen: Vec<&ProperCell> = idx.iter().map(|&i| &cells[i]).collect();
        let profiles: Vec<PreferenceProfile> = chosen.iter().map(|c| c.profile.clone()).collect();
        for gamma in enumerate_vertices(&assignment_polytope(inst, &chosen), w * w)? {
            let rows: Vec<Vec<Q>> = gamma.chunks(w).map(|c| c.to_vec()).collect();
            let (ms, v) = solve_bmp(inst, &profiles, &rows)?;
            if best.as_ref().is_none_or(|(bv, ..)| v > *bv) {
                best = Some((v, idx.clone(), rows, ms));
            }
        }
        if !next_multiset(&mut idx, cells.len()) {
            break;
        }
    }
    let (value, idx, gamma, matchings) = best.ok_or_else(|| Error::internal("no feasible cell assignment"))?;
    let mut signals = Vec::new();
    let mut kernel = Vec::new();
    for ((i, row), m) in idx.into_iter().zip(gamma).zip(matchings) {
        if row.iter().any(|g| g.is_positive()) {
            signals.push(MetaSignal { profile: Some(cells[i].profile.clone()), matching: m, tag: None });
            kernel.push(row);
        }
    }
    Ok(WorldsSolution { value, policy: PublicPolicy { signals, kernel }, degeneracy, cells })
}

fn next_multiset(idx: &mut [usize], n: usize) -> bool {
    let mut k = idx.len();
    while k > 0 {
        k -= 1;
        if idx[k] + 1 < n {
            let v = idx[k] + 1;
            for slot in &mut idx[k..] {
                *slot = v;
            }
            return true;
        }
    }
    false
}

/// Diagnostic description of the cells: intervals for two worlds, inequality
/// systems otherwise.
pub fn cells_to_json(inst: &Instance, cells: &[ProperCell]) -> Value {
    let cells: Vec<Value> = cells
        .iter()
        .map(|c| {
            let mut obj = json!({
                "profile": profile_to_json(&c.profile, &inst.side_a, &inst.side_b),
                "witness": c.witness.iter().map(qjson).collect::<Vec<_>>(),
            });
            match &c.interval {
                Some((lo, hi)) => obj["interval"] = json!([fmt_q(lo), fmt_q(hi)]),
                None => {
                    obj["inequalities"] =
                        Value::Array(c.rows.iter().map(|r| json!(r.iter().map(qjson).collect::<Vec<_>>())).collect())
                }
            }
            obj
        })
        .collect();
    Value::Array(cells)
}

/// Degeneracy verdict as JSON.
pub fn degeneracy_to_json(inst: &Instance, d: &Degeneracy) -> Value {
    match d {
        Degeneracy::NonDegenerate => json!({"non_degenerate": true}),
        Degeneracy::Degenerate { witness } => json!({
            "non_degenerate": false,
            "witness": witness.iter().map(|v| {
                let opp = |y: usize| match v.owner.side {
                    Side::A => inst.side_b[y].clone(),
                    Side::B => inst.side_a[y].clone(),
                };
                json!({
                    "agent": inst.agent_name(v.owner),
                    "pair": [opp(v.pair.0), opp(v.pair.1)],
                    "vector": v.vec.iter().map(qjson).collect::<Vec<_>>(),
                })
            }).collect::<Vec<_>>(),
        }),
    }
}

/// Solution report including the optimality label and the cell dump.
pub fn solution_debug_json(inst: &Instance, sol: &WorldsSolution) -> Value {
    let matchings: Vec<Value> = sol.policy.signals.iter().map(|s| matching_to_json(&s.matching, inst)).collect();
    json!({
        "label": sol.label(),
        "cells": cells_to_json(inst, &sol.cells),
        "matchings": matchings,
    })
}
