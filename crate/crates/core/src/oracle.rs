//! Brute-force reference solvers for tiny instances.

use num::{Signed, Zero};

use crate::cells::feasible_profiles;
use crate::error::{Error, Result};
use crate::lp::{lp_solve, LinearProgram, LpOutcome, Relation};
use crate::matching::all_matchings;
use crate::model::{
    all_strict_orders, all_weak_orders, stable_under_profile, Instance, Matching, MetaSignal,
    PreferenceProfile, PublicPolicy,
};
use crate::rational::{dot, Q};

const PROFILE_CAP: usize = 200_000;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub value: Q,
    pub policy: PublicPolicy,
}

struct Block {
    profile: PreferenceProfile,
    rows: Vec<Vec<Q>>,
    matching: Matching,
}

/// Solves the master program over (profile, matching) pairs with one
/// variable per pair and world, per-world simplex rows, cell rows scaled by the
/// prior, and pairs whose matching is unstable under the profile left out.
fn solve_blocks(inst: &Instance, blocks: &[Block]) -> Result<OracleResult> {
    let w = inst.num_worlds();
    let mut lp = LinearProgram::new();
    for (k, b) in blocks.iter().enumerate() {
        for j in 0..w {
            let var = lp.add_var(format!("s{k}_{j}"));
            lp.set_objective(var, &inst.prior[j] * inst.matching_utility(&b.matching, j));
        }
    }
    for (k, b) in blocks.iter().enumerate() {
        for r in &b.rows {
            let coeffs: Vec<(usize, Q)> = (0..w)
                .filter(|&j| !(&inst.prior[j] * &r[j]).is_zero())
                .map(|j| (k * w + j, &inst.prior[j] * &r[j]))
                .collect();
            if !coeffs.is_empty() {
                lp.add_constraint(coeffs, Relation::Le, Q::zero());
            }
        }
    }
    for j in 0..w {
        lp.add_constraint(
            (0..blocks.len()).map(|k| (k * w + j, Q::from_integer(1.into()))).collect(),
            Relation::Eq,
            Q::from_integer(1.into()),
        );
    }
    let (value, x) = match lp_solve(&lp) {
        LpOutcome::Optimal { value, x } => (value, x),
        _ => return Err(Error::internal("master program has no optimum")),
    };
    let mut signals = Vec::new();
    let mut kernel = Vec::new();
    for (k, b) in blocks.iter().enumerate() {
        let row: Vec<Q> = x[k * w..(k + 1) * w].to_vec();
        if row.iter().any(|v| v.is_positive()) {
            signals.push(MetaSignal {
                profile: Some(b.profile.clone()),
                matching: b.matching.clone(),
                tag: None,
            });
            kernel.push(row);
        }
    }
    Ok(OracleResult {
        value,
        policy: PublicPolicy { signals, kernel },
    })
}

fn profile_space(inst: &Instance) -> Result<Vec<(PreferenceProfile, Vec<Vec<Q>>)>> {
    let n = inst.n();
    let orders = match n {
        0..=2 => all_weak_orders(n),
        3 => all_strict_orders(n),
        _ => return Err(Error::capacity(format!("oracle supports n <= 3, got {n}"))),
    };
    feasible_profiles(inst, &orders, &orders, PROFILE_CAP)
}

/// Optimal public policy by exhaustive enumeration of preference profiles.
///
/// For `n <= 2` every weak order is considered; for `n = 3` only strict
/// orders, which is exact for non-degenerate instances.
pub fn solve_oracle_public(inst: &Instance) -> Result<OracleResult> {
    inst.validate()?;
    let space = profile_space(inst)?;
    let mut blocks = Vec::new();
    for (profile, rows) in space {
        for m in all_matchings(inst.n()) {
            if stable_under_profile(&profile, &m) {
                blocks.push(Block { profile: profile.clone(), rows: rows.clone(), matching: m });
            }
        }
    }
    solve_blocks(inst, &blocks)
}

/// Best policy whose only signal is the selected matching.
///
/// Each matching is assigned one weak-order cell (or left unused); the
/// posterior it induces must lie in that cell and the matching must be stable
/// under the cell's order.
pub fn solve_oracle_restricted(inst: &Instance) -> Result<OracleResult> {
    inst.validate()?;
    let n = inst.n();
    if n > 2 || inst.num_worlds() != 2 {
        return Err(Error::capacity("restricted oracle supports n <= 2 and exactly two worlds"));
    }
    let orders = all_weak_orders(n);
    let space = feasible_profiles(inst, &orders, &orders, PROFILE_CAP)?;
    let matchings: Vec<Matching> = all_matchings(n).collect();
    let options: Vec<Vec<Option<usize>>> = matchings
        .iter()
        .map(|m| {
            let mut o = vec![None];
            o.extend(
                space
                    .iter()
                    .enumerate()
                    .filter(|(_, (p, _))| stable_under_profile(p, m))
                    .map(|(i, _)| Some(i)),
            );
            o
        })
        .collect();
    let mut best: Option<OracleResult> = None;
    let mut choice = vec![0usize; matchings.len()];
    loop {
        let blocks: Vec<Block> = matchings
            .iter()
            .zip(&choice)
            .enumerate()
            .filter_map(|(k, (m, &c))| {
                options[k][c].map(|i| Block {
                    profile: space[i].0.clone(),
                    rows: space[i].1.clone(),
                    matching: m.clone(),
                })
            })
            .collect();
        if !blocks.is_empty() {
            if let Ok(r) = solve_blocks(inst, &blocks) {
                if best.as_ref().is_none_or(|b| r.value > b.value) {
                    best = Some(r);
                }
            }
        }
        // Next assignment in mixed-radix order.
        let mut k = 0;
        loop {
            if k == choice.len() {
                return best.ok_or_else(|| Error::internal("no stable matching-only policy"));
            }
            choice[k] += 1;
            if choice[k] < options[k].len() {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
    }
}

/// Best stable matching under the prior belief alone.
pub fn no_signal_value(inst: &Instance) -> Result<(Matching, Q)> {
    let profile = crate::model::induced_profile(inst, &inst.prior, None)?;
    let weights = (0..inst.n())
        .map(|a| (0..inst.n()).map(|b| dot(inst.u(a, b), &inst.prior)).collect())
        .collect();
    crate::matching::wsm_brute(
        &crate::matching::WsmProblem { profile, weights },
        crate::matching::DEFAULT_BRUTE_CAP,
    )
}
