//! Public persuasion of independent receivers with two actions, embedded as a matching market.

use num::{Signed, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::io::{field, string_list, table, table_json, world_map, world_map_json};
use crate::model::{Instance, Matching};
use crate::rational::{dot, q, Q};

/// Receivers choose actions; `values[i][j][w]` is receiver `i`'s payoff for
/// action `j` in world `w` and `utility[i][j][w]` the principal's payoff.
#[derive(Debug, Clone, PartialEq)]
pub struct PersuasionInstance {
    pub worlds: Vec<String>,
    pub prior: Vec<Q>,
    pub receivers: Vec<String>,
    pub actions: Vec<String>,
    pub values: Vec<Vec<Vec<Q>>>,
    pub utility: Vec<Vec<Vec<Q>>>,
}

impl PersuasionInstance {
    pub fn validate(&self) -> Result<()> {
        let w = self.worlds.len();
        if self.prior.len() != w {
            return Err(Error::input("prior length differs from world count"));
        }
        let ok = |t: &Vec<Vec<Vec<Q>>>| {
            t.len() == self.receivers.len()
                && t.iter().all(|r| r.len() == self.actions.len() && r.iter().all(|c| c.len() == w))
        };
        if !ok(&self.values) || !ok(&self.utility) {
            return Err(Error::input("payoff tables do not match receivers, actions and worlds"));
        }
        Ok(())
    }

    /// Actions maximizing receiver `i`'s expected payoff under `p`.
    pub fn best_actions(&self, i: usize, p: &[Q]) -> Vec<usize> {
        let vals: Vec<Q> = self.values[i].iter().map(|v| dot(v, p)).collect();
        let top = vals.iter().max().cloned().unwrap_or_else(Q::zero);
        (0..vals.len()).filter(|&j| vals[j] == top).collect()
    }
}

/// Index on side B of receiver `i`'s copy of action `j`.
pub fn action_copy(i: usize, j: usize) -> usize {
    2 * i + j
}

/// Side A holds the receivers then one dummy per receiver; side B holds a
/// private copy of both actions for every receiver. Everything except a
/// receiver's payoff for its own copies is world-independent and strict.
pub fn persuasion_to_matching(pp: &PersuasionInstance) -> Result<Instance> {
    pp.validate()?;
    if pp.actions.len() != 2 {
        return Err(Error::input(format!("expected exactly two actions, found {}", pp.actions.len())));
    }
    let k = pp.receivers.len();
    let n = 2 * k;
    let w = pp.worlds.len();
    let flat = |x: Q| vec![x; w];
    let bound = pp.values.iter().flatten().flatten().map(|x| x.abs()).max().unwrap_or_else(Q::zero) + q(1);
    let nq = q(n as i64);
    let mut va = vec![vec![Vec::new(); n]; n];
    let mut vb = vec![vec![Vec::new(); n]; n];
    let mut util = vec![vec![flat(Q::zero()); n]; n];
    for i in 0..k {
        for c in 0..n {
            va[i][c] = if c / 2 == i { pp.values[i][c % 2].clone() } else { flat(-&bound - q(c as i64)) };
            va[k + i][c] = flat(if c / 2 == i { &nq + q(2 - (c % 2) as i64) } else { q(c as i64) });
        }
        for j in 0..2 {
            util[i][action_copy(i, j)] = pp.utility[i][j].clone();
        }
    }
    for c in 0..n {
        let owner = c / 2;
        for a in 0..n {
            vb[c][a] = flat(if a == owner {
                q(3) * &nq
            } else if a == k + owner {
                q(2) * &nq
            } else if a >= k {
                &nq + q(a as i64)
            } else {
                q(a as i64)
            });
        }
    }
    let side_a = pp
        .receivers
        .iter()
        .cloned()
        .chain(pp.receivers.iter().map(|r| format!("dummy:{r}")))
        .collect();
    let side_b = pp
        .receivers
        .iter()
        .flat_map(|r| pp.actions.iter().map(move |j| format!("{r}:{j}")))
        .collect();
    Instance::new(pp.worlds.clone(), pp.prior.clone(), side_a, side_b, va, vb, util)
}

/// The action each receiver takes under `m`, when every receiver holds one of its own copies.
pub fn receiver_actions(k: usize, m: &Matching) -> Option<Vec<usize>> {
    (0..k)
        .map(|i| {
            let c = m.a_to_b[i];
            (c / 2 == i).then_some(c % 2)
        })
        .collect()
}

/// Format: `{"worlds", "prior", "receivers", "actions", "values": {r: {j: {w}}}, "utilities": {r: {j: {w}}}}`.
pub fn persuasion_from_value(v: &Value) -> Result<PersuasionInstance> {
    let worlds = string_list(field(v, "worlds")?, "worlds")?;
    let prior = world_map(field(v, "prior")?, &worlds, "prior")?;
    let receivers = string_list(field(v, "receivers")?, "receivers")?;
    let actions = string_list(field(v, "actions")?, "actions")?;
    let values = table(field(v, "values")?, &receivers, &actions, &worlds)?;
    let utility = table(field(v, "utilities")?, &receivers, &actions, &worlds)?;
    let pp = PersuasionInstance { worlds, prior, receivers, actions, values, utility };
    pp.validate()?;
    Ok(pp)
}

pub fn persuasion_to_json(pp: &PersuasionInstance) -> Value {
    json!({
        "worlds": pp.worlds,
        "prior": world_map_json(&pp.prior, &pp.worlds),
        "receivers": pp.receivers,
        "actions": pp.actions,
        "values": Value::Object(table_json(&pp.values, &pp.receivers, &pp.actions, &pp.worlds)),
        "utilities": Value::Object(table_json(&pp.utility, &pp.receivers, &pp.actions, &pp.worlds)),
    })
}
