//! Instance transformers between stable marriage with ties, weighted stable
//! matching, private persuasion and multi-receiver public persuasion.

mod gadget;
mod persuasion;
mod smti;

pub use gadget::{build_proof_policy, dummy_pair_posteriors, wsm_to_private_persuasion};
pub use persuasion::{
    action_copy, persuasion_from_value, persuasion_to_json, persuasion_to_matching, receiver_actions,
    PersuasionInstance,
};
pub use smti::{
    max_stable_size, smti_from_value, smti_restrict, smti_to_json, smti_to_wsm, RestrictBookkeeping, SmtiInstance,
    DEFAULT_SMTI_NODE_CAP,
};

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::io::{field, object, profile_from_value, profile_to_json, qjson, rational, string_list};
use crate::matching::WsmProblem;

/// Format: `{"a": [ids], "b": [ids], "profile": {agent: [[tier ids], ...]}, "weights": {a: {b: q}}}`;
/// missing weights are zero.
pub fn wsm_from_value(v: &Value) -> Result<(Vec<String>, Vec<String>, WsmProblem)> {
    let a = string_list(field(v, "a")?, "a")?;
    let b = string_list(field(v, "b")?, "b")?;
    if a.len() != b.len() {
        return Err(Error::input("both sides must have the same number of agents"));
    }
    let profile = profile_from_value(field(v, "profile")?, &a, &b)?;
    let empty = Value::Object(Map::new());
    let table = object(v.get("weights").unwrap_or(&empty), "weights")?;
    let mut weights = Vec::with_capacity(a.len());
    for x in &a {
        let row = object(table.get(x).unwrap_or(&empty), x)?;
        weights.push(
            b.iter()
                .map(|y| row.get(y).map_or(Ok(num::Zero::zero()), |q| rational(q, &format!("{x}/{y}"))))
                .collect::<Result<Vec<_>>>()?,
        );
    }
    let prob = WsmProblem { profile, weights };
    prob.validate()?;
    Ok((a, b, prob))
}

pub fn wsm_to_json(a: &[String], b: &[String], w: &WsmProblem) -> Value {
    let weights: Map<String, Value> = a
        .iter()
        .zip(&w.weights)
        .map(|(x, row)| (x.clone(), Value::Object(b.iter().zip(row).map(|(y, q)| (y.clone(), qjson(q))).collect())))
        .collect();
    json!({ "a": a, "b": b, "profile": profile_to_json(&w.profile, a, b), "weights": weights })
}
