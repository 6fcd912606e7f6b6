//! JSON file formats for instances, policies and profiles.

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::model::{
    Instance, Matching, MetaSignal, Policy, PreferenceProfile, PrivatePolicy, PrivateSignal,
    PublicPolicy, Side,
};
use crate::rational::{fmt_q, parse_q, Q};

pub fn parse_json(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::input(format!("invalid JSON: {e}")))
}

pub fn rational(v: &Value, ctx: &str) -> Result<Q> {
    match v {
        Value::String(s) => parse_q(s).map_err(|e| Error::input(format!("{ctx}: {e}"))),
        Value::Number(n) => parse_q(&n.to_string()),
        _ => Err(Error::input(format!("{ctx}: expected a rational"))),
    }
}

pub fn qjson(v: &Q) -> Value {
    Value::String(fmt_q(v))
}

pub fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value> {
    v.get(key).ok_or_else(|| Error::input(format!("missing field {key:?}")))
}

pub fn object<'a>(v: &'a Value, ctx: &str) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| Error::input(format!("{ctx}: expected an object")))
}

pub fn string_list(v: &Value, ctx: &str) -> Result<Vec<String>> {
    v.as_array()
        .ok_or_else(|| Error::input(format!("{ctx}: expected an array")))?
        .iter()
        .map(|x| {
            x.as_str()
                .map(str::to_string)
                .ok_or_else(|| Error::input(format!("{ctx}: expected strings")))
        })
        .collect()
}

fn lookup<'a>(v: &'a Value, keys: &[&str]) -> Result<&'a Value> {
    let mut cur = v;
    for k in keys {
        cur = cur
            .get(*k)
            .ok_or_else(|| Error::input(format!("missing entry {}", keys.join("/"))))?;
    }
    Ok(cur)
}

/// Reads `root[x][y][w]` for all listed keys into a dense table.
pub fn table(root: &Value, xs: &[String], ys: &[String], worlds: &[String]) -> Result<Vec<Vec<Vec<Q>>>> {
    xs.iter()
        .map(|x| {
            ys.iter()
                .map(|y| {
                    worlds
                        .iter()
                        .map(|w| {
                            let ctx = format!("{x}/{y}/{w}");
                            rational(lookup(root, &[x, y, w])?, &ctx)
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

pub fn table_json(t: &[Vec<Vec<Q>>], xs: &[String], ys: &[String], worlds: &[String]) -> Map<String, Value> {
    let mut out = Map::new();
    for (x, row) in xs.iter().zip(t) {
        let mut inner = Map::new();
        for (y, cell) in ys.iter().zip(row) {
            let mut per = Map::new();
            for (w, v) in worlds.iter().zip(cell) {
                per.insert(w.clone(), qjson(v));
            }
            inner.insert(y.clone(), Value::Object(per));
        }
        out.insert(x.clone(), Value::Object(inner));
    }
    out
}

pub fn world_map(v: &Value, worlds: &[String], ctx: &str) -> Result<Vec<Q>> {
    worlds
        .iter()
        .map(|w| rational(lookup(v, &[w])?, &format!("{ctx}/{w}")))
        .collect()
}

pub fn world_map_json(vals: &[Q], worlds: &[String]) -> Value {
    Value::Object(worlds.iter().zip(vals).map(|(w, v)| (w.clone(), qjson(v))).collect())
}

pub fn instance_from_value(v: &Value) -> Result<Instance> {
    let worlds = string_list(field(v, "worlds")?, "worlds")?;
    let prior = world_map(field(v, "prior")?, &worlds, "prior")?;
    let side_a = string_list(field(v, "side_a")?, "side_a")?;
    let side_b = string_list(field(v, "side_b")?, "side_b")?;
    let values = field(v, "values")?;
    let va = table(values, &side_a, &side_b, &worlds)?;
    let vb = table(values, &side_b, &side_a, &worlds)?;
    let util = table(field(v, "utilities")?, &side_a, &side_b, &worlds)?;
    Instance::new(worlds, prior, side_a, side_b, va, vb, util)
}

pub fn parse_instance(text: &str) -> Result<Instance> {
    instance_from_value(&parse_json(text)?)
}

pub fn instance_to_json(inst: &Instance) -> Value {
    let n = inst.n();
    let va: Vec<Vec<Vec<Q>>> = (0..n).map(|a| (0..n).map(|b| inst.va(a, b).to_vec()).collect()).collect();
    let vb: Vec<Vec<Vec<Q>>> = (0..n).map(|b| (0..n).map(|a| inst.vb(b, a).to_vec()).collect()).collect();
    let ut: Vec<Vec<Vec<Q>>> = (0..n).map(|a| (0..n).map(|b| inst.u(a, b).to_vec()).collect()).collect();
    let mut values = table_json(&va, &inst.side_a, &inst.side_b, &inst.worlds);
    values.extend(table_json(&vb, &inst.side_b, &inst.side_a, &inst.worlds));
    json!({
        "worlds": inst.worlds,
        "prior": world_map_json(&inst.prior, &inst.worlds),
        "side_a": inst.side_a,
        "side_b": inst.side_b,
        "values": Value::Object(values),
        "utilities": Value::Object(table_json(&ut, &inst.side_a, &inst.side_b, &inst.worlds)),
    })
}

fn index_of(names: &[String], id: &str) -> Result<usize> {
    names
        .iter()
        .position(|s| s == id)
        .ok_or_else(|| Error::input(format!("unknown id {id:?}")))
}

/// Profile format: `{agent: [[best tier ids], [next tier ids], ...]}`.
pub fn profile_from_value(v: &Value, side_a: &[String], side_b: &[String]) -> Result<PreferenceProfile> {
    let read = |own: &[String], opp: &[String]| -> Result<Vec<Vec<Vec<usize>>>> {
        own.iter()
            .map(|x| {
                let tiers = field(v, x)?
                    .as_array()
                    .ok_or_else(|| Error::input(format!("profile of {x:?} must be an array")))?;
                tiers
                    .iter()
                    .map(|t| match t {
                        Value::String(s) => Ok(vec![index_of(opp, s)?]),
                        Value::Array(ids) => ids
                            .iter()
                            .map(|id| {
                                let s = id.as_str().ok_or_else(|| Error::input("tier ids must be strings"))?;
                                index_of(opp, s)
                            })
                            .collect(),
                        _ => Err(Error::input("tier must be an id or an array of ids")),
                    })
                    .collect()
            })
            .collect()
    };
    let p = PreferenceProfile {
        a: read(side_a, side_b)?,
        b: read(side_b, side_a)?,
    };
    p.check_shape(side_a.len(), side_b.len())?;
    Ok(p)
}

pub fn profile_to_json(p: &PreferenceProfile, side_a: &[String], side_b: &[String]) -> Value {
    let mut out = Map::new();
    for (side, own, opp) in [(Side::A, side_a, side_b), (Side::B, side_b, side_a)] {
        for (x, name) in own.iter().enumerate() {
            let tiers: Vec<Value> = p
                .tiers(side, x)
                .iter()
                .map(|t| Value::Array(t.iter().map(|&y| Value::String(opp[y].clone())).collect()))
                .collect();
            out.insert(name.clone(), Value::Array(tiers));
        }
    }
    Value::Object(out)
}

pub fn matching_from_value(v: &Value, inst: &Instance) -> Result<Matching> {
    let obj = object(v, "matching")?;
    let mut a_to_b = vec![usize::MAX; inst.n()];
    for (a, b) in obj {
        let ai = index_of(&inst.side_a, a)?;
        let b = b.as_str().ok_or_else(|| Error::input("matching partners must be strings"))?;
        a_to_b[ai] = index_of(&inst.side_b, b)?;
    }
    if a_to_b.contains(&usize::MAX) {
        return Err(Error::input("matching must pair every agent of side A"));
    }
    Matching::new(a_to_b)
}

pub fn matching_to_json(m: &Matching, inst: &Instance) -> Value {
    Value::Object(
        m.a_to_b
            .iter()
            .enumerate()
            .map(|(a, &b)| (inst.side_a[a].clone(), Value::String(inst.side_b[b].clone())))
            .collect(),
    )
}

pub fn policy_from_value(v: &Value, inst: &Instance) -> Result<Policy> {
    let mode = field(v, "mode")?
        .as_str()
        .ok_or_else(|| Error::input("mode must be a string"))?;
    let signals = field(v, "signals")?
        .as_array()
        .ok_or_else(|| Error::input("signals must be an array"))?;
    let mut kernel = Vec::new();
    let policy = match mode {
        "public" => {
            let mut out = Vec::new();
            for s in signals {
                let profile = match s.get("profile") {
                    Some(Value::Null) | None => None,
                    Some(p) => Some(profile_from_value(p, &inst.side_a, &inst.side_b)?),
                };
                let tag = s.get("tag").and_then(Value::as_str).map(str::to_string);
                out.push(MetaSignal {
                    profile,
                    matching: matching_from_value(field(s, "matching")?, inst)?,
                    tag,
                });
                kernel.push(world_map(field(s, "kernel")?, &inst.worlds, "kernel")?);
            }
            Policy::Public(PublicPolicy { signals: out, kernel })
        }
        "private" => {
            let mut out = Vec::new();
            for s in signals {
                let joint = field(s, "joint_signal")?;
                let components = inst
                    .side_a
                    .iter()
                    .chain(&inst.side_b)
                    .map(|x| {
                        field(joint, x)?
                            .as_str()
                            .map(str::to_string)
                            .ok_or_else(|| Error::input("signal components must be strings"))
                    })
                    .collect::<Result<Vec<_>>>()?;
                out.push(PrivateSignal {
                    components,
                    matching: matching_from_value(field(s, "matching")?, inst)?,
                });
                kernel.push(world_map(field(s, "kernel")?, &inst.worlds, "kernel")?);
            }
            Policy::Private(PrivatePolicy { signals: out, kernel })
        }
        other => return Err(Error::input(format!("unknown policy mode {other:?}"))),
    };
    policy.validate(inst)?;
    Ok(policy)
}

pub fn parse_policy(text: &str, inst: &Instance) -> Result<Policy> {
    policy_from_value(&parse_json(text)?, inst)
}

pub fn policy_to_json(policy: &Policy, inst: &Instance) -> Value {
    let utility = crate::model::policy_utility(inst, policy);
    let signals: Vec<Value> = match policy {
        Policy::Public(p) => p
            .signals
            .iter()
            .zip(&p.kernel)
            .map(|(s, k)| {
                let mut o = Map::new();
                o.insert(
                    "profile".into(),
                    s.profile
                        .as_ref()
                        .map_or(Value::Null, |pr| profile_to_json(pr, &inst.side_a, &inst.side_b)),
                );
                o.insert("matching".into(), matching_to_json(&s.matching, inst));
                if let Some(t) = &s.tag {
                    o.insert("tag".into(), Value::String(t.clone()));
                }
                o.insert("kernel".into(), world_map_json(k, &inst.worlds));
                Value::Object(o)
            })
            .collect(),
        Policy::Private(p) => p
            .signals
            .iter()
            .zip(&p.kernel)
            .map(|(s, k)| {
                let joint: Map<String, Value> = inst
                    .side_a
                    .iter()
                    .chain(&inst.side_b)
                    .zip(&s.components)
                    .map(|(x, c)| (x.clone(), Value::String(c.clone())))
                    .collect();
                json!({
                    "joint_signal": Value::Object(joint),
                    "matching": matching_to_json(&s.matching, inst),
                    "kernel": world_map_json(k, &inst.worlds),
                })
            })
            .collect(),
    };
    json!({
        "mode": match policy { Policy::Public(_) => "public", Policy::Private(_) => "private" },
        "signals": signals,
        "utility": qjson(&utility),
    })
}

pub fn to_pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}
