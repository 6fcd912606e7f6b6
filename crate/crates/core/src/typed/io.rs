use num::BigInt;
use serde_json::{json, Map, Value};

use super::{TypedInstance, TypedPolicy, TypedView};
use crate::error::{Error, Result};
use crate::io::{field, object, parse_json, profile_to_json, qjson, string_list, table, table_json, world_map, world_map_json};

fn sizes(v: &Value, ctx: &str) -> Result<(Vec<String>, Vec<BigInt>)> {
    let mut names = Vec::new();
    let mut out = Vec::new();
    for (k, s) in object(v, ctx)? {
        let text = match s {
            Value::String(s) => s.clone(),
            Value::Number(n) => n.to_string(),
            _ => return Err(Error::input(format!("{ctx}/{k}: expected an integer size"))),
        };
        let size: BigInt = text
            .trim()
            .parse()
            .map_err(|_| Error::input(format!("{ctx}/{k}: invalid integer {text:?}")))?;
        names.push(k.clone());
        out.push(size);
    }
    Ok((names, out))
}

pub fn typed_instance_from_value(v: &Value) -> Result<TypedInstance> {
    let worlds = string_list(field(v, "worlds")?, "worlds")?;
    let prior = world_map(field(v, "prior")?, &worlds, "prior")?;
    let types = field(v, "types")?;
    let (a_types, a_sizes) = sizes(field(types, "a")?, "types/a")?;
    let (b_types, b_sizes) = sizes(field(types, "b")?, "types/b")?;
    let values = field(v, "values")?;
    let ti = TypedInstance {
        va: table(values, &a_types, &b_types, &worlds)?,
        vb: table(values, &b_types, &a_types, &worlds)?,
        util: table(field(v, "utilities")?, &a_types, &b_types, &worlds)?,
        worlds,
        prior,
        a_types,
        b_types,
        a_sizes,
        b_sizes,
    };
    ti.validate()?;
    Ok(ti)
}

pub fn parse_typed_instance(text: &str) -> Result<TypedInstance> {
    typed_instance_from_value(&parse_json(text)?)
}

fn sizes_json(names: &[String], sizes: &[BigInt]) -> Value {
    Value::Object(names.iter().zip(sizes).map(|(n, s)| (n.clone(), Value::String(s.to_string()))).collect())
}

pub fn typed_instance_to_json(ti: &TypedInstance) -> Value {
    let mut values = table_json(&ti.va, &ti.a_types, &ti.b_types, &ti.worlds);
    values.extend(table_json(&ti.vb, &ti.b_types, &ti.a_types, &ti.worlds));
    json!({
        "worlds": ti.worlds,
        "prior": world_map_json(&ti.prior, &ti.worlds),
        "types": {"a": sizes_json(&ti.a_types, &ti.a_sizes), "b": sizes_json(&ti.b_types, &ti.b_sizes)},
        "values": Value::Object(values),
        "utilities": Value::Object(table_json(&ti.util, &ti.a_types, &ti.b_types, &ti.worlds)),
    })
}

/// Policy format: matchings as nonzero counts per type pair; public signals
/// carry a type-level profile, private ones a component per subtype keyed
/// `"own|partner"`.
pub fn typed_policy_to_json(ti: &TypedInstance, tp: &TypedPolicy) -> Value {
    let signals: Vec<Value> = tp
        .signals
        .iter()
        .zip(&tp.kernel)
        .map(|(sig, row)| {
            let mut counts = Map::new();
            for (s, r) in sig.matching.counts.iter().enumerate() {
                let inner: Map<String, Value> = r
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| *c != &BigInt::from(0))
                    .map(|(t, c)| (ti.b_types[t].clone(), Value::String(c.to_string())))
                    .collect();
                counts.insert(ti.a_types[s].clone(), Value::Object(inner));
            }
            let mut obj = Map::new();
            obj.insert("matching".into(), Value::Object(counts));
            match &sig.view {
                TypedView::Public(p) => {
                    obj.insert("profile".into(), profile_to_json(p, &ti.a_types, &ti.b_types));
                }
                TypedView::Private(labels) => {
                    let comps: Map<String, Value> = labels
                        .iter()
                        .map(|(st, l)| {
                            let key = format!(
                                "{}|{}",
                                ti.type_name(st.side, st.own),
                                ti.type_name(st.side.other(), st.partner)
                            );
                            (key, Value::String(l.clone()))
                        })
                        .collect();
                    obj.insert("components".into(), Value::Object(comps));
                }
            }
            obj.insert("kernel".into(), world_map_json(row, &ti.worlds));
            Value::Object(obj)
        })
        .collect();
    json!({
        "mode": if tp.is_private() { "private" } else { "public" },
        "signals": signals,
        "utility": qjson(&tp.utility(ti)),
    })
}
