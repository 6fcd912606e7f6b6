use num::{BigInt, ToPrimitive};

use super::{subtypes_of, PrototypeMatching, Subtype, TypedInstance, TypedPolicy, TypedView};
use crate::error::{Error, Result};
use crate::model::{
    induced_profile, order_label, private_posterior, Agent, Instance, Matching, MetaSignal, Policy,
    PreferenceProfile, PrivatePolicy, PrivateSignal, PublicPolicy, Side,
};
use num::Zero;

fn sizes(v: &[BigInt], cap: usize) -> Result<Vec<usize>> {
    let total: BigInt = v.iter().sum();
    match total.to_usize() {
        Some(n) if n <= cap => Ok(v.iter().map(|s| s.to_usize().expect("bounded by total")).collect()),
        _ => Err(Error::capacity(format!("expansion needs at most {cap} agents per side, got {total}"))),
    }
}

fn offsets(sizes: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(sizes.len());
    let mut acc = 0;
    for s in sizes {
        out.push(acc);
        acc += s;
    }
    out
}

/// The agent-level market: agents of type `X` are named `X.1`, `X.2`, ... and
/// listed type by type.
pub fn type_level_instance(ti: &TypedInstance, cap: usize) -> Result<Instance> {
    ti.validate()?;
    let sa = sizes(&ti.a_sizes, cap)?;
    let sb = sizes(&ti.b_sizes, cap)?;
    let names = |types: &[String], sizes: &[usize]| -> Vec<String> {
        types.iter().zip(sizes).flat_map(|(t, &k)| (1..=k).map(move |i| format!("{t}.{i}"))).collect()
    };
    let class = |sizes: &[usize]| -> Vec<usize> {
        sizes.iter().enumerate().flat_map(|(c, &k)| std::iter::repeat_n(c, k)).collect()
    };
    let inst = Instance {
        worlds: ti.worlds.clone(),
        prior: ti.prior.clone(),
        side_a: names(&ti.a_types, &sa),
        side_b: names(&ti.b_types, &sb),
        a_class: class(&sa),
        b_class: class(&sb),
        va: ti.va.clone(),
        vb: ti.vb.clone(),
        util: ti.util.clone(),
    };
    inst.validate()?;
    Ok(inst)
}

/// Pairs agents type block by type block in index order.
fn concrete_matching(m: &PrototypeMatching, sa: &[usize], sb: &[usize]) -> Result<Matching> {
    let oa = offsets(sa);
    let ob = offsets(sb);
    let mut next_a = oa.clone();
    let mut next_b = ob.clone();
    let n: usize = sa.iter().sum();
    let mut a_to_b = vec![usize::MAX; n];
    for (s, row) in m.counts.iter().enumerate() {
        for (t, c) in row.iter().enumerate() {
            let c = c.to_usize().ok_or_else(|| Error::input("count exceeds the market size"))?;
            for _ in 0..c {
                a_to_b[next_a[s]] = next_b[t];
                next_a[s] += 1;
                next_b[t] += 1;
            }
        }
    }
    Matching::new(a_to_b)
}

fn agent_profile(ti: &TypedInstance, profile: &PreferenceProfile, sa: &[usize], sb: &[usize]) -> PreferenceProfile {
    let oa = offsets(sa);
    let ob = offsets(sb);
    let block = |offs: &[usize], sizes: &[usize], t: usize| (offs[t]..offs[t] + sizes[t]).collect::<Vec<usize>>();
    let mut out = PreferenceProfile { a: Vec::new(), b: Vec::new() };
    for (s, &k) in sa.iter().enumerate() {
        let tiers: Vec<Vec<usize>> = profile.a[s].iter().map(|tier| tier.iter().flat_map(|&t| block(&ob, sb, t)).collect()).collect();
        out.a.extend(std::iter::repeat_n(tiers, k));
    }
    for (t, &k) in sb.iter().enumerate() {
        let tiers: Vec<Vec<usize>> = profile.b[t].iter().map(|tier| tier.iter().flat_map(|&s| block(&oa, sa, s)).collect()).collect();
        out.b.extend(std::iter::repeat_n(tiers, k));
    }
    debug_assert_eq!(out.a.len(), ti.a_sizes.iter().sum::<BigInt>().to_usize().unwrap_or(0));
    out
}

/// Materializes a type-level policy over individual agents.
pub fn expand_typed_policy(ti: &TypedInstance, tp: &TypedPolicy, cap: usize) -> Result<(Instance, Policy)> {
    let inst = type_level_instance(ti, cap)?;
    let sa = sizes(&ti.a_sizes, cap)?;
    let sb = sizes(&ti.b_sizes, cap)?;
    let n = inst.n();
    if !tp.is_private() {
        let mut signals = Vec::new();
        for sig in &tp.signals {
            let TypedView::Public(profile) = &sig.view else { unreachable!() };
            signals.push(MetaSignal {
                profile: Some(agent_profile(ti, profile, &sa, &sb)),
                matching: concrete_matching(&sig.matching, &sa, &sb)?,
                tag: None,
            });
        }
        return Ok((inst, Policy::Public(PublicPolicy { signals, kernel: tp.kernel.clone() })));
    }
    let mut signals = Vec::new();
    for sig in &tp.signals {
        let TypedView::Private(labels) = &sig.view else {
            return Err(Error::input("policy mixes public and private signals"));
        };
        let m = concrete_matching(&sig.matching, &sa, &sb)?;
        let b_to_a = m.b_to_a();
        let label = |st: Subtype| {
            labels
                .get(&st)
                .cloned()
                .ok_or_else(|| Error::input(format!("no component for subtype {st:?}")))
        };
        let mut components = Vec::with_capacity(2 * n);
        for a in 0..n {
            components.push(label(Subtype { side: Side::A, own: inst.a_class[a], partner: inst.b_class[m.a_to_b[a]] })?);
        }
        for b in 0..n {
            components.push(label(Subtype { side: Side::B, own: inst.b_class[b], partner: inst.a_class[b_to_a[b]] })?);
        }
        debug_assert!(subtypes_of(&sig.matching).iter().all(|s| labels.contains_key(s)));
        signals.push(PrivateSignal { components, matching: m });
    }
    Ok((inst, Policy::Private(PrivatePolicy { signals, kernel: tp.kernel.clone() })))
}

/// Whether every component of an expanded private policy names the type-level
/// order its holder's private posterior induces.
pub fn typed_private_indicative(ti: &TypedInstance, inst: &Instance, policy: &PrivatePolicy) -> Result<bool> {
    Policy::Private(policy.clone()).validate(inst)?;
    let n = inst.n();
    for (s, sig) in policy.signals.iter().enumerate() {
        if policy.marginal(inst, s).is_zero() {
            continue;
        }
        for side in [Side::A, Side::B] {
            let (names, class) = match side {
                Side::A => (&ti.b_types, &inst.b_class),
                Side::B => (&ti.a_types, &inst.a_class),
            };
            for idx in 0..n {
                let x = Agent { side, idx };
                let g = sig.component(x, n);
                let post = private_posterior(inst, policy, x, g, &sig.matching)?;
                let profile = induced_profile(inst, &post.dist, None)?;
                let mut tiers: Vec<Vec<usize>> = Vec::new();
                for tier in profile.tiers(side, idx) {
                    let mut t: Vec<usize> = tier.iter().map(|&y| class[y]).collect();
                    t.sort_unstable();
                    t.dedup();
                    tiers.push(t);
                }
                if order_label(names, &tiers) != g {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}
