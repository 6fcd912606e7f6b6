use std::collections::HashMap;

use num::Zero;

use super::posterior::{normalize, posterior_of_metasignal, private_posterior};
use super::profile::{in_cell, induced_profile, order_label};
use super::{Agent, Instance, Matching, Policy, Posterior, PrivatePolicy, PublicPolicy, Side};
use crate::error::{Error, Result};
use crate::rational::{dot, Q};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockingPair {
    pub a: usize,
    pub b: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StabilityReport {
    pub stable: bool,
    pub blocking: Vec<BlockingPair>,
}

/// A meta-signal whose matching is blocked at the belief(s) it induces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolicyViolation {
    pub signal: usize,
    pub pair: BlockingPair,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StabilityCertificate {
    pub stable: bool,
    pub violations: Vec<PolicyViolation>,
}

/// Blocking pairs of `m` when agent `a` holds belief `pa[a]` and agent `b` holds `pb[b]`.
pub fn blocking_pairs_at(inst: &Instance, m: &Matching, pa: &[&[Q]], pb: &[&[Q]]) -> Vec<BlockingPair> {
    let n = inst.n();
    let inv = m.b_to_a();
    let cur_a: Vec<Q> = (0..n).map(|a| dot(inst.va(a, m.a_to_b[a]), pa[a])).collect();
    let cur_b: Vec<Q> = (0..n).map(|b| dot(inst.vb(b, inv[b]), pb[b])).collect();
    let mut out = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if m.a_to_b[a] == b {
                continue;
            }
            if dot(inst.va(a, b), pa[a]) > cur_a[a] && dot(inst.vb(b, a), pb[b]) > cur_b[b] {
                out.push(BlockingPair { a, b });
            }
        }
    }
    out
}

/// Weak stability of `m` when every agent holds belief `p`.
pub fn is_stable_matching(inst: &Instance, m: &Matching, p: &Posterior) -> StabilityReport {
    let n = inst.n();
    let refs: Vec<&[Q]> = vec![&p.dist[..]; n];
    let blocking = blocking_pairs_at(inst, m, &refs, &refs);
    StabilityReport {
        stable: blocking.is_empty(),
        blocking,
    }
}

/// Checks every reachable meta-signal of `policy`.
pub fn is_stable_policy(inst: &Instance, policy: &Policy) -> Result<StabilityCertificate> {
    policy.validate(inst)?;
    let n = inst.n();
    let mut violations = Vec::new();
    match policy {
        Policy::Public(pp) => {
            for (s, sig) in pp.signals.iter().enumerate() {
                if pp.signals[..s].contains(sig) {
                    continue;
                }
                let post = match posterior_of_metasignal(inst, pp, s) {
                    Ok(p) => p,
                    Err(Error::UnreachableSignal(_)) => continue,
                    Err(e) => return Err(e),
                };
                for pair in is_stable_matching(inst, &sig.matching, &post).blocking {
                    violations.push(PolicyViolation { signal: s, pair });
                }
            }
        }
        Policy::Private(pp) => {
            let mut cache: HashMap<(Agent, String, Matching), Posterior> = HashMap::new();
            for (s, sig) in pp.signals.iter().enumerate() {
                if pp.marginal(inst, s).is_zero() || pp.signals[..s].contains(sig) {
                    continue;
                }
                let mut belief = |x: Agent| -> Result<Vec<Q>> {
                    let key = (x, sig.component(x, n).to_string(), sig.matching.clone());
                    if let Some(p) = cache.get(&key) {
                        return Ok(p.dist.clone());
                    }
                    let p = private_posterior(inst, pp, x, &key.1, &sig.matching)?;
                    let d = p.dist.clone();
                    cache.insert(key, p);
                    Ok(d)
                };
                let pa: Vec<Vec<Q>> = (0..n)
                    .map(|i| belief(Agent { side: Side::A, idx: i }))
                    .collect::<Result<_>>()?;
                let pb: Vec<Vec<Q>> = (0..n)
                    .map(|i| belief(Agent { side: Side::B, idx: i }))
                    .collect::<Result<_>>()?;
                let ra: Vec<&[Q]> = pa.iter().map(|v| &v[..]).collect();
                let rb: Vec<&[Q]> = pb.iter().map(|v| &v[..]).collect();
                for pair in blocking_pairs_at(inst, &sig.matching, &ra, &rb) {
                    violations.push(PolicyViolation { signal: s, pair });
                }
            }
        }
    }
    Ok(StabilityCertificate {
        stable: violations.is_empty(),
        violations,
    })
}

/// Whether every reachable meta-signal's posterior lies in the cell of its declared profile.
pub fn is_indicative(inst: &Instance, policy: &PublicPolicy) -> Result<bool> {
    policy.validate(inst)?;
    for (s, sig) in policy.signals.iter().enumerate() {
        let Some(profile) = &sig.profile else {
            return Err(Error::input(format!("signal {s} carries no preference profile")));
        };
        let post = match posterior_of_metasignal(inst, policy, s) {
            Ok(p) => p,
            Err(Error::UnreachableSignal(_)) => continue,
            Err(e) => return Err(e),
        };
        if !in_cell(inst, profile, &post.dist) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Whether every component of every reachable joint signal names the order
/// (as rendered by `order_label`) that its holder's private posterior induces.
pub fn is_private_indicative(inst: &Instance, policy: &PrivatePolicy) -> Result<bool> {
    Policy::Private(policy.clone()).validate(inst)?;
    let n = inst.n();
    for (s, sig) in policy.signals.iter().enumerate() {
        if policy.marginal(inst, s).is_zero() {
            continue;
        }
        for side in [Side::A, Side::B] {
            let names = match side {
                Side::A => &inst.side_b,
                Side::B => &inst.side_a,
            };
            for idx in 0..n {
                let x = Agent { side, idx };
                let g = sig.component(x, n);
                let post = private_posterior(inst, policy, x, g, &sig.matching)?;
                let profile = induced_profile(inst, &post.dist, None)?;
                if order_label(names, profile.tiers(side, idx)) != g {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Expected principal utility of `policy`.
pub fn policy_utility(inst: &Instance, policy: &Policy) -> Q {
    let mut total = Q::zero();
    for (s, row) in policy.kernel().iter().enumerate() {
        let m = policy.matching(s);
        for (j, k) in row.iter().enumerate() {
            if k.is_zero() || inst.prior[j].is_zero() {
                continue;
            }
            total += &inst.prior[j] * k * inst.matching_utility(m, j);
        }
    }
    total
}

/// Whether the probability-weighted average of signal posteriors equals the prior.
pub fn bayes_plausible(inst: &Instance, policy: &Policy) -> bool {
    let w = inst.num_worlds();
    let kernel = policy.kernel();
    let mut avg = vec![Q::zero(); w];
    for row in kernel {
        let mass: Vec<Q> = (0..w).map(|j| &inst.prior[j] * &row[j]).collect();
        let weight: Q = mass.iter().fold(Q::zero(), |a, b| a + b);
        if let Some(p) = normalize(mass) {
            for j in 0..w {
                avg[j] += &weight * &p.dist[j];
            }
        }
    }
    avg == inst.prior
}
