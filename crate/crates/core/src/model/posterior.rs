use num::Zero;

use super::{Agent, Instance, Matching, Posterior, PrivatePolicy, PublicPolicy, Side};
use crate::error::{Error, Result};
use crate::rational::{dot, sum, Q};

pub fn value_at(values: &[Q], p: &[Q]) -> Q {
    dot(values, p)
}

/// `v_x(y | p)` for agents named `x` and `y` on opposite sides.
pub fn value_under_posterior(inst: &Instance, x: &str, y: &str, p: &Posterior) -> Result<Q> {
    let ax = inst.agent(x)?;
    let ay = inst.agent(y)?;
    if ax.side == ay.side {
        return Err(Error::input(format!("{x:?} and {y:?} are on the same side")));
    }
    if p.dist.len() != inst.num_worlds() {
        return Err(Error::input("posterior length differs from world count"));
    }
    let v = match ax.side {
        Side::A => inst.va(ax.idx, ay.idx),
        Side::B => inst.vb(ax.idx, ay.idx),
    };
    Ok(value_at(v, &p.dist))
}

pub(crate) fn normalize(mass: Vec<Q>) -> Option<Posterior> {
    let total = sum(&mass);
    if total.is_zero() {
        return None;
    }
    Some(Posterior {
        dist: mass.into_iter().map(|m| m / &total).collect(),
    })
}

/// Bayes posterior after observing signal `s`. Entries of the policy that
/// carry an identical meta-signal are indistinguishable and are pooled.
pub fn posterior_of_metasignal(inst: &Instance, policy: &PublicPolicy, s: usize) -> Result<Posterior> {
    let target = policy
        .signals
        .get(s)
        .ok_or_else(|| Error::input(format!("signal index {s} out of range")))?;
    let w = inst.num_worlds();
    let mut mass = vec![Q::zero(); w];
    for (sig, row) in policy.signals.iter().zip(&policy.kernel) {
        if sig == target {
            for j in 0..w {
                mass[j] += &inst.prior[j] * &row[j];
            }
        }
    }
    normalize(mass).ok_or_else(|| Error::UnreachableSignal(format!("signal {s} has zero probability")))
}

/// Posterior of agent `x` after privately observing component `g_x` with matching `m`.
pub fn private_posterior(
    inst: &Instance,
    policy: &PrivatePolicy,
    x: Agent,
    g_x: &str,
    m: &Matching,
) -> Result<Posterior> {
    let n = inst.n();
    let w = inst.num_worlds();
    let mut mass = vec![Q::zero(); w];
    for (sig, row) in policy.signals.iter().zip(&policy.kernel) {
        if sig.matching == *m && sig.component(x, n) == g_x {
            for j in 0..w {
                mass[j] += &inst.prior[j] * &row[j];
            }
        }
    }
    normalize(mass).ok_or_else(|| {
        Error::UnreachableSignal(format!(
            "agent {} never observes component {g_x:?} with this matching",
            inst.agent_name(x)
        ))
    })
}
