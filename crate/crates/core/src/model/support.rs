use num::{One, Signed, Zero};

use super::posterior::posterior_of_metasignal;
use super::{Instance, MetaSignal, PublicPolicy};
use crate::error::{Error, Result};
use crate::linalg::null_space;
use crate::lp::{lp_solve, LinearProgram, LpOutcome, Relation};
use crate::rational::{dot, Q};

/// Moves weight along linear dependencies of `points` until at most
/// `points[0].len()` weights stay positive, never lowering `sum weights * values`.
///
/// The weighted mean of the points is preserved exactly.
pub fn shrink_support(points: &[Vec<Q>], values: &[Q], weights: &mut [Q]) {
    let Some(first) = points.first() else { return };
    let dim = first.len();
    loop {
        let support: Vec<usize> = (0..weights.len()).filter(|&s| weights[s].is_positive()).collect();
        if support.len() <= dim {
            return;
        }
        // Columns are the support points; find alpha with sum alpha_s * point_s = 0.
        let rows: Vec<Vec<Q>> = (0..dim)
            .map(|w| support.iter().map(|&s| points[s][w].clone()).collect())
            .collect();
        let basis = null_space(&rows, support.len());
        let mut alpha = basis.into_iter().next().expect("more points than dimensions");
        let gain = alpha
            .iter()
            .zip(&support)
            .fold(Q::zero(), |acc, (a, &s)| acc + a * &values[s]);
        if gain.is_negative() || (gain.is_zero() && !alpha.iter().any(|a| a.is_negative())) {
            for a in alpha.iter_mut() {
                *a = -a.clone();
            }
        }
        let mut step: Option<Q> = None;
        for (a, &s) in alpha.iter().zip(&support) {
            if a.is_negative() {
                let r = &weights[s] / -a;
                if step.as_ref().is_none_or(|b| r < *b) {
                    step = Some(r);
                }
            }
        }
        let step = step.expect("a dependency with zero coordinate sum has a negative entry");
        for (a, &s) in alpha.iter().zip(&support) {
            weights[s] += &step * a;
            if weights[s].is_negative() {
                weights[s] = Q::zero();
            }
        }
    }
}

/// Rewrites a stable, indicative policy onto at most `|worlds|` meta-signals
/// without lowering its utility.
pub fn reduce_policy_support(inst: &Instance, policy: &PublicPolicy) -> Result<PublicPolicy> {
    policy.validate(inst)?;
    let w = inst.num_worlds();
    let mut signals: Vec<MetaSignal> = Vec::new();
    let mut posts: Vec<Vec<Q>> = Vec::new();
    let mut phi: Vec<Q> = Vec::new();
    for (s, sig) in policy.signals.iter().enumerate() {
        if signals.contains(sig) {
            continue;
        }
        match posterior_of_metasignal(inst, policy, s) {
            Ok(p) => {
                let mass = policy
                    .signals
                    .iter()
                    .enumerate()
                    .filter(|(_, o)| *o == sig)
                    .fold(Q::zero(), |acc, (i, _)| acc + policy.marginal(inst, i));
                signals.push(sig.clone());
                posts.push(p.dist);
                phi.push(mass);
            }
            Err(Error::UnreachableSignal(_)) => {}
            Err(e) => return Err(e),
        }
    }
    let values: Vec<Q> = signals
        .iter()
        .zip(&posts)
        .map(|(sig, p)| {
            let u: Vec<Q> = (0..w).map(|j| inst.matching_utility(&sig.matching, j)).collect();
            dot(&u, p)
        })
        .collect();

    if signals.len() > w {
        let mut lp = LinearProgram::new();
        for (s, v) in values.iter().enumerate() {
            let j = lp.add_var(format!("phi{s}"));
            lp.set_objective(j, v.clone());
        }
        for j in 0..w {
            let coeffs = posts.iter().enumerate().map(|(s, p)| (s, p[j].clone())).collect();
            lp.add_constraint(coeffs, Relation::Eq, inst.prior[j].clone());
        }
        match lp_solve(&lp) {
            LpOutcome::Optimal { x, .. } => phi = x,
            _ => return Err(Error::internal("posterior decomposition program has no optimum")),
        }
        shrink_support(&posts, &values, &mut phi);
    }

    let keep: Vec<usize> = (0..signals.len()).filter(|&s| phi[s].is_positive()).collect();
    let mut kernel: Vec<Vec<Q>> = keep
        .iter()
        .map(|&s| {
            (0..w)
                .map(|j| {
                    if inst.prior[j].is_zero() {
                        Q::zero()
                    } else {
                        &phi[s] * &posts[s][j] / &inst.prior[j]
                    }
                })
                .collect()
        })
        .collect();
    for j in 0..w {
        if inst.prior[j].is_zero() {
            kernel[0][j] = Q::one();
        }
    }
    Ok(PublicPolicy {
        signals: keep.iter().map(|&s| signals[s].clone()).collect(),
        kernel,
    })
}
