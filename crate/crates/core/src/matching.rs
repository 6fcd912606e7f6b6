//! Stable matching algorithms: deferred acceptance, weighted stable matching
//! through the stable-matching polytope, and exhaustive search with ties.

use std::collections::VecDeque;

use itertools::Itertools;
use num::Zero;

use crate::error::{Error, Result};
use crate::lp::{lp_solve, LinearProgram, LpOutcome, Relation};
use crate::model::{stable_under_profile, Matching, PreferenceProfile, Side};
use crate::rational::{is_integer, Q};

pub const DEFAULT_BRUTE_CAP: usize = 7;

/// Weighted stable matching: maximize total pair weight over stable matchings.
#[derive(Debug, Clone, PartialEq)]
pub struct WsmProblem {
    pub profile: PreferenceProfile,
    /// `weights[a][b]`.
    pub weights: Vec<Vec<Q>>,
}

impl WsmProblem {
    pub fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        self.profile.check_shape(n, n)?;
        if self.weights.iter().any(|r| r.len() != n) {
            return Err(Error::input("weights must be a square table"));
        }
        Ok(())
    }

    pub fn value(&self, m: &Matching) -> Q {
        m.a_to_b
            .iter()
            .enumerate()
            .fold(Q::zero(), |acc, (a, &b)| acc + &self.weights[a][b])
    }
}

fn strict_order(profile: &PreferenceProfile, side: Side, x: usize) -> Result<Vec<usize>> {
    let tiers = profile.tiers(side, x);
    if tiers.iter().any(|t| t.len() != 1) {
        return Err(Error::input(format!(
            "agent {x} on side {side:?} has ties; use the exhaustive solver"
        )));
    }
    Ok(tiers.iter().map(|t| t[0]).collect())
}

/// The A-proposing deferred-acceptance matching for strict complete preferences.
pub fn gale_shapley(profile: &PreferenceProfile) -> Result<Matching> {
    let n = profile.a.len();
    profile.check_shape(n, n)?;
    let prefs: Vec<Vec<usize>> = (0..n).map(|a| strict_order(profile, Side::A, a)).collect::<Result<_>>()?;
    for b in 0..n {
        strict_order(profile, Side::B, b)?;
    }
    let rank_b: Vec<Vec<usize>> = (0..n).map(|b| profile.ranks(Side::B, b)).collect();
    let mut next = vec![0usize; n];
    let mut holder: Vec<Option<usize>> = vec![None; n];
    let mut free: VecDeque<usize> = (0..n).collect();
    while let Some(a) = free.pop_front() {
        let b = prefs[a][next[a]];
        next[a] += 1;
        match holder[b] {
            None => holder[b] = Some(a),
            Some(cur) if rank_b[b][a] < rank_b[b][cur] => {
                holder[b] = Some(a);
                free.push_back(cur);
            }
            Some(_) => free.push_back(a),
        }
    }
    let mut a_to_b = vec![0; n];
    for (b, h) in holder.iter().enumerate() {
        a_to_b[h.expect("every woman is held at termination")] = b;
    }
    Matching::new(a_to_b)
}

fn polytope_lp(prob: &WsmProblem) -> Result<LinearProgram> {
    let n = prob.n();
    let mut lp = LinearProgram::new();
    for a in 0..n {
        for b in 0..n {
            let j = lp.add_var(format!("x_{a}_{b}"));
            lp.set_objective(j, prob.weights[a][b].clone());
        }
    }
    let var = |a: usize, b: usize| a * n + b;
    let one = || Q::from_integer(1.into());
    for a in 0..n {
        lp.add_constraint((0..n).map(|b| (var(a, b), one())).collect(), Relation::Eq, one());
    }
    for b in 0..n {
        lp.add_constraint((0..n).map(|a| (var(a, b), one())).collect(), Relation::Eq, one());
    }
    let ra: Vec<Vec<usize>> = (0..n).map(|a| prob.profile.ranks(Side::A, a)).collect();
    let rb: Vec<Vec<usize>> = (0..n).map(|b| prob.profile.ranks(Side::B, b)).collect();
    for a in 0..n {
        for b in 0..n {
            let mut coeffs = vec![(var(a, b), one())];
            for b2 in 0..n {
                if ra[a][b2] < ra[a][b] {
                    coeffs.push((var(a, b2), one()));
                }
            }
            for a2 in 0..n {
                if rb[b][a2] < rb[b][a] {
                    coeffs.push((var(a2, b), one()));
                }
            }
            lp.add_constraint(coeffs, Relation::Ge, one());
        }
    }
    Ok(lp)
}

/// Maximum-weight stable matching for strict preferences, solved as a linear
/// program over the stable-matching polytope, whose optimal basic solution is
/// integral.
pub fn wsm_strict(prob: &WsmProblem) -> Result<(Matching, Q)> {
    prob.validate()?;
    let n = prob.n();
    if !prob.profile.is_strict() {
        return Err(Error::input("wsm_strict needs strict preferences"));
    }
    let base = polytope_lp(prob)?;
    let (best, x) = match lp_solve(&base) {
        LpOutcome::Optimal { value, x } => (value, x),
        _ => return Err(Error::internal("stable-matching polytope is empty")),
    };
    if !x.iter().all(is_integer) {
        return Err(Error::internal("fractional optimal vertex under strict preferences"));
    }
    let a_to_b = (0..n)
        .map(|a| (0..n).find(|&b| x[a * n + b] == Q::from_integer(1.into())))
        .collect::<Option<Vec<usize>>>()
        .ok_or_else(|| Error::internal("optimal vertex is not a matching"))?;
    let m = Matching::new(a_to_b)?;
    if !stable_under_profile(&prob.profile, &m) || prob.value(&m) != best {
        return Err(Error::internal("optimal vertex is not an optimal stable matching"));
    }
    Ok((m, best))
}

/// Exhaustive weighted stable matching; ties in the profile are allowed.
/// Among optimal matchings the lexicographically smallest is returned.
pub fn wsm_brute(prob: &WsmProblem, cap: usize) -> Result<(Matching, Q)> {
    prob.validate()?;
    let n = prob.n();
    if n > cap {
        return Err(Error::capacity(format!("exhaustive matching search needs n <= {cap}, got {n}")));
    }
    let mut best: Option<(Matching, Q)> = None;
    for perm in (0..n).permutations(n) {
        let m = Matching { a_to_b: perm };
        if !stable_under_profile(&prob.profile, &m) {
            continue;
        }
        let v = prob.value(&m);
        if best.as_ref().is_none_or(|(_, bv)| v > *bv) {
            best = Some((m, v));
        }
    }
    best.ok_or_else(|| Error::internal("no stable matching exists"))
}

/// All `n!` matchings in lexicographic order.
pub fn all_matchings(n: usize) -> impl Iterator<Item = Matching> {
    (0..n).permutations(n).map(|a_to_b| Matching { a_to_b })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::profile_blocking_pairs;
    use crate::rational::q;

    fn strict(a: Vec<Vec<usize>>, b: Vec<Vec<usize>>) -> PreferenceProfile {
        let wrap = |v: Vec<Vec<usize>>| v.into_iter().map(|o| o.into_iter().map(|y| vec![y]).collect()).collect();
        PreferenceProfile { a: wrap(a), b: wrap(b) }
    }

    #[test]
    fn gale_shapley_small_cases() {
        let p = strict(vec![vec![0]], vec![vec![0]]);
        assert_eq!(gale_shapley(&p).unwrap().a_to_b, vec![0]);
        let p = strict(vec![vec![0, 1], vec![0, 1]], vec![vec![0, 1], vec![0, 1]]);
        assert_eq!(gale_shapley(&p).unwrap().a_to_b, vec![0, 1]);
        let tied = PreferenceProfile { a: vec![vec![vec![0, 1]], vec![vec![0], vec![1]]], b: p.b.clone() };
        assert!(gale_shapley(&tied).is_err());
    }

    #[test]
    fn wsm_unique_stable_matching_ignores_weights() {
        let p = strict(vec![vec![0, 1], vec![0, 1]], vec![vec![0, 1], vec![0, 1]]);
        let prob = WsmProblem { profile: p, weights: vec![vec![q(0), q(9)], vec![q(9), q(0)]] };
        let (m, v) = wsm_strict(&prob).unwrap();
        assert_eq!(m.a_to_b, vec![0, 1]);
        assert_eq!(v, q(0));
        assert!(profile_blocking_pairs(&prob.profile, &m).is_empty());
    }

    #[test]
    fn wsm_picks_heavier_of_two_stable_matchings() {
        // Opposed preferences: both perfect matchings are stable.
        let p = strict(vec![vec![0, 1], vec![1, 0]], vec![vec![1, 0], vec![0, 1]]);
        let prob = WsmProblem { profile: p, weights: vec![vec![q(0), q(3)], vec![q(2), q(0)]] };
        let (m, v) = wsm_strict(&prob).unwrap();
        assert_eq!(m.a_to_b, vec![1, 0]);
        assert_eq!(v, q(5));
        assert_eq!(wsm_brute(&prob, 7).unwrap(), (m, v));
    }

    #[test]
    fn brute_with_universal_indifference_is_assignment() {
        let tie = || vec![vec![0, 1]];
        let p = PreferenceProfile { a: vec![tie(), tie()], b: vec![tie(), tie()] };
        let prob = WsmProblem { profile: p, weights: vec![vec![q(1), q(5)], vec![q(4), q(1)]] };
        assert_eq!(wsm_brute(&prob, 7).unwrap().1, q(9));
        assert!(wsm_brute(&prob, 1).is_err());
    }
}
