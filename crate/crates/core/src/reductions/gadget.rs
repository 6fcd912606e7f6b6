//! Two-world private persuasion instance encoding a weighted stable matching problem.

use num::{One, Zero};

use crate::error::{Error, Result};
use crate::matching::WsmProblem;
use crate::model::{
    induced_profile, order_label, profile_blocking_pairs, Instance, Matching, PreferenceProfile,
    PrivatePolicy, PrivateSignal, Side,
};
use crate::rational::{q, qf, Q};

/// Worst-first list and the position of the tied pair, if any.
fn worst_first(tiers: &[Vec<usize>]) -> (Vec<usize>, Option<usize>) {
    let mut list = Vec::new();
    let mut tie = None;
    for t in tiers.iter().rev() {
        if t.len() == 2 {
            tie = Some(list.len());
        }
        list.extend(t.iter().rev());
    }
    (list, tie)
}

fn check_shape(w: &WsmProblem) -> Result<()> {
    w.validate()?;
    let n = w.n();
    let mut tied_in: Vec<Option<usize>> = vec![None; n];
    for a in 0..n {
        let tiers = &w.profile.a[a];
        if tiers.iter().any(|t| t.len() > 2) || tiers.iter().filter(|t| t.len() == 2).count() > 1 {
            return Err(Error::input(format!("agent a{}: at most one tie of two agents is allowed", a + 1)));
        }
        for t in tiers.iter().filter(|t| t.len() == 2) {
            for &b in t {
                if let Some(prev) = tied_in[b] {
                    return Err(Error::input(format!(
                        "agent b{} is tied in the lists of a{} and a{}",
                        b + 1,
                        prev + 1,
                        a + 1
                    )));
                }
                tied_in[b] = Some(a);
            }
        }
    }
    for b in 0..n {
        if w.profile.b[b].iter().any(|t| t.len() != 1) {
            return Err(Error::input(format!("agent b{}: side B must rank strictly", b + 1)));
        }
    }
    for (a, row) in w.weights.iter().enumerate() {
        for (b, x) in row.iter().enumerate() {
            if *x < Q::zero() || *x > Q::one() {
                return Err(Error::input(format!("weight of (a{}, b{}) lies outside [0, 1]", a + 1, b + 1)));
            }
        }
    }
    Ok(())
}

/// The agent of side A whose tie contains `b`.
fn tie_holder(w: &WsmProblem, b: usize) -> Option<usize> {
    (0..w.n()).find(|&a| w.profile.a[a].iter().any(|t| t.len() == 2 && t.contains(&b)))
}

/// Builds the instance on `n + 1` agents per side; the last agent of each side
/// is the dummy pair. Worlds are `w1` and `w2` with prior `(4/5, 1/5)`.
pub fn wsm_to_private_persuasion(w: &WsmProblem) -> Result<Instance> {
    check_shape(w)?;
    let n = w.n();
    let both = |x: Q| vec![x.clone(), x];
    let mut va = vec![vec![Vec::new(); n + 1]; n + 1];
    let mut vb = vec![vec![Vec::new(); n + 1]; n + 1];
    let mut util = vec![vec![Vec::new(); n + 1]; n + 1];
    for a in 0..n {
        let (list, tie) = worst_first(&w.profile.a[a]);
        for (pos, &b) in list.iter().enumerate() {
            let j = q(pos as i64 + 1);
            va[a][b] = match tie {
                Some(t) if pos == t => vec![&j + qf(2, 5), &j + qf(7, 5)],
                Some(t) if pos == t + 1 => {
                    let j = q(t as i64 + 1);
                    vec![&j + qf(3, 5), &j - qf(2, 5)]
                }
                _ => both(j),
            };
        }
        va[a][n] = both(Q::zero());
    }
    va[n] = (0..n).map(|_| vec![q(-1), q(1)]).chain(std::iter::once(both(Q::zero()))).collect();
    for b in 0..n {
        let order: Vec<usize> = w.profile.b[b].iter().rev().map(|t| t[0]).collect();
        let x = tie_holder(w, b);
        let split = x.map_or(0, |x| order.iter().position(|&a| a == x).expect("complete order") + 1);
        let above = (n - split) as i64;
        for (pos, &a) in order.iter().enumerate() {
            let k = pos as i64 + 1;
            vb[b][a] = if Some(a) == x {
                vec![q(2), Q::zero()]
            } else if (k as usize) < split {
                both(qf(1, 2) + qf(k, 2 * split as i64))
            } else {
                both(q(2) + qf(k - split as i64, above + 1))
            };
        }
        vb[b][n] = both(qf(39, 10));
    }
    vb[n] = (0..n).map(|_| both(Q::zero())).chain(std::iter::once(both(Q::one()))).collect();
    let penalty = both(-q(n as i64));
    for a in 0..=n {
        for b in 0..=n {
            util[a][b] = match (a < n, b < n) {
                (true, true) => both(w.weights[a][b].clone()),
                (false, false) => both(Q::zero()),
                _ => penalty.clone(),
            };
        }
    }
    let names = |c: char| -> Vec<String> {
        (1..=n).map(|i| format!("{c}{i}")).chain(std::iter::once(format!("{c}'"))).collect()
    };
    Instance::new(
        vec!["w1".into(), "w2".into()],
        vec![qf(4, 5), qf(1, 5)],
        names('a'),
        names('b'),
        va,
        vb,
        util,
    )
}

fn strict_list(tiers: &[Vec<usize>], skip: usize) -> Vec<usize> {
    tiers.iter().flatten().copied().filter(|&y| y != skip).collect()
}

/// The policy that reveals the world to side-A agents whose prior order differs
/// from `strict`, and to the other member of such an agent's tie when its partner
/// is tied; everyone else learns nothing. Each component names the receiver's
/// induced order and the selected matching is always `m_star` plus the dummy pair.
pub fn build_proof_policy(reduced: &Instance, m_star: &Matching, strict: &PreferenceProfile) -> Result<PrivatePolicy> {
    let n1 = reduced.n();
    if n1 < 1 || reduced.num_worlds() != 2 {
        return Err(Error::input("expected a reduced two-world instance"));
    }
    let n = n1 - 1;
    if m_star.n() != n {
        return Err(Error::input(format!("matching covers {} agents per side, expected {n}", m_star.n())));
    }
    strict.check_shape(n, n)?;
    if !strict.is_strict() {
        return Err(Error::input("tie resolution must be a strict profile"));
    }
    let at = |p: Vec<Q>| induced_profile(reduced, &p, None);
    let views = [at(vec![Q::one(), Q::zero()])?, at(vec![Q::zero(), Q::one()])?, at(reduced.prior.clone())?];
    for a in 0..n {
        let s = strict_list(&strict.a[a], n);
        if !views[..2].iter().any(|v| strict_list(&v.a[a], n) == s) {
            return Err(Error::input(format!("order of {} is not a tie resolution", reduced.side_a[a])));
        }
    }
    for b in 0..n {
        if strict_list(&strict.b[b], n) != strict_list(&views[2].b[b], n) {
            return Err(Error::input(format!("order of {} differs from its prior order", reduced.side_b[b])));
        }
    }
    let blocking = profile_blocking_pairs(strict, m_star);
    if let Some(&(a, b)) = blocking.first() {
        return Err(Error::input(format!(
            "matching is blocked by ({}, {}) under the tie resolution",
            reduced.side_a[a], reduced.side_b[b]
        )));
    }
    let mut truth_a = vec![false; n1];
    let mut truth_b = vec![false; n1];
    for a in 0..n {
        if strict_list(&views[2].a[a], n) == strict_list(&strict.a[a], n) {
            continue;
        }
        truth_a[a] = true;
        let partner = m_star.a_to_b[a];
        let tied: Vec<usize> = (0..n).filter(|&b| reduced.va(a, b)[0] != reduced.va(a, b)[1]).collect();
        if tied.contains(&partner) {
            for b in tied.into_iter().filter(|&b| b != partner) {
                truth_b[b] = true;
            }
        }
    }
    let mut full = m_star.a_to_b.clone();
    full.push(n);
    let matching = Matching::new(full)?;
    let signals = (0..2)
        .map(|world| {
            let mut components = Vec::with_capacity(2 * n1);
            for (side, truth, names) in [(Side::A, &truth_a, &reduced.side_b), (Side::B, &truth_b, &reduced.side_a)] {
                for x in 0..n1 {
                    let view = if truth[x] { &views[world] } else { &views[2] };
                    components.push(order_label(names, view.tiers(side, x)));
                }
            }
            PrivateSignal { components, matching: matching.clone() }
        })
        .collect();
    Ok(PrivatePolicy {
        signals,
        kernel: vec![vec![Q::one(), Q::zero()], vec![Q::zero(), Q::one()]],
    })
}

/// `P(w2 | M)` for every distinct matching `M` of the policy that pairs the dummies.
pub fn dummy_pair_posteriors(reduced: &Instance, policy: &PrivatePolicy) -> Vec<Q> {
    let n = reduced.n() - 1;
    let mut seen: Vec<&Matching> = Vec::new();
    let mut out = Vec::new();
    for sig in &policy.signals {
        let m = &sig.matching;
        if m.a_to_b[n] != n || seen.contains(&m) {
            continue;
        }
        seen.push(m);
        let mut mass = [Q::zero(), Q::zero()];
        for (s, row) in policy.signals.iter().zip(&policy.kernel) {
            if s.matching == *m {
                for j in 0..2 {
                    mass[j] += &reduced.prior[j] * &row[j];
                }
            }
        }
        let total = &mass[0] + &mass[1];
        if !total.is_zero() {
            out.push(&mass[1] / total);
        }
    }
    out
}
