use num::Zero;
use stable_persuasion::matching::{all_matchings, WsmProblem};
use stable_persuasion::model::{stable_under_profile, Matching, PreferenceProfile};
use stable_persuasion::rational::{q, qf, Q};

pub fn strict(lists: &[&[usize]]) -> Vec<Vec<Vec<usize>>> {
    lists.iter().map(|l| l.iter().map(|&x| vec![x]).collect()).collect()
}

/// Every strict profile obtained by ordering each tie one way or the other.
pub fn resolutions(p: &PreferenceProfile) -> Vec<PreferenceProfile> {
    let mut out = vec![PreferenceProfile { a: Vec::new(), b: p.b.clone() }];
    for tiers in &p.a {
        let mut next = Vec::new();
        for base in &out {
            let mut flips = vec![false];
            if tiers.iter().any(|t| t.len() == 2) {
                flips.push(true);
            }
            for flip in flips {
                let order: Vec<Vec<usize>> = tiers
                    .iter()
                    .flat_map(|t| {
                        let mut t = t.clone();
                        if flip {
                            t.reverse();
                        }
                        t.into_iter().map(|x| vec![x])
                    })
                    .collect();
                let mut q = base.clone();
                q.a.push(order);
                next.push(q);
            }
        }
        out = next;
    }
    out
}

/// A weighted-optimal matching together with a tie resolution under which it is stable.
pub fn optimum_with_resolution(w: &WsmProblem) -> (Matching, PreferenceProfile, Q) {
    let mut best: Option<(Matching, PreferenceProfile, Q)> = None;
    for r in resolutions(&w.profile) {
        for m in all_matchings(w.n()) {
            if stable_under_profile(&r, &m) {
                let v = w.value(&m);
                if best.as_ref().is_none_or(|b| v > b.2) {
                    best = Some((m, r.clone(), v));
                }
            }
        }
    }
    best.unwrap()
}

pub fn one_tie_problem() -> WsmProblem {
    // a1 ranks b3 > {b1, b2}; a2 ranks b1 > b2 > b3; a3 ranks b2 > b1 > b3.
    WsmProblem {
        profile: PreferenceProfile {
            a: vec![vec![vec![2], vec![0, 1]], strict(&[&[0, 1, 2]])[0].clone(), strict(&[&[1, 0, 2]])[0].clone()],
            b: strict(&[&[1, 0, 2], &[0, 2, 1], &[2, 0, 1]]),
        },
        weights: vec![
            vec![q(1), qf(1, 2), Q::zero()],
            vec![qf(1, 3), q(1), Q::zero()],
            vec![Q::zero(), qf(1, 4), q(1)],
        ],
    }
}
