use num::Zero;

use super::{Matching, Side, Valuations};
use crate::error::{Error, Result};
use crate::rational::{dot, Q};

/// One total preorder per agent, stored as tiers from most to least preferred.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PreferenceProfile {
    /// `a[x]` ranks the B side for agent `x` of side A.
    pub a: Vec<Vec<Vec<usize>>>,
    /// `b[y]` ranks the A side for agent `y` of side B.
    pub b: Vec<Vec<Vec<usize>>>,
}

impl PreferenceProfile {
    pub fn tiers(&self, side: Side, x: usize) -> &[Vec<usize>] {
        match side {
            Side::A => &self.a[x],
            Side::B => &self.b[x],
        }
    }

    pub fn is_strict(&self) -> bool {
        self.a.iter().chain(&self.b).flatten().all(|t| t.len() == 1)
    }

    /// Checks that every agent's tiers partition the opposite side.
    pub fn check_shape(&self, na: usize, nb: usize) -> Result<()> {
        let ok = |lists: &Vec<Vec<Vec<usize>>>, own: usize, opp: usize| {
            lists.len() == own
                && lists.iter().all(|tiers| {
                    let mut seen = vec![false; opp];
                    for &y in tiers.iter().flatten() {
                        if y >= opp || seen[y] {
                            return false;
                        }
                        seen[y] = true;
                    }
                    seen.iter().all(|&s| s) && tiers.iter().all(|t| !t.is_empty())
                })
        };
        if ok(&self.a, na, nb) && ok(&self.b, nb, na) {
            Ok(())
        } else {
            Err(Error::input("profile tiers must partition the opposite side"))
        }
    }

    /// `rank[y]` is the tier index of `y` for agent `x` (0 is best).
    pub fn ranks(&self, side: Side, x: usize) -> Vec<usize> {
        let tiers = self.tiers(side, x);
        let mut r = vec![0; tiers.iter().map(|t| t.len()).sum()];
        for (i, t) in tiers.iter().enumerate() {
            for &y in t {
                r[y] = i;
            }
        }
        r
    }

    fn rank_tables(&self) -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
        let ra = (0..self.a.len()).map(|x| self.ranks(Side::A, x)).collect();
        let rb = (0..self.b.len()).map(|x| self.ranks(Side::B, x)).collect();
        (ra, rb)
    }
}

/// The profile induced by posterior `p`; ties are refined by `tie_break` when given.
pub fn induced_profile<V: Valuations>(
    v: &V,
    p: &[Q],
    tie_break: Option<&PreferenceProfile>,
) -> Result<PreferenceProfile> {
    if p.len() != v.num_worlds() {
        return Err(Error::input("posterior length differs from world count"));
    }
    if let Some(t) = tie_break {
        t.check_shape(v.side_len(Side::A), v.side_len(Side::B))?;
        if !t.is_strict() {
            return Err(Error::input("tie-break template must be strict"));
        }
    }
    let mut out = PreferenceProfile { a: Vec::new(), b: Vec::new() };
    for side in [Side::A, Side::B] {
        let own = v.side_len(side);
        let opp = v.side_len(side.other());
        for x in 0..own {
            let vals: Vec<Q> = (0..opp).map(|y| dot(v.values(side, x, y), p)).collect();
            let mut order: Vec<usize> = (0..opp).collect();
            order.sort_by(|&i, &j| vals[j].cmp(&vals[i]).then(i.cmp(&j)));
            let mut tiers: Vec<Vec<usize>> = Vec::new();
            for y in order {
                match tiers.last_mut() {
                    Some(t) if vals[t[0]] == vals[y] => t.push(y),
                    _ => tiers.push(vec![y]),
                }
            }
            if let Some(t) = tie_break {
                let tr = t.ranks(side, x);
                let mut refined = Vec::new();
                for tier in &tiers {
                    let mut members = tier.clone();
                    members.sort_by_key(|&y| tr[y]);
                    refined.extend(members.into_iter().map(|y| vec![y]));
                }
                for w in refined.windows(2) {
                    if tr[w[0][0]] > tr[w[1][0]] {
                        return Err(Error::input(format!(
                            "tie-break order for agent {x} on side {side:?} contradicts the induced preferences"
                        )));
                    }
                }
                tiers = refined;
            }
            match side {
                Side::A => out.a.push(tiers),
                Side::B => out.b.push(tiers),
            }
        }
    }
    Ok(out)
}

/// Renders tiers as `"x > y = z"` using `names` for the ranked side.
pub fn order_label(names: &[String], tiers: &[Vec<usize>]) -> String {
    tiers
        .iter()
        .map(|t| t.iter().map(|&y| names[y].as_str()).collect::<Vec<_>>().join(" = "))
        .collect::<Vec<_>>()
        .join(" > ")
}

/// Cell rows contributed by a single agent `x` on `side` ranking with `tiers`.
pub fn agent_cell_rows<V: Valuations>(v: &V, side: Side, x: usize, tiers: &[Vec<usize>]) -> Vec<Vec<Q>> {
    let mut rows: Vec<Vec<Q>> = Vec::new();
    let mut push = |r: Vec<Q>| {
        if r.iter().any(|x| !x.is_zero()) && !rows.contains(&r) {
            rows.push(r);
        }
    };
    let diff = |lo: usize, hi: usize| -> Vec<Q> {
        v.values(side, x, lo)
            .iter()
            .zip(v.values(side, x, hi))
            .map(|(a, b)| a - b)
            .collect()
    };
    for t in tiers {
        for w in t.windows(2) {
            let d = diff(w[0], w[1]);
            push(d.iter().map(|c| -c).collect());
            push(d);
        }
    }
    for w in tiers.windows(2) {
        push(diff(w[1][0], w[0][0]));
    }
    rows
}

/// Rows `r` such that the cell of `profile` is `{p : r . p <= 0 for every row}`
/// intersected with the simplex. Rows that vanish identically are omitted.
pub fn cell_rows<V: Valuations>(v: &V, profile: &PreferenceProfile) -> Vec<Vec<Q>> {
    let mut rows: Vec<Vec<Q>> = Vec::new();
    for side in [Side::A, Side::B] {
        for x in 0..v.side_len(side) {
            for r in agent_cell_rows(v, side, x, profile.tiers(side, x)) {
                if !rows.contains(&r) {
                    rows.push(r);
                }
            }
        }
    }
    rows
}

/// Whether `p` satisfies every inequality of the cell of `profile`.
pub fn in_cell<V: Valuations>(v: &V, profile: &PreferenceProfile, p: &[Q]) -> bool {
    cell_rows(v, profile).iter().all(|r| dot(r, p) <= Q::zero())
}

/// Pairs `(a, b)` that both strictly prefer each other to their partners under `profile`.
pub fn profile_blocking_pairs(profile: &PreferenceProfile, m: &Matching) -> Vec<(usize, usize)> {
    let (ra, rb) = profile.rank_tables();
    let inv = m.b_to_a();
    let n = m.n();
    let mut out = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if ra[a][b] < ra[a][m.a_to_b[a]] && rb[b][a] < rb[b][inv[b]] {
                out.push((a, b));
            }
        }
    }
    out
}

pub fn stable_under_profile(profile: &PreferenceProfile, m: &Matching) -> bool {
    profile_blocking_pairs(profile, m).is_empty()
}

/// Every total preorder on `m` items as tiers (best first), in a canonical order.
pub fn all_weak_orders(m: usize) -> Vec<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    let mut rank = vec![0usize; m];
    fn rec(i: usize, rank: &mut Vec<usize>, out: &mut Vec<Vec<Vec<usize>>>) {
        let m = rank.len();
        if i == m {
            let k = rank.iter().copied().max().map_or(0, |x| x + 1);
            let tiers: Vec<Vec<usize>> = (0..k)
                .map(|t| (0..m).filter(|&y| rank[y] == t).collect())
                .collect();
            if tiers.iter().all(|t: &Vec<usize>| !t.is_empty()) {
                out.push(tiers);
            }
            return;
        }
        for r in 0..m {
            rank[i] = r;
            rec(i + 1, rank, out);
        }
    }
    if m == 0 {
        return vec![Vec::new()];
    }
    rec(0, &mut rank, &mut out);
    out
}

/// Every strict order on `m` items as singleton tiers, in lexicographic order.
pub fn all_strict_orders(m: usize) -> Vec<Vec<Vec<usize>>> {
    use itertools::Itertools;
    (0..m)
        .permutations(m)
        .map(|p| p.into_iter().map(|y| vec![y]).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_counts() {
        assert_eq!(all_weak_orders(2).len(), 3);
        assert_eq!(all_weak_orders(3).len(), 13);
        assert_eq!(all_strict_orders(3).len(), 6);
    }
}
