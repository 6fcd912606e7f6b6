//! Stable marriage with ties and incomplete lists.

use std::collections::BTreeMap;

use num::{One, Zero};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::io::{field, object, string_list};
use crate::matching::WsmProblem;
use crate::model::PreferenceProfile;
use crate::rational::Q;

pub const DEFAULT_SMTI_NODE_CAP: usize = 5_000_000;

/// Agents on side A rank `pa[a]` strictly (best first) followed by the tied pair
/// `ta[a]`; agents on side B rank `pb[b]` strictly. Unlisted agents are unacceptable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmtiInstance {
    pub a: Vec<String>,
    pub b: Vec<String>,
    pub pa: Vec<Vec<usize>>,
    pub ta: Vec<Vec<usize>>,
    pub pb: Vec<Vec<usize>>,
}

/// Sizes of the dummy sets added by `smti_restrict`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RestrictBookkeeping {
    pub a2: usize,
    pub a3: usize,
}

impl SmtiInstance {
    pub fn validate(&self) -> Result<()> {
        let (na, nb) = (self.a.len(), self.b.len());
        if self.pa.len() != na || self.ta.len() != na || self.pb.len() != nb {
            return Err(Error::input("preference and tie tables must cover every agent"));
        }
        let check = |owner: &str, list: &[usize], bound: usize| -> Result<()> {
            let mut seen = vec![false; bound];
            for &y in list {
                if y >= bound || seen[y] {
                    return Err(Error::input(format!("agent {owner}: repeated or unknown entry in list")));
                }
                seen[y] = true;
            }
            Ok(())
        };
        for a in 0..na {
            let t = &self.ta[a];
            if !t.is_empty() && t.len() != 2 {
                return Err(Error::input(format!("agent {}: a tie must hold exactly two agents", self.a[a])));
            }
            let mut all = self.pa[a].clone();
            all.extend(t);
            check(&self.a[a], &all, nb)?;
        }
        for b in 0..nb {
            check(&self.b[b], &self.pb[b], na)?;
        }
        Ok(())
    }

    /// Rank of `b` in `a`'s list; both tie members share the rank after the strict part.
    pub fn rank_a(&self, a: usize, b: usize) -> Option<usize> {
        self.pa[a]
            .iter()
            .position(|&y| y == b)
            .or_else(|| self.ta[a].contains(&b).then_some(self.pa[a].len()))
    }

    pub fn rank_b(&self, b: usize, a: usize) -> Option<usize> {
        self.pb[b].iter().position(|&x| x == a)
    }

    pub fn acceptable(&self, a: usize, b: usize) -> bool {
        self.rank_a(a, b).is_some() && self.rank_b(b, a).is_some()
    }

    /// Weak stability of a partial matching given as `a -> Option<b>`.
    pub fn is_stable(&self, m: &[Option<usize>]) -> bool {
        let nb = self.b.len();
        let mut inv = vec![None; nb];
        for (a, &mb) in m.iter().enumerate() {
            if let Some(b) = mb {
                if !self.acceptable(a, b) || inv[b].is_some() {
                    return false;
                }
                inv[b] = Some(a);
            }
        }
        for a in 0..self.a.len() {
            for b in 0..nb {
                if m[a] == Some(b) || !self.acceptable(a, b) {
                    continue;
                }
                let ra = self.rank_a(a, b).expect("acceptable");
                let a_wants = m[a].is_none_or(|cur| ra < self.rank_a(a, cur).expect("matched"));
                let rb = self.rank_b(b, a).expect("acceptable");
                let b_wants = inv[b].is_none_or(|cur: usize| rb < self.rank_b(b, cur).expect("matched"));
                if a_wants && b_wants {
                    return false;
                }
            }
        }
        true
    }

    /// Whether every B agent is tied in at most one list.
    pub fn ties_disjoint(&self) -> bool {
        let mut seen = vec![false; self.b.len()];
        for &b in self.ta.iter().flatten() {
            if seen[b] {
                return false;
            }
            seen[b] = true;
        }
        true
    }
}

/// Size of a largest weakly stable matching, by exhaustive search.
pub fn max_stable_size(m: &SmtiInstance, node_cap: usize) -> Result<usize> {
    m.validate()?;
    let na = m.a.len();
    let mut cur: Vec<Option<usize>> = vec![None; na];
    let mut used = vec![false; m.b.len()];
    let mut best: Option<usize> = None;
    let mut nodes = 0usize;
    fn rec(
        m: &SmtiInstance,
        a: usize,
        size: usize,
        cur: &mut Vec<Option<usize>>,
        used: &mut Vec<bool>,
        best: &mut Option<usize>,
        nodes: &mut usize,
        cap: usize,
    ) -> Result<()> {
        *nodes += 1;
        if *nodes > cap {
            return Err(Error::capacity(format!("stable matching search exceeded {cap} nodes")));
        }
        if a == cur.len() {
            if best.is_none_or(|b| size > b) && m.is_stable(cur) {
                *best = Some(size);
            }
            return Ok(());
        }
        if best.is_some_and(|b| size + (cur.len() - a) <= b) {
            return Ok(());
        }
        for b in 0..used.len() {
            if !used[b] && m.acceptable(a, b) {
                used[b] = true;
                cur[a] = Some(b);
                rec(m, a + 1, size + 1, cur, used, best, nodes, cap)?;
                cur[a] = None;
                used[b] = false;
            }
        }
        rec(m, a + 1, size, cur, used, best, nodes, cap)
    }
    rec(m, 0, 0, &mut cur, &mut used, &mut best, &mut nodes, node_cap)?;
    best.ok_or_else(|| Error::internal("no weakly stable matching found"))
}

/// Rewrites an instance so that every tie has length two at the end of a list
/// and every B agent that was tied in several lists is split into one copy per list.
pub fn smti_restrict(m: &SmtiInstance) -> Result<(SmtiInstance, RestrictBookkeeping)> {
    m.validate()?;
    let (na, nb) = (m.a.len(), m.b.len());
    let mut holders: Vec<Vec<usize>> = vec![Vec::new(); nb];
    for a in 0..na {
        for &b in &m.ta[a] {
            holders[b].push(a);
        }
    }
    let mut a_names = m.a.clone();
    let mut b_names: Vec<String> = Vec::new();
    let mut plain: Vec<Option<usize>> = vec![None; nb];
    for b in 0..nb {
        if holders[b].is_empty() {
            plain[b] = Some(b_names.len());
            b_names.push(m.b[b].clone());
        }
    }
    // copy[b][l], dummy_a[b][l], dummy_b[b][l] for the l-th holder of b.
    let mut copy: Vec<Vec<usize>> = vec![Vec::new(); nb];
    for b in 0..nb {
        for &h in &holders[b] {
            copy[b].push(b_names.len());
            b_names.push(format!("{}#{}", m.b[b], m.a[h]));
        }
    }
    let mut dummy_a: Vec<Vec<usize>> = vec![Vec::new(); nb];
    for b in 0..nb {
        for &h in &holders[b] {
            dummy_a[b].push(a_names.len());
            a_names.push(format!("x[{}#{}]", m.b[b], m.a[h]));
        }
    }
    let a2 = a_names.len() - na;
    let mut dummy_b: Vec<Vec<usize>> = vec![Vec::new(); nb];
    for b in 0..nb {
        for &h in &holders[b] {
            dummy_b[b].push(b_names.len());
            b_names.push(format!("y[{}#{}]", m.b[b], m.a[h]));
        }
    }
    let mut filler: Vec<Vec<usize>> = vec![Vec::new(); nb];
    for b in 0..nb {
        for l in 1..holders[b].len() {
            filler[b].push(a_names.len());
            a_names.push(format!("z[{}:{l}]", m.b[b]));
        }
    }
    let a3 = a_names.len() - na - a2;

    let mut pa: Vec<Vec<usize>> = vec![Vec::new(); a_names.len()];
    let mut ta: Vec<Vec<usize>> = vec![Vec::new(); a_names.len()];
    let mut pb: Vec<Vec<usize>> = vec![Vec::new(); b_names.len()];
    for a in 0..na {
        for &b in &m.pa[a] {
            match plain[b] {
                Some(i) => pa[a].push(i),
                None => pa[a].extend(&copy[b]),
            }
        }
        for &b in &m.ta[a] {
            let l = holders[b].iter().position(|&h| h == a).expect("holder");
            ta[a].push(copy[b][l]);
        }
    }
    for b in 0..nb {
        if let Some(i) = plain[b] {
            pb[i] = m.pb[b].clone();
        }
        for l in 0..holders[b].len() {
            pb[copy[b][l]] = std::iter::once(dummy_a[b][l]).chain(m.pb[b].iter().copied()).collect();
            pa[dummy_a[b][l]] = vec![dummy_b[b][l], copy[b][l]];
            pb[dummy_b[b][l]] = filler[b].iter().copied().chain(std::iter::once(dummy_a[b][l])).collect();
        }
        for (l, &z) in filler[b].iter().enumerate() {
            ta[z] = vec![dummy_b[b][l], dummy_b[b][l + 1]];
        }
    }
    let out = SmtiInstance { a: a_names, b: b_names, pa, ta, pb };
    out.validate()?;
    Ok((out, RestrictBookkeeping { a2, a3 }))
}

/// Drops one-sided entries, completes every list (ties kept, remaining agents
/// appended in index order), pads the smaller side with agents that accept
/// nobody, and weights a pair 1 when both partners list each other.
pub fn smti_to_wsm(m: &SmtiInstance) -> Result<WsmProblem> {
    m.validate()?;
    let n = m.a.len().max(m.b.len());
    let complete = |strict: &[usize], tie: &[usize]| -> Vec<Vec<usize>> {
        let mut tiers: Vec<Vec<usize>> = strict.iter().map(|&y| vec![y]).collect();
        if !tie.is_empty() {
            tiers.push(tie.to_vec());
        }
        let listed: Vec<usize> = tiers.iter().flatten().copied().collect();
        tiers.extend((0..n).filter(|y| !listed.contains(y)).map(|y| vec![y]));
        tiers
    };
    let none: Vec<usize> = Vec::new();
    let mutual_a = |a: usize, list: &[usize]| -> Vec<usize> { list.iter().copied().filter(|&b| m.acceptable(a, b)).collect() };
    let mutual_b = |b: usize| -> Vec<usize> { m.pb[b].iter().copied().filter(|&a| m.acceptable(a, b)).collect() };
    let profile = PreferenceProfile {
        a: (0..n)
            .map(|a| {
                if a >= m.a.len() {
                    return complete(&none, &none);
                }
                let mut strict = mutual_a(a, &m.pa[a]);
                let mut tie = mutual_a(a, &m.ta[a]);
                if tie.len() == 1 {
                    strict.append(&mut tie);
                }
                complete(&strict, &tie)
            })
            .collect(),
        b: (0..n)
            .map(|b| if b < m.b.len() { complete(&mutual_b(b), &none) } else { complete(&none, &none) })
            .collect(),
    };
    let weights = (0..n)
        .map(|a| {
            (0..n)
                .map(|b| {
                    if a < m.a.len() && b < m.b.len() && m.acceptable(a, b) {
                        Q::one()
                    } else {
                        Q::zero()
                    }
                })
                .collect()
        })
        .collect();
    let prob = WsmProblem { profile, weights };
    prob.validate()?;
    Ok(prob)
}

fn id_list(v: &Value, names: &[String], ctx: &str) -> Result<Vec<usize>> {
    string_list(v, ctx)?
        .iter()
        .map(|id| {
            names
                .iter()
                .position(|s| s == id)
                .ok_or_else(|| Error::input(format!("{ctx}: unknown id {id:?}")))
        })
        .collect()
}

/// Format: `{"a": [ids], "b": [ids], "prefs": {agent: [ranked ids]}, "ties": {agent: [id, id]}}`.
pub fn smti_from_value(v: &Value) -> Result<SmtiInstance> {
    let a = string_list(field(v, "a")?, "a")?;
    let b = string_list(field(v, "b")?, "b")?;
    if let Some(x) = a.iter().find(|x| b.contains(x)) {
        return Err(Error::input(format!("agent {x:?} appears on both sides")));
    }
    let empty = Value::Object(Map::new());
    let prefs = object(v.get("prefs").unwrap_or(&empty), "prefs")?;
    let ties = object(v.get("ties").unwrap_or(&empty), "ties")?;
    for k in prefs.keys().chain(ties.keys()) {
        if !a.contains(k) && !b.contains(k) {
            return Err(Error::input(format!("unknown agent {k:?}")));
        }
    }
    for k in ties.keys() {
        if !a.contains(k) {
            return Err(Error::input(format!("agent {k:?}: ties are only allowed on side a")));
        }
    }
    let list = |key: &str, table: &Map<String, Value>, names: &[String]| -> Result<Vec<usize>> {
        match table.get(key) {
            Some(x) => id_list(x, names, key),
            None => Ok(Vec::new()),
        }
    };
    let pa = a.iter().map(|x| list(x, prefs, &b)).collect::<Result<_>>()?;
    let ta = a.iter().map(|x| list(x, ties, &b)).collect::<Result<_>>()?;
    let pb = b.iter().map(|y| list(y, prefs, &a)).collect::<Result<_>>()?;
    let m = SmtiInstance { a, b, pa, ta, pb };
    m.validate()?;
    Ok(m)
}

pub fn smti_to_json(m: &SmtiInstance) -> Value {
    let names = |ids: &[usize], side: &[String]| -> Vec<String> { ids.iter().map(|&i| side[i].clone()).collect() };
    let mut prefs = BTreeMap::new();
    let mut ties = BTreeMap::new();
    for (i, x) in m.a.iter().enumerate() {
        prefs.insert(x.clone(), names(&m.pa[i], &m.b));
        if !m.ta[i].is_empty() {
            ties.insert(x.clone(), names(&m.ta[i], &m.b));
        }
    }
    for (i, y) in m.b.iter().enumerate() {
        prefs.insert(y.clone(), names(&m.pb[i], &m.a));
    }
    json!({ "a": m.a, "b": m.b, "prefs": prefs, "ties": ties })
}
