//! Markets given by agent types with (possibly huge) type sizes.

mod expand;
mod io;
mod private;

use std::collections::{BTreeMap, BTreeSet, HashSet};

use num::{BigInt, One, Signed, Zero};

use crate::cells::{feasible_profiles, region_vertices};
use crate::error::{Error, Result};
use crate::lp::{enumerate_vertices, lp_solve, LinearProgram, LpOutcome, Polytope, Relation};
use crate::model::{all_strict_orders, PreferenceProfile, Side, Valuations};
use crate::rational::{dot, is_integer, qi, sum, Q};

pub use expand::{expand_typed_policy, type_level_instance, typed_private_indicative};
pub use io::{parse_typed_instance, typed_instance_from_value, typed_instance_to_json, typed_policy_to_json};
pub use private::solve_private_typed;

/// A market in which agents of one type share valuations and utilities.
#[derive(Debug, Clone, PartialEq)]
pub struct TypedInstance {
    pub worlds: Vec<String>,
    pub prior: Vec<Q>,
    pub a_types: Vec<String>,
    pub b_types: Vec<String>,
    pub a_sizes: Vec<BigInt>,
    pub b_sizes: Vec<BigInt>,
    /// `va[s][t][w]`: value of type-`t` partners to type-`s` agents.
    pub va: Vec<Vec<Vec<Q>>>,
    /// `vb[t][s][w]`.
    pub vb: Vec<Vec<Vec<Q>>>,
    /// `util[s][t][w]`: principal's utility per matched `(s, t)` pair.
    pub util: Vec<Vec<Vec<Q>>>,
}

impl TypedInstance {
    pub fn validate(&self) -> Result<()> {
        let w = self.worlds.len();
        if w == 0 || self.prior.len() != w {
            return Err(Error::input("prior must cover every world"));
        }
        if self.prior.iter().any(|p| p.is_negative()) || sum(&self.prior) != Q::one() {
            return Err(Error::input("prior must be a probability distribution"));
        }
        let (ta, tb) = (self.a_types.len(), self.b_types.len());
        if ta == 0 || tb == 0 || self.a_sizes.len() != ta || self.b_sizes.len() != tb {
            return Err(Error::input("every type needs a size"));
        }
        if self.a_sizes.iter().chain(&self.b_sizes).any(|s| !s.is_positive()) {
            return Err(Error::input("type sizes must be positive"));
        }
        if self.a_sizes.iter().sum::<BigInt>() != self.b_sizes.iter().sum::<BigInt>() {
            return Err(Error::input("both sides must have the same number of agents"));
        }
        let shape_ok = |t: &Vec<Vec<Vec<Q>>>, rows: usize, cols: usize| {
            t.len() == rows && t.iter().all(|r| r.len() == cols && r.iter().all(|v| v.len() == w))
        };
        if !shape_ok(&self.va, ta, tb) || !shape_ok(&self.vb, tb, ta) || !shape_ok(&self.util, ta, tb) {
            return Err(Error::input("value or utility tables are incomplete"));
        }
        let mut names = HashSet::new();
        for name in self.a_types.iter().chain(&self.b_types) {
            if !names.insert(name) {
                return Err(Error::input(format!("duplicate type id {name:?}")));
            }
        }
        Ok(())
    }

    pub fn num_agents(&self) -> BigInt {
        self.a_sizes.iter().sum()
    }

    pub fn type_name(&self, side: Side, s: usize) -> &str {
        match side {
            Side::A => &self.a_types[s],
            Side::B => &self.b_types[s],
        }
    }

    /// `u(M | p)` for a count matrix at a point of the simplex (or any weight vector).
    pub fn matching_value(&self, m: &PrototypeMatching, p: &[Q]) -> Q {
        let mut total = Q::zero();
        for (s, row) in m.counts.iter().enumerate() {
            for (t, c) in row.iter().enumerate() {
                if !c.is_zero() {
                    total += qi(c) * dot(&self.util[s][t], p);
                }
            }
        }
        total
    }
}

impl Valuations for TypedInstance {
    fn num_worlds(&self) -> usize {
        self.worlds.len()
    }

    fn side_len(&self, side: Side) -> usize {
        match side {
            Side::A => self.a_types.len(),
            Side::B => self.b_types.len(),
        }
    }

    fn values(&self, side: Side, x: usize, y: usize) -> &[Q] {
        match side {
            Side::A => &self.va[x][y],
            Side::B => &self.vb[x][y],
        }
    }
}

/// The set of type pairs used by a matching.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Prototype {
    pub pairs: BTreeSet<(usize, usize)>,
}

impl Prototype {
    pub fn full(ta: usize, tb: usize) -> Self {
        Prototype { pairs: (0..ta).flat_map(|s| (0..tb).map(move |t| (s, t))).collect() }
    }
}

/// Number of agents matched across every type pair.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PrototypeMatching {
    pub counts: Vec<Vec<BigInt>>,
}

impl PrototypeMatching {
    pub fn validate(&self, ti: &TypedInstance) -> Result<()> {
        if self.counts.len() != ti.a_types.len() || self.counts.iter().any(|r| r.len() != ti.b_types.len()) {
            return Err(Error::input("count matrix shape differs from the type grid"));
        }
        if self.counts.iter().flatten().any(|c| c.is_negative()) {
            return Err(Error::input("negative count"));
        }
        for (s, row) in self.counts.iter().enumerate() {
            if row.iter().sum::<BigInt>() != ti.a_sizes[s] {
                return Err(Error::input(format!("row of type {} does not sum to its size", ti.a_types[s])));
            }
        }
        for t in 0..ti.b_types.len() {
            if self.counts.iter().map(|r| &r[t]).sum::<BigInt>() != ti.b_sizes[t] {
                return Err(Error::input(format!("column of type {} does not sum to its size", ti.b_types[t])));
            }
        }
        Ok(())
    }
}

pub fn prototype_of(m: &PrototypeMatching) -> Result<Prototype> {
    let pairs: BTreeSet<(usize, usize)> = m
        .counts
        .iter()
        .enumerate()
        .flat_map(|(s, row)| row.iter().enumerate().filter(|(_, c)| c.is_positive()).map(move |(t, _)| (s, t)))
        .collect();
    if pairs.is_empty() {
        return Err(Error::input("a matching of a nonempty market has a nonempty prototype"));
    }
    Ok(Prototype { pairs })
}

/// An agent's own type together with its partner's type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subtype {
    pub side: Side,
    pub own: usize,
    pub partner: usize,
}

/// Subtypes occurring in a matching, A side first.
pub fn subtypes_of(m: &PrototypeMatching) -> Vec<Subtype> {
    let mut out = Vec::new();
    for (s, row) in m.counts.iter().enumerate() {
        for (t, c) in row.iter().enumerate() {
            if c.is_positive() {
                out.push(Subtype { side: Side::A, own: s, partner: t });
            }
        }
    }
    let tb = m.counts.first().map_or(0, Vec::len);
    for t in 0..tb {
        for (s, row) in m.counts.iter().enumerate() {
            if row[t].is_positive() {
                out.push(Subtype { side: Side::B, own: t, partner: s });
            }
        }
    }
    out
}

/// Whether no type pair blocks the count matrix under a strict type-level profile.
pub fn counts_stable(profile: &PreferenceProfile, m: &PrototypeMatching) -> bool {
    let rank = |side: Side, x: usize| profile.ranks(side, x);
    let ra: Vec<Vec<usize>> = (0..profile.a.len()).map(|s| rank(Side::A, s)).collect();
    let rb: Vec<Vec<usize>> = (0..profile.b.len()).map(|t| rank(Side::B, t)).collect();
    let used: Vec<(usize, usize)> = prototype_of(m).map(|p| p.pairs.into_iter().collect()).unwrap_or_default();
    for &(s, t1) in &used {
        for &(s1, t) in &used {
            if ra[s][t] < ra[s][t1] && rb[t][s] < rb[t][s1] {
                return false;
            }
        }
    }
    true
}

#[derive(Debug, Clone, Copy)]
pub struct TypedCaps {
    pub types: usize,
    pub profiles: usize,
    pub tuples: usize,
    pub agents: usize,
}

impl Default for TypedCaps {
    fn default() -> Self {
        TypedCaps { types: 5, profiles: 200_000, tuples: 100_000, agents: 10_000 }
    }
}

fn check_type_cap(ti: &TypedInstance, cap: usize) -> Result<()> {
    let t = ti.a_types.len().max(ti.b_types.len());
    if t > cap {
        return Err(Error::capacity(format!("at most {cap} types per side are supported, got {t}")));
    }
    Ok(())
}

/// The polytope of count matrices supported on `proto` with the type sizes as
/// margins; variables follow the order of `proto.pairs`.
pub fn prototype_polytope(ti: &TypedInstance, proto: &Prototype) -> Polytope {
    let pairs: Vec<(usize, usize)> = proto.pairs.iter().copied().collect();
    let mut poly = Polytope::new(pairs.len());
    for (s, size) in ti.a_sizes.iter().enumerate() {
        let c: Vec<(usize, Q)> =
            pairs.iter().enumerate().filter(|(_, p)| p.0 == s).map(|(j, _)| (j, Q::one())).collect();
        poly.add(c, Relation::Eq, qi(size));
    }
    for (t, size) in ti.b_sizes.iter().enumerate() {
        let c: Vec<(usize, Q)> =
            pairs.iter().enumerate().filter(|(_, p)| p.1 == t).map(|(j, _)| (j, Q::one())).collect();
        poly.add(c, Relation::Eq, qi(size));
    }
    for j in 0..pairs.len() {
        poly.add(vec![(j, Q::one())], Relation::Ge, Q::zero());
    }
    poly
}

fn counts_from_point(ti: &TypedInstance, proto: &Prototype, x: &[Q]) -> Result<PrototypeMatching> {
    let mut counts = vec![vec![BigInt::zero(); ti.b_types.len()]; ti.a_types.len()];
    for (&(s, t), v) in proto.pairs.iter().zip(x) {
        if !is_integer(v) {
            return Err(Error::internal(format!("fractional vertex entry {v} for ({s}, {t})")));
        }
        counts[s][t] = v.to_integer();
    }
    Ok(PrototypeMatching { counts })
}

/// Vertices of the count-matrix polytope of `proto`, found by generic vertex
/// enumeration; every vertex is checked to be integral.
pub fn vertex_set(ti: &TypedInstance, proto: &Prototype, type_cap: usize) -> Result<Vec<PrototypeMatching>> {
    ti.validate()?;
    check_type_cap(ti, type_cap)?;
    if proto.pairs.is_empty() {
        return Ok(Vec::new());
    }
    let poly = prototype_polytope(ti, proto);
    enumerate_vertices(&poly, poly.dim().max(1))?
        .iter()
        .map(|x| counts_from_point(ti, proto, x))
        .collect()
}

/// Vertices of the full count-matrix polytope, which contain the vertices of
/// every prototype polytope since those are faces of it. A vertex is a point
/// with forest support, and every such point arises from repeatedly saturating
/// an allowed cell by the smaller of its remaining margins.
pub fn star_vertices(ti: &TypedInstance) -> Result<Vec<PrototypeMatching>> {
    ti.validate()?;
    let (ta, tb) = (ti.a_types.len(), ti.b_types.len());
    let mut seen: HashSet<Vec<Vec<BigInt>>> = HashSet::new();
    let mut out: BTreeSet<Vec<Vec<BigInt>>> = BTreeSet::new();
    let mut stack = vec![(vec![vec![BigInt::zero(); tb]; ta], ti.a_sizes.clone(), ti.b_sizes.clone())];
    while let Some((x, ra, rb)) = stack.pop() {
        if ra.iter().all(Zero::is_zero) {
            out.insert(x);
            continue;
        }
        for s in 0..ta {
            if ra[s].is_zero() {
                continue;
            }
            for t in 0..tb {
                if rb[t].is_zero() {
                    continue;
                }
                let v = (&ra[s]).min(&rb[t]).clone();
                let mut nx = x.clone();
                nx[s][t] += &v;
                if !seen.insert(nx.clone()) {
                    continue;
                }
                let (mut na, mut nb) = (ra.clone(), rb.clone());
                na[s] -= &v;
                nb[t] -= &v;
                stack.push((nx, na, nb));
            }
        }
    }
    Ok(out.into_iter().map(|counts| PrototypeMatching { counts }).collect())
}

/// Best count matrix with support inside `proto` for the world weights `q`.
pub fn best_prototype_substitute(
    ti: &TypedInstance,
    proto: &Prototype,
    q: &[Q],
) -> Result<(PrototypeMatching, Q)> {
    ti.validate()?;
    if q.len() != ti.worlds.len() {
        return Err(Error::input("weights must cover every world"));
    }
    for (s, name) in ti.a_types.iter().enumerate() {
        if !proto.pairs.iter().any(|p| p.0 == s) {
            return Err(Error::precondition(format!("prototype leaves type {name} unmatched")));
        }
    }
    for (t, name) in ti.b_types.iter().enumerate() {
        if !proto.pairs.iter().any(|p| p.1 == t) {
            return Err(Error::precondition(format!("prototype leaves type {name} unmatched")));
        }
    }
    let poly = prototype_polytope(ti, proto);
    let mut lp = LinearProgram::new();
    for (s, t) in &proto.pairs {
        let j = lp.add_var(format!("m_{}_{}", ti.a_types[*s], ti.b_types[*t]));
        lp.set_objective(j, dot(&ti.util[*s][*t], q));
    }
    for c in &poly.constraints {
        lp.add_constraint(c.coeffs.clone(), c.rel, c.rhs.clone());
    }
    match lp_solve(&lp) {
        LpOutcome::Optimal { value, x } => Ok((counts_from_point(ti, proto, &x)?, value)),
        LpOutcome::Infeasible => Err(Error::precondition(infeasibility_witness(ti, proto))),
        LpOutcome::Unbounded => Err(Error::internal("bounded polytope reported unbounded")),
    }
}

/// Names a set of types whose total size exceeds what the prototype lets them reach.
fn infeasibility_witness(ti: &TypedInstance, proto: &Prototype) -> String {
    let ta = ti.a_types.len();
    for mask in 1u64..(1u64 << ta) {
        let group: Vec<usize> = (0..ta).filter(|s| mask >> s & 1 == 1).collect();
        let reach: BTreeSet<usize> =
            proto.pairs.iter().filter(|p| group.contains(&p.0)).map(|p| p.1).collect();
        let need: BigInt = group.iter().map(|&s| &ti.a_sizes[s]).sum();
        let have: BigInt = reach.iter().map(|&t| &ti.b_sizes[t]).sum();
        if need > have {
            let names: Vec<&str> = group.iter().map(|&s| ti.a_types[s].as_str()).collect();
            return format!(
                "row sums of {{{}}} total {need} but their allowed columns only hold {have}",
                names.join(", ")
            );
        }
    }
    "row and column sums cannot both be met on this prototype".to_string()
}

/// A signal of a type-level policy.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TypedView {
    /// One strict order per type, seen by everyone.
    Public(PreferenceProfile),
    /// A label per subtype, seen only by agents of that subtype.
    Private(BTreeMap<Subtype, String>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TypedSignal {
    pub view: TypedView,
    pub matching: PrototypeMatching,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TypedPolicy {
    pub signals: Vec<TypedSignal>,
    pub kernel: Vec<Vec<Q>>,
}

impl TypedPolicy {
    pub fn utility(&self, ti: &TypedInstance) -> Q {
        let mut total = Q::zero();
        for (sig, row) in self.signals.iter().zip(&self.kernel) {
            let mass: Vec<Q> = ti.prior.iter().zip(row).map(|(m, s)| m * s).collect();
            total += ti.matching_value(&sig.matching, &mass);
        }
        total
    }

    pub fn is_private(&self) -> bool {
        self.signals.iter().any(|s| matches!(s.view, TypedView::Private(_)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TypedSolution {
    pub value: Q,
    pub policy: TypedPolicy,
}

/// Turns per-signal world masses `q[k][w] = mu(w) sigma(k | w)` into a kernel.
fn kernel_from_masses(prior: &[Q], masses: &[Vec<Q>]) -> Vec<Vec<Q>> {
    let mut kernel: Vec<Vec<Q>> = masses
        .iter()
        .map(|q| q.iter().zip(prior).map(|(x, m)| if m.is_zero() { Q::zero() } else { x / m }).collect())
        .collect();
    for (w, m) in prior.iter().enumerate() {
        if m.is_zero() {
            if let Some(first) = kernel.first_mut() {
                first[w] = Q::one();
            }
        }
    }
    kernel
}

/// Optimal public policy: every strict type-level profile with a nonempty cell,
/// every count-matrix vertex stable under it, and a master program that splits
/// the prior into cell vertices, each carrying its best stable matching.
pub fn solve_public_typed(ti: &TypedInstance, caps: TypedCaps) -> Result<TypedSolution> {
    ti.validate()?;
    check_type_cap(ti, caps.types)?;
    let w = ti.worlds.len();
    let star = star_vertices(ti)?;
    let orders_a = all_strict_orders(ti.b_types.len());
    let orders_b = all_strict_orders(ti.a_types.len());
    let profiles = feasible_profiles(ti, &orders_a, &orders_b, caps.profiles)?;
    // Best (value, profile, matching) per distinct cell vertex.
    let mut columns: BTreeMap<Vec<Q>, (Q, usize, usize)> = BTreeMap::new();
    for (k, (profile, rows)) in profiles.iter().enumerate() {
        let stable: Vec<usize> = (0..star.len()).filter(|&i| counts_stable(profile, &star[i])).collect();
        if stable.is_empty() {
            continue;
        }
        for p in region_vertices(rows, w)? {
            for &i in &stable {
                let v = ti.matching_value(&star[i], &p);
                match columns.get(&p) {
                    Some((best, ..)) if *best >= v => {}
                    _ => {
                        columns.insert(p.clone(), (v, k, i));
                    }
                }
            }
        }
    }
    let cols: Vec<(Vec<Q>, (Q, usize, usize))> = columns.into_iter().collect();
    let mut lp = LinearProgram::new();
    for (c, (_, (v, ..))) in cols.iter().enumerate() {
        let j = lp.add_var(format!("l{c}"));
        lp.set_objective(j, v.clone());
    }
    for (j, mu) in ti.prior.iter().enumerate() {
        let coeffs: Vec<(usize, Q)> = cols
            .iter()
            .enumerate()
            .filter(|(_, (p, _))| !p[j].is_zero())
            .map(|(c, (p, _))| (c, p[j].clone()))
            .collect();
        lp.add_constraint(coeffs, Relation::Eq, mu.clone());
    }
    let (value, x) = match lp_solve(&lp) {
        LpOutcome::Optimal { value, x } => (value, x),
        _ => return Err(Error::internal("typed master program has no optimum")),
    };
    let mut groups: BTreeMap<(usize, usize), Vec<Q>> = BTreeMap::new();
    for (c, (p, (_, k, i))) in cols.iter().enumerate() {
        if x[c].is_positive() {
            let e = groups.entry((*k, *i)).or_insert_with(|| vec![Q::zero(); w]);
            for j in 0..w {
                e[j] += &x[c] * &p[j];
            }
        }
    }
    let signals = groups
        .keys()
        .map(|&(k, i)| TypedSignal { view: TypedView::Public(profiles[k].0.clone()), matching: star[i].clone() })
        .collect();
    let masses: Vec<Vec<Q>> = groups.into_values().collect();
    let kernel = kernel_from_masses(&ti.prior, &masses);
    Ok(TypedSolution { value, policy: TypedPolicy { signals, kernel } })
}
