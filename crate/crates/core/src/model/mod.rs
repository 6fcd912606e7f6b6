//! Instances, matchings, preference profiles, posteriors and policies.

mod posterior;
mod profile;
mod stability;
mod support;

use std::collections::HashMap;

use num::{Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{fmt_q, sum, Q};

pub use posterior::{posterior_of_metasignal, private_posterior, value_under_posterior, value_at};
pub use profile::{
    agent_cell_rows, all_strict_orders, all_weak_orders, cell_rows, in_cell, induced_profile, order_label, profile_blocking_pairs, stable_under_profile,
    PreferenceProfile,
};
pub use stability::{
    bayes_plausible, blocking_pairs_at, is_indicative, is_private_indicative, is_stable_matching, is_stable_policy,
    policy_utility, BlockingPair, PolicyViolation, StabilityCertificate, StabilityReport,
};
pub use support::{reduce_policy_support, shrink_support};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    A,
    B,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::A => Side::B,
            Side::B => Side::A,
        }
    }
}

/// An agent identified by side and canonical index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Agent {
    pub side: Side,
    pub idx: usize,
}

/// Per-world valuation vectors for both sides of a two-sided market.
pub trait Valuations {
    fn num_worlds(&self) -> usize;
    fn side_len(&self, side: Side) -> usize;
    /// `v_x(y | .)` as a vector over worlds, with `x` on `side` and `y` on the other side.
    fn values(&self, side: Side, x: usize, y: usize) -> &[Q];
}

/// A one-to-one matching market with uncertain valuations.
///
/// Valuations and utilities are stored per agent class so that markets with
/// many interchangeable agents stay compact; for ordinary instances every
/// agent is its own class.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub worlds: Vec<String>,
    pub prior: Vec<Q>,
    pub side_a: Vec<String>,
    pub side_b: Vec<String>,
    pub a_class: Vec<usize>,
    pub b_class: Vec<usize>,
    /// `va[class of a][class of b][w]`.
    pub va: Vec<Vec<Vec<Q>>>,
    /// `vb[class of b][class of a][w]`.
    pub vb: Vec<Vec<Vec<Q>>>,
    /// `util[class of a][class of b][w]`.
    pub util: Vec<Vec<Vec<Q>>>,
}

impl Instance {
    /// Builds and validates an instance where every agent is its own class.
    pub fn new(
        worlds: Vec<String>,
        prior: Vec<Q>,
        side_a: Vec<String>,
        side_b: Vec<String>,
        va: Vec<Vec<Vec<Q>>>,
        vb: Vec<Vec<Vec<Q>>>,
        util: Vec<Vec<Vec<Q>>>,
    ) -> Result<Self> {
        let inst = Instance {
            a_class: (0..side_a.len()).collect(),
            b_class: (0..side_b.len()).collect(),
            worlds,
            prior,
            side_a,
            side_b,
            va,
            vb,
            util,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        let w = self.worlds.len();
        if w == 0 {
            return Err(Error::input("instance has no worlds"));
        }
        if self.prior.len() != w {
            return Err(Error::input("prior length differs from world count"));
        }
        if self.prior.iter().any(|p| p.is_negative()) {
            return Err(Error::input("prior has a negative entry"));
        }
        if sum(&self.prior) != Q::from_integer(1.into()) {
            return Err(Error::input(format!(
                "prior sums to {} instead of 1",
                fmt_q(&sum(&self.prior))
            )));
        }
        let n = self.side_a.len();
        if n == 0 || self.side_b.len() != n {
            return Err(Error::input("sides must be nonempty and of equal size"));
        }
        if self.a_class.len() != n || self.b_class.len() != n {
            return Err(Error::input("class maps must cover every agent"));
        }
        let ca = self.va.len();
        let cb = self.vb.len();
        if self.a_class.iter().any(|&c| c >= ca) || self.b_class.iter().any(|&c| c >= cb) {
            return Err(Error::input("class index out of range"));
        }
        let shape_ok = |t: &Vec<Vec<Vec<Q>>>, rows: usize, cols: usize| {
            t.len() == rows && t.iter().all(|r| r.len() == cols && r.iter().all(|v| v.len() == w))
        };
        if !shape_ok(&self.va, ca, cb) || !shape_ok(&self.vb, cb, ca) || !shape_ok(&self.util, ca, cb) {
            return Err(Error::input("value or utility tables are incomplete"));
        }
        let mut seen = HashMap::new();
        for name in self.side_a.iter().chain(&self.side_b) {
            if seen.insert(name.as_str(), ()).is_some() {
                return Err(Error::input(format!("duplicate agent id {name:?}")));
            }
        }
        let mut seen = HashMap::new();
        for name in &self.worlds {
            if seen.insert(name.as_str(), ()).is_some() {
                return Err(Error::input(format!("duplicate world id {name:?}")));
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.side_a.len()
    }

    pub fn num_worlds(&self) -> usize {
        self.worlds.len()
    }

    pub fn va(&self, a: usize, b: usize) -> &[Q] {
        &self.va[self.a_class[a]][self.b_class[b]]
    }

    pub fn vb(&self, b: usize, a: usize) -> &[Q] {
        &self.vb[self.b_class[b]][self.a_class[a]]
    }

    pub fn u(&self, a: usize, b: usize) -> &[Q] {
        &self.util[self.a_class[a]][self.b_class[b]]
    }

    /// `u(M | w)`.
    pub fn matching_utility(&self, m: &Matching, w: usize) -> Q {
        m.a_to_b
            .iter()
            .enumerate()
            .fold(Q::zero(), |acc, (a, &b)| acc + &self.u(a, b)[w])
    }

    pub fn agent(&self, name: &str) -> Result<Agent> {
        if let Some(i) = self.side_a.iter().position(|s| s == name) {
            return Ok(Agent { side: Side::A, idx: i });
        }
        if let Some(i) = self.side_b.iter().position(|s| s == name) {
            return Ok(Agent { side: Side::B, idx: i });
        }
        Err(Error::input(format!("unknown agent {name:?}")))
    }

    pub fn world(&self, name: &str) -> Result<usize> {
        self.worlds
            .iter()
            .position(|s| s == name)
            .ok_or_else(|| Error::input(format!("unknown world {name:?}")))
    }

    pub fn agent_name(&self, x: Agent) -> &str {
        match x.side {
            Side::A => &self.side_a[x.idx],
            Side::B => &self.side_b[x.idx],
        }
    }

    /// A copy where every agent has its own class.
    pub fn materialized(&self) -> Instance {
        let n = self.n();
        let va = (0..n).map(|a| (0..n).map(|b| self.va(a, b).to_vec()).collect()).collect();
        let vb = (0..n).map(|b| (0..n).map(|a| self.vb(b, a).to_vec()).collect()).collect();
        let util = (0..n).map(|a| (0..n).map(|b| self.u(a, b).to_vec()).collect()).collect();
        Instance {
            worlds: self.worlds.clone(),
            prior: self.prior.clone(),
            side_a: self.side_a.clone(),
            side_b: self.side_b.clone(),
            a_class: (0..n).collect(),
            b_class: (0..n).collect(),
            va,
            vb,
            util,
        }
    }
}

impl Valuations for Instance {
    fn num_worlds(&self) -> usize {
        self.worlds.len()
    }

    fn side_len(&self, _side: Side) -> usize {
        self.n()
    }

    fn values(&self, side: Side, x: usize, y: usize) -> &[Q] {
        match side {
            Side::A => self.va(x, y),
            Side::B => self.vb(x, y),
        }
    }
}

/// A perfect matching stored as `a_to_b[a] = b`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Matching {
    pub a_to_b: Vec<usize>,
}

impl Matching {
    pub fn new(a_to_b: Vec<usize>) -> Result<Self> {
        let n = a_to_b.len();
        let mut hit = vec![false; n];
        for &b in &a_to_b {
            if b >= n || hit[b] {
                return Err(Error::input("matching is not a bijection"));
            }
            hit[b] = true;
        }
        Ok(Matching { a_to_b })
    }

    pub fn identity(n: usize) -> Self {
        Matching { a_to_b: (0..n).collect() }
    }

    pub fn n(&self) -> usize {
        self.a_to_b.len()
    }

    pub fn b_to_a(&self) -> Vec<usize> {
        let mut inv = vec![0; self.n()];
        for (a, &b) in self.a_to_b.iter().enumerate() {
            inv[b] = a;
        }
        inv
    }

    pub fn partner(&self, x: Agent) -> Agent {
        match x.side {
            Side::A => Agent { side: Side::B, idx: self.a_to_b[x.idx] },
            Side::B => Agent { side: Side::A, idx: self.b_to_a()[x.idx] },
        }
    }
}

/// A belief over worlds.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Posterior {
    pub dist: Vec<Q>,
}

impl Posterior {
    pub fn new(dist: Vec<Q>) -> Result<Self> {
        if dist.iter().any(|p| p.is_negative()) || sum(&dist) != Q::from_integer(1.into()) {
            return Err(Error::input("posterior must be nonnegative and sum to 1"));
        }
        Ok(Posterior { dist })
    }

    pub fn point(w: usize, n_worlds: usize) -> Self {
        let mut dist = vec![Q::zero(); n_worlds];
        dist[w] = Q::from_integer(1.into());
        Posterior { dist }
    }
}

/// A public signal paired with the selected matching.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MetaSignal {
    pub profile: Option<PreferenceProfile>,
    pub matching: Matching,
    pub tag: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PublicPolicy {
    pub signals: Vec<MetaSignal>,
    /// `kernel[s][w] = sigma(signal s | world w)`.
    pub kernel: Vec<Vec<Q>>,
}

/// A joint private signal: one component per agent (A side first, then B side).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PrivateSignal {
    pub components: Vec<String>,
    pub matching: Matching,
}

impl PrivateSignal {
    pub fn component(&self, x: Agent, n: usize) -> &str {
        match x.side {
            Side::A => &self.components[x.idx],
            Side::B => &self.components[n + x.idx],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrivatePolicy {
    pub signals: Vec<PrivateSignal>,
    pub kernel: Vec<Vec<Q>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Policy {
    Public(PublicPolicy),
    Private(PrivatePolicy),
}

fn check_kernel(inst: &Instance, kernel: &[Vec<Q>], signals: usize) -> Result<()> {
    if kernel.len() != signals {
        return Err(Error::input("kernel row count differs from signal count"));
    }
    let w = inst.num_worlds();
    if kernel.iter().any(|r| r.len() != w) {
        return Err(Error::input("kernel rows must cover every world"));
    }
    if kernel.iter().flatten().any(|v| v.is_negative()) {
        return Err(Error::input("kernel has a negative probability"));
    }
    for j in 0..w {
        let s = kernel.iter().fold(Q::zero(), |acc, r| acc + &r[j]);
        if s != Q::from_integer(1.into()) {
            return Err(Error::input(format!(
                "kernel for world {:?} sums to {}",
                inst.worlds[j],
                fmt_q(&s)
            )));
        }
    }
    Ok(())
}

impl PublicPolicy {
    pub fn validate(&self, inst: &Instance) -> Result<()> {
        check_kernel(inst, &self.kernel, self.signals.len())?;
        for s in &self.signals {
            if s.matching.n() != inst.n() {
                return Err(Error::input("matching size differs from instance"));
            }
            if let Some(p) = &s.profile {
                p.check_shape(inst.n(), inst.n())?;
            }
        }
        Ok(())
    }

    /// Marginal probability of signal `s`.
    pub fn marginal(&self, inst: &Instance, s: usize) -> Q {
        self.kernel[s]
            .iter()
            .zip(&inst.prior)
            .fold(Q::zero(), |acc, (k, m)| acc + k * m)
    }
}

impl PrivatePolicy {
    pub fn validate(&self, inst: &Instance) -> Result<()> {
        check_kernel(inst, &self.kernel, self.signals.len())?;
        for s in &self.signals {
            if s.matching.n() != inst.n() {
                return Err(Error::input("matching size differs from instance"));
            }
            if s.components.len() != 2 * inst.n() {
                return Err(Error::input("joint signal must name every agent"));
            }
        }
        Ok(())
    }

    pub fn marginal(&self, inst: &Instance, s: usize) -> Q {
        self.kernel[s]
            .iter()
            .zip(&inst.prior)
            .fold(Q::zero(), |acc, (k, m)| acc + k * m)
    }
}

impl Policy {
    pub fn validate(&self, inst: &Instance) -> Result<()> {
        match self {
            Policy::Public(p) => p.validate(inst),
            Policy::Private(p) => p.validate(inst),
        }
    }

    pub fn num_signals(&self) -> usize {
        match self {
            Policy::Public(p) => p.signals.len(),
            Policy::Private(p) => p.signals.len(),
        }
    }

    pub fn kernel(&self) -> &[Vec<Q>] {
        match self {
            Policy::Public(p) => &p.kernel,
            Policy::Private(p) => &p.kernel,
        }
    }

    pub fn matching(&self, s: usize) -> &Matching {
        match self {
            Policy::Public(p) => &p.signals[s].matching,
            Policy::Private(p) => &p.signals[s].matching,
        }
    }
}
