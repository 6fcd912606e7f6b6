//! Seeded random instance generators.

use num::BigInt;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::model::Instance;
use crate::rational::Q;
use crate::reductions::{PersuasionInstance, SmtiInstance};
use crate::typed::TypedInstance;

pub const DEFAULT_GRID: i64 = 1000;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A uniform draw from `{lo/grid, ..., hi/grid}`.
pub fn grid_q(rng: &mut impl Rng, lo: i64, hi: i64, grid: i64) -> Q {
    Q::new(BigInt::from(rng.gen_range(lo..=hi)), BigInt::from(grid))
}

/// A full-support distribution with grid-valued weights.
pub fn random_prior(rng: &mut impl Rng, w: usize, grid: i64) -> Vec<Q> {
    let raw: Vec<Q> = (0..w).map(|_| grid_q(rng, 1, grid, grid)).collect();
    let total: Q = raw.iter().sum();
    raw.into_iter().map(|x| x / &total).collect()
}

fn table(rng: &mut impl Rng, n: usize, w: usize, lo: i64, hi: i64, grid: i64) -> Vec<Vec<Vec<Q>>> {
    (0..n)
        .map(|_| (0..n).map(|_| (0..w).map(|_| grid_q(rng, lo, hi, grid)).collect()).collect())
        .collect()
}

/// Valuations in `[-1, 1]` and utilities in `[0, 1]` on a grid of step `1/grid`.
pub fn random_instance(n: usize, w: usize, grid: i64, seed: u64) -> Result<Instance> {
    let mut r = rng(seed);
    let prior = random_prior(&mut r, w, grid);
    let va = table(&mut r, n, w, -grid, grid, grid);
    let vb = table(&mut r, n, w, -grid, grid, grid);
    let util = table(&mut r, n, w, 0, grid, grid);
    Instance::new(
        (1..=w).map(|i| format!("w{i}")).collect(),
        prior,
        (1..=n).map(|i| format!("a{i}")).collect(),
        (1..=n).map(|i| format!("b{i}")).collect(),
        va,
        vb,
        util,
    )
}

/// Random type sizes in `1..=max_size` with both sides summing to the same total.
fn balanced_sizes(rng: &mut impl Rng, ta: usize, tb: usize, max_size: u64) -> (Vec<BigInt>, Vec<BigInt>) {
    loop {
        let a: Vec<u64> = (0..ta).map(|_| rng.gen_range(1..=max_size)).collect();
        let total: u64 = a.iter().sum();
        if total < tb as u64 {
            continue;
        }
        // Split `total` into `tb` positive parts.
        let mut cuts: Vec<u64> = (0..tb - 1).map(|_| rng.gen_range(1..total)).collect();
        cuts.sort_unstable();
        cuts.dedup();
        if cuts.len() != tb - 1 {
            continue;
        }
        let mut b = Vec::with_capacity(tb);
        let mut prev = 0;
        for c in cuts.into_iter().chain(std::iter::once(total)) {
            b.push(c - prev);
            prev = c;
        }
        return (a.into_iter().map(BigInt::from).collect(), b.into_iter().map(BigInt::from).collect());
    }
}

/// A typed market with `ta` and `tb` types; sizes are drawn from `1..=max_size`
/// (all equal to one when `max_size` is 1 and `ta == tb`).
pub fn random_typed(ta: usize, tb: usize, w: usize, max_size: u64, grid: i64, seed: u64) -> Result<TypedInstance> {
    let mut r = rng(seed);
    let (a_sizes, b_sizes) = if max_size == 1 && ta == tb {
        (vec![BigInt::from(1); ta], vec![BigInt::from(1); tb])
    } else {
        balanced_sizes(&mut r, ta, tb, max_size.max(1))
    };
    let prior = random_prior(&mut r, w, grid);
    let rect = |r: &mut ChaCha8Rng, rows: usize, cols: usize, lo: i64| -> Vec<Vec<Vec<Q>>> {
        (0..rows).map(|_| (0..cols).map(|_| (0..w).map(|_| grid_q(r, lo, grid, grid)).collect()).collect()).collect()
    };
    let va = rect(&mut r, ta, tb, -grid);
    let vb = rect(&mut r, tb, ta, -grid);
    let util = rect(&mut r, ta, tb, 0);
    let ti = TypedInstance {
        worlds: (1..=w).map(|i| format!("w{i}")).collect(),
        prior,
        a_types: (1..=ta).map(|i| format!("A{i}")).collect(),
        b_types: (1..=tb).map(|i| format!("B{i}")).collect(),
        a_sizes,
        b_sizes,
        va,
        vb,
        util,
    };
    ti.validate()?;
    Ok(ti)
}

/// Random acceptability lists in random order; each side-A agent gets a tie of
/// two unlisted agents with probability `tie_pct` percent. With `disjoint_ties`
/// no side-B agent is tied in two lists.
pub fn random_smti(na: usize, nb: usize, accept_pct: u32, tie_pct: u32, disjoint_ties: bool, seed: u64) -> Result<SmtiInstance> {
    let mut r = rng(seed);
    let pick = |r: &mut ChaCha8Rng, len: usize| -> Vec<usize> {
        let mut v: Vec<usize> = (0..len).filter(|_| r.gen_ratio(accept_pct.min(100), 100)).collect();
        v.shuffle(r);
        v
    };
    let mut pa: Vec<Vec<usize>> = (0..na).map(|_| pick(&mut r, nb)).collect();
    let pb: Vec<Vec<usize>> = (0..nb).map(|_| pick(&mut r, na)).collect();
    let mut ta = vec![Vec::new(); na];
    let mut tied = vec![false; nb];
    for a in 0..na {
        if !r.gen_ratio(tie_pct.min(100), 100) {
            continue;
        }
        let mut free: Vec<usize> = (0..nb).filter(|b| !(disjoint_ties && tied[*b])).collect();
        free.shuffle(&mut r);
        free.truncate(2);
        if free.len() < 2 {
            continue;
        }
        pa[a].retain(|b| !free.contains(b));
        for &b in &free {
            tied[b] = true;
        }
        ta[a] = free;
    }
    let m = SmtiInstance {
        a: (1..=na).map(|i| format!("a{i}")).collect(),
        b: (1..=nb).map(|i| format!("b{i}")).collect(),
        pa,
        ta,
        pb,
    };
    m.validate()?;
    Ok(m)
}

/// Two actions and `k` receivers with values in `[-1, 1]` and utilities in `[0, 1]`.
pub fn random_persuasion(k: usize, w: usize, grid: i64, seed: u64) -> Result<PersuasionInstance> {
    let mut r = rng(seed);
    let prior = random_prior(&mut r, w, grid);
    let mut rect = |lo: i64| -> Vec<Vec<Vec<Q>>> {
        (0..k).map(|_| (0..2).map(|_| (0..w).map(|_| grid_q(&mut r, lo, grid, grid)).collect()).collect()).collect()
    };
    let values = rect(-grid);
    let utility = rect(0);
    let pp = PersuasionInstance {
        worlds: (1..=w).map(|i| format!("w{i}")).collect(),
        prior,
        receivers: (1..=k).map(|i| format!("r{i}")).collect(),
        actions: vec!["x".into(), "y".into()],
        values,
        utility,
    };
    pp.validate()?;
    Ok(pp)
}
