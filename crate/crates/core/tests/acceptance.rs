use std::time::{Duration, Instant};

use num::{BigInt, One, Zero};
use rand::seq::SliceRandom;
use stable_persuasion::gen::{grid_q, random_instance, random_smti, random_typed, rng};
use stable_persuasion::io::parse_instance;
use stable_persuasion::lp::enumerate_vertices;
use stable_persuasion::matching::{all_matchings, wsm_brute, wsm_strict, WsmProblem, DEFAULT_BRUTE_CAP};
use stable_persuasion::model::{
    bayes_plausible, in_cell, induced_profile, is_indicative, is_private_indicative, is_stable_matching,
    is_stable_policy, policy_utility, reduce_policy_support, stable_under_profile, value_at, Instance, Matching,
    MetaSignal, Policy, Posterior, PreferenceProfile, PublicPolicy, Side,
};
use stable_persuasion::oracle::{solve_oracle_public, solve_oracle_restricted};
use stable_persuasion::rational::{is_integer, q, qf, Q};
use stable_persuasion::reductions::{
    build_proof_policy, dummy_pair_posteriors, max_stable_size, smti_restrict, smti_to_wsm,
    wsm_to_private_persuasion, DEFAULT_SMTI_NODE_CAP,
};
use stable_persuasion::typed::{
    expand_typed_policy, parse_typed_instance, prototype_polytope, solve_private_typed, solve_public_typed,
    type_level_instance, typed_private_indicative, Prototype, TypedCaps, TypedInstance, TypedSolution,
};
use stable_persuasion::worlds::{
    check_non_degenerate, crossing_points, enumerate_proper_cells, perturb, solve_public_small_worlds, Degeneracy,
    WorldsCaps,
};

mod common;
use common::{one_tie_problem, optimum_with_resolution};

const CELL_CAP: usize = 3;
const EXPAND_CAP: usize = 10_000;

type Criterion = (&'static str, u64, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn example1() -> Instance {
    parse_instance(include_str!("../fixtures/example1.json")).unwrap()
}

fn example2() -> TypedInstance {
    parse_typed_instance(include_str!("../fixtures/example2.json")).unwrap()
}

fn public_ok(inst: &Instance, policy: &PublicPolicy) -> bool {
    let p = Policy::Public(policy.clone());
    is_stable_policy(inst, &p).unwrap().stable && bayes_plausible(inst, &p) && is_indicative(inst, policy).unwrap()
}

fn typed_ok(ti: &TypedInstance, sol: &TypedSolution) -> bool {
    let (inst, pol) = expand_typed_policy(ti, &sol.policy, EXPAND_CAP).unwrap();
    let indicative = match &pol {
        Policy::Public(p) => is_indicative(&inst, p).unwrap(),
        Policy::Private(p) => typed_private_indicative(ti, &inst, p).unwrap(),
    };
    indicative
        && is_stable_policy(&inst, &pol).unwrap().stable
        && bayes_plausible(&inst, &pol)
        && policy_utility(&inst, &pol) == sol.value
}

fn example1_values() -> Outcome {
    let inst = example1();
    let public = solve_oracle_public(&inst).unwrap().value;
    let restricted = solve_oracle_restricted(&inst).unwrap().value;
    outcome(
        public == q(1) && restricted == qf(3, 4),
        format!("public {public} (want 1), matching-only {restricted} (want 3/4)"),
    )
}

fn example1_blocking_pair() -> Outcome {
    let inst = example1();
    let m1 = Matching::identity(2);
    let half = Posterior::new(vec![qf(1, 2), qf(1, 2)]).unwrap();
    let report = is_stable_matching(&inst, &m1, &half);
    let policy = Policy::Public(PublicPolicy {
        signals: vec![MetaSignal { profile: None, matching: m1, tag: None }],
        kernel: vec![vec![q(1), q(1)]],
    });
    let cert = is_stable_policy(&inst, &policy).unwrap();
    let found = report.blocking.iter().any(|b| (b.a, b.b) == (0, 1))
        && cert.violations.iter().any(|v| (v.pair.a, v.pair.b) == (0, 1));
    outcome(!report.stable && !cert.stable && found, format!("{} blocking pair(s) at (1/2, 1/2)", report.blocking.len()))
}

fn example2_values() -> Outcome {
    let ti = example2();
    let private = solve_private_typed(&ti, TypedCaps::default()).unwrap();
    let public = solve_public_typed(&ti, TypedCaps::default()).unwrap();
    let verified = typed_ok(&ti, &private) && typed_ok(&ti, &public);
    outcome(
        private.value == q(4) && public.value < q(4) && verified,
        format!("private {} (want 4), public {} (want < 4), verified {verified}", private.value, public.value),
    )
}

fn all_prototypes(ta: usize, tb: usize) -> Vec<Prototype> {
    let cells: Vec<(usize, usize)> = (0..ta).flat_map(|s| (0..tb).map(move |t| (s, t))).collect();
    (1u64..(1 << cells.len()))
        .map(|mask| Prototype {
            pairs: cells.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &c)| c).collect(),
        })
        .collect()
}

fn integer_vertices() -> Outcome {
    let mut instances = 0;
    let mut polytopes = 0;
    let mut vertices = 0;
    for seed in 0..100u64 {
        let ta = 1 + (seed % 3) as usize;
        let tb = 1 + (seed / 3 % 3) as usize;
        let ti = random_typed(ta, tb, 2, 6, 100, 4000 + seed).unwrap();
        instances += 1;
        for proto in all_prototypes(ta, tb) {
            let poly = prototype_polytope(&ti, &proto);
            let vs = enumerate_vertices(&poly, poly.dim()).unwrap();
            if !vs.is_empty() {
                polytopes += 1;
            }
            for v in &vs {
                vertices += 1;
                if !v.iter().all(is_integer) {
                    return outcome(false, format!("fractional vertex {v:?} (seed {seed})"));
                }
            }
        }
    }
    outcome(instances >= 100, format!("{instances} instances, {polytopes} feasible polytopes, {vertices} vertices"))
}

fn oracle_equivalence() -> Outcome {
    let mut worlds = 0;
    let mut seed = 0u64;
    while worlds < 100 {
        let inst = random_instance(2, 2, 1000, seed).unwrap();
        seed += 1;
        if check_non_degenerate(&inst, 1_000_000).unwrap().is_degenerate() {
            continue;
        }
        let sol = solve_public_small_worlds(&inst, WorldsCaps::default()).unwrap();
        let oracle = solve_oracle_public(&inst).unwrap().value;
        if sol.value != oracle || sol.label() != "optimal" {
            return outcome(false, format!("seed {}: worlds {} vs oracle {oracle}", seed - 1, sol.value));
        }
        worlds += 1;
    }
    let mut typed = 0;
    for seed in 0..50u64 {
        let t = 1 + (seed % 2) as usize;
        let ti = random_typed(t, t, 2, 1, 1000, 5000 + seed).unwrap();
        let sol = solve_public_typed(&ti, TypedCaps::default()).unwrap();
        let oracle = solve_oracle_public(&type_level_instance(&ti, EXPAND_CAP).unwrap()).unwrap().value;
        if sol.value != oracle {
            return outcome(false, format!("typed seed {seed}: {} vs oracle {oracle}", sol.value));
        }
        typed += 1;
    }
    outcome(true, format!("{worlds} worlds instances, {typed} typed instances"))
}

fn random_strict_wsm(n: usize, seed: u64) -> WsmProblem {
    let mut r = rng(seed);
    let list = |r: &mut _| {
        let mut l: Vec<usize> = (0..n).collect();
        l.shuffle(r);
        l.into_iter().map(|x| vec![x]).collect::<Vec<_>>()
    };
    let a = (0..n).map(|_| list(&mut r)).collect();
    let b = (0..n).map(|_| list(&mut r)).collect();
    let weights = (0..n).map(|_| (0..n).map(|_| grid_q(&mut r, 0, 100, 100)).collect()).collect();
    WsmProblem { profile: PreferenceProfile { a, b }, weights }
}

fn wsm_cross_check() -> Outcome {
    let mut count = 0;
    for seed in 0..240u64 {
        let n = 1 + (seed % 6) as usize;
        let prob = random_strict_wsm(n, seed);
        let (ms, vs) = wsm_strict(&prob).unwrap();
        let (mb, vb) = wsm_brute(&prob, DEFAULT_BRUTE_CAP).unwrap();
        let stable = stable_under_profile(&prob.profile, &ms) && stable_under_profile(&prob.profile, &mb);
        if vs != vb || !stable || prob.value(&ms) != vs {
            return outcome(false, format!("seed {seed}: strict {vs} vs brute {vb}, stable {stable}"));
        }
        count += 1;
    }
    outcome(count >= 200, format!("{count} instances, n up to 6"))
}

/// A stable indicative three-signal policy whose posteriors are three random
/// points of the segment; the prior is moved to their barycenter.
fn inflated_policy(n: usize, seed: u64) -> (Instance, PublicPolicy) {
    let mut inst = random_instance(n, 2, 1000, seed).unwrap();
    let mut r = rng(seed + 77);
    let posts: Vec<Vec<Q>> = (0..3)
        .map(|_| {
            let t = grid_q(&mut r, 1, 99, 100);
            vec![Q::one() - &t, t]
        })
        .collect();
    let third = qf(1, 3);
    inst.prior = (0..2).map(|w| posts.iter().map(|p| &p[w] * &third).sum()).collect();
    let mut signals = Vec::new();
    for (k, p) in posts.iter().enumerate() {
        let post = Posterior::new(p.clone()).unwrap();
        let matching = all_matchings(n)
            .filter(|m| is_stable_matching(&inst, m, &post).stable)
            .max_by_key(|m| (0..2).map(|w| inst.matching_utility(m, w) * &p[w]).sum::<Q>())
            .unwrap();
        signals.push(MetaSignal {
            profile: Some(induced_profile(&inst, p, None).unwrap()),
            matching,
            tag: Some(format!("s{k}")),
        });
    }
    let kernel = posts.iter().map(|p| (0..2).map(|w| &third * &p[w] / &inst.prior[w]).collect()).collect();
    (inst, PublicPolicy { signals, kernel })
}

fn support_bound() -> Outcome {
    let mut solved = 0;
    for seed in 0..30u64 {
        let n = if seed < 24 { 2 } else { 3 };
        let inst = random_instance(n, 2, 1000, 6000 + seed).unwrap();
        let sol = solve_public_small_worlds(&inst, WorldsCaps::default()).unwrap();
        if sol.policy.signals.len() > inst.num_worlds() {
            return outcome(false, format!("worlds seed {seed}: {} signals", sol.policy.signals.len()));
        }
        solved += 1;
    }
    let mut reduced = 0;
    for seed in 0..30u64 {
        let (inst, policy) = inflated_policy(2 + (seed % 2) as usize, 7000 + seed);
        assert!(public_ok(&inst, &policy), "inflated input {seed} is not stable and indicative");
        let before = policy_utility(&inst, &Policy::Public(policy.clone()));
        let out = reduce_policy_support(&inst, &policy).unwrap();
        let after = policy_utility(&inst, &Policy::Public(out.clone()));
        if out.signals.len() > 2 || after < before || !public_ok(&inst, &out) {
            return outcome(false, format!("inflated seed {seed}: {} signals, {before} -> {after}", out.signals.len()));
        }
        reduced += 1;
    }
    outcome(true, format!("{solved} solver outputs, {reduced} inflated policies reduced to at most 2 signals"))
}

fn cell_suite() -> Outcome {
    let ex1 = example1();
    let ex1_cells = enumerate_proper_cells(&ex1, CELL_CAP).unwrap();
    let ex1_edges: Vec<Q> = ex1_cells.iter().skip(1).map(|c| c.interval.clone().unwrap().0).collect();
    if crossing_points(&ex1) != vec![qf(1, 3), qf(2, 3)] || ex1_edges != vec![qf(1, 3), qf(2, 3)] {
        return outcome(false, format!("example 1 boundaries {ex1_edges:?}"));
    }
    let mut checked = 1;
    let mut max_cells = ex1_cells.len();
    for seed in 0..40u64 {
        let (n, w) = if seed < 30 { (3, 2) } else { (2, 3) };
        let inst = random_instance(n, w, 1000, 8000 + seed).unwrap();
        let cells = enumerate_proper_cells(&inst, CELL_CAP).unwrap();
        max_cells = max_cells.max(cells.len());
        if cells.len() > n.pow(3 * w as u32) {
            return outcome(false, format!("seed {seed}: {} cells", cells.len()));
        }
        for c in &cells {
            if induced_profile(&inst, &c.witness, None).unwrap() != c.profile || !in_cell(&inst, &c.profile, &c.witness) {
                return outcome(false, format!("seed {seed}: witness leaves its cell"));
            }
        }
        if w == 2 {
            let mut prev = Q::zero();
            let mut edges = Vec::new();
            for c in &cells {
                let (lo, hi) = c.interval.clone().unwrap();
                if lo != prev || lo >= hi {
                    return outcome(false, format!("seed {seed}: gap or overlap at {lo}"));
                }
                if hi < Q::one() {
                    edges.push(hi.clone());
                }
                prev = hi;
            }
            if prev != Q::one() || edges != crossing_points(&inst) {
                return outcome(false, format!("seed {seed}: boundaries differ from crossing points"));
            }
        }
        checked += 1;
    }
    outcome(true, format!("{checked} instances, at most {max_cells} cells"))
}

fn non_degeneracy() -> Outcome {
    let Degeneracy::Degenerate { witness } = check_non_degenerate(&example1(), 1_000_000).unwrap() else {
        return outcome(false, "example 1 not flagged");
    };
    let dependent = witness.len() == 2 && {
        let (u, v) = (&witness[0].vec, &witness[1].vec);
        (&u[0] * &v[1] - &u[1] * &v[0]).is_zero()
    };
    let passed = (0..20u64)
        .filter(|&s| check_non_degenerate(&perturb(&example1(), &qf(1, 100), s).unwrap(), 1_000_000).unwrap()
            == Degeneracy::NonDegenerate)
        .count();
    outcome(dependent && passed >= 19, format!("witness dependent {dependent}, {passed}/20 perturbed seeds pass"))
}

/// Relative orders of the first tied agent and of the first side-B agent at
/// the probe beliefs, for the fixed one-tie problem.
fn gadget_probes_hold() -> bool {
    let inst = wsm_to_private_persuasion(&one_tie_problem()).unwrap();
    let order = |side: Side, x: usize, p2: &Q| {
        induced_profile(&inst, &[Q::one() - p2, p2.clone()], None).unwrap().tiers(side, x).to_vec()
    };
    let pos = |tiers: &[Vec<usize>], y: usize| tiers.iter().position(|t| t.contains(&y)).unwrap();
    let (lo, hi, x, y) = (1usize, 0usize, 0usize, 2usize);
    let q_star = Q::one() - value_at(inst.vb(0, y), &[q(1), q(0)]) / q(2);
    [Q::zero(), qf(1, 5), q_star.clone(), Q::one()].iter().all(|p2| {
        let a = order(Side::A, 0, p2);
        let b = order(Side::B, 0, p2);
        let tie_ok = if p2.is_zero() { pos(&a, hi) < pos(&a, lo) } else { pos(&a, lo) < pos(&a, hi) };
        let b_ok = if *p2 == q_star {
            pos(&b, x) == pos(&b, y)
        } else if p2.is_one() {
            pos(&b, x) > pos(&b, y)
        } else {
            pos(&b, x) < pos(&b, y)
        };
        tie_ok && b_ok && pos(&a, 3) == 3 && pos(&b, 3) == 0
    })
}

fn reductions() -> Outcome {
    let mut restricted = 0;
    for seed in 0..200u64 {
        let m = random_smti(3, 3, 60, 60, false, 9000 + seed).unwrap();
        let (out, book) = smti_restrict(&m).unwrap();
        if book.a2 == 0 {
            continue;
        }
        let lhs = max_stable_size(&out, DEFAULT_SMTI_NODE_CAP).unwrap();
        let rhs = max_stable_size(&m, DEFAULT_SMTI_NODE_CAP).unwrap() + book.a2 + book.a3;
        if lhs != rhs {
            return outcome(false, format!("restrict seed {seed}: {lhs} vs {rhs}"));
        }
        restricted += 1;
        if restricted == 60 {
            break;
        }
    }
    for seed in 0..120u64 {
        let (na, nb) = (2 + (seed % 3) as usize, 2 + (seed / 3 % 3) as usize);
        let m = random_smti(na, nb, 55, 40, true, seed).unwrap();
        let v = wsm_brute(&smti_to_wsm(&m).unwrap(), DEFAULT_BRUTE_CAP).unwrap().1;
        if v != q(max_stable_size(&m, DEFAULT_SMTI_NODE_CAP).unwrap() as i64) {
            return outcome(false, format!("smti-wsm seed {seed}"));
        }
    }
    if !gadget_probes_hold() {
        return outcome(false, "gadget orders differ at a probe belief");
    }
    let mut proofs = 0;
    let mut problems = vec![one_tie_problem()];
    problems.extend((0..40u64).map(|s| smti_to_wsm(&random_smti(4, 4, 60, 50, true, 1000 + s).unwrap()).unwrap()));
    for w in &problems {
        let (m_star, res, value) = optimum_with_resolution(w);
        let inst = wsm_to_private_persuasion(w).unwrap();
        let policy = build_proof_policy(&inst, &m_star, &res).unwrap();
        let wrapped = Policy::Private(policy.clone());
        let ok = is_stable_policy(&inst, &wrapped).unwrap().stable
            && is_private_indicative(&inst, &policy).unwrap()
            && bayes_plausible(&inst, &wrapped)
            && policy_utility(&inst, &wrapped) == value
            && dummy_pair_posteriors(&inst, &policy).iter().all(|p| *p <= qf(1, 2));
        if !ok {
            return outcome(false, format!("proof policy {proofs} fails"));
        }
        proofs += 1;
    }
    outcome(
        restricted >= 50,
        format!("{restricted} restrictions with ties, 120 value identities, probes hold, {proofs} proof policies"),
    )
}

fn typed_solve_time(ti: &TypedInstance) -> Duration {
    (0..3)
        .map(|_| {
            let start = Instant::now();
            solve_public_typed(ti, TypedCaps::default()).unwrap();
            solve_private_typed(ti, TypedCaps::default()).unwrap();
            start.elapsed()
        })
        .min()
        .unwrap()
}

fn self_verification() -> Outcome {
    let mut policies = 0;
    let mut insts = vec![example1()];
    insts.extend((0..8u64).map(|s| random_instance(2, 2, 1000, 10_000 + s).unwrap()));
    for inst in &insts {
        for pol in [
            solve_oracle_public(inst).unwrap().policy,
            solve_oracle_restricted(inst).unwrap().policy,
            solve_public_small_worlds(inst, WorldsCaps::default()).unwrap().policy,
        ] {
            if !public_ok(inst, &pol) {
                return outcome(false, format!("public policy {policies} fails"));
            }
            policies += 1;
        }
    }
    let mut tis = vec![example2()];
    tis.extend((0..6u64).map(|s| random_typed(2, 2, 2, 3, 100, 11_000 + s).unwrap()));
    for ti in &tis {
        for sol in [
            solve_public_typed(ti, TypedCaps::default()).unwrap(),
            solve_private_typed(ti, TypedCaps::default()).unwrap(),
        ] {
            if !typed_ok(ti, &sol) {
                return outcome(false, format!("typed policy {policies} fails"));
            }
            policies += 1;
        }
    }
    let mut small = Duration::ZERO;
    let mut large = Duration::ZERO;
    for s in 0..4u64 {
        let ti = random_typed(2, 3, 2, 4, 100, 12_000 + s).unwrap();
        let mut big = ti.clone();
        for x in big.a_sizes.iter_mut().chain(big.b_sizes.iter_mut()) {
            *x *= BigInt::from(1024);
        }
        small += typed_solve_time(&ti);
        large += typed_solve_time(&big);
    }
    let ratio = large.as_secs_f64() / small.as_secs_f64();
    outcome(ratio <= 2.0, format!("{policies} policies verified, typed time ratio at sizes x1024: {ratio:.2}"))
}

#[test]
fn acceptance_criteria() {
    let criteria: Vec<Criterion> = vec![
        ("example 1 values", 5, example1_values),
        ("example 1 blocking pair", 1, example1_blocking_pair),
        ("example 2 values", 30, example2_values),
        ("integer vertices", 60, integer_vertices),
        ("oracle equivalence", 600, oracle_equivalence),
        ("wsm cross-check", 120, wsm_cross_check),
        ("support bound", 120, support_bound),
        ("cell suite", 60, cell_suite),
        ("non-degeneracy", 60, non_degeneracy),
        ("reductions", 300, reductions),
        ("self-verification", 300, self_verification),
    ];
    let mut failed = Vec::new();
    for (k, (name, limit, run)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let out = run();
        let secs = start.elapsed().as_secs_f64();
        let pass = out.pass && secs < limit as f64;
        println!(
            "{} [{}] {name}: {} ({secs:.2}s, limit {limit}s)",
            if pass { "PASS" } else { "FAIL" },
            k + 1,
            out.detail
        );
        if !pass {
            failed.push(k + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
