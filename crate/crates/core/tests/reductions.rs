use num::{One, Zero};
use stable_persuasion::gen::{random_persuasion, random_smti};
use stable_persuasion::io::parse_json;
use stable_persuasion::matching::{all_matchings, wsm_brute, WsmProblem, DEFAULT_BRUTE_CAP};
use stable_persuasion::model::{
    bayes_plausible, induced_profile, is_private_indicative, is_stable_matching, is_stable_policy, policy_utility,
    stable_under_profile, value_at, Matching, Policy, Posterior, PreferenceProfile, Side,
};
use stable_persuasion::rational::{q, qf, Q};
use stable_persuasion::reductions::{
    action_copy, build_proof_policy, dummy_pair_posteriors, max_stable_size, persuasion_from_value,
    persuasion_to_json, persuasion_to_matching, receiver_actions, smti_from_value, smti_restrict, smti_to_json,
    smti_to_wsm, wsm_to_private_persuasion, PersuasionInstance, SmtiInstance, DEFAULT_SMTI_NODE_CAP,
};
use stable_persuasion::Error;

mod common;
use common::{one_tie_problem, optimum_with_resolution, resolutions, strict};

fn names(c: char, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{c}{i}")).collect()
}

fn smti(pa: &[&[usize]], ta: &[&[usize]], pb: &[&[usize]]) -> SmtiInstance {
    let m = SmtiInstance {
        a: names('a', pa.len()),
        b: names('b', pb.len()),
        pa: pa.iter().map(|l| l.to_vec()).collect(),
        ta: ta.iter().map(|l| l.to_vec()).collect(),
        pb: pb.iter().map(|l| l.to_vec()).collect(),
    };
    m.validate().unwrap();
    m
}

fn size(m: &SmtiInstance) -> usize {
    max_stable_size(m, DEFAULT_SMTI_NODE_CAP).unwrap()
}

#[test]
fn restrict_without_ties_is_identity() {
    let m = smti(&[&[0, 1], &[1]], &[&[], &[]], &[&[1, 0], &[0]]);
    let (out, book) = smti_restrict(&m).unwrap();
    assert_eq!(out, m);
    assert_eq!((book.a2, book.a3), (0, 0));
}

#[test]
fn restrict_single_tie_adds_one_dummy_per_tied_agent() {
    let m = smti(&[&[2], &[0]], &[&[0, 1], &[]], &[&[0, 1], &[0], &[0]]);
    let (out, book) = smti_restrict(&m).unwrap();
    assert_eq!((book.a2, book.a3), (2, 0));
    assert_eq!(out.a.len(), 4);
    assert_eq!(out.b.len(), 1 + 2 + 2);
    assert_eq!(size(&out), size(&m) + book.a2 + book.a3);
}

#[test]
fn restrict_shared_tie_member_gets_filler() {
    let m = smti(&[&[], &[], &[1]], &[&[0, 1], &[0, 2], &[]], &[&[0, 1], &[2, 0], &[1]]);
    let (out, book) = smti_restrict(&m).unwrap();
    assert_eq!((book.a2, book.a3), (4, 1));
    assert_eq!(size(&out), size(&m) + 5);
}

#[test]
fn restrict_size_identity_on_random_instances() {
    let mut checked = 0;
    for seed in 0..80 {
        let m = random_smti(3, 3, 60, 60, false, seed).unwrap();
        let (out, book) = smti_restrict(&m).unwrap();
        assert_eq!(size(&out), size(&m) + book.a2 + book.a3, "seed {seed}");
        if book.a2 > 0 {
            checked += 1;
        }
    }
    assert!(checked >= 50);
}

#[test]
fn wsm_of_complete_lists_has_unit_weights() {
    let m = smti(&[&[0, 1], &[1, 0]], &[&[], &[]], &[&[0, 1], &[0, 1]]);
    let w = smti_to_wsm(&m).unwrap();
    assert!(w.weights.iter().flatten().all(|x| x.is_one()));
    assert_eq!(wsm_brute(&w, DEFAULT_BRUTE_CAP).unwrap().1, q(2));
}

#[test]
fn wsm_of_empty_lists_is_zero() {
    let m = smti(&[&[], &[]], &[&[], &[]], &[&[], &[]]);
    let w = smti_to_wsm(&m).unwrap();
    assert_eq!(wsm_brute(&w, DEFAULT_BRUTE_CAP).unwrap().1, Q::zero());
}

#[test]
fn wsm_value_matches_max_stable_size() {
    for seed in 0..120 {
        let (na, nb) = (2 + (seed % 3) as usize, 2 + (seed / 3 % 3) as usize);
        let m = random_smti(na, nb, 55, 40, true, seed).unwrap();
        let w = smti_to_wsm(&m).unwrap();
        let (_, v) = wsm_brute(&w, DEFAULT_BRUTE_CAP).unwrap();
        assert_eq!(v, q(size(&m) as i64), "seed {seed}");
    }
}

fn order_of(inst: &stable_persuasion::model::Instance, side: Side, x: usize, p2: Q) -> Vec<Vec<usize>> {
    let p = vec![Q::one() - &p2, p2];
    induced_profile(inst, &p, None).unwrap().tiers(side, x).to_vec()
}

fn position(tiers: &[Vec<usize>], y: usize) -> usize {
    tiers.iter().position(|t| t.contains(&y)).unwrap()
}

#[test]
fn gadget_relative_orders_at_probes() {
    let w = one_tie_problem();
    let inst = wsm_to_private_persuasion(&w).unwrap();
    assert_eq!(inst.prior, vec![qf(4, 5), qf(1, 5)]);
    // a1's worst-first list is b2, b1, b3 with the tie at the bottom.
    let (lo, hi) = (1usize, 0usize);
    let tie_p = qf(1, 10);
    assert_eq!(value_at(inst.va(0, lo), &[Q::one() - &tie_p, tie_p.clone()]), value_at(inst.va(0, hi), &[Q::one() - &tie_p, tie_p.clone()]));
    assert!(tie_p < qf(1, 5));
    // b1 is tied only by a1; its worst-first order is a3, a1, a2, so a3 sits just below a1.
    let (x, y) = (0usize, 2usize);
    let vy = value_at(inst.vb(0, y), &[q(1), q(0)]);
    let q_star = Q::one() - vy / q(2);
    assert!(q_star > qf(1, 2));
    for p2 in [Q::zero(), qf(1, 5), q_star.clone(), Q::one()] {
        let a_order = order_of(&inst, Side::A, 0, p2.clone());
        let b_order = order_of(&inst, Side::B, 0, p2.clone());
        if p2.is_zero() {
            assert!(position(&a_order, hi) < position(&a_order, lo));
        } else {
            assert!(position(&a_order, lo) < position(&a_order, hi));
        }
        assert!(position(&a_order, 2) < position(&a_order, lo).min(position(&a_order, hi)));
        assert_eq!(position(&a_order, 3), 3);
        assert_eq!(position(&b_order, 3), 0);
        if p2 == q_star {
            assert_eq!(position(&b_order, x), position(&b_order, y));
        } else if p2.is_one() {
            assert!(position(&b_order, x) > position(&b_order, y));
            assert_eq!(*b_order.last().unwrap(), vec![x]);
        } else {
            assert!(position(&b_order, x) < position(&b_order, y));
            assert!(position(&b_order, 1) < position(&b_order, x));
        }
    }
}

#[test]
fn gadget_dummy_indifference_at_half() {
    let inst = wsm_to_private_persuasion(&one_tie_problem()).unwrap();
    let half = [qf(1, 2), qf(1, 2)];
    for b in 0..3 {
        assert_eq!(value_at(inst.va(3, b), &half), value_at(inst.va(3, 3), &half));
        assert!(value_at(inst.va(3, b), &inst.prior) < value_at(inst.va(3, 3), &inst.prior));
    }
    assert_eq!(inst.u(3, 3), &[Q::zero(), Q::zero()]);
    assert_eq!(inst.u(3, 0), &[q(-3), q(-3)]);
    assert_eq!(inst.u(1, 3), &[q(-3), q(-3)]);
}

#[test]
fn gadget_prior_orders_match_the_weak_profile() {
    let w = one_tie_problem();
    let inst = wsm_to_private_persuasion(&w).unwrap();
    let prior = induced_profile(&inst, &inst.prior, None).unwrap();
    for b in 0..3 {
        let order: Vec<usize> = prior.b[b].iter().flatten().copied().filter(|&a| a != 3).collect();
        let want: Vec<usize> = w.profile.b[b].iter().flatten().copied().collect();
        assert_eq!(order, want);
    }
    for r in [vec![q(1), q(0)], vec![q(0), q(1)]] {
        let p = induced_profile(&inst, &r, None).unwrap();
        assert!(p.a.iter().all(|t| t.iter().all(|x| x.len() == 1)) || p.a[3].len() < 4);
        let a0: Vec<usize> = p.a[0].iter().flatten().copied().filter(|&b| b != 3).collect();
        assert!(resolutions(&w.profile).iter().any(|s| s.a[0].iter().flatten().copied().collect::<Vec<_>>() == a0));
    }
}

#[test]
fn gadget_rejects_bad_inputs() {
    let mut w = one_tie_problem();
    w.weights[0][0] = q(2);
    assert!(matches!(wsm_to_private_persuasion(&w), Err(Error::Input(_))));
    let mut w = one_tie_problem();
    w.profile.a[1] = vec![vec![0], vec![1, 2]];
    assert!(matches!(wsm_to_private_persuasion(&w), Err(Error::Input(_))));
    let mut w = one_tie_problem();
    w.profile.b[0] = vec![vec![0, 1], vec![2]];
    assert!(matches!(wsm_to_private_persuasion(&w), Err(Error::Input(_))));
}

fn check_proof_policy(w: &WsmProblem) {
    let (m_star, res, value) = optimum_with_resolution(w);
    let inst = wsm_to_private_persuasion(w).unwrap();
    let policy = build_proof_policy(&inst, &m_star, &res).unwrap();
    assert!(is_private_indicative(&inst, &policy).unwrap());
    let wrapped = Policy::Private(policy.clone());
    let cert = is_stable_policy(&inst, &wrapped).unwrap();
    assert!(cert.stable, "{:?}", cert.violations);
    assert!(bayes_plausible(&inst, &wrapped));
    assert_eq!(policy_utility(&inst, &wrapped), value);
    assert_eq!(value, wsm_brute(w, DEFAULT_BRUTE_CAP).unwrap().1);
    let posts = dummy_pair_posteriors(&inst, &policy);
    assert!(!posts.is_empty());
    assert!(posts.iter().all(|p| *p <= qf(1, 2)));
}

#[test]
fn proof_policy_without_ties_reveals_nothing() {
    let w = WsmProblem {
        profile: PreferenceProfile { a: strict(&[&[0, 1], &[0, 1]]), b: strict(&[&[1, 0], &[0, 1]]) },
        weights: vec![vec![q(1), Q::zero()], vec![Q::zero(), q(1)]],
    };
    let inst = wsm_to_private_persuasion(&w).unwrap();
    let (m, res, _) = optimum_with_resolution(&w);
    let policy = build_proof_policy(&inst, &m, &res).unwrap();
    assert_eq!(policy.signals[0].components, policy.signals[1].components);
    check_proof_policy(&w);
}

#[test]
fn proof_policy_on_tie_instance() {
    check_proof_policy(&one_tie_problem());
}

#[test]
fn proof_policy_on_reduced_random_instances() {
    let mut with_ties = 0;
    for seed in 0..40 {
        let m = random_smti(4, 4, 60, 50, true, 1000 + seed).unwrap();
        if m.ta.iter().any(|t| !t.is_empty()) {
            with_ties += 1;
        }
        check_proof_policy(&smti_to_wsm(&m).unwrap());
    }
    assert!(with_ties >= 20);
}

#[test]
fn proof_policy_rejects_unstable_matching() {
    let w = one_tie_problem();
    let inst = wsm_to_private_persuasion(&w).unwrap();
    let res = &resolutions(&w.profile)[0];
    let bad = all_matchings(3).find(|m| !stable_under_profile(res, m)).unwrap();
    let err = build_proof_policy(&inst, &bad, res).unwrap_err();
    assert!(matches!(err, Error::Input(ref s) if s.contains("blocked")));
}

fn stable_matchings_at(inst: &stable_persuasion::model::Instance, p: &[Q]) -> Vec<Matching> {
    let post = Posterior::new(p.to_vec()).unwrap();
    all_matchings(inst.n()).filter(|m| is_stable_matching(inst, m, &post).stable).collect()
}

fn two_action(values: &[[[i64; 2]; 2]]) -> PersuasionInstance {
    PersuasionInstance {
        worlds: vec!["w1".into(), "w2".into()],
        prior: vec![qf(1, 2), qf(1, 2)],
        receivers: names('r', values.len()),
        actions: vec!["x".into(), "y".into()],
        values: values.iter().map(|r| r.iter().map(|c| c.iter().map(|&v| q(v)).collect()).collect()).collect(),
        utility: values.iter().map(|_| vec![vec![q(1), q(1)], vec![Q::zero(), Q::zero()]]).collect(),
    }
}

#[test]
fn single_receiver_dominant_action() {
    let pp = two_action(&[[[2, 3], [0, 1]]]);
    let inst = persuasion_to_matching(&pp).unwrap();
    let stable = stable_matchings_at(&inst, &inst.prior);
    assert_eq!(stable.len(), 1);
    assert_eq!(stable[0].a_to_b[0], action_copy(0, 0));
}

#[test]
fn opposite_dominant_actions() {
    let pp = two_action(&[[[2, 3], [0, 1]], [[0, 0], [1, 1]]]);
    let inst = persuasion_to_matching(&pp).unwrap();
    let stable = stable_matchings_at(&inst, &inst.prior);
    assert_eq!(stable.len(), 1);
    assert_eq!(receiver_actions(2, &stable[0]), Some(vec![0, 1]));
}

#[test]
fn stable_matchings_are_best_responses() {
    for seed in 0..30 {
        let k = 1 + (seed % 3) as usize;
        let pp = random_persuasion(k, 2, 8, seed).unwrap();
        let inst = persuasion_to_matching(&pp).unwrap();
        for t in 0..=4 {
            let p = vec![qf(4 - t, 4), qf(t, 4)];
            let stable = stable_matchings_at(&inst, &p);
            assert!(!stable.is_empty());
            let mut seen = Vec::new();
            for m in &stable {
                let acts = receiver_actions(k, m).expect("receivers keep their own copies");
                for (i, &j) in acts.iter().enumerate() {
                    assert!(pp.best_actions(i, &p).contains(&j), "seed {seed}");
                }
                seen.push(acts);
            }
            let combos: usize = (0..k).map(|i| pp.best_actions(i, &p).len()).product();
            seen.sort();
            seen.dedup();
            assert_eq!(seen.len(), combos);
        }
    }
}

#[test]
fn persuasion_needs_two_actions() {
    let mut pp = two_action(&[[[1, 1], [0, 0]]]);
    pp.actions.push("z".into());
    for r in pp.values.iter_mut().chain(pp.utility.iter_mut()) {
        r.push(vec![Q::zero(), Q::zero()]);
    }
    assert!(matches!(persuasion_to_matching(&pp), Err(Error::Input(_))));
}

#[test]
fn json_round_trips() {
    let m = random_smti(3, 4, 60, 50, false, 7).unwrap();
    assert_eq!(smti_from_value(&smti_to_json(&m)).unwrap(), m);
    let pp = random_persuasion(2, 3, 10, 3).unwrap();
    assert_eq!(persuasion_from_value(&persuasion_to_json(&pp)).unwrap(), pp);
    let bad = parse_json(r#"{"a": ["a1"], "b": ["b1", "b2", "b3"], "prefs": {}, "ties": {"a1": ["b1", "b2", "b3"]}}"#).unwrap();
    assert!(matches!(smti_from_value(&bad), Err(Error::Input(_))));
    let overlap = parse_json(r#"{"a": ["a1"], "b": ["b1"], "prefs": {}, "ties": {"a1": ["b1"]}}"#).unwrap();
    assert!(smti_from_value(&overlap).is_err());
}
