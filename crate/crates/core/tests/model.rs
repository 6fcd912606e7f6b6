use stable_persuasion::io::{parse_instance, parse_policy};
use stable_persuasion::model::{
    bayes_plausible, induced_profile, is_indicative, is_stable_policy, policy_utility, posterior_of_metasignal,
    value_under_posterior, Instance, Matching, MetaSignal, Policy, Posterior, PublicPolicy, Side,
};
use stable_persuasion::rational::{q, qf};
use stable_persuasion::Error;

fn example1() -> Instance {
    parse_instance(include_str!("../fixtures/example1.json")).unwrap()
}

fn signal(m: Matching, tag: Option<&str>) -> MetaSignal {
    MetaSignal { profile: None, matching: m, tag: tag.map(String::from) }
}

#[test]
fn full_revelation_gives_point_posteriors() {
    let inst = example1();
    let policy = PublicPolicy {
        signals: vec![signal(Matching::identity(2), Some("w1")), signal(Matching::identity(2), Some("w2"))],
        kernel: vec![vec![q(1), q(0)], vec![q(0), q(1)]],
    };
    assert_eq!(posterior_of_metasignal(&inst, &policy, 0).unwrap(), Posterior::point(0, 2));
    assert_eq!(posterior_of_metasignal(&inst, &policy, 1).unwrap(), Posterior::point(1, 2));
    let p = Policy::Public(policy);
    assert!(is_stable_policy(&inst, &p).unwrap().stable);
    assert!(bayes_plausible(&inst, &p));
    assert_eq!(policy_utility(&inst, &p), q(1));
}

#[test]
fn identical_meta_signals_are_pooled() {
    let inst = example1();
    let policy = PublicPolicy {
        signals: vec![signal(Matching::identity(2), None), signal(Matching::identity(2), None)],
        kernel: vec![vec![q(1), q(0)], vec![q(0), q(1)]],
    };
    let post = posterior_of_metasignal(&inst, &policy, 0).unwrap();
    assert_eq!(post.dist, inst.prior);
}

#[test]
fn zero_probability_signal_is_unreachable() {
    let inst = example1();
    let policy = PublicPolicy {
        signals: vec![signal(Matching::identity(2), Some("x")), signal(Matching::new(vec![1, 0]).unwrap(), None)],
        kernel: vec![vec![q(1), q(1)], vec![q(0), q(0)]],
    };
    assert!(matches!(posterior_of_metasignal(&inst, &policy, 1), Err(Error::UnreachableSignal(_))));
    let cert = is_stable_policy(&inst, &Policy::Public(policy)).unwrap();
    assert!(cert.violations.iter().all(|v| v.signal == 0));
}

#[test]
fn kernels_must_sum_to_one() {
    let inst = example1();
    let policy = PublicPolicy { signals: vec![signal(Matching::identity(2), None)], kernel: vec![vec![qf(1, 2), q(1)]] };
    assert!(matches!(policy.validate(&inst), Err(Error::Input(_))));
    assert!(!bayes_plausible(&inst, &Policy::Public(policy)));
}

#[test]
fn prior_values_and_orders() {
    let inst = example1();
    let half = Posterior::new(vec![qf(1, 2), qf(1, 2)]).unwrap();
    assert_eq!(value_under_posterior(&inst, "a1", "b2", &half).unwrap(), qf(1, 2));
    assert_eq!(value_under_posterior(&inst, "b2", "a2", &half).unwrap(), qf(-1, 2));
    let profile = induced_profile(&inst, &half.dist, None).unwrap();
    assert_eq!(profile.tiers(Side::A, 0), &[vec![1], vec![0]]);
    assert_eq!(profile.tiers(Side::B, 1), &[vec![0], vec![1]]);
    assert!(Posterior::new(vec![qf(1, 2), qf(1, 3)]).is_err());
}

#[test]
fn declared_profiles_are_checked_against_posteriors() {
    let inst = example1();
    let wrong = induced_profile(&inst, &[q(0), q(1)], None).unwrap();
    let policy = PublicPolicy {
        signals: vec![MetaSignal { profile: Some(wrong), matching: Matching::identity(2), tag: None }],
        kernel: vec![vec![q(1), q(1)]],
    };
    assert!(!is_indicative(&inst, &policy).unwrap());
}

#[test]
fn malformed_inputs_are_rejected() {
    let bad_prior = include_str!("../fixtures/example1.json").replace("\"w2\": \"1/2\"}", "\"w2\": \"1/3\"}");
    assert!(matches!(parse_instance(&bad_prior), Err(Error::Input(_))));
    let inst = example1();
    let unknown = r#"{"mode": "public", "signals": [
        {"profile": null, "matching": {"a1": "b9", "a2": "b2"}, "kernel": {"w1": "1", "w2": "1"}}]}"#;
    assert!(parse_policy(unknown, &inst).is_err());
}
