use stable_persuasion::io::parse_instance;
use stable_persuasion::model::{bayes_plausible, is_stable_policy, policy_utility, Policy};
use stable_persuasion::oracle::{no_signal_value, solve_oracle_public, solve_oracle_restricted};
use stable_persuasion::rational::qf;

fn example1() -> stable_persuasion::model::Instance {
    parse_instance(include_str!("../fixtures/example1.json")).unwrap()
}

#[test]
fn example1_public_oracle_reaches_one() {
    let inst = example1();
    let r = solve_oracle_public(&inst).unwrap();
    assert_eq!(r.value, qf(1, 1));
    let pol = Policy::Public(r.policy);
    assert!(bayes_plausible(&inst, &pol));
    assert!(is_stable_policy(&inst, &pol).unwrap().stable);
    assert_eq!(policy_utility(&inst, &pol), qf(1, 1));
}

#[test]
fn example1_restricted_oracle_is_half() {
    let inst = example1();
    let r = solve_oracle_restricted(&inst).unwrap();
    assert_eq!(r.value, qf(1, 2));
    let pol = Policy::Public(r.policy);
    assert!(is_stable_policy(&inst, &pol).unwrap().stable);
}

#[test]
fn example1_no_signal_is_zero() {
    let (_, v) = no_signal_value(&example1()).unwrap();
    assert_eq!(v, qf(0, 1));
}
