mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

use jsonoracle::backends::{execute, resolve_backends, ExecutionLimits};
use jsonoracle::diffcore::{run_differential, Status};
use jsonoracle::tdsl::TestScript;

fn sample(n: usize) -> Vec<TestScript> {
    let mut runner = TestRunner::new_with_rng(
        Config::default(),
        TestRng::deterministic_rng(RngAlgorithm::ChaCha),
    );
    let strat = common::gen::script();
    (0..n)
        .map(|_| strat.new_tree(&mut runner).unwrap().current())
        .collect()
}

#[test]
fn generated_scripts_reach_every_outcome_kind() {
    let reference = resolve_backends(&["reference"]).unwrap().remove(0);
    let mut kinds: BTreeMap<String, usize> = BTreeMap::new();
    for s in sample(400) {
        let o = execute(&s, reference.as_ref(), ExecutionLimits::default());
        let k = o.key().to_string();
        let k = if k.starts_with("FAIL") {
            "FAIL".to_string()
        } else {
            k
        };
        *kinds.entry(k).or_default() += 1;
    }
    eprintln!("{kinds:?}");
    assert!(kinds.get("PASS").copied().unwrap_or(0) >= 20, "{kinds:?}");
    assert!(kinds.get("FAIL").copied().unwrap_or(0) >= 20, "{kinds:?}");
    assert!(
        kinds.keys().filter(|k| k.starts_with("ERR")).count() >= 3,
        "{kinds:?}"
    );
}

proptest! {
    #![proptest_config(common::prop_config(200))]

    #[test]
    fn identical_backends_never_disagree(s in common::gen::script()) {
        let bs = resolve_backends(&["reference", "reference-copy", "planted:"]).unwrap();
        let v = run_differential("prop", &s, &bs, ExecutionLimits::default()).unwrap();
        prop_assert_eq!(v.status, Status::Consistent);
    }

    #[test]
    fn execution_is_deterministic(s in common::gen::script()) {
        let b = resolve_backends(&["planted:L1+L2+L3"]).unwrap().remove(0);
        let a = execute(&s, b.as_ref(), ExecutionLimits::default());
        prop_assert_eq!(a, execute(&s, b.as_ref(), ExecutionLimits::default()));
    }
}
