#![allow(dead_code)]

pub mod gen;

use std::path::PathBuf;

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(rel)
}

pub fn read_fixture(rel: &str) -> String {
    let p = fixture(rel);
    std::fs::read_to_string(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

/// Fenced reply as a chat model would format it.
pub fn fenced(script: &str) -> String {
    format!("Here is a new unit test:\n```\n{script}```\n")
}

/// Property config without a regressions file; integration tests have no
/// source-parallel directory for proptest to write to.
pub fn prop_config(cases: u32) -> proptest::test_runner::Config {
    proptest::test_runner::Config {
        cases,
        failure_persistence: None,
        ..proptest::test_runner::Config::default()
    }
}
