use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::backends::TestOutcome;
use crate::llm::{ChatMessage, SYSTEM_PROMPT};

use super::{FailedCase, Label, Mode};

pub const DEFINITION_GOOD: &str = "A good test fails (at assertions or by throwing an exception) due to intrinsic bugs in the library. The logic of a good test is considered correct.";
pub const DEFINITION_BAD: &str = "A bad test fails due to incorrect test code or improper usage of the library, indicating that the library is functioning as expected and the test case itself contains deficiencies.";

pub const DEFINITIONS: &str = "Definition 1 (Good Test): A good test fails (at assertions or by throwing an exception) due to intrinsic bugs in the library. The logic of a good test is considered correct.\nDefinition 2 (Bad Test): A bad test fails due to incorrect test code or improper usage of the library, indicating that the library is functioning as expected and the test case itself contains deficiencies.";

const PREAMBLE: &str = "I have several unit test cases for the JSON library under test that failed or produced errors. Some of these test failures do not reveal problems within the library, as the code logic of these failed tests is incorrect (e.g., wrong assertions or improper usage of the library).\nWe categorize these tests into two types based on the following definitions:\n";

const INSTRUCTION: &str = "I will give you a test case, your task is to assess and judge whether the test case is a good test or a bad test. Here are some examples:";

/// A worked example shown before the case under judgment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exemplar {
    pub label: Label,
    pub provenance: String,
    pub backend: String,
    pub script: String,
    pub result: String,
    pub answer_cot: String,
    pub answer_plain: String,
}

impl Exemplar {
    pub fn answer(&self, mode: Mode) -> &str {
        match mode {
            Mode::Fs => &self.answer_plain,
            Mode::FsCot => &self.answer_cot,
        }
    }
}

#[derive(Deserialize)]
struct ExemplarFile {
    exemplars: Vec<Exemplar>,
}

const EXEMPLARS_JSON: &str = include_str!("../../fixtures/classify/exemplars.json");

pub fn exemplars() -> &'static [Exemplar] {
    static CELL: OnceLock<Vec<Exemplar>> = OnceLock::new();
    CELL.get_or_init(|| {
        let f: ExemplarFile =
            serde_json::from_str(EXEMPLARS_JSON).expect("bundled exemplars parse");
        f.exemplars
    })
}

/// Human-readable failure report for one backend.
pub fn render_outcome(backend: &str, outcome: &TestOutcome) -> String {
    match outcome {
        TestOutcome::Pass => format!("Backend {backend}: PASS"),
        TestOutcome::Fail {
            assertion_index,
            statement_index,
            expected,
            actual,
        } => format!(
            "Backend {backend}: FAILURE at assertion {assertion_index} (statement {})\nexpected: {expected}\nbut was: {actual}",
            statement_index + 1
        ),
        TestOutcome::Error {
            kind,
            statement_index,
            message,
        } => format!(
            "Backend {backend}: ERROR at statement {}\n{kind}: {message}",
            statement_index + 1
        ),
    }
}

fn block(out: &mut String, tag: &str, body: &str) {
    out.push('[');
    out.push_str(tag);
    out.push_str("]\n");
    out.push_str(body.trim_end());
    out.push('\n');
}

pub fn build_classify_prompt(case: &FailedCase, mode: Mode) -> Vec<ChatMessage> {
    let mut u = String::new();
    u.push_str(PREAMBLE);
    u.push_str(DEFINITIONS);
    u.push_str("\n\n");
    u.push_str(INSTRUCTION);
    u.push_str("\n\n");
    for (i, ex) in exemplars().iter().enumerate() {
        let n = i + 1;
        block(&mut u, &format!("example {n}"), &ex.script);
        block(&mut u, &format!("result {n}"), &ex.result);
        block(&mut u, &format!("answer {n}"), ex.answer(mode));
        u.push('\n');
    }
    block(&mut u, "example to judge", &case.script_text);
    block(
        &mut u,
        "result to judge",
        &render_outcome(&case.backend, &case.outcome),
    );
    u.push_str("[your answer]\n");
    vec![ChatMessage::system(SYSTEM_PROMPT), ChatMessage::user(u)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backends::{execute, resolve_backend, ExecutionLimits};
    use crate::classify::{parse_verdict, Vote};
    use crate::tdsl::parse_script;

    #[test]
    fn definitions_block_holds_both_definitions() {
        assert!(DEFINITIONS.contains(DEFINITION_GOOD));
        assert!(DEFINITIONS.contains(DEFINITION_BAD));
    }

    #[test]
    fn exemplars_are_two_good_two_bad() {
        let ex = exemplars();
        assert_eq!(ex.len(), 4);
        assert_eq!(ex.iter().filter(|e| e.label == Label::Good).count(), 2);
    }

    #[test]
    fn exemplar_results_match_execution() {
        for ex in exemplars() {
            let script = parse_script(&ex.script).unwrap();
            let backend = resolve_backend(&ex.backend).unwrap();
            let out = execute(&script, backend.as_ref(), ExecutionLimits::default());
            assert!(!out.is_pass(), "{}", ex.provenance);
            assert_eq!(
                render_outcome(&ex.backend, &out),
                ex.result,
                "{}",
                ex.provenance
            );
        }
    }

    #[test]
    fn exemplar_answers_carry_their_label() {
        for ex in exemplars() {
            let want = match ex.label {
                Label::Good => Vote::Good,
                Label::Bad => Vote::Bad,
            };
            assert_eq!(parse_verdict(&ex.answer_cot), want);
            assert_eq!(parse_verdict(&ex.answer_plain), want);
            assert!(ex.answer_cot.len() > ex.answer_plain.len());
        }
    }
}
