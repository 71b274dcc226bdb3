//! Triage of failing tests into good (library bug) and bad (broken test)
//! by few-shot prompting and six-vote majority.

mod eval;
mod prompt;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::backends::TestOutcome;
use crate::tdsl::TestScript;

pub use eval::{
    classify, evaluate_accuracy, load_cases, AccuracyTable, CaseFileError, CaseLine,
    CategoryAccuracy, ClassificationResult, ClassifyError, ClassifyParams,
};
pub use prompt::{
    build_classify_prompt, exemplars, render_outcome, Exemplar, DEFINITIONS, DEFINITION_BAD,
    DEFINITION_GOOD,
};

pub const VOTES: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    #[serde(rename = "FS", alias = "fs")]
    Fs,
    #[serde(rename = "FS-CoT", alias = "fs-cot")]
    FsCot,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Fs => "FS",
            Mode::FsCot => "FS-CoT",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown mode `{0}` (expected fs or fs-cot)")]
pub struct UnknownMode(String);

impl FromStr for Mode {
    type Err = UnknownMode;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "fs" => Ok(Mode::Fs),
            "fs-cot" | "fs_cot" => Ok(Mode::FsCot),
            _ => Err(UnknownMode(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    Good,
    Bad,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Vote {
    Good,
    Bad,
    Unparseable,
}

/// Ground truth: exception or assertion failure, crossed with good or bad.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Category {
    #[serde(rename = "E_bad")]
    EBad,
    #[serde(rename = "E_good")]
    EGood,
    #[serde(rename = "F_bad")]
    FBad,
    #[serde(rename = "F_good")]
    FGood,
    #[serde(rename = "unknown")]
    Unknown,
}

impl Category {
    pub const LABELED: [Category; 4] = [
        Category::EBad,
        Category::EGood,
        Category::FBad,
        Category::FGood,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::EBad => "E_bad",
            Category::EGood => "E_good",
            Category::FBad => "F_bad",
            Category::FGood => "F_good",
            Category::Unknown => "unknown",
        }
    }

    pub fn expected(self) -> Option<Label> {
        match self {
            Category::EGood | Category::FGood => Some(Label::Good),
            Category::EBad | Category::FBad => Some(Label::Bad),
            Category::Unknown => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FailedCase {
    pub id: String,
    pub script: TestScript,
    pub script_text: String,
    /// Never `Pass`.
    pub outcome: TestOutcome,
    pub backend: String,
    pub category: Category,
}

/// Reads the verdict from the last sentence only. Mentions of both or
/// neither phrase make the vote unparseable.
pub fn parse_verdict(response: &str) -> Vote {
    let last = response
        .split(['.', '!', '?', '\n'])
        .map(str::trim)
        .rfind(|s| !s.is_empty())
        .unwrap_or("")
        .to_ascii_lowercase();
    match (last.contains("good test"), last.contains("bad test")) {
        (true, false) => Vote::Good,
        (false, true) => Vote::Bad,
        _ => Vote::Unparseable,
    }
}

/// Good iff strictly more good than bad votes; unparseable votes count for
/// neither side, and ties go to Bad.
pub fn final_label(votes: &[Vote]) -> Label {
    let good = votes.iter().filter(|v| **v == Vote::Good).count();
    let bad = votes.iter().filter(|v| **v == Vote::Bad).count();
    if good > bad {
        Label::Good
    } else {
        Label::Bad
    }
}
