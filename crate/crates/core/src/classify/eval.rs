use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::backends::TestOutcome;
use crate::llm::{ChatMessage, ChatRequest, LlmClient, LlmError};
use crate::tdsl::{parse_script, ScriptError};

use super::prompt::build_classify_prompt;
use super::{final_label, parse_verdict, Category, FailedCase, Label, Mode, Vote, VOTES};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifyParams {
    pub model: String,
    pub temperature: f64,
    pub top_p: f64,
}

impl Default for ClassifyParams {
    fn default() -> Self {
        ClassifyParams {
            model: "gpt-4o".to_string(),
            temperature: 0.8,
            top_p: 0.95,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationResult {
    pub case_id: String,
    pub votes: Vec<Vote>,
    pub final_label: Label,
    pub mode: Mode,
    /// Prompt plus reply, one conversation per vote.
    pub transcripts: Vec<Vec<ChatMessage>>,
}

#[derive(Debug, thiserror::Error)]
pub enum ClassifyError {
    #[error("case `{case_id}` vote {} failed: {source}", votes.len() + 1)]
    Transport {
        case_id: String,
        source: LlmError,
        votes: Vec<Vote>,
    },
    #[error("no cases to evaluate")]
    Empty,
    #[error("case `{0}` has no ground-truth category")]
    Unlabeled(String),
    #[error("case `{0}` passed; only failing cases can be classified")]
    PassingCase(String),
}

/// Six samples of the same prompt, then a majority vote.
pub fn classify(
    case: &FailedCase,
    mode: Mode,
    params: &ClassifyParams,
    client: &dyn LlmClient,
) -> Result<ClassificationResult, ClassifyError> {
    if case.outcome.is_pass() {
        return Err(ClassifyError::PassingCase(case.id.clone()));
    }
    let messages = build_classify_prompt(case, mode);
    let req = ChatRequest {
        model: params.model.clone(),
        messages: messages.clone(),
        temperature: params.temperature,
        top_p: params.top_p,
    };
    let mut votes = Vec::with_capacity(VOTES);
    let mut transcripts = Vec::with_capacity(VOTES);
    for _ in 0..VOTES {
        let reply = client
            .complete(&req)
            .map_err(|source| ClassifyError::Transport {
                case_id: case.id.clone(),
                source,
                votes: votes.clone(),
            })?;
        votes.push(parse_verdict(&reply));
        let mut t = messages.clone();
        t.push(ChatMessage::assistant(reply));
        transcripts.push(t);
    }
    Ok(ClassificationResult {
        case_id: case.id.clone(),
        final_label: final_label(&votes),
        votes,
        mode,
        transcripts,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryAccuracy {
    pub category: Category,
    pub correct: usize,
    pub total: usize,
    /// `None` when the category has no cases.
    pub accuracy_pct: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyTable {
    pub mode: Mode,
    pub categories: Vec<CategoryAccuracy>,
    pub correct: usize,
    pub total: usize,
    /// Over all cases, not the mean of the category columns.
    pub average_pct: f64,
    pub results: Vec<ClassificationResult>,
}

fn pct(n: usize, d: usize) -> f64 {
    100.0 * n as f64 / d as f64
}

impl AccuracyTable {
    pub fn category(&self, c: Category) -> Option<&CategoryAccuracy> {
        self.categories.iter().find(|x| x.category == c)
    }

    /// Summary as JSON, without the per-case transcripts.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "mode": self.mode,
            "categories": self.categories,
            "correct": self.correct,
            "total": self.total,
            "average_pct": self.average_pct,
        })
    }

    pub fn render_text(&self) -> String {
        let mut head = format!("{:<8}", "");
        let mut row = format!("{:<8}", self.mode.as_str());
        for c in &self.categories {
            head.push_str(&format!("{:>8}", c.category.as_str()));
            row.push_str(&match c.accuracy_pct {
                Some(p) => format!("{p:>8.1}"),
                None => format!("{:>8}", "-"),
            });
        }
        head.push_str(&format!("{:>8}", "avg."));
        row.push_str(&format!("{:>8.1}", self.average_pct));
        format!("{head}\n{row}\n")
    }
}

/// Classifies every case and tabulates accuracy per category.
pub fn evaluate_accuracy(
    cases: &[FailedCase],
    mode: Mode,
    params: &ClassifyParams,
    client: &dyn LlmClient,
) -> Result<AccuracyTable, ClassifyError> {
    if cases.is_empty() {
        return Err(ClassifyError::Empty);
    }
    if let Some(c) = cases.iter().find(|c| c.category.expected().is_none()) {
        return Err(ClassifyError::Unlabeled(c.id.clone()));
    }
    let results: Vec<ClassificationResult> = if client.max_concurrency() == Some(1) {
        cases
            .iter()
            .map(|c| classify(c, mode, params, client))
            .collect::<Result<_, _>>()?
    } else {
        cases
            .par_iter()
            .map(|c| classify(c, mode, params, client))
            .collect::<Result<_, _>>()?
    };
    let mut tally: BTreeMap<Category, (usize, usize)> =
        Category::LABELED.iter().map(|c| (*c, (0, 0))).collect();
    for (case, r) in cases.iter().zip(&results) {
        let t = tally.get_mut(&case.category).expect("labeled");
        t.1 += 1;
        if case.category.expected() == Some(r.final_label) {
            t.0 += 1;
        }
    }
    let categories: Vec<CategoryAccuracy> = Category::LABELED
        .iter()
        .map(|c| {
            let (correct, total) = tally[c];
            CategoryAccuracy {
                category: *c,
                correct,
                total,
                accuracy_pct: (total > 0).then(|| pct(correct, total)),
            }
        })
        .collect();
    let correct = categories.iter().map(|c| c.correct).sum();
    let total = cases.len();
    Ok(AccuracyTable {
        mode,
        categories,
        correct,
        total,
        average_pct: pct(correct, total),
        results,
    })
}

/// One line of a labeled-case file. `script_path` is relative to the file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseLine {
    pub script_path: String,
    pub outcome: TestOutcome,
    pub category: Category,
    #[serde(default = "default_backend")]
    pub backend: String,
}

fn default_backend() -> String {
    "reference".to_string()
}

#[derive(Debug, thiserror::Error)]
pub enum CaseFileError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}:{line}: {message}")]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}: {source}")]
    Script { path: PathBuf, source: ScriptError },
}

pub fn load_cases(path: &Path) -> Result<Vec<FailedCase>, CaseFileError> {
    let text = fs::read_to_string(path).map_err(|source| CaseFileError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut cases = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fmt_err = |message: String| CaseFileError::Format {
            path: path.to_path_buf(),
            line: i + 1,
            message,
        };
        let cl: CaseLine = serde_json::from_str(line).map_err(|e| fmt_err(e.to_string()))?;
        if cl.outcome.is_pass() {
            return Err(fmt_err("outcome must not be Pass".into()));
        }
        let sp = base.join(&cl.script_path);
        let script_text = fs::read_to_string(&sp).map_err(|source| CaseFileError::Io {
            path: sp.clone(),
            source,
        })?;
        let script = parse_script(&script_text).map_err(|source| CaseFileError::Script {
            path: sp.clone(),
            source,
        })?;
        let id = Path::new(&cl.script_path)
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or(&cl.script_path)
            .to_string();
        cases.push(FailedCase {
            id,
            script,
            script_text,
            outcome: cl.outcome,
            backend: cl.backend,
            category: cl.category,
        });
    }
    Ok(cases)
}
