//! Pulling a script out of a free-form model response.

use serde::{Deserialize, Serialize};

use super::ast::TestScript;
use super::error::ScriptError;
use super::parser::parse_script;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FailureCategory {
    /// No fenced block, and the whole response is not a script either.
    #[serde(rename = "no-code-block/parse-error")]
    NoCodeBlock,
    /// The first fenced block does not parse.
    #[serde(rename = "parse-error")]
    ParseError,
    /// The context was too large to send; nothing was generated.
    #[serde(rename = "context-overflow")]
    ContextOverflow,
}

impl FailureCategory {
    pub fn as_str(self) -> &'static str {
        match self {
            FailureCategory::NoCodeBlock => "no-code-block/parse-error",
            FailureCategory::ParseError => "parse-error",
            FailureCategory::ContextOverflow => "context-overflow",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionFailure {
    pub category: FailureCategory,
    /// The candidate text that was handed to the parser.
    pub candidate: String,
    pub error: Option<ScriptError>,
}

/// Returns the body of the first ``` fenced block, if any. An info string on
/// the opening fence line is skipped; an unclosed fence runs to the end.
pub fn first_fenced_block(response: &str) -> Option<&str> {
    let start = response.find("```")?;
    let after = &response[start + 3..];
    let body_start = after.find('\n').map(|i| i + 1).unwrap_or(after.len());
    let body = &after[body_start..];
    let end = body.find("```").unwrap_or(body.len());
    Some(&body[..end])
}

pub fn extract_script(response: &str) -> Result<TestScript, ExtractionFailure> {
    let (candidate, category) = match first_fenced_block(response) {
        Some(block) => (block, FailureCategory::ParseError),
        None => (response, FailureCategory::NoCodeBlock),
    };
    parse_script(candidate).map_err(|e| ExtractionFailure {
        category,
        candidate: candidate.to_string(),
        error: Some(e),
    })
}
