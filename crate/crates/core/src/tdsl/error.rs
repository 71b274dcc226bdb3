use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScriptErrorKind {
    Syntax,
    UnboundVariable,
    UnknownFeature,
    DuplicateFeature,
    UnknownBean,
    UnknownField,
    DuplicateBean,
    DuplicateField,
    RecursiveBean,
    InvalidIdentifier,
    InvalidLiteral,
    NoAssertion,
}

impl ScriptErrorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ScriptErrorKind::Syntax => "syntax",
            ScriptErrorKind::UnboundVariable => "unbound-variable",
            ScriptErrorKind::UnknownFeature => "unknown-feature",
            ScriptErrorKind::DuplicateFeature => "duplicate-feature",
            ScriptErrorKind::UnknownBean => "unknown-bean",
            ScriptErrorKind::UnknownField => "unknown-field",
            ScriptErrorKind::DuplicateBean => "duplicate-bean",
            ScriptErrorKind::DuplicateField => "duplicate-field",
            ScriptErrorKind::RecursiveBean => "recursive-bean",
            ScriptErrorKind::InvalidIdentifier => "invalid-identifier",
            ScriptErrorKind::InvalidLiteral => "invalid-literal",
            ScriptErrorKind::NoAssertion => "no-assertion",
        }
    }
}

/// A rejected script. `line`/`column` are 1-based; both are 0 when the error
/// comes from validating an AST that has no source text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptError {
    pub kind: ScriptErrorKind,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ScriptError {
    pub fn new(
        kind: ScriptErrorKind,
        line: usize,
        column: usize,
        message: impl Into<String>,
    ) -> Self {
        ScriptError {
            kind,
            line,
            column,
            message: message.into(),
        }
    }
}

impl fmt::Display for ScriptError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line > 0 {
            write!(
                f,
                "{}:{}: {} error: {}",
                self.line,
                self.column,
                self.kind.as_str(),
                self.message
            )
        } else {
            write!(f, "{} error: {}", self.kind.as_str(), self.message)
        }
    }
}

impl std::error::Error for ScriptError {}
