//! Pluggable JSON engines behind one capability surface, and the script
//! executor that runs a [`TestScript`](crate::tdsl::TestScript) against them.

mod coerce;
mod exec;
pub(crate) mod json_text;
mod jsonpath;
mod planted;
mod reference;
mod registry;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::features::{ReaderFeature, WriterFeature};
use crate::tdsl::{Accessor, AsType, BeanDef};
use crate::value::JsonValue;

pub use coerce::{bind_bean, convert, BindMode};
pub use exec::{
    execute, execute_with_coverage, Coverage, ExecutionLimits, OutcomeKey, TestOutcome,
};
pub use jsonpath::{JsonPath, PathStep};
pub use planted::{BugId, PlantedBackend};
pub use reference::{canonical_json, ReferenceBackend};
pub use registry::{resolve_backend, resolve_backends, RegistryError};

/// Normalized failure vocabulary shared by all backends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ErrorKind {
    ParseError,
    TypeCastError,
    NullAccess,
    PathError,
    FeatureUnsupported,
    Timeout,
}

impl ErrorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorKind::ParseError => "ParseError",
            ErrorKind::TypeCastError => "TypeCastError",
            ErrorKind::NullAccess => "NullAccess",
            ErrorKind::PathError => "PathError",
            ErrorKind::FeatureUnsupported => "FeatureUnsupported",
            ErrorKind::Timeout => "Timeout",
        }
    }
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BackendError {
    pub kind: ErrorKind,
    pub message: String,
}

impl BackendError {
    pub fn new(kind: ErrorKind, message: impl Into<String>) -> Self {
        BackendError {
            kind,
            message: message.into(),
        }
    }
}

impl fmt::Display for BackendError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind, self.message)
    }
}

impl std::error::Error for BackendError {}

pub type BackendResult<T> = Result<T, BackendError>;

/// Input to a path evaluation: raw JSON text, or an already-built value.
#[derive(Debug, Clone, Copy)]
pub enum PathTarget<'a> {
    Text(&'a str),
    Value(&'a JsonValue),
}

/// A JSON engine. Every operation must be deterministic and must not keep
/// state between calls.
pub trait Backend: Send + Sync {
    fn name(&self) -> &str;

    fn validate(&self, text: &str) -> bool;

    fn parse(&self, text: &str, features: &[ReaderFeature]) -> BackendResult<JsonValue>;

    /// Parses `text` and binds it to `bean`, producing an object with exactly
    /// the bean's fields in declaration order.
    fn parse_typed(
        &self,
        text: &str,
        bean: &BeanDef,
        beans: &[BeanDef],
        features: &[ReaderFeature],
    ) -> BackendResult<JsonValue>;

    fn serialize(&self, value: &JsonValue, features: &[WriterFeature]) -> BackendResult<String>;

    fn get(
        &self,
        target: &JsonValue,
        accessor: &Accessor,
        as_type: AsType,
    ) -> BackendResult<JsonValue>;

    fn path_eval(&self, target: PathTarget<'_>, path: &str) -> BackendResult<JsonValue>;
}

/// The reference engine under the name `reference`.
pub fn reference_backend() -> ReferenceBackend {
    ReferenceBackend::new("reference")
}

/// A reference engine with the given bugs planted. Unknown ids are rejected
/// when parsing [`BugId`], so any slice here is a valid configuration.
pub fn planted_backend(bugs: &[BugId]) -> PlantedBackend {
    PlantedBackend::new(planted::default_name(bugs), bugs)
}
