//! The test DSL: a small, line-oriented language for JSON-library unit tests.
//!
//! ```text
//! bean Bean { b: boolean }
//! let bean = new Bean { b: true };
//! let json = serialize(bean, [WriteNonStringValueAsString]);
//! assert_eq(json, "{\"b\":\"true\"}");
//! ```
//!
//! See `docs/dsl-grammar.md` for the full grammar.

mod ast;
mod error;
mod extract;
mod lexer;
mod parser;
mod printer;
mod validate;

pub use ast::*;
pub use error::{ScriptError, ScriptErrorKind};
pub use extract::{extract_script, first_fenced_block, ExtractionFailure, FailureCategory};
pub use parser::parse_script;
pub use printer::print_script;
pub use validate::validate;

pub(crate) use printer::print_unchecked;
