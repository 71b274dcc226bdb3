//! Deterministic script execution. Evaluation stops at the first failing
//! assertion or raised error, like a unit test.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::tdsl::{Accessor, Expr, Statement, TestScript};
use crate::value::JsonValue;

use super::coerce::{bind_bean_with, BindMode, BindQuirks};
use super::reference::canonical_json;
use super::{Backend, BackendError, BackendResult, ErrorKind, PathTarget};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecutionLimits {
    pub timeout_ms: u64,
    pub max_statements: usize,
}

impl Default for ExecutionLimits {
    fn default() -> Self {
        ExecutionLimits {
            timeout_ms: 1000,
            max_statements: 10_000,
        }
    }
}

/// Final result of one (script, backend) execution.
///
/// `assertion_index` is the 0-based position among assertions only;
/// `statement_index` counts every statement.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status")]
pub enum TestOutcome {
    Pass,
    Fail {
        assertion_index: usize,
        statement_index: usize,
        expected: String,
        actual: String,
    },
    Error {
        kind: ErrorKind,
        statement_index: usize,
        message: String,
    },
}

impl TestOutcome {
    pub fn key(&self) -> OutcomeKey {
        match self {
            TestOutcome::Pass => OutcomeKey::Pass,
            TestOutcome::Fail {
                assertion_index, ..
            } => OutcomeKey::Fail(*assertion_index),
            TestOutcome::Error { kind, .. } => OutcomeKey::Err(*kind),
        }
    }

    pub fn is_pass(&self) -> bool {
        matches!(self, TestOutcome::Pass)
    }

    pub fn statement_index(&self) -> Option<usize> {
        match self {
            TestOutcome::Pass => None,
            TestOutcome::Fail {
                statement_index, ..
            }
            | TestOutcome::Error {
                statement_index, ..
            } => Some(*statement_index),
        }
    }
}

/// The comparison projection of a [`TestOutcome`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OutcomeKey {
    Pass,
    Fail(usize),
    Err(ErrorKind),
}

impl fmt::Display for OutcomeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OutcomeKey::Pass => f.write_str("PASS"),
            OutcomeKey::Fail(i) => write!(f, "FAIL({i})"),
            OutcomeKey::Err(k) => write!(f, "ERR({k})"),
        }
    }
}

/// Operation-hit counters collected while executing scripts.
///
/// Keys look like `parse`, `serialize`, `feature:PrettyFormat`,
/// `get:integer`, `assert_eq`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coverage {
    pub hits: BTreeMap<String, u64>,
}

impl Coverage {
    fn hit(&mut self, key: impl Into<String>) {
        *self.hits.entry(key.into()).or_insert(0) += 1;
    }

    pub fn get(&self, key: &str) -> u64 {
        self.hits.get(key).copied().unwrap_or(0)
    }

    pub fn merge(&mut self, other: &Coverage) {
        for (k, v) in &other.hits {
            *self.hits.entry(k.clone()).or_insert(0) += v;
        }
    }

    /// Number of distinct keys hit at least once.
    pub fn distinct(&self) -> usize {
        self.hits.values().filter(|&&v| v > 0).count()
    }
}

pub fn execute(script: &TestScript, backend: &dyn Backend, limits: ExecutionLimits) -> TestOutcome {
    execute_with_coverage(script, backend, limits, &mut Coverage::default())
}

pub fn execute_with_coverage(
    script: &TestScript,
    backend: &dyn Backend,
    limits: ExecutionLimits,
    coverage: &mut Coverage,
) -> TestOutcome {
    let mut ex = Executor {
        script,
        backend,
        env: HashMap::new(),
        deadline: Instant::now() + Duration::from_millis(limits.timeout_ms),
        coverage,
    };
    let mut assertion_index = 0;
    for (statement_index, st) in script.statements.iter().enumerate() {
        if statement_index >= limits.max_statements {
            return timeout(statement_index, "statement budget exhausted");
        }
        match ex.statement(st) {
            Ok(None) => {}
            Ok(Some((expected, actual))) => {
                return TestOutcome::Fail {
                    assertion_index,
                    statement_index,
                    expected,
                    actual,
                }
            }
            Err(e) => {
                return TestOutcome::Error {
                    kind: e.kind,
                    statement_index,
                    message: e.message,
                }
            }
        }
        if st.is_assertion() {
            assertion_index += 1;
        }
    }
    TestOutcome::Pass
}

fn timeout(statement_index: usize, message: &str) -> TestOutcome {
    TestOutcome::Error {
        kind: ErrorKind::Timeout,
        statement_index,
        message: message.to_string(),
    }
}

struct Executor<'a> {
    script: &'a TestScript,
    backend: &'a dyn Backend,
    env: HashMap<&'a str, JsonValue>,
    deadline: Instant,
    coverage: &'a mut Coverage,
}

fn need_text<'v>(v: &'v JsonValue, what: &str) -> BackendResult<&'v str> {
    match v {
        JsonValue::Str(s) => Ok(s),
        JsonValue::Null => Err(BackendError::new(
            ErrorKind::NullAccess,
            format!("{what} of null"),
        )),
        other => Err(BackendError::new(
            ErrorKind::TypeCastError,
            format!("{what} needs a string, got {}", other.type_name()),
        )),
    }
}

type Mismatch = (String, String);

impl<'a> Executor<'a> {
    fn statement(&mut self, st: &'a Statement) -> BackendResult<Option<Mismatch>> {
        match st {
            Statement::Let { var, expr } => {
                let v = self.eval(expr)?;
                self.env.insert(var, v);
                Ok(None)
            }
            Statement::AssertEq(actual, expected) => {
                self.coverage.hit("assert_eq");
                let a = self.eval(actual)?;
                let e = self.eval(expected)?;
                Ok((!a.semantic_eq(&e)).then(|| (canonical_json(&e), canonical_json(&a))))
            }
            Statement::AssertNull(x) => {
                self.coverage.hit("assert_null");
                let a = self.eval(x)?;
                Ok((!a.is_null()).then(|| ("null".to_string(), canonical_json(&a))))
            }
            Statement::AssertNotNull(x) => {
                self.coverage.hit("assert_not_null");
                let a = self.eval(x)?;
                Ok(a.is_null()
                    .then(|| ("not null".to_string(), "null".to_string())))
            }
            Statement::AssertThrows(x) => {
                self.coverage.hit("assert_throws");
                match self.eval(x) {
                    Ok(v) => Ok(Some(("an error".to_string(), canonical_json(&v)))),
                    Err(e) if e.kind == ErrorKind::Timeout => Err(e),
                    Err(_) => Ok(None),
                }
            }
        }
    }

    fn eval(&mut self, e: &'a Expr) -> BackendResult<JsonValue> {
        if Instant::now() > self.deadline {
            return Err(BackendError::new(
                ErrorKind::Timeout,
                "wall-clock limit exceeded",
            ));
        }
        match e {
            Expr::Lit(v) => Ok(v.clone()),
            Expr::Str(s) => Ok(JsonValue::Str(s.clone())),
            Expr::Var(name) => Ok(self
                .env
                .get(name.as_str())
                .cloned()
                .unwrap_or(JsonValue::Null)),
            Expr::ParseValue { text, features } => {
                let t = self.eval(text)?;
                let t = need_text(&t, "parse")?;
                self.coverage.hit("parse");
                for f in features {
                    self.coverage.hit(format!("feature:{f}"));
                }
                self.backend.parse(t, features)
            }
            Expr::ParseTyped {
                text,
                bean,
                features,
            } => {
                let t = self.eval(text)?;
                let t = need_text(&t, "parse_typed")?;
                self.coverage.hit("parse_typed");
                for f in features {
                    self.coverage.hit(format!("feature:{f}"));
                }
                let def = self.bean(bean)?;
                self.backend
                    .parse_typed(t, def, &self.script.beans, features)
            }
            Expr::Serialize { value, features } => {
                let v = self.eval(value)?;
                self.coverage.hit("serialize");
                for f in features {
                    self.coverage.hit(format!("feature:{f}"));
                }
                self.backend.serialize(&v, features).map(JsonValue::Str)
            }
            Expr::Get {
                target,
                accessor,
                as_type,
            } => {
                let t = self.eval(target)?;
                self.coverage.hit(format!("get:{}", as_type.as_str()));
                if let Accessor::Index(_) = accessor {
                    self.coverage.hit("get:index");
                }
                self.backend.get(&t, accessor, *as_type)
            }
            Expr::PathEval { target, path } => {
                let t = self.eval(target)?;
                match &t {
                    JsonValue::Str(s) => {
                        self.coverage.hit("path:text");
                        self.backend.path_eval(PathTarget::Text(s), path)
                    }
                    JsonValue::Null => {
                        Err(BackendError::new(ErrorKind::NullAccess, "path on null"))
                    }
                    v => {
                        self.coverage.hit("path:value");
                        self.backend.path_eval(PathTarget::Value(v), path)
                    }
                }
            }
            Expr::IsValid(x) => {
                let t = self.eval(x)?;
                let t = need_text(&t, "is_valid")?;
                self.coverage.hit("validate");
                Ok(JsonValue::Bool(self.backend.validate(t)))
            }
            Expr::Size(x) => {
                self.coverage.hit("size");
                match self.eval(x)? {
                    JsonValue::Arr(a) => Ok(JsonValue::Int(a.len() as i64)),
                    JsonValue::Obj(o) => Ok(JsonValue::Int(o.len() as i64)),
                    JsonValue::Null => {
                        Err(BackendError::new(ErrorKind::NullAccess, "size of null"))
                    }
                    other => Err(BackendError::new(
                        ErrorKind::TypeCastError,
                        format!("size of {}", other.type_name()),
                    )),
                }
            }
            Expr::MakeBean { bean, fields } => {
                self.coverage.hit("new_bean");
                let def = self.bean(bean)?;
                let mut src = crate::value::JsonObject::new();
                for (name, fe) in fields {
                    let v = self.eval(fe)?;
                    src.insert(name.clone(), v);
                }
                bind_bean_with(
                    &JsonValue::Obj(src),
                    def,
                    &self.script.beans,
                    BindMode::Construct,
                    BindQuirks::default(),
                )
            }
            Expr::StripZeros(x) => {
                self.coverage.hit("strip_zeros");
                match self.eval(x)? {
                    v @ JsonValue::Int(_) => Ok(v),
                    JsonValue::Dec(d) => Ok(JsonValue::Dec(d.strip_trailing_zeros())),
                    JsonValue::Null => Err(BackendError::new(
                        ErrorKind::NullAccess,
                        "strip_zeros of null",
                    )),
                    other => Err(BackendError::new(
                        ErrorKind::TypeCastError,
                        format!("strip_zeros of {}", other.type_name()),
                    )),
                }
            }
        }
    }

    fn bean(&self, name: &str) -> BackendResult<&'a crate::tdsl::BeanDef> {
        self.script.bean(name).ok_or_else(|| {
            BackendError::new(ErrorKind::TypeCastError, format!("unknown bean `{name}`"))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backends::{planted_backend, reference_backend, BugId};
    use crate::tdsl::parse_script;

    fn run(src: &str, b: &dyn Backend) -> TestOutcome {
        execute(&parse_script(src).unwrap(), b, ExecutionLimits::default())
    }

    const BOOL_AS_STRING: &str = r#"
        bean Bean { b: boolean }
        let bean = new Bean { b: true };
        let json = serialize(bean, [WriteNonStringValueAsString]);
        assert_eq(json, "{\"b\":\"true\"}");
    "#;

    #[test]
    fn bool_quoting_script() {
        assert_eq!(run(BOOL_AS_STRING, &reference_backend()), TestOutcome::Pass);
        let out = run(BOOL_AS_STRING, &planted_backend(&[BugId::L2BoolNotQuoted]));
        assert_eq!(
            out,
            TestOutcome::Fail {
                assertion_index: 0,
                statement_index: 2,
                expected: r#""{\"b\":\"true\"}""#.into(),
                actual: r#""{\"b\":true}""#.into(),
            }
        );
        assert_eq!(out.key().to_string(), "FAIL(0)");
    }

    #[test]
    fn malformed_parse_is_error() {
        let out = run(
            r#"let a = parse("not json"); assert_null(a);"#,
            &reference_backend(),
        );
        assert_eq!(out.key(), OutcomeKey::Err(ErrorKind::ParseError));
        assert_eq!(out.key().to_string(), "ERR(ParseError)");
    }

    #[test]
    fn throws_catches_errors_but_not_values() {
        let b = reference_backend();
        assert!(run(r#"assert_throws(parse("{"));"#, &b).is_pass());
        assert_eq!(
            run(r#"assert_throws(parse("{}"));"#, &b).key(),
            OutcomeKey::Fail(0)
        );
    }

    #[test]
    fn statement_budget_is_a_timeout() {
        let s = parse_script("let a = 1; let b = 2; assert_eq(a, 1);").unwrap();
        let limits = ExecutionLimits {
            timeout_ms: 1000,
            max_statements: 2,
        };
        let out = execute(&s, &reference_backend(), limits);
        assert_eq!(out.key(), OutcomeKey::Err(ErrorKind::Timeout));
    }

    #[test]
    fn coverage_counts_operations() {
        let mut cov = Coverage::default();
        let s = parse_script(BOOL_AS_STRING).unwrap();
        execute_with_coverage(
            &s,
            &reference_backend(),
            ExecutionLimits::default(),
            &mut cov,
        );
        assert_eq!(cov.get("serialize"), 1);
        assert_eq!(cov.get("feature:WriteNonStringValueAsString"), 1);
        assert_eq!(cov.get("new_bean"), 1);
        assert_eq!(cov.get("parse"), 0);
    }
}
