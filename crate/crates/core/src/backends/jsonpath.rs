//! JSONPath subset: `$` root, `.member`, `[index]`. Nothing else.

use crate::value::JsonValue;

use super::{BackendError, BackendResult, ErrorKind};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PathStep {
    Member(String),
    Index(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JsonPath {
    pub steps: Vec<PathStep>,
}

fn path_err(path: &str, msg: &str) -> BackendError {
    BackendError::new(ErrorKind::PathError, format!("bad path `{path}`: {msg}"))
}

impl JsonPath {
    pub fn parse(path: &str) -> BackendResult<JsonPath> {
        let rest = path
            .strip_prefix('$')
            .ok_or_else(|| path_err(path, "must start with `$`"))?;
        let b = rest.as_bytes();
        let mut i = 0;
        let mut steps = Vec::new();
        while i < b.len() {
            match b[i] {
                b'.' => {
                    let start = i + 1;
                    let mut j = start;
                    while j < b.len()
                        && (b[j].is_ascii_alphanumeric() || b[j] == b'_' || b[j] == b'-')
                    {
                        j += 1;
                    }
                    if j == start {
                        return Err(path_err(path, "empty member name"));
                    }
                    steps.push(PathStep::Member(rest[start..j].to_string()));
                    i = j;
                }
                b'[' => {
                    let start = i + 1;
                    let mut j = start;
                    while j < b.len() && b[j].is_ascii_digit() {
                        j += 1;
                    }
                    if j == start || j >= b.len() || b[j] != b']' {
                        return Err(path_err(path, "expected `[<digits>]`"));
                    }
                    let idx = rest[start..j]
                        .parse()
                        .map_err(|_| path_err(path, "index too large"))?;
                    steps.push(PathStep::Index(idx));
                    i = j + 1;
                }
                _ => return Err(path_err(path, "unsupported syntax")),
            }
        }
        Ok(JsonPath { steps })
    }

    /// Evaluates the path. Any step that does not apply yields null.
    /// `index_on_scalar_is_identity` models a known nested-index defect.
    pub(crate) fn eval(&self, root: &JsonValue, index_on_scalar_is_identity: bool) -> JsonValue {
        let mut cur = root;
        for step in &self.steps {
            let next = match (step, cur) {
                (PathStep::Member(m), JsonValue::Obj(o)) => o.get(m),
                (PathStep::Index(i), JsonValue::Arr(a)) => a.get(*i),
                (PathStep::Index(_), JsonValue::Obj(_) | JsonValue::Null) => None,
                (PathStep::Index(_), scalar) if index_on_scalar_is_identity => Some(scalar),
                _ => None,
            };
            match next {
                Some(v) => cur = v,
                None => return JsonValue::Null,
            }
        }
        cur.clone()
    }
}
