//! Cross-backend comparison of final outcomes, and signature-based dedup.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::backends::{execute, Backend, ErrorKind, ExecutionLimits, OutcomeKey, TestOutcome};
use crate::tdsl::{print_unchecked, Accessor, BeanDef, Expr, FieldType, Statement, TestScript};
use crate::value::JsonValue;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DiffError {
    #[error("comparison needs at least 2 backends, got {0}")]
    TooFewBackends(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Consistent,
    Inconsistent,
}

/// Projects outcomes to keys; consistent iff all keys are equal.
pub fn compare(outcomes: &BTreeMap<String, TestOutcome>) -> Result<Status, DiffError> {
    if outcomes.len() < 2 {
        return Err(DiffError::TooFewBackends(outcomes.len()));
    }
    let mut keys = outcomes.values().map(TestOutcome::key);
    let first = keys.next().expect("non-empty");
    Ok(if keys.all(|k| k == first) {
        Status::Consistent
    } else {
        Status::Inconsistent
    })
}

/// Where backends first stop agreeing, and what the diverging statement does.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DivergenceLocus {
    pub statement_index: usize,
    pub assertion_index: Option<usize>,
    pub error_kind: Option<ErrorKind>,
    /// Operations the diverging statement depends on, through `let` bindings.
    pub operations: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffVerdict {
    pub script_id: String,
    pub outcomes: BTreeMap<String, TestOutcome>,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub signature: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub locus: Option<DivergenceLocus>,
    #[serde(skip)]
    pub script: TestScript,
}

impl DiffVerdict {
    pub fn new(
        script_id: impl Into<String>,
        script: TestScript,
        outcomes: BTreeMap<String, TestOutcome>,
    ) -> Result<Self, DiffError> {
        let status = compare(&outcomes)?;
        let (signature, locus) = match status {
            Status::Consistent => (None, None),
            Status::Inconsistent => {
                let locus = first_divergence(&script, &outcomes);
                (Some(signature(&script, &outcomes, &locus)), Some(locus))
            }
        };
        Ok(DiffVerdict {
            script_id: script_id.into(),
            outcomes,
            status,
            signature,
            locus,
            script,
        })
    }

    pub fn is_inconsistent(&self) -> bool {
        self.status == Status::Inconsistent
    }
}

/// Executes `script` on every backend and compares.
pub fn run_differential(
    script_id: &str,
    script: &TestScript,
    backends: &[std::sync::Arc<dyn Backend>],
    limits: ExecutionLimits,
) -> Result<DiffVerdict, DiffError> {
    let outcomes = backends
        .iter()
        .map(|b| (b.name().to_string(), execute(script, b.as_ref(), limits)))
        .collect();
    DiffVerdict::new(script_id, script.clone(), outcomes)
}

fn first_divergence(
    script: &TestScript,
    outcomes: &BTreeMap<String, TestOutcome>,
) -> DivergenceLocus {
    // Ties on the earliest statement resolve to the first backend by name.
    let (_, stopped) = outcomes
        .iter()
        .filter_map(|(name, o)| o.statement_index().map(|i| (i, (name, o))))
        .min_by(|a, b| a.0.cmp(&b.0).then(a.1 .0.cmp(b.1 .0)))
        .expect("an inconsistent verdict has a non-pass outcome");
    let outcome = stopped.1;
    let statement_index = outcome.statement_index().unwrap_or(0);
    let (assertion_index, error_kind) = match outcome.key() {
        OutcomeKey::Fail(i) => (Some(i), None),
        OutcomeKey::Err(k) => (None, Some(k)),
        OutcomeKey::Pass => (None, None),
    };
    DivergenceLocus {
        statement_index,
        assertion_index,
        error_kind,
        operations: dependency_operations(script, statement_index),
    }
}

fn expr_ops(e: &Expr, out: &mut BTreeSet<String>, vars: &mut Vec<String>) {
    match e {
        Expr::Lit(_) | Expr::Str(_) => {}
        Expr::Var(v) => vars.push(v.clone()),
        Expr::ParseValue { features, .. } => {
            out.insert("parse".into());
            out.extend(features.iter().map(|f| format!("parse:{f}")));
        }
        Expr::ParseTyped { features, .. } => {
            out.insert("parse_typed".into());
            out.extend(features.iter().map(|f| format!("parse_typed:{f}")));
        }
        Expr::Serialize { features, .. } => {
            out.insert("serialize".into());
            out.extend(features.iter().map(|f| format!("serialize:{f}")));
        }
        Expr::Get { as_type, .. } => {
            out.insert(format!("get:{}", as_type.as_str()));
        }
        Expr::PathEval { .. } => {
            out.insert("path".into());
        }
        Expr::IsValid(_) => {
            out.insert("is_valid".into());
        }
        Expr::Size(_) => {
            out.insert("size".into());
        }
        Expr::MakeBean { .. } => {
            out.insert("new".into());
        }
        Expr::StripZeros(_) => {
            out.insert("strip_zeros".into());
        }
    }
    for c in e.children() {
        expr_ops(c, out, vars);
    }
}

fn statement_exprs(s: &Statement) -> Vec<&Expr> {
    match s {
        Statement::Let { expr, .. } => vec![expr],
        Statement::AssertEq(a, b) => vec![a, b],
        Statement::AssertNull(e) | Statement::AssertNotNull(e) | Statement::AssertThrows(e) => {
            vec![e]
        }
    }
}

fn dependency_operations(script: &TestScript, at: usize) -> Vec<String> {
    let Some(stmt) = script.statements.get(at) else {
        return Vec::new();
    };
    let mut ops = BTreeSet::new();
    let mut pending = Vec::new();
    for e in statement_exprs(stmt) {
        expr_ops(e, &mut ops, &mut pending);
    }
    let mut seen = BTreeSet::new();
    while let Some(v) = pending.pop() {
        if !seen.insert(v.clone()) {
            continue;
        }
        // The binding visible at `at` is the last `let` before it.
        let binding = script.statements[..at].iter().rev().find_map(|s| match s {
            Statement::Let { var, expr } if *var == v => Some(expr),
            _ => None,
        });
        if let Some(expr) = binding {
            expr_ops(expr, &mut ops, &mut pending);
        }
    }
    ops.into_iter().collect()
}

/// Hash of the script with literals blanked and names replaced by ordinals.
pub fn skeleton_hash(script: &TestScript) -> String {
    crate::sha256_hex(print_unchecked(&skeleton(script)))
}

fn skeleton(script: &TestScript) -> TestScript {
    let bean_names: HashMap<&str, String> = script
        .beans
        .iter()
        .enumerate()
        .map(|(i, b)| (b.name.as_str(), format!("B{i}")))
        .collect();
    let rename_ty = |ty: &FieldType| -> FieldType {
        fn go(ty: &FieldType, names: &HashMap<&str, String>) -> FieldType {
            match ty {
                FieldType::Bean(n) => {
                    FieldType::Bean(names.get(n.as_str()).cloned().unwrap_or_default())
                }
                FieldType::List(inner) => FieldType::List(Box::new(go(inner, names))),
                other => other.clone(),
            }
        }
        go(ty, &bean_names)
    };
    let beans = script
        .beans
        .iter()
        .map(|b| BeanDef {
            name: bean_names[b.name.as_str()].clone(),
            fields: b
                .fields
                .iter()
                .map(|f| crate::tdsl::FieldDef {
                    name: f.name.clone(),
                    ty: rename_ty(&f.ty),
                })
                .collect(),
        })
        .collect();
    let mut vars: HashMap<String, String> = HashMap::new();
    let mut statements = Vec::with_capacity(script.statements.len());
    for s in &script.statements {
        let st = match s {
            Statement::Let { var, expr } => {
                let expr = skel_expr(expr, &vars, &bean_names);
                let n = vars.len();
                let name = vars
                    .entry(var.clone())
                    .or_insert_with(|| format!("v{n}"))
                    .clone();
                Statement::Let { var: name, expr }
            }
            Statement::AssertEq(a, b) => Statement::AssertEq(
                skel_expr(a, &vars, &bean_names),
                skel_expr(b, &vars, &bean_names),
            ),
            Statement::AssertNull(e) => Statement::AssertNull(skel_expr(e, &vars, &bean_names)),
            Statement::AssertNotNull(e) => {
                Statement::AssertNotNull(skel_expr(e, &vars, &bean_names))
            }
            Statement::AssertThrows(e) => Statement::AssertThrows(skel_expr(e, &vars, &bean_names)),
        };
        statements.push(st);
    }
    TestScript { beans, statements }
}

fn skel_path(path: &str) -> String {
    let mut out = String::new();
    let mut in_index = false;
    let mut in_member = false;
    for c in path.chars() {
        match c {
            '$' => out.push('$'),
            '.' => {
                in_member = true;
                in_index = false;
                out.push_str("._");
            }
            '[' => {
                in_member = false;
                in_index = true;
                out.push_str("[0");
            }
            ']' => {
                in_index = false;
                out.push(']');
            }
            _ if in_member || in_index => {}
            other => out.push(other),
        }
    }
    out
}

fn skel_expr(e: &Expr, vars: &HashMap<String, String>, beans: &HashMap<&str, String>) -> Expr {
    let sub = |x: &Expr| Box::new(skel_expr(x, vars, beans));
    let bean = |n: &str| beans.get(n).cloned().unwrap_or_default();
    match e {
        Expr::Lit(_) => Expr::Lit(JsonValue::Null),
        Expr::Str(_) => Expr::Str(String::new()),
        Expr::Var(v) => Expr::Var(vars.get(v).cloned().unwrap_or_default()),
        Expr::ParseValue { text, features } => Expr::ParseValue {
            text: sub(text),
            features: features.clone(),
        },
        Expr::ParseTyped {
            text,
            bean: b,
            features,
        } => Expr::ParseTyped {
            text: sub(text),
            bean: bean(b),
            features: features.clone(),
        },
        Expr::Serialize { value, features } => Expr::Serialize {
            value: sub(value),
            features: features.clone(),
        },
        Expr::Get {
            target,
            accessor,
            as_type,
        } => Expr::Get {
            target: sub(target),
            accessor: match accessor {
                Accessor::Key(_) => Accessor::Key(String::new()),
                Accessor::Index(_) => Accessor::Index(0),
            },
            as_type: *as_type,
        },
        Expr::PathEval { target, path } => Expr::PathEval {
            target: sub(target),
            path: skel_path(path),
        },
        Expr::IsValid(x) => Expr::IsValid(sub(x)),
        Expr::Size(x) => Expr::Size(sub(x)),
        Expr::MakeBean { bean: b, fields } => Expr::MakeBean {
            bean: bean(b),
            fields: fields
                .iter()
                .map(|(f, x)| (f.clone(), skel_expr(x, vars, beans)))
                .collect(),
        },
        Expr::StripZeros(x) => Expr::StripZeros(sub(x)),
    }
}

fn signature(
    script: &TestScript,
    outcomes: &BTreeMap<String, TestOutcome>,
    locus: &DivergenceLocus,
) -> String {
    let mut h = String::new();
    for (name, o) in outcomes {
        h.push_str(&format!("{name}={}\n", o.key()));
    }
    match (locus.assertion_index, locus.error_kind) {
        (Some(i), _) => h.push_str(&format!("locus=FAIL({i})\n")),
        (_, Some(k)) => h.push_str(&format!("locus=ERR({k})\n")),
        _ => h.push_str("locus=-\n"),
    }
    h.push_str(&format!("skeleton={}\n", skeleton_hash(script)));
    crate::sha256_hex(h)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BugReport {
    pub signature: String,
    /// Smallest script id carrying this signature.
    pub representative: String,
    pub script_ids: Vec<String>,
    pub outcomes: BTreeMap<String, TestOutcome>,
    pub locus: DivergenceLocus,
    pub script_text: String,
}

/// Groups inconsistent verdicts by signature and drops suppressed ones.
/// Reports are ordered by signature.
pub fn dedup(verdicts: &[DiffVerdict], suppressed: &[String]) -> Vec<BugReport> {
    let suppressed: BTreeSet<&str> = suppressed.iter().map(String::as_str).collect();
    let mut groups: BTreeMap<&str, Vec<&DiffVerdict>> = BTreeMap::new();
    for v in verdicts {
        if let Some(sig) = v.signature.as_deref() {
            if !suppressed.contains(sig) {
                groups.entry(sig).or_default().push(v);
            }
        }
    }
    groups
        .into_iter()
        .map(|(sig, mut vs)| {
            vs.sort_by(|a, b| a.script_id.cmp(&b.script_id));
            let rep = vs[0];
            BugReport {
                signature: sig.to_string(),
                representative: rep.script_id.clone(),
                script_ids: vs.iter().map(|v| v.script_id.clone()).collect(),
                outcomes: rep.outcomes.clone(),
                locus: rep
                    .locus
                    .clone()
                    .expect("inconsistent verdicts carry a locus"),
                script_text: print_unchecked(&rep.script),
            }
        })
        .collect()
}
