//! Random well-formed scripts. Expressions are drawn freely over a small
//! name pool, then repaired so every variable and bean reference resolves.

use std::collections::{BTreeSet, HashSet};

use proptest::prelude::*;

use jsonoracle::backends::canonical_json;
use jsonoracle::features::{ReaderFeature, WriterFeature};
use jsonoracle::tdsl::{
    Accessor, AsType, BeanDef, Expr, FieldDef, FieldType, Statement, TestScript,
};
use jsonoracle::value::{Decimal, JsonObject, JsonValue};

const VARS: &[&str] = &["a", "b", "obj", "text", "v1"];
const FIELDS: &[&str] = &["id", "name", "value", "items", "flag", "child"];
const KEYS: &[&str] = &["id", "name", "value", "data", "b", "x"];
const PATHS: &[&str] = &[
    "$",
    "$.data",
    "$.data[0]",
    "$.data[0][0]",
    "$.name",
    "$.items[1].id",
    "$[0]",
    "$.x.y",
];

fn decimal() -> BoxedStrategy<Decimal> {
    (any::<bool>(), "[0-9]{1,22}", -4i32..12)
        .prop_map(|(n, d, s)| Decimal::from_parts(n, &d, s).unwrap())
        .boxed()
}

fn text_string() -> BoxedStrategy<String> {
    prop_oneof![
        "[a-z ]{0,6}",
        "\\PC{0,8}",
        Just("  padded  ".to_string()),
        Just("quote\"back\\slash\nnl".to_string()),
    ]
    .boxed()
}

fn scalar() -> BoxedStrategy<JsonValue> {
    prop_oneof![
        Just(JsonValue::Null),
        any::<bool>().prop_map(JsonValue::Bool),
        prop_oneof![any::<i64>(), -5i64..5].prop_map(JsonValue::Int),
        decimal().prop_map(JsonValue::Dec),
    ]
    .boxed()
}

fn json_value() -> BoxedStrategy<JsonValue> {
    let leaf = prop_oneof![scalar(), text_string().prop_map(JsonValue::Str)];
    leaf.prop_recursive(3, 16, 4, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 0..4).prop_map(JsonValue::Arr),
            prop::collection::vec((prop::sample::select(KEYS), inner), 0..4).prop_map(|kvs| {
                let mut o = JsonObject::new();
                for (k, v) in kvs {
                    o.insert(k, v);
                }
                JsonValue::Obj(o)
            }),
        ]
    })
    .boxed()
}

/// Literal accepted by `Expr::Lit`: anything but a bare string.
fn literal() -> BoxedStrategy<JsonValue> {
    json_value()
        .prop_map(|v| match v {
            JsonValue::Str(_) => JsonValue::Null,
            v => v,
        })
        .boxed()
}

fn json_text() -> BoxedStrategy<String> {
    prop_oneof![
        4 => json_value().prop_map(|v| canonical_json(&v)),
        1 => Just("{\"data\": [1], \"name\": \" sp \"}".to_string()),
        1 => Just("{'a': 'b'}".to_string()),
        1 => Just("[1, 2.50, 9223372036854775808, true, null]".to_string()),
        1 => Just("{\"id\": 1, \"value\": 12.50, \"items\": [{\"id\": 2}]}".to_string()),
        1 => text_string(),
    ]
    .boxed()
}

fn reader_features() -> BoxedStrategy<Vec<ReaderFeature>> {
    prop::sample::subsequence(ReaderFeature::ALL.to_vec(), 0..=2)
        .prop_shuffle()
        .boxed()
}

fn writer_features() -> BoxedStrategy<Vec<WriterFeature>> {
    prop::sample::subsequence(WriterFeature::ALL.to_vec(), 0..=2)
        .prop_shuffle()
        .boxed()
}

fn accessor() -> BoxedStrategy<Accessor> {
    prop_oneof![
        prop::sample::select(KEYS).prop_map(|k| Accessor::Key(k.to_string())),
        (0usize..3).prop_map(Accessor::Index),
    ]
    .boxed()
}

fn bean_name() -> BoxedStrategy<String> {
    (0usize..3).prop_map(|i| format!("B{i}")).boxed()
}

fn expr() -> BoxedStrategy<Expr> {
    let leaf = prop_oneof![
        2 => literal().prop_map(Expr::Lit),
        3 => json_text().prop_map(Expr::Str),
        3 => prop::sample::select(VARS).prop_map(|v| Expr::Var(v.to_string())),
    ];
    leaf.prop_recursive(3, 24, 3, |inner| {
        let b = || inner.clone().prop_map(Box::new);
        prop_oneof![
            (b(), reader_features())
                .prop_map(|(text, features)| Expr::ParseValue { text, features }),
            (b(), bean_name(), reader_features()).prop_map(|(text, bean, features)| {
                Expr::ParseTyped {
                    text,
                    bean,
                    features,
                }
            }),
            (b(), writer_features())
                .prop_map(|(value, features)| Expr::Serialize { value, features }),
            (b(), accessor(), prop::sample::select(AsType::ALL.to_vec())).prop_map(
                |(target, accessor, as_type)| Expr::Get {
                    target,
                    accessor,
                    as_type
                }
            ),
            (b(), prop::sample::select(PATHS)).prop_map(|(target, p)| Expr::PathEval {
                target,
                path: p.to_string()
            }),
            b().prop_map(Expr::IsValid),
            b().prop_map(Expr::Size),
            b().prop_map(Expr::StripZeros),
            (
                bean_name(),
                prop::collection::vec((prop::sample::select(FIELDS), inner.clone()), 0..3)
            )
                .prop_map(|(bean, fs)| Expr::MakeBean {
                    bean,
                    fields: fs.into_iter().map(|(f, e)| (f.to_string(), e)).collect()
                }),
        ]
    })
    .boxed()
}

fn var() -> BoxedStrategy<Box<Expr>> {
    prop::sample::select(VARS)
        .prop_map(|v| Box::new(Expr::Var(v.to_string())))
        .boxed()
}

/// One API call on a variable or text, the way hand-written tests look.
fn shallow_expr() -> BoxedStrategy<Expr> {
    let text = || json_text().prop_map(|t| Box::new(Expr::Str(t)));
    prop_oneof![
        3 => (text(), reader_features()).prop_map(|(text, features)| Expr::ParseValue { text, features }),
        1 => (text(), bean_name(), reader_features())
            .prop_map(|(text, bean, features)| Expr::ParseTyped { text, bean, features }),
        2 => (var(), writer_features()).prop_map(|(value, features)| Expr::Serialize { value, features }),
        3 => (var(), accessor(), prop::sample::select(AsType::ALL.to_vec()))
            .prop_map(|(target, accessor, as_type)| Expr::Get { target, accessor, as_type }),
        1 => (prop_oneof![var(), text()], prop::sample::select(PATHS)).prop_map(|(target, p)| Expr::PathEval {
            target,
            path: p.to_string()
        }),
        1 => var().prop_map(Expr::Size),
        1 => text().prop_map(Expr::IsValid),
        2 => literal().prop_map(Expr::Lit),
        1 => json_text().prop_map(Expr::Str),
        2 => var().prop_map(|v| *v),
    ]
    .boxed()
}

fn any_expr() -> BoxedStrategy<Expr> {
    prop_oneof![3 => shallow_expr(), 1 => expr()].boxed()
}

fn scalar_type() -> BoxedStrategy<FieldType> {
    prop_oneof![
        Just(FieldType::String),
        Just(FieldType::Integer),
        Just(FieldType::Decimal),
        Just(FieldType::Boolean),
    ]
    .boxed()
}

fn field_type() -> BoxedStrategy<FieldType> {
    prop_oneof![
        3 => scalar_type(),
        1 => scalar_type().prop_map(|t| FieldType::List(Box::new(t))),
        1 => bean_name().prop_map(FieldType::Bean),
        1 => bean_name().prop_map(|n| FieldType::List(Box::new(FieldType::Bean(n)))),
    ]
    .boxed()
}

fn beans() -> BoxedStrategy<Vec<BeanDef>> {
    prop::collection::vec(
        prop::collection::vec((prop::sample::select(FIELDS), field_type()), 1..4),
        0..3,
    )
    .prop_map(|defs| {
        defs.into_iter()
            .enumerate()
            .map(|(i, fields)| {
                let mut seen = HashSet::new();
                let fields = fields
                    .into_iter()
                    .filter(|(n, _)| seen.insert(*n))
                    .map(|(n, ty)| FieldDef {
                        name: n.to_string(),
                        ty: repair_type(ty, i),
                    })
                    .collect();
                BeanDef {
                    name: format!("B{i}"),
                    fields,
                }
            })
            .collect()
    })
    .boxed()
}

/// Bean fields may only refer to earlier beans, which rules out cycles.
fn repair_type(ty: FieldType, index: usize) -> FieldType {
    match ty {
        FieldType::Bean(n) => match n[1..].parse::<usize>() {
            Ok(j) if j < index => FieldType::Bean(n),
            _ => FieldType::String,
        },
        FieldType::List(inner) => FieldType::List(Box::new(repair_type(*inner, index))),
        t => t,
    }
}

fn statement() -> BoxedStrategy<Statement> {
    prop_oneof![
        3 => (prop::sample::select(VARS), any_expr()).prop_map(|(v, expr)| Statement::Let { var: v.to_string(), expr }),
        3 => (any_expr(), any_expr()).prop_map(|(a, b)| Statement::AssertEq(a, b)),
        1 => any_expr().prop_map(Statement::AssertNull),
        1 => any_expr().prop_map(Statement::AssertNotNull),
        1 => any_expr().prop_map(Statement::AssertThrows),
    ]
    .boxed()
}

fn repair_expr(e: Expr, bound: &HashSet<String>, beans: &[BeanDef]) -> Expr {
    let r = |e: Box<Expr>| Box::new(repair_expr(*e, bound, beans));
    let pick = |name: &str| -> Option<&BeanDef> {
        if beans.is_empty() {
            return None;
        }
        let i: usize = name[1..].parse().unwrap_or(0);
        Some(&beans[i % beans.len()])
    };
    match e {
        Expr::Var(v) if !bound.contains(&v) => Expr::Lit(JsonValue::Int(1)),
        Expr::ParseValue { text, features } => Expr::ParseValue {
            text: r(text),
            features,
        },
        Expr::ParseTyped {
            text,
            bean,
            features,
        } => match pick(&bean) {
            Some(def) => Expr::ParseTyped {
                text: r(text),
                bean: def.name.clone(),
                features,
            },
            None => Expr::ParseValue {
                text: r(text),
                features,
            },
        },
        Expr::Serialize { value, features } => Expr::Serialize {
            value: r(value),
            features,
        },
        Expr::Get {
            target,
            accessor,
            as_type,
        } => Expr::Get {
            target: r(target),
            accessor,
            as_type,
        },
        Expr::PathEval { target, path } => Expr::PathEval {
            target: r(target),
            path,
        },
        Expr::IsValid(x) => Expr::IsValid(r(x)),
        Expr::Size(x) => Expr::Size(r(x)),
        Expr::StripZeros(x) => Expr::StripZeros(r(x)),
        Expr::MakeBean { bean, fields } => match pick(&bean) {
            Some(def) => {
                let mut seen = BTreeSet::new();
                let fields = fields
                    .into_iter()
                    .filter(|(f, _)| def.field(f).is_some() && seen.insert(f.clone()))
                    .map(|(f, x)| (f, repair_expr(x, bound, beans)))
                    .collect();
                Expr::MakeBean {
                    bean: def.name.clone(),
                    fields,
                }
            }
            None => Expr::Lit(JsonValue::Null),
        },
        other => other,
    }
}

fn repair(beans: Vec<BeanDef>, stmts: Vec<Statement>) -> TestScript {
    let mut bound = HashSet::new();
    let mut statements = Vec::with_capacity(stmts.len() + 1);
    for s in stmts {
        let fix = |e| repair_expr(e, &bound, &beans);
        let s = match s {
            Statement::Let { var, expr } => {
                let expr = fix(expr);
                bound.insert(var.clone());
                Statement::Let { var, expr }
            }
            Statement::AssertEq(a, b) => Statement::AssertEq(fix(a), fix(b)),
            Statement::AssertNull(e) => Statement::AssertNull(fix(e)),
            Statement::AssertNotNull(e) => Statement::AssertNotNull(fix(e)),
            Statement::AssertThrows(e) => Statement::AssertThrows(fix(e)),
        };
        statements.push(s);
    }
    if !statements.iter().any(Statement::is_assertion) {
        let last = bound.iter().min().cloned();
        statements.push(Statement::AssertNotNull(match last {
            Some(v) => Expr::Var(v),
            None => Expr::Lit(JsonValue::Null),
        }));
    }
    TestScript { beans, statements }
}

pub fn script() -> BoxedStrategy<TestScript> {
    (beans(), prop::collection::vec(statement(), 1..8))
        .prop_map(|(b, s)| repair(b, s))
        .boxed()
}
