use std::fmt::Write as _;

use super::ast::*;
use super::error::ScriptError;
use super::validate::validate;
use crate::value::{write_json_string, JsonValue};

/// Canonical text for a valid script: beans first, one item per line.
pub fn print_script(script: &TestScript) -> Result<String, ScriptError> {
    validate(script)?;
    Ok(print_unchecked(script))
}

pub(crate) fn print_unchecked(script: &TestScript) -> String {
    let mut out = String::new();
    for b in &script.beans {
        out.push_str("bean ");
        out.push_str(&b.name);
        out.push_str(" {");
        for (i, f) in b.fields.iter().enumerate() {
            out.push_str(if i == 0 { " " } else { ", " });
            out.push_str(&f.name);
            out.push_str(": ");
            write_type(&mut out, &f.ty);
        }
        out.push_str(if b.fields.is_empty() { "}\n" } else { " }\n" });
    }
    for s in &script.statements {
        write_statement(&mut out, s);
        out.push('\n');
    }
    out
}

fn write_type(out: &mut String, ty: &FieldType) {
    match ty {
        FieldType::String => out.push_str("string"),
        FieldType::Integer => out.push_str("integer"),
        FieldType::Decimal => out.push_str("decimal"),
        FieldType::Boolean => out.push_str("boolean"),
        FieldType::Bean(n) => out.push_str(n),
        FieldType::List(inner) => {
            out.push_str("list<");
            write_type(out, inner);
            out.push('>');
        }
    }
}

fn write_statement(out: &mut String, s: &Statement) {
    match s {
        Statement::Let { var, expr } => {
            let _ = write!(out, "let {var} = ");
            write_expr(out, expr);
        }
        Statement::AssertEq(a, b) => {
            out.push_str("assert_eq(");
            write_expr(out, a);
            out.push_str(", ");
            write_expr(out, b);
            out.push(')');
        }
        Statement::AssertNull(e) => call1(out, "assert_null", e),
        Statement::AssertNotNull(e) => call1(out, "assert_not_null", e),
        Statement::AssertThrows(e) => call1(out, "assert_throws", e),
    }
    out.push(';');
}

fn call1(out: &mut String, name: &str, e: &Expr) {
    out.push_str(name);
    out.push('(');
    write_expr(out, e);
    out.push(')');
}

fn write_features<F: std::fmt::Display>(out: &mut String, features: &[F]) {
    if features.is_empty() {
        return;
    }
    out.push_str(", [");
    for (i, f) in features.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        let _ = write!(out, "{f}");
    }
    out.push(']');
}

fn write_expr(out: &mut String, e: &Expr) {
    match e {
        Expr::Lit(v) => write_literal(out, v),
        Expr::Str(s) => write_json_string(out, s),
        Expr::Var(v) => out.push_str(v),
        Expr::ParseValue { text, features } => {
            out.push_str("parse(");
            write_expr(out, text);
            write_features(out, features);
            out.push(')');
        }
        Expr::ParseTyped {
            text,
            bean,
            features,
        } => {
            out.push_str("parse_typed(");
            write_expr(out, text);
            let _ = write!(out, ", {bean}");
            write_features(out, features);
            out.push(')');
        }
        Expr::Serialize { value, features } => {
            out.push_str("serialize(");
            write_expr(out, value);
            write_features(out, features);
            out.push(')');
        }
        Expr::Get {
            target,
            accessor,
            as_type,
        } => {
            out.push_str("get(");
            write_expr(out, target);
            out.push_str(", ");
            match accessor {
                Accessor::Key(k) => write_json_string(out, k),
                Accessor::Index(i) => {
                    let _ = write!(out, "{i}");
                }
            }
            let _ = write!(out, ", {})", as_type.as_str());
        }
        Expr::PathEval { target, path } => {
            out.push_str("path(");
            write_expr(out, target);
            out.push_str(", ");
            write_json_string(out, path);
            out.push(')');
        }
        Expr::IsValid(x) => call1(out, "is_valid", x),
        Expr::Size(x) => call1(out, "size", x),
        Expr::StripZeros(x) => call1(out, "strip_zeros", x),
        Expr::MakeBean { bean, fields } => {
            let _ = write!(out, "new {bean} {{");
            for (i, (f, x)) in fields.iter().enumerate() {
                out.push_str(if i == 0 { " " } else { ", " });
                let _ = write!(out, "{f}: ");
                write_expr(out, x);
            }
            out.push_str(if fields.is_empty() { "}" } else { " }" });
        }
    }
}

/// DSL literal text. Decimals that would otherwise read back as integers get
/// the `d` suffix.
fn write_literal(out: &mut String, v: &JsonValue) {
    match v {
        JsonValue::Null => out.push_str("null"),
        JsonValue::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        JsonValue::Int(i) => {
            let _ = write!(out, "{i}");
        }
        JsonValue::Dec(d) => {
            out.push_str(&d.to_canonical_string());
            if d.scale() == 0 && d.to_i64_exact().is_some() {
                out.push('d');
            }
        }
        JsonValue::Str(s) => write_json_string(out, s),
        JsonValue::Arr(items) => {
            out.push('[');
            for (i, x) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_literal(out, x);
            }
            out.push(']');
        }
        JsonValue::Obj(o) => {
            out.push('{');
            for (i, (k, x)) in o.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_json_string(out, k);
                out.push(':');
                write_literal(out, x);
            }
            out.push('}');
        }
    }
}
