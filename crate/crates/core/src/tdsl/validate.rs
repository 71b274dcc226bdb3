use std::collections::{HashMap, HashSet};

use super::ast::*;
use super::error::{ScriptError, ScriptErrorKind};
use crate::value::JsonValue;

/// Source positions for beans and statements, parallel to the AST vectors.
#[derive(Debug, Default)]
pub(crate) struct Locations {
    pub beans: Vec<(usize, usize)>,
    pub statements: Vec<(usize, usize)>,
}

/// Checks every structural invariant of a script built in code.
pub fn validate(script: &TestScript) -> Result<(), ScriptError> {
    validate_located(script, &Locations::default())
}

pub(crate) fn validate_located(script: &TestScript, locs: &Locations) -> Result<(), ScriptError> {
    let bean_loc = |i: usize| locs.beans.get(i).copied().unwrap_or((0, 0));
    let stmt_loc = |i: usize| locs.statements.get(i).copied().unwrap_or((0, 0));

    let mut beans: HashMap<&str, &BeanDef> = HashMap::new();
    for (i, b) in script.beans.iter().enumerate() {
        let (l, c) = bean_loc(i);
        if !is_identifier(&b.name) {
            return Err(ScriptError::new(
                ScriptErrorKind::InvalidIdentifier,
                l,
                c,
                format!("bad bean name `{}`", b.name),
            ));
        }
        if beans.insert(&b.name, b).is_some() {
            return Err(ScriptError::new(
                ScriptErrorKind::DuplicateBean,
                l,
                c,
                format!("bean `{}` defined twice", b.name),
            ));
        }
        let mut seen = HashSet::new();
        for f in &b.fields {
            if !is_identifier(&f.name) {
                return Err(ScriptError::new(
                    ScriptErrorKind::InvalidIdentifier,
                    l,
                    c,
                    format!("bad field name `{}`", f.name),
                ));
            }
            if !seen.insert(f.name.as_str()) {
                return Err(ScriptError::new(
                    ScriptErrorKind::DuplicateField,
                    l,
                    c,
                    format!("field `{}` repeated in bean `{}`", f.name, b.name),
                ));
            }
        }
    }
    for (i, b) in script.beans.iter().enumerate() {
        let (l, c) = bean_loc(i);
        for f in &b.fields {
            if let Some(name) = bean_ref(&f.ty) {
                if !beans.contains_key(name) {
                    return Err(ScriptError::new(
                        ScriptErrorKind::UnknownBean,
                        l,
                        c,
                        format!("unknown bean `{name}`"),
                    ));
                }
            }
        }
    }
    check_cycles(script, &beans, &bean_loc)?;

    let mut bound: HashSet<&str> = HashSet::new();
    for (i, stmt) in script.statements.iter().enumerate() {
        let (l, c) = stmt_loc(i);
        let check = |e: &Expr| check_expr(e, &bound, &beans, l, c);
        match stmt {
            Statement::Let { var, expr } => {
                check(expr)?;
                if !is_identifier(var) {
                    return Err(ScriptError::new(
                        ScriptErrorKind::InvalidIdentifier,
                        l,
                        c,
                        format!("bad variable name `{var}`"),
                    ));
                }
                bound.insert(var);
            }
            Statement::AssertEq(a, b) => {
                check(a)?;
                check(b)?;
            }
            Statement::AssertNull(e) | Statement::AssertNotNull(e) | Statement::AssertThrows(e) => {
                check(e)?
            }
        }
    }
    if script.assertion_count() == 0 {
        return Err(ScriptError::new(
            ScriptErrorKind::NoAssertion,
            0,
            0,
            "script contains no assertion",
        ));
    }
    Ok(())
}

fn bean_ref(ty: &FieldType) -> Option<&str> {
    match ty {
        FieldType::Bean(n) => Some(n),
        FieldType::List(inner) => bean_ref(inner),
        _ => None,
    }
}

fn check_cycles(
    script: &TestScript,
    beans: &HashMap<&str, &BeanDef>,
    bean_loc: &dyn Fn(usize) -> (usize, usize),
) -> Result<(), ScriptError> {
    // 0 = unvisited, 1 = on stack, 2 = done
    fn visit<'a>(
        name: &'a str,
        beans: &HashMap<&'a str, &'a BeanDef>,
        state: &mut HashMap<&'a str, u8>,
    ) -> Option<&'a str> {
        match state.get(name) {
            Some(1) => return Some(name),
            Some(2) => return None,
            _ => {}
        }
        state.insert(name, 1);
        if let Some(b) = beans.get(name) {
            for f in &b.fields {
                if let Some(next) = bean_ref(&f.ty) {
                    if let Some(hit) = visit(next, beans, state) {
                        return Some(hit);
                    }
                }
            }
        }
        state.insert(name, 2);
        None
    }
    let mut state = HashMap::new();
    for (i, b) in script.beans.iter().enumerate() {
        if let Some(hit) = visit(&b.name, beans, &mut state) {
            let (l, c) = bean_loc(i);
            return Err(ScriptError::new(
                ScriptErrorKind::RecursiveBean,
                l,
                c,
                format!("bean `{hit}` is recursive"),
            ));
        }
    }
    Ok(())
}

fn check_expr(
    e: &Expr,
    bound: &HashSet<&str>,
    beans: &HashMap<&str, &BeanDef>,
    l: usize,
    c: usize,
) -> Result<(), ScriptError> {
    let err = |kind, msg: String| Err(ScriptError::new(kind, l, c, msg));
    match e {
        Expr::Lit(JsonValue::Str(_)) => {
            return err(
                ScriptErrorKind::InvalidLiteral,
                "bare string literal must be a Str expression".into(),
            )
        }
        Expr::Var(v) if !bound.contains(v.as_str()) => {
            return err(
                ScriptErrorKind::UnboundVariable,
                format!("variable `{v}` is not bound"),
            );
        }
        Expr::ParseValue { features, .. } => {
            if has_dup(features) {
                return err(
                    ScriptErrorKind::DuplicateFeature,
                    "duplicate reader feature".into(),
                );
            }
        }
        Expr::ParseTyped { bean, features, .. } => {
            if !beans.contains_key(bean.as_str()) {
                return err(
                    ScriptErrorKind::UnknownBean,
                    format!("unknown bean `{bean}`"),
                );
            }
            if has_dup(features) {
                return err(
                    ScriptErrorKind::DuplicateFeature,
                    "duplicate reader feature".into(),
                );
            }
        }
        Expr::Serialize { features, .. } => {
            if has_dup(features) {
                return err(
                    ScriptErrorKind::DuplicateFeature,
                    "duplicate writer feature".into(),
                );
            }
        }
        Expr::MakeBean { bean, fields } => {
            let Some(def) = beans.get(bean.as_str()) else {
                return err(
                    ScriptErrorKind::UnknownBean,
                    format!("unknown bean `{bean}`"),
                );
            };
            let mut seen = HashSet::new();
            for (f, _) in fields {
                if def.field(f).is_none() {
                    return err(
                        ScriptErrorKind::UnknownField,
                        format!("bean `{bean}` has no field `{f}`"),
                    );
                }
                if !seen.insert(f.as_str()) {
                    return err(
                        ScriptErrorKind::DuplicateField,
                        format!("field `{f}` assigned twice"),
                    );
                }
            }
        }
        _ => {}
    }
    for child in e.children() {
        check_expr(child, bound, beans, l, c)?;
    }
    Ok(())
}

fn has_dup<T: PartialEq>(items: &[T]) -> bool {
    items
        .iter()
        .enumerate()
        .any(|(i, a)| items[..i].contains(a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tdsl::parse_script;

    #[test]
    fn rejects_recursive_beans() {
        let e = parse_script("bean A { b: B } bean B { a: list<A> } let x = 1; assert_null(x);")
            .unwrap_err();
        assert_eq!(e.kind, ScriptErrorKind::RecursiveBean);
        assert_eq!(e.line, 1);
    }

    #[test]
    fn rejects_duplicate_fields_and_unknown_fields() {
        let e = parse_script("bean A { x: string, x: integer } let a = 1; assert_null(a);")
            .unwrap_err();
        assert_eq!(e.kind, ScriptErrorKind::DuplicateField);
        let e = parse_script("bean A { x: string } let a = new A { y: 1 }; assert_null(a);")
            .unwrap_err();
        assert_eq!(e.kind, ScriptErrorKind::UnknownField);
    }

    #[test]
    fn rejects_scripts_without_assertions() {
        let e = parse_script("let a = 1;").unwrap_err();
        assert_eq!(e.kind, ScriptErrorKind::NoAssertion);
    }

    #[test]
    fn let_does_not_see_itself() {
        let e = parse_script("let a = a; assert_null(a);").unwrap_err();
        assert_eq!(e.kind, ScriptErrorKind::UnboundVariable);
    }

    #[test]
    fn ast_built_in_code_is_checked() {
        let s = TestScript {
            beans: vec![],
            statements: vec![Statement::AssertNull(Expr::Lit(JsonValue::Str("x".into())))],
        };
        assert_eq!(
            validate(&s).unwrap_err().kind,
            ScriptErrorKind::InvalidLiteral
        );
    }
}
