//! Recursive-descent parser for the test DSL. One token of lookahead.

use std::str::FromStr;

use super::ast::*;
use super::error::{ScriptError, ScriptErrorKind};
use super::lexer::{tokenize, Tok, Token};
use super::validate::{validate_located, Locations};
use crate::features::{ReaderFeature, WriterFeature};
use crate::value::{Decimal, JsonObject, JsonValue};

/// Parses and validates a script.
pub fn parse_script(text: &str) -> Result<TestScript, ScriptError> {
    let tokens = tokenize(text)?;
    let mut p = Parser { tokens, pos: 0 };
    let mut script = TestScript::default();
    let mut locs = Locations::default();
    while !p.at_eof() {
        let t = p.peek().clone();
        if matches!(&t.tok, Tok::Ident(s) if s == "bean") {
            script.beans.push(p.bean()?);
            locs.beans.push((t.line, t.column));
            p.eat_punct(';');
        } else {
            script.statements.push(p.statement()?);
            locs.statements.push((t.line, t.column));
        }
    }
    validate_located(&script, &locs)?;
    Ok(script)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, ScriptError>;

const GETTER_TYPES: &str = "getter type (value, string, integer, decimal, boolean, object, array)";

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn at_eof(&self) -> bool {
        self.peek().tok == Tok::Eof
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if t.tok != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn error_at(&self, t: &Token, msg: impl Into<String>) -> ScriptError {
        ScriptError::new(ScriptErrorKind::Syntax, t.line, t.column, msg)
    }

    fn unexpected(&self, t: &Token, wanted: &str) -> ScriptError {
        self.error_at(t, format!("expected {wanted}, found {}", t.tok.describe()))
    }

    fn is_punct(&self, c: char) -> bool {
        self.peek().tok == Tok::Punct(c)
    }

    fn eat_punct(&mut self, c: char) -> bool {
        if self.is_punct(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, c: char) -> PResult<()> {
        let t = self.next();
        if t.tok == Tok::Punct(c) {
            Ok(())
        } else {
            Err(self.unexpected(&t, &format!("`{c}`")))
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> PResult<()> {
        let t = self.next();
        match &t.tok {
            Tok::Ident(s) if s == kw => Ok(()),
            _ => Err(self.unexpected(&t, &format!("`{kw}`"))),
        }
    }

    /// A user identifier (variable, bean or field name).
    fn name(&mut self, what: &str) -> PResult<String> {
        let t = self.next();
        match &t.tok {
            Tok::Ident(s) if is_identifier(s) => Ok(s.clone()),
            Tok::Ident(s) => Err(ScriptError::new(
                ScriptErrorKind::InvalidIdentifier,
                t.line,
                t.column,
                format!("`{s}` is reserved and cannot be used as a {what}"),
            )),
            _ => Err(self.unexpected(&t, what)),
        }
    }

    fn bean(&mut self) -> PResult<BeanDef> {
        self.expect_keyword("bean")?;
        let name = self.name("bean name")?;
        self.expect_punct('{')?;
        let mut fields = Vec::new();
        if !self.eat_punct('}') {
            loop {
                let fname = self.name("field name")?;
                self.expect_punct(':')?;
                let ty = self.field_type()?;
                fields.push(FieldDef { name: fname, ty });
                if self.eat_punct('}') {
                    break;
                }
                self.expect_punct(',')?;
            }
        }
        Ok(BeanDef { name, fields })
    }

    fn field_type(&mut self) -> PResult<FieldType> {
        let t = self.next();
        match &t.tok {
            Tok::Ident(s) => match s.as_str() {
                "string" => Ok(FieldType::String),
                "integer" => Ok(FieldType::Integer),
                "decimal" => Ok(FieldType::Decimal),
                "boolean" => Ok(FieldType::Boolean),
                "list" => {
                    self.expect_punct('<')?;
                    let inner = self.field_type()?;
                    self.expect_punct('>')?;
                    Ok(FieldType::List(Box::new(inner)))
                }
                other if is_identifier(other) => Ok(FieldType::Bean(other.to_string())),
                _ => Err(self.unexpected(&t, "field type")),
            },
            _ => Err(self.unexpected(&t, "field type")),
        }
    }

    fn statement(&mut self) -> PResult<Statement> {
        let t = self.next();
        let Tok::Ident(kw) = &t.tok else {
            return Err(self.unexpected(&t, "statement"));
        };
        let stmt = match kw.as_str() {
            "let" => {
                let var = self.name("variable name")?;
                self.expect_punct('=')?;
                let expr = self.expr()?;
                Statement::Let { var, expr }
            }
            "assert_eq" => {
                self.expect_punct('(')?;
                let a = self.expr()?;
                self.expect_punct(',')?;
                let b = self.expr()?;
                self.expect_punct(')')?;
                Statement::AssertEq(a, b)
            }
            "assert_null" | "assert_not_null" | "assert_throws" => {
                self.expect_punct('(')?;
                let e = self.expr()?;
                self.expect_punct(')')?;
                match kw.as_str() {
                    "assert_null" => Statement::AssertNull(e),
                    "assert_not_null" => Statement::AssertNotNull(e),
                    _ => Statement::AssertThrows(e),
                }
            }
            _ => return Err(self.unexpected(&t, "`let`, `bean` or an assertion")),
        };
        self.expect_punct(';')?;
        Ok(stmt)
    }

    fn features<F>(&mut self) -> PResult<Vec<F>>
    where
        F: FromStr + PartialEq,
    {
        self.expect_punct('[')?;
        let mut out: Vec<F> = Vec::new();
        if self.eat_punct(']') {
            return Ok(out);
        }
        loop {
            let t = self.next();
            let Tok::Ident(s) = &t.tok else {
                return Err(self.unexpected(&t, "feature name"));
            };
            let f = s.parse::<F>().map_err(|_| {
                ScriptError::new(
                    ScriptErrorKind::UnknownFeature,
                    t.line,
                    t.column,
                    format!("unknown feature `{s}`"),
                )
            })?;
            if out.contains(&f) {
                return Err(ScriptError::new(
                    ScriptErrorKind::DuplicateFeature,
                    t.line,
                    t.column,
                    format!("feature `{s}` listed twice"),
                ));
            }
            out.push(f);
            if self.eat_punct(']') {
                return Ok(out);
            }
            self.expect_punct(',')?;
        }
    }

    fn opt_features<F>(&mut self) -> PResult<Vec<F>>
    where
        F: FromStr + PartialEq,
    {
        if self.eat_punct(',') {
            self.features()
        } else {
            Ok(Vec::new())
        }
    }

    fn unary(&mut self) -> PResult<Box<Expr>> {
        self.expect_punct('(')?;
        let e = self.expr()?;
        self.expect_punct(')')?;
        Ok(Box::new(e))
    }

    fn expr(&mut self) -> PResult<Expr> {
        let t = self.peek().clone();
        match &t.tok {
            Tok::Str(s) => {
                self.pos += 1;
                Ok(Expr::Str(s.clone()))
            }
            Tok::Number(..) | Tok::Punct('[') | Tok::Punct('{') => Ok(Expr::Lit(self.literal()?)),
            Tok::Ident(id) => match id.as_str() {
                "null" | "true" | "false" => Ok(Expr::Lit(self.literal()?)),
                "parse" => {
                    self.pos += 1;
                    self.expect_punct('(')?;
                    let text = Box::new(self.expr()?);
                    let features = self.opt_features::<ReaderFeature>()?;
                    self.expect_punct(')')?;
                    Ok(Expr::ParseValue { text, features })
                }
                "parse_typed" => {
                    self.pos += 1;
                    self.expect_punct('(')?;
                    let text = Box::new(self.expr()?);
                    self.expect_punct(',')?;
                    let bean = self.name("bean name")?;
                    let features = self.opt_features::<ReaderFeature>()?;
                    self.expect_punct(')')?;
                    Ok(Expr::ParseTyped {
                        text,
                        bean,
                        features,
                    })
                }
                "serialize" => {
                    self.pos += 1;
                    self.expect_punct('(')?;
                    let value = Box::new(self.expr()?);
                    let features = self.opt_features::<WriterFeature>()?;
                    self.expect_punct(')')?;
                    Ok(Expr::Serialize { value, features })
                }
                "get" => {
                    self.pos += 1;
                    self.expect_punct('(')?;
                    let target = Box::new(self.expr()?);
                    self.expect_punct(',')?;
                    let accessor = self.accessor()?;
                    self.expect_punct(',')?;
                    let at = self.next();
                    let as_type = match &at.tok {
                        Tok::Ident(s) => AsType::from_name(s),
                        _ => None,
                    }
                    .ok_or_else(|| self.unexpected(&at, GETTER_TYPES))?;
                    self.expect_punct(')')?;
                    Ok(Expr::Get {
                        target,
                        accessor,
                        as_type,
                    })
                }
                "path" => {
                    self.pos += 1;
                    self.expect_punct('(')?;
                    let target = Box::new(self.expr()?);
                    self.expect_punct(',')?;
                    let pt = self.next();
                    let Tok::Str(path) = pt.tok.clone() else {
                        return Err(self.unexpected(&pt, "path string"));
                    };
                    self.expect_punct(')')?;
                    Ok(Expr::PathEval { target, path })
                }
                "is_valid" => {
                    self.pos += 1;
                    Ok(Expr::IsValid(self.unary()?))
                }
                "size" => {
                    self.pos += 1;
                    Ok(Expr::Size(self.unary()?))
                }
                "strip_zeros" => {
                    self.pos += 1;
                    Ok(Expr::StripZeros(self.unary()?))
                }
                "new" => {
                    self.pos += 1;
                    let bean = self.name("bean name")?;
                    self.expect_punct('{')?;
                    let mut fields = Vec::new();
                    if !self.eat_punct('}') {
                        loop {
                            let f = self.name("field name")?;
                            self.expect_punct(':')?;
                            let e = self.expr()?;
                            fields.push((f, e));
                            if self.eat_punct('}') {
                                break;
                            }
                            self.expect_punct(',')?;
                        }
                    }
                    Ok(Expr::MakeBean { bean, fields })
                }
                _ => Ok(Expr::Var(self.name("variable name")?)),
            },
            _ => Err(self.unexpected(&t, "expression")),
        }
    }

    fn accessor(&mut self) -> PResult<Accessor> {
        let t = self.next();
        match &t.tok {
            Tok::Str(s) => Ok(Accessor::Key(s.clone())),
            Tok::Number(n, false) if n.bytes().all(|b| b.is_ascii_digit()) => n
                .parse::<usize>()
                .map(Accessor::Index)
                .map_err(|_| self.error_at(&t, "index out of range")),
            _ => Err(self.unexpected(&t, "string key or non-negative integer index")),
        }
    }

    fn literal(&mut self) -> PResult<JsonValue> {
        let t = self.next();
        match &t.tok {
            Tok::Ident(s) if s == "null" => Ok(JsonValue::Null),
            Tok::Ident(s) if s == "true" => Ok(JsonValue::Bool(true)),
            Tok::Ident(s) if s == "false" => Ok(JsonValue::Bool(false)),
            Tok::Str(s) => Ok(JsonValue::Str(s.clone())),
            Tok::Number(lexeme, suffix) => number_value(lexeme, *suffix).ok_or_else(|| {
                ScriptError::new(
                    ScriptErrorKind::InvalidLiteral,
                    t.line,
                    t.column,
                    format!("bad number `{lexeme}`"),
                )
            }),
            Tok::Punct('[') => {
                let mut items = Vec::new();
                if !self.eat_punct(']') {
                    loop {
                        items.push(self.literal()?);
                        if self.eat_punct(']') {
                            break;
                        }
                        self.expect_punct(',')?;
                    }
                }
                Ok(JsonValue::Arr(items))
            }
            Tok::Punct('{') => {
                let mut obj = JsonObject::new();
                if !self.eat_punct('}') {
                    loop {
                        let kt = self.next();
                        let Tok::Str(key) = kt.tok.clone() else {
                            return Err(self.unexpected(&kt, "object key string"));
                        };
                        self.expect_punct(':')?;
                        let v = self.literal()?;
                        if obj.insert(key.clone(), v).is_some() {
                            return Err(ScriptError::new(
                                ScriptErrorKind::InvalidLiteral,
                                kt.line,
                                kt.column,
                                format!("duplicate key `{key}` in literal"),
                            ));
                        }
                        if self.eat_punct('}') {
                            break;
                        }
                        self.expect_punct(',')?;
                    }
                }
                Ok(JsonValue::Obj(obj))
            }
            _ => Err(self.unexpected(&t, "literal")),
        }
    }
}

/// Integer lexemes that fit in 64 bits are `Int`; everything else, or any
/// lexeme with the `d` suffix, is an exact `Dec`.
fn number_value(lexeme: &str, decimal_suffix: bool) -> Option<JsonValue> {
    let integral = !lexeme.contains(['.', 'e', 'E']);
    if integral && !decimal_suffix {
        if let Ok(i) = lexeme.parse::<i64>() {
            return Some(JsonValue::Int(i));
        }
    }
    lexeme.parse::<Decimal>().ok().map(JsonValue::Dec)
}
