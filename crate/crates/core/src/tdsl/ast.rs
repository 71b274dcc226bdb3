use serde::{Deserialize, Serialize};

use crate::features::{ReaderFeature, WriterFeature};
use crate::value::JsonValue;

/// A complete test: bean schemas plus a straight-line statement list.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TestScript {
    pub beans: Vec<BeanDef>,
    pub statements: Vec<Statement>,
}

impl TestScript {
    pub fn bean(&self, name: &str) -> Option<&BeanDef> {
        self.beans.iter().find(|b| b.name == name)
    }

    pub fn assertion_count(&self) -> usize {
        self.statements.iter().filter(|s| s.is_assertion()).count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BeanDef {
    pub name: String,
    pub fields: Vec<FieldDef>,
}

impl BeanDef {
    pub fn field(&self, name: &str) -> Option<&FieldDef> {
        self.fields.iter().find(|f| f.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldDef {
    pub name: String,
    pub ty: FieldType,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FieldType {
    String,
    Integer,
    Decimal,
    Boolean,
    Bean(String),
    List(Box<FieldType>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Statement {
    Let { var: String, expr: Expr },
    AssertEq(Expr, Expr),
    AssertNull(Expr),
    AssertNotNull(Expr),
    AssertThrows(Expr),
}

impl Statement {
    pub fn is_assertion(&self) -> bool {
        !matches!(self, Statement::Let { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Accessor {
    Key(String),
    Index(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AsType {
    Value,
    String,
    Integer,
    Decimal,
    Boolean,
    Object,
    Array,
}

impl AsType {
    pub const ALL: [AsType; 7] = [
        AsType::Value,
        AsType::String,
        AsType::Integer,
        AsType::Decimal,
        AsType::Boolean,
        AsType::Object,
        AsType::Array,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AsType::Value => "value",
            AsType::String => "string",
            AsType::Integer => "integer",
            AsType::Decimal => "decimal",
            AsType::Boolean => "boolean",
            AsType::Object => "object",
            AsType::Array => "array",
        }
    }

    pub fn from_name(s: &str) -> Option<AsType> {
        AsType::ALL.into_iter().find(|t| t.as_str() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    /// A JSON literal. Never a bare string; those are [`Expr::Str`].
    Lit(JsonValue),
    Str(String),
    Var(String),
    ParseValue {
        text: Box<Expr>,
        features: Vec<ReaderFeature>,
    },
    ParseTyped {
        text: Box<Expr>,
        bean: String,
        features: Vec<ReaderFeature>,
    },
    Serialize {
        value: Box<Expr>,
        features: Vec<WriterFeature>,
    },
    Get {
        target: Box<Expr>,
        accessor: Accessor,
        as_type: AsType,
    },
    PathEval {
        target: Box<Expr>,
        path: String,
    },
    IsValid(Box<Expr>),
    Size(Box<Expr>),
    MakeBean {
        bean: String,
        fields: Vec<(String, Expr)>,
    },
    StripZeros(Box<Expr>),
}

impl Expr {
    /// Direct sub-expressions, in evaluation order.
    pub fn children(&self) -> Vec<&Expr> {
        match self {
            Expr::Lit(_) | Expr::Str(_) | Expr::Var(_) => Vec::new(),
            Expr::ParseValue { text, .. } | Expr::ParseTyped { text, .. } => vec![text],
            Expr::Serialize { value, .. } => vec![value],
            Expr::Get { target, .. } | Expr::PathEval { target, .. } => vec![target],
            Expr::IsValid(e) | Expr::Size(e) | Expr::StripZeros(e) => vec![e],
            Expr::MakeBean { fields, .. } => fields.iter().map(|(_, e)| e).collect(),
        }
    }
}

/// Identifiers that cannot name variables, beans or fields.
pub const RESERVED: &[&str] = &[
    "let",
    "assert_eq",
    "assert_null",
    "assert_not_null",
    "assert_throws",
    "true",
    "false",
    "null",
    "new",
    "parse",
    "parse_typed",
    "serialize",
    "get",
    "path",
    "is_valid",
    "size",
    "strip_zeros",
    "string",
    "integer",
    "decimal",
    "boolean",
    "list",
];

pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_') && !RESERVED.contains(&s)
}
