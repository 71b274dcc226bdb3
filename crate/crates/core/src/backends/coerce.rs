//! Getter coercions and bean binding.
//!
//! Getter table (`actual → as_type`):
//!
//! | actual \ as | value | string | integer | decimal | boolean | object | array |
//! |---|---|---|---|---|---|---|---|
//! | Null    | Null | Null | Null | Null | Null | Null | Null |
//! | Bool    | ✓ | `"true"`/`"false"` | ✗ | ✗ | ✓ | ✗ | ✗ |
//! | Int     | ✓ | digits | ✓ | widened | ✗ | ✗ | ✗ |
//! | Dec     | ✓ | canonical | if integral and in range | ✓ | ✗ | ✗ | ✗ |
//! | Str     | ✓ | ✓ | if `-?[0-9]+` in range | if numeric | if `true`/`false` | ✗ | ✗ |
//! | Arr/Obj | ✓ | canonical JSON | ✗ | ✗ | ✗ | Obj only | Arr only |
//!
//! ✗ is `TypeCastError`. A missing key or index yields `Null` for `value` and
//! `NullAccess` for every typed getter; a present JSON null is returned as is.

use crate::tdsl::{Accessor, AsType, BeanDef, FieldType};
use crate::value::{Decimal, JsonObject, JsonValue};

use super::json_text::{write, WriteOptions};
use super::{BackendError, BackendResult, ErrorKind};

fn cast_err(v: &JsonValue, to: &str) -> BackendError {
    BackendError::new(
        ErrorKind::TypeCastError,
        format!("cannot convert {} to {to}", v.type_name()),
    )
}

fn integer_text(s: &str) -> Option<i64> {
    let digits = s.strip_prefix('-').unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

pub(crate) fn scalar_text(v: &JsonValue) -> Option<String> {
    match v {
        JsonValue::Str(s) => Some(s.clone()),
        JsonValue::Bool(b) => Some(b.to_string()),
        JsonValue::Int(i) => Some(i.to_string()),
        JsonValue::Dec(d) => Some(d.to_canonical_string()),
        _ => None,
    }
}

/// Converts a present value to `as_type` according to the getter table.
pub fn convert(v: &JsonValue, as_type: AsType) -> BackendResult<JsonValue> {
    if v.is_null() || as_type == AsType::Value {
        return Ok(v.clone());
    }
    match as_type {
        AsType::Value => unreachable!(),
        AsType::String => Ok(JsonValue::Str(match scalar_text(v) {
            Some(s) => s,
            None => write(v, WriteOptions::default()),
        })),
        AsType::Integer => match v {
            JsonValue::Int(_) => Ok(v.clone()),
            JsonValue::Dec(d) => d
                .to_i64_exact()
                .map(JsonValue::Int)
                .ok_or_else(|| cast_err(v, "integer")),
            JsonValue::Str(s) => integer_text(s)
                .map(JsonValue::Int)
                .ok_or_else(|| cast_err(v, "integer")),
            _ => Err(cast_err(v, "integer")),
        },
        AsType::Decimal => match v {
            JsonValue::Int(i) => Ok(JsonValue::Dec(Decimal::from_i64(*i))),
            JsonValue::Dec(_) => Ok(v.clone()),
            JsonValue::Str(s) => s
                .parse::<Decimal>()
                .map(JsonValue::Dec)
                .map_err(|_| cast_err(v, "decimal")),
            _ => Err(cast_err(v, "decimal")),
        },
        AsType::Boolean => match v {
            JsonValue::Bool(_) => Ok(v.clone()),
            JsonValue::Str(s) if s == "true" => Ok(JsonValue::Bool(true)),
            JsonValue::Str(s) if s == "false" => Ok(JsonValue::Bool(false)),
            _ => Err(cast_err(v, "boolean")),
        },
        AsType::Object => match v {
            JsonValue::Obj(_) => Ok(v.clone()),
            _ => Err(cast_err(v, "object")),
        },
        AsType::Array => match v {
            JsonValue::Arr(_) => Ok(v.clone()),
            _ => Err(cast_err(v, "array")),
        },
    }
}

pub(crate) fn get(
    target: &JsonValue,
    accessor: &Accessor,
    as_type: AsType,
) -> BackendResult<JsonValue> {
    let found = match (target, accessor) {
        (JsonValue::Null, _) => {
            return Err(BackendError::new(
                ErrorKind::NullAccess,
                "getter invoked on null",
            ));
        }
        (JsonValue::Obj(o), Accessor::Key(k)) => o.get(k),
        (JsonValue::Arr(a), Accessor::Index(i)) => a.get(*i),
        (other, Accessor::Key(_)) => return Err(cast_err(other, "object")),
        (other, Accessor::Index(_)) => return Err(cast_err(other, "array")),
    };
    match found {
        Some(v) => convert(v, as_type),
        None if as_type == AsType::Value => Ok(JsonValue::Null),
        None => Err(BackendError::new(
            ErrorKind::NullAccess,
            format!("no value at {accessor:?} for {} getter", as_type.as_str()),
        )),
    }
}

/// Which error a binding mismatch raises: parsing reports `ParseError`,
/// constructing a bean in code reports `TypeCastError`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BindMode {
    Parse,
    Construct,
}

#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct BindQuirks {
    /// Integral zero-scale decimals beyond 64 bits wrap into `i64` range.
    pub wrap_long_overflow: bool,
}

fn bind_err(mode: BindMode, field: &str, v: &JsonValue, ty: &FieldType) -> BackendError {
    let kind = match mode {
        BindMode::Parse => ErrorKind::ParseError,
        BindMode::Construct => ErrorKind::TypeCastError,
    };
    BackendError::new(
        kind,
        format!("field `{field}`: cannot bind {} to {ty:?}", v.type_name()),
    )
}

/// Binds an object to a bean, field by field. Missing fields become null;
/// unknown keys are ignored.
pub fn bind_bean(
    v: &JsonValue,
    bean: &BeanDef,
    beans: &[BeanDef],
    mode: BindMode,
) -> BackendResult<JsonValue> {
    bind_bean_with(v, bean, beans, mode, BindQuirks::default())
}

pub(crate) fn bind_bean_with(
    v: &JsonValue,
    bean: &BeanDef,
    beans: &[BeanDef],
    mode: BindMode,
    quirks: BindQuirks,
) -> BackendResult<JsonValue> {
    let JsonValue::Obj(src) = v else {
        return Err(bind_err(
            mode,
            &bean.name,
            v,
            &FieldType::Bean(bean.name.clone()),
        ));
    };
    let mut out = JsonObject::new();
    for f in &bean.fields {
        let value = src.get(&f.name).cloned().unwrap_or(JsonValue::Null);
        out.insert(
            f.name.clone(),
            bind_field(&value, &f.ty, &f.name, beans, mode, quirks)?,
        );
    }
    Ok(JsonValue::Obj(out))
}

pub(crate) fn bind_field(
    v: &JsonValue,
    ty: &FieldType,
    field: &str,
    beans: &[BeanDef],
    mode: BindMode,
    quirks: BindQuirks,
) -> BackendResult<JsonValue> {
    if v.is_null() {
        return Ok(JsonValue::Null);
    }
    let err = || bind_err(mode, field, v, ty);
    match ty {
        FieldType::String => match v {
            JsonValue::Arr(_) | JsonValue::Obj(_) => Err(err()),
            _ => Ok(JsonValue::Str(scalar_text(v).unwrap_or_default())),
        },
        FieldType::Integer => match v {
            JsonValue::Int(_) => Ok(v.clone()),
            JsonValue::Dec(d) => d.to_i64_exact().map(JsonValue::Int).ok_or_else(err),
            JsonValue::Str(s) => integer_text(s).map(JsonValue::Int).ok_or_else(err),
            _ => Err(err()),
        },
        FieldType::Decimal => match v {
            JsonValue::Int(i) => Ok(JsonValue::Dec(Decimal::from_i64(*i))),
            JsonValue::Dec(d) => {
                if quirks.wrap_long_overflow && d.scale() == 0 && d.to_i64_exact().is_none() {
                    Ok(JsonValue::Dec(Decimal::from_i64(d.wrapping_unscaled_i64())))
                } else {
                    Ok(v.clone())
                }
            }
            JsonValue::Str(s) => s.parse::<Decimal>().map(JsonValue::Dec).map_err(|_| err()),
            _ => Err(err()),
        },
        FieldType::Boolean => match v {
            JsonValue::Bool(_) => Ok(v.clone()),
            JsonValue::Str(s) if s == "true" => Ok(JsonValue::Bool(true)),
            JsonValue::Str(s) if s == "false" => Ok(JsonValue::Bool(false)),
            _ => Err(err()),
        },
        FieldType::Bean(name) => {
            let def = beans.iter().find(|b| &b.name == name).ok_or_else(err)?;
            match v {
                JsonValue::Obj(_) => bind_bean_with(v, def, beans, mode, quirks),
                _ => Err(err()),
            }
        }
        FieldType::List(inner) => match v {
            JsonValue::Arr(items) => items
                .iter()
                .map(|x| bind_field(x, inner, field, beans, mode, quirks))
                .collect::<BackendResult<Vec<_>>>()
                .map(JsonValue::Arr),
            _ => Err(err()),
        },
    }
}
