use crate::features::{ReaderFeature, WriterFeature};
use crate::tdsl::BeanDef;
use crate::value::JsonValue;

use super::coerce::{self, BindMode, BindQuirks};
use super::json_text::{read, write, ReadOptions, WriteOptions};
use super::jsonpath::JsonPath;
use super::{BackendError, BackendResult, ErrorKind, PathTarget};

/// Behaviour switches shared by the reference engine and its planted variants.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub(crate) struct Quirks {
    pub path_index_on_scalar: bool,
    pub unquoted_bools: bool,
    pub wrap_long_overflow: bool,
}

#[derive(Debug, Clone, Default)]
pub(crate) struct Engine {
    pub quirks: Quirks,
}

fn read_options(features: &[ReaderFeature]) -> ReadOptions {
    let mut o = ReadOptions::default();
    for f in features {
        match f {
            ReaderFeature::TrimString => o.trim_strings = true,
            ReaderFeature::UseNativeObject => {}
            ReaderFeature::UseBigDecimalForFloats => o.all_numbers_decimal = true,
            ReaderFeature::AllowSingleQuotes => o.allow_single_quotes = true,
        }
    }
    o
}

fn write_options(features: &[WriterFeature]) -> WriteOptions {
    let mut o = WriteOptions::default();
    for f in features {
        match f {
            WriterFeature::WriteNonStringValueAsString => o.non_string_as_string = true,
            WriterFeature::WriteBooleanAsNumber => o.bool_as_number = true,
            WriterFeature::WriteNulls => o.write_nulls = true,
            WriterFeature::PrettyFormat => o.pretty = true,
        }
    }
    o
}

fn parse_err(msg: String) -> BackendError {
    BackendError::new(ErrorKind::ParseError, msg)
}

impl Engine {
    pub fn validate(&self, text: &str) -> bool {
        read(text, ReadOptions::default()).is_ok()
    }

    pub fn parse(&self, text: &str, features: &[ReaderFeature]) -> BackendResult<JsonValue> {
        read(text, read_options(features)).map_err(parse_err)
    }

    pub fn parse_typed(
        &self,
        text: &str,
        bean: &BeanDef,
        beans: &[BeanDef],
        features: &[ReaderFeature],
    ) -> BackendResult<JsonValue> {
        let v = self.parse(text, features)?;
        let quirks = BindQuirks {
            wrap_long_overflow: self.quirks.wrap_long_overflow,
        };
        coerce::bind_bean_with(&v, bean, beans, BindMode::Parse, quirks)
    }

    pub fn serialize(
        &self,
        value: &JsonValue,
        features: &[WriterFeature],
    ) -> BackendResult<String> {
        let mut o = write_options(features);
        o.unquoted_bools = self.quirks.unquoted_bools;
        Ok(write(value, o))
    }

    pub fn path_eval(&self, target: PathTarget<'_>, path: &str) -> BackendResult<JsonValue> {
        let p = JsonPath::parse(path)?;
        match target {
            PathTarget::Text(t) => {
                let v = self.parse(t, &[])?;
                Ok(p.eval(&v, false))
            }
            PathTarget::Value(v) => Ok(p.eval(v, self.quirks.path_index_on_scalar)),
        }
    }
}

/// Canonical compact JSON with no features: the text used in outcome reprs.
pub fn canonical_json(v: &JsonValue) -> String {
    write(v, WriteOptions::default())
}

/// The in-repo engine taken as correct.
#[derive(Debug, Clone)]
pub struct ReferenceBackend {
    name: String,
    engine: Engine,
}

impl ReferenceBackend {
    pub fn new(name: impl Into<String>) -> Self {
        ReferenceBackend {
            name: name.into(),
            engine: Engine::default(),
        }
    }
}

macro_rules! delegate_backend {
    ($ty:ty) => {
        impl $crate::backends::Backend for $ty {
            fn name(&self) -> &str {
                &self.name
            }
            fn validate(&self, text: &str) -> bool {
                self.engine.validate(text)
            }
            fn parse(
                &self,
                text: &str,
                features: &[$crate::features::ReaderFeature],
            ) -> $crate::backends::BackendResult<$crate::value::JsonValue> {
                self.engine.parse(text, features)
            }
            fn parse_typed(
                &self,
                text: &str,
                bean: &$crate::tdsl::BeanDef,
                beans: &[$crate::tdsl::BeanDef],
                features: &[$crate::features::ReaderFeature],
            ) -> $crate::backends::BackendResult<$crate::value::JsonValue> {
                self.engine.parse_typed(text, bean, beans, features)
            }
            fn serialize(
                &self,
                value: &$crate::value::JsonValue,
                features: &[$crate::features::WriterFeature],
            ) -> $crate::backends::BackendResult<String> {
                self.engine.serialize(value, features)
            }
            fn get(
                &self,
                target: &$crate::value::JsonValue,
                accessor: &$crate::tdsl::Accessor,
                as_type: $crate::tdsl::AsType,
            ) -> $crate::backends::BackendResult<$crate::value::JsonValue> {
                $crate::backends::coerce::get(target, accessor, as_type)
            }
            fn path_eval(
                &self,
                target: $crate::backends::PathTarget<'_>,
                path: &str,
            ) -> $crate::backends::BackendResult<$crate::value::JsonValue> {
                self.engine.path_eval(target, path)
            }
        }
    };
}
pub(crate) use delegate_backend;

delegate_backend!(ReferenceBackend);

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backends::Backend;
    use crate::value::JsonObject;

    fn r() -> ReferenceBackend {
        ReferenceBackend::new("reference")
    }

    #[test]
    fn quotes_non_strings_on_request() {
        let v = JsonValue::Obj(
            [("b", JsonValue::Bool(true))]
                .into_iter()
                .collect::<JsonObject>(),
        );
        let out = r()
            .serialize(&v, &[WriterFeature::WriteNonStringValueAsString])
            .unwrap();
        assert_eq!(out, r#"{"b":"true"}"#);
    }

    #[test]
    fn trim_string_trims_inside_the_literal() {
        let v = r()
            .parse(r#" " x " "#, &[ReaderFeature::TrimString])
            .unwrap();
        assert_eq!(v, JsonValue::Str("x".into()));
        let v = r().parse(r#" " x " "#, &[]).unwrap();
        assert_eq!(v, JsonValue::Str(" x ".into()));
    }

    #[test]
    fn path_on_value_and_text_agree() {
        let text = r#"{"data":[1]}"#;
        let v = r().parse(text, &[]).unwrap();
        for p in ["$.data[0]", "$.data[0][0]", "$.data", "$.x"] {
            assert_eq!(
                r().path_eval(PathTarget::Value(&v), p).unwrap(),
                r().path_eval(PathTarget::Text(text), p).unwrap(),
                "{p}"
            );
        }
        assert_eq!(
            r().path_eval(PathTarget::Value(&v), "$.data[0]").unwrap(),
            JsonValue::Int(1)
        );
    }

    #[test]
    fn malformed_input_is_parse_error() {
        assert_eq!(
            r().parse("not json", &[]).unwrap_err().kind,
            ErrorKind::ParseError
        );
        assert!(!r().validate("{"));
        assert!(r().validate("[]"));
    }
}
