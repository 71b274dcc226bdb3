//! Reader and writer feature flags.
//!
//! Both sets are closed. Semantics on the reference engine:
//!
//! | feature | effect |
//! |---|---|
//! | `TrimString` | string values (not keys) lose leading/trailing whitespace at parse |
//! | `UseNativeObject` | numbers decode eagerly to `Int`/`Dec`; the reference engine always does this, so the flag is accepted without further effect |
//! | `UseBigDecimalForFloats` | every number, integral or not, decodes to `Dec` |
//! | `AllowSingleQuotes` | `'…'` is accepted for keys and string values |
//! | `WriteNonStringValueAsString` | every non-string scalar except null is written quoted |
//! | `WriteBooleanAsNumber` | `true` → `1`, `false` → `0` (quoted if combined with the above) |
//! | `WriteNulls` | object members whose value is null are written; omitted otherwise |
//! | `PrettyFormat` | 2-space indentation, one member per line |

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown feature `{0}`")]
pub struct UnknownFeature(pub String);

macro_rules! feature_enum {
    ($name:ident { $($variant:ident),+ $(,)? }) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => stringify!($variant)),+
                }
            }
        }

        impl FromStr for $name {
            type Err = UnknownFeature;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $(stringify!($variant) => Ok($name::$variant),)+
                    other => Err(UnknownFeature(other.to_string())),
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }
    };
}

feature_enum!(ReaderFeature {
    TrimString,
    UseNativeObject,
    UseBigDecimalForFloats,
    AllowSingleQuotes,
});

feature_enum!(WriterFeature {
    WriteNonStringValueAsString,
    WriteBooleanAsNumber,
    WriteNulls,
    PrettyFormat,
});
