//! The reference engine with known defects switched on, one per [`BugId`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::reference::{delegate_backend, Engine, Quirks};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BugId {
    /// A nested index applied to a scalar returns the scalar, but only when
    /// the path target is an already-parsed value. Text targets return null.
    #[serde(rename = "L1_PATH_STRING_VS_OBJECT")]
    L1PathStringVsObject,
    /// `WriteNonStringValueAsString` quotes numbers but leaves booleans bare.
    #[serde(rename = "L2_BOOL_NOT_QUOTED")]
    L2BoolNotQuoted,
    /// Typed parsing of an integral literal beyond 64 bits into a decimal
    /// field wraps modulo 2^64.
    #[serde(rename = "L3_DECIMAL_OVERFLOW")]
    L3DecimalOverflow,
}

impl BugId {
    pub const ALL: [BugId; 3] = [
        BugId::L1PathStringVsObject,
        BugId::L2BoolNotQuoted,
        BugId::L3DecimalOverflow,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BugId::L1PathStringVsObject => "L1_PATH_STRING_VS_OBJECT",
            BugId::L2BoolNotQuoted => "L2_BOOL_NOT_QUOTED",
            BugId::L3DecimalOverflow => "L3_DECIMAL_OVERFLOW",
        }
    }

    pub fn short(self) -> &'static str {
        &self.as_str()[..2]
    }
}

impl fmt::Display for BugId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown bug id `{0}` (expected one of L1, L2, L3)")]
pub struct UnknownBugId(pub String);

impl FromStr for BugId {
    type Err = UnknownBugId;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BugId::ALL
            .into_iter()
            .find(|b| b.as_str() == s || b.short() == s)
            .ok_or_else(|| UnknownBugId(s.to_string()))
    }
}

pub(crate) fn default_name(bugs: &[BugId]) -> String {
    let mut ids: Vec<_> = bugs.to_vec();
    ids.sort();
    ids.dedup();
    let parts: Vec<_> = ids.iter().map(|b| b.short()).collect();
    format!("planted:{}", parts.join("+"))
}

#[derive(Debug, Clone)]
pub struct PlantedBackend {
    name: String,
    bugs: Vec<BugId>,
    engine: Engine,
}

impl PlantedBackend {
    pub fn new(name: impl Into<String>, bugs: &[BugId]) -> Self {
        let mut bugs = bugs.to_vec();
        bugs.sort();
        bugs.dedup();
        let quirks = Quirks {
            path_index_on_scalar: bugs.contains(&BugId::L1PathStringVsObject),
            unquoted_bools: bugs.contains(&BugId::L2BoolNotQuoted),
            wrap_long_overflow: bugs.contains(&BugId::L3DecimalOverflow),
        };
        PlantedBackend {
            name: name.into(),
            bugs,
            engine: Engine { quirks },
        }
    }

    pub fn bugs(&self) -> &[BugId] {
        &self.bugs
    }
}

delegate_backend!(PlantedBackend);
