//! Arbitrary-precision decimal numbers with an explicit scale.
//!
//! A `Decimal` is `unscaled * 10^-scale`, where the unscaled magnitude is kept
//! as a plain ASCII digit string. Equality is structural: `1.0` and `1.00`
//! differ, exactly like scale-sensitive big-decimal equality in the JVM world.
//! [`Decimal::strip_trailing_zeros`] gives the normalized form.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid decimal literal `{0}`")]
pub struct DecimalParseError(pub String);

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Decimal {
    negative: bool,
    /// Magnitude digits, no leading zeros; `"0"` for zero.
    digits: String,
    scale: i32,
}

impl Decimal {
    pub fn zero() -> Self {
        Decimal {
            negative: false,
            digits: "0".to_string(),
            scale: 0,
        }
    }

    /// Builds from a sign, an unscaled digit string and a scale.
    pub fn from_parts(negative: bool, digits: &str, scale: i32) -> Result<Self, DecimalParseError> {
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(DecimalParseError(digits.to_string()));
        }
        let trimmed = digits.trim_start_matches('0');
        let digits = if trimmed.is_empty() { "0" } else { trimmed };
        Ok(Decimal {
            negative: negative && digits != "0",
            digits: digits.to_string(),
            scale,
        })
    }

    pub fn from_i64(v: i64) -> Self {
        let negative = v < 0;
        Decimal {
            negative,
            digits: v.unsigned_abs().to_string(),
            scale: 0,
        }
    }

    pub fn is_negative(&self) -> bool {
        self.negative
    }

    pub fn is_zero(&self) -> bool {
        self.digits == "0"
    }

    pub fn scale(&self) -> i32 {
        self.scale
    }

    /// Unscaled magnitude digits.
    pub fn unscaled_digits(&self) -> &str {
        &self.digits
    }

    /// Number of significant digits in the unscaled value.
    pub fn precision(&self) -> usize {
        self.digits.len()
    }

    pub fn strip_trailing_zeros(&self) -> Self {
        if self.is_zero() {
            return Decimal::zero();
        }
        let trimmed = self.digits.trim_end_matches('0');
        let removed = (self.digits.len() - trimmed.len()) as i32;
        Decimal {
            negative: self.negative,
            digits: trimmed.to_string(),
            scale: self.scale - removed,
        }
    }

    /// True when the value has no fractional part.
    pub fn is_integral(&self) -> bool {
        let s = self.strip_trailing_zeros();
        s.scale <= 0
    }

    /// Exact conversion to `i64`, `None` if fractional or out of range.
    pub fn to_i64_exact(&self) -> Option<i64> {
        let s = self.strip_trailing_zeros();
        if s.scale > 0 {
            return None;
        }
        let zeros = usize::try_from(-(s.scale as i64)).ok()?;
        if s.digits.len() + zeros > 20 {
            return None;
        }
        let mut text = String::with_capacity(s.digits.len() + zeros + 1);
        if s.negative {
            text.push('-');
        }
        text.push_str(&s.digits);
        if !s.is_zero() {
            text.extend(std::iter::repeat_n('0', zeros));
        }
        text.parse::<i64>().ok()
    }

    /// Reduces the unscaled value modulo 2^64 and reinterprets it as a signed
    /// 64-bit integer, ignoring the scale. Models a long-overflow decode.
    pub fn wrapping_unscaled_i64(&self) -> i64 {
        let mut acc: u64 = 0;
        for b in self.digits.bytes() {
            acc = acc.wrapping_mul(10).wrapping_add(u64::from(b - b'0'));
        }
        let v = acc as i64;
        if self.negative {
            v.wrapping_neg()
        } else {
            v
        }
    }

    /// Canonical text. Plain notation when `scale >= 0` and the adjusted
    /// exponent is at least -6, engineering-free scientific notation otherwise.
    pub fn to_canonical_string(&self) -> String {
        let mut out = String::new();
        if self.negative {
            out.push('-');
        }
        let ndigits = self.digits.len() as i64;
        let scale = self.scale as i64;
        let adjusted = -scale + (ndigits - 1);
        if scale >= 0 && adjusted >= -6 {
            if scale == 0 {
                out.push_str(&self.digits);
            } else if ndigits > scale {
                let split = (ndigits - scale) as usize;
                out.push_str(&self.digits[..split]);
                out.push('.');
                out.push_str(&self.digits[split..]);
            } else {
                out.push_str("0.");
                out.extend(std::iter::repeat_n('0', (scale - ndigits) as usize));
                out.push_str(&self.digits);
            }
        } else {
            out.push_str(&self.digits[..1]);
            if ndigits > 1 {
                out.push('.');
                out.push_str(&self.digits[1..]);
            }
            out.push('E');
            if adjusted >= 0 {
                out.push('+');
            }
            out.push_str(&adjusted.to_string());
        }
        out
    }

    /// Numeric comparison, ignoring scale.
    pub fn cmp_value(&self, other: &Decimal) -> Ordering {
        match (self.negative, other.negative) {
            (false, true) => return Ordering::Greater,
            (true, false) => return Ordering::Less,
            _ => {}
        }
        let mag = cmp_magnitude(self, other);
        if self.negative {
            mag.reverse()
        } else {
            mag
        }
    }
}

fn cmp_magnitude(a: &Decimal, b: &Decimal) -> Ordering {
    match (a.is_zero(), b.is_zero()) {
        (true, true) => return Ordering::Equal,
        (true, false) => return Ordering::Less,
        (false, true) => return Ordering::Greater,
        _ => {}
    }
    let a = a.strip_trailing_zeros();
    let b = b.strip_trailing_zeros();
    let a_adj = a.digits.len() as i64 - a.scale as i64;
    let b_adj = b.digits.len() as i64 - b.scale as i64;
    if a_adj != b_adj {
        return a_adj.cmp(&b_adj);
    }
    let len = a.digits.len().max(b.digits.len());
    let pa = format!("{:0<len$}", a.digits);
    let pb = format!("{:0<len$}", b.digits);
    pa.cmp(&pb)
}

impl FromStr for Decimal {
    type Err = DecimalParseError;

    /// Accepts `-?digits(.digits)?([eE][+-]?digits)?`, with a leading `+` also
    /// tolerated. No leading-zero restriction; JSON strictness lives in the
    /// JSON lexer.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || DecimalParseError(s.to_string());
        let bytes = s.as_bytes();
        let mut i = 0;
        let mut negative = false;
        if i < bytes.len() && (bytes[i] == b'-' || bytes[i] == b'+') {
            negative = bytes[i] == b'-';
            i += 1;
        }
        let int_start = i;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        let int_part = &s[int_start..i];
        let mut frac_part = "";
        if i < bytes.len() && bytes[i] == b'.' {
            i += 1;
            let fs = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            frac_part = &s[fs..i];
            if frac_part.is_empty() {
                return Err(err());
            }
        }
        if int_part.is_empty() {
            return Err(err());
        }
        let mut exponent: i64 = 0;
        if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
            i += 1;
            let es = i;
            if i < bytes.len() && (bytes[i] == b'-' || bytes[i] == b'+') {
                i += 1;
            }
            let ds = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if ds == i {
                return Err(err());
            }
            exponent = s[es..i].parse::<i64>().map_err(|_| err())?;
        }
        if i != bytes.len() {
            return Err(err());
        }
        let scale = frac_part.len() as i64 - exponent;
        let scale = i32::try_from(scale).map_err(|_| err())?;
        let mut digits = String::with_capacity(int_part.len() + frac_part.len());
        digits.push_str(int_part);
        digits.push_str(frac_part);
        Decimal::from_parts(negative, &digits, scale)
    }
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_canonical_string())
    }
}

impl Serialize for Decimal {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_canonical_string())
    }
}

impl<'de> Deserialize<'de> for Decimal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
