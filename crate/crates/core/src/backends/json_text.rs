//! RFC 8259 reader and writer used by the in-repo engines.

use crate::value::{write_json_string, Decimal, JsonObject, JsonValue};

const MAX_DEPTH: usize = 256;

#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct ReadOptions {
    pub allow_single_quotes: bool,
    pub trim_strings: bool,
    pub all_numbers_decimal: bool,
}

#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct WriteOptions {
    pub non_string_as_string: bool,
    pub bool_as_number: bool,
    pub write_nulls: bool,
    pub pretty: bool,
    /// Booleans stay unquoted even when non-strings are quoted.
    pub unquoted_bools: bool,
}

pub(crate) fn read(text: &str, opts: ReadOptions) -> Result<JsonValue, String> {
    let mut r = Reader {
        s: text.as_bytes(),
        src: text,
        pos: 0,
        opts,
    };
    r.ws();
    let v = r.value(0)?;
    r.ws();
    if r.pos != r.s.len() {
        return Err(r.fail("trailing characters after JSON value"));
    }
    Ok(v)
}

struct Reader<'a> {
    s: &'a [u8],
    src: &'a str,
    pos: usize,
    opts: ReadOptions,
}

impl Reader<'_> {
    fn fail(&self, msg: &str) -> String {
        format!("{msg} at offset {}", self.pos)
    }

    fn ws(&mut self) {
        while let Some(b' ' | b'\t' | b'\n' | b'\r') = self.s.get(self.pos) {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.s.get(self.pos).copied()
    }

    fn literal(&mut self, word: &str, v: JsonValue) -> Result<JsonValue, String> {
        if self.s[self.pos..].starts_with(word.as_bytes()) {
            self.pos += word.len();
            Ok(v)
        } else {
            Err(self.fail("invalid literal"))
        }
    }

    fn value(&mut self, depth: usize) -> Result<JsonValue, String> {
        if depth > MAX_DEPTH {
            return Err(self.fail("nesting too deep"));
        }
        match self.peek() {
            None => Err(self.fail("unexpected end of input")),
            Some(b'{') => self.object(depth),
            Some(b'[') => self.array(depth),
            Some(b'"') => Ok(JsonValue::Str(self.string_value(b'"')?)),
            Some(b'\'') if self.opts.allow_single_quotes => {
                Ok(JsonValue::Str(self.string_value(b'\'')?))
            }
            Some(b't') => self.literal("true", JsonValue::Bool(true)),
            Some(b'f') => self.literal("false", JsonValue::Bool(false)),
            Some(b'n') => self.literal("null", JsonValue::Null),
            Some(b'-' | b'0'..=b'9') => self.number(),
            Some(_) => Err(self.fail("unexpected character")),
        }
    }

    fn string_value(&mut self, quote: u8) -> Result<String, String> {
        let s = self.string(quote)?;
        Ok(if self.opts.trim_strings {
            s.trim().to_string()
        } else {
            s
        })
    }

    fn object(&mut self, depth: usize) -> Result<JsonValue, String> {
        self.pos += 1;
        let mut obj = JsonObject::new();
        self.ws();
        if self.peek() == Some(b'}') {
            self.pos += 1;
            return Ok(JsonValue::Obj(obj));
        }
        loop {
            self.ws();
            let key = match self.peek() {
                Some(b'"') => self.string(b'"')?,
                Some(b'\'') if self.opts.allow_single_quotes => self.string(b'\'')?,
                _ => return Err(self.fail("expected object key")),
            };
            self.ws();
            if self.peek() != Some(b':') {
                return Err(self.fail("expected `:`"));
            }
            self.pos += 1;
            self.ws();
            let v = self.value(depth + 1)?;
            obj.insert(key, v);
            self.ws();
            match self.peek() {
                Some(b',') => self.pos += 1,
                Some(b'}') => {
                    self.pos += 1;
                    return Ok(JsonValue::Obj(obj));
                }
                _ => return Err(self.fail("expected `,` or `}`")),
            }
        }
    }

    fn array(&mut self, depth: usize) -> Result<JsonValue, String> {
        self.pos += 1;
        let mut items = Vec::new();
        self.ws();
        if self.peek() == Some(b']') {
            self.pos += 1;
            return Ok(JsonValue::Arr(items));
        }
        loop {
            self.ws();
            items.push(self.value(depth + 1)?);
            self.ws();
            match self.peek() {
                Some(b',') => self.pos += 1,
                Some(b']') => {
                    self.pos += 1;
                    return Ok(JsonValue::Arr(items));
                }
                _ => return Err(self.fail("expected `,` or `]`")),
            }
        }
    }

    fn hex4(&mut self) -> Result<u32, String> {
        let h = self
            .src
            .get(self.pos..self.pos + 4)
            .ok_or_else(|| self.fail("truncated \\u escape"))?;
        let v = u32::from_str_radix(h, 16).map_err(|_| self.fail("invalid \\u escape"))?;
        if !h.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(self.fail("invalid \\u escape"));
        }
        self.pos += 4;
        Ok(v)
    }

    fn string(&mut self, quote: u8) -> Result<String, String> {
        self.pos += 1;
        let mut out = String::new();
        loop {
            let start = self.pos;
            while let Some(&b) = self.s.get(self.pos) {
                if b == quote || b == b'\\' || b < 0x20 {
                    break;
                }
                self.pos += 1;
            }
            out.push_str(&self.src[start..self.pos]);
            match self.peek() {
                None => return Err(self.fail("unterminated string")),
                Some(b) if b == quote => {
                    self.pos += 1;
                    return Ok(out);
                }
                Some(b'\\') => {
                    self.pos += 1;
                    let e = self
                        .peek()
                        .ok_or_else(|| self.fail("unterminated escape"))?;
                    self.pos += 1;
                    match e {
                        b'"' => out.push('"'),
                        b'\'' if self.opts.allow_single_quotes => out.push('\''),
                        b'\\' => out.push('\\'),
                        b'/' => out.push('/'),
                        b'b' => out.push('\u{8}'),
                        b'f' => out.push('\u{c}'),
                        b'n' => out.push('\n'),
                        b'r' => out.push('\r'),
                        b't' => out.push('\t'),
                        b'u' => {
                            let hi = self.hex4()?;
                            let cp = if (0xD800..0xDC00).contains(&hi) {
                                if !self.s[self.pos..].starts_with(b"\\u") {
                                    return Err(self.fail("unpaired surrogate"));
                                }
                                self.pos += 2;
                                let lo = self.hex4()?;
                                if !(0xDC00..0xE000).contains(&lo) {
                                    return Err(self.fail("unpaired surrogate"));
                                }
                                0x10000 + ((hi - 0xD800) << 10) + (lo - 0xDC00)
                            } else {
                                hi
                            };
                            out.push(
                                char::from_u32(cp)
                                    .ok_or_else(|| self.fail("unpaired surrogate"))?,
                            );
                        }
                        _ => return Err(self.fail("invalid escape")),
                    }
                }
                Some(_) => return Err(self.fail("control character in string")),
            }
        }
    }

    fn number(&mut self) -> Result<JsonValue, String> {
        let start = self.pos;
        if self.peek() == Some(b'-') {
            self.pos += 1;
        }
        match self.peek() {
            Some(b'0') => self.pos += 1,
            Some(b'1'..=b'9') => {
                while let Some(b'0'..=b'9') = self.peek() {
                    self.pos += 1;
                }
            }
            _ => return Err(self.fail("invalid number")),
        }
        let mut integral = true;
        if self.peek() == Some(b'.') {
            integral = false;
            self.pos += 1;
            let ds = self.pos;
            while let Some(b'0'..=b'9') = self.peek() {
                self.pos += 1;
            }
            if ds == self.pos {
                return Err(self.fail("invalid number"));
            }
        }
        if let Some(b'e' | b'E') = self.peek() {
            integral = false;
            self.pos += 1;
            if let Some(b'+' | b'-') = self.peek() {
                self.pos += 1;
            }
            let ds = self.pos;
            while let Some(b'0'..=b'9') = self.peek() {
                self.pos += 1;
            }
            if ds == self.pos {
                return Err(self.fail("invalid number"));
            }
        }
        let lexeme = &self.src[start..self.pos];
        if integral && !self.opts.all_numbers_decimal {
            if let Ok(i) = lexeme.parse::<i64>() {
                return Ok(JsonValue::Int(i));
            }
        }
        lexeme
            .parse::<Decimal>()
            .map(JsonValue::Dec)
            .map_err(|_| self.fail("number out of range"))
    }
}

pub(crate) fn write(v: &JsonValue, opts: WriteOptions) -> String {
    let mut out = String::new();
    write_value(&mut out, v, opts, 0);
    out
}

fn write_scalar_text(out: &mut String, text: &str, quote: bool) {
    if quote {
        out.push('"');
        out.push_str(text);
        out.push('"');
    } else {
        out.push_str(text);
    }
}

fn newline(out: &mut String, opts: WriteOptions, depth: usize) {
    if opts.pretty {
        out.push('\n');
        for _ in 0..depth {
            out.push_str("  ");
        }
    }
}

fn write_value(out: &mut String, v: &JsonValue, opts: WriteOptions, depth: usize) {
    match v {
        JsonValue::Null => out.push_str("null"),
        JsonValue::Bool(b) => {
            let text = match (opts.bool_as_number, *b) {
                (true, true) => "1",
                (true, false) => "0",
                (false, true) => "true",
                (false, false) => "false",
            };
            write_scalar_text(out, text, opts.non_string_as_string && !opts.unquoted_bools);
        }
        JsonValue::Int(i) => write_scalar_text(out, &i.to_string(), opts.non_string_as_string),
        JsonValue::Dec(d) => {
            write_scalar_text(out, &d.to_canonical_string(), opts.non_string_as_string)
        }
        JsonValue::Str(s) => write_json_string(out, s),
        JsonValue::Arr(items) => {
            out.push('[');
            for (i, x) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                newline(out, opts, depth + 1);
                write_value(out, x, opts, depth + 1);
            }
            if !items.is_empty() {
                newline(out, opts, depth);
            }
            out.push(']');
        }
        JsonValue::Obj(o) => {
            out.push('{');
            let mut first = true;
            for (k, x) in o.iter() {
                if x.is_null() && !opts.write_nulls {
                    continue;
                }
                if !first {
                    out.push(',');
                }
                first = false;
                newline(out, opts, depth + 1);
                write_json_string(out, k);
                out.push(':');
                if opts.pretty {
                    out.push(' ');
                }
                write_value(out, x, opts, depth + 1);
            }
            if !first {
                newline(out, opts, depth);
            }
            out.push('}');
        }
    }
}
