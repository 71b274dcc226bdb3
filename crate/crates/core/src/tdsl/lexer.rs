use super::error::{ScriptError, ScriptErrorKind};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    /// Numeric lexeme plus whether it carried the `d` (decimal) suffix.
    Number(String, bool),
    Str(String),
    Punct(char),
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Number(s, _) => format!("number `{s}`"),
            Tok::Str(_) => "string literal".to_string(),
            Tok::Punct(c) => format!("`{c}`"),
            Tok::Eof => "end of input".to_string(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub column: usize,
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, ScriptError> {
    Lexer {
        chars: src.chars().collect(),
        pos: 0,
        line: 1,
        column: 1,
    }
    .run()
}

struct Lexer {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    column: usize,
}

impl Lexer {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, off: usize) -> Option<char> {
        self.chars.get(self.pos + off).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.get(self.pos).copied()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn err(&self, line: usize, column: usize, msg: impl Into<String>) -> ScriptError {
        ScriptError::new(ScriptErrorKind::Syntax, line, column, msg)
    }

    fn run(mut self) -> Result<Vec<Token>, ScriptError> {
        let mut out = Vec::new();
        loop {
            self.skip_trivia();
            let (line, column) = (self.line, self.column);
            let Some(c) = self.peek() else {
                out.push(Token {
                    tok: Tok::Eof,
                    line,
                    column,
                });
                return Ok(out);
            };
            let tok = if c.is_ascii_alphabetic() || c == '_' {
                let mut s = String::new();
                while let Some(c) = self.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        s.push(c);
                        self.bump();
                    } else {
                        break;
                    }
                }
                Tok::Ident(s)
            } else if c.is_ascii_digit() || c == '-' {
                self.number(line, column)?
            } else if c == '"' {
                Tok::Str(self.string(line, column)?)
            } else if "()[]{},;:=<>".contains(c) {
                self.bump();
                Tok::Punct(c)
            } else {
                return Err(self.err(line, column, format!("unexpected character `{c}`")));
            };
            out.push(Token { tok, line, column });
        }
    }

    fn skip_trivia(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('/') if self.peek_at(1) == Some('/') => {
                    while let Some(c) = self.peek() {
                        if c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                _ => return,
            }
        }
    }

    fn digits(&mut self, s: &mut String) -> usize {
        let mut n = 0;
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() {
                s.push(c);
                self.bump();
                n += 1;
            } else {
                break;
            }
        }
        n
    }

    fn number(&mut self, line: usize, column: usize) -> Result<Tok, ScriptError> {
        let mut s = String::new();
        if self.peek() == Some('-') {
            s.push('-');
            self.bump();
        }
        if self.digits(&mut s) == 0 {
            return Err(self.err(line, column, "expected digits"));
        }
        if self.peek() == Some('.') {
            s.push('.');
            self.bump();
            if self.digits(&mut s) == 0 {
                return Err(self.err(self.line, self.column, "expected digits after `.`"));
            }
        }
        if matches!(self.peek(), Some('e' | 'E')) {
            s.push('e');
            self.bump();
            if let Some(c @ ('+' | '-')) = self.peek() {
                s.push(c);
                self.bump();
            }
            if self.digits(&mut s) == 0 {
                return Err(self.err(self.line, self.column, "expected exponent digits"));
            }
        }
        let mut suffix = false;
        if self.peek() == Some('d') {
            suffix = true;
            self.bump();
        }
        if let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == '_' {
                return Err(self.err(
                    self.line,
                    self.column,
                    format!("unexpected `{c}` after number"),
                ));
            }
        }
        Ok(Tok::Number(s, suffix))
    }

    fn hex4(&mut self) -> Result<u32, ScriptError> {
        let mut v = 0u32;
        for _ in 0..4 {
            let (line, column) = (self.line, self.column);
            let c = self
                .bump()
                .ok_or_else(|| self.err(line, column, "truncated \\u escape"))?;
            let d = c
                .to_digit(16)
                .ok_or_else(|| self.err(line, column, "invalid hex digit in \\u escape"))?;
            v = v * 16 + d;
        }
        Ok(v)
    }

    fn string(&mut self, line: usize, column: usize) -> Result<String, ScriptError> {
        self.bump();
        let mut s = String::new();
        loop {
            let (l, c0) = (self.line, self.column);
            let Some(c) = self.bump() else {
                return Err(self.err(line, column, "unterminated string literal"));
            };
            match c {
                '"' => return Ok(s),
                '\\' => {
                    let e = self
                        .bump()
                        .ok_or_else(|| self.err(l, c0, "unterminated escape"))?;
                    match e {
                        '"' => s.push('"'),
                        '\\' => s.push('\\'),
                        '/' => s.push('/'),
                        'b' => s.push('\u{8}'),
                        'f' => s.push('\u{c}'),
                        'n' => s.push('\n'),
                        'r' => s.push('\r'),
                        't' => s.push('\t'),
                        'u' => {
                            let hi = self.hex4()?;
                            let cp = if (0xD800..0xDC00).contains(&hi) {
                                if self.bump() != Some('\\') || self.bump() != Some('u') {
                                    return Err(self.err(l, c0, "unpaired surrogate escape"));
                                }
                                let lo = self.hex4()?;
                                if !(0xDC00..0xE000).contains(&lo) {
                                    return Err(self.err(l, c0, "unpaired surrogate escape"));
                                }
                                0x10000 + ((hi - 0xD800) << 10) + (lo - 0xDC00)
                            } else {
                                hi
                            };
                            let ch = char::from_u32(cp)
                                .ok_or_else(|| self.err(l, c0, "invalid unicode escape"))?;
                            s.push(ch);
                        }
                        other => {
                            return Err(self.err(l, c0, format!("invalid escape `\\{other}`")))
                        }
                    }
                }
                c if (c as u32) < 0x20 => {
                    return Err(self.err(l, c0, "control character in string literal"));
                }
                c => s.push(c),
            }
        }
    }
}
