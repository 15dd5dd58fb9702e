//! Tokenizer shared by the OCL, contract and B-LTL parsers.

use std::fmt;

use crate::error::{Error, Location, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Real(f64),
    /// `+∞` or `+inf`
    Infinity,
    Arrow,
    Dot,
    Comma,
    Colon,
    Semi,
    Pipe,
    Hash,
    At,
    Percent,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Plus,
    Minus,
    Star,
    Slash,
    Lt,
    Le,
    Eq,
    Ne,
    Ge,
    Gt,
    Assign,
    Bang,
    Amp,
    FatArrow,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(name) => return write!(f, "`{name}`"),
            Tok::Int(v) => return write!(f, "`{v}`"),
            Tok::Real(v) => return write!(f, "`{v:?}`"),
            Tok::Infinity => "`+inf`",
            Tok::Arrow => "`->`",
            Tok::Dot => "`.`",
            Tok::Comma => "`,`",
            Tok::Colon => "`:`",
            Tok::Semi => "`;`",
            Tok::Pipe => "`|`",
            Tok::Hash => "`#`",
            Tok::At => "`@`",
            Tok::Percent => "`%`",
            Tok::LParen => "`(`",
            Tok::RParen => "`)`",
            Tok::LBracket => "`[`",
            Tok::RBracket => "`]`",
            Tok::LBrace => "`{`",
            Tok::RBrace => "`}`",
            Tok::Plus => "`+`",
            Tok::Minus => "`-`",
            Tok::Star => "`*`",
            Tok::Slash => "`/`",
            Tok::Lt => "`<`",
            Tok::Le => "`<=`",
            Tok::Eq => "`=`",
            Tok::Ne => "`<>`",
            Tok::Ge => "`>=`",
            Tok::Gt => "`>`",
            Tok::Assign => "`:=`",
            Tok::Bang => "`!`",
            Tok::Amp => "`&`",
            Tok::FatArrow => "`=>`",
            Tok::Eof => "end of input",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub offset: usize,
}

/// Splits `text` into tokens. `--` starts a comment running to the end of
/// the line.
pub fn tokenize(text: &str) -> Result<Vec<Token>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < text.len() {
        let c = text[i..].chars().next().unwrap();
        let start = i;
        if c.is_whitespace() {
            i += c.len_utf8();
            continue;
        }
        if text[i..].starts_with("--") {
            i = text[i..].find('\n').map_or(text.len(), |n| i + n);
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let end = text[i..]
                .find(|ch: char| !(ch.is_ascii_alphanumeric() || ch == '_'))
                .map_or(text.len(), |n| i + n);
            out.push(Token {
                tok: Tok::Ident(text[i..end].to_string()),
                offset: start,
            });
            i = end;
            continue;
        }
        if c.is_ascii_digit() {
            let (tok, end) = lex_number(text, i)?;
            out.push(Token { tok, offset: start });
            i = end;
            continue;
        }
        let two = |s: &str| text[i..].starts_with(s);
        let (tok, len) = if two("->") {
            (Tok::Arrow, 2)
        } else if two("<=") {
            (Tok::Le, 2)
        } else if two(">=") {
            (Tok::Ge, 2)
        } else if two("<>") {
            (Tok::Ne, 2)
        } else if two(":=") {
            (Tok::Assign, 2)
        } else if two("=>") {
            (Tok::FatArrow, 2)
        } else if two("+∞") {
            (Tok::Infinity, "+∞".len())
        } else if two("+inf") && !bytes.get(i + 4).is_some_and(|b| b.is_ascii_alphanumeric()) {
            (Tok::Infinity, 4)
        } else {
            let tok = match c {
                '→' => Tok::Arrow,
                '≤' => Tok::Le,
                '≥' => Tok::Ge,
                '≠' => Tok::Ne,
                '∞' => Tok::Infinity,
                '.' => Tok::Dot,
                ',' => Tok::Comma,
                ':' => Tok::Colon,
                ';' => Tok::Semi,
                '|' => Tok::Pipe,
                '#' => Tok::Hash,
                '@' => Tok::At,
                '%' => Tok::Percent,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '[' => Tok::LBracket,
                ']' => Tok::RBracket,
                '{' => Tok::LBrace,
                '}' => Tok::RBrace,
                '+' => Tok::Plus,
                '-' => Tok::Minus,
                '*' => Tok::Star,
                '/' => Tok::Slash,
                '<' => Tok::Lt,
                '=' => Tok::Eq,
                '>' => Tok::Gt,
                '!' => Tok::Bang,
                '&' => Tok::Amp,
                other => {
                    return Err(Error::Syntax {
                        location: Location::from_offset(text, start),
                        message: format!("unexpected character `{other}`"),
                        expected: Vec::new(),
                    })
                }
            };
            (tok, c.len_utf8())
        };
        out.push(Token { tok, offset: start });
        i += len;
    }
    out.push(Token {
        tok: Tok::Eof,
        offset: text.len(),
    });
    Ok(out)
}

fn lex_number(text: &str, start: usize) -> Result<(Tok, usize)> {
    let bytes = text.as_bytes();
    let mut i = start;
    while i < bytes.len() && bytes[i].is_ascii_digit() {
        i += 1;
    }
    let mut is_real = false;
    if i + 1 < bytes.len() && bytes[i] == b'.' && bytes[i + 1].is_ascii_digit() {
        is_real = true;
        i += 1;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
    }
    if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
        let mut j = i + 1;
        if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
            j += 1;
        }
        if j < bytes.len() && bytes[j].is_ascii_digit() {
            while j < bytes.len() && bytes[j].is_ascii_digit() {
                j += 1;
            }
            is_real = true;
            i = j;
        }
    }
    let literal = &text[start..i];
    let bad = || Error::Syntax {
        location: Location::from_offset(text, start),
        message: format!("malformed number `{literal}`"),
        expected: Vec::new(),
    };
    let tok = if is_real {
        Tok::Real(literal.parse().map_err(|_| bad())?)
    } else {
        Tok::Int(literal.parse().map_err(|_| bad())?)
    };
    Ok((tok, i))
}

/// Cursor over a token stream with error helpers.
#[derive(Debug, Clone)]
pub struct Cursor<'a> {
    pub text: &'a str,
    tokens: Vec<Token>,
    pos: usize,
}

impl<'a> Cursor<'a> {
    pub fn new(text: &'a str) -> Result<Self> {
        Ok(Self {
            text,
            tokens: tokenize(text)?,
            pos: 0,
        })
    }

    pub fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    pub fn peek_at(&self, ahead: usize) -> &Tok {
        let idx = (self.pos + ahead).min(self.tokens.len() - 1);
        &self.tokens[idx].tok
    }

    pub fn position(&self) -> usize {
        self.pos
    }

    pub fn rewind(&mut self, pos: usize) {
        self.pos = pos;
    }

    pub fn offset(&self) -> usize {
        self.tokens[self.pos].offset
    }

    pub fn advance(&mut self) -> Tok {
        let tok = self.tokens[self.pos].tok.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        tok
    }

    pub fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    pub fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.advance();
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, tok: &Tok) -> Result<()> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.error_expected(&[&tok.to_string()]))
        }
    }

    /// True when the next token is the identifier `word` (ASCII case-insensitive).
    pub fn is_word(&self, word: &str) -> bool {
        matches!(self.peek(), Tok::Ident(name) if name.eq_ignore_ascii_case(word))
    }

    pub fn is_word_at(&self, ahead: usize, word: &str) -> bool {
        matches!(self.peek_at(ahead), Tok::Ident(name) if name.eq_ignore_ascii_case(word))
    }

    pub fn eat_word(&mut self, word: &str) -> bool {
        if self.is_word(word) {
            self.advance();
            true
        } else {
            false
        }
    }

    pub fn expect_word(&mut self, word: &str) -> Result<()> {
        if self.eat_word(word) {
            Ok(())
        } else {
            Err(self.error_expected(&[&format!("`{word}`")]))
        }
    }

    pub fn expect_ident(&mut self) -> Result<String> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.advance();
                Ok(name)
            }
            _ => Err(self.error_expected(&["identifier"])),
        }
    }

    pub fn location(&self) -> Location {
        Location::from_offset(self.text, self.offset())
    }

    pub fn error(&self, message: impl Into<String>) -> Error {
        Error::Syntax {
            location: self.location(),
            message: message.into(),
            expected: Vec::new(),
        }
    }

    pub fn error_expected(&self, expected: &[&str]) -> Error {
        Error::Syntax {
            location: self.location(),
            message: format!("unexpected {}", self.peek()),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }
}
