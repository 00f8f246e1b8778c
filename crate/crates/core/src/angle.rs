//! Parser for angle strings such as `"pi/7"`, `"0.5"` or `"17pi/28-0.5"`.
//!
//! Grammar: sums and differences of products and quotients, with unary
//! signs, parentheses, decimal literals, the constant `pi` and implicit
//! multiplication (`17pi` means `17*pi`).

use rug::float::Constant;
use rug::Float;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(String),
    Pi,
    Plus,
    Minus,
    Star,
    Slash,
    Open,
    Close,
}

fn tokenize(src: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' => i += 1,
            '+' => {
                out.push(Token::Plus);
                i += 1;
            }
            '-' => {
                out.push(Token::Minus);
                i += 1;
            }
            '*' => {
                out.push(Token::Star);
                i += 1;
            }
            '/' => {
                out.push(Token::Slash);
                i += 1;
            }
            '(' => {
                out.push(Token::Open);
                i += 1;
            }
            ')' => {
                out.push(Token::Close);
                i += 1;
            }
            'π' => {
                out.push(Token::Pi);
                i += 1;
            }
            'p' | 'P' => {
                if i + 1 < chars.len() && matches!(chars[i + 1], 'i' | 'I') {
                    out.push(Token::Pi);
                    i += 2;
                } else {
                    return Err(Error::Parse(format!("unexpected character in angle '{src}'")));
                }
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                // exponent part
                if i < chars.len() && matches!(chars[i], 'e' | 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && matches!(chars[j], '+' | '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        i = j;
                        while i < chars.len() && chars[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                out.push(Token::Num(chars[start..i].iter().collect()));
            }
            _ => return Err(Error::Parse(format!("unexpected character '{c}' in angle '{src}'"))),
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    prec: u32,
    src: &'a str,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn bad(&self) -> Error {
        Error::Parse(format!("malformed angle expression '{}'", self.src))
    }

    fn expr(&mut self) -> Result<Float> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.pos += 1;
                    acc += self.term()?;
                }
                Some(Token::Minus) => {
                    self.pos += 1;
                    acc -= self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Float> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(Token::Star) => {
                    self.pos += 1;
                    acc *= self.factor()?;
                }
                Some(Token::Slash) => {
                    self.pos += 1;
                    let d = self.factor()?;
                    if d.is_zero() {
                        return Err(Error::Parse(format!("division by zero in angle '{}'", self.src)));
                    }
                    acc /= d;
                }
                Some(Token::Num(_)) | Some(Token::Pi) | Some(Token::Open) => {
                    acc *= self.factor()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<Float> {
        let tok = self.peek().cloned().ok_or_else(|| self.bad())?;
        self.pos += 1;
        match tok {
            Token::Minus => Ok(-self.factor()?),
            Token::Plus => self.factor(),
            Token::Pi => Ok(Float::with_val(self.prec, Constant::Pi)),
            Token::Num(s) => {
                let parsed = Float::parse(&s).map_err(|_| self.bad())?;
                Ok(Float::with_val(self.prec, parsed))
            }
            Token::Open => {
                let v = self.expr()?;
                if self.peek() != Some(&Token::Close) {
                    return Err(self.bad());
                }
                self.pos += 1;
                Ok(v)
            }
            _ => Err(self.bad()),
        }
    }
}

/// Evaluates an angle expression at `prec` bits.
pub fn parse_angle(src: &str, prec: u32) -> Result<Float> {
    let tokens = tokenize(src)?;
    if tokens.is_empty() {
        return Err(Error::Parse("empty angle expression".into()));
    }
    let mut parser = Parser {
        tokens: &tokens,
        pos: 0,
        prec,
        src,
    };
    let v = parser.expr()?;
    if parser.pos != tokens.len() {
        return Err(parser.bad());
    }
    Ok(v)
}
