//! Constant expressions over numeric literals, `pi` and `e`, with `+ - * /`,
//! unary signs and parentheses.

use std::f64::consts::{E, PI};

#[derive(Debug, Clone, Copy, PartialEq)]
enum Tok {
    Num(f64),
    Plus,
    Minus,
    Star,
    Slash,
    LParen,
    RParen,
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, String> {
    let bytes = src.as_bytes();
    let mut out = vec![];
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let tok = match c {
            b' ' | b'\t' => {
                i += 1;
                continue;
            }
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'0'..=b'9' | b'.' => {
                i = scan_number(bytes, i);
                let text = &src[start..i];
                let v = text
                    .parse::<f64>()
                    .map_err(|_| format!("bad number {text:?} at column {}", start + 1))?;
                out.push((start, Tok::Num(v)));
                continue;
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                let v = match &src[start..i] {
                    "pi" => PI,
                    "e" => E,
                    other => return Err(format!("unknown name {other:?} at column {}", start + 1)),
                };
                out.push((start, Tok::Num(v)));
                continue;
            }
            _ => {
                let ch = src[i..].chars().next().unwrap_or('?');
                return Err(format!("unexpected character {ch:?} at column {}", start + 1));
            }
        };
        out.push((start, tok));
        i += 1;
    }
    Ok(out)
}

/// End of a decimal literal starting at `i`. An exponent is only consumed when
/// digits follow, so `2e` is left for the name lexer to reject.
fn scan_number(b: &[u8], mut i: usize) -> usize {
    while i < b.len() && (b[i].is_ascii_digit() || b[i] == b'.') {
        i += 1;
    }
    if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
        let mut j = i + 1;
        if j < b.len() && (b[j] == b'+' || b[j] == b'-') {
            j += 1;
        }
        if j < b.len() && b[j].is_ascii_digit() {
            while j < b.len() && b[j].is_ascii_digit() {
                j += 1;
            }
            return j;
        }
    }
    i
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    len: usize,
}

impl Parser {
    fn peek(&self) -> Option<Tok> {
        self.toks.get(self.pos).map(|t| t.1)
    }

    fn column(&self) -> usize {
        self.toks.get(self.pos).map_or(self.len, |t| t.0) + 1
    }

    fn expr(&mut self) -> Result<f64, String> {
        let mut v = self.term()?;
        while let Some(op @ (Tok::Plus | Tok::Minus)) = self.peek() {
            self.pos += 1;
            let r = self.term()?;
            v = if op == Tok::Plus { v + r } else { v - r };
        }
        Ok(v)
    }

    fn term(&mut self) -> Result<f64, String> {
        let mut v = self.unary()?;
        while let Some(op @ (Tok::Star | Tok::Slash)) = self.peek() {
            self.pos += 1;
            let r = self.unary()?;
            v = if op == Tok::Star { v * r } else { v / r };
        }
        Ok(v)
    }

    fn unary(&mut self) -> Result<f64, String> {
        match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                Ok(-self.unary()?)
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<f64, String> {
        let col = self.column();
        match self.peek() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(v)
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let v = self.expr()?;
                if self.peek() != Some(Tok::RParen) {
                    return Err(format!("expected ')' at column {}", self.column()));
                }
                self.pos += 1;
                Ok(v)
            }
            Some(_) => Err(format!("expected a number, pi, e or '(' at column {col}")),
            None => Err("unexpected end of expression".into()),
        }
    }
}

/// Evaluates a constant expression such as `"e*pi"` or `"-(1 + 2) / 4"`.
pub fn eval_expr(src: &str) -> Result<f64, String> {
    let toks = lex(src)?;
    if toks.is_empty() {
        return Err("empty expression".into());
    }
    let mut p = Parser {
        toks,
        pos: 0,
        len: src.len(),
    };
    let v = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(format!("unexpected trailing input at column {}", p.column()));
    }
    if !v.is_finite() {
        return Err(format!("expression evaluates to {v}"));
    }
    Ok(v)
}
