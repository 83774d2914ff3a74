//! Recursive-descent parser for the expression language.
//!
//! Grammar (loosest to tightest binding):
//!   sum     := product (('+' | '-') product)*
//!   product := unary (('*' | '/') unary)*
//!   unary   := '-' unary | power
//!   power   := atom ('^' unary)?          exponent must fold to a constant
//!   atom    := number | 'x' | name '(' sum ')' | '(' sum ')'
//!
//! Errors carry the byte offset of the offending token.

use super::{add, constant, div, exp, ln, mul, pow, sin, sqrt, sub, var, Expr};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = src.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => i += 1,
            b'+' => {
                toks.push((Tok::Plus, i));
                i += 1;
            }
            b'-' => {
                toks.push((Tok::Minus, i));
                i += 1;
            }
            b'*' => {
                toks.push((Tok::Star, i));
                i += 1;
            }
            b'/' => {
                toks.push((Tok::Slash, i));
                i += 1;
            }
            b'^' => {
                toks.push((Tok::Caret, i));
                i += 1;
            }
            b'(' => {
                toks.push((Tok::LParen, i));
                i += 1;
            }
            b')' => {
                toks.push((Tok::RParen, i));
                i += 1;
            }
            b'0'..=b'9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
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
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text = &src[start..i];
                let value: f64 = text.parse().map_err(|_| Error::Parse {
                    offset: start,
                    message: format!("invalid number literal '{text}'"),
                })?;
                if !value.is_finite() {
                    return Err(Error::Parse {
                        offset: start,
                        message: format!("number literal '{text}' overflows"),
                    });
                }
                toks.push((Tok::Num(value), start));
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                toks.push((Tok::Ident(src[start..i].to_string()), start));
            }
            _ => {
                return Err(Error::Parse {
                    offset: i,
                    message: format!("unexpected character '{}'", &src[i..i + c_len(c)]),
                });
            }
        }
    }
    Ok(toks)
}

fn c_len(first_byte: u8) -> usize {
    match first_byte {
        0x00..=0x7f => 1,
        0xc0..=0xdf => 2,
        0xe0..=0xef => 3,
        _ => 4,
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(_, o)| *o)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<()> {
        if self.peek() == Some(&want) {
            self.pos += 1;
            Ok(())
        } else {
            Err(Error::Parse {
                offset: self.offset(),
                message: format!("expected {what}"),
            })
        }
    }

    fn sum(&mut self) -> Result<Expr> {
        let mut lhs = self.product()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    lhs = add(lhs, self.product()?);
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    lhs = sub(lhs, self.product()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn product(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    lhs = mul(lhs, self.unary()?);
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    lhs = div(lhs, self.unary()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            let inner = self.unary()?;
            return Ok(match inner {
                Expr::Const(c) => constant(-c),
                other => mul(constant(-1.0), other),
            });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            let at = self.offset();
            let rhs = self.unary()?;
            let p = fold_const(&rhs).ok_or_else(|| Error::Parse {
                offset: at,
                message: "exponent must be a constant".to_string(),
            })?;
            return Ok(pow(base, p));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let at = self.offset();
        match self.bump() {
            Some(Tok::Num(v)) => Ok(constant(v)),
            Some(Tok::Ident(name)) => match name.as_str() {
                "x" => Ok(var()),
                "pi" => Ok(constant(std::f64::consts::PI)),
                "e" => Ok(constant(std::f64::consts::E)),
                "exp" | "ln" | "sin" | "cos" | "sqrt" => {
                    self.expect(Tok::LParen, "'(' after function name")?;
                    let arg = self.sum()?;
                    self.expect(Tok::RParen, "')'")?;
                    Ok(match name.as_str() {
                        "exp" => exp(arg),
                        "ln" => ln(arg),
                        "sin" => sin(arg),
                        "cos" => super::cos(arg),
                        _ => sqrt(arg),
                    })
                }
                _ => Err(Error::Parse {
                    offset: at,
                    message: format!("unknown name '{name}'"),
                }),
            },
            Some(Tok::LParen) => {
                let inner = self.sum()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(inner)
            }
            Some(_) => Err(Error::Parse {
                offset: at,
                message: "expected a number, 'x', a function call, or '('".to_string(),
            }),
            None => Err(Error::Parse {
                offset: at,
                message: "unexpected end of input".to_string(),
            }),
        }
    }
}

fn fold_const(e: &Expr) -> Option<f64> {
    let v = match e {
        Expr::Const(c) => *c,
        Expr::Var => return None,
        Expr::Add(a, b) => fold_const(a)? + fold_const(b)?,
        Expr::Sub(a, b) => fold_const(a)? - fold_const(b)?,
        Expr::Mul(a, b) => fold_const(a)? * fold_const(b)?,
        Expr::Div(a, b) => fold_const(a)? / fold_const(b)?,
        Expr::Pow(u, p) => fold_const(u)?.powf(*p),
        Expr::Exp(u) => fold_const(u)?.exp(),
        Expr::Ln(u) => fold_const(u)?.ln(),
        Expr::Sin(u) => fold_const(u)?.sin(),
        Expr::Cos(u) => fold_const(u)?.cos(),
        Expr::Sqrt(u) => fold_const(u)?.sqrt(),
    };
    v.is_finite().then_some(v)
}

pub fn parse(src: &str) -> Result<Expr> {
    let toks = lex(src)?;
    if toks.is_empty() {
        return Err(Error::Parse {
            offset: 0,
            message: "empty expression".to_string(),
        });
    }
    let mut parser = Parser {
        toks,
        pos: 0,
        end: src.len(),
    };
    let e = parser.sum()?;
    if parser.pos != parser.toks.len() {
        return Err(Error::Parse {
            offset: parser.offset(),
            message: "trailing input after expression".to_string(),
        });
    }
    Ok(e)
}
