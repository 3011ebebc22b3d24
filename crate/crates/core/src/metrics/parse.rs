//! Parser for the infix expression grammar.
//!
//! Precedence from loosest: `+ -`, `* /`, unary `-`, `^` (right associative).
//! A `-` directly followed by a number literal that is not itself raised to a
//! power produces a negative constant.

use crate::error::{Error, Result};

use super::expr::{BinaryOp, Expr, UnaryOp};

/// Largest exponent accepted after `^`.
pub const MAX_EXPONENT: u32 = 64;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

fn tokenize(src: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
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
                    i = j;
                }
            }
            let text = &src[start..i];
            let v: f64 = text.parse().map_err(|_| Error::Parse {
                pos: start,
                msg: format!("invalid number `{text}`"),
            })?;
            out.push((start, Tok::Num(v)));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Tok::Ident(src[start..i].to_string())));
        } else if "+-*/^".contains(c) {
            out.push((i, Tok::Op(c)));
            i += 1;
        } else if c == '(' {
            out.push((i, Tok::LParen));
            i += 1;
        } else if c == ')' {
            out.push((i, Tok::RParen));
            i += 1;
        } else {
            return Err(Error::Parse {
                pos: i,
                msg: format!("unexpected character `{c}`"),
            });
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn peek_at(&self, offset: usize) -> Option<&Tok> {
        self.toks.get(self.pos + offset).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(p, _)| *p)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            pos: self.here(),
            msg: msg.into(),
        })
    }

    fn expect(&mut self, t: Tok) -> Result<()> {
        if self.peek() == Some(&t) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected {t:?}"))
        }
    }

    fn sum(&mut self) -> Result<Expr> {
        let mut lhs = self.product()?;
        while let Some(Tok::Op(c @ ('+' | '-'))) = self.peek() {
            let op = if *c == '+' { BinaryOp::Add } else { BinaryOp::Sub };
            self.pos += 1;
            let rhs = self.product()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn product(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Some(Tok::Op(c @ ('*' | '/'))) = self.peek() {
            let op = if *c == '*' { BinaryOp::Mul } else { BinaryOp::Div };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.peek() == Some(&Tok::Op('-')) {
            self.pos += 1;
            if let Some(&Tok::Num(v)) = self.peek() {
                if self.peek_at(1) != Some(&Tok::Op('^')) {
                    self.pos += 1;
                    return Ok(Expr::Const(-v));
                }
            }
            return Ok(Expr::unary(UnaryOp::Neg, self.unary()?));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.peek() != Some(&Tok::Op('^')) {
            return Ok(base);
        }
        self.pos += 1;
        let at = self.here();
        let exp = self.unary()?.simplify();
        match exp {
            Expr::Const(p) if p.fract() == 0.0 && p >= 1.0 && p <= f64::from(MAX_EXPONENT) => {
                Ok(Expr::pow(base, p as u32))
            }
            _ => Err(Error::Parse {
                pos: at,
                msg: format!("exponent must be an integer constant in 1..={MAX_EXPONENT}"),
            }),
        }
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(Expr::Const(v))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.sum()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                if let Some(op) = UnaryOp::from_name(&name) {
                    self.pos += 1;
                    self.expect(Tok::LParen)?;
                    let e = self.sum()?;
                    self.expect(Tok::RParen)?;
                    return Ok(Expr::unary(op, e));
                }
                if let Some(idx) = name.strip_prefix('x').and_then(|d| d.parse::<usize>().ok()) {
                    self.pos += 1;
                    return Ok(Expr::Var(idx));
                }
                self.err(format!("unknown identifier `{name}`"))
            }
            Some(t) => self.err(format!("unexpected token {t:?}")),
            None => self.err("unexpected end of input"),
        }
    }
}

/// Parses an expression in the infix grammar.
pub fn parse_expr(src: &str) -> Result<Expr> {
    let toks = tokenize(src)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: src.len(),
    };
    let e = p.sum()?;
    if p.pos != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence() {
        let e = parse_expr("1 + 2 * x0 ^ 2").unwrap();
        assert_eq!(e.eval(&[3.0]), 19.0);
        let e = parse_expr("-x0^2").unwrap();
        assert_eq!(e.eval(&[3.0]), -9.0);
        let e = parse_expr("-3^2").unwrap();
        assert_eq!(e.eval(&[]), -9.0);
        let e = parse_expr("x0^2^2").unwrap();
        assert_eq!(e, Expr::pow(Expr::Var(0), 4));
        let e = parse_expr("8 / 4 / 2").unwrap();
        assert_eq!(e.eval(&[]), 1.0);
    }

    #[test]
    fn negative_literals() {
        assert_eq!(parse_expr("-3.5").unwrap(), Expr::Const(-3.5));
        assert_eq!(parse_expr("(-(3.5))").unwrap(), Expr::unary(UnaryOp::Neg, Expr::Const(3.5)));
        assert_eq!(parse_expr("2e-3").unwrap(), Expr::Const(0.002));
    }

    #[test]
    fn functions_and_vars() {
        let e = parse_expr("sin(x0^2)*cos(x0) - 1").unwrap();
        assert!((e.eval(&[0.5]) - ((0.25f64).sin() * 0.5f64.cos() - 1.0)).abs() < 1e-15);
        assert_eq!(e.n_vars(), 1);
        assert_eq!(parse_expr("x12").unwrap(), Expr::Var(12));
    }

    #[test]
    fn errors_have_positions() {
        for (src, pos) in [("x0 +", 4), ("x0 ^ 0.5", 5), ("tan(x0)", 0), ("(x0", 3), ("x0 $", 3)] {
            match parse_expr(src) {
                Err(Error::Parse { pos: p, .. }) => assert_eq!(p, pos, "{src}"),
                other => panic!("{src}: {other:?}"),
            }
        }
    }

    #[test]
    fn printed_form_round_trips() {
        for src in ["((2.5 * x0) - (-1e-9))", "(-(3.0))", "((-3.5)^2)", "(sqrt(x1) / log(x0))"] {
            let e = parse_expr(src).unwrap();
            assert_eq!(e.to_string(), src);
            assert_eq!(parse_expr(&e.to_string()).unwrap(), e);
        }
    }
}
