//! A small polynomial expression grammar: rational literals, generator
//! names, `+`, `-`, `*`, `^`, and parentheses. Division of expressions
//! and any non-polynomial syntax are rejected. Errors carry the line
//! and column of the offending token.

use std::collections::BTreeMap;
use std::fmt;

use gradedcontact::chart::ChartRef;
use gradedcontact::poly::{GradedPoly, Rat};
use num_bigint::BigInt;

#[derive(Debug, Clone)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.col, self.msg)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(Rat),
    Name(String),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn err(line: usize, col: usize, msg: impl Into<String>) -> ParseError {
    ParseError {
        line,
        col,
        msg: msg.into(),
    }
}

fn lex(input: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = input.chars().collect();
    let mut i = 0usize;
    let mut line = 1usize;
    let mut col = 1usize;
    while i < chars.len() {
        let c = chars[i];
        let (tline, tcol) = (line, col);
        let advance = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            ' ' | '\t' | '\r' => advance(1, &mut i, &mut col),
            '+' => {
                out.push(Spanned { tok: Tok::Plus, line: tline, col: tcol });
                advance(1, &mut i, &mut col);
            }
            '-' | '\u{2212}' => {
                out.push(Spanned { tok: Tok::Minus, line: tline, col: tcol });
                advance(1, &mut i, &mut col);
            }
            '*' => {
                out.push(Spanned { tok: Tok::Star, line: tline, col: tcol });
                advance(1, &mut i, &mut col);
            }
            '^' => {
                out.push(Spanned { tok: Tok::Caret, line: tline, col: tcol });
                advance(1, &mut i, &mut col);
            }
            '(' => {
                out.push(Spanned { tok: Tok::LParen, line: tline, col: tcol });
                advance(1, &mut i, &mut col);
            }
            ')' => {
                out.push(Spanned { tok: Tok::RParen, line: tline, col: tcol });
                advance(1, &mut i, &mut col);
            }
            '/' => {
                return Err(err(tline, tcol, "division is not supported (rational literals must be written without spaces, e.g. `1/2`)"));
            }
            _ if c.is_ascii_digit() => {
                let mut j = i;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                let numer: String = chars[i..j].iter().collect();
                let numer: BigInt = numer.parse().expect("digits");
                let consumed;
                // a `/` directly after the integer introduces a rational
                // literal; the denominator must be a nonzero integer
                if j < chars.len() && chars[j] == '/' {
                    let mut k = j + 1;
                    while k < chars.len() && chars[k].is_ascii_digit() {
                        k += 1;
                    }
                    if k == j + 1 {
                        return Err(err(
                            tline,
                            tcol + (j - i),
                            "expected digits after `/` in rational literal",
                        ));
                    }
                    let denom: String = chars[j + 1..k].iter().collect();
                    let denom: BigInt = denom.parse().expect("digits");
                    if denom == BigInt::from(0) {
                        return Err(err(tline, tcol, "rational literal has zero denominator"));
                    }
                    out.push(Spanned {
                        tok: Tok::Num(Rat::new(numer, denom)),
                        line: tline,
                        col: tcol,
                    });
                    consumed = k - i;
                } else {
                    out.push(Spanned {
                        tok: Tok::Num(Rat::from(numer)),
                        line: tline,
                        col: tcol,
                    });
                    consumed = j - i;
                }
                advance(consumed, &mut i, &mut col);
            }
            _ if c.is_ascii_alphabetic() || c == '_' => {
                let mut j = i;
                while j < chars.len()
                    && (chars[j].is_ascii_alphanumeric() || chars[j] == '_')
                {
                    j += 1;
                }
                let name: String = chars[i..j].iter().collect();
                let n = j - i;
                out.push(Spanned { tok: Tok::Name(name), line: tline, col: tcol });
                advance(n, &mut i, &mut col);
            }
            _ => {
                return Err(err(tline, tcol, format!("unexpected character `{c}`")));
            }
        }
    }
    Ok(out)
}

/// Abstract syntax of a parsed expression; names are resolved later.
#[derive(Debug, Clone)]
pub enum Expr {
    Num(Rat),
    Var(String, usize, usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    end_line: usize,
    end_col: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Spanned> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Spanned> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn here(&self) -> (usize, usize) {
        match self.peek() {
            Some(t) => (t.line, t.col),
            None => (self.end_line, self.end_col),
        }
    }

    fn sum(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.product()?;
        while let Some(t) = self.peek() {
            match t.tok {
                Tok::Plus => {
                    self.next();
                    let rhs = self.product()?;
                    acc = Expr::Add(Box::new(acc), Box::new(rhs));
                }
                Tok::Minus => {
                    self.next();
                    let rhs = self.product()?;
                    acc = Expr::Sub(Box::new(acc), Box::new(rhs));
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn product(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.unary()?;
        while let Some(t) = self.peek() {
            match t.tok {
                Tok::Star => {
                    self.next();
                    let rhs = self.unary()?;
                    acc = Expr::Mul(Box::new(acc), Box::new(rhs));
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if let Some(t) = self.peek() {
            if t.tok == Tok::Minus {
                self.next();
                let inner = self.unary()?;
                return Ok(Expr::Neg(Box::new(inner)));
            }
            if t.tok == Tok::Plus {
                self.next();
                return self.unary();
            }
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if let Some(t) = self.peek() {
            if t.tok == Tok::Caret {
                self.next();
                let (line, col) = self.here();
                match self.next() {
                    Some(Spanned { tok: Tok::Num(r), .. }) => {
                        use num_traits::One;
                        if !r.denom().is_one() || r.numer().sign() == num_bigint::Sign::Minus {
                            return Err(err(line, col, "exponent must be a nonnegative integer"));
                        }
                        let k: u32 = r.numer().try_into().map_err(|_| {
                            err(line, col, "exponent too large")
                        })?;
                        return Ok(Expr::Pow(Box::new(base), k));
                    }
                    _ => return Err(err(line, col, "expected integer exponent after `^`")),
                }
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let (line, col) = self.here();
        match self.next() {
            Some(Spanned { tok: Tok::Num(r), .. }) => Ok(Expr::Num(r)),
            Some(Spanned { tok: Tok::Name(n), line, col }) => Ok(Expr::Var(n, line, col)),
            Some(Spanned { tok: Tok::LParen, .. }) => {
                let inner = self.sum()?;
                let (cline, ccol) = self.here();
                match self.next() {
                    Some(Spanned { tok: Tok::RParen, .. }) => Ok(inner),
                    _ => Err(err(cline, ccol, "expected `)`")),
                }
            }
            Some(Spanned { tok, line, col }) => {
                Err(err(line, col, format!("unexpected token `{tok:?}`")))
            }
            None => Err(err(line, col, "unexpected end of expression")),
        }
    }
}

/// Parse an expression string to its syntax tree.
pub fn parse(input: &str) -> Result<Expr, ParseError> {
    let toks = lex(input)?;
    let mut end_line = 1;
    let mut end_col = 1;
    for c in input.chars() {
        if c == '\n' {
            end_line += 1;
            end_col = 1;
        } else {
            end_col += 1;
        }
    }
    let mut p = Parser { toks, pos: 0, end_line, end_col };
    if p.peek().is_none() {
        return Err(err(1, 1, "empty expression"));
    }
    let e = p.sum()?;
    if let Some(t) = p.peek() {
        return Err(err(t.line, t.col, format!("unexpected trailing token `{:?}`", t.tok)));
    }
    Ok(e)
}

/// Resolve a parsed expression to a polynomial over a chart. `names`
/// maps generator names to generator indices.
pub fn to_poly(
    expr: &Expr,
    chart: &ChartRef,
    names: &BTreeMap<String, usize>,
) -> Result<GradedPoly, ParseError> {
    match expr {
        Expr::Num(r) => Ok(GradedPoly::constant(chart, r.clone())),
        Expr::Var(n, line, col) => match names.get(n) {
            Some(&idx) => Ok(GradedPoly::generator(chart, idx)),
            None => Err(err(*line, *col, format!("unknown coordinate `{n}`"))),
        },
        Expr::Neg(a) => Ok(to_poly(a, chart, names)?.neg()),
        Expr::Add(a, b) => to_poly(a, chart, names)?
            .add(&to_poly(b, chart, names)?)
            .map_err(|e| err(0, 0, e.to_string())),
        Expr::Sub(a, b) => to_poly(a, chart, names)?
            .sub(&to_poly(b, chart, names)?)
            .map_err(|e| err(0, 0, e.to_string())),
        Expr::Mul(a, b) => to_poly(a, chart, names)?
            .mul(&to_poly(b, chart, names)?)
            .map_err(|e| err(0, 0, e.to_string())),
        Expr::Pow(a, k) => to_poly(a, chart, names)?
            .pow(*k)
            .map_err(|e| err(0, 0, e.to_string())),
    }
}

/// Parse and resolve in one step.
pub fn parse_poly(
    input: &str,
    chart: &ChartRef,
    names: &BTreeMap<String, usize>,
) -> Result<GradedPoly, ParseError> {
    let e = parse(input)?;
    to_poly(&e, chart, names)
}
