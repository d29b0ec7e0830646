//! Sparse multivariate polynomials with integer coefficients and the text
//! syntax used in variety files ("2*x1^3*x2 - x2 + 1"). Coefficients stay
//! integers so a polynomial can be evaluated at any level of the field
//! tower without re-embedding.

use std::collections::BTreeMap;
use std::fmt;

use num::{BigInt, One, Signed, Zero};

use crate::cyclotomic::{CycloField, CycloNum};
use crate::error::{Error, Result};
use crate::gf::{FieldContext, FieldElement};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiPoly {
    nvars: usize,
    /// Sorted by exponent vector, descending; no zero coefficients,
    /// no duplicate monomials.
    terms: Vec<(Vec<u32>, BigInt)>,
}

impl MultiPoly {
    pub fn zero(nvars: usize) -> Self {
        MultiPoly { nvars, terms: vec![] }
    }

    pub fn constant(nvars: usize, c: impl Into<BigInt>) -> Self {
        Self::from_terms(nvars, vec![(vec![0; nvars], c.into())])
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        assert!(i < nvars);
        let mut exps = vec![0u32; nvars];
        exps[i] = 1;
        Self::from_terms(nvars, vec![(exps, BigInt::one())])
    }

    pub fn from_terms(nvars: usize, terms: Vec<(Vec<u32>, BigInt)>) -> Self {
        let mut map: BTreeMap<Vec<u32>, BigInt> = BTreeMap::new();
        for (e, c) in terms {
            assert_eq!(e.len(), nvars);
            let entry = map.entry(e).or_insert_with(BigInt::zero);
            *entry += c;
        }
        let mut terms: Vec<(Vec<u32>, BigInt)> = map
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .collect();
        terms.reverse(); // descending exponent order
        MultiPoly { nvars, terms }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &[(Vec<u32>, BigInt)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars);
        let mut t = self.terms.clone();
        t.extend(other.terms.iter().cloned());
        Self::from_terms(self.nvars, t)
    }

    pub fn neg(&self) -> Self {
        MultiPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars);
        let mut out = vec![];
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                out.push((e, ca * cb));
            }
        }
        Self::from_terms(self.nvars, out)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::constant(self.nvars, 1);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Exact evaluation at field elements (the slow, allocation-per-op path;
    /// level engines compile polynomials into log-domain form instead).
    pub fn eval_field(&self, ctx: &FieldContext, point: &[FieldElement]) -> Result<FieldElement> {
        if point.len() != self.nvars {
            return Err(Error::BadInput(format!(
                "point has {} coordinates, polynomial has {} variables",
                point.len(),
                self.nvars
            )));
        }
        let mut acc = ctx.zero();
        for (exps, coeff) in &self.terms {
            let c_mod = coeff.mod_floor_u64(ctx.p());
            let mut term = ctx.from_int(c_mod as i64);
            for (x, &e) in point.iter().zip(exps) {
                if e > 0 {
                    term = term.mul(&x.pow(e as i128)?)?;
                }
            }
            acc = acc.add(&term)?;
        }
        Ok(acc)
    }

    /// Exact evaluation in a cyclotomic field (characteristic-zero path).
    pub fn eval_cyclo(&self, field: &CycloField, point: &[CycloNum]) -> CycloNum {
        assert_eq!(point.len(), self.nvars);
        let mut acc = field.zero();
        for (exps, coeff) in &self.terms {
            let mut term = field.from_rational(num::BigRational::from(coeff.clone()));
            for (x, &e) in point.iter().zip(exps) {
                if e > 0 {
                    term = field.mul(&term, &field.pow(x, e as u64));
                }
            }
            acc = field.add(&acc, &term);
        }
        acc
    }

    /// Parse the text syntax with variables `<prefix>1..<prefix><nvars>`.
    pub fn parse(text: &str, prefix: char, nvars: usize) -> Result<Self> {
        let tokens = tokenize(text, prefix)?;
        let mut p = Parser { tokens, pos: 0, nvars };
        let poly = p.expr()?;
        if p.pos != p.tokens.len() {
            return Err(Error::BadPolynomial(format!(
                "unexpected trailing input at token {}",
                p.pos
            )));
        }
        Ok(poly)
    }
}

trait ModFloorU64 {
    fn mod_floor_u64(&self, p: u64) -> u64;
}

impl ModFloorU64 for BigInt {
    fn mod_floor_u64(&self, p: u64) -> u64 {
        use num::Integer;
        u64::try_from(&self.mod_floor(&BigInt::from(p))).unwrap()
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (exps, coeff)) in self.terms.iter().enumerate() {
            let mag = coeff.abs();
            if i == 0 {
                if coeff.is_negative() {
                    write!(f, "-")?;
                }
            } else if coeff.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mut factors: Vec<String> = vec![];
            for (v, &e) in exps.iter().enumerate() {
                match e {
                    0 => {}
                    1 => factors.push(format!("x{}", v + 1)),
                    _ => factors.push(format!("x{}^{}", v + 1, e)),
                }
            }
            if factors.is_empty() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{}", factors.join("*"))?;
            } else {
                write!(f, "{}*{}", mag, factors.join("*"))?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Var(usize), // 0-based
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
}

fn tokenize(text: &str, prefix: char) -> Result<Vec<Tok>> {
    let mut out = vec![];
    let bytes: Vec<char> = text.chars().collect();
    let mut i = 0usize;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                out.push(Tok::Plus);
                i += 1;
            }
            '-' => {
                out.push(Tok::Minus);
                i += 1;
            }
            '*' => {
                out.push(Tok::Star);
                i += 1;
            }
            '^' => {
                out.push(Tok::Caret);
                i += 1;
            }
            '(' => {
                out.push(Tok::LParen);
                i += 1;
            }
            ')' => {
                out.push(Tok::RParen);
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let s: String = bytes[start..i].iter().collect();
                out.push(Tok::Int(s.parse().unwrap()));
            }
            c if c == prefix => {
                i += 1;
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if start == i {
                    return Err(Error::BadPolynomial(format!(
                        "variable '{prefix}' needs an index at char {start}"
                    )));
                }
                let s: String = bytes[start..i].iter().collect();
                let idx: usize = s
                    .parse()
                    .map_err(|_| Error::BadPolynomial(format!("bad variable index {s}")))?;
                if idx == 0 {
                    return Err(Error::BadPolynomial("variables are 1-based".into()));
                }
                out.push(Tok::Var(idx - 1));
            }
            other => {
                return Err(Error::BadPolynomial(format!(
                    "unexpected character {other:?} at {i}"
                )))
            }
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Tok>,
    pos: usize,
    nvars: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos)
    }

    fn expr(&mut self) -> Result<MultiPoly> {
        let mut acc = self.term()?;
        while let Some(t) = self.peek() {
            match t {
                Tok::Plus => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?);
                }
                Tok::Minus => {
                    self.pos += 1;
                    acc = acc.sub(&self.term()?);
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<MultiPoly> {
        let mut acc = self.unary()?;
        while self.peek() == Some(&Tok::Star) {
            self.pos += 1;
            acc = acc.mul(&self.unary()?);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<MultiPoly> {
        if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            return Ok(self.unary()?.neg());
        }
        let base = self.atom()?;
        if self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            match self.tokens.get(self.pos) {
                Some(Tok::Int(e)) => {
                    self.pos += 1;
                    let e = u32::try_from(e)
                        .map_err(|_| Error::BadPolynomial("exponent out of range".into()))?;
                    Ok(base.pow(e))
                }
                _ => Err(Error::BadPolynomial(
                    "expected a nonnegative integer exponent after '^'".into(),
                )),
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<MultiPoly> {
        match self.tokens.get(self.pos).cloned() {
            Some(Tok::Int(c)) => {
                self.pos += 1;
                Ok(MultiPoly::constant(self.nvars, c))
            }
            Some(Tok::Var(i)) => {
                self.pos += 1;
                if i >= self.nvars {
                    return Err(Error::BadPolynomial(format!(
                        "variable index {} exceeds the declared dimension {}",
                        i + 1,
                        self.nvars
                    )));
                }
                Ok(MultiPoly::var(self.nvars, i))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.tokens.get(self.pos) != Some(&Tok::RParen) {
                    return Err(Error::BadPolynomial("missing ')'".into()));
                }
                self.pos += 1;
                Ok(inner)
            }
            _ => Err(Error::BadPolynomial(format!(
                "unexpected token at position {}",
                self.pos
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_display_round_trip() {
        for s in [
            "2*x1^3*x2 - x2 + 1",
            "x1 + x2 - 1",
            "x2^2 - x1^3 - x1 - 1",
            "0",
            "-x1",
        ] {
            let p = MultiPoly::parse(s, 'x', 2).unwrap();
            let q = MultiPoly::parse(&p.to_string(), 'x', 2).unwrap();
            assert_eq!(p, q, "{s}");
        }
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(MultiPoly::parse("x3", 'x', 2).is_err());
        assert!(MultiPoly::parse("x1 +", 'x', 2).is_err());
        assert!(MultiPoly::parse("x1^-2", 'x', 2).is_err());
        assert!(MultiPoly::parse("y1", 'x', 2).is_err());
    }

    #[test]
    fn eval_matches_by_hand() {
        let ctx = FieldContext::new(7, 1).unwrap();
        let p = MultiPoly::parse("2*x1^2 - x2 + 3", 'x', 2).unwrap();
        let v = p
            .eval_field(&ctx, &[ctx.from_int(3), ctx.from_int(5)])
            .unwrap();
        // 2*9 - 5 + 3 = 16 = 2 mod 7
        assert_eq!(v, ctx.from_int(2));
    }
}
