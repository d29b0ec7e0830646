//! Recursive-descent parser for special sentences.
//!
//! Grammar:
//! ```text
//! sentence    := "exists" varlist ":" "roots(" intpoly ")" ";"
//!                "ring:" ringformula ";" "mult:" multformula
//! varlist     := ("z" INDEX)*               (must be z1 z2 .. zk in order)
//! ringformula := formula over  polyexpr ("=" | "!=") polyexpr
//! multformula := formula over  term ("<" | "=") term
//!                              | "P[" r "," n "](" term ")"
//! formula     := andfml ("or" andfml)* ; andfml := unary ("and" unary)*
//! unary       := "not" unary | "true" | "(" formula ")" | literal
//! term        := factor ("*" factor)* ; factor := "1" | "z" INDEX ("^" INT)?
//! ```

use num::BigInt;

use crate::cyclotomic::IntPoly;
use crate::error::{Error, Result};
use crate::variety::MultiPoly;

use super::{Formula, MultAtom, SpecialSentence, Term};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(BigInt),
    Sym(char),
    NotEq,
}

struct Lexer {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = vec![];
    let mut i = 0usize;
    while i < chars.len() {
        let c = chars[i];
        match c {
            c if c.is_whitespace() => i += 1,
            '!' => {
                if chars.get(i + 1) == Some(&'=') {
                    out.push((Tok::NotEq, i));
                    i += 2;
                } else {
                    return Err(Error::SyntaxError { pos: i, msg: "expected '!='".into() });
                }
            }
            '(' | ')' | ';' | ':' | ',' | '[' | ']' | '=' | '<' | '*' | '^' | '+' | '-' => {
                out.push((Tok::Sym(c), i));
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                out.push((Tok::Int(s.parse().unwrap()), start));
            }
            c if c.is_ascii_alphabetic() => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                out.push((Tok::Ident(s), start));
            }
            other => {
                return Err(Error::SyntaxError {
                    pos: i,
                    msg: format!("unexpected character {other:?}"),
                })
            }
        }
    }
    Ok(out)
}

impl Lexer {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn here(&self) -> usize {
        self.toks
            .get(self.pos)
            .or_else(|| self.toks.last())
            .map_or(0, |(_, p)| *p)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn eat_ident(&mut self, word: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Ident(s)) if s == word) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, c: char) -> Result<()> {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            Ok(())
        } else {
            Err(Error::SyntaxError { pos: self.here(), msg: format!("expected {c:?}") })
        }
    }

    fn expect_ident(&mut self, word: &str) -> Result<()> {
        if self.eat_ident(word) {
            Ok(())
        } else {
            Err(Error::SyntaxError { pos: self.here(), msg: format!("expected {word:?}") })
        }
    }

    fn expect_uint(&mut self) -> Result<u64> {
        match self.bump() {
            Some(Tok::Int(n)) => u64::try_from(&n).map_err(|_| Error::SyntaxError {
                pos: self.here(),
                msg: "integer out of range".into(),
            }),
            _ => Err(Error::SyntaxError {
                pos: self.here(),
                msg: "expected an integer".into(),
            }),
        }
    }
}

fn z_index(s: &str) -> Option<usize> {
    let rest = s.strip_prefix('z')?;
    if rest.is_empty() || !rest.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    rest.parse().ok().filter(|&i| i > 0)
}

pub fn parse_sentence(text: &str) -> Result<SpecialSentence> {
    let mut lx = Lexer { toks: lex(text)?, pos: 0 };
    lx.expect_ident("exists")?;
    let mut k = 0usize;
    while let Some(Tok::Ident(s)) = lx.peek() {
        let Some(i) = z_index(s) else { break };
        if i != k + 1 {
            return Err(Error::ArityError(format!(
                "variables must be declared in order; expected z{}, found z{i}",
                k + 1
            )));
        }
        k = i;
        lx.pos += 1;
    }
    lx.expect_sym(':')?;
    lx.expect_ident("roots")?;
    lx.expect_sym('(')?;
    let poly = ip_expr(&mut lx)?;
    lx.expect_sym(')')?;
    lx.expect_sym(';')?;
    lx.expect_ident("ring")?;
    lx.expect_sym(':')?;
    let ring = formula(&mut lx, k, &ring_literal)?;
    lx.expect_sym(';')?;
    lx.expect_ident("mult")?;
    lx.expect_sym(':')?;
    let mult = formula(&mut lx, k, &mult_literal)?;
    if lx.pos != lx.toks.len() {
        return Err(Error::SyntaxError {
            pos: lx.here(),
            msg: "trailing input after the sentence".into(),
        });
    }
    Ok(SpecialSentence { k, poly, ring, mult })
}

// -------- integer polynomial in t --------

fn ip_expr(lx: &mut Lexer) -> Result<IntPoly> {
    let mut acc = ip_term(lx)?;
    loop {
        match lx.peek() {
            Some(Tok::Sym('+')) => {
                lx.pos += 1;
                acc = acc.add(&ip_term(lx)?);
            }
            Some(Tok::Sym('-')) => {
                lx.pos += 1;
                acc = acc.sub(&ip_term(lx)?);
            }
            _ => break,
        }
    }
    Ok(acc)
}

fn ip_term(lx: &mut Lexer) -> Result<IntPoly> {
    let mut acc = ip_unary(lx)?;
    while lx.peek() == Some(&Tok::Sym('*')) {
        lx.pos += 1;
        acc = acc.mul(&ip_unary(lx)?);
    }
    Ok(acc)
}

fn ip_unary(lx: &mut Lexer) -> Result<IntPoly> {
    if lx.peek() == Some(&Tok::Sym('-')) {
        lx.pos += 1;
        let inner = ip_unary(lx)?;
        return Ok(IntPoly::zero().sub(&inner));
    }
    let base = match lx.bump() {
        Some(Tok::Int(n)) => IntPoly::constant(n),
        Some(Tok::Ident(s)) if s == "t" => IntPoly::x(),
        Some(Tok::Sym('(')) => {
            let inner = ip_expr(lx)?;
            lx.expect_sym(')')?;
            inner
        }
        _ => {
            return Err(Error::SyntaxError {
                pos: lx.here(),
                msg: "expected an integer, 't', or '('".into(),
            })
        }
    };
    if lx.peek() == Some(&Tok::Sym('^')) {
        lx.pos += 1;
        let e = lx.expect_uint()?;
        let mut acc = IntPoly::constant(1);
        for _ in 0..e {
            acc = acc.mul(&base);
        }
        return Ok(acc);
    }
    Ok(base)
}

// -------- generic boolean structure --------

type LitParser<A> = dyn Fn(&mut Lexer, usize) -> Result<Formula<A>>;

fn formula<A>(lx: &mut Lexer, k: usize, lit: &LitParser<A>) -> Result<Formula<A>> {
    let mut parts = vec![and_formula(lx, k, lit)?];
    while lx.eat_ident("or") {
        parts.push(and_formula(lx, k, lit)?);
    }
    Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Formula::Or(parts) })
}

fn and_formula<A>(lx: &mut Lexer, k: usize, lit: &LitParser<A>) -> Result<Formula<A>> {
    let mut parts = vec![unary_formula(lx, k, lit)?];
    while lx.eat_ident("and") {
        parts.push(unary_formula(lx, k, lit)?);
    }
    Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Formula::And(parts) })
}

fn unary_formula<A>(lx: &mut Lexer, k: usize, lit: &LitParser<A>) -> Result<Formula<A>> {
    match lx.peek() {
        Some(Tok::Ident(s)) if s == "not" => {
            lx.pos += 1;
            Ok(Formula::Not(Box::new(unary_formula(lx, k, lit)?)))
        }
        Some(Tok::Ident(s)) if s == "true" => {
            lx.pos += 1;
            Ok(Formula::True)
        }
        Some(Tok::Sym('(')) => {
            // try a parenthesized subformula; fall back to a literal whose
            // expression merely starts with '('
            let save = lx.pos;
            lx.pos += 1;
            if let Ok(f) = formula(lx, k, lit) {
                if lx.peek() == Some(&Tok::Sym(')')) {
                    lx.pos += 1;
                    return Ok(f);
                }
            }
            lx.pos = save;
            lit(lx, k)
        }
        _ => lit(lx, k),
    }
}

// -------- ring side --------

fn ring_literal(lx: &mut Lexer, k: usize) -> Result<Formula<MultiPoly>> {
    let lhs = ring_poly(lx, k)?;
    match lx.bump() {
        Some(Tok::Sym('=')) => Ok(Formula::Atom(lhs.sub(&ring_poly(lx, k)?))),
        Some(Tok::NotEq) => Ok(Formula::Not(Box::new(Formula::Atom(
            lhs.sub(&ring_poly(lx, k)?),
        )))),
        _ => Err(Error::SyntaxError {
            pos: lx.here(),
            msg: "expected '=' or '!=' in a ring atom".into(),
        }),
    }
}

fn ring_poly(lx: &mut Lexer, k: usize) -> Result<MultiPoly> {
    let mut acc = ring_term(lx, k)?;
    loop {
        match lx.peek() {
            Some(Tok::Sym('+')) => {
                lx.pos += 1;
                acc = acc.add(&ring_term(lx, k)?);
            }
            Some(Tok::Sym('-')) => {
                lx.pos += 1;
                acc = acc.sub(&ring_term(lx, k)?);
            }
            _ => break,
        }
    }
    Ok(acc)
}

fn ring_term(lx: &mut Lexer, k: usize) -> Result<MultiPoly> {
    let mut acc = ring_unary(lx, k)?;
    while lx.peek() == Some(&Tok::Sym('*')) {
        lx.pos += 1;
        acc = acc.mul(&ring_unary(lx, k)?);
    }
    Ok(acc)
}

fn ring_unary(lx: &mut Lexer, k: usize) -> Result<MultiPoly> {
    if lx.peek() == Some(&Tok::Sym('-')) {
        lx.pos += 1;
        return Ok(ring_unary(lx, k)?.neg());
    }
    let base = match lx.bump() {
        Some(Tok::Int(n)) => MultiPoly::constant(k, n),
        Some(Tok::Ident(s)) => match z_index(&s) {
            Some(i) if i <= k => MultiPoly::var(k, i - 1),
            Some(i) => {
                return Err(Error::ArityError(format!(
                    "z{i} exceeds the declared variable count {k}"
                )))
            }
            None => {
                return Err(Error::SyntaxError {
                    pos: lx.here(),
                    msg: format!("unexpected identifier {s:?} in a ring atom"),
                })
            }
        },
        Some(Tok::Sym('(')) => {
            let inner = ring_poly(lx, k)?;
            lx.expect_sym(')')?;
            inner
        }
        _ => {
            return Err(Error::SyntaxError {
                pos: lx.here(),
                msg: "expected an integer, a variable, or '('".into(),
            })
        }
    };
    if lx.peek() == Some(&Tok::Sym('^')) {
        lx.pos += 1;
        let e = lx.expect_uint()?;
        let e = u32::try_from(e).map_err(|_| Error::SyntaxError {
            pos: lx.here(),
            msg: "exponent out of range".into(),
        })?;
        return Ok(base.pow(e));
    }
    Ok(base)
}

// -------- multiplicative side --------

fn mult_literal(lx: &mut Lexer, k: usize) -> Result<Formula<MultAtom>> {
    if matches!(lx.peek(), Some(Tok::Ident(s)) if s == "P") {
        lx.pos += 1;
        lx.expect_sym('[')?;
        let r = lx.expect_uint()?;
        lx.expect_sym(',')?;
        let n = lx.expect_uint()?;
        lx.expect_sym(']')?;
        lx.expect_sym('(')?;
        let term = term(lx, k)?;
        lx.expect_sym(')')?;
        if n == 0 || r >= n {
            return Err(Error::ArityError(format!(
                "predicate P[{r},{n}] needs 0 <= r < n"
            )));
        }
        return Ok(Formula::Atom(MultAtom::PredP { r, n, term }));
    }
    let lhs = term(lx, k)?;
    match lx.bump() {
        Some(Tok::Sym('<')) => Ok(Formula::Atom(MultAtom::Less(lhs, term(lx, k)?))),
        Some(Tok::Sym('=')) => Ok(Formula::Atom(MultAtom::Eq(lhs, term(lx, k)?))),
        _ => Err(Error::SyntaxError {
            pos: lx.here(),
            msg: "expected '<' or '=' in a multiplicative atom".into(),
        }),
    }
}

fn term(lx: &mut Lexer, k: usize) -> Result<Term> {
    let mut exps = vec![0i64; k];
    factor(lx, k, &mut exps)?;
    while lx.peek() == Some(&Tok::Sym('*')) {
        lx.pos += 1;
        factor(lx, k, &mut exps)?;
    }
    Ok(Term { exps })
}

fn factor(lx: &mut Lexer, k: usize, exps: &mut [i64]) -> Result<()> {
    match lx.bump() {
        Some(Tok::Int(n)) if n == BigInt::from(1) => Ok(()),
        Some(Tok::Ident(s)) => {
            let Some(i) = z_index(&s) else {
                return Err(Error::SyntaxError {
                    pos: lx.here(),
                    msg: format!("unexpected identifier {s:?} in a term"),
                });
            };
            if i > k {
                return Err(Error::ArityError(format!(
                    "z{i} exceeds the declared variable count {k}"
                )));
            }
            let mut e = 1i64;
            if lx.peek() == Some(&Tok::Sym('^')) {
                lx.pos += 1;
                let neg = if lx.peek() == Some(&Tok::Sym('-')) {
                    lx.pos += 1;
                    true
                } else {
                    false
                };
                let mag = lx.expect_uint()? as i64;
                e = if neg { -mag } else { mag };
            }
            exps[i - 1] += e;
            Ok(())
        }
        _ => Err(Error::SyntaxError {
            pos: lx.here(),
            msg: "expected '1' or a variable in a term".into(),
        }),
    }
}
