//! Parser and decision procedure for the special-sentence fragment:
//! sentences  exists z (z_1 < ... < z_k  and  "the z_i are exactly the
//! nonzero roots of P"  and  ring part  and  multiplicative part).
//!
//! Satisfiability (in some model of the ordered-field theory at a fixed
//! characteristic) splits along the dependence pattern of the would-be root
//! tuple: a sentence is satisfiable iff for some pattern in the pattern set
//! of P, the ring side is realized by a root ordering with that pattern and
//! the ordered-group side is solvable under that pattern's congruences.
//! Both checks are exact; the group side reduces to integer congruence
//! solving plus rational Fourier-Motzkin feasibility (see [`tm`]).

pub mod oracle;
pub mod parse;
pub mod tm;

use std::fmt;

use num::{BigInt, BigRational, One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::chi::CharacterContext;
use crate::circle::CirclePoint;
use crate::cyclotomic::{CycloField, IntPoly};
use crate::depattern::{
    dependence_pattern_char0, dependence_pattern_charp, theta_char0, theta_charp, Char0Elem,
    DependencePattern, Theta, ThetaRoots,
};
use crate::error::{Error, Result};
use crate::gf::{is_prime_u64, FieldElement};
use crate::variety::MultiPoly;

/// A multiplicative-side monomial z1^e1 ... zk^ek (exponents may be
/// negative; the empty monomial is the constant 1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Term {
    pub exps: Vec<i64>,
}

impl Term {
    pub fn value(&self, points: &[CirclePoint]) -> CirclePoint {
        let mut acc = CirclePoint::zero(points.first().map_or(0, |p| p.char_p()));
        for (t, &e) in points.iter().zip(&self.exps) {
            if e != 0 {
                acc = acc.mul(&t.pow_i64(e)).expect("uniform characteristic");
            }
        }
        acc
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .exps
            .iter()
            .enumerate()
            .filter(|(_, &e)| e != 0)
            .map(|(j, &e)| {
                if e == 1 {
                    format!("z{}", j + 1)
                } else {
                    format!("z{}^{}", j + 1, e)
                }
            })
            .collect();
        if parts.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", parts.join("*"))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MultAtom {
    Less(Term, Term),
    Eq(Term, Term),
    /// P[r,n](term): term has an n-th root with winding number r.
    PredP {
        r: u64,
        n: u64,
        term: Term,
    },
}

impl fmt::Display for MultAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MultAtom::Less(a, b) => write!(f, "{a} < {b}"),
            MultAtom::Eq(a, b) => write!(f, "{a} = {b}"),
            MultAtom::PredP { r, n, term } => write!(f, "P[{r},{n}]({term})"),
        }
    }
}

/// Quantifier-free boolean structure shared by both sides.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Formula<A> {
    True,
    Atom(A),
    Not(Box<Formula<A>>),
    And(Vec<Formula<A>>),
    Or(Vec<Formula<A>>),
}

impl<A> Formula<A> {
    pub fn eval(&self, atom: &impl Fn(&A) -> bool) -> bool {
        match self {
            Formula::True => true,
            Formula::Atom(a) => atom(a),
            Formula::Not(f) => !f.eval(atom),
            Formula::And(fs) => fs.iter().all(|f| f.eval(atom)),
            Formula::Or(fs) => fs.iter().any(|f| f.eval(atom)),
        }
    }
}

fn fmt_formula<A: fmt::Display>(
    f: &Formula<A>,
    out: &mut fmt::Formatter<'_>,
    parent_and: bool,
) -> fmt::Result {
    match f {
        Formula::True => write!(out, "true"),
        Formula::Atom(a) => write!(out, "{a}"),
        Formula::Not(inner) => {
            write!(out, "not ")?;
            match **inner {
                Formula::Atom(_) | Formula::True => fmt_formula(inner, out, true),
                _ => {
                    write!(out, "(")?;
                    fmt_formula(inner, out, false)?;
                    write!(out, ")")
                }
            }
        }
        Formula::And(fs) => {
            for (i, g) in fs.iter().enumerate() {
                if i > 0 {
                    write!(out, " and ")?;
                }
                if matches!(g, Formula::Or(_)) {
                    write!(out, "(")?;
                    fmt_formula(g, out, false)?;
                    write!(out, ")")?;
                } else {
                    fmt_formula(g, out, true)?;
                }
            }
            Ok(())
        }
        Formula::Or(fs) => {
            if parent_and {
                write!(out, "(")?;
            }
            for (i, g) in fs.iter().enumerate() {
                if i > 0 {
                    write!(out, " or ")?;
                }
                fmt_formula(g, out, true)?;
            }
            if parent_and {
                write!(out, ")")?;
            }
            Ok(())
        }
    }
}

impl<A: fmt::Display> fmt::Display for Formula<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_formula(self, f, false)
    }
}

/// A special sentence: exists z1 < ... < zk which are exactly the nonzero
/// roots of P, satisfying the ring part and the multiplicative part.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecialSentence {
    pub k: usize,
    pub poly: IntPoly,
    /// Atoms are polynomials over z1..zk, read as "= 0".
    pub ring: Formula<MultiPoly>,
    pub mult: Formula<MultAtom>,
}

impl fmt::Display for SpecialSentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "exists")?;
        for i in 1..=self.k {
            write!(f, " z{i}")?;
        }
        let ring = RingDisplay(&self.ring);
        write!(
            f,
            " : roots({}) ; ring: {} ; mult: {}",
            self.poly, ring, self.mult
        )
    }
}

/// Ring atoms print as "p = 0"; a negated atom prints as "p != 0".
struct RingDisplay<'a>(&'a Formula<MultiPoly>);

impl fmt::Display for RingDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn go(
            fml: &Formula<MultiPoly>,
            out: &mut fmt::Formatter<'_>,
            parent_and: bool,
        ) -> fmt::Result {
            match fml {
                Formula::True => write!(out, "true"),
                Formula::Atom(p) => write!(out, "{} = 0", ZPoly(p)),
                Formula::Not(inner) => match &**inner {
                    Formula::Atom(p) => write!(out, "{} != 0", ZPoly(p)),
                    other => {
                        write!(out, "not (")?;
                        go(other, out, false)?;
                        write!(out, ")")
                    }
                },
                Formula::And(fs) => {
                    for (i, g) in fs.iter().enumerate() {
                        if i > 0 {
                            write!(out, " and ")?;
                        }
                        if matches!(g, Formula::Or(_)) {
                            write!(out, "(")?;
                            go(g, out, false)?;
                            write!(out, ")")?;
                        } else {
                            go(g, out, true)?;
                        }
                    }
                    Ok(())
                }
                Formula::Or(fs) => {
                    if parent_and {
                        write!(out, "(")?;
                    }
                    for (i, g) in fs.iter().enumerate() {
                        if i > 0 {
                            write!(out, " or ")?;
                        }
                        go(g, out, true)?;
                    }
                    if parent_and {
                        write!(out, ")")?;
                    }
                    Ok(())
                }
            }
        }
        go(self.0, f, false)
    }
}

/// Prints a MultiPoly with z-variables instead of x-variables.
struct ZPoly<'a>(&'a MultiPoly);

impl fmt::Display for ZPoly<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self.0.to_string().replace('x', "z");
        write!(f, "{s}")
    }
}

impl std::str::FromStr for SpecialSentence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse::parse_sentence(s)
    }
}

/// Field-side witness: the ordered root assignment.
#[derive(Debug, Clone)]
pub enum FieldWitness {
    CharP {
        chi: CharacterContext,
        elems: Vec<FieldElement>,
    },
    Char0(Vec<Char0Elem>),
}

#[derive(Debug, Clone)]
pub struct SatWitness {
    pub theta_index: usize,
    pub theta: DependencePattern,
    pub field_witness: FieldWitness,
    pub circle_witness: Vec<CirclePoint>,
}

#[derive(Debug, Clone)]
pub enum Verdict {
    Satisfiable(Box<SatWitness>),
    Unsatisfiable,
}

impl Verdict {
    pub fn is_satisfiable(&self) -> bool {
        matches!(self, Verdict::Satisfiable(_))
    }
}

/// JSON form of a verdict.
#[derive(Debug, Clone, Serialize)]
pub struct VerdictReport {
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta_index: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field_witness: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub circle_witness: Option<Vec<String>>,
}

impl Verdict {
    pub fn report(&self) -> VerdictReport {
        match self {
            Verdict::Unsatisfiable => VerdictReport {
                status: "unsatisfiable".into(),
                theta_index: None,
                theta: None,
                field_witness: None,
                circle_witness: None,
            },
            Verdict::Satisfiable(w) => VerdictReport {
                status: "satisfiable".into(),
                theta_index: Some(w.theta_index),
                theta: Some(w.theta.to_string()),
                field_witness: Some(match &w.field_witness {
                    FieldWitness::CharP { elems, .. } => {
                        elems.iter().map(|e| e.to_string()).collect()
                    }
                    FieldWitness::Char0(elems) => {
                        elems.iter().map(|e| format!("{e:?}")).collect()
                    }
                }),
                circle_witness: Some(
                    w.circle_witness.iter().map(|t| t.to_string()).collect(),
                ),
            },
        }
    }
}

/// Evaluate the ring formula at a tuple of field elements, exactly.
pub fn eval_ring_field(
    f: &Formula<MultiPoly>,
    chi: &CharacterContext,
    tuple: &[FieldElement],
) -> Result<bool> {
    let ctx = chi.field();
    let err = std::cell::RefCell::new(None);
    let v = f.eval(&|p: &MultiPoly| match p.eval_field(ctx, tuple) {
        Ok(v) => v.is_zero(),
        Err(e) => {
            *err.borrow_mut() = Some(e);
            false
        }
    });
    match err.into_inner() {
        Some(e) => Err(e),
        None => Ok(v),
    }
}

/// Evaluate the ring formula at a characteristic-zero tuple, exactly, in
/// the smallest cyclotomic field containing every coordinate.
pub fn eval_ring_char0(f: &Formula<MultiPoly>, tuple: &[Char0Elem]) -> Result<bool> {
    let mut n = 1u64;
    for c in tuple {
        let den = u64::try_from(c.torsion.den()).map_err(|_| Error::UnsupportedRepresentation)?;
        n = num::integer::lcm(n, den);
        if c.sign_negative {
            n = num::integer::lcm(n, 2);
        }
    }
    let field = CycloField::new(n);
    let values: Vec<_> = tuple
        .iter()
        .map(|c| {
            let mut rational = BigRational::one();
            for &(p, e) in &c.rational {
                let pw = BigRational::from(BigInt::from(p)).pow(e as i32);
                rational *= pw;
            }
            if c.sign_negative {
                rational = -rational;
            }
            let num = u64::try_from(c.torsion.num()).unwrap();
            let den = u64::try_from(c.torsion.den()).unwrap();
            let zeta = field.root_of_unity(num * (n / den));
            field.mul(&field.from_rational(rational), &zeta)
        })
        .collect();
    Ok(f.eval(&|p: &MultiPoly| p.eval_cyclo(&field, &values).is_zero()))
}

/// Evaluate the multiplicative formula at exact circle points.
pub fn eval_mult_circle(f: &Formula<MultAtom>, points: &[CirclePoint]) -> bool {
    f.eval(&|a: &MultAtom| match a {
        MultAtom::Less(x, y) => {
            let (xv, yv) = (x.value(points), y.value(points));
            xv.compare(&yv).expect("uniform characteristic") == std::cmp::Ordering::Less
        }
        MultAtom::Eq(x, y) => x.value(points) == y.value(points),
        MultAtom::PredP { r, n, term } => term.value(points).pred_p(*n, *r),
    })
}

/// Root-evaluation check on the algebraically-closed-field side: does some
/// ordering of the roots of P with dependence pattern theta satisfy the
/// ring formula? Returns the first satisfying assignment.
pub fn acf_check(
    theta: &DependencePattern,
    poly: &IntPoly,
    ring: &Formula<MultiPoly>,
    p: u64,
) -> Result<Option<FieldWitness>> {
    let th = compute_theta(poly, p)?;
    match th {
        None => Ok(None),
        Some(t) => acf_check_with(&t.roots, theta, ring),
    }
}

pub(crate) fn compute_theta(poly: &IntPoly, p: u64) -> Result<Option<Theta>> {
    if p == 0 {
        return theta_char0(poly).map(Some);
    }
    if !is_prime_u64(p) {
        return Err(Error::NotPrime(p));
    }
    match theta_charp(poly, p) {
        Ok(t) => Ok(Some(t)),
        // P vanishes identically mod p: the root predicate cannot pin a
        // finite tuple, so no theta branch exists
        Err(Error::ZeroPolynomial) if !poly.is_zero() => Ok(None),
        Err(e) => Err(e),
    }
}

pub(crate) fn acf_check_with(
    roots: &ThetaRoots,
    theta: &DependencePattern,
    ring: &Formula<MultiPoly>,
) -> Result<Option<FieldWitness>> {
    use itertools::Itertools;
    match roots {
        ThetaRoots::CharP { chi, roots } => {
            if roots.len() != theta.k {
                return Ok(None);
            }
            for perm in (0..roots.len()).permutations(roots.len()) {
                let tuple: Vec<FieldElement> =
                    perm.iter().map(|&j| roots[j].clone()).collect();
                if dependence_pattern_charp(chi, &tuple)? == *theta
                    && eval_ring_field(ring, chi, &tuple)?
                {
                    return Ok(Some(FieldWitness::CharP {
                        chi: chi.clone(),
                        elems: tuple,
                    }));
                }
            }
            Ok(None)
        }
        ThetaRoots::Char0 { roots } => {
            if roots.len() != theta.k {
                return Ok(None);
            }
            for perm in (0..roots.len()).permutations(roots.len()) {
                let tuple: Vec<Char0Elem> = perm.iter().map(|&j| roots[j].clone()).collect();
                if dependence_pattern_char0(&tuple)? == *theta
                    && eval_ring_char0(ring, &tuple)?
                {
                    return Ok(Some(FieldWitness::Char0(tuple)));
                }
            }
            Ok(None)
        }
    }
}

/// Decide satisfiability of the sentence in some model at characteristic p
/// (p prime, or 0 for the restricted characteristic-zero fragment).
/// Pattern branches run in parallel; the lowest satisfiable branch index is
/// reported.
pub fn decide_special(sentence: &SpecialSentence, p: u64) -> Result<Verdict> {
    let Some(theta) = compute_theta(&sentence.poly, p)? else {
        return Ok(Verdict::Unsatisfiable);
    };
    if theta.set.root_count != sentence.k {
        return Ok(Verdict::Unsatisfiable);
    }
    let branch = |idx: usize, pattern: &DependencePattern| -> Result<Option<SatWitness>> {
        let Some(field_witness) = acf_check_with(&theta.roots, pattern, &sentence.ring)? else {
            return Ok(None);
        };
        let Some(circle_witness) = tm::tm_check(pattern, sentence.k, &sentence.mult, p)? else {
            return Ok(None);
        };
        Ok(Some(SatWitness {
            theta_index: idx,
            theta: pattern.clone(),
            field_witness,
            circle_witness,
        }))
    };
    let found = theta
        .set
        .patterns
        .par_iter()
        .enumerate()
        .filter_map(|(i, th)| branch(i, th).transpose())
        .find_first(|_| true)
        .transpose()?;
    Ok(match found {
        Some(w) => Verdict::Satisfiable(Box::new(w)),
        None => Verdict::Unsatisfiable,
    })
}

/// Re-evaluate a satisfiable verdict against the sentence: the field-side
/// tuple must be exactly the nonzero roots of P with the right pattern and
/// ring truth, and the circle-side points must be strictly increasing,
/// satisfy the pattern congruences, and satisfy the multiplicative formula.
pub fn verify_witness(sentence: &SpecialSentence, p: u64, w: &SatWitness) -> Result<bool> {
    // circle side
    let pts = &w.circle_witness;
    if pts.len() != sentence.k {
        return Ok(false);
    }
    for pair in pts.windows(2) {
        if pair[0].compare(&pair[1])? != std::cmp::Ordering::Less {
            return Ok(false);
        }
    }
    for (&i, _) in &w.theta.relations {
        let v = w.theta.relation_vector(i).unwrap();
        let mut acc = BigRational::zero();
        for (j, c) in v.iter().enumerate() {
            acc += BigRational::from(c.clone()) * pts[j].value();
        }
        if !acc.is_integer() {
            return Ok(false);
        }
    }
    if !eval_mult_circle(&sentence.mult, pts) {
        return Ok(false);
    }
    // field side
    match &w.field_witness {
        FieldWitness::CharP { chi, elems } => {
            if elems.len() != sentence.k {
                return Ok(false);
            }
            let fp = sentence.poly.reduce_mod_p(p);
            let fe = crate::gf::poly::FePoly::from_fp_coeffs(chi.field(), &fp);
            for e in elems {
                if e.is_zero() || !chi.field().inner.raw_is_zero(&fe.eval(e.coeffs())) {
                    return Ok(false);
                }
            }
            let mut sorted: Vec<_> = elems.iter().map(|e| e.rank()).collect();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != elems.len() {
                return Ok(false);
            }
            if dependence_pattern_charp(chi, elems)? != w.theta {
                return Ok(false);
            }
            eval_ring_field(&sentence.ring, chi, elems)
        }
        FieldWitness::Char0(elems) => {
            if elems.len() != sentence.k {
                return Ok(false);
            }
            if dependence_pattern_char0(elems)? != w.theta {
                return Ok(false);
            }
            eval_ring_char0(&sentence.ring, elems)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::str::FromStr;

    #[test]
    fn parse_example_sentence() {
        let s = SpecialSentence::from_str(
            "exists z1 z2 : roots(t^2+t+1) ; ring: z1+z2 = -1 ; mult: z2 = z1*z1",
        )
        .unwrap();
        assert_eq!(s.k, 2);
        assert_eq!(s.poly, IntPoly::from_i64(&[1, 1, 1]));
    }

    #[test]
    fn parse_rejects_malformed() {
        assert!(matches!(
            SpecialSentence::from_str("exists z1 : roots() ; ring: true ; mult: true"),
            Err(Error::SyntaxError { .. })
        ));
        assert!(matches!(
            SpecialSentence::from_str(
                "exists z1 z3 : roots(t) ; ring: true ; mult: true"
            ),
            Err(Error::ArityError(_))
        ));
        assert!(matches!(
            SpecialSentence::from_str(
                "exists z1 : roots(t-1) ; ring: z2 = 0 ; mult: true"
            ),
            Err(Error::ArityError(_)) | Err(Error::SyntaxError { .. })
        ));
    }

    #[test]
    fn print_parse_round_trip_corpus() {
        let corpus = [
            "exists z1 z2 : roots(t^2+t+1) ; ring: z1+z2 = -1 ; mult: z2 = z1*z1",
            "exists z1 : roots(t-2) ; ring: true ; mult: 1 < z1",
            "exists z1 z2 : roots(t^2-1) ; ring: z1*z2 = -1 ; mult: z1 < z2 and P[0,3](z2)",
            "exists z1 z2 z3 : roots(t^3-1) ; ring: true ; mult: P[0,7](z2)",
            "exists z1 : roots(t-1) ; ring: z1 != 0 ; mult: not 1 < z1",
            "exists z1 z2 : roots(t^2-4) ; ring: z1+z2 = 0 or z1 = 2 ; mult: z1 < z2 or z2 < z1",
            "exists z1 : roots(t+3) ; ring: z1^2 - 9 = 0 ; mult: true",
            "exists z1 z2 : roots(t^2+1) ; ring: z1*z1 = -1 and z2*z2 = -1 ; mult: z1*z2 = 1",
            "exists  : roots(t-5) ; ring: true ; mult: true",
            "exists z1 : roots(2*t - 3) ; ring: 2*z1 = 3 ; mult: true",
            "exists z1 z2 : roots(t^2 - t) ; ring: true ; mult: z1^2*z2^-1 < z2",
            "exists z1 : roots(t^4-1) ; ring: true ; mult: P[1,4](z1) or (1 < z1 and z1 < z1*z1)",
            "exists z1 z2 : roots(t^2+3*t+2) ; ring: z1 - z2 != 0 ; mult: not (z1 = z2 or z2 < z1)",
            "exists z1 : roots(t - 7) ; ring: z1 = 7 ; mult: not P[0,5](z1)",
            "exists z1 z2 : roots(t^2-2) ; ring: z1*z2 + 2 = 0 ; mult: true",
            "exists z1 z2 z3 : roots(t^3 - t) ; ring: z1*z2*z3 != 1 ; mult: z1 < z2 and z2 < z3",
            "exists z1 : roots(t^2) ; ring: true ; mult: z1 = z1",
            "exists z1 : roots(-t + 1) ; ring: true ; mult: true",
            "exists z1 z2 : roots(t^2+t+1) ; ring: (z1+z2)^2 = 1 ; mult: z1^3 = 1",
            "exists z1 : roots(t-1) ; ring: true ; mult: P[2,9](z1)",
        ];
        for s in corpus {
            let parsed = SpecialSentence::from_str(s).unwrap();
            let printed = parsed.to_string();
            let reparsed = SpecialSentence::from_str(&printed)
                .unwrap_or_else(|e| panic!("reparse of {printed:?} failed: {e}"));
            assert_eq!(parsed, reparsed, "round trip of {s:?} via {printed:?}");
        }
    }

    #[test]
    fn acf_check_examples() {
        // roots of t^2+t+1 mod 7 are {2, 4}, and they sum to -1
        let s = SpecialSentence::from_str(
            "exists z1 z2 : roots(t^2+t+1) ; ring: z1+z2 = -1 ; mult: true",
        )
        .unwrap();
        let theta = compute_theta(&s.poly, 7).unwrap().unwrap();
        let mut found = false;
        for pattern in &theta.set.patterns {
            if acf_check_with(&theta.roots, pattern, &s.ring).unwrap().is_some() {
                found = true;
            }
        }
        assert!(found);

        // z1 = z2 is impossible on distinct roots
        let s2 = SpecialSentence::from_str(
            "exists z1 z2 : roots(t^2+t+1) ; ring: z1 - z2 = 0 ; mult: true",
        )
        .unwrap();
        for pattern in &theta.set.patterns {
            assert!(acf_check_with(&theta.roots, pattern, &s2.ring)
                .unwrap()
                .is_none());
        }
    }
}
