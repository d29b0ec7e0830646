//! Satisfiability of the ordered-group side: pattern congruences, the
//! strict order prefix, and a quantifier-free multiplicative formula, over
//! circle points with p-free denominators.
//!
//! Method. After disjunctive normal form expansion, every disjunct becomes
//! a system over unknowns in [0, 1): mod-1 congruences (pattern relations,
//! term definitions for auxiliary unknowns, equalities), prime-power
//! congruences from the root predicates (folded per unknown by CRT and
//! removed by the substitution u = -r + p^e v), and strict orders plus box
//! bounds. The congruences A v = rhs + w split the box into finitely many
//! integer components w; for each, Smith normal form gives the rational
//! consistency check, a particular solution with p-free denominators, and
//! an integer kernel basis; strict feasibility on the affine subspace is
//! exact-rational Fourier-Motzkin. Density of the p-free rationals in the
//! reals makes the method complete: any feasible open region of a
//! component contains a witness whose denominators avoid p, and a
//! zero-dimensional component is a single explicit point whose
//! denominators are checked directly.

use std::collections::HashMap;

use num::{BigInt, BigRational, One, Signed, Zero};

use crate::circle::CirclePoint;
use crate::depattern::DependencePattern;
use crate::error::{Error, Result};
use crate::gf::Budget;

use super::{eval_mult_circle, Formula, MultAtom, Term};

const DNF_CAP: usize = 4096;
const NEGATED_PRED_CAP: u64 = 4096;

/// Positive atoms after normalization: the predicate keeps only its
/// p-power part (the part coprime to p is vacuous).
#[derive(Debug, Clone)]
enum PosAtom {
    Less(Term, Term),
    Eq(Term, Term),
    Pred { e: u32, r: u64, term: Term },
}

fn p_power_part(n: u64, p: u64) -> (u32, u64) {
    let mut e = 0u32;
    let mut q = 1u64;
    let mut rest = n;
    if p != 0 {
        while rest % p == 0 {
            rest /= p;
            e += 1;
            q *= p;
        }
    }
    (e, q)
}

/// DNF of the formula (or its negation), with predicate rewrites applied.
fn dnf(f: &Formula<MultAtom>, p: u64, neg: bool) -> Result<Vec<Vec<PosAtom>>> {
    let cap_check = |v: &Vec<Vec<PosAtom>>| -> Result<()> {
        if v.len() > DNF_CAP {
            return Err(Error::SizeCapExceeded(
                "disjunctive normal form exceeds the cap".into(),
            ));
        }
        Ok(())
    };
    let out = match f {
        Formula::True => {
            if neg {
                vec![]
            } else {
                vec![vec![]]
            }
        }
        Formula::Not(g) => dnf(g, p, !neg)?,
        Formula::And(gs) if !neg => cross(gs.iter().map(|g| dnf(g, p, false)).collect::<Result<Vec<_>>>()?)?,
        Formula::And(gs) => concat(gs.iter().map(|g| dnf(g, p, true)).collect::<Result<Vec<_>>>()?),
        Formula::Or(gs) if !neg => concat(gs.iter().map(|g| dnf(g, p, false)).collect::<Result<Vec<_>>>()?),
        Formula::Or(gs) => cross(gs.iter().map(|g| dnf(g, p, true)).collect::<Result<Vec<_>>>()?)?,
        Formula::Atom(a) => match (a, neg) {
            (MultAtom::Less(x, y), false) => vec![vec![PosAtom::Less(x.clone(), y.clone())]],
            (MultAtom::Less(x, y), true) => vec![
                vec![PosAtom::Eq(x.clone(), y.clone())],
                vec![PosAtom::Less(y.clone(), x.clone())],
            ],
            (MultAtom::Eq(x, y), false) => vec![vec![PosAtom::Eq(x.clone(), y.clone())]],
            (MultAtom::Eq(x, y), true) => vec![
                vec![PosAtom::Less(x.clone(), y.clone())],
                vec![PosAtom::Less(y.clone(), x.clone())],
            ],
            (MultAtom::PredP { r, n, term }, negated) => {
                let (e, q) = p_power_part(*n, p);
                if e == 0 {
                    // the predicate holds of everything
                    if negated {
                        vec![]
                    } else {
                        vec![vec![]]
                    }
                } else if !negated {
                    vec![vec![PosAtom::Pred { e, r: r % q, term: term.clone() }]]
                } else {
                    // exactly one residue holds, so the complement is the
                    // disjunction over the other residues of the p-part
                    if q > NEGATED_PRED_CAP {
                        return Err(Error::SizeCapExceeded(
                            "negated predicate fan-out exceeds the cap".into(),
                        ));
                    }
                    (0..q)
                        .filter(|s| *s != r % q)
                        .map(|s| vec![PosAtom::Pred { e, r: s, term: term.clone() }])
                        .collect()
                }
            }
        },
    };
    cap_check(&out)?;
    Ok(out)
}

fn concat(parts: Vec<Vec<Vec<PosAtom>>>) -> Vec<Vec<PosAtom>> {
    parts.into_iter().flatten().collect()
}

fn cross(parts: Vec<Vec<Vec<PosAtom>>>) -> Result<Vec<Vec<PosAtom>>> {
    let mut acc: Vec<Vec<PosAtom>> = vec![vec![]];
    for part in parts {
        let mut next = vec![];
        for a in &acc {
            for b in &part {
                let mut row = a.clone();
                row.extend(b.iter().cloned());
                next.push(row);
            }
        }
        if next.len() > DNF_CAP {
            return Err(Error::SizeCapExceeded(
                "disjunctive normal form exceeds the cap".into(),
            ));
        }
        acc = next;
    }
    Ok(acc)
}

/// One conjunctive system over unknowns u in [0,1)^n (the first k are the
/// sentence variables, the rest auxiliary term values).
struct System {
    k: usize,
    n: usize,
    /// c . u = rhs (mod 1)
    congruences: Vec<(Vec<BigInt>, BigInt)>,
    /// u_i = -r (mod p^e), in the localized sense
    padic: Vec<(usize, u32, u64)>,
    /// strict u_a < u_b
    orders: Vec<(usize, usize)>,
}

struct SystemBuilder {
    aux: HashMap<Vec<i64>, usize>,
    sys: System,
}

impl SystemBuilder {
    fn new(k: usize) -> Self {
        SystemBuilder {
            aux: HashMap::new(),
            sys: System { k, n: k, congruences: vec![], padic: vec![], orders: vec![] },
        }
    }

    /// Index of the unknown carrying the term's value; bare variables map
    /// to themselves, everything else gets a defining congruence.
    fn term_index(&mut self, t: &Term) -> usize {
        if let Some(j) = single_var(t) {
            return j;
        }
        if let Some(&i) = self.aux.get(&t.exps) {
            return i;
        }
        let idx = self.sys.n;
        self.sys.n += 1;
        self.aux.insert(t.exps.clone(), idx);
        // aux - sum e_j z_j = 0 (mod 1); coefficients are extended lazily,
        // so record with the current width and pad at the end
        let mut coeffs = vec![BigInt::zero(); idx + 1];
        for (j, &e) in t.exps.iter().enumerate() {
            coeffs[j] = BigInt::from(-e);
        }
        coeffs[idx] = BigInt::one();
        self.sys.congruences.push((coeffs, BigInt::zero()));
        idx
    }

    fn finish(mut self) -> System {
        let n = self.sys.n;
        for (c, _) in self.sys.congruences.iter_mut() {
            c.resize(n, BigInt::zero());
        }
        self.sys
    }
}

fn single_var(t: &Term) -> Option<usize> {
    let mut found = None;
    for (j, &e) in t.exps.iter().enumerate() {
        match e {
            0 => {}
            1 if found.is_none() => found = Some(j),
            _ => return None,
        }
    }
    found
}

fn build_system(
    theta: &DependencePattern,
    k: usize,
    atoms: &[PosAtom],
) -> System {
    let mut b = SystemBuilder::new(k);
    // pattern congruences over the sentence variables
    for (&i, _) in &theta.relations {
        let v = theta.relation_vector(i).unwrap();
        let mut coeffs = vec![BigInt::zero(); k];
        coeffs[..v.len()].clone_from_slice(&v);
        b.sys.congruences.push((coeffs, BigInt::zero()));
    }
    // the order prefix z1 < z2 < ... < zk
    for i in 1..k {
        b.sys.orders.push((i - 1, i));
    }
    for atom in atoms {
        match atom {
            PosAtom::Less(x, y) => {
                let a = b.term_index(x);
                let c = b.term_index(y);
                b.sys.orders.push((a, c));
            }
            PosAtom::Eq(x, y) => {
                let mut coeffs = vec![BigInt::zero(); b.sys.n.max(k)];
                for (j, (&ex, &ey)) in x.exps.iter().zip(&y.exps).enumerate() {
                    coeffs[j] = BigInt::from(ex - ey);
                }
                b.sys.congruences.push((coeffs, BigInt::zero()));
            }
            PosAtom::Pred { e, r, term } => {
                let idx = b.term_index(term);
                b.sys.padic.push((idx, *e, *r));
            }
        }
    }
    b.finish()
}

/// Decide one conjunctive system; returns values for the first k unknowns.
fn solve_system(sys: &System, p: u64, budget: &Budget) -> Result<Option<Vec<BigRational>>> {
    let n = sys.n;
    // fold the p-power congruences per unknown by CRT
    let mut merged: HashMap<usize, (u32, u64)> = HashMap::new();
    for &(idx, e, r) in &sys.padic {
        debug_assert!(p > 1);
        let q = p.pow(e);
        let r = r % q;
        match merged.get(&idx).copied() {
            None => {
                merged.insert(idx, (e, r));
            }
            Some((e0, r0)) => {
                let (lo_e, lo_r, hi_e, hi_r) =
                    if e0 <= e { (e0, r0, e, r) } else { (e, r, e0, r0) };
                if hi_r % p.pow(lo_e) != lo_r {
                    return Ok(None); // incompatible residues
                }
                merged.insert(idx, (hi_e, hi_r));
            }
        }
    }
    // substitution u_j = s_j + m_j v_j
    let mut shift = vec![BigInt::zero(); n];
    let mut scale = vec![BigInt::one(); n];
    for (&idx, &(e, r)) in &merged {
        shift[idx] = -BigInt::from(r);
        scale[idx] = BigInt::from(p.pow(e));
    }
    // congruences over v
    let a_mat: Vec<Vec<BigInt>> = sys
        .congruences
        .iter()
        .map(|(c, _)| c.iter().zip(&scale).map(|(ci, mi)| ci * mi).collect())
        .collect();
    let rhs: Vec<BigInt> = sys
        .congruences
        .iter()
        .map(|(c, b)| b - c.iter().zip(&shift).map(|(ci, si)| ci * si).sum::<BigInt>())
        .collect();
    // v-box: u in [0,1) gives v_j in [-s_j/m_j, (1-s_j)/m_j)
    let lo: Vec<BigRational> = (0..n)
        .map(|j| BigRational::new(-shift[j].clone(), scale[j].clone()))
        .collect();
    let hi: Vec<BigRational> = (0..n)
        .map(|j| BigRational::new(BigInt::one() - &shift[j], scale[j].clone()))
        .collect();
    // integer component ranges per congruence row
    let mut ranges: Vec<(BigInt, BigInt)> = vec![];
    for (row, b) in a_mat.iter().zip(&rhs) {
        let mut min = BigRational::zero();
        let mut max = BigRational::zero();
        for (j, c) in row.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let cr = BigRational::from(c.clone());
            let (a, bnd) = (&cr * &lo[j], &cr * &hi[j]);
            if a <= bnd {
                min += a;
                max += bnd;
            } else {
                min += bnd;
                max += a;
            }
        }
        let b = BigRational::from(b.clone());
        ranges.push(((&min - &b).ceil().to_integer(), (&max - &b).floor().to_integer()));
    }
    let mut total = num::BigUint::one();
    for (lo_w, hi_w) in &ranges {
        if hi_w < lo_w {
            return Ok(None);
        }
        total *= (hi_w - lo_w + 1u32).to_biguint().unwrap();
        if total > num::BigUint::from(budget.component_cap) {
            return Err(Error::SizeCapExceeded(
                "congruence component enumeration exceeds the cap".into(),
            ));
        }
    }
    let snf = if a_mat.is_empty() {
        // no congruences: the kernel is everything
        crate::linalg::Snf { u: vec![], v: crate::linalg::identity(n), d: vec![] }
    } else {
        crate::linalg::smith(&a_mat)
    };
    let diag = snf.diag();
    let rank = snf.rank();
    let rows = a_mat.len();
    // kernel basis of A over Z
    let kernel: Vec<Vec<BigInt>> = (rank..n)
        .map(|j| (0..n).map(|i| snf.v[i][j].clone()).collect())
        .collect();
    // enumerate components in lexicographic order
    let mut w: Vec<BigInt> = ranges.iter().map(|(l, _)| l.clone()).collect();
    loop {
        if let Some(sol) = try_component(sys, &snf, &diag, rank, &a_mat, &rhs, &w, &kernel, &lo, &hi, &shift, &scale, p)? {
            return Ok(Some(sol));
        }
        // odometer
        let mut i = rows;
        loop {
            if i == 0 {
                return Ok(None);
            }
            i -= 1;
            w[i] += 1;
            if w[i] <= ranges[i].1 {
                break;
            }
            w[i] = ranges[i].0.clone();
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn try_component(
    sys: &System,
    snf: &crate::linalg::Snf,
    diag: &[BigInt],
    rank: usize,
    a_mat: &[Vec<BigInt>],
    rhs: &[BigInt],
    w: &[BigInt],
    kernel: &[Vec<BigInt>],
    lo: &[BigRational],
    hi: &[BigRational],
    shift: &[BigInt],
    scale: &[BigInt],
    p: u64,
) -> Result<Option<Vec<BigRational>>> {
    let n = sys.n;
    let rows = a_mat.len();
    // target c = rhs + w; solve A v = c
    let c: Vec<BigInt> = rhs.iter().zip(w).map(|(b, wi)| b + wi).collect();
    let uc = crate::linalg::mat_vec(&snf.u, &c);
    // rational + p-adic consistency on the diagonal
    let mut y = vec![BigRational::zero(); n];
    for i in 0..rows {
        if i < rank {
            let d = &diag[i];
            if p != 0 {
                // p-part of d must divide (Uc)_i so the solution stays p-free
                let mut pa = BigInt::one();
                let mut dd = d.clone();
                let pb = BigInt::from(p);
                while (&dd % &pb).is_zero() {
                    pa *= &pb;
                    dd /= &pb;
                }
                if !(&uc[i] % &pa).is_zero() {
                    return Ok(None);
                }
            }
            y[i] = BigRational::new(uc[i].clone(), d.clone());
        } else if !uc[i].is_zero() {
            return Ok(None);
        }
    }
    // particular solution v0 = V y (free coordinates zero)
    let v0: Vec<BigRational> = (0..n)
        .map(|i| {
            (0..rank)
                .map(|j| BigRational::from(snf.v[i][j].clone()) * &y[j])
                .sum()
        })
        .collect();
    // inequalities over v: orders (strict) and the box (weak lower, strict upper)
    struct VRow {
        coeffs: Vec<BigRational>,
        rhs: BigRational,
        strict: bool,
    }
    let mut vrows: Vec<VRow> = vec![];
    for &(a, b) in &sys.orders {
        // u_a < u_b: m_a v_a - m_b v_b < s_b - s_a
        let mut coeffs = vec![BigRational::zero(); n];
        coeffs[a] += BigRational::from(scale[a].clone());
        coeffs[b] -= BigRational::from(scale[b].clone());
        vrows.push(VRow {
            coeffs,
            rhs: BigRational::from(&shift[b] - &shift[a]),
            strict: true,
        });
    }
    for j in 0..n {
        let mut low = vec![BigRational::zero(); n];
        low[j] = BigRational::from(BigInt::from(-1));
        vrows.push(VRow { coeffs: low, rhs: -lo[j].clone(), strict: false });
        let mut up = vec![BigRational::zero(); n];
        up[j] = BigRational::one();
        vrows.push(VRow { coeffs: up, rhs: hi[j].clone(), strict: true });
    }
    // restrict to the affine subspace v = v0 + K^T t
    let dims = kernel.len();
    let lrows: Vec<Ineq> = vrows
        .iter()
        .map(|r| {
            let coeffs: Vec<BigRational> = kernel
                .iter()
                .map(|kv| {
                    r.coeffs
                        .iter()
                        .zip(kv)
                        .map(|(c, ki)| c * BigRational::from(ki.clone()))
                        .sum()
                })
                .collect();
            let base: BigRational = r.coeffs.iter().zip(&v0).map(|(c, v)| c * v).sum();
            Ineq { coeffs, rhs: &r.rhs - &base, strict: r.strict }
        })
        .collect();
    let Some(lambda) = fm_witness(lrows, dims, p) else {
        return Ok(None);
    };
    // assemble u and check p-free denominators (can only fail on
    // zero-dimensional components pinned to a non-localizable point)
    let mut result = Vec::with_capacity(sys.k);
    for j in 0..sys.k {
        let mut v = v0[j].clone();
        for (kv, l) in kernel.iter().zip(&lambda) {
            v += BigRational::from(kv[j].clone()) * l;
        }
        let u = BigRational::from(shift[j].clone()) + BigRational::from(scale[j].clone()) * v;
        if p != 0 && (u.denom() % BigInt::from(p)).is_zero() {
            return Ok(None);
        }
        result.push(u);
    }
    Ok(Some(result))
}

#[derive(Clone, Debug)]
struct Ineq {
    coeffs: Vec<BigRational>,
    rhs: BigRational,
    strict: bool,
}

/// Exact Fourier-Motzkin: feasibility of the system and a rational witness
/// whose denominators avoid p, chosen strictly inside open regions.
fn fm_witness(rows: Vec<Ineq>, dims: usize, p: u64) -> Option<Vec<BigRational>> {
    // systems[d] involves variables 0..d
    let mut systems: Vec<Vec<Ineq>> = Vec::with_capacity(dims + 1);
    systems.push(rows);
    for d in (1..=dims).rev() {
        let cur = systems.last().unwrap();
        let mut uppers: Vec<(Vec<BigRational>, BigRational, bool)> = vec![];
        let mut lowers: Vec<(Vec<BigRational>, BigRational, bool)> = vec![];
        let mut rest: Vec<Ineq> = vec![];
        for r in cur {
            let c = &r.coeffs[d - 1];
            if c.is_zero() {
                rest.push(Ineq {
                    coeffs: r.coeffs[..d - 1].to_vec(),
                    rhs: r.rhs.clone(),
                    strict: r.strict,
                });
            } else {
                // lambda_d (<|<=) (rhs - rest)/c  with flip on negative c
                let inv = c.recip();
                let coeffs: Vec<BigRational> = r.coeffs[..d - 1]
                    .iter()
                    .map(|x| -(x * &inv))
                    .collect();
                let bound_rhs = &r.rhs * &inv;
                if c.is_positive() {
                    uppers.push((coeffs, bound_rhs, r.strict));
                } else {
                    lowers.push((coeffs, bound_rhs, r.strict));
                }
            }
        }
        for (lc, lrhs, lstrict) in &lowers {
            for (uc, urhs, ustrict) in &uppers {
                // lower bound expr < upper bound expr
                let coeffs: Vec<BigRational> =
                    lc.iter().zip(uc).map(|(a, b)| a - b).collect();
                let rhs = urhs - lrhs;
                rest.push(Ineq { coeffs, rhs, strict: *lstrict || *ustrict });
            }
        }
        systems.push(rest);
    }
    // constant system feasibility
    for r in systems.last().unwrap() {
        if r.strict {
            if !r.rhs.is_positive() {
                return None;
            }
        } else if r.rhs.is_negative() {
            return None;
        }
    }
    // back-substitute, innermost variable first
    let mut assignment: Vec<BigRational> = vec![];
    for d in 1..=dims {
        let sys = &systems[dims - d];
        let mut lo: Option<(BigRational, bool)> = None;
        let mut hi: Option<(BigRational, bool)> = None;
        for r in sys {
            let c = &r.coeffs[d - 1];
            if c.is_zero() {
                continue;
            }
            let mut bound = r.rhs.clone();
            for (j, x) in r.coeffs[..d - 1].iter().enumerate() {
                bound -= x * &assignment[j];
            }
            bound *= c.recip();
            if c.is_positive() {
                // lambda_d (<|<=) bound
                if hi.as_ref().is_none_or(|(b, s)| {
                    bound < *b || (bound == *b && r.strict && !s)
                }) {
                    hi = Some((bound, r.strict));
                }
            } else {
                // lambda_d (>|>=) bound
                if lo.as_ref().is_none_or(|(b, s)| {
                    bound > *b || (bound == *b && r.strict && !s)
                }) {
                    lo = Some((bound, r.strict));
                }
            }
        }
        assignment.push(pick_rational(&lo, &hi, p)?);
    }
    Some(assignment)
}

/// A rational strictly between the bounds (inclusive where weak), with a
/// denominator coprime to p.
fn pick_rational(
    lo: &Option<(BigRational, bool)>,
    hi: &Option<(BigRational, bool)>,
    p: u64,
) -> Option<BigRational> {
    match (lo, hi) {
        (None, None) => Some(BigRational::zero()),
        (None, Some((h, _))) => Some(BigRational::from(h.floor().to_integer() - 1)),
        (Some((l, _)), None) => Some(BigRational::from(l.floor().to_integer() + 1)),
        (Some((l, ls)), Some((h, hs))) => {
            if l > h {
                return None;
            }
            if l == h {
                if *ls || *hs {
                    return None;
                }
                return Some(l.clone()); // single point; p-freeness checked later
            }
            let width = h - l;
            let s = BigInt::from(if p == 2 { 3u64 } else { 2 });
            let mut den = BigInt::one();
            while BigRational::new(BigInt::from(2), den.clone()) >= width {
                den *= &s;
            }
            let c = (l * BigRational::from(den.clone())).floor().to_integer() + 1;
            Some(BigRational::new(c, den))
        }
    }
}

/// Satisfiability of the ordered-group side under the pattern's
/// congruences: exists z_1 < ... < z_k in the circle (p-free denominators)
/// satisfying theta and the formula. Returns a verified witness.
pub fn tm_check(
    theta: &DependencePattern,
    k: usize,
    mult: &Formula<MultAtom>,
    p: u64,
) -> Result<Option<Vec<CirclePoint>>> {
    let budget = Budget::default();
    let disjuncts = dnf(mult, p, false)?;
    for atoms in &disjuncts {
        let sys = build_system(theta, k, atoms);
        if let Some(values) = solve_system(&sys, p, &budget)? {
            let points: Vec<CirclePoint> = values
                .iter()
                .map(|u| CirclePoint::from_rational(u, p))
                .collect::<Result<Vec<_>>>()?;
            // defense in depth: the witness must satisfy everything
            debug_assert!(eval_mult_circle(mult, &points));
            debug_assert!(check_theta_on(theta, &points));
            return Ok(Some(points));
        }
    }
    Ok(None)
}

pub(crate) fn check_theta_on(theta: &DependencePattern, points: &[CirclePoint]) -> bool {
    for (&i, _) in &theta.relations {
        let v = theta.relation_vector(i).unwrap();
        let mut acc = BigRational::zero();
        for (j, c) in v.iter().enumerate() {
            acc += BigRational::from(c.clone()) * points[j].value();
        }
        if !acc.is_integer() {
            return false;
        }
    }
    true
}
