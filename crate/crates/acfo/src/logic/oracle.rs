//! Independent oracles for the decision procedure.
//!
//! The bounded circle search enumerates candidate tuples over denominators
//! p^n - 1 directly; finding a witness proves satisfiability of the group
//! side (the converse direction is not decided by the bound).
//!
//! The standard-model search is conclusive: every atom of a special
//! sentence evaluates inside the splitting field of P and its character
//! values, and the restrictions of characters to that level are exactly the
//! dlog-rescalings by units. Scanning all rescalings therefore decides
//! truth in SOME standard model exactly, whenever the splitting level is
//! within the cap.



use crate::chi::CharacterContext;
use crate::circle::CirclePoint;
use crate::depattern::DependencePattern;
use crate::error::{Error, Result};
use crate::gf::{fppoly, FieldContext, FieldElement};

use super::tm::check_theta_on;
use super::{eval_mult_circle, eval_ring_field, Formula, MultAtom, SpecialSentence};

/// Search circle tuples with denominators dividing p^n - 1, n <= max_level,
/// for the pattern + order prefix + formula. A returned witness is sound;
/// exhaustion of the bound proves nothing.
pub fn tm_brute_force(
    theta: &DependencePattern,
    k: usize,
    mult: &Formula<MultAtom>,
    p: u64,
    max_level: u32,
) -> Result<Option<Vec<CirclePoint>>> {
    for n in 1..=max_level {
        let den = p
            .checked_pow(n)
            .and_then(|q| q.checked_sub(1))
            .ok_or_else(|| Error::SizeCapExceeded("brute-force denominator overflow".into()))?;
        if den == 0 {
            continue;
        }
        let total = (den as u128).pow(k as u32);
        if total > 200_000_000 {
            return Err(Error::SizeCapExceeded(
                "brute-force tuple space exceeds the cap".into(),
            ));
        }
        let mut idx = vec![0u64; k];
        loop {
            // strictly increasing numerators give the order prefix for free
            let increasing = idx.windows(2).all(|w| w[0] < w[1]);
            if increasing {
                let points: Vec<CirclePoint> = idx
                    .iter()
                    .map(|&a| CirclePoint::new(a, den, p))
                    .collect::<Result<Vec<_>>>()?;
                if check_theta_on(theta, &points) && eval_mult_circle(mult, &points) {
                    return Ok(Some(points));
                }
            }
            // odometer
            let mut i = k;
            loop {
                if i == 0 {
                    break;
                }
                i -= 1;
                idx[i] += 1;
                if idx[i] < den {
                    break;
                }
                idx[i] = 0;
            }
            if idx.iter().all(|&a| a == 0) {
                break;
            }
        }
        if k == 0 {
            // the empty tuple either satisfies the formula or never will
            let points: Vec<CirclePoint> = vec![];
            if check_theta_on(theta, &points) && eval_mult_circle(mult, &points) {
                return Ok(Some(points));
            }
            return Ok(None);
        }
    }
    Ok(None)
}

#[derive(Debug, Clone)]
pub enum SearchOutcome {
    Satisfiable {
        level: u32,
        /// The unit u rescaling discrete logs: chi(a) = u * dlog(a)/(p^l - 1).
        rescaling: u64,
        field_witness: Vec<FieldElement>,
        circle_witness: Vec<CirclePoint>,
    },
    Unsatisfiable,
    /// The splitting level exceeds the cap; the search proves nothing.
    LevelTooHigh {
        needed: u32,
    },
}

impl SearchOutcome {
    pub fn conclusive(&self) -> Option<bool> {
        match self {
            SearchOutcome::Satisfiable { .. } => Some(true),
            SearchOutcome::Unsatisfiable => Some(false),
            SearchOutcome::LevelTooHigh { .. } => None,
        }
    }
}

/// Decide the sentence by scanning every standard model restricted to the
/// splitting field of P: each unit u coprime to p^l - 1 induces the
/// character a -> u*dlog(a)/(p^l - 1), and these exhaust the restrictions
/// of standard characters to that level.
pub fn standard_model_search(
    sentence: &SpecialSentence,
    p: u64,
    max_level: u32,
) -> Result<SearchOutcome> {
    if p == 0 || !crate::gf::is_prime_u64(p) {
        return Err(Error::NotPrime(p));
    }
    let fp = sentence.poly.reduce_mod_p(p);
    if fp.is_empty() {
        // P vanishes identically mod p: its zero set is everything
        return Ok(SearchOutcome::Unsatisfiable);
    }
    let fp_poly = fppoly::FpPoly { coeffs: fp };
    let mut level = 1u32;
    if fp_poly.deg() >= 1 {
        for (d, _) in fppoly::factor_degrees(&fp_poly, p) {
            level = num::integer::lcm(level as u64, d as u64) as u32;
        }
    }
    if level > max_level {
        return Ok(SearchOutcome::LevelTooHigh { needed: level });
    }
    let field = FieldContext::new(p, level)?;
    let chi = CharacterContext::new(field.clone());
    let mut roots: Vec<FieldElement> = vec![];
    if fp_poly.deg() >= 1 {
        let lifted = crate::gf::poly::FePoly::from_fp_coeffs(&field, &fp_poly.coeffs);
        for r in crate::gf::poly::roots_in_field(&lifted)? {
            if !field.inner.raw_is_zero(&r) {
                roots.push(field.element(&r)?);
            }
        }
    }
    if roots.len() != sentence.k {
        return Ok(SearchOutcome::Unsatisfiable);
    }
    if sentence.k == 0 {
        // no variables: the formulas must hold of the empty assignment
        let ring_ok = eval_ring_field(&sentence.ring, &chi, &[])?;
        let mult_ok = eval_mult_circle(&sentence.mult, &[]);
        return Ok(if ring_ok && mult_ok {
            SearchOutcome::Satisfiable {
                level,
                rescaling: 1,
                field_witness: vec![],
                circle_witness: vec![],
            }
        } else {
            SearchOutcome::Unsatisfiable
        });
    }
    let n = field.order();
    let dlogs: Vec<u64> = roots
        .iter()
        .map(|r| field.dlog(r))
        .collect::<Result<Vec<_>>>()?;
    for u in 1..n {
        if num::integer::gcd(u, n) != 1 {
            continue;
        }
        // chi_u values of the roots, sorted into the order prefix
        let mut vals: Vec<(u64, usize)> = dlogs
            .iter()
            .enumerate()
            .map(|(i, &d)| (((d as u128 * u as u128) % n as u128) as u64, i))
            .collect();
        vals.sort_unstable();
        let tuple: Vec<FieldElement> = vals.iter().map(|&(_, i)| roots[i].clone()).collect();
        let points: Vec<CirclePoint> = vals
            .iter()
            .map(|&(v, _)| CirclePoint::new(v, n, p))
            .collect::<Result<Vec<_>>>()?;
        if eval_ring_field(&sentence.ring, &chi, &tuple)?
            && eval_mult_circle(&sentence.mult, &points)
        {
            return Ok(SearchOutcome::Satisfiable {
                level,
                rescaling: u,
                field_witness: tuple,
                circle_witness: points,
            });
        }
    }
    Ok(SearchOutcome::Unsatisfiable)
}
