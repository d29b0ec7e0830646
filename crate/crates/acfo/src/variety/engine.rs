//! Per-level evaluation engine. A level's field is small by construction
//! (enumeration caps), so the whole unit group is tabulated once:
//! `antilog[i]` is the rank of G^i, `log[rank]` inverts it, and the Zech
//! table `zech[i] = log(1 + G^i)` turns polynomial evaluation into pure
//! index arithmetic. The log table doubles as the discrete-log table, so
//! character values of enumerated points come for free.
//!
//! Tuple enumeration is chunked with a fixed chunk size and partial results
//! are merged in chunk order, which makes every fold bit-identical across
//! thread counts.

use rayon::prelude::*;

use crate::chi::CharacterContext;
use crate::error::{Error, Result};
use crate::gf::FieldElement;

use super::mpoly::MultiPoly;

/// Sentinel log value for the zero element.
pub const LOG_ZERO: u64 = u64::MAX;

const CHUNK: u64 = 1 << 14;

pub struct LevelEngine {
    pub chi: CharacterContext,
    pub size: u64,
    pub n_units: u64,
    /// rank -> dlog (LOG_ZERO for the zero element's rank)
    pub log: Vec<u64>,
    /// dlog -> rank
    pub antilog: Vec<u32>,
    /// dlog i -> dlog(1 + G^i), LOG_ZERO when 1 + G^i = 0
    pub zech: Vec<u64>,
}

impl LevelEngine {
    pub fn new(chi: CharacterContext) -> Result<Self> {
        let field = chi.field().clone();
        let size = field.size();
        let budget = *field.budget();
        if size > budget.dlog_table_cap {
            return Err(Error::SizeCapExceeded(format!(
                "level field of size {size} exceeds the table budget {}",
                budget.dlog_table_cap
            )));
        }
        let n = field.order();
        let mut log = vec![LOG_ZERO; size as usize];
        let mut antilog = vec![0u32; n as usize];
        let mut cur = field.one();
        for i in 0..n {
            let rank = cur.rank();
            log[rank as usize] = i;
            antilog[i as usize] = rank as u32;
            cur = cur.mul(&field.generator()).expect("same context");
        }
        // zech[i] = log(1 + G^i): add 1 to the element of each rank
        let one = field.one();
        let mut zech = vec![LOG_ZERO; n as usize];
        for i in 0..n {
            let elem = field.element_from_rank(antilog[i as usize] as u64);
            let s = elem.add(&one).expect("same context");
            if !s.is_zero() {
                zech[i as usize] = log[s.rank() as usize];
            }
        }
        Ok(LevelEngine { chi, size, n_units: n, log, antilog, zech })
    }

    pub fn order(&self) -> u64 {
        self.n_units
    }

    /// log(a + b) for log-domain values (LOG_ZERO encodes 0).
    #[inline]
    pub fn log_add(&self, a: u64, b: u64) -> u64 {
        if a == LOG_ZERO {
            return b;
        }
        if b == LOG_ZERO {
            return a;
        }
        let n = self.n_units;
        let d = if b >= a { b - a } else { b + n - a };
        let z = self.zech[d as usize];
        if z == LOG_ZERO {
            LOG_ZERO
        } else {
            let s = a + z;
            if s >= n {
                s - n
            } else {
                s
            }
        }
    }

    /// Compile a polynomial for log-domain evaluation at this level.
    pub fn compile(&self, poly: &MultiPoly) -> CompiledPoly {
        let p = self.chi.p();
        let field = self.chi.field();
        let mut terms = vec![];
        for (exps, coeff) in poly.terms() {
            let c = {
                use num::Integer;
                u64::try_from(&coeff.mod_floor(&num::BigInt::from(p))).unwrap()
            };
            if c == 0 {
                continue;
            }
            let elem = field.from_int(c as i64);
            let lc = self.log[elem.rank() as usize];
            debug_assert_ne!(lc, LOG_ZERO);
            terms.push((lc, exps.clone()));
        }
        CompiledPoly { terms }
    }

    /// Evaluate a compiled polynomial at a point given by coordinate logs.
    /// Returns the log of the value (LOG_ZERO for the value 0).
    #[inline]
    pub fn eval_log(&self, poly: &CompiledPoly, logs: &[u64]) -> u64 {
        let n = self.n_units as u128;
        let mut acc = LOG_ZERO;
        'terms: for (lc, exps) in &poly.terms {
            let mut t = *lc as u128;
            for (i, &e) in exps.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let lx = logs[i];
                if lx == LOG_ZERO {
                    continue 'terms; // a zero coordinate kills the term
                }
                t += lx as u128 * e as u128;
            }
            acc = self.log_add(acc, (t % n) as u64);
        }
        acc
    }

    pub fn element_of_log(&self, log: u64) -> FieldElement {
        debug_assert_ne!(log, LOG_ZERO);
        self.chi
            .field()
            .element_from_rank(self.antilog[log as usize] as u64)
    }
}

#[derive(Debug, Clone)]
pub struct CompiledPoly {
    /// (log of coefficient, exponent vector)
    terms: Vec<(u64, Vec<u32>)>,
}

/// A visited point of the constructible set: coordinate ranks and logs.
pub struct PointView<'a> {
    pub ranks: &'a [u64],
    pub logs: &'a [u64],
}

pub struct ScanSpec {
    pub m: usize,
    pub torus_only: bool,
    pub eqs: Vec<CompiledPoly>,
    pub neqs: Vec<CompiledPoly>,
}

impl LevelEngine {
    /// Number of tuples a scan will visit.
    pub fn tuple_count(&self, m: usize, torus_only: bool) -> u128 {
        let domain = if torus_only { self.n_units } else { self.size } as u128;
        domain.pow(m as u32)
    }

    /// Fold over the points of Z(eqs) \ Z(neqs) in deterministic
    /// coefficient-lexicographic tuple order (first coordinate most
    /// significant). `step` sees every point that passes the equations;
    /// partial chunk states are merged in chunk order.
    pub fn scan_fold<A, I, F, M>(&self, spec: &ScanSpec, init: I, step: F, merge: M) -> Result<A>
    where
        A: Send,
        I: Fn() -> A + Sync,
        F: Fn(&mut A, &PointView<'_>) + Sync,
        M: Fn(A, A) -> A,
    {
        let total = self.tuple_count(spec.m, spec.torus_only);
        let budget = self.chi.field().budget();
        if total > budget.enum_tuple_cap {
            return Err(Error::SizeCapExceeded(format!(
                "enumeration of {total} tuples exceeds the cap {}",
                budget.enum_tuple_cap
            )));
        }
        let total = total as u64;
        let n_chunks = total.div_ceil(CHUNK).max(1);
        let domain = if spec.torus_only { self.n_units } else { self.size };
        let offset = if spec.torus_only { 1u64 } else { 0 };
        let m = spec.m;

        let partials: Vec<A> = (0..n_chunks)
            .into_par_iter()
            .map(|chunk| {
                let start = chunk * CHUNK;
                let end = (start + CHUNK).min(total);
                let mut acc = init();
                // decode start index into digits (first coordinate most significant)
                let mut digits = vec![0u64; m];
                let mut idx = start;
                for d in (0..m).rev() {
                    digits[d] = idx % domain;
                    idx /= domain;
                }
                let mut ranks = vec![0u64; m];
                let mut logs = vec![0u64; m];
                for (d, &dig) in digits.iter().enumerate() {
                    ranks[d] = dig + offset;
                }
                for t in start..end {
                    for d in 0..m {
                        logs[d] = self.log[ranks[d] as usize];
                    }
                    let keep = spec
                        .eqs
                        .iter()
                        .all(|p| self.eval_log(p, &logs) == LOG_ZERO)
                        && (spec.neqs.is_empty()
                            || spec
                                .neqs
                                .iter()
                                .any(|p| self.eval_log(p, &logs) != LOG_ZERO));
                    if keep {
                        step(&mut acc, &PointView { ranks: &ranks, logs: &logs });
                    }
                    // odometer (last coordinate varies fastest)
                    if t + 1 < end {
                        let mut d = m;
                        loop {
                            d -= 1;
                            digits[d] += 1;
                            if digits[d] < domain {
                                ranks[d] = digits[d] + offset;
                                break;
                            }
                            digits[d] = 0;
                            ranks[d] = offset;
                        }
                    }
                }
                acc
            })
            .collect();
        Ok(partials.into_iter().fold(init(), merge))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zech_tables_match_field_arithmetic() {
        let chi = CharacterContext::create(3, 2).unwrap();
        let engine = LevelEngine::new(chi.clone()).unwrap();
        let field = chi.field();
        for i in 0..engine.n_units {
            for j in 0..engine.n_units {
                let a = field.element_from_rank(engine.antilog[i as usize] as u64);
                let b = field.element_from_rank(engine.antilog[j as usize] as u64);
                let s = a.add(&b).unwrap();
                let expected = if s.is_zero() {
                    LOG_ZERO
                } else {
                    field.dlog(&s).unwrap()
                };
                assert_eq!(engine.log_add(i, j), expected, "i={i} j={j}");
            }
        }
    }

    #[test]
    fn compiled_eval_matches_exact_eval() {
        let chi = CharacterContext::create(5, 1).unwrap();
        let engine = LevelEngine::new(chi.clone()).unwrap();
        let poly = MultiPoly::parse("2*x1^2 - x2 + 3", 'x', 2).unwrap();
        let compiled = engine.compile(&poly);
        let field = chi.field();
        for r1 in 0..5 {
            for r2 in 0..5 {
                let logs = [engine.log[r1 as usize], engine.log[r2 as usize]];
                let got = engine.eval_log(&compiled, &logs);
                let exact = poly
                    .eval_field(
                        field,
                        &[field.element_from_rank(r1), field.element_from_rank(r2)],
                    )
                    .unwrap();
                if exact.is_zero() {
                    assert_eq!(got, LOG_ZERO);
                } else {
                    assert_eq!(got, field.dlog(&exact).unwrap());
                }
            }
        }
    }

    #[test]
    fn scan_order_is_deterministic_and_complete() {
        let chi = CharacterContext::create(3, 1).unwrap();
        let engine = LevelEngine::new(chi).unwrap();
        let spec = ScanSpec {
            m: 2,
            torus_only: true,
            eqs: vec![],
            neqs: vec![],
        };
        let collect = engine
            .scan_fold(
                &spec,
                Vec::new,
                |acc, pt| acc.push(pt.ranks.to_vec()),
                |mut a, b| {
                    a.extend(b);
                    a
                },
            )
            .unwrap();
        assert_eq!(
            collect,
            vec![vec![1, 1], vec![1, 2], vec![2, 1], vec![2, 2]]
        );
    }
}
