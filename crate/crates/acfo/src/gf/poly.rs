//! Dense univariate polynomials over an extension field, with deterministic
//! root extraction (exhaustive scan on small fields, seeded equal-degree
//! splitting above that) and minimal polynomials by conjugate products.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{FieldContext, FieldElement};
use crate::error::Result;

/// Coefficients are raw little-endian vectors in the context; no trailing
/// zero coefficients.
#[derive(Clone, Debug)]
pub struct FePoly {
    pub ctx: FieldContext,
    pub coeffs: Vec<Vec<u64>>,
}

impl FePoly {
    pub fn zero(ctx: &FieldContext) -> Self {
        FePoly { ctx: ctx.clone(), coeffs: vec![] }
    }

    pub fn from_elems(ctx: &FieldContext, elems: &[FieldElement]) -> Self {
        let mut coeffs: Vec<Vec<u64>> = elems.iter().map(|e| e.coeffs.clone()).collect();
        while coeffs.last().is_some_and(|c| ctx.inner.raw_is_zero(c)) {
            coeffs.pop();
        }
        FePoly { ctx: ctx.clone(), coeffs }
    }

    /// Lift a polynomial with F_p coefficients into the extension.
    pub fn from_fp_coeffs(ctx: &FieldContext, fp: &[u64]) -> Self {
        let l = ctx.l() as usize;
        let mut coeffs: Vec<Vec<u64>> = fp
            .iter()
            .map(|&c| {
                let mut v = vec![0u64; l];
                v[0] = c % ctx.p();
                v
            })
            .collect();
        while coeffs.last().is_some_and(|c| ctx.inner.raw_is_zero(c)) {
            coeffs.pop();
        }
        FePoly { ctx: ctx.clone(), coeffs }
    }

    pub fn x(ctx: &FieldContext) -> Self {
        let l = ctx.l() as usize;
        FePoly {
            ctx: ctx.clone(),
            coeffs: vec![vec![0; l], ctx.inner.raw_one()],
        }
    }

    pub fn constant(ctx: &FieldContext, c: &[u64]) -> Self {
        if ctx.inner.raw_is_zero(c) {
            return Self::zero(ctx);
        }
        FePoly { ctx: ctx.clone(), coeffs: vec![c.to_vec()] }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn deg(&self) -> i64 {
        self.coeffs.len() as i64 - 1
    }

    fn trim(&mut self) {
        while self
            .coeffs
            .last()
            .is_some_and(|c| self.ctx.inner.raw_is_zero(c))
        {
            self.coeffs.pop();
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let inner = &*self.ctx.inner;
        let n = self.coeffs.len().max(other.coeffs.len());
        let zero = vec![0u64; self.ctx.l() as usize];
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let a = self.coeffs.get(i).unwrap_or(&zero);
            let b = other.coeffs.get(i).unwrap_or(&zero);
            out.push(inner.raw_add(a, b));
        }
        let mut r = FePoly { ctx: self.ctx.clone(), coeffs: out };
        r.trim();
        r
    }

    pub fn sub(&self, other: &Self) -> Self {
        let inner = &*self.ctx.inner;
        let n = self.coeffs.len().max(other.coeffs.len());
        let zero = vec![0u64; self.ctx.l() as usize];
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let a = self.coeffs.get(i).unwrap_or(&zero);
            let b = other.coeffs.get(i).unwrap_or(&zero);
            out.push(inner.raw_sub(a, b));
        }
        let mut r = FePoly { ctx: self.ctx.clone(), coeffs: out };
        r.trim();
        r
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero(&self.ctx);
        }
        let inner = &*self.ctx.inner;
        let l = self.ctx.l() as usize;
        let mut out = vec![vec![0u64; l]; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if inner.raw_is_zero(a) {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                let prod = inner.raw_mul(a, b);
                out[i + j] = inner.raw_add(&out[i + j], &prod);
            }
        }
        let mut r = FePoly { ctx: self.ctx.clone(), coeffs: out };
        r.trim();
        r
    }

    pub fn rem(&self, div: &Self) -> Self {
        assert!(!div.is_zero());
        let inner = &*self.ctx.inner;
        let d = div.coeffs.len();
        let mut r = self.coeffs.clone();
        let lead_inv = inner
            .raw_inv(div.coeffs.last().unwrap())
            .expect("nonzero leading coefficient");
        while r.len() >= d {
            let q = inner.raw_mul(r.last().unwrap(), &lead_inv);
            let off = r.len() - d;
            if !inner.raw_is_zero(&q) {
                for (i, dc) in div.coeffs.iter().enumerate() {
                    let t = inner.raw_mul(&q, dc);
                    r[off + i] = inner.raw_sub(&r[off + i], &t);
                }
            }
            r.pop();
        }
        let mut out = FePoly { ctx: self.ctx.clone(), coeffs: r };
        out.trim();
        out
    }

    pub fn div_exact_by(&self, div: &Self) -> Self {
        assert!(!div.is_zero());
        let inner = &*self.ctx.inner;
        let d = div.coeffs.len();
        if self.coeffs.len() < d {
            return Self::zero(&self.ctx);
        }
        let mut r = self.coeffs.clone();
        let l = self.ctx.l() as usize;
        let mut q = vec![vec![0u64; l]; r.len() - d + 1];
        let lead_inv = inner.raw_inv(div.coeffs.last().unwrap()).unwrap();
        while r.len() >= d {
            let c = inner.raw_mul(r.last().unwrap(), &lead_inv);
            let off = r.len() - d;
            q[off] = c.clone();
            if !inner.raw_is_zero(&c) {
                for (i, dc) in div.coeffs.iter().enumerate() {
                    let t = inner.raw_mul(&c, dc);
                    r[off + i] = inner.raw_sub(&r[off + i], &t);
                }
            }
            r.pop();
        }
        let mut out = FePoly { ctx: self.ctx.clone(), coeffs: q };
        out.trim();
        out
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let inner = &*self.ctx.inner;
        let lead_inv = inner.raw_inv(self.coeffs.last().unwrap()).unwrap();
        FePoly {
            ctx: self.ctx.clone(),
            coeffs: self
                .coeffs
                .iter()
                .map(|c| inner.raw_mul(c, &lead_inv))
                .collect(),
        }
    }

    pub fn gcd(&self, other: &Self) -> Self {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Self::zero(&self.ctx);
        }
        let p = self.ctx.p();
        let out: Vec<Vec<u64>> = self.coeffs[1..]
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let k = (i as u64 + 1) % p;
                c.iter()
                    .map(|&x| ((x as u128 * k as u128) % p as u128) as u64)
                    .collect()
            })
            .collect();
        let mut r = FePoly { ctx: self.ctx.clone(), coeffs: out };
        r.trim();
        r
    }

    pub fn powmod(&self, mut e: u128, m: &Self) -> Self {
        let mut base = self.rem(m);
        let mut acc = Self::constant(&self.ctx, &self.ctx.inner.raw_one());
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base).rem(m);
            }
            base = base.mul(&base).rem(m);
            e >>= 1;
        }
        acc
    }

    pub fn eval(&self, at: &[u64]) -> Vec<u64> {
        let inner = &*self.ctx.inner;
        let mut acc = vec![0u64; self.ctx.l() as usize];
        for c in self.coeffs.iter().rev() {
            acc = inner.raw_add(&inner.raw_mul(&acc, at), c);
        }
        acc
    }
}

/// All roots of f in its field, as raw coefficient vectors sorted by
/// coefficient-lexicographic rank. Deterministic: exhaustive scan when the
/// field is small, otherwise seeded Cantor-Zassenhaus (fixed seed, output
/// sorted).
pub fn roots_in_field(f: &FePoly) -> Result<Vec<Vec<u64>>> {
    let ctx = &f.ctx;
    if f.is_zero() {
        return Err(crate::error::Error::ZeroPolynomial);
    }
    if ctx.size() <= ctx.budget().root_scan_cap {
        let mut out = vec![];
        for rank in 0..ctx.size() {
            let cand = ctx.inner.coeffs_from_rank(rank);
            if ctx.inner.raw_is_zero(&f.eval(&cand)) {
                out.push(cand);
            }
        }
        return Ok(out);
    }
    // split off the product of (x - root) factors
    let x = FePoly::x(ctx);
    let xq = x.powmod(ctx.size() as u128, &f.monic());
    let linear_part = xq.sub(&x).gcd(&f.monic());
    let mut out: Vec<Vec<u64>> = vec![];
    let mut rng = ChaCha8Rng::seed_from_u64(0xACF0_0001);
    split_linear(&linear_part, &mut rng, &mut out);
    out.sort_by_key(|c| ctx.inner.rank_of(c));
    out.dedup();
    Ok(out)
}

/// Equal-degree splitting of a monic product of distinct linear factors.
fn split_linear(g: &FePoly, rng: &mut ChaCha8Rng, out: &mut Vec<Vec<u64>>) {
    let ctx = &g.ctx;
    let inner = &*ctx.inner;
    match g.deg() {
        d if d <= 0 => {}
        1 => {
            // root of x + c0 is -c0
            let c0 = &g.monic().coeffs[0];
            out.push(inner.raw_neg(c0));
        }
        _ => {
            let g = g.monic();
            loop {
                let l = ctx.l() as usize;
                let rand_coeffs: Vec<Vec<u64>> = (0..g.deg() as usize)
                    .map(|_| (0..l).map(|_| rng.gen_range(0..ctx.p())).collect())
                    .collect();
                let h = {
                    let mut h = FePoly { ctx: ctx.clone(), coeffs: rand_coeffs };
                    h.trim();
                    h
                };
                if h.is_zero() {
                    continue;
                }
                let split = if ctx.p() == 2 {
                    // trace map over F_{2^m}
                    let mut tr = h.rem(&g);
                    let mut pw = h.rem(&g);
                    for _ in 1..ctx.l() {
                        pw = pw.mul(&pw).rem(&g);
                        tr = tr.add(&pw);
                    }
                    tr.gcd(&g)
                } else {
                    let e = (ctx.size() as u128 - 1) / 2;
                    let s = h.powmod(e, &g);
                    let one = FePoly::constant(ctx, &inner.raw_one());
                    s.sub(&one).gcd(&g)
                };
                if split.deg() > 0 && split.deg() < g.deg() {
                    let other = g.div_exact_by(&split);
                    split_linear(&split, rng, out);
                    split_linear(&other, rng, out);
                    return;
                }
            }
        }
    }
}

/// Minimal polynomial over F_p of an element of F_{p^L} whose degree divides
/// n: the conjugate product prod_{j<n} (x - a^(p^j)). Returns little-endian
/// F_p coefficients (length n+1, monic). Errors if the conjugate orbit is
/// shorter than n or a coefficient lands outside F_p.
pub fn minimal_polynomial(a: &FieldElement, n: u32) -> Result<Vec<u64>> {
    let ctx = a.context().clone();
    let mut factors: Vec<FePoly> = vec![];
    let mut c = a.clone();
    for _ in 0..n {
        let x = FePoly::x(&ctx);
        let lin = x.sub(&FePoly::constant(&ctx, &c.coeffs));
        factors.push(lin);
        c = c.frobenius(1);
    }
    if c != *a {
        return Err(crate::error::Error::BadInput(format!(
            "element has degree not dividing {n}"
        )));
    }
    let mut prod = FePoly::constant(&ctx, &ctx.inner.raw_one());
    for f in &factors {
        prod = prod.mul(f);
    }
    let l = ctx.l() as usize;
    let mut out = vec![0u64; n as usize + 1];
    for (i, coeff) in prod.coeffs.iter().enumerate() {
        if coeff[1..].iter().any(|&c| c != 0) {
            return Err(crate::error::Error::BadInput(
                "conjugate product has a coefficient outside F_p".into(),
            ));
        }
        out[i] = coeff[0];
    }
    debug_assert_eq!(prod.coeffs.len(), n as usize + 1);
    debug_assert_eq!(prod.coeffs[n as usize], {
        let mut one = vec![0u64; l];
        one[0] = 1;
        one
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::Budget;

    #[test]
    fn roots_by_scan_small_field() {
        let f9 = FieldContext::new(3, 2).unwrap();
        // x^2 + 1 over F_9 splits (it is the modulus... so its roots are +-x)
        let f = FePoly::from_fp_coeffs(&f9, &[1, 0, 1]);
        let roots = roots_in_field(&f).unwrap();
        assert_eq!(roots.len(), 2);
        for r in &roots {
            assert!(f9.inner.raw_is_zero(&f.eval(r)));
        }
    }

    #[test]
    fn roots_by_cz_match_scan() {
        // same field, once with scan and once with CZ forced via budget
        let mut tiny = Budget::default();
        tiny.root_scan_cap = 1;
        for (p, l, poly) in [
            (2u64, 4u32, vec![1u64, 1, 0, 0, 1]), // x^4+x+1 (the modulus, splits into 4 roots... over itself: its roots are in F_16)
            (3, 4, vec![2, 0, 1]),                // x^2+2 over F_81
            (5, 2, vec![4, 0, 1]),                // x^2+4 = (x-1)(x+1)? 4 = -1: x^2-1
        ] {
            let scan_ctx = FieldContext::new(p, l).unwrap();
            let cz_ctx = FieldContext::with_budget(p, l, tiny).unwrap();
            let f_scan = FePoly::from_fp_coeffs(&scan_ctx, &poly);
            let f_cz = FePoly::from_fp_coeffs(&cz_ctx, &poly);
            let mut a = roots_in_field(&f_scan).unwrap();
            let mut b = roots_in_field(&f_cz).unwrap();
            a.sort();
            b.sort();
            assert_eq!(a, b, "p={p} l={l} poly={poly:?}");
        }
    }

    #[test]
    fn minimal_polynomial_of_generator_is_degree_l() {
        let f8 = FieldContext::new(2, 3).unwrap();
        let m = minimal_polynomial(&f8.generator(), 3).unwrap();
        assert_eq!(m.len(), 4);
        assert_eq!(m[3], 1);
        // evaluates to zero at the generator
        let poly = FePoly::from_fp_coeffs(&f8, &m);
        assert!(f8.inner.raw_is_zero(&poly.eval(f8.generator().coeffs())));
    }
}
