//! Exact arithmetic in a finite field `F_{p^L}` with deterministic generator
//! choice, discrete logarithms, subfield tests and coherent extensions.
//!
//! A [`FieldContext`] pins one concrete realization of `F_{p^L}`: the
//! lexicographically least monic irreducible modulus of degree `L` over
//! `F_p`, and a distinguished generator of the unit group. `field_create`
//! picks the least primitive element; [`FieldContext::extend_ambient`]
//! instead picks the generator so that discrete logarithms (and hence
//! character values) of old elements are preserved.

pub mod fppoly;
pub mod poly;

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use fppoly::{addm, mulm, subm, FpPoly};

/// Resource caps. Exceeding any of them is a hard [`Error::SizeCapExceeded`],
/// never a silent fallback.
#[derive(Debug, Clone, Copy)]
pub struct Budget {
    /// Hard cap on p^L (group order must stay below 2^63).
    pub order_cap: u128,
    /// Iteration budget for Pollard rho when factoring p^L - 1.
    pub rho_iterations: u64,
    /// Max baby-step table size per prime factor in Pohlig-Hellman.
    pub bsgs_cap: u64,
    /// Fields up to this size get a full discrete-log table.
    pub dlog_table_cap: u64,
    /// Fields up to this size may be scanned exhaustively for polynomial roots.
    pub root_scan_cap: u64,
    /// Max number of tuples visited by one variety enumeration.
    pub enum_tuple_cap: u128,
    /// Max number of set elements in the product-set oracle.
    pub product_set_cap: usize,
    /// Max distinct angles kept in an exact character-sum histogram.
    pub angle_cap: u64,
    /// Max congruence components explored by the ordered-group solver.
    pub component_cap: u64,
    /// Max distinct roots (tuple length) in dependence-pattern computations.
    pub theta_root_cap: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            order_cap: 1 << 63,
            rho_iterations: 1 << 22,
            bsgs_cap: 1 << 22,
            dlog_table_cap: 1 << 22,
            root_scan_cap: 1 << 22,
            enum_tuple_cap: 200_000_000,
            product_set_cap: 2_000_000,
            angle_cap: 1 << 22,
            component_cap: 4_000_000,
            theta_root_cap: 8,
        }
    }
}

/// Deterministic Miller-Rabin, exact for all u64.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for q in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == q {
            return true;
        }
        if n % q == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d & 1 == 0 {
        d >>= 1;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = fppoly::powm(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..s - 1 {
            x = mulm(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub(crate) fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Pollard rho (Brent variant) for one nontrivial factor of odd composite n.
fn pollard_rho(n: u64, budget: u64) -> Option<u64> {
    if n % 2 == 0 {
        return Some(2);
    }
    let mulmod = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    for c in 1..64u64 {
        let f = |x: u64| (mulmod(x, x) + c) % n;
        let mut x = 2u64;
        let mut y = 2u64;
        let mut d = 1u64;
        let mut used = 0u64;
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = gcd_u64(x.abs_diff(y), n);
            used += 1;
            if used > budget {
                return None;
            }
        }
        if d != n {
            return Some(d);
        }
    }
    None
}

/// Factor n by trial division and Pollard rho within the budget.
pub fn factorize(mut n: u64, budget: &Budget) -> Result<Vec<(u64, u32)>> {
    let mut factors: Vec<(u64, u32)> = vec![];
    let push = |f: &mut Vec<(u64, u32)>, p: u64| {
        if let Some(last) = f.last_mut() {
            if last.0 == p {
                last.1 += 1;
                return;
            }
        }
        f.push((p, 1));
    };
    for q in 2u64.. {
        if q > 1 << 20 || q * q > n {
            break;
        }
        while n % q == 0 {
            push(&mut factors, q);
            n /= q;
        }
    }
    let mut stack = vec![n];
    let mut found: Vec<u64> = vec![];
    while let Some(m) = stack.pop() {
        if m == 1 {
            continue;
        }
        if is_prime_u64(m) {
            found.push(m);
            continue;
        }
        match pollard_rho(m, budget.rho_iterations) {
            Some(d) => {
                stack.push(d);
                stack.push(m / d);
            }
            None => {
                return Err(Error::SizeCapExceeded(format!(
                    "factorization budget exhausted on composite {m}"
                )))
            }
        }
    }
    found.sort_unstable();
    for p in found {
        push(&mut factors, p);
    }
    factors.sort_unstable();
    // merge duplicates produced by the two phases
    let mut merged: Vec<(u64, u32)> = vec![];
    for (p, e) in factors {
        if let Some(last) = merged.last_mut() {
            if last.0 == p {
                last.1 += e;
                continue;
            }
        }
        merged.push((p, e));
    }
    Ok(merged)
}

pub(crate) struct CtxInner {
    p: u64,
    l: u32,
    modulus: Vec<u64>, // length l+1, monic, little-endian
    generator: Vec<u64>,
    order: u64, // p^l - 1
    size: u64,  // p^l
    order_factors: Vec<(u64, u32)>,
    budget: Budget,
    dlog_table: OnceLock<Vec<u64>>,
    embed_root_cache: Mutex<HashMap<(u64, Vec<u64>), Vec<u64>>>,
}

/// Immutable handle to one realization of `F_{p^L}`; cheap to clone and safe
/// to share across threads.
#[derive(Clone)]
pub struct FieldContext {
    pub(crate) inner: Arc<CtxInner>,
}

impl fmt::Debug for FieldContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FieldContext(F_{{{}^{}}})", self.inner.p, self.inner.l)
    }
}

impl PartialEq for FieldContext {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self.same_structure(other)
    }
}
impl Eq for FieldContext {}

/// An element of `F_{p^L}`: a length-L coefficient vector over F_p, carrying
/// its ambient context.
#[derive(Clone)]
pub struct FieldElement {
    pub(crate) ctx: FieldContext,
    pub(crate) coeffs: Vec<u64>,
}

impl PartialEq for FieldElement {
    fn eq(&self, other: &Self) -> bool {
        self.ctx == other.ctx && self.coeffs == other.coeffs
    }
}
impl Eq for FieldElement {}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FieldElement({self})")
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ctx.l() == 1 {
            return write!(f, "{}", self.coeffs[0]);
        }
        let mut parts: Vec<String> = vec![];
        for (i, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            let part = match i {
                0 => format!("{c}"),
                1 if c == 1 => "x".to_string(),
                1 => format!("{c}x"),
                _ if c == 1 => format!("x^{i}"),
                _ => format!("{c}x^{i}"),
            };
            parts.push(part);
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join("+"))
        }
    }
}

impl CtxInner {
    #[inline]
    pub(crate) fn raw_is_zero(&self, a: &[u64]) -> bool {
        a.iter().all(|&c| c == 0)
    }

    pub(crate) fn raw_add(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        a.iter().zip(b).map(|(&x, &y)| addm(x, y, self.p)).collect()
    }

    pub(crate) fn raw_sub(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        a.iter().zip(b).map(|(&x, &y)| subm(x, y, self.p)).collect()
    }

    pub(crate) fn raw_neg(&self, a: &[u64]) -> Vec<u64> {
        a.iter().map(|&x| if x == 0 { 0 } else { self.p - x }).collect()
    }

    /// Schoolbook product followed by reduction by the monic modulus.
    pub(crate) fn raw_mul(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let l = self.l as usize;
        let p = self.p;
        let mut prod = vec![0u64; 2 * l - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                prod[i + j] = addm(prod[i + j], mulm(x, y, p), p);
            }
        }
        // reduce: modulus is monic of degree l
        for k in (l..2 * l - 1).rev() {
            let c = prod[k];
            if c != 0 {
                prod[k] = 0;
                for (j, &mj) in self.modulus.iter().take(l).enumerate() {
                    prod[k - l + j] = subm(prod[k - l + j], mulm(c, mj, p), p);
                }
            }
        }
        prod.truncate(l);
        prod
    }

    pub(crate) fn raw_one(&self) -> Vec<u64> {
        let mut v = vec![0u64; self.l as usize];
        v[0] = 1 % self.p;
        v
    }

    pub(crate) fn raw_pow(&self, a: &[u64], mut e: u128) -> Vec<u64> {
        let mut base = a.to_vec();
        let mut acc = self.raw_one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.raw_mul(&acc, &base);
            }
            base = self.raw_mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    pub(crate) fn raw_inv(&self, a: &[u64]) -> Result<Vec<u64>> {
        if self.raw_is_zero(a) {
            return Err(Error::DivisionByZero);
        }
        Ok(self.raw_pow(a, self.order as u128 - 1))
    }

    /// Little-endian flat index, used for table addressing.
    pub(crate) fn flat_index(&self, a: &[u64]) -> usize {
        let mut idx: u128 = 0;
        for &c in a.iter().rev() {
            idx = idx * self.p as u128 + c as u128;
        }
        idx as usize
    }

    /// Rank in the coefficient-lexicographic enumeration (c_0 scanned first).
    pub(crate) fn rank_of(&self, a: &[u64]) -> u64 {
        let mut r: u128 = 0;
        for &c in a.iter() {
            r = r * self.p as u128 + c as u128;
        }
        r as u64
    }

    pub(crate) fn coeffs_from_rank(&self, mut rank: u64) -> Vec<u64> {
        let l = self.l as usize;
        let mut coeffs = vec![0u64; l];
        for i in (0..l).rev() {
            coeffs[i] = rank % self.p;
            rank /= self.p;
        }
        coeffs
    }

    fn dlog_table(&self) -> Option<&Vec<u64>> {
        if self.size > self.budget.dlog_table_cap {
            return None;
        }
        Some(self.dlog_table.get_or_init(|| {
            let mut table = vec![u64::MAX; self.size as usize];
            let mut cur = self.raw_one();
            for e in 0..self.order {
                table[self.flat_index(&cur)] = e;
                cur = self.raw_mul(&cur, &self.generator);
            }
            table
        }))
    }
}

/// Baby-step/giant-step in the cyclic subgroup of prime order `ell`
/// generated by `h`; returns e with h^e = target.
fn bsgs(inner: &CtxInner, h: &[u64], target: &[u64], ell: u64) -> u64 {
    let m = (ell as f64).sqrt().ceil() as u64;
    let mut baby: HashMap<Vec<u64>, u64> = HashMap::with_capacity(m as usize);
    let mut cur = inner.raw_one();
    for j in 0..m {
        baby.entry(cur.clone()).or_insert(j);
        cur = inner.raw_mul(&cur, h);
    }
    let h_minus_m = inner
        .raw_inv(&inner.raw_pow(h, m as u128))
        .expect("generator power is nonzero");
    let mut gamma = target.to_vec();
    for i in 0..=m {
        if let Some(&j) = baby.get(&gamma) {
            return (i * m + j) % ell;
        }
        gamma = inner.raw_mul(&gamma, &h_minus_m);
    }
    unreachable!("BSGS failed in subgroup of order {ell}")
}

impl FieldContext {
    /// Construct `F_{p^L}` with the deterministic modulus (lexicographically
    /// least monic irreducible) and generator (least primitive element in
    /// the coefficient-lexicographic enumeration).
    pub fn new(p: u64, l: u32) -> Result<Self> {
        Self::with_budget(p, l, Budget::default())
    }

    pub fn with_budget(p: u64, l: u32, budget: Budget) -> Result<Self> {
        if !is_prime_u64(p) {
            return Err(Error::NotPrime(p));
        }
        if l == 0 {
            return Err(Error::BadInput("degree must be positive".into()));
        }
        let mut size: u128 = 1;
        for _ in 0..l {
            size = size.checked_mul(p as u128).ok_or_else(|| {
                Error::SizeCapExceeded(format!("p^L overflows for p={p}, L={l}"))
            })?;
            if size > budget.order_cap {
                return Err(Error::SizeCapExceeded(format!(
                    "p^L = {p}^{l} exceeds the order cap"
                )));
            }
        }
        let modulus = fppoly::least_irreducible(p, l);
        Self::assemble(p, l, modulus.coeffs, None, budget)
    }

    /// Internal: build the context, factor the order, find or verify the
    /// generator.
    fn assemble(
        p: u64,
        l: u32,
        modulus: Vec<u64>,
        generator: Option<Vec<u64>>,
        budget: Budget,
    ) -> Result<Self> {
        let size: u64 = {
            let mut s: u128 = 1;
            for _ in 0..l {
                s *= p as u128;
            }
            s as u64
        };
        let order = size - 1;
        let order_factors = if order > 1 {
            factorize(order, &budget)?
        } else {
            vec![]
        };
        // dlog feasibility: the largest BSGS table must fit the budget
        if let Some(&(largest, _)) = order_factors.last() {
            let m = (largest as f64).sqrt().ceil() as u64;
            if m > budget.bsgs_cap {
                return Err(Error::SizeCapExceeded(format!(
                    "prime factor {largest} of the group order exceeds the BSGS budget"
                )));
            }
        }
        let mut inner = CtxInner {
            p,
            l,
            modulus,
            generator: vec![],
            order,
            size,
            order_factors,
            budget,
            dlog_table: OnceLock::new(),
            embed_root_cache: Mutex::new(HashMap::new()),
        };
        let gen = match generator {
            Some(g) => {
                if !is_primitive(&inner, &g) {
                    return Err(Error::BadInput(
                        "supplied generator is not primitive".into(),
                    ));
                }
                g
            }
            None => least_primitive(&inner),
        };
        inner.generator = gen;
        Ok(FieldContext { inner: Arc::new(inner) })
    }

    pub fn p(&self) -> u64 {
        self.inner.p
    }

    pub fn l(&self) -> u32 {
        self.inner.l
    }

    /// p^L.
    pub fn size(&self) -> u64 {
        self.inner.size
    }

    /// p^L - 1.
    pub fn order(&self) -> u64 {
        self.inner.order
    }

    pub fn modulus(&self) -> &[u64] {
        &self.inner.modulus
    }

    pub fn order_factorization(&self) -> &[(u64, u32)] {
        &self.inner.order_factors
    }

    pub fn budget(&self) -> &Budget {
        &self.inner.budget
    }

    pub fn same_structure(&self, other: &Self) -> bool {
        self.inner.p == other.inner.p
            && self.inner.l == other.inner.l
            && self.inner.modulus == other.inner.modulus
            && self.inner.generator == other.inner.generator
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement {
            ctx: self.clone(),
            coeffs: vec![0; self.inner.l as usize],
        }
    }

    pub fn one(&self) -> FieldElement {
        FieldElement {
            ctx: self.clone(),
            coeffs: self.inner.raw_one(),
        }
    }

    pub fn generator(&self) -> FieldElement {
        FieldElement {
            ctx: self.clone(),
            coeffs: self.inner.generator.clone(),
        }
    }

    /// Element from little-endian coefficients; length must be L, entries
    /// reduced mod p.
    pub fn element(&self, coeffs: &[u64]) -> Result<FieldElement> {
        if coeffs.len() != self.inner.l as usize {
            return Err(Error::BadInput(format!(
                "expected {} coefficients, got {}",
                self.inner.l,
                coeffs.len()
            )));
        }
        Ok(FieldElement {
            ctx: self.clone(),
            coeffs: coeffs.iter().map(|&c| c % self.inner.p).collect(),
        })
    }

    /// Embed an integer (the image of 1+1+...); negative values allowed.
    pub fn from_int(&self, n: i64) -> FieldElement {
        let p = self.inner.p as i64;
        let c = n.rem_euclid(p) as u64;
        let mut coeffs = vec![0u64; self.inner.l as usize];
        coeffs[0] = c;
        FieldElement { ctx: self.clone(), coeffs }
    }

    /// The k-th element in coefficient-lexicographic order (0 is zero).
    pub fn element_from_rank(&self, rank: u64) -> FieldElement {
        assert!(rank < self.inner.size);
        FieldElement {
            ctx: self.clone(),
            coeffs: self.inner.coeffs_from_rank(rank),
        }
    }

    pub fn rank_of(&self, a: &FieldElement) -> u64 {
        self.inner.rank_of(&a.coeffs)
    }

    /// Discrete logarithm base the context generator, by Pohlig-Hellman with
    /// BSGS per prime-power factor (full-table shortcut for small fields).
    pub fn dlog(&self, a: &FieldElement) -> Result<u64> {
        self.check_same(a)?;
        if a.is_zero() {
            return Err(Error::ZeroArgument);
        }
        if self.inner.order == 1 {
            return Ok(0);
        }
        if let Some(table) = self.inner.dlog_table() {
            let e = table[self.inner.flat_index(&a.coeffs)];
            debug_assert_ne!(e, u64::MAX);
            return Ok(e);
        }
        self.dlog_pohlig_hellman(&a.coeffs)
    }

    fn dlog_pohlig_hellman(&self, a: &[u64]) -> Result<u64> {
        let inner = &*self.inner;
        let n = inner.order;
        let mut residues: Vec<(u64, u64)> = vec![]; // (x mod q, q = ell^e)
        for &(ell, e) in &inner.order_factors {
            let q = ell.pow(e);
            let gamma = inner.raw_pow(&inner.generator, (n / q) as u128);
            let beta = inner.raw_pow(a, (n / q) as u128);
            // digit-by-digit in the subgroup of order q
            let h = inner.raw_pow(&gamma, (q / ell) as u128); // order ell
            let gamma_inv = inner.raw_inv(&gamma)?;
            let mut x: u64 = 0;
            for i in 0..e {
                let shifted = inner.raw_mul(&beta, &inner.raw_pow(&gamma_inv, x as u128));
                let digit_target = inner.raw_pow(&shifted, (q / ell.pow(i + 1)) as u128);
                let d = bsgs(inner, &h, &digit_target, ell);
                x += d * ell.pow(i);
            }
            residues.push((x, q));
        }
        // CRT
        let mut x: u128 = 0;
        let mut m: u128 = 1;
        for (r, q) in residues {
            let (r, q) = (r as u128, q as u128);
            // x' = x + m*t with x' = r mod q  =>  t = (r - x)/m mod q
            let minv = mod_inverse_u128(m % q, q);
            let t = ((r + q - x % q) % q) * minv % q;
            x += m * t;
            m *= q;
        }
        Ok((x % n as u128) as u64)
    }

    /// g^e for the context generator.
    pub fn generator_pow(&self, e: u64) -> FieldElement {
        FieldElement {
            ctx: self.clone(),
            coeffs: self.inner.raw_pow(&self.inner.generator, e as u128),
        }
    }

    /// True iff a lies in the subfield F_{p^m} (m must divide L).
    pub fn subfield_test(&self, a: &FieldElement, m: u32) -> Result<bool> {
        self.check_same(a)?;
        if m == 0 || self.inner.l % m != 0 {
            return Err(Error::NotADivisor { m, l: self.inner.l });
        }
        Ok(a.frobenius(m) == *a)
    }

    /// Extend to degree `l_new` (a multiple of L) with a generator chosen so
    /// that embedded elements keep their character values: the new generator
    /// G' satisfies G'^((p^L'-1)/(p^L-1)) = embed(G).
    pub fn extend_ambient(&self, l_new: u32) -> Result<FieldContext> {
        let l = self.inner.l;
        if l_new == 0 || l_new % l != 0 {
            return Err(Error::NotAMultiple { l_new, l });
        }
        if l_new == l {
            return Ok(self.clone());
        }
        let base = FieldContext::with_budget(self.inner.p, l_new, self.inner.budget)?;
        let g_img = base.embed(&self.generator())?;
        let s = base.dlog(&g_img)?;
        let n_old = self.inner.order as u128;
        let n_new = base.inner.order as u128;
        let k = n_new / n_old;
        debug_assert_eq!(n_new % n_old, 0);
        if s as u128 % k != 0 {
            return Err(Error::CoherentExtensionSearchExhausted);
        }
        let s0 = s as u128 / k;
        // solve k*x = s (mod n_new): x = s0 + t*n_old, pick t with x coprime
        // to the order so G' = H^x is primitive
        let max_t = k.min(4_000_000);
        for t in 0..max_t {
            let x = s0 + t * n_old;
            if gcd_u128(x, n_new) == 1 {
                let g_new = base.inner.raw_pow(&base.inner.generator, x);
                let ctx = FieldContext::assemble(
                    self.inner.p,
                    l_new,
                    base.inner.modulus.clone(),
                    Some(g_new),
                    self.inner.budget,
                )?;
                // coherence check: G'^k must equal the embedded old generator
                let check = ctx.inner.raw_pow(&ctx.inner.generator, k);
                if check != g_img.coeffs {
                    return Err(Error::CoherentExtensionSearchExhausted);
                }
                return Ok(ctx);
            }
        }
        Err(Error::CoherentExtensionSearchExhausted)
    }

    /// Image of `a` under the deterministic embedding of its field into this
    /// one (the old modulus' lexicographically least root here).
    pub fn embed(&self, a: &FieldElement) -> Result<FieldElement> {
        let src = &a.ctx.inner;
        if src.p != self.inner.p {
            return Err(Error::ContextMismatch);
        }
        if self.inner.l % src.l != 0 {
            return Err(Error::NotAMultiple { l_new: self.inner.l, l: src.l });
        }
        if src.l == self.inner.l && src.modulus == self.inner.modulus {
            // same polynomial ring; identity on coefficients
            return Ok(FieldElement { ctx: self.clone(), coeffs: a.coeffs.clone() });
        }
        let key = (src.l as u64, src.modulus.clone());
        let root = {
            let cache = self.inner.embed_root_cache.lock().unwrap();
            cache.get(&key).cloned()
        };
        let root = match root {
            Some(r) => r,
            None => {
                let f = poly::FePoly::from_fp_coeffs(self, &src.modulus);
                let roots = poly::roots_in_field(&f)?;
                let r = roots
                    .into_iter()
                    .next()
                    .ok_or(Error::CoherentExtensionSearchExhausted)?;
                self.inner
                    .embed_root_cache
                    .lock()
                    .unwrap()
                    .insert(key, r.clone());
                r
            }
        };
        // a = sum c_i x^i maps to sum c_i root^i
        let mut acc = vec![0u64; self.inner.l as usize];
        let mut pow = self.inner.raw_one();
        for (i, &c) in a.coeffs.iter().enumerate() {
            if i > 0 {
                pow = self.inner.raw_mul(&pow, &root);
            }
            if c != 0 {
                let mut term = pow.clone();
                for t in term.iter_mut() {
                    *t = mulm(*t, c, self.inner.p);
                }
                acc = self.inner.raw_add(&acc, &term);
            }
        }
        Ok(FieldElement { ctx: self.clone(), coeffs: acc })
    }

    pub(crate) fn check_same(&self, a: &FieldElement) -> Result<()> {
        if *self == a.ctx {
            Ok(())
        } else {
            Err(Error::ContextMismatch)
        }
    }

    /// Serializable representation; bit-exact round trip.
    pub fn to_repr(&self) -> ContextRepr {
        ContextRepr {
            p: self.inner.p,
            l: self.inner.l,
            modulus: self.inner.modulus.clone(),
            generator: self.inner.generator.clone(),
        }
    }

    pub fn from_repr(repr: &ContextRepr) -> Result<Self> {
        Self::from_repr_with_budget(repr, Budget::default())
    }

    pub fn from_repr_with_budget(repr: &ContextRepr, budget: Budget) -> Result<Self> {
        if !is_prime_u64(repr.p) {
            return Err(Error::NotPrime(repr.p));
        }
        if repr.modulus.len() != repr.l as usize + 1
            || repr.modulus.last() != Some(&1)
            || !fppoly::is_irreducible(
                &FpPoly { coeffs: repr.modulus.clone() },
                repr.p,
            )
        {
            return Err(Error::BadInput(
                "modulus is not a monic irreducible of the stated degree".into(),
            ));
        }
        if repr.generator.len() != repr.l as usize {
            return Err(Error::BadInput("generator has wrong length".into()));
        }
        Self::assemble(
            repr.p,
            repr.l,
            repr.modulus.clone(),
            Some(repr.generator.clone()),
            budget,
        )
    }
}

fn mod_inverse_u128(a: u128, m: u128) -> u128 {
    // extended Euclid; m need not be prime but gcd(a, m) must be 1
    let (mut old_r, mut r) = (a as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    debug_assert_eq!(old_r, 1);
    old_s.rem_euclid(m as i128) as u128
}

fn is_primitive(inner: &CtxInner, g: &[u64]) -> bool {
    if inner.raw_is_zero(g) {
        return false;
    }
    if inner.order == 1 {
        return true;
    }
    for &(ell, _) in &inner.order_factors {
        let t = inner.raw_pow(g, (inner.order / ell) as u128);
        if t == inner.raw_one() {
            return false;
        }
    }
    true
}

fn least_primitive(inner: &CtxInner) -> Vec<u64> {
    for rank in 1..inner.size {
        let coeffs = inner.coeffs_from_rank(rank);
        if is_primitive(inner, &coeffs) {
            return coeffs;
        }
    }
    unreachable!("every finite field has a primitive element")
}

/// Arithmetic operation selector for [`FieldElement::arith`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl FieldElement {
    pub fn context(&self) -> &FieldContext {
        &self.ctx
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.ctx.inner.raw_is_zero(&self.coeffs)
    }

    pub fn is_one(&self) -> bool {
        self.coeffs == self.ctx.inner.raw_one()
    }

    pub fn arith(&self, other: &FieldElement, op: ArithOp) -> Result<FieldElement> {
        self.ctx.check_same(other)?;
        let inner = &*self.ctx.inner;
        let coeffs = match op {
            ArithOp::Add => inner.raw_add(&self.coeffs, &other.coeffs),
            ArithOp::Sub => inner.raw_sub(&self.coeffs, &other.coeffs),
            ArithOp::Mul => inner.raw_mul(&self.coeffs, &other.coeffs),
            ArithOp::Div => inner.raw_mul(&self.coeffs, &inner.raw_inv(&other.coeffs)?),
        };
        Ok(FieldElement { ctx: self.ctx.clone(), coeffs })
    }

    pub fn add(&self, other: &FieldElement) -> Result<FieldElement> {
        self.arith(other, ArithOp::Add)
    }

    pub fn sub(&self, other: &FieldElement) -> Result<FieldElement> {
        self.arith(other, ArithOp::Sub)
    }

    pub fn mul(&self, other: &FieldElement) -> Result<FieldElement> {
        self.arith(other, ArithOp::Mul)
    }

    pub fn div(&self, other: &FieldElement) -> Result<FieldElement> {
        self.arith(other, ArithOp::Div)
    }

    pub fn neg(&self) -> FieldElement {
        FieldElement {
            ctx: self.ctx.clone(),
            coeffs: self.ctx.inner.raw_neg(&self.coeffs),
        }
    }

    /// a^e; negative exponents require a nonzero base.
    pub fn pow(&self, e: i128) -> Result<FieldElement> {
        let inner = &*self.ctx.inner;
        if self.is_zero() {
            return match e.cmp(&0) {
                std::cmp::Ordering::Greater => Ok(self.clone()),
                std::cmp::Ordering::Equal => Ok(FieldElement {
                    ctx: self.ctx.clone(),
                    coeffs: inner.raw_one(),
                }),
                std::cmp::Ordering::Less => Err(Error::DivisionByZero),
            };
        }
        let n = inner.order as i128;
        let e = if n == 0 { 0 } else { e.rem_euclid(n) } as u128;
        Ok(FieldElement {
            ctx: self.ctx.clone(),
            coeffs: inner.raw_pow(&self.coeffs, e),
        })
    }

    pub fn inv(&self) -> Result<FieldElement> {
        Ok(FieldElement {
            ctx: self.ctx.clone(),
            coeffs: self.ctx.inner.raw_inv(&self.coeffs)?,
        })
    }

    /// a^(p^j), the j-th Frobenius power.
    pub fn frobenius(&self, j: u32) -> FieldElement {
        let inner = &*self.ctx.inner;
        let j = j % inner.l;
        let mut exp: u128 = 1;
        for _ in 0..j {
            exp *= inner.p as u128;
        }
        FieldElement {
            ctx: self.ctx.clone(),
            coeffs: inner.raw_pow(&self.coeffs, exp),
        }
    }

    pub fn rank(&self) -> u64 {
        self.ctx.inner.rank_of(&self.coeffs)
    }
}

/// JSON-serializable context representation: {p, L, modulus, generator}.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextRepr {
    pub p: u64,
    #[serde(rename = "L")]
    pub l: u32,
    pub modulus: Vec<u64>,
    pub generator: Vec<u64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_create_deterministic_generators() {
        // F_7: exhaustive order check makes 3 the least primitive element
        let f7 = FieldContext::new(7, 1).unwrap();
        assert_eq!(f7.generator().coeffs(), &[3]);
        // F_2: the trivial unit group
        let f2 = FieldContext::new(2, 1).unwrap();
        assert_eq!(f2.generator().coeffs(), &[1]);
        // F_4: modulus x^2+x+1, generator x
        let f4 = FieldContext::new(2, 2).unwrap();
        assert_eq!(f4.modulus(), &[1, 1, 1]);
        assert_eq!(f4.generator().coeffs(), &[0, 1]);
    }

    #[test]
    fn field_create_rejects_nonprime() {
        assert_eq!(FieldContext::new(6, 1).unwrap_err(), Error::NotPrime(6));
    }

    #[test]
    fn elem_arith_examples() {
        let f4 = FieldContext::new(2, 2).unwrap();
        let x = f4.element(&[0, 1]).unwrap();
        assert_eq!(x.mul(&x).unwrap().coeffs(), &[1, 1]); // x^2 = x+1
        assert_eq!(x.add(&x).unwrap().coeffs(), &[0, 0]); // characteristic 2

        let f7 = FieldContext::new(7, 1).unwrap();
        let three = f7.from_int(3);
        assert_eq!(three.pow(-1).unwrap().coeffs(), &[5]); // 3*5 = 15 = 1 mod 7
    }

    #[test]
    fn dlog_examples_and_homomorphism() {
        let f7 = FieldContext::new(7, 1).unwrap();
        assert_eq!(f7.dlog(&f7.from_int(6)).unwrap(), 3); // 3^3 = 27 = 6
        assert_eq!(f7.dlog(&f7.one()).unwrap(), 0);
        assert_eq!(f7.dlog(&f7.generator()).unwrap(), 1);
        assert!(f7.dlog(&f7.zero()).is_err());

        // exhaustive: dlog(ab) = dlog(a) + dlog(b) mod order, small fields
        for (p, l) in [(2u64, 5u32), (3, 3), (5, 2), (61, 1)] {
            let f = FieldContext::new(p, l).unwrap();
            let n = f.order();
            for i in 1..f.size() {
                for j in 1..f.size().min(i + 8) {
                    let a = f.element_from_rank(i);
                    let b = f.element_from_rank(j);
                    let lhs = f.dlog(&a.mul(&b).unwrap()).unwrap();
                    let rhs = (f.dlog(&a).unwrap() + f.dlog(&b).unwrap()) % n;
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }

    #[test]
    fn dlog_pohlig_hellman_path_matches_table() {
        // force the PH path by shrinking the table budget
        let mut budget = Budget::default();
        budget.dlog_table_cap = 0;
        let f = FieldContext::with_budget(3, 8, budget).unwrap();
        let g = f.generator();
        for e in [0u64, 1, 2, 17, 3279, 6559] {
            let a = g.pow(e as i128).unwrap();
            assert_eq!(f.dlog(&a).unwrap(), e);
        }
    }

    #[test]
    fn frobenius_fixes_exactly_the_prime_field() {
        for (p, l) in [(2u64, 4u32), (3, 2), (5, 2)] {
            let f = FieldContext::new(p, l).unwrap();
            for r in 0..f.size() {
                let a = f.element_from_rank(r);
                let fixed = a.frobenius(1) == a;
                let in_fp = a.coeffs()[1..].iter().all(|&c| c == 0);
                assert_eq!(fixed, in_fp);
            }
            // additive and multiplicative, spot-exhaustive
            for i in 0..f.size() {
                for j in 0..f.size().min(i + 5) {
                    let a = f.element_from_rank(i);
                    let b = f.element_from_rank(j);
                    assert_eq!(
                        a.add(&b).unwrap().frobenius(1),
                        a.frobenius(1).add(&b.frobenius(1)).unwrap()
                    );
                    assert_eq!(
                        a.mul(&b).unwrap().frobenius(1),
                        a.frobenius(1).mul(&b.frobenius(1)).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn subfield_test_examples() {
        let f16 = FieldContext::new(2, 4).unwrap();
        // cube roots of 1 lie in F_4
        for r in 1..16 {
            let a = f16.element_from_rank(r);
            if a.pow(3).unwrap().is_one() {
                assert!(f16.subfield_test(&a, 2).unwrap());
            }
        }
        assert!(f16.subfield_test(&f16.zero(), 1).unwrap());
        assert!(!f16.subfield_test(&f16.generator(), 2).unwrap());
        assert!(f16.subfield_test(&f16.generator(), 3).is_err());
    }

    #[test]
    fn subfield_agrees_with_dlog_criterion() {
        let f = FieldContext::new(3, 4).unwrap();
        let n = f.order();
        for r in 1..f.size() {
            let a = f.element_from_rank(r);
            for m in [1u32, 2, 4] {
                let sub = f.subfield_test(&a, m).unwrap();
                let nm = 3u64.pow(m) - 1;
                let crit = f.dlog(&a).unwrap() % (n / nm) == 0;
                assert_eq!(sub, crit, "rank {r} m {m}");
            }
        }
    }

    #[test]
    fn extend_ambient_examples() {
        // F_4 -> F_16: G'^5 = embed(G)
        let f4 = FieldContext::new(2, 2).unwrap();
        let f16 = f4.extend_ambient(4).unwrap();
        let img = f16.embed(&f4.generator()).unwrap();
        assert_eq!(f16.generator().pow(5).unwrap(), img);

        // identity extension
        let same = f4.extend_ambient(2).unwrap();
        assert_eq!(same.generator(), f4.generator());

        // F_3 (G=2) -> F_9: G' has order 8 and G'^4 = 2
        let f3 = FieldContext::new(3, 1).unwrap();
        assert_eq!(f3.generator().coeffs(), &[2]);
        let f9 = f3.extend_ambient(2).unwrap();
        let g = f9.generator();
        assert_eq!(f9.dlog(&g).unwrap(), 1);
        let g4 = g.pow(4).unwrap();
        assert_eq!(g4, f9.embed(&f3.from_int(2)).unwrap());
    }

    #[test]
    fn context_json_round_trip_is_bit_exact() {
        let f9 = FieldContext::new(3, 2).unwrap();
        let json = serde_json::to_string(&f9.to_repr()).unwrap();
        let repr: ContextRepr = serde_json::from_str(&json).unwrap();
        let back = FieldContext::from_repr(&repr).unwrap();
        assert!(back.same_structure(&f9));
        assert_eq!(serde_json::to_string(&back.to_repr()).unwrap(), json);
    }

    #[test]
    fn pow_zero_cases() {
        let f5 = FieldContext::new(5, 1).unwrap();
        let z = f5.zero();
        assert!(z.pow(3).unwrap().is_zero());
        assert!(z.pow(0).unwrap().is_one());
        assert!(z.pow(-1).is_err());
        let a = f5.from_int(2);
        assert!(a.div(&z).is_err());
    }

    #[test]
    fn context_mismatch_is_detected() {
        let f5 = FieldContext::new(5, 1).unwrap();
        let f7 = FieldContext::new(7, 1).unwrap();
        let a = f5.from_int(2);
        let b = f7.from_int(2);
        assert_eq!(a.add(&b).unwrap_err(), Error::ContextMismatch);
    }
}
