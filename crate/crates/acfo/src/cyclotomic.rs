//! Integer polynomials in one variable, cyclotomic polynomials, and exact
//! arithmetic in the cyclotomic field Q(zeta_n) — the characteristic-zero
//! ground the restricted dependence-pattern and deciding paths run on.

use std::collections::HashMap;

use num::{BigInt, BigRational, Integer, One, Signed, Zero};

use crate::error::{Error, Result};

/// Dense integer polynomial, little-endian coefficients, no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntPoly {
    pub coeffs: Vec<BigInt>,
}

impl IntPoly {
    pub fn zero() -> Self {
        IntPoly { coeffs: vec![] }
    }

    pub fn from_coeffs(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        IntPoly { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::from_coeffs(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn constant(c: impl Into<BigInt>) -> Self {
        Self::from_coeffs(vec![c.into()])
    }

    pub fn x() -> Self {
        IntPoly { coeffs: vec![BigInt::zero(), BigInt::one()] }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn deg(&self) -> i64 {
        self.coeffs.len() as i64 - 1
    }

    pub fn lead(&self) -> &BigInt {
        self.coeffs.last().expect("lead of zero polynomial")
    }

    pub fn is_monic(&self) -> bool {
        !self.is_zero() && self.lead().is_one()
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![BigInt::zero(); n];
        for (i, o) in out.iter_mut().enumerate() {
            if let Some(a) = self.coeffs.get(i) {
                *o += a;
            }
            if let Some(b) = other.coeffs.get(i) {
                *o += b;
            }
        }
        Self::from_coeffs(out)
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![BigInt::zero(); n];
        for (i, o) in out.iter_mut().enumerate() {
            if let Some(a) = self.coeffs.get(i) {
                *o += a;
            }
            if let Some(b) = other.coeffs.get(i) {
                *o -= b;
            }
        }
        Self::from_coeffs(out)
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::from_coeffs(out)
    }

    /// Remainder by a monic divisor (stays over Z).
    pub fn rem_monic(&self, div: &Self) -> Self {
        assert!(div.is_monic());
        let d = div.coeffs.len();
        let mut r = self.coeffs.clone();
        while r.len() >= d {
            let q = r.last().unwrap().clone();
            let off = r.len() - d;
            if !q.is_zero() {
                for (i, dc) in div.coeffs.iter().enumerate() {
                    let sub = &q * dc;
                    r[off + i] -= sub;
                }
            }
            r.pop();
        }
        Self::from_coeffs(r)
    }

    /// Quotient by a monic divisor that divides exactly.
    pub fn div_exact_monic(&self, div: &Self) -> Self {
        assert!(div.is_monic());
        let d = div.coeffs.len();
        if self.coeffs.len() < d {
            assert!(self.is_zero(), "division not exact");
            return Self::zero();
        }
        let mut r = self.coeffs.clone();
        let mut q = vec![BigInt::zero(); r.len() - d + 1];
        while r.len() >= d {
            let c = r.last().unwrap().clone();
            let off = r.len() - d;
            q[off] = c.clone();
            if !c.is_zero() {
                for (i, dc) in div.coeffs.iter().enumerate() {
                    let sub = &c * dc;
                    r[off + i] -= sub;
                }
            }
            r.pop();
        }
        assert!(r.iter().all(|c| c.is_zero()), "division not exact");
        Self::from_coeffs(q)
    }

    pub fn eval_rational(&self, at: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * at + BigRational::from(c.clone());
        }
        acc
    }

    /// Coefficients reduced mod p (p prime), little-endian u64.
    pub fn reduce_mod_p(&self, p: u64) -> Vec<u64> {
        let pb = BigInt::from(p);
        let mut out: Vec<u64> = self
            .coeffs
            .iter()
            .map(|c| u64::try_from(&c.mod_floor(&pb)).unwrap())
            .collect();
        while out.last() == Some(&0) {
            out.pop();
        }
        out
    }
}

impl std::fmt::Display for IntPoly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
                first = false;
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            match i {
                0 => write!(f, "{mag}")?,
                1 if mag.is_one() => write!(f, "t")?,
                1 => write!(f, "{mag}*t")?,
                _ if mag.is_one() => write!(f, "t^{i}")?,
                _ => write!(f, "{mag}*t^{i}")?,
            }
        }
        Ok(())
    }
}

pub fn euler_phi(n: u64) -> u64 {
    let mut n = n;
    let mut result = n;
    let mut q = 2;
    while q * q <= n {
        if n % q == 0 {
            result -= result / q;
            while n % q == 0 {
                n /= q;
            }
        }
        q += 1;
    }
    if n > 1 {
        result -= result / n;
    }
    result
}

/// The n-th cyclotomic polynomial over Z, by the division
/// Phi_n = (x^n - 1) / prod_{d | n, d < n} Phi_d.
pub fn cyclotomic_poly(n: u64) -> IntPoly {
    fn go(n: u64, memo: &mut HashMap<u64, IntPoly>) -> IntPoly {
        if let Some(p) = memo.get(&n) {
            return p.clone();
        }
        let mut xn1 = vec![BigInt::zero(); n as usize + 1];
        xn1[0] = -BigInt::one();
        xn1[n as usize] = BigInt::one();
        let mut num = IntPoly::from_coeffs(xn1);
        for d in 1..n {
            if n % d == 0 {
                let phi_d = go(d, memo);
                num = num.div_exact_monic(&phi_d);
            }
        }
        memo.insert(n, num.clone());
        num
    }
    assert!(n >= 1);
    let mut memo = HashMap::new();
    go(n, &mut memo)
}

/// The cyclotomic field Q(zeta_n): elements are rational coefficient
/// vectors of length phi(n), reduced mod Phi_n.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycloField {
    pub n: u64,
    pub phi: IntPoly,
    pub degree: usize,
}

impl CycloField {
    pub fn new(n: u64) -> Self {
        let phi = cyclotomic_poly(n);
        let degree = phi.deg() as usize;
        CycloField { n, phi, degree }
    }

    pub fn zero(&self) -> CycloNum {
        CycloNum { coeffs: vec![BigRational::zero(); self.degree] }
    }

    pub fn from_rational(&self, r: BigRational) -> CycloNum {
        let mut c = self.zero();
        if self.degree > 0 {
            c.coeffs[0] = r;
        }
        c
    }

    /// zeta_n^j.
    pub fn root_of_unity(&self, j: u64) -> CycloNum {
        let j = (j % self.n) as usize;
        let mut poly = vec![BigInt::zero(); j + 1];
        poly[j] = BigInt::one();
        self.reduce_int(&IntPoly::from_coeffs(poly))
    }

    fn reduce_int(&self, p: &IntPoly) -> CycloNum {
        let r = p.rem_monic(&self.phi);
        let mut coeffs = vec![BigRational::zero(); self.degree];
        for (i, c) in r.coeffs.iter().enumerate() {
            coeffs[i] = BigRational::from(c.clone());
        }
        CycloNum { coeffs }
    }

    pub fn add(&self, a: &CycloNum, b: &CycloNum) -> CycloNum {
        CycloNum {
            coeffs: a
                .coeffs
                .iter()
                .zip(&b.coeffs)
                .map(|(x, y)| x + y)
                .collect(),
        }
    }

    pub fn sub(&self, a: &CycloNum, b: &CycloNum) -> CycloNum {
        CycloNum {
            coeffs: a
                .coeffs
                .iter()
                .zip(&b.coeffs)
                .map(|(x, y)| x - y)
                .collect(),
        }
    }

    pub fn mul(&self, a: &CycloNum, b: &CycloNum) -> CycloNum {
        if self.degree == 0 {
            return self.zero();
        }
        let mut conv = vec![BigRational::zero(); 2 * self.degree - 1];
        for (i, x) in a.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.coeffs.iter().enumerate() {
                let prod = x * y;
                conv[i + j] += prod;
            }
        }
        // reduce by the monic Phi_n over Q
        let d = self.degree;
        let phi: Vec<BigRational> = self
            .phi
            .coeffs
            .iter()
            .map(|c| BigRational::from(c.clone()))
            .collect();
        for k in (d..conv.len()).rev() {
            let c = conv[k].clone();
            if !c.is_zero() {
                conv[k] = BigRational::zero();
                for (i, pc) in phi.iter().take(d).enumerate() {
                    let sub = &c * pc;
                    conv[k - d + i] -= sub;
                }
            }
        }
        conv.truncate(d);
        CycloNum { coeffs: conv }
    }

    pub fn pow(&self, a: &CycloNum, e: u64) -> CycloNum {
        let mut acc = self.from_rational(BigRational::one());
        let mut base = a.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }
}

/// An element of Q(zeta_n), coefficients over the power basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycloNum {
    pub coeffs: Vec<BigRational>,
}

impl CycloNum {
    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }
}

/// Divisors of |n| in increasing order (trial division; errors above the cap).
pub fn divisors(n: &BigInt, cap: u64) -> Result<Vec<u64>> {
    let mag = n.abs();
    let m = u64::try_from(&mag).map_err(|_| {
        Error::UnsupportedNumberField(format!("coefficient {n} too large to factor"))
    })?;
    if m == 0 {
        return Err(Error::ZeroPolynomial);
    }
    if m > cap.saturating_mul(cap) {
        // trial division up to cap must reach sqrt(m)
        return Err(Error::UnsupportedNumberField(format!(
            "coefficient {m} exceeds the factoring cap"
        )));
    }
    let mut out = vec![];
    let mut d = 1u64;
    while d * d <= m {
        if m % d == 0 {
            out.push(d);
            if d != m / d {
                out.push(m / d);
            }
        }
        d += 1;
    }
    out.sort_unstable();
    Ok(out)
}
