//! Dense polynomial arithmetic over the prime field F_p with u64
//! coefficients. Used for modulus search, irreducibility testing and
//! distinct-degree factorization; extension-field polynomials live in
//! [`super::poly`].

/// Coefficients little-endian (`c[0]` is the constant term), no trailing
/// zeros, the zero polynomial is the empty vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FpPoly {
    pub coeffs: Vec<u64>,
}

#[inline]
pub fn addm(a: u64, b: u64, p: u64) -> u64 {
    let s = a + b;
    if s >= p {
        s - p
    } else {
        s
    }
}

#[inline]
pub fn subm(a: u64, b: u64, p: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + p - b
    }
}

#[inline]
pub fn mulm(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

pub fn powm(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1 % p;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = mulm(r, a, p);
        }
        a = mulm(a, a, p);
        e >>= 1;
    }
    r
}

/// Inverse mod a prime p.
pub fn invm(a: u64, p: u64) -> u64 {
    debug_assert!(a % p != 0);
    powm(a, p - 2, p)
}

/// Inverse mod an arbitrary modulus coprime to a, by extended Euclid.
pub fn invm_any(a: u64, m: u64) -> u64 {
    let (mut old_r, mut r) = (a as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    debug_assert_eq!(old_r, 1, "{a} not invertible mod {m}");
    old_s.rem_euclid(m as i128) as u64
}

impl FpPoly {
    pub fn zero() -> Self {
        FpPoly { coeffs: vec![] }
    }

    pub fn from_coeffs(mut coeffs: Vec<u64>, p: u64) -> Self {
        for c in coeffs.iter_mut() {
            *c %= p;
        }
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        FpPoly { coeffs }
    }

    pub fn x() -> Self {
        FpPoly { coeffs: vec![0, 1] }
    }

    pub fn constant(c: u64, p: u64) -> Self {
        Self::from_coeffs(vec![c], p)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; -1 for the zero polynomial.
    pub fn deg(&self) -> i64 {
        self.coeffs.len() as i64 - 1
    }

    pub fn lead(&self) -> u64 {
        *self.coeffs.last().expect("lead of zero polynomial")
    }

    pub fn add(&self, other: &Self, p: u64) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![0u64; n];
        for (i, o) in out.iter_mut().enumerate() {
            let a = self.coeffs.get(i).copied().unwrap_or(0);
            let b = other.coeffs.get(i).copied().unwrap_or(0);
            *o = addm(a, b, p);
        }
        Self::from_coeffs(out, p)
    }

    pub fn sub(&self, other: &Self, p: u64) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![0u64; n];
        for (i, o) in out.iter_mut().enumerate() {
            let a = self.coeffs.get(i).copied().unwrap_or(0);
            let b = other.coeffs.get(i).copied().unwrap_or(0);
            *o = subm(a, b, p);
        }
        Self::from_coeffs(out, p)
    }

    pub fn mul(&self, other: &Self, p: u64) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![0u64; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] = addm(out[i + j], mulm(a, b, p), p);
            }
        }
        Self::from_coeffs(out, p)
    }

    pub fn scale(&self, c: u64, p: u64) -> Self {
        Self::from_coeffs(self.coeffs.iter().map(|&a| mulm(a, c, p)).collect(), p)
    }

    /// Remainder of self by a nonzero divisor.
    pub fn rem(&self, div: &Self, p: u64) -> Self {
        assert!(!div.is_zero());
        let mut r = self.coeffs.clone();
        let d = div.coeffs.len();
        let dl_inv = invm(div.lead(), p);
        while r.len() >= d {
            let q = mulm(*r.last().unwrap(), dl_inv, p);
            let off = r.len() - d;
            if q != 0 {
                for (i, &dc) in div.coeffs.iter().enumerate() {
                    r[off + i] = subm(r[off + i], mulm(q, dc, p), p);
                }
            }
            r.pop();
        }
        Self::from_coeffs(r, p)
    }

    /// Polynomial quotient.
    pub fn div(&self, div: &Self, p: u64) -> Self {
        assert!(!div.is_zero());
        let d = div.coeffs.len();
        if self.coeffs.len() < d {
            return Self::zero();
        }
        let mut r = self.coeffs.clone();
        let mut q = vec![0u64; r.len() - d + 1];
        let dl_inv = invm(div.lead(), p);
        while r.len() >= d {
            let c = mulm(*r.last().unwrap(), dl_inv, p);
            let off = r.len() - d;
            q[off] = c;
            if c != 0 {
                for (i, &dc) in div.coeffs.iter().enumerate() {
                    r[off + i] = subm(r[off + i], mulm(c, dc, p), p);
                }
            }
            r.pop();
        }
        Self::from_coeffs(q, p)
    }

    pub fn monic(&self, p: u64) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        self.scale(invm(self.lead(), p), p)
    }

    pub fn gcd(&self, other: &Self, p: u64) -> Self {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(&b, p);
            a = b;
            b = r;
        }
        a.monic(p)
    }

    pub fn derivative(&self, p: u64) -> Self {
        if self.coeffs.len() <= 1 {
            return Self::zero();
        }
        let out: Vec<u64> = self.coeffs[1..]
            .iter()
            .enumerate()
            .map(|(i, &c)| mulm(c, (i as u64 + 1) % p, p))
            .collect();
        Self::from_coeffs(out, p)
    }

    pub fn eval(&self, x: u64, p: u64) -> u64 {
        let mut acc = 0u64;
        for &c in self.coeffs.iter().rev() {
            acc = addm(mulm(acc, x, p), c, p);
        }
        acc
    }

    /// self^e mod m.
    pub fn powmod(&self, mut e: u128, m: &Self, p: u64) -> Self {
        let mut base = self.rem(m, p);
        let mut acc = Self::constant(1, p);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base, p).rem(m, p);
            }
            base = base.mul(&base, p).rem(m, p);
            e >>= 1;
        }
        acc
    }

    /// x^(p^j) mod m, by repeated p-th powering.
    pub fn frobenius_of_x(j: u32, m: &Self, p: u64) -> Self {
        let mut r = Self::x().rem(m, p);
        for _ in 0..j {
            r = r.powmod(p as u128, m, p);
        }
        r
    }
}

/// True iff the monic polynomial f of degree >= 1 is irreducible over F_p.
///
/// A degree-n polynomial with no irreducible factor of degree <= n/2 is
/// irreducible (two proper factors cannot both exceed n/2, and a repeated
/// factor of degree exactly n/2 is caught by the gcd at i = n/2).
pub fn is_irreducible(f: &FpPoly, p: u64) -> bool {
    let n = f.deg();
    assert!(n >= 1);
    if n == 1 {
        return true;
    }
    let x = FpPoly::x();
    let mut xq = x.clone(); // x^(p^i) mod f
    for _ in 1..=(n as u32 / 2) {
        xq = xq.powmod(p as u128, f, p);
        let g = xq.sub(&x, p).gcd(f, p);
        if g.deg() != 0 {
            return false;
        }
    }
    true
}

/// Lexicographically least monic irreducible of degree l over F_p, where
/// candidates are compared by their coefficient sequences scanned low to
/// high (constant coefficient first).
pub fn least_irreducible(p: u64, l: u32) -> FpPoly {
    let l = l as usize;
    let mut digits = vec![0u64; l]; // digits[0] = c_0 is the most significant position
    loop {
        let mut coeffs = digits.clone();
        coeffs.push(1); // monic
        let f = FpPoly { coeffs };
        if is_irreducible(&f, p) {
            return f;
        }
        // lexicographic odometer: last coordinate varies fastest
        let mut i = l;
        loop {
            assert!(i > 0, "no irreducible of degree {l} found (impossible)");
            i -= 1;
            digits[i] += 1;
            if digits[i] < p {
                break;
            }
            digits[i] = 0;
        }
    }
}

/// Degrees (with multiplicity in the squarefree part collapsed) of the
/// irreducible factors of f over F_p, via distinct-degree factorization of
/// the squarefree part. Returns pairs (degree, count) sorted by degree.
pub fn factor_degrees(f: &FpPoly, p: u64) -> Vec<(u32, u32)> {
    assert!(!f.is_zero());
    let mut sf = squarefree_part(f, p);
    let mut out: Vec<(u32, u32)> = vec![];
    let mut d = 0u32;
    let x = FpPoly::x();
    let mut xq = x.clone();
    while sf.deg() > 0 {
        d += 1;
        if (sf.deg() as u32) < 2 * d {
            // what remains is a single irreducible factor
            out.push((sf.deg() as u32, 1));
            break;
        }
        xq = xq.powmod(p as u128, &sf, p);
        let g = xq.sub(&x, p).gcd(&sf, p);
        if g.deg() > 0 {
            out.push((d, g.deg() as u32 / d));
            sf = sf.div(&g, p);
            xq = xq.rem(&sf, p);
        }
    }
    out
}

/// Product of the distinct irreducible factors of f.
pub fn squarefree_part(f: &FpPoly, p: u64) -> FpPoly {
    let f = f.monic(p);
    if f.deg() <= 0 {
        return f;
    }
    let fd = f.derivative(p);
    if fd.is_zero() {
        // f = g(x^p) = (g*(x))^p over F_p, with identical coefficients
        let mut g = vec![0u64; f.deg() as usize / p as usize + 1];
        for (i, gi) in g.iter_mut().enumerate() {
            *gi = f.coeffs.get(i * p as usize).copied().unwrap_or(0);
        }
        return squarefree_part(&FpPoly::from_coeffs(g, p), p);
    }
    let g = f.gcd(&fd, p);
    let h = f.div(&g, p); // squarefree, contains every distinct factor of multiplicity not divisible by p
    if g.deg() == 0 {
        return h;
    }
    // factors of f hiding entirely in g (multiplicity divisible by p)
    let rest = squarefree_part(&g, p);
    let extra = rest.div(&rest.gcd(&h, p), p);
    h.mul(&extra, p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn least_irreducible_matches_known_small_cases() {
        assert_eq!(least_irreducible(2, 1).coeffs, vec![0, 1]); // x
        assert_eq!(least_irreducible(2, 2).coeffs, vec![1, 1, 1]); // x^2+x+1
        assert_eq!(least_irreducible(3, 2).coeffs, vec![1, 0, 1]); // x^2+1
    }

    #[test]
    fn irreducibility_by_brute_force_products() {
        // degree-4 over F_2: cross-check against trial division by all lower-degree polys
        let p = 2;
        for mask in 0..16u64 {
            let mut coeffs: Vec<u64> = (0..4).map(|i| (mask >> i) & 1).collect();
            coeffs.push(1);
            let f = FpPoly { coeffs };
            let fast = is_irreducible(&f, p);
            let mut slow = true;
            for dmask in 2..16u64 {
                let dc: Vec<u64> = (0..4).map(|i| (dmask >> i) & 1).collect();
                let d = FpPoly::from_coeffs(dc, p);
                if d.deg() >= 1 && d.deg() <= 3 && f.rem(&d, p).is_zero() {
                    slow = false;
                    break;
                }
            }
            assert_eq!(fast, slow, "mismatch for {:?}", f.coeffs);
        }
    }

    #[test]
    fn factor_degrees_examples() {
        // x^3 - 1 = (x-1)(x^2+x+1) over F_2
        let f = FpPoly::from_coeffs(vec![1, 0, 0, 1], 2);
        assert_eq!(factor_degrees(&f, 2), vec![(1, 1), (2, 1)]);
        // x^2 - 2 irreducible over F_3
        let f = FpPoly::from_coeffs(vec![1, 0, 1], 3);
        assert_eq!(factor_degrees(&f, 3), vec![(2, 1)]);
        // (x-1)^6 over F_3: squarefree part x-1
        let mut f = FpPoly::constant(1, 3);
        let lin = FpPoly::from_coeffs(vec![2, 1], 3);
        for _ in 0..6 {
            f = f.mul(&lin, 3);
        }
        assert_eq!(factor_degrees(&f, 3), vec![(1, 1)]);
    }
}
