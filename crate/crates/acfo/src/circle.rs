//! Exact arithmetic and predicates on the circle group of roots of unity
//! with order coprime to p, represented as reduced rationals in [0, 1) with
//! p-free denominators, plus the ordered-group cover structure (winding
//! integer + circle point) and its truncation back to the circle.
//!
//! `char_p = 0` selects the characteristic-zero circle (all roots of unity,
//! no denominator restriction).

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num::{BigInt, BigRational, BigUint, Integer, One, Signed, Zero};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A point of the circle group: the reduced fraction num/den in [0, 1),
/// standing for e^(2*pi*i*num/den). When `char_p` is a prime p the
/// denominator is kept coprime to p; `char_p = 0` allows every denominator.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CirclePoint {
    num: BigUint,
    den: BigUint,
    char_p: u64,
}

impl fmt::Debug for CirclePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CirclePoint({}/{} @p={})", self.num, self.den, self.char_p)
    }
}

impl fmt::Display for CirclePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for CirclePoint {
    type Err = Error;

    /// Parses "num/den" (or a bare integer, meaning the identity class).
    /// The characteristic is 0; use [`CirclePoint::with_char`] afterwards.
    fn from_str(s: &str) -> Result<Self> {
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s.trim(), "1"),
        };
        let num = BigInt::from_str(n)
            .map_err(|e| Error::BadCirclePoint(format!("bad numerator {n:?}: {e}")))?;
        let den = BigInt::from_str(d)
            .map_err(|e| Error::BadCirclePoint(format!("bad denominator {d:?}: {e}")))?;
        CirclePoint::new(num, den, 0)
    }
}

impl Serialize for CirclePoint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for CirclePoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        CirclePoint::from_str(&s).map_err(de::Error::custom)
    }
}

fn reduce_mod1(num: BigInt, den: BigInt) -> Result<(BigUint, BigUint)> {
    if den.is_zero() {
        return Err(Error::BadCirclePoint("zero denominator".into()));
    }
    let (num, den) = if den.is_negative() { (-num, -den) } else { (num, den) };
    let num = num.mod_floor(&den); // now 0 <= num < den
    let num = num.to_biguint().unwrap();
    let den = den.to_biguint().unwrap();
    let g = num.gcd(&den);
    Ok((&num / &g, &den / &g))
}

impl CirclePoint {
    /// Reduced point num/den mod 1. Errors if den = 0 or, for prime
    /// `char_p`, if the reduced denominator is divisible by p.
    pub fn new(num: impl Into<BigInt>, den: impl Into<BigInt>, char_p: u64) -> Result<Self> {
        let (num, den) = reduce_mod1(num.into(), den.into())?;
        if char_p != 0 && (&den % char_p).is_zero() {
            return Err(Error::BadCirclePoint(format!(
                "denominator {den} divisible by the characteristic {char_p}"
            )));
        }
        Ok(CirclePoint { num, den, char_p })
    }

    /// The identity (l-value 0), the minimum of the circle order.
    pub fn zero(char_p: u64) -> Self {
        CirclePoint {
            num: BigUint::zero(),
            den: BigUint::one(),
            char_p,
        }
    }

    pub fn num(&self) -> &BigUint {
        &self.num
    }

    pub fn den(&self) -> &BigUint {
        &self.den
    }

    pub fn char_p(&self) -> u64 {
        self.char_p
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// Same fraction in a different characteristic (errors if the
    /// denominator is not coprime to the new one).
    pub fn with_char(&self, char_p: u64) -> Result<Self> {
        CirclePoint::new(
            BigInt::from(self.num.clone()),
            BigInt::from(self.den.clone()),
            char_p,
        )
    }

    /// The l-value num/den as an exact rational in [0, 1).
    pub fn value(&self) -> BigRational {
        BigRational::new(self.num.clone().into(), self.den.clone().into())
    }

    pub fn from_rational(r: &BigRational, char_p: u64) -> Result<Self> {
        CirclePoint::new(r.numer().clone(), r.denom().clone(), char_p)
    }

    fn check_char(&self, other: &Self) -> Result<()> {
        if self.char_p != other.char_p {
            return Err(Error::CharMismatch(self.char_p, other.char_p));
        }
        Ok(())
    }

    /// Strict comparison of l-values; the identity is the minimum.
    pub fn compare(&self, other: &Self) -> Result<Ordering> {
        self.check_char(other)?;
        Ok(self.cmp_values(other))
    }

    pub(crate) fn cmp_values(&self, other: &Self) -> Ordering {
        (&self.num * &other.den).cmp(&(&other.num * &self.den))
    }

    /// Group operation (addition of l-values mod 1).
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_char(other)?;
        let num =
            BigInt::from(&self.num * &other.den) + BigInt::from(&other.num * &self.den);
        CirclePoint::new(num, BigInt::from(&self.den * &other.den), self.char_p)
    }

    /// Group inverse (negation mod 1).
    pub fn inv(&self) -> Self {
        if self.num.is_zero() {
            return self.clone();
        }
        CirclePoint {
            num: &self.den - &self.num,
            den: self.den.clone(),
            char_p: self.char_p,
        }
    }

    /// e-th power (scaling of the l-value mod 1).
    pub fn pow(&self, e: &BigInt) -> Self {
        let num = BigInt::from(self.num.clone()) * e;
        CirclePoint::new(num, BigInt::from(self.den.clone()), self.char_p)
            .expect("scaling cannot introduce new denominator factors")
    }

    pub fn pow_i64(&self, e: i64) -> Self {
        self.pow(&BigInt::from(e))
    }

    /// Winding number wn(self, n) = floor(n * l-value): the number of
    /// descents in the power sequence self^0, ..., self^n. O(1) floor form;
    /// the descent counter is [`CirclePoint::winding_number_by_descents`].
    pub fn winding_number(&self, n: u64) -> u64 {
        assert!(n >= 1);
        let prod = &self.num * n;
        let q = &prod / &self.den;
        u64::try_from(&q).expect("winding number fits u64")
    }

    /// Independent descent-counting implementation of the winding number,
    /// retained as a cross-check oracle: counts k in [0, n) with
    /// frac((k+1)t) < frac(kt).
    pub fn winding_number_by_descents(&self, n: u64) -> u64 {
        assert!(n >= 1);
        let mut count = 0u64;
        let mut cur = BigUint::zero(); // numerator of frac(k*t) over den
        for _ in 0..n {
            let mut next = &cur + &self.num;
            if next >= self.den {
                next -= &self.den;
            }
            if next < cur {
                count += 1;
            }
            cur = next;
        }
        count
    }

    /// The root-with-winding predicate: true iff there is c with c^n = self
    /// and wn(c, n) = r. The candidate root is (num + r*den)/(n*den); the
    /// predicate holds exactly when its reduced denominator stays p-free.
    pub fn pred_p(&self, n: u64, r: u64) -> bool {
        assert!(n >= 1, "pred_p needs n >= 1");
        assert!(r < n, "pred_p needs r < n");
        if self.char_p == 0 {
            return true;
        }
        // reduced denominator of (num + r*den)/(n*den) is p-free iff
        // p^v_p(n) divides num + r*den (den itself is p-free)
        let p = self.char_p;
        let mut pe: u64 = 1;
        let mut n_rest = n;
        while n_rest % p == 0 {
            pe *= p;
            n_rest /= p;
        }
        if pe == 1 {
            return true;
        }
        let cand = &self.num + &self.den * r;
        (cand % pe).is_zero()
    }

    /// The candidate n-th root with winding number r, when it exists in the
    /// p-free circle.
    pub fn root_with_winding(&self, n: u64, r: u64) -> Option<CirclePoint> {
        assert!(n >= 1 && r < n);
        let num = BigInt::from(&self.num + &self.den * r);
        let den = BigInt::from(&self.den * n);
        CirclePoint::new(num, den, self.char_p).ok()
    }
}

/// An element k + t of the ordered cover group: winding integer k plus a
/// circle point t, with carry addition. The constants -1, 0, 1 are
/// (-1, 0), (0, 0), (1, 0).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CoverElement {
    pub k: BigInt,
    pub t: CirclePoint,
}

impl fmt::Display for CoverElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.k, self.t)
    }
}

impl Serialize for CoverElement {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl CoverElement {
    pub fn new(k: impl Into<BigInt>, t: CirclePoint) -> Self {
        CoverElement { k: k.into(), t }
    }

    pub fn zero(char_p: u64) -> Self {
        CoverElement {
            k: BigInt::zero(),
            t: CirclePoint::zero(char_p),
        }
    }

    pub fn one(char_p: u64) -> Self {
        CoverElement {
            k: BigInt::one(),
            t: CirclePoint::zero(char_p),
        }
    }

    pub fn minus_one(char_p: u64) -> Self {
        CoverElement {
            k: BigInt::from(-1),
            t: CirclePoint::zero(char_p),
        }
    }

    pub fn char_p(&self) -> u64 {
        self.t.char_p
    }

    /// Carry addition: (k, t) + (k', t') is (k + k', t t') when t <= t t'
    /// in the circle order and (k + k' + 1, t t') otherwise. Agrees with
    /// exact rational addition under the identification k + l(t).
    pub fn add(&self, other: &Self) -> Result<Self> {
        let t = self.t.mul(&other.t)?;
        let wrapped = self.t.cmp_values(&t) == Ordering::Greater;
        let k = &self.k + &other.k + if wrapped { 1 } else { 0 };
        Ok(CoverElement { k, t })
    }

    pub fn neg(&self) -> Self {
        if self.t.is_zero() {
            CoverElement { k: -&self.k, t: self.t.clone() }
        } else {
            CoverElement {
                k: -&self.k - 1,
                t: self.t.inv(),
            }
        }
    }

    /// Lexicographic order on (k, t); equals the order of k + l(t).
    pub fn compare(&self, other: &Self) -> Result<Ordering> {
        self.t.check_char(&other.t)?;
        Ok(self
            .k
            .cmp(&other.k)
            .then_with(|| self.t.cmp_values(&other.t)))
    }

    /// Exact rational value k + l(t).
    pub fn as_rational(&self) -> BigRational {
        BigRational::from(self.k.clone()) + self.t.value()
    }

    pub fn from_rational(r: &BigRational, char_p: u64) -> Result<Self> {
        let k = r.floor().to_integer();
        let frac = r - BigRational::from(k.clone());
        Ok(CoverElement {
            k,
            t: CirclePoint::from_rational(&frac, char_p)?,
        })
    }

    /// Divisibility by n in the cover: holds iff t has an n-th root with
    /// winding number k mod n.
    pub fn divisible_by(&self, n: u64) -> bool {
        assert!(n >= 1);
        let r = self.k.mod_floor(&BigInt::from(n));
        let r = u64::try_from(&r).expect("residue fits u64");
        self.t.pred_p(n, r)
    }

    /// The truncation product on the window k = 0: circle multiplication
    /// with the carry dropped.
    pub fn truncate_mul(&self, other: &Self) -> Result<Self> {
        if !self.k.is_zero() || !other.k.is_zero() {
            return Err(Error::NotInTruncationWindow);
        }
        Ok(CoverElement {
            k: BigInt::zero(),
            t: self.t.mul(&other.t)?,
        })
    }
}

/// One failed check from [`validate_ta_axioms`].
#[derive(Debug, Clone, Serialize)]
pub struct TaViolation {
    pub axiom: u8,
    pub detail: String,
}

/// Report from the ordered-group axiom validation.
#[derive(Debug, Clone, Serialize)]
pub struct TaReport {
    pub checks_run: u64,
    pub violations: Vec<TaViolation>,
}

impl TaReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check, on a finite sample, the two contentful ordered-group axioms of the
/// cover structure: (5) for each prime-power q = p^j <= n_max, every element
/// has exactly one r in [0, q) with q | (element - r); (6) between any two
/// consecutive sample elements and for every n <= n_max there is an
/// n-divisible element strictly between, found by construction (midpoint
/// adjusted into the congruence class), not search.
pub fn validate_ta_axioms(sample: &[CoverElement], n_max: u64) -> TaReport {
    let mut report = TaReport { checks_run: 0, violations: vec![] };
    if sample.is_empty() {
        return report;
    }
    let p = sample[0].char_p();

    // axiom 5: uniqueness of the residue for prime-power moduli
    if p != 0 {
        let mut q = p;
        while q <= n_max {
            for alpha in sample {
                report.checks_run += 1;
                let mut hits = 0u64;
                for r in 0..q {
                    // alpha + r*(-1) = (k - r, t)
                    let shifted = CoverElement {
                        k: &alpha.k - BigInt::from(r),
                        t: alpha.t.clone(),
                    };
                    if shifted.divisible_by(q) {
                        hits += 1;
                    }
                }
                if hits != 1 {
                    report.violations.push(TaViolation {
                        axiom: 5,
                        detail: format!("{alpha} has {hits} residues mod {q}, expected 1"),
                    });
                }
            }
            match q.checked_mul(p) {
                Some(next) => q = next,
                None => break,
            }
        }
    }

    // axiom 6: constructed divisible witnesses between consecutive elements
    let mut sorted: Vec<&CoverElement> = sample.iter().collect();
    sorted.sort_by(|a, b| a.compare(b).expect("uniform characteristic"));
    sorted.dedup_by(|a, b| a == b);
    for pair in sorted.windows(2) {
        let (lo, hi) = (pair[0].as_rational(), pair[1].as_rational());
        for n in 1..=n_max {
            report.checks_run += 1;
            match divisible_between(&lo, &hi, n, p) {
                Some(gamma) => {
                    let elem = CoverElement::from_rational(&gamma, p)
                        .expect("constructed witness has p-free denominator");
                    if !(gamma > lo && gamma < hi && elem.divisible_by(n)) {
                        report.violations.push(TaViolation {
                            axiom: 6,
                            detail: format!(
                                "witness {gamma} for n={n} in ({lo}, {hi}) failed verification"
                            ),
                        });
                    }
                }
                None => report.violations.push(TaViolation {
                    axiom: 6,
                    detail: format!("no witness constructed for n={n} in ({lo}, {hi})"),
                }),
            }
        }
    }
    report
}

/// A rational in (lo, hi) divisible by n in the localization at p: value
/// p^e * c / d with d coprime to p, where p^e is the p-part of n.
/// Constructed by scaling, never searched.
fn divisible_between(
    lo: &BigRational,
    hi: &BigRational,
    n: u64,
    p: u64,
) -> Option<BigRational> {
    if hi <= lo {
        return None;
    }
    let mut pe: u64 = 1;
    if p != 0 {
        let mut rest = n;
        while rest % p == 0 {
            pe = pe.checked_mul(p)?;
            rest /= p;
        }
    }
    // choose a p-free scale s^j with p^e/s^j smaller than half the gap
    let s: u64 = if p == 2 { 3 } else { 2 };
    let width = hi - lo;
    let mut scale = BigUint::one();
    let pe_big = BigUint::from(pe);
    loop {
        // need pe/scale < width/2, i.e. 2*pe < width*scale
        let lhs = BigRational::new(BigInt::from(2u32) * BigInt::from(pe_big.clone()), BigInt::one());
        let rhs = &width * BigRational::new(BigInt::from(scale.clone()), BigInt::one());
        if lhs < rhs {
            break;
        }
        scale *= s;
    }
    // gamma = pe * c / scale for the least integer c with gamma > lo
    let step = BigRational::new(BigInt::from(pe_big), BigInt::from(scale));
    let c = (lo / &step).floor() + BigRational::one();
    let gamma = &step * c;
    debug_assert!(gamma > *lo && gamma < *hi);
    Some(gamma)
}

pub(crate) fn circle_of_sign(sign_negative: bool) -> CirclePoint {
    if sign_negative {
        CirclePoint::new(1, 2, 0).unwrap()
    } else {
        CirclePoint::zero(0)
    }
}
