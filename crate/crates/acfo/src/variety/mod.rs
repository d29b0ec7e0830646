//! Quasi-affine constructible sets Z(P) \ Z(Q) over a base field of the
//! tower, point enumeration over extensions, monomial-relation lattices and
//! the multiplicative-largeness verdict, product-set stabilization,
//! hyper-arcs, and the genericity probe.
//!
//! Irreducibility of the underlying variety is the caller's responsibility;
//! the engine treats the set as constructible data.

pub mod engine;
pub mod mpoly;

use std::collections::BTreeSet;

use num::{BigInt, Integer, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::chi::CharacterContext;
use crate::circle::CirclePoint;
use crate::error::{Error, Result};
use crate::gf::FieldElement;
use crate::linalg::{self, Mat};

pub use engine::{LevelEngine, PointView, ScanSpec, LOG_ZERO};
pub use mpoly::MultiPoly;

/// A constructible set: the points of `m`-space where every polynomial in
/// `eqs` vanishes, minus the common zero set of `neqs` (when nonempty).
#[derive(Debug, Clone)]
pub struct VarietySpec {
    pub m: usize,
    pub base: CharacterContext,
    pub eqs: Vec<MultiPoly>,
    pub neqs: Vec<MultiPoly>,
    pub claimed_dim: Option<u32>,
}

/// On-disk form: polynomials in text syntax over variables x1..xm.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VarietyFile {
    pub m: usize,
    pub p: u64,
    pub base_level: u32,
    pub eqs: Vec<String>,
    pub neqs: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub claimed_dim: Option<u32>,
}

impl VarietySpec {
    pub fn new(
        m: usize,
        base: CharacterContext,
        eqs: Vec<MultiPoly>,
        neqs: Vec<MultiPoly>,
        claimed_dim: Option<u32>,
    ) -> Result<Self> {
        for p in eqs.iter().chain(&neqs) {
            if p.nvars() != m {
                return Err(Error::BadInput(format!(
                    "polynomial over {} variables in a dimension-{} spec",
                    p.nvars(),
                    m
                )));
            }
        }
        Ok(VarietySpec { m, base, eqs, neqs, claimed_dim })
    }

    pub fn from_file(file: &VarietyFile) -> Result<Self> {
        let base = CharacterContext::create(file.p, file.base_level.max(1))?;
        let eqs = file
            .eqs
            .iter()
            .map(|s| MultiPoly::parse(s, 'x', file.m))
            .collect::<Result<Vec<_>>>()?;
        let neqs = file
            .neqs
            .iter()
            .map(|s| MultiPoly::parse(s, 'x', file.m))
            .collect::<Result<Vec<_>>>()?;
        Self::new(file.m, base, eqs, neqs, file.claimed_dim)
    }

    pub fn to_file(&self) -> VarietyFile {
        VarietyFile {
            m: self.m,
            p: self.base.p(),
            base_level: self.base.l(),
            eqs: self.eqs.iter().map(|p| p.to_string()).collect(),
            neqs: self.neqs.iter().map(|p| p.to_string()).collect(),
            claimed_dim: self.claimed_dim,
        }
    }

    /// The character context of F_{q^k}, coherent with the base context.
    pub fn level_context(&self, k: u32) -> Result<CharacterContext> {
        if k == 0 {
            return Err(Error::BadInput("level must be positive".into()));
        }
        self.base.extend_ambient(self.base.l() * k)
    }

    pub fn engine(&self, k: u32) -> Result<LevelEngine> {
        LevelEngine::new(self.level_context(k)?)
    }

    pub(crate) fn scan_spec(&self, eng: &LevelEngine, torus_only: bool) -> ScanSpec {
        ScanSpec {
            m: self.m,
            torus_only,
            eqs: self.eqs.iter().map(|p| eng.compile(p)).collect(),
            neqs: self.neqs.iter().map(|p| eng.compile(p)).collect(),
        }
    }

    /// All points at level k in deterministic enumeration order.
    pub fn enumerate_points(&self, k: u32, torus_only: bool) -> Result<Vec<Vec<FieldElement>>> {
        let eng = self.engine(k)?;
        let spec = self.scan_spec(&eng, torus_only);
        let ranks = eng.scan_fold(
            &spec,
            Vec::new,
            |acc: &mut Vec<Vec<u64>>, pt| acc.push(pt.ranks.to_vec()),
            |mut a, b| {
                a.extend(b);
                a
            },
        )?;
        let field = eng.chi.field();
        Ok(ranks
            .into_iter()
            .map(|rs| rs.iter().map(|&r| field.element_from_rank(r)).collect())
            .collect())
    }

    pub fn count_points(&self, k: u32, torus_only: bool) -> Result<u64> {
        let eng = self.engine(k)?;
        let spec = self.scan_spec(&eng, torus_only);
        eng.scan_fold(&spec, || 0u64, |acc, _| *acc += 1, |a, b| a + b)
    }

    /// Distinct discrete-log vectors of the torus points at level k, in
    /// sorted order, together with the group order at that level.
    pub(crate) fn dlog_vectors(&self, k: u32) -> Result<(BTreeSet<Vec<u64>>, u64)> {
        let eng = self.engine(k)?;
        let spec = self.scan_spec(&eng, true);
        let set = eng.scan_fold(
            &spec,
            BTreeSet::new,
            |acc: &mut BTreeSet<Vec<u64>>, pt| {
                acc.insert(pt.logs.to_vec());
            },
            |mut a, b| {
                a.extend(b);
                a
            },
        )?;
        Ok((set, eng.order()))
    }

    /// Basis of the lattice { l : x^l is constant on the torus points at
    /// level k }. Always contains (q^k - 1) Z^m; equality with it means "no
    /// nontrivial relations at this level".
    pub fn relation_lattice(&self, k: u32) -> Result<RelationLattice> {
        let (vectors, n) = self.dlog_vectors(k)?;
        let Some(base) = vectors.iter().next().cloned() else {
            return Err(Error::EmptyTorusPart);
        };
        let nb = BigInt::from(n);
        let mut basis = linalg::identity(self.m);
        for v in &vectors {
            let delta: Vec<BigInt> = v
                .iter()
                .zip(&base)
                .map(|(&a, &b)| BigInt::from((a + n - b) % n))
                .collect();
            if delta.iter().all(|d| d.is_zero()) {
                continue;
            }
            basis = linalg::lattice_intersect_congruence(basis, &delta, &nb);
        }
        Ok(RelationLattice {
            m: self.m,
            modulus: n,
            basis: linalg::hnf_rows(basis),
        })
    }

    /// Semi-decision of multiplicative largeness. `Large(k)` is sound for
    /// relations of exponent height below q^k - 1: any monomial identity on
    /// the full variety restricts to every level. `NotLarge` is a
    /// two-level certificate (relation found at k_max, re-verified with the
    /// same constant at 2 k_max) and is flagged heuristic.
    pub fn largeness_verdict(&self, k_max: u32) -> Result<LargenessVerdict> {
        let mut last_lattice: Option<RelationLattice> = None;
        for k in 1..=k_max {
            match self.relation_lattice(k) {
                Ok(lat) => {
                    if lat.is_trivial() {
                        return Ok(LargenessVerdict::Large { witness_level: k });
                    }
                    last_lattice = Some(lat);
                }
                Err(Error::EmptyTorusPart) => continue,
                Err(e) => return Err(e),
            }
        }
        let Some(lat) = last_lattice else {
            return Ok(LargenessVerdict::Unknown { cap: k_max });
        };
        // candidate relations: balanced representatives of the basis rows
        let n = BigInt::from(lat.modulus);
        let half = &n / 2;
        let mut candidates: Vec<Vec<BigInt>> = vec![];
        for row in &lat.basis {
            let balanced: Vec<BigInt> = row
                .iter()
                .map(|c| {
                    let r = c.mod_floor(&n);
                    if r > half {
                        r - &n
                    } else {
                        r
                    }
                })
                .collect();
            if balanced.iter().all(|c| c.is_zero()) {
                continue;
            }
            // lexicographically least of {v, -v}
            let negated: Vec<BigInt> = balanced.iter().map(|c| -c).collect();
            candidates.push(if negated < balanced { negated } else { balanced });
        }
        candidates.sort_by_key(|v| {
            (
                v.iter().map(|c| c.abs()).sum::<BigInt>(),
                v.clone(),
            )
        });
        candidates.dedup();
        for l in candidates {
            if let Some((chi_val, desc)) = self.verify_relation(&l, k_max)? {
                return Ok(LargenessVerdict::NotLarge {
                    relation: l,
                    constant_chi: chi_val,
                    constant_desc: desc,
                });
            }
        }
        Ok(LargenessVerdict::Unknown { cap: k_max })
    }

    /// Check that x^l is the same constant on the torus points at levels
    /// k_max and 2*k_max (character values compared as exact fractions,
    /// which coherent extensions preserve).
    fn verify_relation(&self, l: &[BigInt], k_max: u32) -> Result<Option<(CirclePoint, String)>> {
        let mut constants: Vec<CirclePoint> = vec![];
        for k in [k_max, 2 * k_max] {
            let (vectors, n) = match self.dlog_vectors(k) {
                Ok(v) => v,
                Err(Error::SizeCapExceeded(_)) => return Ok(None),
                Err(e) => return Err(e),
            };
            if vectors.is_empty() {
                return Ok(None);
            }
            let nb = BigInt::from(n);
            let mut value: Option<BigInt> = None;
            for v in &vectors {
                let dot: BigInt = v
                    .iter()
                    .zip(l)
                    .map(|(&d, c)| BigInt::from(d) * c)
                    .sum::<BigInt>()
                    .mod_floor(&nb);
                match &value {
                    None => value = Some(dot),
                    Some(prev) if *prev == dot => {}
                    Some(_) => return Ok(None),
                }
            }
            constants.push(CirclePoint::new(value.unwrap(), nb, self.base.p())?);
        }
        if constants[0] != constants[1] {
            return Ok(None);
        }
        let chi_val = constants[0].clone();
        // describe the constant as a field element where representable
        let desc = match self
            .level_context(k_max)
            .and_then(|ctx| ctx.chi_inv(&chi_val))
        {
            Ok(elem) => format!("{elem} at level {k_max}"),
            Err(_) => format!("chi value {chi_val}"),
        };
        Ok(Some((chi_val, desc)))
    }

    /// Iterated product sets of b^{-1} V^x inside the level-k torus, where b
    /// is the first torus point in enumeration order. Returns the first s
    /// with S^s = S^{s+1}, whether the stabilized set is the full torus, and
    /// an explicit closure check S*S = S.
    pub fn product_set_oracle(&self, k: u32, steps: usize) -> Result<ProductSetReport> {
        let eng = self.engine(k)?;
        let n = eng.order();
        let cap = self.base.field().budget().product_set_cap;
        let full: u128 = (n as u128).pow(self.m as u32);
        if full > cap as u128 {
            return Err(Error::SizeCapExceeded(format!(
                "torus of size {full} exceeds the product-set cap {cap}"
            )));
        }
        let spec = self.scan_spec(&eng, true);
        let points: Vec<Vec<u64>> = eng.scan_fold(
            &spec,
            Vec::new,
            |acc: &mut Vec<Vec<u64>>, pt| acc.push(pt.logs.to_vec()),
            |mut a, b| {
                a.extend(b);
                a
            },
        )?;
        if points.is_empty() {
            return Err(Error::EmptyTorusPart);
        }
        let b = points[0].clone();
        let s1: BTreeSet<Vec<u64>> = points
            .iter()
            .map(|d| {
                d.iter()
                    .zip(&b)
                    .map(|(&x, &y)| (x + n - y) % n)
                    .collect()
            })
            .collect();
        let sum_sets = |a: &BTreeSet<Vec<u64>>, b: &BTreeSet<Vec<u64>>| -> BTreeSet<Vec<u64>> {
            let mut out = BTreeSet::new();
            for x in a {
                for y in b {
                    let s: Vec<u64> = x.iter().zip(y).map(|(&u, &v)| (u + v) % n).collect();
                    out.insert(s);
                }
            }
            out
        };
        let mut cur = s1.clone();
        let mut stabilized_at = None;
        for s in 1..=steps {
            let next = sum_sets(&cur, &s1);
            if next.len() > cap {
                return Err(Error::SizeCapExceeded("product set exceeded the cap".into()));
            }
            if next == cur {
                stabilized_at = Some(s);
                break;
            }
            cur = next;
        }
        let closed = sum_sets(&cur, &cur) == cur;
        Ok(ProductSetReport {
            stabilized_at,
            full_torus: cur.len() as u128 == full,
            final_size: cur.len() as u64,
            closed_under_product: closed,
        })
    }

    /// Search V^x (F_{q^k}) for k = 1..k_max for a point of the hyper-arc.
    /// Membership is evaluated along two independent paths per point: the
    /// direct circle-side divisibility test and the field-side inverse
    /// Frobenius pullback; any disagreement is surfaced in the outcome.
    pub fn genericity_probe(&self, arc: &HyperArc, k_max: u32) -> Result<ProbeOutcome> {
        if arc.m != self.m {
            return Err(Error::BadBox(format!(
                "arc dimension {} does not match the variety dimension {}",
                arc.m, self.m
            )));
        }
        let mut paths_agreed = true;
        for k in 1..=k_max {
            let eng = self.engine(k)?;
            let tester = arc.tester(&eng)?;
            let spec = self.scan_spec(&eng, true);
            #[derive(Default)]
            struct Acc {
                first_hit: Option<Vec<u64>>,
                disagreements: u64,
            }
            let acc = eng.scan_fold(
                &spec,
                Acc::default,
                |acc: &mut Acc, pt| {
                    let a = tester.contains_circle(pt.logs);
                    let b = tester.contains_pullback(pt.logs);
                    if a != b {
                        acc.disagreements += 1;
                    }
                    if a && acc.first_hit.is_none() {
                        acc.first_hit = Some(pt.ranks.to_vec());
                    }
                },
                |mut a, b| {
                    if a.first_hit.is_none() {
                        a.first_hit = b.first_hit;
                    }
                    a.disagreements += b.disagreements;
                    a
                },
            )?;
            paths_agreed &= acc.disagreements == 0;
            if let Some(ranks) = acc.first_hit {
                let field = eng.chi.field();
                let point: Vec<FieldElement> =
                    ranks.iter().map(|&r| field.element_from_rank(r)).collect();
                debug_assert!(arc.contains(&eng.chi, &point)?);
                return Ok(ProbeOutcome::Witness { level: k, point, paths_agreed });
            }
        }
        Ok(ProbeOutcome::NotFound { cap: k_max, paths_agreed })
    }
}

/// The lattice of monomial exponents constant on the level-k torus points.
#[derive(Debug, Clone)]
pub struct RelationLattice {
    pub m: usize,
    pub modulus: u64,
    pub basis: Mat,
}

impl RelationLattice {
    /// True iff the lattice is exactly (q^k - 1) Z^m: no relations beyond
    /// the ones every unit satisfies.
    pub fn is_trivial(&self) -> bool {
        if self.basis.len() != self.m {
            return false;
        }
        let n = BigInt::from(self.modulus);
        for (i, row) in self.basis.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                let expect = if i == j { &n } else { &BigInt::ZERO };
                if e != expect {
                    return false;
                }
            }
        }
        true
    }

    pub fn contains(&self, l: &[BigInt]) -> bool {
        linalg::lattice_contains(&self.basis, l)
    }
}

#[derive(Debug, Clone)]
pub enum LargenessVerdict {
    Large {
        witness_level: u32,
    },
    /// Heuristic certificate: the relation held with the same constant at
    /// k_max and 2*k_max.
    NotLarge {
        relation: Vec<BigInt>,
        constant_chi: CirclePoint,
        constant_desc: String,
    },
    Unknown {
        cap: u32,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct ProductSetReport {
    pub stabilized_at: Option<usize>,
    pub full_torus: bool,
    pub final_size: u64,
    pub closed_under_product: bool,
}

#[derive(Debug, Clone)]
pub enum ProbeOutcome {
    Witness {
        level: u32,
        point: Vec<FieldElement>,
        paths_agreed: bool,
    },
    NotFound {
        cap: u32,
        paths_agreed: bool,
    },
}

/// A (q-)hyper-arc: the open order box (lo, hi) intersected with the
/// translated divisibility condition x*e in (P^0_q)^m. q = 1 gives a plain
/// hyper-arc (e unused).
#[derive(Debug, Clone)]
pub struct HyperArc {
    pub m: usize,
    pub q: u64,
    pub lo: Vec<CirclePoint>,
    pub hi: Vec<CirclePoint>,
    pub e: Vec<CirclePoint>,
}

/// Arc descriptions keep denominators small so per-point membership tests
/// stay in fixed-width integers.
const ARC_DEN_CAP: u64 = 1 << 20;
const ARC_Q_CAP: u64 = 1 << 15;

impl HyperArc {
    pub fn new(
        p: u64,
        q: u64,
        lo: Vec<CirclePoint>,
        hi: Vec<CirclePoint>,
        e: Vec<CirclePoint>,
    ) -> Result<Self> {
        let m = lo.len();
        if hi.len() != m || e.len() != m || m == 0 {
            return Err(Error::BadBox("bound vectors must share a positive length".into()));
        }
        if q != 1 {
            if q > ARC_Q_CAP {
                return Err(Error::BadBox(format!("q = {q} exceeds the arc cap")));
            }
            let mut t = q;
            while t % p == 0 {
                t /= p;
            }
            if t != 1 {
                return Err(Error::BadBox(format!("q = {q} is not a power of p = {p}")));
            }
        }
        for v in lo.iter().chain(&hi).chain(&e) {
            if v.char_p() != p {
                return Err(Error::BadBox("arc points must carry the ambient characteristic".into()));
            }
            if *v.den() > num::BigUint::from(ARC_DEN_CAP) {
                return Err(Error::BadBox(format!(
                    "arc denominator {} exceeds the supported range",
                    v.den()
                )));
            }
        }
        for i in 0..m {
            if lo[i].compare(&hi[i])? != std::cmp::Ordering::Less {
                return Err(Error::BadBox(format!(
                    "bound {i}: lower {} is not strictly below upper {}",
                    lo[i], hi[i]
                )));
            }
            if q != 1 {
                // the no-wrap condition on the translate
                let le = lo[i].mul(&e[i])?;
                let he = hi[i].mul(&e[i])?;
                if lo[i].compare(&le)? != std::cmp::Ordering::Less
                    || hi[i].compare(&he)? != std::cmp::Ordering::Less
                {
                    return Err(Error::BadBox(format!(
                        "bound {i}: translate by e wraps around the circle"
                    )));
                }
            }
        }
        Ok(HyperArc { m, q, lo, hi, e })
    }

    /// A plain open box (q = 1).
    pub fn plain_box(p: u64, lo: Vec<CirclePoint>, hi: Vec<CirclePoint>) -> Result<Self> {
        let e = vec![CirclePoint::zero(p); lo.len()];
        Self::new(p, 1, lo, hi, e)
    }

    /// Exact membership via character values (the circle-side path).
    pub fn contains(&self, chi: &CharacterContext, point: &[FieldElement]) -> Result<bool> {
        if point.len() != self.m {
            return Err(Error::BadBox("point dimension mismatch".into()));
        }
        for x in point {
            if x.is_zero() {
                return Err(Error::ZeroCoordinate);
            }
        }
        for (i, x) in point.iter().enumerate() {
            let t = chi.chi(x)?;
            if self.lo[i].compare(&t)? != std::cmp::Ordering::Less
                || t.compare(&self.hi[i])? != std::cmp::Ordering::Less
            {
                return Ok(false);
            }
            if self.q != 1 {
                let translated = t.mul(&self.e[i])?;
                if !translated.pred_p(self.q, 0) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    fn tester(&self, eng: &LevelEngine) -> Result<ArcTester> {
        let n = eng.order();
        let nb = n as u128;
        let mut dims = Vec::with_capacity(self.m);
        for i in 0..self.m {
            let num_u64 = |c: &CirclePoint| u64::try_from(c.num()).unwrap();
            let den_u64 = |c: &CirclePoint| u64::try_from(c.den()).unwrap();
            let (lon, lod) = (num_u64(&self.lo[i]), den_u64(&self.lo[i]));
            let (hin, hid) = (num_u64(&self.hi[i]), den_u64(&self.hi[i]));
            let (en, ed) = (num_u64(&self.e[i]), den_u64(&self.e[i]));
            // canonical q-th root of e_i: (en + r*.ed)/(q.ed) with the
            // unique residue making the numerator divisible by q
            let (rn, rd) = if self.q == 1 {
                (0u128, 1u128)
            } else {
                let q = self.q;
                let ed_inv = crate::gf::fppoly::invm_any(ed % q, q);
                let r_star = (q - (en % q) * ed_inv % q) % q;
                ((en as u128) + (r_star as u128) * ed as u128, q as u128 * ed as u128)
            };
            dims.push(ArcDim {
                lo_scaled: lon as u128 * nb,
                lo_den: lod as u128,
                hi_scaled: hin as u128 * nb,
                hi_den: hid as u128,
                e_num: en as u128,
                e_den: ed as u128,
                root_num: rn,
                root_den: rd,
            });
        }
        // inverse Frobenius exponent: q^{-1} mod n (q is a p-power, coprime n)
        let u = if self.q == 1 {
            1u128
        } else {
            mod_inverse_u128(self.q as u128 % nb, nb)
        };
        Ok(ArcTester { q: self.q, n, u, dims })
    }
}

fn mod_inverse_u128(a: u128, m: u128) -> u128 {
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

struct ArcDim {
    lo_scaled: u128, // lo_num * n
    lo_den: u128,
    hi_scaled: u128,
    hi_den: u128,
    e_num: u128,
    e_den: u128,
    root_num: u128, // canonical q-th root of e, unreduced
    root_den: u128,
}

/// Per-level arc membership on raw dlogs, no allocation per point.
struct ArcTester {
    q: u64,
    n: u64,
    u: u128, // q^{-1} mod n
    dims: Vec<ArcDim>,
}

impl ArcTester {
    #[inline]
    fn in_bounds(&self, d: &ArcDim, log: u64) -> bool {
        let lg = log as u128;
        lg * d.lo_den > d.lo_scaled && lg * d.hi_den < d.hi_scaled
    }

    /// Path A: strict box bounds plus q | numerator of chi(x_i) + e_i.
    fn contains_circle(&self, logs: &[u64]) -> bool {
        for (d, &log) in self.dims.iter().zip(logs) {
            if log == LOG_ZERO || !self.in_bounds(d, log) {
                return false;
            }
            if self.q != 1 {
                let s = log as u128 * d.e_den + d.e_num * self.n as u128;
                if s % self.q as u128 != 0 {
                    return false;
                }
            }
        }
        true
    }

    /// Path B: pull back along the inverse Frobenius. The unique q-th root
    /// of x_i e_i is x_i^(1/q) times the canonical root of e_i; membership
    /// in P^0_q says its l-value lies in [0, 1/q).
    fn contains_pullback(&self, logs: &[u64]) -> bool {
        let nb = self.n as u128;
        for (d, &log) in self.dims.iter().zip(logs) {
            if log == LOG_ZERO || !self.in_bounds(d, log) {
                return false;
            }
            if self.q != 1 {
                let la = (log as u128 * self.u) % nb; // log of x^(1/q)
                let den = nb * d.root_den;
                let mut s = la * d.root_den + d.root_num * nb;
                if s >= den {
                    s -= den;
                }
                if self.q as u128 * s >= den {
                    return false;
                }
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn torus_line(p: u64) -> VarietySpec {
        // x1 + x2 = 1
        let base = CharacterContext::create(p, 1).unwrap();
        VarietySpec::new(
            2,
            base,
            vec![MultiPoly::parse("x1 + x2 - 1", 'x', 2).unwrap()],
            vec![],
            Some(1),
        )
        .unwrap()
    }

    fn cp(n: i64, d: i64, p: u64) -> CirclePoint {
        CirclePoint::new(n, d, p).unwrap()
    }

    #[test]
    fn enumerate_examples() {
        // p=3, x1 + x2 = 1, torus, k=1: only (2, 2)
        let v = torus_line(3);
        let pts = v.enumerate_points(1, true).unwrap();
        assert_eq!(pts.len(), 1);
        assert_eq!(pts[0][0].coeffs(), &[2]);
        assert_eq!(pts[0][1].coeffs(), &[2]);

        // empty equations, m=1, torus: all q-1 units
        let base = CharacterContext::create(7, 1).unwrap();
        let all = VarietySpec::new(1, base.clone(), vec![], vec![], None).unwrap();
        assert_eq!(all.count_points(1, true).unwrap(), 6);

        // x1 = 0 on the torus: empty
        let zero = VarietySpec::new(
            1,
            base,
            vec![MultiPoly::parse("x1", 'x', 1).unwrap()],
            vec![],
            None,
        )
        .unwrap();
        assert_eq!(zero.count_points(1, true).unwrap(), 0);
    }

    #[test]
    fn neq_exclusion() {
        // torus minus the point 1: eqs = [], neqs = [x1 - 1]
        let base = CharacterContext::create(5, 1).unwrap();
        let v = VarietySpec::new(
            1,
            base,
            vec![],
            vec![MultiPoly::parse("x1 - 1", 'x', 1).unwrap()],
            None,
        )
        .unwrap();
        let pts = v.enumerate_points(1, true).unwrap();
        let vals: Vec<u64> = pts.iter().map(|p| p[0].coeffs()[0]).collect();
        assert_eq!(vals, vec![2, 3, 4]);
    }

    #[test]
    fn counts_are_extension_invariant() {
        // counting over F_{3^2} directly or via a degree-2 base gives the same
        let v1 = torus_line(3);
        let base2 = CharacterContext::create(3, 2).unwrap();
        let v2 = VarietySpec::new(
            2,
            base2,
            vec![MultiPoly::parse("x1 + x2 - 1", 'x', 2).unwrap()],
            vec![],
            Some(1),
        )
        .unwrap();
        assert_eq!(
            v1.count_points(2, true).unwrap(),
            v2.count_points(1, true).unwrap()
        );
        assert_eq!(
            v1.count_points(4, false).unwrap(),
            v2.count_points(2, false).unwrap()
        );
    }

    #[test]
    fn relation_lattice_examples() {
        // x2 = x1^2: the lattice contains (2, -1)
        let base = CharacterContext::create(5, 1).unwrap();
        let v = VarietySpec::new(
            2,
            base.clone(),
            vec![MultiPoly::parse("x2 - x1^2", 'x', 2).unwrap()],
            vec![],
            Some(1),
        )
        .unwrap();
        let lat = v.relation_lattice(1).unwrap();
        assert!(lat.contains(&[BigInt::from(2), BigInt::from(-1)]));
        assert!(!lat.is_trivial());

        // a single point: the full lattice Z^m
        let pt = VarietySpec::new(
            2,
            base,
            vec![
                MultiPoly::parse("x1 - 1", 'x', 2).unwrap(),
                MultiPoly::parse("x2 - 2", 'x', 2).unwrap(),
            ],
            vec![],
            Some(0),
        )
        .unwrap();
        let lat = pt.relation_lattice(1).unwrap();
        assert!(lat.contains(&[BigInt::from(1), BigInt::from(0)]));
        assert!(lat.contains(&[BigInt::from(0), BigInt::from(1)]));

        // p=3, x1+x2=1 at k=4: only the trivial relations
        let line = torus_line(3);
        assert!(line.relation_lattice(4).unwrap().is_trivial());
    }

    #[test]
    fn relation_lattice_monotone_in_level() {
        let v = torus_line(3);
        let l2 = v.relation_lattice(2).unwrap();
        let l4 = v.relation_lattice(4).unwrap();
        // every level-4 relation of bounded height restricts to level 2
        for row in &l4.basis {
            // scale comparison: row mod (q^2-1) lattice membership
            assert!(l2.contains(row), "level-4 row {row:?} not in level-2 lattice");
        }
    }

    #[test]
    fn largeness_examples() {
        // x1 + x2 = 1 over F_3: Large (first trivial lattice appears at k=2,
        // and k=4 is trivial too per relation_lattice_examples)
        let line = torus_line(3);
        match line.largeness_verdict(4).unwrap() {
            LargenessVerdict::Large { witness_level } => {
                assert_eq!(witness_level, 2);
                assert!(line.relation_lattice(witness_level).unwrap().is_trivial());
            }
            other => panic!("expected Large, got {other:?}"),
        }
        // with k_max = 1 the single torus point leaves everything open
        match line.largeness_verdict(1).unwrap() {
            LargenessVerdict::Unknown { cap } => assert_eq!(cap, 1),
            other => panic!("expected Unknown, got {other:?}"),
        }
        // x2 = 2 x1 over F_5: certified relation with constant 2
        let base = CharacterContext::create(5, 1).unwrap();
        let v = VarietySpec::new(
            2,
            base.clone(),
            vec![MultiPoly::parse("x2 - 2*x1", 'x', 2).unwrap()],
            vec![],
            Some(1),
        )
        .unwrap();
        match v.largeness_verdict(2).unwrap() {
            LargenessVerdict::NotLarge { relation, constant_chi, .. } => {
                assert_eq!(relation, vec![BigInt::from(-1), BigInt::from(1)]);
                // chi(2) in F_5 with G = 2 is 1/4
                assert_eq!(constant_chi, cp(1, 4, 5));
            }
            other => panic!("expected NotLarge, got {other:?}"),
        }
    }

    #[test]
    fn product_set_examples() {
        // full torus: already a group
        let base = CharacterContext::create(5, 1).unwrap();
        let full = VarietySpec::new(2, base.clone(), vec![], vec![], Some(2)).unwrap();
        let r = full.product_set_oracle(1, 5).unwrap();
        assert_eq!(r.stabilized_at, Some(1));
        assert!(r.full_torus);
        assert!(r.closed_under_product);

        // a single point: the trivial subgroup
        let pt = VarietySpec::new(
            2,
            base,
            vec![
                MultiPoly::parse("x1 - 2", 'x', 2).unwrap(),
                MultiPoly::parse("x2 - 4", 'x', 2).unwrap(),
            ],
            vec![],
            Some(0),
        )
        .unwrap();
        let r = pt.product_set_oracle(1, 5).unwrap();
        assert_eq!(r.stabilized_at, Some(1));
        assert_eq!(r.final_size, 1);
        assert!(!r.full_torus);

        // x1 + x2 = 1 over F_5 stabilizes to the full torus
        let line = torus_line(5);
        let r = line.product_set_oracle(1, 10).unwrap();
        assert!(r.stabilized_at.is_some());
        assert!(r.full_torus);
        assert_eq!(r.final_size, 16);
        assert!(r.closed_under_product);
    }

    #[test]
    fn hyperarc_membership_f5() {
        let chi = CharacterContext::create(5, 1).unwrap();
        let field = chi.field().clone();
        // interval (0, 1/2): chi(2) = 1/4 inside, chi(1) = 0 on the boundary
        let arc = HyperArc::plain_box(5, vec![cp(0, 1, 5)], vec![cp(1, 2, 5)]).unwrap();
        assert!(arc.contains(&chi, &[field.from_int(2)]).unwrap());
        assert!(!arc.contains(&chi, &[field.from_int(1)]).unwrap());
        assert!(!arc.contains(&chi, &[field.from_int(4)]).unwrap()); // 1/2 excluded
        assert!(matches!(
            arc.contains(&chi, &[field.zero()]),
            Err(Error::ZeroCoordinate)
        ));
    }

    #[test]
    fn hyperarc_validation() {
        // degenerate box
        assert!(HyperArc::plain_box(5, vec![cp(1, 2, 5)], vec![cp(1, 2, 5)]).is_err());
        // q not a power of p
        assert!(HyperArc::new(
            5,
            3,
            vec![cp(1, 8, 5)],
            vec![cp(3, 8, 5)],
            vec![cp(1, 2, 5)]
        )
        .is_err());
        // wrap in the translate
        assert!(HyperArc::new(
            5,
            5,
            vec![cp(1, 2, 5)],
            vec![cp(3, 4, 5)],
            vec![cp(1, 2, 5)]
        )
        .is_err());
    }

    #[test]
    fn probe_finds_witness_on_shifted_line() {
        // V: x2 = x1 + 1 over F_3, box (0, 1/2)^2
        let base = CharacterContext::create(3, 1).unwrap();
        let v = VarietySpec::new(
            2,
            base,
            vec![MultiPoly::parse("x2 - x1 - 1", 'x', 2).unwrap()],
            vec![],
            Some(1),
        )
        .unwrap();
        let arc = HyperArc::plain_box(
            3,
            vec![cp(0, 1, 3), cp(0, 1, 3)],
            vec![cp(1, 2, 3), cp(1, 2, 3)],
        )
        .unwrap();
        match v.genericity_probe(&arc, 6).unwrap() {
            ProbeOutcome::Witness { level, point, paths_agreed } => {
                assert!(paths_agreed);
                let chi = v.level_context(level).unwrap();
                assert!(arc.contains(&chi, &point).unwrap());
                // the witness really lies on the variety
                let sum = point[0].add(&chi.field().one()).unwrap();
                assert_eq!(sum, point[1]);
            }
            other => panic!("expected a witness, got {other:?}"),
        }
    }

    #[test]
    fn probe_diagonal_with_disjoint_intervals_fails() {
        let base = CharacterContext::create(3, 1).unwrap();
        let v = VarietySpec::new(
            2,
            base,
            vec![MultiPoly::parse("x2 - x1", 'x', 2).unwrap()],
            vec![],
            Some(1),
        )
        .unwrap();
        let arc = HyperArc::plain_box(
            3,
            vec![cp(0, 1, 3), cp(1, 2, 3)],
            vec![cp(1, 2, 3), cp(7, 8, 3)],
        )
        .unwrap();
        match v.genericity_probe(&arc, 4).unwrap() {
            ProbeOutcome::NotFound { paths_agreed, .. } => assert!(paths_agreed),
            other => panic!("expected NotFound, got {other:?}"),
        }
    }

    #[test]
    fn probe_q_arc_paths_agree() {
        // q = 3 arc over p = 3 with denominators dividing p - 1... use
        // denominators dividing q^k - 1 at every k: den | 2 works (2 | 3^k-1)
        let base = CharacterContext::create(3, 1).unwrap();
        let v = VarietySpec::new(
            2,
            base,
            vec![MultiPoly::parse("x2 - x1 - 1", 'x', 2).unwrap()],
            vec![],
            Some(1),
        )
        .unwrap();
        let arc = HyperArc::new(
            3,
            3,
            vec![cp(1, 8, 3), cp(1, 8, 3)],
            vec![cp(3, 8, 3), cp(3, 8, 3)],
            vec![cp(1, 2, 3), cp(1, 2, 3)],
        )
        .unwrap();
        match v.genericity_probe(&arc, 7).unwrap() {
            ProbeOutcome::Witness { level, point, paths_agreed } => {
                assert!(paths_agreed, "the two membership paths diverged");
                let chi = v.level_context(level).unwrap();
                assert!(arc.contains(&chi, &point).unwrap());
            }
            ProbeOutcome::NotFound { paths_agreed, .. } => {
                assert!(paths_agreed, "the two membership paths diverged");
                panic!("expected a witness within 7 levels");
            }
        }
    }

    #[test]
    fn variety_file_round_trip() {
        let v = torus_line(3);
        let file = v.to_file();
        let json = serde_json::to_string(&file).unwrap();
        let parsed: VarietyFile = serde_json::from_str(&json).unwrap();
        let back = VarietySpec::from_file(&parsed).unwrap();
        assert_eq!(back.m, v.m);
        assert_eq!(back.eqs, v.eqs);
        assert_eq!(
            back.count_points(2, true).unwrap(),
            v.count_points(2, true).unwrap()
        );
    }
}
