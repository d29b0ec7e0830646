//! Multiplicative character sums over constructible sets and the empirical
//! verification suite: point-count tables against the main-term/error-term
//! shape, character-sum magnitude tables, Weyl sums, and box discrepancy.
//!
//! Sums are accumulated as exact angle histograms keyed by discrete log;
//! the single float conversion pass at the end walks the histogram in index
//! order, so results are bit-identical across thread counts. Points where
//! the summand polynomial vanishes are never silently mapped to zero: they
//! are counted in `skipped_zero_arg` (the character is undefined at 0).

use std::f64::consts::TAU;

use num::{BigInt, BigRational, BigUint, One, Signed, Zero};
use serde::Serialize;

use crate::circle::CirclePoint;
use crate::error::{Error, Result};
use crate::variety::{MultiPoly, VarietySpec, LOG_ZERO};

/// Exact multiset of character values: counts[j] is the multiplicity of the
/// angle j/n.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AngleHistogram {
    pub n: u64,
    pub counts: Vec<u64>,
}

impl AngleHistogram {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Complex value by one deterministic pass in angle order.
    pub fn value(&self) -> (f64, f64) {
        let mut re = 0.0;
        let mut im = 0.0;
        for (j, &c) in self.counts.iter().enumerate() {
            if c != 0 {
                let theta = TAU * j as f64 / self.n as f64;
                re += c as f64 * theta.cos();
                im += c as f64 * theta.sin();
            }
        }
        (re, im)
    }

    /// Sufficient certificate of exact algebraic vanishing: the histogram is
    /// empty, or is periodic with period n/l for some prime l | n (each
    /// residue class then sums a full coset of l-th roots of unity).
    pub fn is_exactly_zero(&self) -> bool {
        if self.counts.iter().all(|&c| c == 0) {
            return true;
        }
        let mut n = self.n;
        let mut primes = vec![];
        let mut q = 2u64;
        while q * q <= n {
            if n % q == 0 {
                primes.push(q);
                while n % q == 0 {
                    n /= q;
                }
            }
            q += 1;
        }
        if n > 1 {
            primes.push(n);
        }
        'prime: for ell in primes {
            let period = (self.n / ell) as usize;
            for j in 0..self.counts.len() {
                if self.counts[j] != self.counts[(j + period) % self.n as usize] {
                    continue 'prime;
                }
            }
            return true;
        }
        false
    }

    /// The retained angle multiset as circle points (capped).
    pub fn angles(&self, char_p: u64, cap: usize) -> Vec<(CirclePoint, u64)> {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .take(cap)
            .map(|(j, &c)| (CirclePoint::new(j as u64, self.n, char_p).unwrap(), c))
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct SumResult {
    pub k: u32,
    /// Points of the set at this level, including skipped ones.
    pub n_points: u64,
    pub skipped_zero_arg: u64,
    pub histogram: AngleHistogram,
    pub value: (f64, f64),
    pub magnitude: f64,
}

impl SumResult {
    pub fn is_exactly_zero(&self) -> bool {
        self.histogram.is_exactly_zero()
    }
}

/// Sum of chi(P(a)) over the points of V at level k (torus-restricted when
/// `torus_only`). Points with P(a) = 0 are skipped and counted.
pub fn char_sum(
    v: &VarietySpec,
    k: u32,
    poly: &MultiPoly,
    torus_only: bool,
) -> Result<SumResult> {
    let eng = v.engine(k)?;
    let n = eng.order();
    if n > v.base.field().budget().angle_cap {
        return Err(Error::SizeCapExceeded(format!(
            "angle histogram of size {n} exceeds the cap"
        )));
    }
    let compiled = eng.compile(poly);
    let spec = v.scan_spec(&eng, torus_only);
    struct Acc {
        hist: Vec<u64>,
        skipped: u64,
        total: u64,
    }
    let acc = eng.scan_fold(
        &spec,
        || Acc { hist: vec![0u64; n as usize], skipped: 0, total: 0 },
        |acc: &mut Acc, pt| {
            acc.total += 1;
            let l = eng.eval_log(&compiled, pt.logs);
            if l == LOG_ZERO {
                acc.skipped += 1;
            } else {
                acc.hist[l as usize] += 1;
            }
        },
        |mut a, b| {
            for (x, y) in a.hist.iter_mut().zip(&b.hist) {
                *x += y;
            }
            a.skipped += b.skipped;
            a.total += b.total;
            a
        },
    )?;
    let histogram = AngleHistogram { n, counts: acc.hist };
    let value = histogram.value();
    Ok(SumResult {
        k,
        n_points: acc.total,
        skipped_zero_arg: acc.skipped,
        magnitude: value.0.hypot(value.1),
        value,
        histogram,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LangWeilRow {
    pub k: u32,
    pub count: u64,
    /// q^{kd}
    pub main_term: String,
    /// |count - q^{kd}| exactly
    pub deviation: String,
    /// |count - q^{kd}| / q^{k(d - 1/2)}
    pub ratio: f64,
    /// Count is zero, so the claimed dimension is meaningless here.
    pub empty: bool,
}

/// Exact point counts of V(F_{q^k}) against the q^{kd} main term with
/// q^{k(d-1/2)}-normalized deviations.
pub fn lang_weil_table(v: &VarietySpec, d: u32, k_range: &[u32]) -> Result<Vec<LangWeilRow>> {
    let q = BigUint::from(v.base.field().size());
    let mut rows = vec![];
    for &k in k_range {
        let count = v.count_points(k, false)?;
        let main = q.pow(k * d);
        let dev = if BigUint::from(count) >= main {
            BigUint::from(count) - &main
        } else {
            &main - BigUint::from(count)
        };
        let ratio = big_ratio_to_f64(&dev, q_half_power(&q, k, d));
        rows.push(LangWeilRow {
            k,
            count,
            main_term: main.to_string(),
            deviation: dev.to_string(),
            ratio,
            empty: count == 0,
        });
    }
    Ok(rows)
}

/// q^{k(d - 1/2)} as a float normalizer.
fn q_half_power(q: &BigUint, k: u32, d: u32) -> f64 {
    big_to_f64(q).powf(k as f64 * (d as f64 - 0.5))
}

fn big_to_f64(x: &BigUint) -> f64 {
    x.to_string().parse::<f64>().unwrap_or(f64::INFINITY)
}

fn big_ratio_to_f64(num: &BigUint, den: f64) -> f64 {
    if den == 0.0 {
        return if num.is_zero() { 0.0 } else { f64::INFINITY };
    }
    big_to_f64(num) / den
}

/// How the summand behaved on the visited points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SummandShape {
    /// One distinct nonzero value on every point: the bound's
    /// "not constant on V" precondition fails, no cancellation expected.
    ConstantNonzero,
    IdenticallyZero,
    Varying,
}

#[derive(Debug, Clone, Serialize)]
pub struct WeilRow {
    pub k: u32,
    pub n_points: u64,
    pub skipped_zero_arg: u64,
    pub magnitude: f64,
    /// |S_k| / q^{k(d - 1/2)}
    pub normalized: f64,
    pub summand_shape: SummandShape,
}

/// Character-sum magnitudes |S_k| with the q^{k(d-1/2)} normalization.
pub fn weil_ratio_table(
    v: &VarietySpec,
    d: u32,
    poly: &MultiPoly,
    k_range: &[u32],
    torus_only: bool,
) -> Result<Vec<WeilRow>> {
    let q = BigUint::from(v.base.field().size());
    let mut rows = vec![];
    for &k in k_range {
        let s = char_sum(v, k, poly, torus_only)?;
        let distinct = s.histogram.counts.iter().filter(|&&c| c != 0).count();
        let shape = if s.n_points == 0 {
            SummandShape::IdenticallyZero
        } else if s.skipped_zero_arg == s.n_points {
            SummandShape::IdenticallyZero
        } else if distinct == 1 && s.skipped_zero_arg == 0 {
            SummandShape::ConstantNonzero
        } else {
            SummandShape::Varying
        };
        rows.push(WeilRow {
            k,
            n_points: s.n_points,
            skipped_zero_arg: s.skipped_zero_arg,
            magnitude: s.magnitude,
            normalized: s.magnitude / q_half_power(&q, k, d),
            summand_shape: shape,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, Serialize)]
pub struct WeylRow {
    pub k: u32,
    pub l: Vec<i64>,
    pub n_points: u64,
    pub magnitude: f64,
    /// |S_k(l)| / N_k
    pub normalized: f64,
}

/// Normalized monomial character sums S_k(l) = sum of chi(a^l) over the
/// torus points, for each exponent vector l (all l in one scan per level).
pub fn weyl_sums(
    v: &VarietySpec,
    k_range: &[u32],
    l_vectors: &[Vec<i64>],
) -> Result<Vec<WeylRow>> {
    for l in l_vectors {
        if l.len() != v.m {
            return Err(Error::BadInput(format!(
                "exponent vector {l:?} has wrong length"
            )));
        }
        if l.iter().all(|&c| c == 0) {
            return Err(Error::ZeroVectorL);
        }
    }
    let mut rows = vec![];
    for &k in k_range {
        let eng = v.engine(k)?;
        let n = eng.order();
        if n > v.base.field().budget().angle_cap {
            return Err(Error::SizeCapExceeded(format!(
                "angle histogram of size {n} exceeds the cap"
            )));
        }
        let spec = v.scan_spec(&eng, true);
        struct Acc {
            hists: Vec<Vec<u64>>,
            total: u64,
        }
        let nl = l_vectors.len();
        let acc = eng.scan_fold(
            &spec,
            || Acc { hists: vec![vec![0u64; n as usize]; nl], total: 0 },
            |acc: &mut Acc, pt| {
                acc.total += 1;
                for (h, l) in acc.hists.iter_mut().zip(l_vectors) {
                    let mut angle: i128 = 0;
                    for (&d, &c) in pt.logs.iter().zip(l) {
                        angle += d as i128 * c as i128;
                    }
                    let angle = angle.rem_euclid(n as i128) as usize;
                    h[angle] += 1;
                }
            },
            |mut a, b| {
                for (x, y) in a.hists.iter_mut().zip(&b.hists) {
                    for (u, v) in x.iter_mut().zip(y) {
                        *u += v;
                    }
                }
                a.total += b.total;
                a
            },
        )?;
        for (h, l) in acc.hists.into_iter().zip(l_vectors) {
            let hist = AngleHistogram { n, counts: h };
            let (re, im) = hist.value();
            let mag = re.hypot(im);
            rows.push(WeylRow {
                k,
                l: l.clone(),
                n_points: acc.total,
                magnitude: mag,
                normalized: if acc.total == 0 { 0.0 } else { mag / acc.total as f64 },
            });
        }
    }
    Ok(rows)
}

/// The histogram of one monomial sum, for exactness checks.
pub fn weyl_histogram(v: &VarietySpec, k: u32, l: &[i64]) -> Result<AngleHistogram> {
    let eng = v.engine(k)?;
    let n = eng.order();
    let spec = v.scan_spec(&eng, true);
    let counts = eng.scan_fold(
        &spec,
        || vec![0u64; n as usize],
        |h: &mut Vec<u64>, pt| {
            let mut angle: i128 = 0;
            for (&d, &c) in pt.logs.iter().zip(l) {
                angle += d as i128 * c as i128;
            }
            h[angle.rem_euclid(n as i128) as usize] += 1;
        },
        |mut a, b| {
            for (x, y) in a.iter_mut().zip(&b) {
                *x += y;
            }
            a
        },
    )?;
    Ok(AngleHistogram { n, counts })
}

#[derive(Debug, Clone, Serialize)]
pub struct BoxRow {
    pub box_index: usize,
    pub count: u64,
    pub n_points: u64,
    /// count / N_k, exact
    pub fraction: String,
    /// product of the side lengths, exact
    pub volume: String,
    /// |fraction - volume|, exact
    pub deviation: String,
    pub deviation_f64: f64,
}

/// Exact counts of torus points with chi-values strictly inside each box,
/// against the box volumes.
pub fn box_discrepancy(
    v: &VarietySpec,
    k: u32,
    boxes: &[(Vec<CirclePoint>, Vec<CirclePoint>)],
) -> Result<Vec<BoxRow>> {
    for (lo, hi) in boxes {
        if lo.len() != v.m || hi.len() != v.m {
            return Err(Error::BadBox("box dimension mismatch".into()));
        }
        for i in 0..v.m {
            if lo[i].compare(&hi[i])? != std::cmp::Ordering::Less {
                return Err(Error::BadBox(format!(
                    "side {i}: {} is not strictly below {}",
                    lo[i], hi[i]
                )));
            }
        }
    }
    let eng = v.engine(k)?;
    let n = eng.order();
    let nb = BigUint::from(n);
    // precompute scaled comparisons: log/n > num/den iff log*den > num*n
    struct Side {
        lo_scaled: BigUint,
        lo_den: BigUint,
        hi_scaled: BigUint,
        hi_den: BigUint,
    }
    let testers: Vec<Vec<Side>> = boxes
        .iter()
        .map(|(lo, hi)| {
            (0..v.m)
                .map(|i| Side {
                    lo_scaled: lo[i].num() * &nb,
                    lo_den: lo[i].den().clone(),
                    hi_scaled: hi[i].num() * &nb,
                    hi_den: hi[i].den().clone(),
                })
                .collect()
        })
        .collect();
    let spec = v.scan_spec(&eng, true);
    struct Acc {
        counts: Vec<u64>,
        total: u64,
    }
    let acc = eng.scan_fold(
        &spec,
        || Acc { counts: vec![0u64; boxes.len()], total: 0 },
        |acc: &mut Acc, pt| {
            acc.total += 1;
            'boxes: for (bi, sides) in testers.iter().enumerate() {
                for (side, &log) in sides.iter().zip(pt.logs) {
                    let lb = BigUint::from(log);
                    if &lb * &side.lo_den <= side.lo_scaled
                        || &lb * &side.hi_den >= side.hi_scaled
                    {
                        continue 'boxes;
                    }
                }
                acc.counts[bi] += 1;
            }
        },
        |mut a, b| {
            for (x, y) in a.counts.iter_mut().zip(&b.counts) {
                *x += y;
            }
            a.total += b.total;
            a
        },
    )?;
    let mut rows = vec![];
    for (bi, (lo, hi)) in boxes.iter().enumerate() {
        let mut volume = BigRational::one();
        for i in 0..v.m {
            volume *= hi[i].value() - lo[i].value();
        }
        let fraction = if acc.total == 0 {
            BigRational::zero()
        } else {
            BigRational::new(BigInt::from(acc.counts[bi]), BigInt::from(acc.total))
        };
        let deviation = (&fraction - &volume).abs();
        rows.push(BoxRow {
            box_index: bi,
            count: acc.counts[bi],
            n_points: acc.total,
            fraction: fraction.to_string(),
            volume: volume.to_string(),
            deviation: deviation.to_string(),
            deviation_f64: rational_to_f64(&deviation),
        });
    }
    Ok(rows)
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    let num = r.numer();
    let den = r.denom();
    num.to_string().parse::<f64>().unwrap() / den.to_string().parse::<f64>().unwrap()
}
