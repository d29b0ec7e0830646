//! Acceptance suite: one test per criterion, every tolerance pinned in
//! code. Run with `cargo test --test acceptance -- --nocapture` to see one
//! PASS line per criterion.

use std::collections::BTreeMap;
use std::str::FromStr;

use num::integer::gcd;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use acfo::chi::CharacterContext;
use acfo::circle::{CirclePoint, CoverElement};
use acfo::depattern::{
    dependence_pattern_brute_charp, dependence_pattern_charp, pattern_holds_charp, theta_charp,
    DependencePattern, ThetaRoots,
};
use acfo::gf::FieldContext;
use acfo::logic::oracle::{standard_model_search, tm_brute_force, SearchOutcome};
use acfo::logic::tm::tm_check;
use acfo::logic::{decide_special, eval_mult_circle, verify_witness, SpecialSentence, Verdict};
use acfo::sums;
use acfo::variety::{HyperArc, MultiPoly, ProbeOutcome, VarietySpec};

fn pass(name: &str, detail: &str) {
    println!("PASS {name}: {detail}");
}

fn chi_ctx(p: u64, l: u32) -> CharacterContext {
    CharacterContext::new(FieldContext::new(p, l).unwrap())
}

fn variety(p: u64, m: usize, eqs: &[&str], dim: Option<u32>) -> VarietySpec {
    let base = chi_ctx(p, 1);
    let eqs = eqs
        .iter()
        .map(|s| MultiPoly::parse(s, 'x', m).unwrap())
        .collect();
    VarietySpec::new(m, base, eqs, vec![], dim).unwrap()
}

fn cp(n: i64, d: i64, p: u64) -> CirclePoint {
    CirclePoint::new(n, d, p).unwrap()
}

/// Criterion 1: chi(ab) = chi(a) + chi(b) exhaustively over F_{3^4}^x,
/// 6320 distinct ordered pairs, exact equality.
#[test]
fn criterion_01_character_homomorphism() {
    let chi = chi_ctx(3, 4);
    let size = chi.field().size();
    let values: Vec<CirclePoint> = (1..size)
        .map(|r| chi.chi(&chi.field().element_from_rank(r)).unwrap())
        .collect();
    let mut pairs = 0u64;
    for i in 1..size {
        for j in 1..size {
            if i == j {
                continue;
            }
            let a = chi.field().element_from_rank(i);
            let b = chi.field().element_from_rank(j);
            let lhs = chi.chi(&a.mul(&b).unwrap()).unwrap();
            let rhs = values[(i - 1) as usize]
                .mul(&values[(j - 1) as usize])
                .unwrap();
            assert_eq!(lhs, rhs, "chi not multiplicative at pair ({i}, {j})");
            pairs += 1;
        }
    }
    assert_eq!(pairs, 6320);
    pass("criterion 1", "chi homomorphism exact on 6320 pairs over F_81");
}

/// Criterion 2: floor formula = descent count for all reduced t with
/// den <= 64 and all n <= 16, exact.
#[test]
fn criterion_02_winding_number_equivalence() {
    let mut checked = 0u64;
    for den in 1u64..=64 {
        for num in 0..den {
            if gcd(num, den) != 1 {
                continue;
            }
            let t = cp(num as i64, den as i64, 0);
            for n in 1..=16 {
                assert_eq!(
                    t.winding_number(n),
                    t.winding_number_by_descents(n),
                    "t = {num}/{den}, n = {n}"
                );
                checked += 1;
            }
        }
    }
    pass(
        "criterion 2",
        &format!("floor = descent count on {checked} (t, n) cases"),
    );
}

/// Criterion 3: at p = 5, n = 25, exactly one winding residue passes for
/// each of 500 sampled points; all residues pass for n coprime to p.
#[test]
fn criterion_03_predicate_uniqueness() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut sampled = 0;
    while sampled < 500 {
        let den = rng.gen_range(1u64..=400);
        if den % 5 == 0 {
            continue;
        }
        let num = rng.gen_range(0..den);
        let t = CirclePoint::new(num, den, 5).unwrap();
        let hits = (0..25).filter(|&r| t.pred_p(25, r)).count();
        assert_eq!(hits, 1, "t = {num}/{den}");
        for n in [3u64, 6, 7, 12] {
            for r in 0..n {
                assert!(t.pred_p(n, r), "coprime modulus must accept all residues");
            }
        }
        sampled += 1;
    }
    pass("criterion 3", "unique residue mod 25 on 500 points; coprime moduli accept all");
}

/// Criterion 4: cover addition equals exact rational addition, and the
/// truncation of a cover recovers the circle product, on 10^4 random
/// small elements.
#[test]
fn criterion_04_cover_truncation_coherence() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let p = 3u64;
    let mut random_point = |rng: &mut ChaCha8Rng| loop {
        let den = rng.gen_range(1u64..=40);
        if den % p == 0 {
            continue;
        }
        let num = rng.gen_range(0..den);
        if let Ok(t) = CirclePoint::new(num, den, p) {
            return t;
        }
    };
    for _ in 0..10_000 {
        let s = random_point(&mut rng);
        let t = random_point(&mut rng);
        let ks = rng.gen_range(-5i64..=5);
        let kt = rng.gen_range(-5i64..=5);
        let a = CoverElement::new(ks, s.clone());
        let b = CoverElement::new(kt, t.clone());
        let sum = a.add(&b).unwrap();
        assert_eq!(sum.as_rational(), a.as_rational() + b.as_rational());
        // truncation of the cover of two circle points is their product
        let trunc = CoverElement::new(0, s.clone())
            .truncate_mul(&CoverElement::new(0, t.clone()))
            .unwrap();
        assert_eq!(trunc.t, s.mul(&t).unwrap());
        assert!(trunc.k == 0.into());
    }
    pass("criterion 4", "cover = rational addition and truncation round trip on 10^4 samples");
}

fn full_torus(p: u64, m: usize) -> VarietySpec {
    VarietySpec::new(m, chi_ctx(p, 1), vec![], vec![], Some(m as u32)).unwrap()
}

fn orthogonality_histograms() -> Vec<(u64, u32, bool)> {
    // (p, k, exactly_zero) for all q^k <= 2^14, p in {2, 3, 5}
    let mut out = vec![];
    for p in [2u64, 3, 5] {
        let v = full_torus(p, 1);
        let mut k = 1u32;
        while (p as u128).pow(k) <= 1 << 14 {
            let h = sums::weyl_histogram(&v, k, &[1]).unwrap();
            out.push((p, k, h.is_exactly_zero()));
            k += 1;
        }
    }
    out
}

/// Criterion 5: full-torus monomial character sums vanish exactly (angle
/// histogram certificate) for all q^k <= 2^14, p in {2, 3, 5}.
#[test]
fn criterion_05_character_orthogonality() {
    let rows = orthogonality_histograms();
    assert!(!rows.is_empty());
    for (p, k, zero) in &rows {
        assert!(zero, "sum not exactly zero at p = {p}, k = {k}");
    }
    pass(
        "criterion 5",
        &format!("exact vanishing certified at {} levels", rows.len()),
    );
}

fn hasse_curve() -> VarietySpec {
    variety(5, 2, &["x2^2 - x1^3 - x1 - 1"], Some(1))
}

/// Criterion 6: point counts of the curve x2^2 = x1^3 + x1 + 1 over F_5
/// stay within 2.5 * 5^(k/2) of 5^k for k = 1..5; exact counts are pinned
/// as regression values (they satisfy the Weil recursion with a_1 = -3).
#[test]
fn criterion_06_count_error_shape() {
    let v = hasse_curve();
    let rows = sums::lang_weil_table(&v, 1, &[1, 2, 3, 4, 5]).unwrap();
    let expected_counts = [8u64, 26, 107, 674, 3068];
    for (row, want) in rows.iter().zip(expected_counts) {
        assert_eq!(row.count, want, "exact count changed at k = {}", row.k);
        assert!(
            row.ratio <= 2.5,
            "deviation ratio {} exceeds 2.5 at k = {}",
            row.ratio,
            row.k
        );
    }
    pass("criterion 6", "counts {8, 26, 107, 674, 3068}; max ratio 1.96 <= 2.5");
}

fn shifted_line() -> VarietySpec {
    variety(3, 2, &["x2 - x1 - 1"], Some(1))
}

/// Criterion 7: |S_k| / 3^{k/2} for P = x1 on the shifted line over F_3
/// stays bounded by 3 for k = 1..8.
#[test]
fn criterion_07_character_sum_bound() {
    let v = shifted_line();
    let poly = MultiPoly::parse("x1", 'x', 2).unwrap();
    let rows = sums::weil_ratio_table(&v, 1, &poly, &[1, 2, 3, 4, 5, 6, 7, 8], false).unwrap();
    for row in &rows {
        assert!(
            row.normalized <= 3.0,
            "normalized magnitude {} exceeds 3 at k = {}",
            row.normalized,
            row.k
        );
    }
    pass("criterion 7", "normalized magnitudes bounded by 3 through k = 8");
}

/// Criterion 8: equidistribution data at k = 8: the box (0,1/2)^2 holds a
/// fraction within 0.05 of 1/4, and the normalized Weyl sum for l = (1,-1)
/// is below 0.2.
#[test]
fn criterion_08_equidistribution() {
    let v = shifted_line();
    let boxes = vec![(
        vec![cp(0, 1, 3), cp(0, 1, 3)],
        vec![cp(1, 2, 3), cp(1, 2, 3)],
    )];
    let rows = sums::box_discrepancy(&v, 8, &boxes).unwrap();
    assert_eq!(rows[0].n_points, 6559);
    assert!(
        rows[0].deviation_f64 < 0.05,
        "box deviation {} not below 0.05",
        rows[0].deviation_f64
    );
    let weyl = sums::weyl_sums(&v, &[8], &[vec![1, -1]]).unwrap();
    assert!(
        weyl[0].normalized < 0.2,
        "normalized Weyl sum {} not below 0.2",
        weyl[0].normalized
    );
    pass(
        "criterion 8",
        &format!(
            "box deviation {:.4} < 0.05; Weyl(1,-1) {:.6} < 0.2",
            rows[0].deviation_f64, weyl[0].normalized
        ),
    );
}

/// Criterion 9: for 25 random polynomials of degree <= 4 over p in
/// {3, 5, 7}, the lattice-based dependence patterns equal the
/// exhaustive-search patterns on every root ordering, and every emitted
/// relation re-evaluates to an exact field identity.
#[test]
fn criterion_09_theta_oracle_equivalence() {
    use itertools::Itertools;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let primes = [3u64, 5, 7];
    let mut done = 0;
    let mut orderings_checked = 0u64;
    while done < 25 {
        let p = primes[done % 3];
        let deg = rng.gen_range(1..=4usize);
        let mut coeffs: Vec<i64> = (0..=deg).map(|_| rng.gen_range(-6i64..=6)).collect();
        if coeffs[deg] == 0 {
            coeffs[deg] = 1;
        }
        let poly = acfo::cyclotomic::IntPoly::from_i64(&coeffs);
        let theta = match theta_charp(&poly, p) {
            Ok(t) => t,
            Err(_) => continue, // vanishes mod p; resample
        };
        let ThetaRoots::CharP { chi, roots } = &theta.roots else { unreachable!() };
        for perm in (0..roots.len()).permutations(roots.len()) {
            let tuple: Vec<_> = perm.iter().map(|&j| roots[j].clone()).collect();
            let lattice = dependence_pattern_charp(chi, &tuple).unwrap();
            let brute = dependence_pattern_brute_charp(chi, &tuple).unwrap();
            assert_eq!(lattice, brute, "p = {p}, poly = {poly}, ordering = {perm:?}");
            assert!(
                pattern_holds_charp(chi, &tuple, &lattice).unwrap(),
                "pattern not an exact identity: p = {p}, poly = {poly}"
            );
            orderings_checked += 1;
        }
        done += 1;
    }
    pass(
        "criterion 9",
        &format!("lattice = exhaustive patterns on {orderings_checked} orderings of 25 polynomials"),
    );
}

fn random_sentence(rng: &mut ChaCha8Rng, p: u64) -> SpecialSentence {
    // polynomial of degree <= 3 (splitting level divides 6)
    let deg = rng.gen_range(1..=3usize);
    let mut coeffs: Vec<i64> = (0..=deg).map(|_| rng.gen_range(-4i64..=4)).collect();
    if coeffs[deg] == 0 {
        coeffs[deg] = 1;
    }
    let poly_text = {
        let poly = acfo::cyclotomic::IntPoly::from_i64(&coeffs);
        poly.to_string()
    };
    // declared variable count: usually the true root count
    let k = match theta_charp(&acfo::cyclotomic::IntPoly::from_i64(&coeffs), p) {
        Ok(t) if rng.gen_bool(0.8) => t.set.root_count,
        _ => rng.gen_range(0..=3usize),
    };
    let vars = (1..=k).map(|i| format!("z{i}")).collect::<Vec<_>>().join(" ");
    let ring = if k == 0 || rng.gen_bool(0.4) {
        "true".to_string()
    } else {
        match rng.gen_range(0..3) {
            0 => format!("z1^{} != 0", rng.gen_range(1..3)),
            1 => {
                let c = rng.gen_range(-3i64..=3);
                format!("z1 + z{k} = {c}")
            }
            _ => format!("z1 * z{k} != 1", ),
        }
    };
    let mult = if k == 0 {
        "true".to_string()
    } else {
        let mut atoms = vec![];
        for _ in 0..rng.gen_range(1..=2) {
            let atom = match rng.gen_range(0..4) {
                0 => format!("1 < z{}", rng.gen_range(1..=k)),
                1 => format!("P[{},{}](z{})", rng.gen_range(0..3), [3, p][rng.gen_range(0..2)], rng.gen_range(1..=k)),
                2 => format!("z{}*z{} = z{}", rng.gen_range(1..=k), rng.gen_range(1..=k), rng.gen_range(1..=k)),
                _ => format!("not z{} = z{}", rng.gen_range(1..=k), rng.gen_range(1..=k)),
            };
            atoms.push(atom);
        }
        atoms.join(if rng.gen_bool(0.7) { " and " } else { " or " })
    };
    let text = format!("exists {vars} : roots({poly_text}) ; ring: {ring} ; mult: {mult}");
    SpecialSentence::from_str(&text).unwrap()
}

/// Criterion 10: the headline decide examples produce their verdicts with
/// verifying witnesses (example 3 as corrected in review notes: the
/// winding-0 residue is impossible, the winding-2 variant realizes the
/// intended content; both cross-checked against the conclusive
/// standard-model search); on 50 random sentences the decision agrees with
/// the standard-model search whenever conclusive; and the group-side
/// solver agrees with bounded brute force on 100 random systems.
#[test]
fn criterion_10_decision_procedure() {
    // headline examples
    let decide_checked = |text: &str, p: u64| -> Verdict {
        let s = SpecialSentence::from_str(text).unwrap();
        let v = decide_special(&s, p).unwrap();
        if let Verdict::Satisfiable(w) = &v {
            assert!(verify_witness(&s, p, w).unwrap(), "witness failed: {text}");
        }
        if let Some(expected) = standard_model_search(&s, p, 6).unwrap().conclusive() {
            assert_eq!(v.is_satisfiable(), expected, "oracle disagrees: {text}");
        }
        v
    };
    let v1 = decide_checked(
        "exists z1 z2 : roots(t^2+t+1) ; ring: true ; mult: z2 = z1*z1",
        7,
    );
    assert!(v1.is_satisfiable());
    let v2 = decide_checked(
        "exists z1 z2 : roots(t^2+t+1) ; ring: true ; mult: z1 < z2 and z2 < z1",
        7,
    );
    assert!(!v2.is_satisfiable());
    let v3 = decide_checked(
        "exists z1 z2 z3 : roots(t^3-1) ; ring: true ; mult: P[0,7](z2)",
        7,
    );
    assert!(!v3.is_satisfiable(), "winding-0 residue is impossible at the 1/3 point");
    let v3b = decide_checked(
        "exists z1 z2 z3 : roots(t^3-1) ; ring: true ; mult: P[2,7](z2)",
        7,
    );
    assert!(v3b.is_satisfiable());

    // 50 random sentences against the conclusive oracle
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let primes = [3u64, 5, 7];
    let mut conclusive = 0;
    let mut sat_count = 0;
    for i in 0..50 {
        let p = primes[i % 3];
        let s = random_sentence(&mut rng, p);
        let verdict = decide_special(&s, p).unwrap();
        if let Verdict::Satisfiable(w) = &verdict {
            assert!(verify_witness(&s, p, w).unwrap(), "witness failed on {s}");
            sat_count += 1;
        }
        match standard_model_search(&s, p, 6).unwrap() {
            SearchOutcome::Satisfiable { .. } => {
                conclusive += 1;
                assert!(verdict.is_satisfiable(), "search found a model, decide said no: {s}");
            }
            SearchOutcome::Unsatisfiable => {
                conclusive += 1;
                assert!(!verdict.is_satisfiable(), "decide said yes, no standard model: {s}");
            }
            SearchOutcome::LevelTooHigh { .. } => {}
        }
    }
    assert!(conclusive >= 40, "oracle was conclusive only {conclusive}/50 times");

    // 100 random group-side systems against bounded brute force
    let mut agree = 0;
    for _ in 0..100 {
        let p = primes[rng.gen_range(0..3)];
        let k = rng.gen_range(1..=2usize);
        let vars = (1..=k).map(|i| format!("z{i}")).collect::<Vec<_>>().join(" ");
        let n_atoms = rng.gen_range(1..=2);
        let atoms: Vec<String> = (0..n_atoms)
            .map(|_| match rng.gen_range(0..4) {
                0 => format!("1 < z{}", rng.gen_range(1..=k)),
                1 => format!("P[{},{}](z{})", rng.gen_range(0..2), p, rng.gen_range(1..=k)),
                2 => format!("z{}*z{} = z{}", rng.gen_range(1..=k), rng.gen_range(1..=k), rng.gen_range(1..=k)),
                _ => format!("z{} < z{}", rng.gen_range(1..=k), rng.gen_range(1..=k)),
            })
            .collect();
        let text = format!(
            "exists {vars} : roots(t-1) ; ring: true ; mult: {}",
            atoms.join(" and ")
        );
        let s = SpecialSentence::from_str(&text).unwrap();
        let theta = DependencePattern { k, relations: BTreeMap::new() };
        let brute = tm_brute_force(&theta, k, &s.mult, p, 3).unwrap();
        let solved = tm_check(&theta, k, &s.mult, p).unwrap();
        if let Some(w) = &brute {
            assert!(
                solved.is_some(),
                "solver missed a brute-force witness on {text} (brute: {w:?})"
            );
        }
        if let Some(w) = &solved {
            assert!(eval_mult_circle(&s.mult, w), "solver witness invalid on {text}");
        }
        agree += 1;
    }
    pass(
        "criterion 10",
        &format!(
            "4 headline verdicts verified; {conclusive}/50 sentences oracle-conclusive and agreeing ({sat_count} satisfiable); {agree}/100 group systems consistent with brute force"
        ),
    );
}

/// Criterion 11: the genericity probe finds a verified witness for the
/// shifted line in the box (0, 1/4)^2 over F_3 within k <= 8, and the
/// Frobenius-pullback membership path agrees with the circle path on both
/// a plain arc and a genuine q-arc.
#[test]
fn criterion_11_genericity_probe() {
    let v = shifted_line();
    let arc = HyperArc::plain_box(
        3,
        vec![cp(0, 1, 3), cp(0, 1, 3)],
        vec![cp(1, 4, 3), cp(1, 4, 3)],
    )
    .unwrap();
    let (level, point) = match v.genericity_probe(&arc, 8).unwrap() {
        ProbeOutcome::Witness { level, point, paths_agreed } => {
            assert!(paths_agreed);
            (level, point)
        }
        other => panic!("no witness within k <= 8: {other:?}"),
    };
    let chi = v.level_context(level).unwrap();
    assert!(arc.contains(&chi, &point).unwrap());

    // a genuine q-arc: q = 3, translate denominators divide 2 so both
    // membership paths are defined at every level
    let qarc = HyperArc::new(
        3,
        3,
        vec![cp(1, 8, 3), cp(1, 8, 3)],
        vec![cp(3, 8, 3), cp(3, 8, 3)],
        vec![cp(1, 2, 3), cp(1, 2, 3)],
    )
    .unwrap();
    match v.genericity_probe(&qarc, 8).unwrap() {
        ProbeOutcome::Witness { level, point, paths_agreed } => {
            assert!(paths_agreed, "q-arc membership paths diverged");
            let chi = v.level_context(level).unwrap();
            assert!(qarc.contains(&chi, &point).unwrap());
            pass(
                "criterion 11",
                &format!("plain-arc witness at k = {}; q-arc witness at k = {level}, paths agree", level),
            );
        }
        ProbeOutcome::NotFound { paths_agreed, .. } => {
            assert!(paths_agreed, "q-arc membership paths diverged");
            panic!("q-arc witness not found within k <= 8");
        }
    }
}

/// Criterion 12: the data of criteria 5-8 is byte-identical across thread
/// counts 1, 2 and 8.
#[test]
fn criterion_12_parallel_determinism() {
    let run_all = || -> String {
        let mut blob = String::new();
        // criterion 5 histograms
        for (p, k, zero) in orthogonality_histograms() {
            blob.push_str(&format!("orth {p} {k} {zero}\n"));
        }
        // criterion 6 rows
        let rows = sums::lang_weil_table(&hasse_curve(), 1, &[1, 2, 3, 4, 5]).unwrap();
        blob.push_str(&serde_json::to_string(&rows).unwrap());
        // criterion 7 rows
        let line = shifted_line();
        let poly = MultiPoly::parse("x1", 'x', 2).unwrap();
        let rows = sums::weil_ratio_table(&line, 1, &poly, &[1, 2, 3, 4, 5, 6, 7, 8], false).unwrap();
        blob.push_str(&serde_json::to_string(&rows).unwrap());
        // criterion 8 rows
        let boxes = vec![(
            vec![cp(0, 1, 3), cp(0, 1, 3)],
            vec![cp(1, 2, 3), cp(1, 2, 3)],
        )];
        blob.push_str(&serde_json::to_string(&sums::box_discrepancy(&line, 8, &boxes).unwrap()).unwrap());
        blob.push_str(
            &serde_json::to_string(&sums::weyl_sums(&line, &[8], &[vec![1, -1]]).unwrap()).unwrap(),
        );
        blob
    };
    let mut outputs = vec![];
    for threads in [1usize, 2, 8] {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        outputs.push(pool.install(run_all));
    }
    assert_eq!(outputs[0], outputs[1], "1-thread vs 2-thread output differs");
    assert_eq!(outputs[0], outputs[2], "1-thread vs 8-thread output differs");
    pass(
        "criterion 12",
        &format!("{} bytes of criteria 5-8 output identical across 1/2/8 threads", outputs[0].len()),
    );
}
