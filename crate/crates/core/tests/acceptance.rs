//! Acceptance gate: thirteen numbered criteria, each printing exactly one
//! "criterion NN PASS/FAIL" line (run with `--nocapture` to see them all).
//!
//! Criterion 10 asserts that both truncation ratios grow monotonically; the
//! symmetric tensor-square ratio measurably does not at n = 4, so that test
//! is expected to fail until the growth claim is revisited.

use std::time::Instant;

use cutnorm_core::approx::{self, RelaxationConfig};
use cutnorm_core::exact::{self, DEFAULT_ENUM_CAP};
use cutnorm_core::experiments::{
    run_growth, run_inequality_suite, testvec_lower_bound, GrowthConfig, GrowthKind,
};
use cutnorm_core::graphon::{BandParams, StepGraphon};
use cutnorm_core::matrix::{
    closed_form_tri_cut_norm, kronecker, make_an, schur, triangular_cut, triangular_mask, Matrix,
};
use cutnorm_core::report::{Cell, ExperimentReport, ReportFormat};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn verdict(id: usize, name: &str, pass: bool, detail: String) -> bool {
    println!("criterion {id:02} {} [{name}] {detail}", if pass { "PASS" } else { "FAIL" });
    pass
}

fn col(report: &ExperimentReport, name: &str) -> usize {
    report.columns.iter().position(|c| c == name).unwrap_or_else(|| panic!("no column {name}"))
}

fn num(cell: &Cell) -> f64 {
    match cell {
        Cell::Float(v) => *v,
        Cell::Int(v) => *v as f64,
        other => panic!("not numeric: {other:?}"),
    }
}

fn flag(cell: &Cell) -> bool {
    match cell {
        Cell::Bool(v) => *v,
        other => panic!("not a flag: {other:?}"),
    }
}

fn suite_row<'r>(report: &'r ExperimentReport, name: &str) -> &'r [Cell] {
    report
        .rows
        .iter()
        .find(|r| r[0] == Cell::text(name))
        .unwrap_or_else(|| panic!("no row {name}"))
}

fn growth_cfg(seed: u64) -> GrowthConfig {
    GrowthConfig {
        cap: DEFAULT_ENUM_CAP,
        relax: RelaxationConfig::with_seed(seed),
        lambda: BandParams::new(1, 2).unwrap(),
    }
}

fn random_matrix(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Matrix {
    let data: Vec<f64> = (0..n * n).map(|_| rng.gen_range(lo..=hi)).collect();
    Matrix::from_fn(n, |i, j| data[i * n + j])
}

fn random_zero_diag(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    let m = random_matrix(rng, n, -1.0, 1.0);
    Matrix::from_fn(n, |i, j| if i == j { 0.0 } else { m.get(i, j) })
}

fn random_symmetric_zero_diag(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Matrix {
    let m = random_matrix(rng, n, lo, hi);
    Matrix::from_fn(n, |i, j| {
        if i == j {
            0.0
        } else if i < j {
            m.get(i, j)
        } else {
            m.get(j, i)
        }
    })
}

fn cut(a: &Matrix) -> f64 {
    exact::cut_norm_exact(a).unwrap().0
}

#[test]
fn criterion_01_closed_form_identity() {
    let t0 = Instant::now();
    let mut worst = 0.0f64;
    for n in 2..=12 {
        let closed = closed_form_tri_cut_norm(n).unwrap();
        let (v, _) = exact::cut_norm_exact(&triangular_cut(&make_an(n))).unwrap();
        worst = worst.max((v - closed).abs());
    }
    let secs = t0.elapsed().as_secs_f64();
    let pass = worst <= 1e-12 && secs < 10.0;
    assert!(verdict(
        1,
        "closed-form cut norm of the truncated reciprocal family",
        pass,
        format!("worst |delta| = {worst:.2e} over n=2..12 in {secs:.2}s"),
    ));
}

#[test]
fn criterion_02_hand_verified_anchors() {
    let a2 = make_an(2);
    let a3 = make_an(3);
    let cases = [
        (cut(&a2), 0.25),
        (cut(&triangular_cut(&a2)), 0.25),
        (cut(&a3), 2.5 / 9.0),
        (cut(&triangular_cut(&a3)), 2.5 / 9.0),
    ];
    let values_exact = cases.iter().all(|(got, want)| got == want);
    let ratio2 = cut(&triangular_cut(&a2)) / cut(&a2);
    let ratio3 = cut(&triangular_cut(&a3)) / cut(&a3);

    let mut witnesses_exact = true;
    for a in [&a2, &a3, &triangular_cut(&a2), &triangular_cut(&a3)] {
        let (v, w) = exact::cut_norm_exact(a).unwrap();
        witnesses_exact &= w.evaluate(a) == w.value && w.value / (a.n() * a.n()) as f64 == v;
    }

    let pass = values_exact && ratio2 == 1.0 && ratio3 == 1.0 && witnesses_exact;
    assert!(verdict(
        2,
        "anchor values 1/4 and 2.5/9 with unit truncation ratios",
        pass,
        format!(
            "values exact: {values_exact}, ratios ({ratio2}, {ratio3}), witnesses re-evaluate: {witnesses_exact}"
        ),
    ));
}

#[test]
fn criterion_03_norm_sandwich_on_random_instances() {
    let t0 = Instant::now();
    let report = run_inequality_suite(1000, 8, 310).unwrap();
    let secs = t0.elapsed().as_secs_f64();
    let mut ok = secs < 60.0;
    let mut worst = f64::INFINITY;
    for name in ["opr-dominates-cut", "inf-one-above-cut", "inf-one-below-4cut"] {
        let row = suite_row(&report, name);
        ok &= flag(&row[4]) && num(&row[1]) == 1000.0;
        worst = worst.min(num(&row[2]));
    }
    assert!(verdict(
        3,
        "operator/cut and (inf,1)/cut sandwich, 1000 random matrices n<=8",
        ok,
        format!("worst slack = {worst:.2e} (tolerance 1e-9) in {secs:.2}s"),
    ));
}

#[test]
fn criterion_04_tensor_product_bracket() {
    let t0 = Instant::now();
    let report = run_inequality_suite(200, 4, 410).unwrap();
    let secs = t0.elapsed().as_secs_f64();
    let mut ok = secs < 60.0;
    let mut worst = f64::INFINITY;
    for name in ["tensor-above-product", "tensor-below-grothendieck"] {
        let row = suite_row(&report, name);
        ok &= flag(&row[4]) && num(&row[1]) == 200.0;
        worst = worst.min(num(&row[2]));
    }
    assert!(verdict(
        4,
        "tensor (inf,1) bracket with constant 1.782, 200 random pairs",
        ok,
        format!("worst slack = {worst:.2e} in {secs:.2}s"),
    ));
}

#[test]
fn criterion_05_mask_identity_both_directions() {
    let mut rng = ChaCha8Rng::seed_from_u64(510);
    let mut zero_diag_ok = true;
    for _ in 0..100 {
        let n = rng.gen_range(2..=6);
        let a = random_zero_diag(&mut rng, n);
        let lhs = schur(&triangular_mask(n * n), &kronecker(&a, &a)).unwrap();
        let rhs = kronecker(&triangular_cut(&a), &a);
        zero_diag_ok &= lhs == rhs;
    }

    let ones = Matrix::from_fn(2, |_, _| 1.0);
    let lhs = schur(&triangular_mask(4), &kronecker(&ones, &ones)).unwrap();
    let rhs = kronecker(&triangular_cut(&ones), &ones);
    let counterexample = lhs != rhs;

    let pass = zero_diag_ok && counterexample;
    assert!(verdict(
        5,
        "masked tensor square = tensored truncation iff the diagonal vanishes",
        pass,
        format!(
            "entry-exact on 100 zero-diagonal instances: {zero_diag_ok}, all-ones counterexample: {counterexample}"
        ),
    ));
}

#[test]
fn criterion_06_graphon_matrix_equalities() {
    let mut worst = 0.0f64;
    for n in [2usize, 3] {
        let a = make_an(n);
        let tensor = kronecker(&a, &a);
        let w = StepGraphon::from_matrix(&tensor, false);
        let base_gap = (w.cut_norm(DEFAULT_ENUM_CAP).unwrap().0 - cut(&tensor)).abs();
        let tri_gap = (w.triangular_cut().unwrap().cut_norm(DEFAULT_ENUM_CAP).unwrap().0
            - cut(&triangular_cut(&tensor)))
        .abs();
        worst = worst.max(base_gap).max(tri_gap);
    }
    let pass = worst <= 1e-12;
    assert!(verdict(
        6,
        "step-graphon renderings of the tensor square match the matrices",
        pass,
        format!("worst |delta| = {worst:.2e} at n in {{2,3}}"),
    ));
}

#[test]
fn criterion_07_corner_embedding_scaling_law() {
    let mut rng = ChaCha8Rng::seed_from_u64(710);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let m = rng.gen_range(1..=6);
        let w = StepGraphon::from_matrix(&random_matrix(&mut rng, m, -1.0, 1.0), false);
        let base = w.cut_norm(DEFAULT_ENUM_CAP).unwrap().0;
        for (p, q) in [(1u64, 2u64), (1, 4)] {
            let lambda = BandParams::new(p, q).unwrap();
            let summed = w.corner_embed_sum(lambda).unwrap().cut_norm(DEFAULT_ENUM_CAP).unwrap().0;
            let scale = 2.0 * lambda.value() * lambda.value();
            worst = worst.max((summed - scale * base).abs());
        }
    }

    let one = StepGraphon::from_matrix(&Matrix::from_fn(1, |_, _| 1.0), false);
    let half = BandParams::new(1, 2).unwrap();
    let konst = one.corner_embed_sum(half).unwrap().cut_norm(DEFAULT_ENUM_CAP).unwrap().0;

    let pass = worst <= 1e-9 && (konst - 0.5).abs() <= 1e-9;
    assert!(verdict(
        7,
        "corner copies plus reflection scale the cut norm by 2*lambda^2",
        pass,
        format!("worst |delta| = {worst:.2e} over 20 graphons x 2 lambdas; constant-1 value {konst}"),
    ));
}

#[test]
fn criterion_08_banded_ratio_matches_truncation_ratio() {
    let mut worst = 0.0f64;
    for n in [2usize, 3] {
        let tensor = kronecker(&make_an(n), &make_an(n));
        let w = StepGraphon::from_matrix(&tensor, false);
        let trisym = cut(&triangular_cut(&tensor)) / cut(&tensor);
        for (p, q) in [(1u64, 2u64), (1, 4)] {
            let lambda = BandParams::new(p, q).unwrap();
            let embedded = w.corner_embed_sum(lambda).unwrap();
            let banded = embedded.banded_cut(lambda).unwrap();
            let ratio = banded.cut_norm(DEFAULT_ENUM_CAP).unwrap().0
                / embedded.cut_norm(DEFAULT_ENUM_CAP).unwrap().0;
            worst = worst.max((ratio - trisym).abs());
        }
    }
    let pass = worst <= 1e-12;
    assert!(verdict(
        8,
        "banded-cut ratio equals the truncation ratio",
        pass,
        format!("worst |delta| = {worst:.2e} at n in {{2,3}}, lambda in {{1/2,1/4}}"),
    ));
}

#[test]
fn criterion_09_spectral_growth_bounds() {
    let t0 = Instant::now();
    let ns: Vec<usize> = (1..=9).map(|k| 1usize << k).collect(); // 2, 4, ..., 512
    let report = run_growth(GrowthKind::TriSymOpr, &ns, &growth_cfg(910)).unwrap();
    let opr_col = col(&report, "base_opr");
    let tv_col = col(&report, "testvec");
    let n_col = col(&report, "n");

    let oprs: Vec<f64> = report.rows.iter().map(|r| num(&r[opr_col])).collect();
    let below_pi = oprs.iter().all(|&v| v < PI);
    let monotone = oprs.windows(2).all(|w| w[1] >= w[0] - 1e-10);

    let mut testvec_ok = true;
    for row in &report.rows {
        let n = num(&row[n_col]) as usize;
        if n >= 256 {
            testvec_ok &= num(&row[tv_col]) >= 0.8 * (n as f64).ln() - 1e-9;
        }
    }
    for n in [1024usize, 2048, 4096] {
        testvec_ok &= testvec_lower_bound(n) >= 0.8 * (n as f64).ln() - 1e-9;
    }
    let secs = t0.elapsed().as_secs_f64();
    let pass = below_pi && monotone && testvec_ok && secs < 120.0;
    assert!(verdict(
        9,
        "operator norms stay below pi and grow; test vector beats 0.8 ln n",
        pass,
        format!(
            "opr(512) = {:.6} < pi, monotone: {monotone}, test-vector floor (n<=4096): {testvec_ok}, {secs:.1}s",
            oprs.last().unwrap()
        ),
    ));
}

#[test]
fn criterion_10_truncation_ratio_growth_trend() {
    let cfg = growth_cfg(1010);
    let tri_cut = run_growth(GrowthKind::TriCutBox, &(2..=12).collect::<Vec<_>>(), &cfg).unwrap();
    let rc = col(&tri_cut, "ratio_lo");
    let plain: Vec<f64> = tri_cut.rows.iter().map(|r| num(&r[rc])).collect();
    let plain_monotone = plain.windows(2).all(|w| w[1] >= w[0] - 1e-12);

    let tri_sym = run_growth(GrowthKind::TriSymBox, &[2, 3, 4], &cfg).unwrap();
    let rc = col(&tri_sym, "ratio_lo");
    let sym: Vec<f64> = tri_sym.rows.iter().map(|r| num(&r[rc])).collect();
    let sym_monotone = sym.windows(2).all(|w| w[1] >= w[0] - 1e-12);

    let pass = plain_monotone && sym_monotone;
    assert!(verdict(
        10,
        "truncation ratios nondecreasing (plain n<=12, symmetric n<=4)",
        pass,
        format!("plain monotone: {plain_monotone}, symmetric ratios {sym:?} monotone: {sym_monotone}"),
    ));
}

#[test]
fn criterion_11_heuristic_quality() {
    // Hard bound: heuristics certify lower bounds on named and random instances.
    let mut hard = true;
    let mut instances = 0usize;
    let mut rng = ChaCha8Rng::seed_from_u64(1110);
    let mut check = |a: &Matrix, seed: u64| {
        let cfg = RelaxationConfig::with_seed(seed);
        let exact_cut = cut(a);
        let (lo, _) = approx::cut_norm_lower_heuristic(a, &cfg);
        let (exact_inf, _) = exact::inf_one_norm_exact(a).unwrap();
        let state = approx::relax_inf_one(a, &cfg);
        let (rounded, _) = approx::round_to_signs(a, &state, &cfg);
        instances += 1;
        lo <= exact_cut + 1e-9 && rounded <= exact_inf + 1e-9
    };
    for n in 2..=8 {
        let a = make_an(n);
        hard &= check(&a, n as u64);
        hard &= check(&triangular_cut(&a), 100 + n as u64);
        hard &= check(&triangular_mask(n), 200 + n as u64);
    }
    for k in 0..30 {
        let n = rng.gen_range(2..=8);
        let a = random_matrix(&mut rng, n, -1.0, 1.0);
        hard &= check(&a, 300 + k);
    }

    // Soft target, reported: how often the heuristic lands exactly on the
    // cut norm across 100 seeds.
    let hit_rate = |a: &Matrix| {
        let exact_cut = cut(a);
        (0..100)
            .filter(|&s| {
                let (lo, _) = approx::cut_norm_lower_heuristic(a, &RelaxationConfig::with_seed(s));
                (lo - exact_cut).abs() <= 1e-12
            })
            .count()
    };
    let tri12_hits = hit_rate(&triangular_cut(&make_an(12)));
    let mut rng = ChaCha8Rng::seed_from_u64(1118);
    let rand8_hits = hit_rate(&random_matrix(&mut rng, 8, -1.0, 1.0));

    assert!(verdict(
        11,
        "heuristic lower bounds never exceed exact; seed hit-rates reported",
        hard,
        format!(
            "hard bound held on {instances} instances; exact-match rates: truncated-12 {tri12_hits}/100, random-8 {rand8_hits}/100 (soft target 95)"
        ),
    ));
}

#[test]
fn criterion_12_triangular_cut_sqrt_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(1210);
    let mut worst = f64::INFINITY;
    for _ in 0..200 {
        let m = rng.gen_range(2..=8);
        let w = StepGraphon::from_matrix(&random_symmetric_zero_diag(&mut rng, m, -2.0, 2.0), false);
        let base = w.cut_norm(DEFAULT_ENUM_CAP).unwrap().0;
        let tri = w.triangular_cut().unwrap().cut_norm(DEFAULT_ENUM_CAP).unwrap().0;
        worst = worst.min(2.0 * base.sqrt() - tri);
    }
    let pass = worst >= -1e-9;
    assert!(verdict(
        12,
        "triangular cut stays below twice the root of the cut norm",
        pass,
        format!("worst slack = {worst:.3} over 200 symmetric graphons m<=8"),
    ));
}

#[test]
fn criterion_13_reports_are_thread_count_invariant() {
    let build = || -> String {
        let cfg = growth_cfg(1310);
        let mut out = String::new();
        let tri = run_growth(GrowthKind::TriCutBox, &(2..=10).collect::<Vec<_>>(), &cfg).unwrap();
        out.push_str(&tri.render(ReportFormat::Json));
        out.push_str(&tri.render(ReportFormat::Csv));
        // side 36 exceeds the cap, forcing the seeded relaxation + rounding path
        let sym = run_growth(GrowthKind::TriSymBox, &[2, 6], &cfg).unwrap();
        out.push_str(&sym.render(ReportFormat::Json));
        let banded = run_growth(
            GrowthKind::BandedBox,
            &[2, 3],
            &GrowthConfig { lambda: BandParams::new(1, 4).unwrap(), ..cfg },
        )
        .unwrap();
        out.push_str(&banded.render(ReportFormat::Csv));
        let verify = cutnorm_core::experiments::run_verify(1313).unwrap();
        out.push_str(&verify.render(ReportFormat::Json));
        out
    };

    let renders: Vec<String> = [1usize, 2, 4]
        .iter()
        .map(|&t| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .unwrap()
                .install(build)
        })
        .collect();
    let pass = renders[0] == renders[1] && renders[1] == renders[2];
    assert!(verdict(
        13,
        "reports byte-identical across 1/2/4 worker threads",
        pass,
        format!("{} bytes per run", renders[0].len()),
    ));
}
