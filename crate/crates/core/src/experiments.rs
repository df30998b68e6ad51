//! Scripted experiments over the reciprocal-difference family: growth of the
//! triangular-cut ratios, inequality chains between the three norms, and the
//! invariant battery behind the `verify` subcommand. Results land in
//! deterministic tabular reports.

use crate::approx::{RelaxationConfig, GENERATOR_TAG};
use crate::exact::{self, ExactError, NonConvergence, UpperMethod, DEFAULT_ENUM_CAP};
use crate::graphon::{BandParams, GraphonError, StepGraphon};
use crate::matrix::{
    closed_form_tri_cut_norm, harmonic, kronecker, make_an, schur, triangular_cut,
    triangular_mask, Matrix, MatrixError, K_G_HIGH,
};
use crate::report::{Cell, ExperimentReport, ReportMetadata};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("bad experiment range: {0}")]
    BadRange(String),
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error(transparent)]
    Graphon(#[from] GraphonError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Power(#[from] NonConvergence),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrowthKind {
    TriCutBox,
    TriSymBox,
    TriSymOpr,
    BandedBox,
}

impl GrowthKind {
    pub fn id(self) -> &'static str {
        match self {
            GrowthKind::TriCutBox => "tri-cut-box",
            GrowthKind::TriSymBox => "tri-sym-box",
            GrowthKind::TriSymOpr => "tri-sym-opr",
            GrowthKind::BandedBox => "banded-box",
        }
    }
}

impl FromStr for GrowthKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tri-cut-box" => Ok(GrowthKind::TriCutBox),
            "tri-sym-box" => Ok(GrowthKind::TriSymBox),
            "tri-sym-opr" => Ok(GrowthKind::TriSymOpr),
            "banded-box" => Ok(GrowthKind::BandedBox),
            other => Err(format!(
                "unknown growth kind {other:?}; expected tri-cut-box, tri-sym-box, \
                 tri-sym-opr, or banded-box"
            )),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GrowthConfig {
    pub cap: usize,
    pub relax: RelaxationConfig,
    /// Band parameter for the banded-box kind; ignored by the others.
    pub lambda: BandParams,
}

impl Default for GrowthConfig {
    fn default() -> Self {
        GrowthConfig {
            cap: DEFAULT_ENUM_CAP,
            relax: RelaxationConfig::default(),
            lambda: BandParams::new(1, 2).expect("1/2 is a valid band parameter"),
        }
    }
}

const CROSS_CHECK_TOL: f64 = 1e-12;
const FLOOR_TOL: f64 = 1e-9;
const SLACK_TOL: f64 = 1e-9;
const MATCH_TOL: f64 = 1e-12;

fn growth_metadata(cfg: &GrowthConfig) -> ReportMetadata {
    ReportMetadata {
        seed: Some(cfg.relax.seed),
        enum_cap: cfg.cap,
        generator: GENERATOR_TAG.to_string(),
        tolerances: Default::default(),
        wall_clock_ms: None,
    }
}

fn checked_ns(ns: &[usize]) -> Result<Vec<usize>, ExperimentError> {
    if ns.is_empty() {
        return Err(ExperimentError::BadRange("no n values given".into()));
    }
    let mut ns: Vec<usize> = ns.to_vec();
    ns.sort_unstable();
    ns.dedup();
    if ns[0] < 2 {
        return Err(ExperimentError::BadRange(format!(
            "the reciprocal-difference family needs n >= 2, got {}",
            ns[0]
        )));
    }
    Ok(ns)
}

/// Certified [lower, upper] for the cut norm: collapsed to the exact value
/// within the cap, bracket endpoints beyond it.
fn cut_bounds(a: &Matrix, cfg: &GrowthConfig) -> (f64, f64, bool) {
    let b = exact::cut_norm_bracket(a, cfg.cap, &cfg.relax);
    (b.lower, b.upper, b.method == UpperMethod::EnumerationExact)
}

/// n·(H_{n−1} − 1) + 1, the numerator shared by the growth floors.
fn floor_numerator(n: usize) -> f64 {
    n as f64 * (harmonic(n - 1) - 1.0) + 1.0
}

/// ‖(T_n∘A_n)v‖₂ for the unit test vector v = (n−1)^{−1/2}·(0,1,…,1):
/// the i-th output entry is H_{i−2}/√(n−1), so the norm is
/// √(Σ_{k=1}^{n−2} H_k² / (n−1)). O(n), no matrix needed.
pub fn testvec_lower_bound(n: usize) -> f64 {
    assert!(n >= 2);
    let mut h = 0.0;
    let mut sum = 0.0;
    for k in 1..=n.saturating_sub(2) {
        h += 1.0 / k as f64;
        sum += h * h;
    }
    (sum / (n - 1) as f64).sqrt()
}

pub fn run_growth(
    kind: GrowthKind,
    ns: &[usize],
    cfg: &GrowthConfig,
) -> Result<ExperimentReport, ExperimentError> {
    let ns = checked_ns(ns)?;
    match kind {
        GrowthKind::TriCutBox => tri_cut_box(&ns, cfg),
        GrowthKind::TriSymBox => tri_sym_box(&ns, cfg),
        GrowthKind::TriSymOpr => tri_sym_opr(&ns, cfg),
        GrowthKind::BandedBox => banded_box(&ns, cfg),
    }
}

fn tri_cut_box(ns: &[usize], cfg: &GrowthConfig) -> Result<ExperimentReport, ExperimentError> {
    let meta = growth_metadata(cfg)
        .with_tolerance("cross_check", CROSS_CHECK_TOL)
        .with_tolerance("floor", FLOOR_TOL);
    let mut report = ExperimentReport::new(
        "tri-cut-box",
        &[
            "n",
            "closed_form",
            "tri_exact",
            "base_lo",
            "base_hi",
            "ratio_lo",
            "paper_floor",
            "pass",
            "paper_floor_literal",
        ],
        meta,
    );
    for &n in ns {
        let a = make_an(n);
        let closed = closed_form_tri_cut_norm(n)?;
        let (tri_lo, _tri_hi, tri_is_exact) = cut_bounds(&triangular_cut(&a), cfg);
        // past the cap the closed form stands in for enumeration
        let tri_val = if tri_is_exact { tri_lo } else { closed };
        let cross_ok = !tri_is_exact || (tri_val - closed).abs() <= CROSS_CHECK_TOL;
        let (base_lo, base_hi, _) = cut_bounds(&a, cfg);
        let ratio_lo = tri_val / base_hi;
        let floor = floor_numerator(n) / (PI * n as f64);
        let floor_literal = floor_numerator(n) / n as f64;
        let pass = cross_ok && ratio_lo >= floor - FLOOR_TOL;
        report.push_row(vec![
            Cell::Int(n as i64),
            Cell::Float(closed),
            Cell::Float(tri_val),
            Cell::Float(base_lo),
            Cell::Float(base_hi),
            Cell::Float(ratio_lo),
            Cell::Float(floor),
            Cell::Bool(pass),
            Cell::Float(floor_literal),
        ]);
    }
    Ok(report)
}

fn tri_sym_box(ns: &[usize], cfg: &GrowthConfig) -> Result<ExperimentReport, ExperimentError> {
    let meta = growth_metadata(cfg).with_tolerance("floor", FLOOR_TOL);
    let mut report = ExperimentReport::new(
        "tri-sym-box",
        &["n", "tri_lo", "tri_hi", "base_lo", "base_hi", "ratio_lo", "paper_floor", "pass"],
        meta,
    );
    for &n in ns {
        let a = make_an(n);
        let w = kronecker(&a, &a);
        let (tri_lo, tri_hi, _) = cut_bounds(&triangular_cut(&w), cfg);
        let (base_lo, base_hi, _) = cut_bounds(&w, cfg);
        let ratio_lo = tri_lo / base_hi;
        let floor = floor_numerator(n) / (8.0 * PI * PI * K_G_HIGH * K_G_HIGH * n as f64);
        let pass = ratio_lo >= floor - FLOOR_TOL;
        report.push_row(vec![
            Cell::Int(n as i64),
            Cell::Float(tri_lo),
            Cell::Float(tri_hi),
            Cell::Float(base_lo),
            Cell::Float(base_hi),
            Cell::Float(ratio_lo),
            Cell::Float(floor),
            Cell::Bool(pass),
        ]);
    }
    Ok(report)
}

fn tri_sym_opr(ns: &[usize], cfg: &GrowthConfig) -> Result<ExperimentReport, ExperimentError> {
    let meta = growth_metadata(cfg).with_tolerance("testvec_floor", FLOOR_TOL);
    let mut report = ExperimentReport::new(
        "tri-sym-opr",
        &["n", "tri_opr", "base_opr", "ratio", "testvec", "ln_ref", "log2_ref", "pass"],
        meta,
    );
    for &n in ns {
        let a = make_an(n);
        // ratio on the side-n factors: the truncated tensor square factors as
        // (T_n∘A_n)⊗A_n because A_n has zero diagonal, and the operator norm
        // is multiplicative over Kronecker products, so the n²-side ratio
        // collapses to tri_opr/base_opr.
        let tri_opr = exact::operator_norm(&triangular_cut(&a))?;
        let base_opr = exact::operator_norm(&a)?;
        let ratio = tri_opr / base_opr;
        let testvec = testvec_lower_bound(n);
        let ln_ref = 0.8 * (n as f64).ln();
        let log2_ref = 0.8 * (n as f64).log2();
        let pass = base_opr < PI && (n < 256 || testvec >= ln_ref - FLOOR_TOL);
        report.push_row(vec![
            Cell::Int(n as i64),
            Cell::Float(tri_opr),
            Cell::Float(base_opr),
            Cell::Float(ratio),
            Cell::Float(testvec),
            Cell::Float(ln_ref),
            Cell::Float(log2_ref),
            Cell::Bool(pass),
        ]);
    }
    Ok(report)
}

/// The embedded banded ratio and the plain truncation ratio for the same n,
/// which Lemma 4.2 makes equal (the 2λ² factors cancel).
fn banded_and_trisym_ratios(
    n: usize,
    lambda: BandParams,
    cap: usize,
) -> Result<(f64, f64, f64, f64), ExperimentError> {
    let a = make_an(n);
    let w = kronecker(&a, &a);
    let graphon = StepGraphon::from_matrix(&w, false);
    let embedded = graphon.corner_embed_sum(lambda)?;
    let banded = embedded.banded_cut(lambda)?;
    let (banded_norm, _) = banded.cut_norm(cap)?;
    let (embed_norm, _) = embedded.cut_norm(cap)?;
    let (tri_norm, _) = exact::cut_norm_exact_capped(&triangular_cut(&w), cap)?;
    let (base_norm, _) = exact::cut_norm_exact_capped(&w, cap)?;
    Ok((banded_norm, embed_norm, banded_norm / embed_norm, tri_norm / base_norm))
}

fn banded_box(ns: &[usize], cfg: &GrowthConfig) -> Result<ExperimentReport, ExperimentError> {
    let meta = growth_metadata(cfg).with_tolerance("ratio_match", MATCH_TOL);
    let mut report = ExperimentReport::new(
        "banded-box",
        &["n", "lambda", "banded_norm", "embed_norm", "ratio", "trisym_ratio", "pass"],
        meta,
    );
    for &n in ns {
        let (banded_norm, embed_norm, ratio, trisym) =
            banded_and_trisym_ratios(n, cfg.lambda, cfg.cap)?;
        let pass = (ratio - trisym).abs() <= MATCH_TOL;
        report.push_row(vec![
            Cell::Int(n as i64),
            Cell::text(cfg.lambda.to_string()),
            Cell::Float(banded_norm),
            Cell::Float(embed_norm),
            Cell::Float(ratio),
            Cell::Float(trisym),
            Cell::Bool(pass),
        ]);
    }
    Ok(report)
}

fn random_matrix(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Matrix {
    let data: Vec<f64> = (0..n * n).map(|_| rng.gen_range(lo..=hi)).collect();
    Matrix::from_fn(n, |i, j| data[i * n + j])
}

fn slack_row(name: &str, instances: usize, worst: f64, tol: f64) -> Vec<Cell> {
    vec![
        Cell::text(name),
        Cell::Int(instances as i64),
        Cell::Float(worst),
        Cell::Float(tol),
        Cell::Bool(worst >= -tol),
    ]
}

const SUITE_COLUMNS: [&str; 5] = ["check", "instances", "worst_slack", "tolerance", "pass"];

/// Checks the norm sandwich on `count` random matrices (sides 2..=n_max,
/// entries uniform in [−1,1]) and the tensor bound on `count` random pairs of
/// side ≤ 4, recording the worst slack per inequality. Slacks are
/// "inequality margin": negative means violated.
pub fn run_inequality_suite(
    count: usize,
    n_max: usize,
    seed: u64,
) -> Result<ExperimentReport, ExperimentError> {
    if !(2..=DEFAULT_ENUM_CAP).contains(&n_max) {
        return Err(ExperimentError::BadRange(format!(
            "n_max must lie in 2..={DEFAULT_ENUM_CAP}, got {n_max}"
        )));
    }
    let meta = ReportMetadata {
        seed: Some(seed),
        enum_cap: DEFAULT_ENUM_CAP,
        generator: GENERATOR_TAG.to_string(),
        tolerances: Default::default(),
        wall_clock_ms: None,
    }
    .with_tolerance("slack", SLACK_TOL);
    let mut report = ExperimentReport::new("inequality-suite", &SUITE_COLUMNS, meta);
    if count == 0 {
        return Ok(report);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut opr_worst = f64::INFINITY;
    let mut inf_lo_worst = f64::INFINITY;
    let mut inf_hi_worst = f64::INFINITY;
    for _ in 0..count {
        let n = rng.gen_range(2..=n_max);
        let a = random_matrix(&mut rng, n, -1.0, 1.0);
        let nn = (n * n) as f64;
        let (cut, _) = exact::cut_norm_exact(&a)?;
        let (inf, _) = exact::inf_one_norm_exact(&a)?;
        let opr = exact::operator_norm(&a)?;
        opr_worst = opr_worst.min(opr - n as f64 * cut);
        inf_lo_worst = inf_lo_worst.min(inf - nn * cut);
        inf_hi_worst = inf_hi_worst.min(4.0 * nn * cut - inf);
    }

    let pair_max = n_max.min(4);
    let mut tensor_lo_worst = f64::INFINITY;
    let mut tensor_hi_worst = f64::INFINITY;
    for _ in 0..count {
        let na = rng.gen_range(2..=pair_max);
        let nb = rng.gen_range(2..=pair_max);
        let a = random_matrix(&mut rng, na, -1.0, 1.0);
        let b = random_matrix(&mut rng, nb, -1.0, 1.0);
        let (ia, _) = exact::inf_one_norm_exact(&a)?;
        let (ib, _) = exact::inf_one_norm_exact(&b)?;
        let (ik, _) = exact::inf_one_norm_exact(&kronecker(&a, &b))?;
        tensor_lo_worst = tensor_lo_worst.min(ik - ia * ib);
        tensor_hi_worst = tensor_hi_worst.min(PI / 2.0 * K_G_HIGH * K_G_HIGH * ia * ib - ik);
    }

    report.push_row(slack_row("opr-dominates-cut", count, opr_worst, SLACK_TOL));
    report.push_row(slack_row("inf-one-above-cut", count, inf_lo_worst, SLACK_TOL));
    report.push_row(slack_row("inf-one-below-4cut", count, inf_hi_worst, SLACK_TOL));
    report.push_row(slack_row("tensor-above-product", count, tensor_lo_worst, SLACK_TOL));
    report.push_row(slack_row("tensor-below-grothendieck", count, tensor_hi_worst, SLACK_TOL));
    Ok(report)
}

fn random_zero_diag(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Matrix {
    let m = random_matrix(rng, n, lo, hi);
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

fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    a.data().iter().zip(b.data()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Identity battery: masked tensor squares, the graphon equalities, the
/// corner-embedding scaling law, the triangular-cut bounds, the closed form,
/// witness soundness, and banded/truncation consistency. One row per check.
pub fn run_invariant_suite(seed: u64) -> Result<ExperimentReport, ExperimentError> {
    let cap = DEFAULT_ENUM_CAP;
    let meta = ReportMetadata {
        seed: Some(seed),
        enum_cap: cap,
        generator: GENERATOR_TAG.to_string(),
        tolerances: Default::default(),
        wall_clock_ms: None,
    }
    .with_tolerance("exact_identity", 0.0)
    .with_tolerance("cross_check", CROSS_CHECK_TOL)
    .with_tolerance("slack", SLACK_TOL);
    let mut report = ExperimentReport::new("invariant-suite", &SUITE_COLUMNS, meta);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // masking the tensor square commutes with truncating the left factor,
    // entry-exact, whenever the diagonal vanishes
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = rng.gen_range(2..=6);
        let a = random_zero_diag(&mut rng, n, -1.0, 1.0);
        let lhs = schur(&triangular_mask(n * n), &kronecker(&a, &a)).expect("same side");
        let rhs = kronecker(&triangular_cut(&a), &a);
        worst = worst.max(max_abs_diff(&lhs, &rhs));
    }
    report.push_row(slack_row("mask-identity-zero-diag", 100, -worst, 0.0));

    // with a nonzero diagonal the identity must fail
    let ones = Matrix::from_fn(2, |_, _| 1.0);
    let lhs = schur(&triangular_mask(4), &kronecker(&ones, &ones)).expect("same side");
    let rhs = kronecker(&triangular_cut(&ones), &ones);
    let gap = max_abs_diff(&lhs, &rhs);
    report.push_row(vec![
        Cell::text("mask-identity-counterexample"),
        Cell::Int(1),
        Cell::Float(gap),
        Cell::Float(0.0),
        Cell::Bool(gap > 0.0),
    ]);

    // graphon renderings of the tensor-square norms agree with the matrices
    let mut worst = 0.0f64;
    for n in [2usize, 3] {
        let a = make_an(n);
        let w_mat = kronecker(&a, &a);
        let w = StepGraphon::from_matrix(&w_mat, false);
        let d_base = (w.cut_norm(cap)?.0 - exact::cut_norm_exact_capped(&w_mat, cap)?.0).abs();
        let d_tri = (w.triangular_cut()?.cut_norm(cap)?.0
            - exact::cut_norm_exact_capped(&triangular_cut(&w_mat), cap)?.0)
            .abs();
        worst = worst.max(d_base).max(d_tri);
    }
    report.push_row(slack_row("tensor-graphon-equalities", 2, CROSS_CHECK_TOL - worst, SLACK_TOL));

    // corner embedding scales the cut norm by exactly 2λ²
    let mut worst = 0.0f64;
    for &(p, q) in &[(1u64, 2u64), (1, 4)] {
        let lambda = BandParams::new(p, q)?;
        let scale = 2.0 * lambda.value() * lambda.value();
        for _ in 0..10 {
            let m = rng.gen_range(1..=6);
            let w = StepGraphon::from_matrix(&random_matrix(&mut rng, m, -1.0, 1.0), false);
            let base = w.cut_norm(cap)?.0;
            let summed = w.corner_embed_sum(lambda)?.cut_norm(cap)?.0;
            worst = worst.max((summed - scale * base).abs());
        }
    }
    report.push_row(slack_row("corner-embed-scaling", 20, SLACK_TOL - worst, SLACK_TOL));

    // the constant-1 graphon at λ = 1/2 lands exactly on 1/2
    let one = StepGraphon::from_matrix(&Matrix::from_fn(1, |_, _| 1.0), false);
    let half = BandParams::new(1, 2)?;
    let v = one.corner_embed_sum(half)?.cut_norm(cap)?.0;
    report.push_row(vec![
        Cell::text("corner-embed-constant-one"),
        Cell::Int(1),
        Cell::Float(v - 0.5),
        Cell::Float(0.0),
        Cell::Bool(v == 0.5),
    ]);

    // triangular cut of a symmetric graphon stays below 2√(cut norm)
    let mut worst = f64::INFINITY;
    for _ in 0..200 {
        let m = rng.gen_range(2..=8);
        let w = StepGraphon::from_matrix(&random_symmetric_zero_diag(&mut rng, m, -2.0, 2.0), false);
        let base = w.cut_norm(cap)?.0;
        let tri = w.triangular_cut()?.cut_norm(cap)?.0;
        worst = worst.min(2.0 * base.sqrt() - tri);
    }
    report.push_row(slack_row("triangular-cut-sqrt-bound", 200, worst, SLACK_TOL));

    // for nonnegative graphons the triangular cut is at most half the norm
    let mut worst = f64::INFINITY;
    for _ in 0..100 {
        let m = rng.gen_range(2..=8);
        let w = StepGraphon::from_matrix(&random_symmetric_zero_diag(&mut rng, m, 0.0, 2.0), false);
        let base = w.cut_norm(cap)?.0;
        let tri = w.triangular_cut()?.cut_norm(cap)?.0;
        worst = worst.min(0.5 * base - tri);
    }
    report.push_row(slack_row("nonnegative-halving", 100, worst, SLACK_TOL));

    // enumeration reproduces the closed form across the exact range
    let mut worst = 0.0f64;
    for n in 2..=12 {
        let closed = closed_form_tri_cut_norm(n)?;
        let (v, _) = exact::cut_norm_exact_capped(&triangular_cut(&make_an(n)), cap)?;
        worst = worst.max((v - closed).abs());
    }
    report.push_row(slack_row("closed-form-cross-check", 11, CROSS_CHECK_TOL - worst, SLACK_TOL));

    // witnesses re-evaluate to their recorded values
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let n = rng.gen_range(2..=8);
        let a = random_matrix(&mut rng, n, -1.0, 1.0);
        let (cut, cw) = exact::cut_norm_exact(&a)?;
        let (inf, sw) = exact::inf_one_norm_exact(&a)?;
        worst = worst.max((cw.evaluate(&a) - cw.value).abs());
        worst = worst.max((cw.value / (n * n) as f64 - cut).abs());
        worst = worst.max((sw.evaluate(&a) - inf).abs());
    }
    report.push_row(slack_row("witness-soundness", 50, CROSS_CHECK_TOL - worst, SLACK_TOL));

    // banded ratio equals the truncation ratio at both anchors and lambdas
    let mut worst = 0.0f64;
    for n in [2usize, 3] {
        for &(p, q) in &[(1u64, 2u64), (1, 4)] {
            let lambda = BandParams::new(p, q)?;
            let (_, _, ratio, trisym) = banded_and_trisym_ratios(n, lambda, cap)?;
            worst = worst.max((ratio - trisym).abs());
        }
    }
    report.push_row(slack_row("banded-matches-truncation", 4, MATCH_TOL - worst, SLACK_TOL));

    Ok(report)
}

/// The `verify` battery: the inequality suite at a fixed desk-scale size plus
/// the invariant suite, merged into one report.
pub fn run_verify(seed: u64) -> Result<ExperimentReport, ExperimentError> {
    let inequalities = run_inequality_suite(200, 6, seed)?;
    let invariants = run_invariant_suite(seed)?;
    let mut report = ExperimentReport::new("verify", &SUITE_COLUMNS, inequalities.metadata.clone());
    for row in inequalities.rows.into_iter().chain(invariants.rows) {
        report.push_row(row);
    }
    Ok(report)
}
