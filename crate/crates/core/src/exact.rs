//! Exact norm computation by enumeration, and the certified bracket that takes
//! over past the enumeration cap.
//!
//! Cut norm: (1/n^2) * max over index subsets S, T of |sum_{i in S, j in T} a_ij|.
//! The maximum over T for a fixed S is attained at the positive or negative
//! support of the column sums, so only row subsets are enumerated. Subsets walk
//! in Gray-code order with incremental column-sum updates, split into
//! fixed-size chunks whose state is recomputed from scratch, which keeps
//! results bit-identical no matter how many threads share the scan. Rows that
//! are entirely zero never enter an optimal canonical witness and are skipped,
//! so the cap applies to the count of nonzero rows.

use crate::approx::{self, RelaxationConfig};
use crate::matrix::Matrix;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

/// Default bound on enumerated rows: 2^25 subsets stays under a minute.
pub const DEFAULT_ENUM_CAP: usize = 25;

/// Largest matrix side the enumeration backend supports (subset masks are u128).
pub const MAX_ENUM_SIDE: usize = 128;

/// Ranks per enumeration chunk. Chunk boundaries are fixed so serial and
/// parallel runs perform identical arithmetic.
const CHUNK_BITS: u32 = 16;

#[derive(Debug, Error, PartialEq)]
pub enum ExactError {
    #[error(
        "enumeration over {rows} nonzero rows exceeds the cap of {cap}; \
         use cut_norm_bracket or the relaxation heuristics for sides this large"
    )]
    CapExceeded { rows: usize, cap: usize },
    #[error("enumeration supports sides up to {max}, got {side}", max = MAX_ENUM_SIDE)]
    SideTooLarge { side: usize },
}

#[derive(Debug, Error, PartialEq)]
#[error(
    "power iteration did not converge in {iterations} iterations; \
     best bracket [{lower}, {upper}]"
)]
pub struct NonConvergence {
    pub lower: f64,
    pub upper: f64,
    pub iterations: usize,
}

/// Optimal rectangle for the cut norm. Indices are 1-based and ascending;
/// `value` is the un-normalized |sum over S x T|, re-evaluated freshly from the
/// matrix rather than taken from enumeration intermediates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutWitness {
    pub s: Vec<usize>,
    pub t: Vec<usize>,
    pub value: f64,
}

impl CutWitness {
    /// |sum over S x T|, summed in ascending (i, j) order.
    pub fn evaluate(&self, a: &Matrix) -> f64 {
        let mut sum = 0.0;
        for &i in &self.s {
            for &j in &self.t {
                sum += a.get(i - 1, j - 1);
            }
        }
        sum.abs()
    }
}

/// Optimal sign pair for the (∞,1)-norm: value = x^T A y with x, y in {±1}^n.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignWitness {
    pub x: Vec<i8>,
    pub y: Vec<i8>,
    pub value: f64,
}

impl SignWitness {
    pub fn evaluate(&self, a: &Matrix) -> f64 {
        let n = a.n();
        let mut total = 0.0;
        for i in 0..n {
            let mut row = 0.0;
            for j in 0..n {
                row += a.get(i, j) * self.y[j] as f64;
            }
            total += self.x[i] as f64 * row;
        }
        total
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum UpperMethod {
    EnumerationExact,
    SpectralBound,
    L1Bound,
    BracketFromInfOne,
}

impl UpperMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            UpperMethod::EnumerationExact => "enumeration-exact",
            UpperMethod::SpectralBound => "spectral-bound",
            UpperMethod::L1Bound => "l1-bound",
            UpperMethod::BracketFromInfOne => "bracket-from-inf-one",
        }
    }
}

/// Certified cut-norm bracket: lower comes with a witness when one was found,
/// upper records which bound won.
#[derive(Debug, Clone, Serialize)]
pub struct NormBracket {
    pub lower: f64,
    pub upper: f64,
    pub lower_witness: Option<CutWitness>,
    pub method: UpperMethod,
}

/// Set-comparison key: the characteristic vector read as a binary string with
/// index 1 most significant. Smaller key = canonical witness.
#[inline]
fn subset_key(mask: u128, width: usize) -> u128 {
    if width == 0 {
        return 0;
    }
    mask.reverse_bits() >> (128 - width)
}

fn nonzero_rows(a: &Matrix) -> Vec<usize> {
    (0..a.n()).filter(|&i| a.row(i).iter().any(|&v| v != 0.0)).collect()
}

#[derive(Clone, Copy, Debug)]
struct CutBest {
    val: f64,
    smask: u64,
    tmask: u128,
}

impl CutBest {
    const SENTINEL: CutBest = CutBest { val: -1.0, smask: 0, tmask: 0 };
}

fn better_cut(a: CutBest, b: CutBest, k: usize, n: usize) -> CutBest {
    if a.val != b.val {
        return if a.val > b.val { a } else { b };
    }
    let (ka, kb) = (subset_key(a.smask as u128, k), subset_key(b.smask as u128, k));
    if ka != kb {
        return if ka < kb { a } else { b };
    }
    if subset_key(a.tmask, n) <= subset_key(b.tmask, n) {
        a
    } else {
        b
    }
}

/// Support of the winning side for the current column sums; ties between the
/// positive and negative side resolve toward the smaller column key.
fn pick_t(c: &[f64], pos: f64, neg_mag: f64) -> u128 {
    let n = c.len();
    let mask_of = |want_pos: bool| -> u128 {
        let mut m = 0u128;
        for (j, &v) in c.iter().enumerate() {
            if (want_pos && v > 0.0) || (!want_pos && v < 0.0) {
                m |= 1 << j;
            }
        }
        m
    };
    if pos > neg_mag {
        mask_of(true)
    } else if neg_mag > pos {
        mask_of(false)
    } else {
        let (tp, tn) = (mask_of(true), mask_of(false));
        if subset_key(tp, n) <= subset_key(tn, n) {
            tp
        } else {
            tn
        }
    }
}

/// Scan Gray-code ranks [lo, hi) over the rows listed in `nz`.
fn cut_scan_range(a: &Matrix, nz: &[usize], lo: u64, hi: u64) -> CutBest {
    let n = a.n();
    let k = nz.len();
    let mut g = lo ^ (lo >> 1);
    let mut c = vec![0.0f64; n];
    for (b, &row) in nz.iter().enumerate() {
        if g >> b & 1 == 1 {
            for (j, &v) in a.row(row).iter().enumerate() {
                c[j] += v;
            }
        }
    }
    let mut pos = 0.0;
    let mut neg = 0.0; // sum of negative column sums, <= 0
    for &v in &c {
        if v > 0.0 {
            pos += v;
        } else if v < 0.0 {
            neg += v;
        }
    }

    let mut best = CutBest::SENTINEL;
    let consider = |g: u64, c: &[f64], pos: f64, neg: f64, best: &mut CutBest| {
        let val = pos.max(-neg);
        if val > best.val {
            *best = CutBest { val, smask: g, tmask: pick_t(c, pos, -neg) };
        } else if val == best.val {
            let key = subset_key(g as u128, k);
            let bkey = subset_key(best.smask as u128, k);
            if key < bkey {
                *best = CutBest { val, smask: g, tmask: pick_t(c, pos, -neg) };
            } else if key == bkey {
                let t = pick_t(c, pos, -neg);
                if subset_key(t, n) < subset_key(best.tmask, n) {
                    *best = CutBest { val, smask: g, tmask: t };
                }
            }
        }
    };

    consider(g, &c, pos, neg, &mut best);
    for r in lo + 1..hi {
        let b = r.trailing_zeros() as usize;
        g ^= 1 << b;
        let sign = if g >> b & 1 == 1 { 1.0 } else { -1.0 };
        for (j, &v) in a.row(nz[b]).iter().enumerate() {
            let old = c[j];
            if old > 0.0 {
                pos -= old;
            } else if old < 0.0 {
                neg -= old;
            }
            let new = old + sign * v;
            c[j] = new;
            if new > 0.0 {
                pos += new;
            } else if new < 0.0 {
                neg += new;
            }
        }
        consider(g, &c, pos, neg, &mut best);
    }
    best
}

pub fn cut_norm_exact(a: &Matrix) -> Result<(f64, CutWitness), ExactError> {
    cut_norm_exact_capped(a, DEFAULT_ENUM_CAP)
}

pub fn cut_norm_exact_capped(a: &Matrix, cap: usize) -> Result<(f64, CutWitness), ExactError> {
    let n = a.n();
    if n > MAX_ENUM_SIDE {
        return Err(ExactError::SideTooLarge { side: n });
    }
    let cap = cap.min(62); // subset ranks are u64
    let nz = nonzero_rows(a);
    let k = nz.len();
    if k > cap {
        return Err(ExactError::CapExceeded { rows: k, cap });
    }

    let total: u64 = 1 << k;
    let chunk: u64 = 1 << CHUNK_BITS;
    let starts: Vec<u64> = (0..total).step_by(chunk as usize).collect();
    let best = starts
        .par_iter()
        .map(|&lo| cut_scan_range(a, &nz, lo, (lo + chunk).min(total)))
        .reduce(|| CutBest::SENTINEL, |x, y| better_cut(x, y, k, n));

    let s: Vec<usize> =
        (0..k).filter(|&b| best.smask >> b & 1 == 1).map(|b| nz[b] + 1).collect();
    let t: Vec<usize> = (0..n).filter(|&j| best.tmask >> j & 1 == 1).map(|j| j + 1).collect();
    let mut w = CutWitness { s, t, value: 0.0 };
    w.value = w.evaluate(a);
    Ok((w.value / (n * n) as f64, w))
}

#[derive(Clone, Copy, Debug)]
struct SignBest {
    val: f64,
    xmask: u64,
}

impl SignBest {
    const SENTINEL: SignBest = SignBest { val: -1.0, xmask: 0 };
}

/// Scan sign vectors over the free rows `free` (bit b set = x at free[b] is -1).
fn inf_scan_range(a: &Matrix, free: &[usize], lo: u64, hi: u64) -> SignBest {
    let n = a.n();
    let e = free.len();
    let mut g = lo ^ (lo >> 1);

    // t = A^T x for the sign vector at rank lo; all rows outside `free` are +1.
    let mut x = vec![1.0f64; n];
    for (b, &row) in free.iter().enumerate() {
        if g >> b & 1 == 1 {
            x[row] = -1.0;
        }
    }
    let mut t = vec![0.0f64; n];
    for i in 0..n {
        let xi = x[i];
        for (j, &v) in a.row(i).iter().enumerate() {
            t[j] += xi * v;
        }
    }
    let mut obj: f64 = t.iter().map(|v| v.abs()).sum();

    let mut best = SignBest::SENTINEL;
    let consider = |g: u64, obj: f64, best: &mut SignBest| {
        if obj > best.val
            || (obj == best.val && subset_key(g as u128, e) < subset_key(best.xmask as u128, e))
        {
            *best = SignBest { val: obj, xmask: g };
        }
    };

    consider(g, obj, &mut best);
    for r in lo + 1..hi {
        let b = r.trailing_zeros() as usize;
        g ^= 1 << b;
        let row = free[b];
        let old_sign = x[row];
        x[row] = -old_sign;
        let step = -2.0 * old_sign;
        for (j, &v) in a.row(row).iter().enumerate() {
            let old = t[j];
            let new = old + step * v;
            t[j] = new;
            obj += new.abs() - old.abs();
        }
        consider(g, obj, &mut best);
    }
    best
}

pub fn inf_one_norm_exact(a: &Matrix) -> Result<(f64, SignWitness), ExactError> {
    inf_one_norm_exact_capped(a, DEFAULT_ENUM_CAP)
}

/// Exact (∞,1)-norm: max over x in {±1}^n of sum_j |(A^T x)_j|, with the
/// optimal y read off as the sign pattern of A^T x (sign(0) = +1).
///
/// The x -> -x symmetry pins the first nonzero row to +1, so matrices with up
/// to cap+1 nonzero rows stay within 2^cap enumeration steps.
pub fn inf_one_norm_exact_capped(a: &Matrix, cap: usize) -> Result<(f64, SignWitness), ExactError> {
    let n = a.n();
    if n > MAX_ENUM_SIDE {
        return Err(ExactError::SideTooLarge { side: n });
    }
    let cap = cap.min(62);
    let nz = nonzero_rows(a);
    let free: Vec<usize> = nz.iter().copied().skip(1).collect();
    let e = free.len();
    if e > cap {
        return Err(ExactError::CapExceeded { rows: nz.len(), cap });
    }

    let total: u64 = 1 << e;
    let chunk: u64 = 1 << CHUNK_BITS;
    let starts: Vec<u64> = (0..total).step_by(chunk as usize).collect();
    let best = starts
        .par_iter()
        .map(|&lo| inf_scan_range(a, &free, lo, (lo + chunk).min(total)))
        .reduce(
            || SignBest::SENTINEL,
            |p, q| {
                if p.val != q.val {
                    if p.val > q.val {
                        p
                    } else {
                        q
                    }
                } else if subset_key(p.xmask as u128, e) <= subset_key(q.xmask as u128, e) {
                    p
                } else {
                    q
                }
            },
        );

    let mut x = vec![1i8; n];
    for (b, &row) in free.iter().enumerate() {
        if best.xmask >> b & 1 == 1 {
            x[row] = -1;
        }
    }
    // Fresh pass: t = A^T x, y = sign(t), value = sum |t_j|.
    let mut t = vec![0.0f64; n];
    for i in 0..n {
        let xi = x[i] as f64;
        for (j, &v) in a.row(i).iter().enumerate() {
            t[j] += xi * v;
        }
    }
    let y: Vec<i8> = t.iter().map(|&v| if v < 0.0 { -1 } else { 1 }).collect();
    let mut w = SignWitness { x, y, value: 0.0 };
    w.value = w.evaluate(a);
    Ok((w.value, w))
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn cheap_spectral_upper(a: &Matrix) -> f64 {
    a.frobenius().min((a.max_abs_row_sum() * a.max_abs_col_sum()).sqrt())
}

pub fn operator_norm(a: &Matrix) -> Result<f64, NonConvergence> {
    operator_norm_with(a, 1e-10, 10_000)
}

/// Largest singular value by power iteration on A^T A, started from the
/// normalized all-ones vector (re-seeded once with an index ramp if the
/// iteration hits an exact null vector). Stops when successive estimates agree
/// to `tol` relatively. The returned value is ||A v|| for the final unit
/// iterate v, hence a lower bound on the true norm.
pub fn operator_norm_with(a: &Matrix, tol: f64, max_iter: usize) -> Result<f64, NonConvergence> {
    let n = a.n();
    if a.abs_sum() == 0.0 {
        return Ok(0.0);
    }
    let uniform = 1.0 / (n as f64).sqrt();
    let mut v = vec![uniform; n];
    let mut reseeded = false;
    let mut prev = f64::INFINITY;
    let mut est = 0.0;
    for it in 0..max_iter {
        let w = a.matvec(&v);
        est = norm2(&w);
        let z = a.tr_matvec(&w);
        let zn = norm2(&z);
        if zn == 0.0 {
            if !reseeded {
                // ones lies in the null space; restart from an index ramp
                reseeded = true;
                let ramp: Vec<f64> = (1..=n).map(|i| i as f64).collect();
                let rn = norm2(&ramp);
                v = ramp.into_iter().map(|x| x / rn).collect();
                prev = f64::INFINITY;
                continue;
            }
            return Err(NonConvergence {
                lower: est,
                upper: cheap_spectral_upper(a),
                iterations: it + 1,
            });
        }
        for (vi, zi) in v.iter_mut().zip(&z) {
            *vi = zi / zn;
        }
        if (est - prev).abs() <= tol * est.max(f64::MIN_POSITIVE) {
            return Ok(est);
        }
        prev = est;
    }
    Err(NonConvergence { lower: est, upper: cheap_spectral_upper(a), iterations: max_iter })
}

/// Cut-norm bracket. Within the cap the bracket collapses to the exact value.
/// One row past the cap the (∞,1) enumeration is still affordable (it spends
/// half the steps) and sandwiches the cut norm into [v/4, v]/n^2; beyond that
/// the lower end comes from the relaxation heuristic and the upper end from
/// the cheaper of the spectral and L1 bounds.
pub fn cut_norm_bracket(a: &Matrix, cap: usize, cfg: &RelaxationConfig) -> NormBracket {
    let n = a.n();
    let nn = (n * n) as f64;
    if let Ok((v, w)) = cut_norm_exact_capped(a, cap) {
        return NormBracket {
            lower: v,
            upper: v,
            lower_witness: Some(w),
            method: UpperMethod::EnumerationExact,
        };
    }

    let state = approx::relax_inf_one(a, cfg);
    let (sign_val, sign_w) = approx::round_to_signs(a, &state, cfg);
    let (heur, heur_witness) = approx::cut_candidates_from_sign(a, &sign_w);
    let mut lower = heur.max(sign_val / (4.0 * nn));
    let mut upper = f64::INFINITY;
    let mut method = UpperMethod::L1Bound;

    if let Ok((inf_exact, _)) = inf_one_norm_exact_capped(a, cap) {
        lower = lower.max(inf_exact / (4.0 * nn));
        upper = inf_exact / nn;
        method = UpperMethod::BracketFromInfOne;
    }
    let spectral = match operator_norm(a) {
        Ok(v) => v,
        Err(e) => e.upper,
    } / n as f64;
    if spectral < upper {
        upper = spectral;
        method = UpperMethod::SpectralBound;
    }
    let l1 = a.abs_sum() / nn;
    if l1 < upper {
        upper = l1;
        method = UpperMethod::L1Bound;
    }
    NormBracket { lower, upper, lower_witness: Some(heur_witness), method }
}
