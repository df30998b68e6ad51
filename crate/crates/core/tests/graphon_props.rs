//! Property checks for step graphons: the matrix reduction, corner-embedding
//! scaling, triangular-cut bounds, and refinement invariance.

use cutnorm_core::exact;
use cutnorm_core::graphon::{BandParams, StepGraphon};
use cutnorm_core::matrix::Matrix;
use proptest::prelude::*;

const TOL: f64 = 1e-9;
const CAP: usize = 25;

fn from_flat(m: usize, data: &[f64]) -> Matrix {
    Matrix::from_fn(m, |i, j| data[i * m + j])
}

fn graphon(m_max: usize) -> impl Strategy<Value = StepGraphon> {
    (2..=m_max).prop_flat_map(|m| {
        proptest::collection::vec(-1.0f64..=1.0, m * m)
            .prop_map(move |d| StepGraphon::from_matrix(&from_flat(m, &d), false))
    })
}

/// Symmetric, zero on the diagonal, values in [-hi, hi]: the class on which
/// the triangular cut of a step graphon stays a step graphon.
fn symmetric_graphon(m_max: usize, hi: f64) -> impl Strategy<Value = StepGraphon> {
    (2..=m_max).prop_flat_map(move |m| {
        proptest::collection::vec(-hi..=hi, m * m).prop_map(move |d| {
            let v = Matrix::from_fn(m, |i, j| {
                if i == j {
                    0.0
                } else if i > j {
                    d[i * m + j]
                } else {
                    d[j * m + i]
                }
            });
            StepGraphon::from_matrix(&v, false)
        })
    })
}

fn nonnegative_symmetric_graphon(m_max: usize) -> impl Strategy<Value = StepGraphon> {
    symmetric_graphon(m_max, 2.0).prop_map(|w| {
        let v = Matrix::from_fn(w.m(), |i, j| w.values().get(i, j).abs());
        StepGraphon::from_matrix(&v, false)
    })
}

fn cut(w: &StepGraphon) -> f64 {
    w.cut_norm(CAP).unwrap().0
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    // The step graphon's cut norm is the value matrix's cut norm, bit for bit.
    #[test]
    fn cut_norm_reduces_to_the_value_matrix(w in graphon(8)) {
        let (gv, gw) = w.cut_norm(CAP).unwrap();
        let (mv, mw) = exact::cut_norm_exact_capped(w.values(), CAP).unwrap();
        prop_assert_eq!(gv, mv);
        prop_assert_eq!(gw, mw);
    }

    // Embedding a copy plus its reflection into opposite lambda-corners scales
    // the cut norm by exactly 2 lambda^2.
    #[test]
    fn corner_embedding_scales_by_two_lambda_squared(w in graphon(6)) {
        for (num, den) in [(1u64, 2u64), (1, 4)] {
            let lambda = BandParams::new(num, den).unwrap();
            let both = w.corner_embed_sum(lambda).unwrap();
            let factor = 2.0 * lambda.value() * lambda.value();
            prop_assert!((cut(&both) - factor * cut(&w)).abs() <= TOL);
        }
    }

    // A single embedded corner scales by lambda^2.
    #[test]
    fn single_corner_scales_by_lambda_squared(w in graphon(6)) {
        let lambda = BandParams::new(1, 2).unwrap();
        let one = w.corner_embed(lambda).unwrap();
        let factor = lambda.value() * lambda.value();
        prop_assert!((cut(&one) - factor * cut(&w)).abs() <= TOL);
    }

    // ||w chi|| <= 2 sqrt(||w||) for symmetric zero-diagonal w valued in [-2, 2].
    #[test]
    fn triangular_cut_sqrt_bound(w in symmetric_graphon(8, 2.0)) {
        let cutted = w.triangular_cut().unwrap();
        prop_assert!(cut(&cutted) <= 2.0 * cut(&w).sqrt() + TOL);
    }

    // Nonnegative symmetric w: the triangle keeps at most half the mass.
    #[test]
    fn triangular_cut_halves_nonnegative_graphons(w in nonnegative_symmetric_graphon(6)) {
        let cutted = w.triangular_cut().unwrap();
        prop_assert!(cut(&cutted) <= 0.5 * cut(&w) + TOL);
    }

    // Subdividing every cell changes the representation, not the graphon.
    #[test]
    fn refinement_preserves_the_graphon(w in graphon(4), k in 2usize..=3) {
        let fine = w.refine(k);
        prop_assert_eq!(fine.m(), w.m() * k);
        prop_assert!((fine.l1_norm() - w.l1_norm()).abs() <= TOL);
        prop_assert!((cut(&fine) - cut(&w)).abs() <= TOL);
    }

    // On band-compatible instances (corner sums of zero-diagonal graphons)
    // the banded cut commutes with refinement, cell for cell.
    #[test]
    fn banded_cut_commutes_with_refinement(w in symmetric_graphon(3, 1.0), k in 2usize..=3) {
        let lambda = BandParams::new(1, 2).unwrap();
        let base = w.corner_embed_sum(lambda).unwrap();
        let a = base.refine(k).banded_cut(lambda).unwrap();
        let b = base.banded_cut(lambda).unwrap().refine(k);
        prop_assert_eq!(a, b);
    }

    // Misalignment is reported before any values are touched.
    #[test]
    fn misaligned_band_resolutions_error(w in graphon(4)) {
        prop_assume!(w.m() % 3 != 0);
        let lambda = BandParams::new(1, 3).unwrap();
        prop_assert!(w.banded_cut(lambda).is_err());
    }

    #[test]
    fn triangular_cut_requires_a_zero_diagonal(w in graphon(5), which in 0usize..5) {
        let m = w.m();
        let v = Matrix::from_fn(m, |i, j| {
            if i == j && i == which % m { 1.0 } else { w.values().get(i, j) }
        });
        let spiked = StepGraphon::from_matrix(&v, false);
        prop_assert!(spiked.triangular_cut().is_err());
    }

    #[test]
    fn reflection_is_an_involution_preserving_the_norm(w in graphon(6)) {
        prop_assert_eq!(w.reflect().reflect(), w.clone());
        prop_assert!((cut(&w.reflect()) - cut(&w)).abs() <= TOL);
    }
}

#[test]
fn edge_lists_become_symmetric_adjacency_graphons() {
    let w = StepGraphon::from_edge_list("1 2\n2 3\n# comment\n\n1 4\n").unwrap();
    assert_eq!(w.m(), 4);
    assert!(w.is_symmetric());
    assert!(w.values().is_zero_diagonal());
    for i in 0..4 {
        for j in 0..4 {
            let v = w.values().get(i, j);
            assert!(v == 0.0 || v == 1.0);
        }
    }
    assert_eq!(w.values().get(0, 1), 1.0);
    assert_eq!(w.values().get(1, 0), 1.0);
    assert_eq!(w.values().get(0, 2), 0.0);
}
