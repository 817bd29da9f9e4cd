mod common;

use common::{c, choi_by_definition, gauss_rank};
use margext::commands::span_dimension;
use margext::extremality::{block_gram, is_extremal_with};
use margext::families::{closed_form_choi_pt, closed_form_gram, paper_family, paper_family_unscaled, ShiftMatrix};
use margext::linalg::{hermitian_eigenvalues, min_eigenvalue, rank};
use margext::sampling::{random_family, random_low_rank_rational, random_unitary, seeded};
use margext::{
    diagonalize_marginals, is_extremal, parthasarathy_bound, ppt, restrict_to_support, separability_verdict,
    CKrausFamily, Complex64, Conclusion, KrausFamily, Matrix, RankMode, Rational, Subsystem,
};
use proptest::prelude::*;

fn family_strategy() -> impl Strategy<Value = CKrausFamily> {
    (any::<u64>(), 1usize..=4, 1usize..=4, 1usize..=5)
        .prop_map(|(seed, d1, d2, r)| random_family(&mut seeded(seed), d1, d2, r))
}

fn spectrum_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn numerical_rank_agrees_with_exact(seed in any::<u64>(), rows in 1usize..=12, cols in 1usize..=12, k in 0usize..=12) {
        let m = random_low_rank_rational(&mut seeded(seed), rows, cols, k.max(1));
        let exact = rank(&m, RankMode::Exact, None).unwrap();
        prop_assert_eq!(exact.rank, gauss_rank(&m));
        let numerical = rank(&m, RankMode::Numerical, None).unwrap();
        prop_assert_eq!(numerical.rank, exact.rank);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn choi_matches_definition_and_marginals(f in family_strategy()) {
        let choi = f.choi();
        prop_assert!(choi.max_abs_diff(&choi_by_definition(&f)) < 1e-12);
        let m = f.marginals();
        let (d1, d2) = (f.d_in(), f.d_out());
        prop_assert!(choi.partial_trace(d1, d2, Subsystem::Second).unwrap().max_abs_diff(&m.rho1) < 1e-12);
        prop_assert!(choi.partial_trace(d1, d2, Subsystem::First).unwrap().max_abs_diff(&m.rho2) < 1e-12);
        prop_assert!(min_eigenvalue(&choi).unwrap() > -1e-12);
        prop_assert!(f.choi_rank().rank <= f.len());
    }

    #[test]
    fn gram_is_hermitian_psd_and_respects_dimension_count(f in family_strategy()) {
        let g = block_gram(&f);
        prop_assert!(g.hermitian_deviation() < 1e-14);
        prop_assert!(min_eigenvalue(&g).unwrap() > -1e-10);
        let cert = is_extremal(&f, None);
        prop_assert!(cert.is_consistent());
        // blocks live in M_{d1} ⊕ M_{d2} with equal traces
        let (d1, d2) = (f.d_in(), f.d_out());
        if cert.extremal {
            prop_assert!(f.len() * f.len() < d1 * d1 + d2 * d2);
            prop_assert!(f.len() as u64 <= parthasarathy_bound(d1 as u64, d2 as u64));
        }
    }

    #[test]
    fn tensor_choi_is_permuted_kron(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let f = random_family(&mut rng, 2, 3, 2);
        let g = random_family(&mut rng, 2, 2, 2);
        let t = f.tensor(&g);
        // factor order of kron(C_f, C_g): (a1, b1, a2, b2) -> choi order (a1, a2, b1, b2)
        let want = f.choi().kron(&g.choi()).permute_subsystems(&[2, 3, 2, 2], &[0, 2, 1, 3]).unwrap();
        prop_assert!(t.choi().max_abs_diff(&want) < 1e-13);
        prop_assert!(t.marginals().max_deviation(&f.marginals().kron(&g.marginals())) < 1e-13);
    }

    #[test]
    fn canonicalization_preserves_invariants(f in family_strategy()) {
        let rec = diagonalize_marginals(&f).unwrap();
        let g = &rec.family;
        prop_assert!(rec.unitarity_defect() < 1e-12);
        prop_assert!(rec.diagonal_defect() < 1e-12);
        prop_assert!(rec.d1_diag.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(rec.d2_diag.windows(2).all(|w| w[0] <= w[1]));
        prop_assert_eq!(is_extremal(g, None).gram_rank.rank, is_extremal(&f, None).gram_rank.rank);
        prop_assert_eq!(g.choi_rank().rank, f.choi_rank().rank);
        let before = hermitian_eigenvalues(&f.choi()).unwrap();
        let after = hermitian_eigenvalues(&g.choi()).unwrap();
        prop_assert!(spectrum_distance(&before, &after) < 1e-10);
        let (vf, vg) = (separability_verdict(&f).unwrap(), separability_verdict(g).unwrap());
        prop_assert_eq!(vf.ppt, vg.ppt);
    }

    #[test]
    fn adjoint_swaps_canonical_marginals(f in family_strategy()) {
        let a = diagonalize_marginals(&f.adjoint()).unwrap();
        let b = diagonalize_marginals(&f).unwrap();
        prop_assert!(spectrum_distance(&a.d1_diag, &b.d2_diag) < 1e-10);
        prop_assert!(spectrum_distance(&a.d2_diag, &b.d1_diag) < 1e-10);
    }

    #[test]
    fn restriction_is_idempotent_and_keeps_gram_rank(f in family_strategy()) {
        let once = restrict_to_support(&f).unwrap();
        prop_assert_eq!(&restrict_to_support(&once).unwrap(), &once);
        prop_assert_eq!(is_extremal(&once, None).gram_rank.rank, is_extremal(&f, None).gram_rank.rank);
    }

    #[test]
    fn span_dimension_equals_gram_rank(seed in any::<u64>(), d1 in 1usize..=3, d2 in 1usize..=3, r in 1usize..=3) {
        let f = random_family(&mut seeded(seed), d1, d2, r);
        prop_assert_eq!(span_dimension(&f), is_extremal(&f, None).gram_rank.rank);
    }

    #[test]
    fn family_json_round_trip(f in family_strategy()) {
        let text = serde_json::to_string(&f).unwrap();
        let back: CKrausFamily = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, f);
    }
}

#[test]
fn ppt_is_invariant_under_local_unitaries() {
    let f = paper_family::<Complex64>(2, 2).unwrap();
    let choi = f.choi();
    let (base, _) = ppt(&choi, 2, 4).unwrap();
    assert!(base);
    let mut rng = seeded(11);
    for _ in 0..25 {
        let w = random_unitary(&mut rng, 2).kron(&random_unitary(&mut rng, 4));
        let rotated = w.matmul(&choi).matmul(&w.adjoint());
        let (ok, min) = ppt(&rotated, 2, 4).unwrap();
        assert_eq!(ok, base, "min PT eigenvalue {min:e}");
    }
    let entangled = KrausFamily::single(Matrix::<Complex64>::identity(2).scale(&c(0.5f64.sqrt()))).unwrap().choi();
    for _ in 0..25 {
        let w = random_unitary(&mut rng, 2).kron(&random_unitary(&mut rng, 2));
        let (ok, min) = ppt(&w.matmul(&entangled).matmul(&w.adjoint()), 2, 2).unwrap();
        assert!(!ok && (min + 0.5).abs() < 1e-10);
    }
}

#[test]
fn verdict_conclusions_are_exclusive() {
    let mut rng = seeded(5);
    for _ in 0..40 {
        let f = random_family(&mut rng, 2, 3, 2);
        let v = separability_verdict(&f).unwrap();
        assert!(v.is_consistent());
        assert!(!(v.conclusion == Conclusion::Separable && !v.ppt));
        assert!(!(v.conclusion == Conclusion::Entangled && v.ppt));
    }
}

#[test]
fn padded_paper_family_restricts_back() {
    let f = paper_family::<Complex64>(2, 1).unwrap();
    let ops = f
        .ops()
        .iter()
        .map(|k| {
            Matrix::from_fn(4, 3, |i, j| if i < 3 && j < 2 { k[(i, j)] } else { c(0.0) })
        })
        .collect();
    let padded = KrausFamily::new(3, 4, ops).unwrap();
    let back = restrict_to_support(&padded).unwrap();
    assert_eq!((back.d_in(), back.d_out()), (2, 3));
    assert_eq!(is_extremal(&back, None).gram_rank.rank, 9);
    assert_eq!(is_extremal(&padded, None).gram_rank.rank, 9);
}

#[test]
fn shift_family_gram_is_integer_with_full_exact_rank() {
    for d in 2..=4 {
        for m in 1..=3 {
            let f = paper_family_unscaled::<Rational>(d, m).unwrap();
            let g = block_gram(&f);
            assert!(g.entries().iter().all(Rational::is_integer));
            let n = d + m;
            assert_eq!(gauss_rank(&g), n * n, "d={d} m={m}");
        }
    }
}

#[test]
fn scalar_types_agree_on_paper_family() {
    let exact = is_extremal(&paper_family_unscaled::<Rational>(3, 1).unwrap(), None);
    let single = is_extremal(&paper_family::<f32>(3, 1).unwrap(), None);
    let double = is_extremal(&paper_family::<f64>(3, 1).unwrap(), None);
    let complex = is_extremal(&paper_family::<Complex64>(3, 1).unwrap(), None);
    assert_eq!(exact.mode, RankMode::Exact);
    for cert in [&single, &double, &complex] {
        assert_eq!(cert.gram_rank.rank, exact.gram_rank.rank);
        assert!(!cert.borderline());
    }
    assert!(single.gram_rank.threshold.unwrap() > double.gram_rank.threshold.unwrap());
}

#[test]
fn closed_forms_are_hermitian_and_psd() {
    for d in 2..=4 {
        for m in 1..=3 {
            assert_eq!(closed_form_gram::<Rational>(d, m).unwrap().hermitian_deviation(), 0.0);
            let pt = closed_form_choi_pt::<Rational>(d, m).unwrap();
            assert!(min_eigenvalue(&pt).unwrap() >= -1e-12);
            let s = ShiftMatrix::<Rational>::new(d, m).unwrap();
            let head: Vec<usize> = (0..=d).collect();
            let sum = (1..=d + 1).fold(Matrix::zeros(d + m, d + m), |acc, p| &acc + &s.matrix.pow(p as u32));
            assert_eq!(sum.select(&head, &head), Matrix::ones(d + 1));
        }
    }
    // (2,1): the padded term is empty and the rank is at most d+1
    let pt = closed_form_choi_pt::<Rational>(2, 1).unwrap();
    assert!(rank(&pt, RankMode::Exact, None).unwrap().rank <= 3);
}

#[test]
fn exact_mode_rejects_irrational_entries() {
    let f = paper_family::<f64>(2, 1).unwrap();
    assert!(is_extremal_with(&f, None, RankMode::Exact, None).is_err());
}

#[test]
fn explicit_tolerance_can_demote_rank() {
    let f = paper_family::<f64>(2, 1).unwrap();
    let loose = is_extremal_with(&f, None, RankMode::Numerical, Some(10.0)).unwrap();
    assert_eq!(loose.gram_rank.rank, 0);
    assert!(!loose.extremal);
}

#[test]
fn large_sparse_choi_spectrum_is_finite() {
    // implicit QR overflows on this matrix; the bisection fallback must cover it
    let f = margext::families::rank8k_6k::<f64>(4).unwrap();
    let ev = hermitian_eigenvalues(&f.choi()).unwrap();
    assert!(ev.iter().all(|x| x.is_finite()));
    assert_eq!(f.choi_rank().rank, 32);
    let sv = margext::linalg::singular_values(&f.choi()).unwrap();
    assert!((ev[ev.len() - 1] - sv[0]).abs() < 1e-12);
}
