mod common;

use common::*;
use gramcone::numlin::{null_space_basis, pinv, projector_rowspace, TolerancePolicy};
use gramcone::operator::{build_truncation, MatrixOperator, TruncationFamily, TruncationSpec};
use gramcone::Policy;
use proptest::prelude::*;
use rand::Rng;

fn policy() -> Policy {
    TolerancePolicy::default()
}

#[test]
fn identities_hold_for_500_random_matrices() {
    for seed in 0..500 {
        let mut r = rng(20_000 + seed);
        let (m, n, k) = random_shape(&mut r, 12);
        let op = MatrixOperator::new(conditioned(&mut r, m, n, k), policy()).unwrap();
        let rep = op.verify_identities().unwrap();
        assert!(rep.all_passed(), "seed {seed} ({m}x{n} rank {k}): {rep:?}");
    }
}

#[test]
fn identities_hold_for_truncations() {
    for family in [
        TruncationFamily::Example41,
        TruncationFamily::Example42,
        TruncationFamily::Example43,
    ] {
        for level in [2, 5, 17, 50] {
            let (op, _) = build_truncation(TruncationSpec::new(family, level).unwrap(), policy()).unwrap();
            let rep = op.verify_identities().unwrap();
            assert!(rep.all_passed(), "{family:?} N={level}: {rep:?}");
        }
    }
}

#[test]
fn spectral_pinv_matches_matrix_pinv() {
    let p = policy();
    for family in [
        TruncationFamily::Example41,
        TruncationFamily::Example42,
        TruncationFamily::Example43,
    ] {
        let (op, sys) = build_truncation(TruncationSpec::new(family, 12).unwrap(), p).unwrap();
        let dagger = pinv(&sys.assemble(), &p).unwrap();
        assert_eq!(sys.assemble(), op.matrix);
        let mut r = rng(3);
        for _ in 0..50 {
            let y: Vec<f64> = (0..op.shape().0).map(|_| r.gen_range(-1.0..1.0)).collect();
            let a = sys.spectral_pinv_apply(&y).unwrap();
            let b = dagger.matvec(&y);
            let diff = a.iter().zip(&b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
            assert!(diff <= p.identity_tol, "{family:?}: {diff:e}");
        }
    }
}

#[test]
fn example42_kernel_is_first_coordinate() {
    let p = policy();
    let n = 8;
    let (op, _) = build_truncation(TruncationSpec::new(TruncationFamily::Example42, n).unwrap(), p).unwrap();
    let k = null_space_basis(&op.matrix, &p).unwrap();
    assert_eq!(k.cols(), 1);
    assert!((k[(0, 0)].abs() - 1.0).abs() < 1e-15);
    let proj = projector_rowspace(&op.matrix, &p).unwrap();
    for i in 0..n {
        for j in 0..n {
            let want = if i == j && i > 0 { 1.0 } else { 0.0 };
            assert!((proj[(i, j)] - want).abs() < 1e-15);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn least_squares_solution_has_minimal_norm(seed in any::<u64>()) {
        let p = policy();
        let mut r = rng(seed);
        let m = r.gen_range(1..=6);
        let n = r.gen_range(2..=6);
        let k = r.gen_range(1..n.min(m) + 1).min(n - 1);
        let op = MatrixOperator::new(low_rank(&mut r, m, n, k), p).unwrap();
        let y: Vec<f64> = (0..m).map(|_| r.gen_range(-1.0..1.0)).collect();
        let x = op.least_squares_min_norm(&y).unwrap();
        let kernel = null_space_basis(&op.matrix, &p).unwrap();
        prop_assume!(kernel.cols() > 0);
        let tx = op.apply(&x);
        for _ in 0..100 {
            let mut z = x.clone();
            for b in kernel.columns() {
                let c: f64 = r.gen_range(-1.0..1.0);
                for (zi, bi) in z.iter_mut().zip(&b) {
                    *zi += c * bi;
                }
            }
            // Still a least-squares solution, never shorter.
            let tz = op.apply(&z);
            prop_assert!(tx.iter().zip(&tz).all(|(a, b)| (a - b).abs() < 1e-9));
            prop_assert!(norm(&x) <= norm(&z) + 1e-12);
        }
    }

    #[test]
    fn mp_inverse_accepts_random_matrices(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (m, n, k) = random_shape(&mut r, 8);
        let op = MatrixOperator::new(low_rank(&mut r, m, n, k), policy()).unwrap();
        let d = op.mp_inverse().unwrap();
        prop_assert_eq!(d.shape(), (n, m));
    }
}
