use proptest::prelude::*;

use sphwave::kernel::*;
use sphwave::special::{eval_kn, eval_kn_derivative};
use sphwave::zeros::{dirichlet_zeros, robin_zeros};
use sphwave::{Complex64, Error};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn partial_fractions(n: usize, r: f64, s: Complex64) -> Complex64 {
    let z = dirichlet_zeros(n).unwrap();
    let a = dirichlet_residues(n, r, &z).unwrap();
    a.values
        .iter()
        .zip(&z.zeros)
        .map(|(a, p)| a / (s - p))
        .sum()
}

#[test]
fn residues_agree_with_hankel_ratio_form() {
    for n in [5usize, 20, 40] {
        let r = 1.7;
        let z = dirichlet_zeros(n).unwrap();
        let res = dirichlet_residues(n, r, &z).unwrap();
        for (a, &alpha) in res.values.iter().zip(&z.zeros) {
            let want = r * (alpha * (r - 1.0)).exp() * eval_kn(n, alpha * r).unwrap()
                / eval_kn_derivative(n, alpha).unwrap();
            assert!(
                (a - want).norm() < 1e-9 * want.norm(),
                "n = {n}: {a} vs {want}"
            );
        }
    }
}

#[test]
fn residues_are_conjugate_closed() {
    let d = dirichlet_zeros(10).unwrap();
    let rb = robin_zeros(10).unwrap();
    for set in [
        dirichlet_residues(10, 2.0, &d).unwrap(),
        robin_residues(10, 2.0, &d, &rb).unwrap(),
    ] {
        for v in &set.values {
            let partner = set
                .values
                .iter()
                .map(|w| (w - v.conj()).norm())
                .fold(f64::INFINITY, f64::min);
            assert!(partner < 1e-12 * v.norm().max(1.0));
        }
    }
}

#[test]
fn robin_order_zero_kernel() {
    let d = dirichlet_zeros(0).unwrap();
    let rb = robin_zeros(0).unwrap();
    for r in [1.5, 3.0, 10.0] {
        let set = robin_residues(0, r, &d, &rb).unwrap();
        assert_eq!(set.len(), 1);
        assert!((set.values[0] - c(-1.0 / r, 0.0)).norm() < 1e-15);
    }
}

#[test]
fn mismatched_tables_are_rejected() {
    let d = dirichlet_zeros(4).unwrap();
    assert!(matches!(
        dirichlet_residues(5, 2.0, &d),
        Err(Error::Mismatch(_))
    ));
    assert!(matches!(
        dirichlet_residues(4, 1.0, &d),
        Err(Error::Domain(_))
    ));
}

#[test]
fn kernel_single_pole_trace() {
    let z = dirichlet_zeros(1).unwrap();
    let a = dirichlet_residues(1, 2.0, &z).unwrap();
    for t in [0.0, 0.3, 1.0, 4.0] {
        let k = kernel_time(&a, &z, t).unwrap();
        assert!((k + 0.5 * (-t).exp()).abs() < 1e-15);
    }
}

#[test]
fn kernel_at_zero_is_residue_sum() {
    for n in [10usize, 30, 80] {
        let z = dirichlet_zeros(n).unwrap();
        let a = dirichlet_residues(n, 2.0, &z).unwrap();
        let k0 = kernel_time(&a, &z, 0.0).unwrap();
        let sum = a.sum();
        assert_eq!(k0, sum.re);
        assert!(sum.im.abs() < 1e-6 * sum.re.abs());
        let want = dirichlet_kernel_at_zero(n, 2.0);
        assert!(
            (k0 - want).abs() < 1e-6 * want.abs(),
            "n = {n}: {k0} vs {want}"
        );
    }
    assert_eq!(dirichlet_kernel_at_zero(80, 2.0), -1620.0);
}

#[test]
fn order_eighty_trace_peaks_at_zero() {
    let z = dirichlet_zeros(80).unwrap();
    let a = dirichlet_residues(80, 2.0, &z).unwrap();
    let lost = digits_lost(&a);
    assert!(lost > 5.0 && lost < 9.0, "{lost}");
    let k0 = kernel_time(&a, &z, 0.0).unwrap().abs();
    for i in 1..=40 {
        let t = 0.005 * i as f64;
        assert!(kernel_time(&a, &z, t).unwrap().abs() <= k0);
    }
}

#[test]
fn guard_reports_precision_loss() {
    let z = dirichlet_zeros(250).unwrap();
    let a = dirichlet_residues(250, 2.0, &z).unwrap();
    match kernel_time(&a, &z, 0.0) {
        Err(Error::PrecisionLoss { digits_lost, .. }) => assert!(digits_lost > 13.0),
        other => panic!("expected a precision-loss error, got {other:?}"),
    }
}

#[test]
fn residues_overflow_per_entry() {
    let z = dirichlet_zeros(2500).unwrap();
    let a = dirichlet_residues(2500, 20.0, &z).unwrap();
    assert!(a.any_overflow());
    assert!(a.log10_max() > 308.0);
    assert!(a
        .values
        .iter()
        .zip(&a.overflowed)
        .all(|(v, &o)| o == v.re.is_nan()));
}

#[test]
fn laplace_initial_value_theorem() {
    for (n, r) in [(3usize, 2.0), (12, 1.5), (30, 4.0)] {
        let s = 1e7;
        let v = kernel_laplace(n, r, c(s, 0.0)).unwrap() * s;
        let want = dirichlet_kernel_at_zero(n, r);
        assert!(
            (v.re - want).abs() < 1e-4 * want.abs(),
            "n = {n}: {v} vs {want}"
        );
    }
}

#[test]
fn laplace_on_imaginary_axis() {
    for i in 0..200 {
        let w = -1000.0 + 10.0 * i as f64 + 0.37;
        let a = kernel_laplace(80, 2.0, c(0.0, w)).unwrap();
        let b = kernel_laplace(80, 2.0, c(0.0, -w)).unwrap();
        assert!(a.re.is_finite() && a.im.is_finite());
        assert!((a - b.conj()).norm() < 1e-10 * a.norm().max(1.0));
    }
}

#[test]
fn laplace_in_left_half_plane_matches_partial_fractions() {
    let s = c(-6.0, 9.5);
    let got = kernel_laplace(14, 2.5, s).unwrap();
    let want = partial_fractions(14, 2.5, s);
    assert!((got - want).norm() < 1e-8 * want.norm(), "{got} vs {want}");
}

#[test]
fn oracle_with_zero_data_is_zero() {
    let z = dirichlet_zeros(6).unwrap();
    let zero = c(0.0, 0.0);
    let v = ode_oracle_dirichlet(2.0, &z, |_| (zero, zero), 3.0).unwrap();
    assert_eq!(v, zero);
}

#[test]
fn eigenvector_conditioning_grows() {
    let small = eigenvector_condition(2.0, &dirichlet_zeros(10).unwrap());
    let large = eigenvector_condition(2.0, &dirichlet_zeros(30).unwrap());
    assert!(large.eigenvector_condition > 10.0 * small.eigenvector_condition);
    assert!(large.eigenvector_condition > 1e3 * large.matrix_condition);
}

#[test]
fn diagnostics_rows() {
    let rows = residue_diagnostics(&[10, 20], 2.0).unwrap();
    let names: Vec<&str> = rows.iter().map(|r| r.quantity.as_str()).collect();
    for q in [
        "log10_max_residue",
        "residue_sum_rel_error",
        "kernel_at_zero",
        "digits_lost",
        "predicted_slope",
    ] {
        assert!(names.contains(&q), "{q} missing");
    }
    let sum_err = rows
        .iter()
        .filter(|r| r.quantity == "residue_sum_rel_error")
        .map(|r| r.value);
    assert!(sum_err.fold(0.0, f64::max) < 1e-10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn residue_sum_identity(n in 1usize..=60, r in 1.05f64..30.0) {
        let z = dirichlet_zeros(n).unwrap();
        let sum = dirichlet_residues(n, r, &z).unwrap().sum();
        let want = dirichlet_kernel_at_zero(n, r);
        prop_assert!((sum - c(want, 0.0)).norm() <= 1e-8 * want.abs());
    }

    #[test]
    fn laplace_matches_partial_fractions(n in 1usize..=20, r in 1.1f64..10.0, re in 0.01f64..30.0, im in -30.0f64..30.0) {
        let s = c(re, im);
        let got = kernel_laplace(n, r, s).unwrap();
        let want = partial_fractions(n, r, s);
        prop_assert!((got - want).norm() <= 1e-9 * want.norm().max(1e-300), "{} vs {}", got, want);
    }

    #[test]
    fn robin_residues_are_finite(n in 0usize..=60, r in 1.05f64..20.0) {
        let d = dirichlet_zeros(n).unwrap();
        let rb = robin_zeros(n).unwrap();
        let set = robin_residues(n, r, &d, &rb).unwrap();
        prop_assert_eq!(set.len(), n + 1);
        prop_assert!(!set.any_overflow());
    }
}
