mod common;

use common::*;
use loglap::spectral::*;
use loglap::Error;
use nalgebra::{DMatrix, DVector, SymmetricEigen};

fn dense_smallest(a: &DMatrix<f64>, h: f64) -> (f64, DVector<f64>) {
    let eig = SymmetricEigen::new(a / h);
    let (k, lambda) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, v)| if *v < acc.1 { (i, *v) } else { acc });
    (lambda, eig.eigenvectors.column(k).into_owned())
}

#[test]
fn inverse_iteration_matches_dense_eigensolver() {
    let ops = ops(96, &[0.01, 0.2]);
    let h = ops.h();
    for (name, a) in [("log", &ops.a_log), ("near", &ops.e_near), ("s=0.01", &ops.frac(0.01).unwrap().matrix), ("s=0.2", &ops.frac(0.2).unwrap().matrix)] {
        let pair = principal_eigenpair(&ops.grid, a, &ops.mass).unwrap();
        let (want, v) = dense_smallest(a, h);
        assert!((pair.lambda - want).abs() < 1e-11 * (1.0 + want.abs()), "{name}: {} vs {want}", pair.lambda);
        let norm = v.norm() * h.sqrt();
        let v = v / norm;
        let v = if v.sum() < 0.0 { -v } else { v };
        assert!((&pair.phi.values - v).amax() < 1e-7, "{name}");
        assert!((pair.phi.l2_norm() - 1.0).abs() < 1e-12);
        assert!(pair.phi.values.sum() > 0.0);
        assert!(pair.residual <= 1e-10 * (1.0 + pair.lambda.abs()));
    }
}

#[test]
fn principal_eigenfunctions_do_not_change_sign() {
    let ops = ops(128, &[0.05]);
    for pair in [ops.log_eigenpair().unwrap(), ops.frac_eigenpair(0.05).unwrap()] {
        assert!(pair.phi.values.iter().all(|v| *v > 0.0));
    }
}

#[test]
fn log_eigenvalue_is_below_log_of_fractional_eigenvalue() {
    let ops = ops(128, &[0.01, 0.05, 0.1, 0.2]);
    let lam = ops.log_eigenpair().unwrap().lambda;
    for s in ops.orders() {
        let ls = ops.frac_eigenpair(s).unwrap().lambda;
        assert!(lam <= ls.ln() / s + 1e-10, "s={s}: {lam} vs {}", ls.ln() / s);
    }
}

#[test]
fn eigen_derivative_tends_to_log_eigenvalue() {
    let schedule = [0.02, 0.01, 0.005];
    let ops = ops(128, &schedule);
    let d = eigen_derivative_at_zero(&ops, &schedule).unwrap();
    let lam = ops.log_eigenpair().unwrap().lambda;
    assert!((d.limit - lam).abs() < 1e-3 * (1.0 + lam.abs()), "{} vs {lam}", d.limit);
    assert!(!d.non_monotone);
    assert_eq!(d.rows.len(), 3);
}

#[test]
fn mass_in_place_of_fractional_operator_gives_zero_derivative() {
    let ops = ops(32, &[]);
    let mass = DMatrix::from_diagonal(&ops.mass);
    let lam = principal_eigenpair(&ops.grid, &mass, &ops.mass).unwrap().lambda;
    assert!((lam - 1.0).abs() < 1e-14);
    let d = eigen_derivative_from(&[0.02, 0.01, 0.005], &[lam; 3]).unwrap();
    assert!(d.limit.abs() < 1e-10);
    assert!(d.rows.iter().all(|r| r.quotient.abs() < 1e-10));
}

#[test]
fn eigen_derivative_preconditions_and_flags() {
    assert!(matches!(eigen_derivative_from(&[0.02, 0.01], &[1.0, 1.0]), Err(Error::Precondition(_))));
    assert!(matches!(eigen_derivative_from(&[0.01, 0.02, 0.005], &[1.0; 3]), Err(Error::Precondition(_))));
    let d = eigen_derivative_from(&[0.03, 0.02, 0.01], &[1.03, 1.01, 1.02]).unwrap();
    assert!(d.non_monotone);
    let ops = ops(16, &[0.02]);
    assert!(matches!(eigen_derivative_at_zero(&ops, &[0.02, 0.01, 0.005]), Err(Error::Config(_))));
}

#[test]
fn eigensolver_rejects_mismatched_sizes() {
    let ops = ops(16, &[]);
    let small = DMatrix::<f64>::identity(8, 8);
    assert!(matches!(principal_eigenpair(&ops.grid, &small, &ops.mass), Err(Error::Dimension(_))));
}

#[test]
fn fractional_eigenvalue_at_n512_matches_dense_oracle() {
    let ops = ops(512, &[0.1]);
    let pair = ops.frac_eigenpair(0.1).unwrap();
    let (want, _) = dense_smallest(&ops.frac(0.1).unwrap().matrix, ops.h());
    assert!((pair.lambda - want).abs() < 1e-9 * want);
}

#[test]
fn identity_form_has_constant_eigenfunction() {
    let ops = ops(20, &[]);
    let mass = DMatrix::from_diagonal(&ops.mass);
    let pair = principal_eigenpair(&ops.grid, &mass, &ops.mass).unwrap();
    assert!((pair.lambda - 1.0).abs() < 1e-14);
    assert!(pair.phi.values.iter().all(|v| (v - 1.0).abs() < 1e-12));
}

#[test]
fn rayleigh_quotients_dominate_the_principal_eigenvalue() {
    let ops = ops(64, &[0.05]);
    let lam = ops.log_eigenpair().unwrap().lambda;
    let lam_s = ops.frac_eigenpair(0.05).unwrap().lambda;
    let mut r = rng(5);
    for _ in 0..100 {
        let v = random_field(&ops.grid, &mut r);
        let m = v.l2_norm_sq();
        assert!(lam <= ops.log_form(&v, &v).unwrap() / m + 1e-12);
        assert!(lam_s <= ops.frac_form(0.05, &v, &v).unwrap() / m + 1e-12);
    }
    let phi = ops.log_eigenpair().unwrap().phi;
    assert!((ops.log_form(&phi, &phi).unwrap() - lam).abs() < 1e-10);
}

#[test]
fn fractional_eigenfunctions_approach_the_log_eigenfunction() {
    let schedule = [0.08, 0.04, 0.02, 0.01];
    let ops = ops(256, &schedule);
    let phi_l = ops.log_eigenpair().unwrap().phi;
    let mut last = f64::INFINITY;
    for s in schedule {
        let phi_s = ops.frac_eigenpair(s).unwrap().phi;
        let gap = phi_s.with_values(&phi_s.values - &phi_l.values).l2_norm();
        assert!(gap < last, "s={s}: {gap}");
        last = gap;
    }
}
