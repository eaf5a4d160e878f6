mod common;

use common::*;
use loglap::grid::*;
use loglap::Error;
use nalgebra::DVector;
use proptest::prelude::*;

#[test]
fn grid_examples() {
    let g = build_grid(Interval::new(-0.5, 0.5).unwrap(), 4).unwrap();
    assert_eq!(g.h, 0.25);
    assert_eq!(g.centers, vec![-0.375, -0.125, 0.125, 0.375]);
    let g = build_grid(Interval::new(0.0, 1.0).unwrap(), 2).unwrap();
    assert_eq!(g.centers, vec![0.25, 0.75]);
    let g = build_grid(Interval::new(-1.0, 1.0).unwrap(), 256).unwrap();
    assert_eq!(g.h, 1.0 / 128.0);
    assert!(((0..256).map(|_| g.h).sum::<f64>() - 2.0).abs() < 1e-14);
    assert!(matches!(Interval::new(1.0, 1.0), Err(Error::Config(_))));
    assert!(matches!(build_grid(Interval::new(0.0, 1.0).unwrap(), 1), Err(Error::Config(_))));
}

#[test]
fn boundary_distance_examples() {
    let g = grid(10);
    assert_eq!(boundary_distance(&g, 0.0).unwrap(), 0.5);
    assert!((boundary_distance(&g, 0.4).unwrap() - 0.1).abs() < 1e-15);
    let g01 = build_grid(Interval::new(0.0, 1.0).unwrap(), 4).unwrap();
    assert_eq!(boundary_distance(&g01, 0.25).unwrap(), 0.25);
    assert!(matches!(boundary_distance(&g, 0.7), Err(Error::Domain(_))));
    assert!(g.boundary_distances().iter().all(|d| *d > 0.0));
}

#[test]
fn ell_gauge_examples() {
    assert!((ell_gauge(0.1).unwrap() - 0.434_294_481_903_251_827_7).abs() < 1e-15);
    assert!((ell_gauge(0.05).unwrap() - 0.333_808_200_695_334_053_1).abs() < 1e-15);
    assert_eq!(ell_gauge(5.0).unwrap(), ell_gauge(0.1).unwrap());
    assert!(matches!(ell_gauge(0.0), Err(Error::Domain(_))));
}

#[test]
fn norms_and_csv_round_trip() {
    let g = grid(8);
    let u = GridFunction::from_fn(g.clone(), |x| x * 3.0 - 0.2);
    assert!((u.l2_norm_sq() - g.h * u.values.norm_squared()).abs() < 1e-15);
    assert!((u.lq_norm(2.0).unwrap() - u.l2_norm()).abs() < 1e-15);
    assert_eq!(u.lq_norm(f64::INFINITY).unwrap(), u.linf_norm());
    let mut buf = Vec::new();
    u.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert!(text.starts_with("x,value\n"));
    let back = GridFunction::read_csv(g.clone(), buf.as_slice()).unwrap();
    assert_eq!(back, u);
    assert!(matches!(GridFunction::new(g, DVector::zeros(3)), Err(Error::Dimension(_))));
}

#[test]
fn sign_normalization_makes_the_mean_nonnegative() {
    let g = grid(6);
    let u = GridFunction::from_fn(g, |x| -1.0 - x);
    assert!(u.sign_normalized().integral() > 0.0);
}

proptest! {
    #[test]
    fn ell_gauge_is_monotone(a in 1e-9f64..2.0, b in 1e-9f64..2.0) {
        let (r1, r2) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(ell_gauge(r1).unwrap() <= ell_gauge(r2).unwrap());
    }

    #[test]
    fn lq_norms_are_homogeneous(seed in 0u64..500, q in 1.0f64..6.0, c in -5.0f64..5.0) {
        let g = grid(16);
        let mut r = rng(seed);
        let u = random_field(&g, &mut r);
        let lhs = u.scale(c).lq_norm(q).unwrap();
        prop_assert!((lhs - c.abs() * u.lq_norm(q).unwrap()).abs() < 1e-13 * (1.0 + lhs));
    }
}
