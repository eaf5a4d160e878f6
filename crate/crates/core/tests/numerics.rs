use loglap::numerics::*;
use loglap::Error;
use proptest::prelude::*;

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

#[test]
fn gamma_matches_reference_values() {
    let cases = [
        (0.5, 1.772_453_850_905_516_027),
        (0.1, 9.513_507_698_668_731_836),
        (2.5, 1.329_340_388_179_137_020),
        (7.3, 1_271.423_633_663_909_273),
        (0.013, 76.358_567_751_324_645_43),
        (12.75, 255_371_835.699_211_100_5),
        (33.3, 7.487_577_596_522_706_608e35),
    ];
    for (x, want) in cases {
        let got = gamma(x).unwrap();
        assert!(rel(got, want) < 1e-13, "gamma({x}) = {got}, want {want}");
        assert!((ln_gamma(x).unwrap() - want.ln()).abs() < 1e-13 * (1.0 + want.ln().abs()));
    }
}

#[test]
fn digamma_matches_reference_values() {
    let cases = [
        (1.0, -0.577_215_664_901_532_860_6),
        (0.5, -1.963_510_026_021_423_479),
        (2.0, 0.422_784_335_098_467_139_4),
        (0.1, -10.423_754_940_411_076_80),
        (3.7, 1.167_153_539_361_511_386),
        (0.013, -77.479_109_244_104_684_67),
        (25.5, 3.218_942_472_883_919_767),
    ];
    for (x, want) in cases {
        let got = digamma(x).unwrap();
        assert!((got - want).abs() < 1e-12, "digamma({x}) = {got}, want {want}");
    }
}

#[test]
fn special_functions_reject_non_positive_arguments() {
    assert!(matches!(gamma(0.0), Err(Error::Domain(_))));
    assert!(matches!(gamma(-1.5), Err(Error::Domain(_))));
    assert!(matches!(digamma(-0.1), Err(Error::Domain(_))));
    assert!(matches!(ln_gamma(f64::NAN), Err(Error::Domain(_))));
}

#[test]
fn dimensional_constants_in_one_two_three_dimensions() {
    let c1 = dimensional_constants(1).unwrap();
    assert!((c1.c_n - 1.0).abs() < 1e-14);
    assert!((c1.rho_n + 2.0 * EULER_GAMMA).abs() < 1e-12);
    assert!((c1.rho_n + 1.154_431_329_803_065_721).abs() < 1e-12);
    assert!((c1.a_n - 0.251_265_919_224_155_991_8).abs() < 1e-12);
    assert!((c1.omega_n - 2.0).abs() < 1e-14);

    let c2 = dimensional_constants(2).unwrap();
    assert!((c2.c_n - 1.0 / std::f64::consts::PI).abs() < 1e-14);
    assert!((c2.rho_n - 0.231_863_031_316_824_897_6).abs() < 1e-12);
    assert!((c2.a_n + 1.376_592_917_166_225_072).abs() < 1e-12);
    assert!((c2.omega_n - std::f64::consts::PI).abs() < 1e-14);

    let c3 = dimensional_constants(3).unwrap();
    assert!((c3.c_n - 0.159_154_943_091_895_335_8).abs() < 1e-14);
    assert!((c3.rho_n - 0.845_568_670_196_934_278_8).abs() < 1e-12);
    assert!((c3.a_n + 2.061_384_582_796_316_813).abs() < 1e-12);
    assert!((c3.omega_n - 4.188_790_204_786_390_985).abs() < 1e-13);

    assert!(matches!(dimensional_constants(0), Err(Error::Domain(_))));
}

#[test]
fn sobolev_constant_reference_values() {
    let cases = [
        (1, 0.1, 1.031_349_920_264_492_109),
        (2, 0.25, 0.718_059_191_519_817_535_8),
        (1, 1e-4, 1.000_025_126_913_207_610),
        (1, 0.05, 1.013_356_960_463_832_345),
        (1, 0.2, 1.104_927_720_726_051_690),
    ];
    for (n, s, want) in cases {
        let got = kappa_frac_sobolev(n, s).unwrap();
        assert!(rel(got, want) < 1e-12, "kappa({n},{s}) = {got}");
    }
    assert!((kappa_frac_sobolev(1, 1e-4).unwrap() - 1.0).abs() <= 1e-3);
    assert!(matches!(kappa_frac_sobolev(1, 0.5), Err(Error::Domain(_))));
    assert!(matches!(kappa_frac_sobolev(1, 0.0), Err(Error::Domain(_))));
}

#[test]
fn fractional_normalization_reference_value() {
    let got = frac_normalization(1, 0.1).unwrap();
    assert!(rel(got, 0.090_313_982_871_455_613_45) < 1e-12);
    // c(1,s)/s → c_1 = 1
    let small = frac_normalization(1, 1e-6).unwrap() / 1e-6;
    assert!((small - 1.0).abs() < 1e-5);
    assert!(frac_normalization(1, 1.0).is_err());
}

#[test]
fn gauss_legendre_integrates_polynomials_exactly() {
    let (nodes, weights) = gauss_legendre_16();
    assert!((weights.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    assert!(nodes.iter().all(|x| x.abs() < 1.0));
    let got = integrate_gl16(0.0, 2.0, |x| x.powi(31) - 3.0 * x.powi(7));
    let want = 2f64.powi(32) / 32.0 - 3.0 * 2f64.powi(8) / 8.0;
    assert!(rel(got, want) < 1e-13);
}

#[test]
fn extrapolation_recovers_polynomials() {
    let xs = [0.02, 0.01, 0.005];
    let ys: Vec<f64> = xs.iter().map(|x| 3.0 - 2.0 * x + 7.0 * x * x).collect();
    assert!((extrapolate_to_zero(&xs, &ys).unwrap() - 3.0).abs() < 1e-12);
}

proptest! {
    #[test]
    fn gamma_recurrence(x in 0.05f64..40.0) {
        let lhs = gamma(x + 1.0).unwrap();
        let rhs = x * gamma(x).unwrap();
        prop_assert!(rel(lhs, rhs) < 1e-13);
    }

    #[test]
    fn digamma_recurrence(x in 0.01f64..50.0) {
        let lhs = digamma(x + 1.0).unwrap();
        let rhs = digamma(x).unwrap() + 1.0 / x;
        prop_assert!((lhs - rhs).abs() < 1e-12 * (1.0 + rhs.abs()));
    }

    #[test]
    fn ln_gamma_is_log_of_gamma(x in 0.01f64..150.0) {
        let g = gamma(x).unwrap();
        prop_assert!((ln_gamma(x).unwrap() - g.ln()).abs() < 1e-12 * (1.0 + g.ln().abs()));
    }
}

#[test]
fn rho_agrees_with_digamma_identity() {
    for n in 1..=10u32 {
        let c = dimensional_constants(n).unwrap();
        let want = 2.0 * std::f64::consts::LN_2 + digamma(n as f64 / 2.0).unwrap() + digamma(1.0).unwrap();
        assert!((c.rho_n - want).abs() < 1e-12);
        assert!(c.c_n > 0.0 && c.omega_n > 0.0);
        assert_eq!(c, dimensional_constants(n).unwrap());
    }
    let a1 = 2.0 * (EULER_GAMMA + std::f64::consts::LN_2 - std::f64::consts::PI.ln());
    assert!((dimensional_constants(1).unwrap().a_n - a1).abs() < 1e-12);
}

#[test]
fn small_gamma_values() {
    assert!((gamma(1.0).unwrap() - 1.0).abs() < 1e-15);
    assert!((gamma(4.0).unwrap() - 6.0).abs() < 1e-13);
    assert!((digamma(0.5).unwrap() + EULER_GAMMA + 2.0 * std::f64::consts::LN_2).abs() < 1e-12);
    assert!((kappa_frac_sobolev(1, 1e-6).unwrap() - 1.0).abs() < 1e-4);
}

proptest! {
    #[test]
    fn kappa_is_lipschitz_in_s(s in 0.01f64..0.3) {
        let a = kappa_frac_sobolev(1, s).unwrap();
        let b = kappa_frac_sobolev(1, s + 1e-6).unwrap();
        prop_assert!((a - b).abs() <= 10.0 * 1e-6);
    }
}
