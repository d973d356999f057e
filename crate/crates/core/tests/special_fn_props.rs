mod common;

use proptest::prelude::*;
use skellam_lab::altskellam::twoparam_skellam_pmf;
use skellam_lab::fractional::{inv_stable_marginal_sample, StableIndex};
use skellam_lab::special_fn::{
    bessel_i, frac_poisson_pmf, frac_poisson_series, ln_gamma, ln_gamma_signed, wright_psi23, SeriesControl,
    WrightParam,
};

#[test]
fn bessel_parity_grid() {
    for n in 0..=5i64 {
        for k in -12..=12 {
            let x = k as f64 * 0.25;
            let (a, b) = (bessel_i(n, x).unwrap(), bessel_i(n, -x).unwrap());
            if n % 2 == 0 {
                assert_eq!(a, b, "n={n} x={x}");
            } else {
                assert_eq!(a, -b, "n={n} x={x}");
            }
        }
    }
}

#[test]
fn skellam_at_origin_matches_product_of_series() {
    let want = (-2.0f64).exp() * bessel_i(0, 2.0).unwrap();
    assert!((want - 0.308508).abs() < 1e-6);
    let got = twoparam_skellam_pmf(0, 1.0, 1.0, 1.0, 1.0).unwrap();
    assert!((got - common::skellam_convolution(0, 1.0, 1.0)).abs() < 1e-10);
}

#[test]
fn fractional_zero_probability_matches_monte_carlo() {
    // P{N(L(1)) = 0} = E e^{-λ L(1)} with λ = 1.
    let p0 = frac_poisson_pmf(0, 1.0, 1.0, 0.5, SeriesControl::default()).unwrap();
    let draws = inv_stable_marginal_sample(StableIndex::new(0.5).unwrap(), 1.0, 200_000, 11).unwrap();
    let e: Vec<f64> = draws.values.iter().map(|l| (-l).exp()).collect();
    assert!(common::mean_within(&e, p0, 3.0), "{} vs {p0}", common::mean(&e));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bessel_recurrence(n in 1i64..8, x in 0.05f64..12.0) {
        // I_{n-1}(x) - I_{n+1}(x) = (2n/x) I_n(x)
        let lhs = bessel_i(n - 1, x).unwrap() - bessel_i(n + 1, x).unwrap();
        let rhs = 2.0 * n as f64 / x * bessel_i(n, x).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-11 * rhs.abs().max(1.0));
    }

    #[test]
    fn reflection_formula(x in -6.0f64..-0.01) {
        prop_assume!((x - x.round()).abs() > 1e-3);
        // Γ(x)Γ(1-x) = π / sin(πx)
        let (l, s) = ln_gamma_signed(x).unwrap();
        let lhs = s * (l + ln_gamma(1.0 - x)).exp();
        let rhs = std::f64::consts::PI / (std::f64::consts::PI * x).sin();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * rhs.abs());
    }

    #[test]
    fn wright_at_zero_is_gamma_ratio(a in 0.2f64..4.0, b in 0.2f64..4.0, w in 0.1f64..1.0) {
        let got = wright_psi23(
            [WrightParam::new(a, 1.0), WrightParam::new(b, w)],
            [WrightParam::new(1.0, w), WrightParam::new(b, 1.0), WrightParam::new(a + 1.0, 1.0)],
            0.0,
            SeriesControl::default(),
        ).unwrap();
        // Γ(a)Γ(b) / (Γ(1)Γ(b)Γ(a+1)) = 1/a
        prop_assert!((got - 1.0 / a).abs() <= 1e-12 / a);
    }

    #[test]
    fn skellam_normalises(a in 0.1f64..10.0, b in 0.1f64..10.0) {
        let total: f64 = (-80..=80).map(|n| twoparam_skellam_pmf(n, a, b, 1.0, 1.0).unwrap()).sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn fractional_pmf_is_a_law(lambda in 0.2f64..3.0, t in 0.1f64..3.0, alpha in 0.2f64..1.0) {
        let ctl = SeriesControl::default();
        let mut total = 0.0;
        let mut mean = 0.0;
        for n in 0..400u64 {
            let p = frac_poisson_pmf(n, lambda, t, alpha, ctl).unwrap();
            total += p;
            mean += n as f64 * p;
            if 1.0 - total < 1e-10 && p < 1e-13 {
                break;
            }
        }
        prop_assert!((total - 1.0).abs() < 1e-6);
        let want = lambda * t.powf(alpha) / ln_gamma(alpha + 1.0).exp();
        prop_assert!((mean - want).abs() < 1e-6 * want.max(1.0));
    }

    #[test]
    fn series_agrees_with_default_path_for_small_n(n in 0u64..4, lambda in 0.2f64..1.5, alpha in 0.4f64..0.95) {
        let ctl = SeriesControl::default();
        let a = frac_poisson_pmf(n, lambda, 1.0, alpha, ctl).unwrap();
        let b = frac_poisson_series(n, lambda, 1.0, alpha, ctl).unwrap();
        prop_assert!((a - b).abs() < 1e-10);
    }
}
