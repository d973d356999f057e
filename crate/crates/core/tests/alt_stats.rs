mod common;

use proptest::prelude::*;
use skellam_lab::altskellam::{
    alt_array_sample, alt_increment_cf, alt_lattice_pmf, alt_moments, alt_pgf, alt_sample, twoparam_skellam_pmf,
    AltSpec, KroneckerRule,
};
use skellam_lab::gmsp::{gmsp_lattice_pmf, JumpSpec};
use skellam_lab::mpp::{mpp_sample_grid, RateVector, TimePoint};
use skellam_lab::stats::{chi2_gof, tv_distance, MIN_EXPECTED};
use skellam_lab::{Complex64, LatticePmf};

const LEVEL: f64 = 1e-3;

fn spec3() -> AltSpec {
    AltSpec::new([(1.0, 1.0), (-1.0, 0.6), (2.0, 0.3)]).unwrap()
}

#[test]
fn constant_times_match_one_axis_gmsp_law() {
    let spec = spec3();
    let t = spec.constant_times(1.5).unwrap();
    let s = alt_sample(&spec, &t, 100_000, 31).unwrap();
    let g = JumpSpec::new(spec.iter().map(|(j, r)| (j.0, RateVector::new(vec![r]).unwrap()))).unwrap();
    let pmf = gmsp_lattice_pmf(&g, &TimePoint::new(vec![1.5]).unwrap()).unwrap();
    let rep = chi2_gof(&s.values, &pmf, MIN_EXPECTED, LEVEL).unwrap();
    assert!(rep.passed(), "{rep:?}");
}

#[test]
fn plus_minus_one_is_two_parameter_skellam() {
    let spec = AltSpec::new([(1.0, 1.5), (-1.0, 0.8)]).unwrap();
    let t = spec.times([(1.0, 2.0), (-1.0, 0.5)]).unwrap();
    let s = alt_sample(&spec, &t, 100_000, 32).unwrap();
    let pmf = LatticePmf::tabulate(-40, 40, |n| Ok(common::skellam_convolution(n, 3.0, 0.4))).unwrap();
    let rep = chi2_gof(&s.values, &pmf, MIN_EXPECTED, LEVEL).unwrap();
    assert!(rep.passed(), "{rep:?}");
    for n in -20..=20 {
        let p = twoparam_skellam_pmf(n, 1.5, 0.8, 2.0, 0.5).unwrap();
        assert!((p - common::skellam_convolution(n, 3.0, 0.4)).abs() < 1e-10);
    }
}

#[test]
fn increment_cf_examples() {
    let spec = AltSpec::new([(1.0, 1.0), (-1.0, 1.0)]).unwrap();
    let s = spec.times([(1.0, 0.5), (-1.0, 1.0)]).unwrap();
    let t = spec.times([(1.0, 1.5), (-1.0, 2.0)]).unwrap();
    for z in [0.0, 0.3, 1.0, 2.5] {
        let got = alt_increment_cf(&spec, &s, &t, z).unwrap();
        let want = (2.0 * (z.cos() - 1.0)).exp();
        assert!((got - Complex64::new(want, 0.0)).norm() < 1e-15, "z={z}");
    }
    assert!((alt_increment_cf(&spec, &t, &t, 1.3).unwrap() - 1.0).norm() < 1e-15);
    assert!(alt_increment_cf(&spec, &t, &s, 1.0).is_err());
}

#[test]
fn moments_examples() {
    let spec = AltSpec::new([(1.0, 2.0), (-1.0, 1.0)]).unwrap();
    let s = spec.times([(1.0, 1.0), (-1.0, 3.0)]).unwrap();
    let t = spec.times([(1.0, 2.0), (-1.0, 1.0)]).unwrap();
    let m = alt_moments(&spec, &s, &t).unwrap();
    assert_eq!(m.mean, 4.0 - 1.0);
    assert_eq!(m.variance, 4.0 + 1.0);
    assert_eq!(m.covariance, 2.0 + 1.0);
}

#[test]
fn disjoint_increments_are_uncorrelated() {
    // One-parameter Poisson paths per jump, combined into the alternate process.
    let spec = spec3();
    let axis = vec![vec![0.0, 1.0, 2.5]];
    let n = 50_000u64;
    let mut a = Vec::new();
    let mut b = Vec::new();
    for seed in 0..n {
        let (mut x, mut y) = (0.0, 0.0);
        for (k, (j, r)) in spec.iter().enumerate() {
            let g = mpp_sample_grid(&RateVector::new(vec![r]).unwrap(), &axis, seed * 8 + k as u64).unwrap();
            x += j.0 * g.get(&[1]);
            y += j.0 * (g.get(&[2]) - g.get(&[1]));
        }
        a.push(x);
        b.push(y);
    }
    let rho = common::correlation(&a, &b);
    assert!(rho.abs() < 4.0 / (n as f64).sqrt(), "rho = {rho}");
}

#[test]
fn kronecker_array_approaches_the_limit() {
    let spec = AltSpec::new([(1.0, 1.0), (-1.0, 0.6)]).unwrap();
    let t = spec.times([(1.0, 1.5), (-1.0, 1.0)]).unwrap();
    let limit = alt_lattice_pmf(&spec, &t).unwrap();
    let tv: Vec<f64> = [10.0, 1000.0]
        .iter()
        .map(|&scale| {
            let rule = KroneckerRule::new(spec.clone(), scale).unwrap();
            let s = alt_array_sample(scale, &rule, &spec.jumps(), &t, 1_000_000, 33).unwrap();
            tv_distance(&s.values, &limit).unwrap()
        })
        .collect();
    // two scales far enough apart that the gap clears the sampling floor of TV
    assert!(tv[0] > tv[1], "{tv:?}");
    assert!(tv[1] < 0.02, "{tv:?}");
}

#[test]
fn single_target_array_is_poisson_binomial() {
    let spec = AltSpec::new([(1.0, 3.0)]).unwrap();
    let t = spec.constant_times(1.0).unwrap();
    let rule = KroneckerRule::new(spec.clone(), 10.0).unwrap();
    let s = alt_array_sample(10.0, &rule, &spec.jumps(), &t, 100_000, 34).unwrap();
    let oracle = common::poisson_binomial(&[0.3; 10]);
    let rep = chi2_gof(&s.values, &oracle, MIN_EXPECTED, LEVEL).unwrap();
    assert!(rep.passed(), "{rep:?}");
}

#[test]
fn zero_scale_array_gives_zeros() {
    let spec = spec3();
    let rule = KroneckerRule::new(spec.clone(), 10.0).unwrap();
    let t = spec.constant_times(1.0).unwrap();
    let s = alt_array_sample(0.0, &rule, &spec.jumps(), &t, 20, 1).unwrap();
    assert!(s.values.iter().all(|&v| v == 0.0));
    assert!(KroneckerRule::new(spec, 1.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn increment_cf_is_ratio_of_pgfs(
        s1 in 0.0f64..2.0, s2 in 0.0f64..2.0, s3 in 0.0f64..2.0,
        d1 in 0.0f64..2.0, d2 in 0.0f64..2.0, d3 in 0.0f64..2.0,
        z in -4.0f64..4.0,
    ) {
        let spec = spec3();
        let s = spec.times([(1.0, s1), (-1.0, s2), (2.0, s3)]).unwrap();
        let t = spec.times([(1.0, s1 + d1), (-1.0, s2 + d2), (2.0, s3 + d3)]).unwrap();
        let u = Complex64::new(0.0, z).exp();
        let ratio = alt_pgf(&spec, &t, u).unwrap() / alt_pgf(&spec, &s, u).unwrap();
        let inc = alt_increment_cf(&spec, &s, &t, z).unwrap();
        prop_assert!((ratio - inc).norm() < 1e-12);
    }
}
