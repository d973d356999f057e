mod common;

use skellam_lab::gmsp::JumpSpec;
use skellam_lab::integrals::{
    coarsen, integral_cf_compound, integral_cf_gmsp, integral_cf_levy, integral_cf_mpp, integral_sample,
    peraxis_integral_sample, riemann_sum_grid, sample_lattice_path, uniform_compound_sample, IntegrandProcess, JumpLaw,
    PerAxisForm, RectDomain, UniformCompound,
};
use skellam_lab::mpp::{RateVector, TimePoint};
use skellam_lab::stats::{cf_gap_report, empirical_cf, ks_two_sample};
use skellam_lab::Complex64;

const LEVEL: f64 = 1e-3;

fn rates(r: &[f64]) -> RateVector {
    RateVector::new(r.to_vec()).unwrap()
}

fn tp(t: &[f64]) -> TimePoint {
    TimePoint::new(t.to_vec()).unwrap()
}

fn spec() -> JumpSpec {
    JumpSpec::new([
        (1.0, rates(&[1.0, 0.5])),
        (-1.0, rates(&[0.5, 1.0])),
        (2.0, rates(&[0.3, 0.2])),
    ])
    .unwrap()
}

fn sup_gap(values: &[f64], u: &[f64], exact: impl Fn(f64) -> Complex64) -> f64 {
    let table = empirical_cf(values, u).unwrap();
    (0..table.len())
        .map(|i| (table.value(i) - exact(u[i])).norm())
        .fold(0.0, f64::max)
}

#[test]
fn one_axis_integral_has_mean_lambda_t_squared_over_two() {
    let dom = RectDomain::uniform(tp(&[2.0]), 512).unwrap();
    let s = integral_sample(&IntegrandProcess::Mpp(rates(&[1.0])), &dom, 20_000, 21).unwrap();
    assert!(common::mean_within(&s.values, 2.0, 5.0));
}

#[test]
fn zero_volume_gives_zero() {
    let dom = RectDomain::uniform(tp(&[1.0, 0.0]), 16).unwrap();
    let s = integral_sample(&IntegrandProcess::Gmsp(spec()), &dom, 50, 1).unwrap();
    assert!(s.values.iter().all(|&v| v == 0.0));
}

#[test]
fn lattice_path_sum_matches_batch_draw() {
    let dom = RectDomain::new(tp(&[1.0, 1.5]), vec![8, 12]).unwrap();
    let process = IntegrandProcess::Gmsp(spec());
    let path = sample_lattice_path(&process, &dom, 5).unwrap();
    assert_eq!(path.shape(), vec![9, 13]);
    let direct = riemann_sum_grid(&path);
    let batch = integral_sample(&process, &dom, 1, 5).unwrap().values[0];
    assert!(
        (direct - batch).abs() <= 1e-12 * direct.abs().max(1.0),
        "{direct} vs {batch}"
    );
    let coarse = coarsen(&path, 4);
    assert_eq!(coarse.shape(), vec![3, 4]);
    assert_eq!(coarse.get(&[2, 3]), path.get(&[8, 12]));
}

#[test]
fn peraxis_exact_integral_matches_lattice_integral() {
    let t = tp(&[1.0, 1.5]);
    let a = peraxis_integral_sample(&spec(), &t, 20_000, 22).unwrap();
    let dom = RectDomain::uniform(t, 512).unwrap();
    let b = integral_sample(&IntegrandProcess::Gmsp(spec()), &dom, 20_000, 23).unwrap();
    let rep = ks_two_sample(&a.values, &b.values, LEVEL).unwrap();
    assert!(rep.passed(), "{rep:?}");
}

#[test]
fn uniform_compound_cf_is_close() {
    let n = 20_000;
    let r = rates(&[1.0, 0.5]);
    let t = tp(&[1.0, 1.5]);
    let law = JumpLaw::new(vec![(1.0, 0.5), (-2.0, 0.3), (0.5, 0.2)]).unwrap();
    let s = uniform_compound_sample(
        &UniformCompound::CompoundMpp {
            rates: r.clone(),
            law: law.clone(),
            t: t.clone(),
        },
        n,
        24,
    )
    .unwrap();
    let u = [0.25, 0.5, 1.0];
    let gap = sup_gap(&s.values, &u, |u| integral_cf_compound(&r, &law, &t, u).unwrap());
    assert!(gap <= 4.0 / (n as f64).sqrt(), "gap {gap}");

    for form in [PerAxisForm::Printed, PerAxisForm::PerAxis] {
        let s = uniform_compound_sample(
            &UniformCompound::PerAxisGmsp {
                spec: spec(),
                t: t.clone(),
                form,
            },
            n,
            25,
        )
        .unwrap();
        let gap = sup_gap(&s.values, &u, |u| integral_cf_gmsp(&spec(), &t, u).unwrap());
        assert!(gap <= 4.0 / (n as f64).sqrt(), "{form:?} gap {gap}");
    }
}

#[test]
fn refinement_shrinks_the_cf_gap() {
    let n = 100_000;
    let r = rates(&[1.0]);
    let t = tp(&[2.0]);
    let u = [0.25, 0.5, 1.0];
    let gaps: Vec<f64> = [1, 4, 64]
        .iter()
        .map(|&res| {
            let dom = RectDomain::uniform(t.clone(), res).unwrap();
            let s = integral_sample(&IntegrandProcess::Mpp(r.clone()), &dom, n, 26).unwrap();
            sup_gap(&s.values, &u, |u| integral_cf_mpp(&r, &t, u).unwrap())
        })
        .collect();
    assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "{gaps:?}");
}

#[test]
fn levy_quadrature_matches_closed_forms() {
    let r = rates(&[1.0, 0.5]);
    let t = tp(&[1.0, 1.5]);
    let psi0 = |v: f64| 1.0 * (Complex64::new(0.0, v).exp() - 1.0);
    let psi1 = |v: f64| 0.5 * (Complex64::new(0.0, v).exp() - 1.0);
    for u in [-1.0, 0.25, 0.5, 2.0] {
        let a = integral_cf_levy(&[&psi0, &psi1], &t, u).unwrap();
        let b = integral_cf_mpp(&r, &t, u).unwrap();
        assert!((a - b).norm() < 1e-9, "u={u}: {a} vs {b}");
    }
}

#[test]
fn integral_cf_report_passes() {
    let n = 20_000;
    let r = rates(&[0.8]);
    let t = tp(&[1.5]);
    let dom = RectDomain::uniform(t.clone(), 512).unwrap();
    let s = integral_sample(&IntegrandProcess::Mpp(r.clone()), &dom, n, 27).unwrap();
    let table = empirical_cf(&s.values, &[0.25, 0.5, 1.0]).unwrap();
    let rep = cf_gap_report("integral-mpp", &table, |u| integral_cf_mpp(&r, &t, u).unwrap(), 27, n);
    assert!(rep.passed(), "{rep:?}");
}
