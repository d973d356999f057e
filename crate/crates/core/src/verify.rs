//! Named statistical identity checks. Each compares two independent routes
//! to the same law at a fixed seed and returns a [`TestReport`].

use crate::altskellam::{alt_sample, twoparam_skellam_pmf, AltSpec};
use crate::data::LatticePmf;
use crate::error::{Error, Result};
use crate::fractional::{
    frac_skellam_lattice_pmf, frac_skellam_sample, inv_stable_marginal_sample, stable_subordinator_sample,
    FracSkellamSpec, StableIndex,
};
use crate::gmsp::{
    gmsp_cf, gmsp_compound_equalrate_sample, gmsp_compound_peraxis_sample, gmsp_lattice_pmf, gmsp_sample, msp_pmf,
    JumpSpec,
};
use crate::integrals::{
    integral_cf_mpp, integral_sample, uniform_compound_sample, IntegrandProcess, JumpLaw, PerAxisForm, RectDomain,
    UniformCompound,
};
use crate::mpp::{RateVector, TimePoint};
use crate::special_fn::{ln_gamma, SeriesControl};
use crate::stats::{self, TestReport, MIN_EXPECTED};

/// Significance level shared by every p-value identity.
pub const LEVEL: f64 = 1e-3;

/// Lattice resolution per axis for integral identities.
pub const INTEGRAL_RESOLUTION: usize = 512;

pub struct Identity {
    pub name: &'static str,
    pub default_n: usize,
    run: fn(u64, usize) -> Result<TestReport>,
}

impl Identity {
    pub fn run(&self, seed: u64, n: usize) -> Result<TestReport> {
        if n == 0 {
            return Err(Error::param("draw count must be at least 1"));
        }
        Ok((self.run)(seed, n)?.named(self.name).with_seed(seed))
    }
}

pub const IDENTITIES: &[Identity] = &[
    Identity {
        name: "compound-peraxis",
        default_n: 100_000,
        run: compound_peraxis,
    },
    Identity {
        name: "compound-equalrate",
        default_n: 100_000,
        run: compound_equalrate,
    },
    Identity {
        name: "gmsp-dp",
        default_n: 100_000,
        run: gmsp_dp,
    },
    Identity {
        name: "gmsp-cf",
        default_n: 20_000,
        run: gmsp_cf_check,
    },
    Identity {
        name: "msp-bessel",
        default_n: 100_000,
        run: msp_bessel,
    },
    Identity {
        name: "alt-twoparam",
        default_n: 100_000,
        run: alt_twoparam,
    },
    Identity {
        name: "integral-cf",
        default_n: 20_000,
        run: integral_cf_check,
    },
    Identity {
        name: "integral-compound-mpp",
        default_n: 20_000,
        run: integral_compound_mpp,
    },
    Identity {
        name: "integral-peraxis",
        default_n: 20_000,
        run: integral_peraxis,
    },
    Identity {
        name: "integral-equalrate",
        default_n: 20_000,
        run: integral_equalrate,
    },
    Identity {
        name: "frac-skellam-pmf",
        default_n: 100_000,
        run: frac_skellam_pmf_check,
    },
    Identity {
        name: "inv-stable-mean",
        default_n: 100_000,
        run: inv_stable_mean,
    },
    Identity {
        name: "stable-laplace",
        default_n: 100_000,
        run: stable_laplace,
    },
];

pub fn find(name: &str) -> Result<&'static Identity> {
    IDENTITIES.iter().find(|i| i.name == name).ok_or_else(|| {
        let known: Vec<_> = IDENTITIES.iter().map(|i| i.name).collect();
        Error::param(format!("unknown identity {name:?}; known: {}", known.join(", ")))
    })
}

/// Runs `name` at its default draw count unless `n` is given.
pub fn run_identity(name: &str, seed: u64, n: Option<usize>) -> Result<TestReport> {
    let id = find(name)?;
    id.run(seed, n.unwrap_or(id.default_n))
}

fn rates(r: &[f64]) -> RateVector {
    RateVector::new(r.to_vec()).expect("fixed rates are valid")
}

fn time(t: &[f64]) -> TimePoint {
    TimePoint::new(t.to_vec()).expect("fixed times are valid")
}

/// `J = {1, -1, 2}` on two axes with distinct per-axis rates.
pub fn reference_spec() -> JumpSpec {
    JumpSpec::new([
        (1.0, rates(&[1.0, 0.5])),
        (-1.0, rates(&[0.5, 1.0])),
        (2.0, rates(&[0.3, 0.2])),
    ])
    .expect("fixed spec is valid")
}

pub const REFERENCE_EQUAL_RATES: &[(f64, f64)] = &[(1.0, 0.8), (-1.0, 0.6), (2.0, 0.3)];

pub fn reference_time() -> TimePoint {
    time(&[1.0, 1.5])
}

fn compound_peraxis(seed: u64, n: usize) -> Result<TestReport> {
    let (spec, t) = (reference_spec(), reference_time());
    let a = gmsp_sample(&spec, &t, n, seed)?;
    let b = gmsp_compound_peraxis_sample(&spec, &t, n, seed)?;
    stats::chi2_two_sample(&a.values, &b.values, MIN_EXPECTED, LEVEL)
}

fn compound_equalrate(seed: u64, n: usize) -> Result<TestReport> {
    let t = reference_time();
    let spec = JumpSpec::equal_rates(REFERENCE_EQUAL_RATES, t.dim())?;
    let a = gmsp_sample(&spec, &t, n, seed)?;
    let b = gmsp_compound_equalrate_sample(REFERENCE_EQUAL_RATES, t.dim(), &t, n, seed)?;
    stats::chi2_two_sample(&a.values, &b.values, MIN_EXPECTED, LEVEL)
}

fn gmsp_dp(seed: u64, n: usize) -> Result<TestReport> {
    let (spec, t) = (reference_spec(), reference_time());
    let a = gmsp_sample(&spec, &t, n, seed)?;
    stats::chi2_gof(&a.values, &gmsp_lattice_pmf(&spec, &t)?, MIN_EXPECTED, LEVEL)
}

const CF_GRID: [f64; 4] = [0.25, 0.5, 1.0, 2.0];

fn gmsp_cf_check(seed: u64, n: usize) -> Result<TestReport> {
    let spec = JumpSpec::new([(0.5, rates(&[1.0, 0.4])), (-1.5, rates(&[0.3, 0.6]))])?;
    let t = reference_time();
    let a = gmsp_sample(&spec, &t, n, seed)?;
    let table = stats::empirical_cf(&a.values, &CF_GRID)?;
    Ok(stats::cf_gap_report(
        "",
        &table,
        |u| gmsp_cf(&spec, &t, u).expect("dims match"),
        seed,
        n,
    ))
}

fn msp_bessel(seed: u64, n: usize) -> Result<TestReport> {
    let (r1, r2, t) = (rates(&[1.0, 0.5]), rates(&[0.7, 1.2]), reference_time());
    let spec = JumpSpec::new([(1.0, r1.clone()), (-1.0, r2.clone())])?;
    let a = gmsp_sample(&spec, &t, n, seed)?;
    let pmf = LatticePmf::tabulate(-40, 40, |k| msp_pmf(k, &r1, &r2, &t))?;
    stats::chi2_gof(&a.values, &pmf, MIN_EXPECTED, LEVEL)
}

fn alt_twoparam(seed: u64, n: usize) -> Result<TestReport> {
    let (l1, l2, t1, t2) = (1.5, 0.8, 2.0, 0.5);
    let spec = AltSpec::new([(1.0, l1), (-1.0, l2)])?;
    let t = spec.times([(1.0, t1), (-1.0, t2)])?;
    let a = alt_sample(&spec, &t, n, seed)?;
    let pmf = LatticePmf::tabulate(-40, 40, |k| twoparam_skellam_pmf(k, l1, l2, t1, t2))?;
    stats::chi2_gof(&a.values, &pmf, MIN_EXPECTED, LEVEL)
}

fn integral_cf_check(seed: u64, n: usize) -> Result<TestReport> {
    let r = rates(&[1.0, 0.5]);
    let t = time(&[1.0, 1.5]);
    let dom = RectDomain::uniform(t.clone(), INTEGRAL_RESOLUTION)?;
    let a = integral_sample(&IntegrandProcess::Mpp(r.clone()), &dom, n, seed)?;
    let table = stats::empirical_cf(&a.values, &[0.25, 0.5, 1.0])?;
    Ok(stats::cf_gap_report(
        "",
        &table,
        |u| integral_cf_mpp(&r, &t, u).expect("dims match"),
        seed,
        n,
    ))
}

fn ks_against_integral(
    process: IntegrandProcess,
    t: &TimePoint,
    other: &[f64],
    seed: u64,
    n: usize,
) -> Result<TestReport> {
    let dom = RectDomain::uniform(t.clone(), INTEGRAL_RESOLUTION)?;
    let a = integral_sample(&process, &dom, n, seed)?;
    stats::ks_two_sample(&a.values, other, LEVEL)
}

fn integral_compound_mpp(seed: u64, n: usize) -> Result<TestReport> {
    let r = rates(&[1.0, 0.5]);
    let t = reference_time();
    let law = JumpLaw::new(vec![(1.0, 0.5), (-2.0, 0.3), (0.5, 0.2)])?;
    let b = uniform_compound_sample(
        &UniformCompound::CompoundMpp {
            rates: r.clone(),
            law: law.clone(),
            t: t.clone(),
        },
        n,
        seed,
    )?;
    ks_against_integral(IntegrandProcess::Compound { rates: r, law }, &t, &b.values, seed, n)
}

fn integral_peraxis(seed: u64, n: usize) -> Result<TestReport> {
    let (spec, t) = (reference_spec(), reference_time());
    let b = uniform_compound_sample(
        &UniformCompound::PerAxisGmsp {
            spec: spec.clone(),
            t: t.clone(),
            form: PerAxisForm::Printed,
        },
        n,
        seed,
    )?;
    ks_against_integral(IntegrandProcess::Gmsp(spec), &t, &b.values, seed, n)
}

fn integral_equalrate(seed: u64, n: usize) -> Result<TestReport> {
    let t = reference_time();
    let spec = JumpSpec::equal_rates(REFERENCE_EQUAL_RATES, t.dim())?;
    let b = uniform_compound_sample(
        &UniformCompound::EqualRateGmsp {
            jump_rates: REFERENCE_EQUAL_RATES.to_vec(),
            t: t.clone(),
        },
        n,
        seed,
    )?;
    ks_against_integral(IntegrandProcess::Gmsp(spec), &t, &b.values, seed, n)
}

fn frac_skellam_pmf_check(seed: u64, n: usize) -> Result<TestReport> {
    let spec = FracSkellamSpec::new(1.0, 1.0, 0.5, 0.5)?;
    let a = frac_skellam_sample(&spec, 1.0, 1.0, n, seed)?;
    let pmf = frac_skellam_lattice_pmf(&spec, 1.0, 1.0, SeriesControl::default())?;
    stats::chi2_gof(&a.values, &pmf, MIN_EXPECTED, LEVEL)
}

fn inv_stable_mean(seed: u64, n: usize) -> Result<TestReport> {
    let alpha = 0.5;
    let a = inv_stable_marginal_sample(StableIndex::new(alpha)?, 1.0, n, seed)?;
    stats::mean_gap("", &a.values, 1.0 / ln_gamma(alpha + 1.0).exp(), 5.0, seed)
}

fn stable_laplace(seed: u64, n: usize) -> Result<TestReport> {
    let t = 1.5;
    let a = stable_subordinator_sample(StableIndex::new(0.6)?, t, n, seed)?;
    let e: Vec<f64> = a.values.iter().map(|d| (-d).exp()).collect();
    stats::mean_gap("", &e, (-t).exp(), 4.0, seed)
}
