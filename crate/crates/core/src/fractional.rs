//! Stable and inverse-stable subordinators and the fractional two-parameter
//! Skellam process `N_1(L_1^α(t_1)) - N_2(L_2^β(t_2))`.

use std::f64::consts::PI;

use rand::Rng;
use serde_json::json;

use crate::data::{LatticePmf, SampleBatch};
use crate::error::{Error, Result};
use crate::rng::{self, tags, StreamRng};
use crate::special_fn::{frac_poisson_mixture, frac_poisson_pmf, ln_gamma, wright_psi23, SeriesControl, WrightParam};

/// Stability index in `(0, 1]`; `1` is the identity time change.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct StableIndex(f64);

impl StableIndex {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::param(format!("stable index must lie in (0, 1], got {alpha}")));
        }
        Ok(Self(alpha))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_degenerate(self) -> bool {
        self.0 == 1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FracSkellamSpec {
    pub lambda1: f64,
    pub lambda2: f64,
    pub alpha: StableIndex,
    pub beta: StableIndex,
}

impl FracSkellamSpec {
    pub fn new(lambda1: f64, lambda2: f64, alpha: f64, beta: f64) -> Result<Self> {
        for l in [lambda1, lambda2] {
            if !(l > 0.0) || !l.is_finite() {
                return Err(Error::param(format!("rates must be positive, got {l}")));
            }
        }
        Ok(Self {
            lambda1,
            lambda2,
            alpha: StableIndex::new(alpha)?,
            beta: StableIndex::new(beta)?,
        })
    }

    fn to_json(self) -> serde_json::Value {
        json!({
            "lambda1": self.lambda1,
            "lambda2": self.lambda2,
            "alpha": self.alpha.0,
            "beta": self.beta.0,
        })
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::param(format!("time must be finite and nonnegative, got {t}")));
    }
    Ok(())
}

fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

/// One draw of `D^α(1)` with `E e^{-uD} = e^{-u^α}` (Kanter's representation):
/// `D = (A(U)/E)^{(1-α)/α}` with `U ~ Uniform(0, π)`, `E ~ Exp(1)` and
/// `A(u) = sin(αu)^{α/(1-α)} sin((1-α)u) / sin(u)^{1/(1-α)}`.
pub fn positive_stable<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    debug_assert!(alpha > 0.0 && alpha < 1.0);
    let u = PI * open_unit(rng);
    let e = -open_unit(rng).ln();
    let ln_a = alpha / (1.0 - alpha) * (alpha * u).sin().ln() + ((1.0 - alpha) * u).sin().ln()
        - (u.sin()).ln() / (1.0 - alpha);
    ((1.0 - alpha) / alpha * (ln_a - e.ln())).exp()
}

/// One draw of `L^α(t) = (t / D^α(1))^α`.
pub fn inverse_stable<R: Rng + ?Sized>(alpha: StableIndex, t: f64, rng: &mut R) -> f64 {
    if alpha.is_degenerate() || t == 0.0 {
        return t;
    }
    (t / positive_stable(alpha.0, rng)).powf(alpha.0)
}

/// Draws of the stable subordinator `D^α(t) = t^{1/α} D^α(1)`.
pub fn stable_subordinator_sample(alpha: StableIndex, t: f64, n_draws: usize, seed: u64) -> Result<SampleBatch> {
    check_time(t)?;
    let params = json!({"alpha": alpha.0, "t": t});
    if alpha.is_degenerate() || t == 0.0 {
        return Ok(SampleBatch::new("stable", params, seed, vec![t; n_draws]));
    }
    let scale = t.powf(1.0 / alpha.0);
    let values = rng::draw_batch(n_draws, seed, tags::STABLE, |rng| scale * positive_stable(alpha.0, rng));
    Ok(SampleBatch::new("stable", params, seed, values))
}

/// Draws of the inverse stable subordinator at a fixed time.
pub fn inv_stable_marginal_sample(alpha: StableIndex, t: f64, n_draws: usize, seed: u64) -> Result<SampleBatch> {
    check_time(t)?;
    let values = rng::draw_batch(n_draws, seed, tags::INV_STABLE, |rng| inverse_stable(alpha, t, rng));
    Ok(SampleBatch::new(
        "inv-stable",
        json!({"alpha": alpha.0, "t": t}),
        seed,
        values,
    ))
}

fn fractional_poisson_draw(lambda: f64, alpha: StableIndex, t: f64, rng: &mut StreamRng) -> f64 {
    let clock = inverse_stable(alpha, t, rng);
    rng::poisson(rng, lambda * clock) as f64
}

/// Draws of `N_1(L_1^α(t1)) - N_2(L_2^β(t2))`, all four components independent.
pub fn frac_skellam_sample(spec: &FracSkellamSpec, t1: f64, t2: f64, n_draws: usize, seed: u64) -> Result<SampleBatch> {
    check_time(t1)?;
    check_time(t2)?;
    let s = *spec;
    let values = rng::draw_batch(n_draws, seed, tags::FRAC_SKELLAM, |rng| {
        let a = fractional_poisson_draw(s.lambda1, s.alpha, t1, rng);
        let b = fractional_poisson_draw(s.lambda2, s.beta, t2, rng);
        a - b
    });
    let mut params = spec.to_json();
    params["t1"] = json!(t1);
    params["t2"] = json!(t2);
    Ok(SampleBatch::new("frac-skellam", params, seed, values))
}

/// Probability table `P{N(L^α(t)) = n}` for `n = 0, 1, ...`, extended in
/// chunks until the remaining mass and the last entry are both below
/// `max(1e3 * ctl.abs_tol, 1e-12)`.
pub fn frac_poisson_table(lambda: f64, alpha: StableIndex, t: f64, ctl: SeriesControl) -> Result<Vec<f64>> {
    const CHUNK: u64 = 32;
    let tail = (ctl.abs_tol * 1e3).max(1e-12);
    let mut table: Vec<f64> = Vec::new();
    let mut cum = 0.0;
    while table.len() < ctl.max_terms {
        let start = table.len() as u64;
        for p in frac_poisson_mixture(start..start + CHUNK, lambda, t, alpha.0, ctl)? {
            table.push(p);
            cum += p;
            if 1.0 - cum <= tail && p <= tail {
                return Ok(table);
            }
        }
    }
    Err(Error::Truncation {
        partial: cum,
        terms: ctl.max_terms,
    })
}

/// `P{S^{α,β}(t1, t2) = n}` through the convolution
/// `Σ_l P{N_1(L_1) = n + l} P{N_2(L_2) = l}` (mirrored for `n < 0`).
pub fn frac_skellam_pmf(spec: &FracSkellamSpec, t1: f64, t2: f64, n: i64, ctl: SeriesControl) -> Result<f64> {
    check_time(t1)?;
    check_time(t2)?;
    let shift = n.unsigned_abs();
    let (up, down) = if n >= 0 { (shift, 0) } else { (0, shift) };
    let mut acc = 0.0;
    let mut run = 0;
    for l in 0..ctl.max_terms as u64 {
        let a = frac_poisson_pmf(l + up, spec.lambda1, t1, spec.alpha.0, ctl)?;
        let b = frac_poisson_pmf(l + down, spec.lambda2, t2, spec.beta.0, ctl)?;
        let term = a * b;
        acc += term;
        // Terms are nonnegative; stop once three in a row are negligible
        // past the bulk of both laws.
        if term < ctl.abs_tol * (1.0 + acc) && (a < ctl.abs_tol || b < ctl.abs_tol) {
            run += 1;
            if run >= 3 {
                return Ok(acc);
            }
        } else {
            run = 0;
        }
    }
    Err(Error::Truncation {
        partial: acc,
        terms: ctl.max_terms,
    })
}

/// Whole lattice law of the fractional Skellam variable, from two
/// fractional Poisson tables.
pub fn frac_skellam_lattice_pmf(spec: &FracSkellamSpec, t1: f64, t2: f64, ctl: SeriesControl) -> Result<LatticePmf> {
    check_time(t1)?;
    check_time(t2)?;
    let p1 = frac_poisson_table(spec.lambda1, spec.alpha, t1, ctl)?;
    let p2 = frac_poisson_table(spec.lambda2, spec.beta, t2, ctl)?;
    let plus = LatticePmf {
        offset: 0,
        probs: p1,
        truncation_mass: 0.0,
    };
    let minus = LatticePmf {
        offset: 0,
        probs: p2,
        truncation_mass: 0.0,
    }
    .scaled(-1);
    let mut pmf = plus.convolve(&minus);
    pmf.truncation_mass = (1.0 - pmf.total_mass()).max(0.0);
    Ok(pmf)
}

/// The same probability through the double series of generalized Wright
/// functions. For `n >= 0`, with `x1 = λ1 t1^α`, `x2 = λ2 t2^β`:
///
/// `x1^n Σ_{r1,r2} (-x1)^{r1} (-x2)^{r2} / (r1! r2!) ·
///  2Psi3[(n+r1+1,1), (r2+1,1); (α(n+r1)+1,α), (βr2+1,β), (n+1,1) | x1 x2]`.
///
/// For `n < 0` the roles of the two components are exchanged.
pub fn frac_skellam_pmf_wright(spec: &FracSkellamSpec, t1: f64, t2: f64, n: i64, ctl: SeriesControl) -> Result<f64> {
    check_time(t1)?;
    check_time(t2)?;
    let x1 = spec.lambda1 * t1.powf(spec.alpha.0);
    let x2 = spec.lambda2 * t2.powf(spec.beta.0);
    // (lead, index) shifted by |n|; (other, index) unshifted
    let (xl, al, xo, ao) = if n >= 0 {
        (x1, spec.alpha.0, x2, spec.beta.0)
    } else {
        (x2, spec.beta.0, x1, spec.alpha.0)
    };
    let m = n.unsigned_abs() as f64;
    if xl == 0.0 {
        return Ok(if n == 0 && xo == 0.0 {
            1.0
        } else if n == 0 {
            frac_zero(xo, ao, ctl)?
        } else {
            0.0
        });
    }
    let z = xl * xo;
    let mut outer = 0.0;
    let mut outer_run = 0;
    for r1 in 0..ctl.max_terms {
        let mut inner = 0.0;
        let mut inner_run = 0;
        let mut inner_done = false;
        for r2 in 0..ctl.max_terms {
            let psi = wright_psi23(
                [
                    WrightParam::new(m + r1 as f64 + 1.0, 1.0),
                    WrightParam::new(r2 as f64 + 1.0, 1.0),
                ],
                [
                    WrightParam::new(al * (m + r1 as f64) + 1.0, al),
                    WrightParam::new(ao * r2 as f64 + 1.0, ao),
                    WrightParam::new(m + 1.0, 1.0),
                ],
                z,
                ctl,
            )?;
            let log = r1 as f64 * xl.ln() - ln_gamma(r1 as f64 + 1.0)
                + if xo > 0.0 {
                    r2 as f64 * xo.ln()
                } else if r2 == 0 {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
                - ln_gamma(r2 as f64 + 1.0);
            let sign = if (r1 + r2) % 2 == 0 { 1.0 } else { -1.0 };
            let term = sign * log.exp() * psi;
            inner += term;
            if term.abs() < ctl.abs_tol * (1.0 + inner.abs()) {
                inner_run += 1;
                if inner_run >= 3 {
                    inner_done = true;
                    break;
                }
            } else {
                inner_run = 0;
            }
        }
        if !inner_done {
            return Err(Error::Truncation {
                partial: outer,
                terms: ctl.max_terms,
            });
        }
        outer += inner;
        if inner.abs() < ctl.abs_tol * (1.0 + outer.abs()) {
            outer_run += 1;
            if outer_run >= 3 {
                return Ok(xl.powf(m) * outer);
            }
        } else {
            outer_run = 0;
        }
    }
    Err(Error::Truncation {
        partial: xl.powf(m) * outer,
        terms: ctl.max_terms,
    })
}

fn frac_zero(x: f64, alpha: f64, ctl: SeriesControl) -> Result<f64> {
    // P{N(L(t)) = 0} with λ t^α = x, i.e. the Mittag-Leffler value E_α(-x).
    frac_poisson_pmf(0, x, 1.0, alpha, ctl)
}

/// Which second-order variance term to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarianceForm {
    /// `(λ t^α / α)(1/Γ(2α) - 1/(α Γ²(α)))`, linear in `t^α`.
    Printed,
    /// `((λ t^α)² / α)(1/Γ(2α) - 1/(α Γ²(α)))`, the fractional Poisson variance.
    Squared,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FracMoments {
    pub mean: f64,
    pub variance: f64,
}

fn frac_poisson_moments(lambda: f64, alpha: f64, t: f64, form: VarianceForm) -> (f64, f64) {
    let x = lambda * t.powf(alpha);
    let first = x / ln_gamma(alpha + 1.0).exp();
    let bracket = 1.0 / ln_gamma(2.0 * alpha).exp() - 1.0 / (alpha * ln_gamma(alpha).exp().powi(2));
    let scale = match form {
        VarianceForm::Printed => x,
        VarianceForm::Squared => x * x,
    };
    (first, first + scale / alpha * bracket)
}

pub fn frac_skellam_moments(spec: &FracSkellamSpec, t1: f64, t2: f64, form: VarianceForm) -> Result<FracMoments> {
    check_time(t1)?;
    check_time(t2)?;
    let (m1, v1) = frac_poisson_moments(spec.lambda1, spec.alpha.0, t1, form);
    let (m2, v2) = frac_poisson_moments(spec.lambda2, spec.beta.0, t2, form);
    Ok(FracMoments {
        mean: m1 - m2,
        variance: v1 + v2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::altskellam::twoparam_skellam_pmf;

    fn spec(l1: f64, l2: f64, a: f64, b: f64) -> FracSkellamSpec {
        FracSkellamSpec::new(l1, l2, a, b).unwrap()
    }

    #[test]
    fn index_validation() {
        assert!(StableIndex::new(0.0).is_err());
        assert!(StableIndex::new(1.2).is_err());
        assert!(StableIndex::new(1.0).unwrap().is_degenerate());
        assert!(FracSkellamSpec::new(0.0, 1.0, 0.5, 0.5).is_err());
    }

    #[test]
    fn degenerate_and_zero_time_samplers() {
        let a = StableIndex::new(0.6).unwrap();
        assert!(stable_subordinator_sample(a, 0.0, 10, 1)
            .unwrap()
            .values
            .iter()
            .all(|&v| v == 0.0));
        assert!(inv_stable_marginal_sample(a, 0.0, 10, 1)
            .unwrap()
            .values
            .iter()
            .all(|&v| v == 0.0));
        let one = StableIndex::new(1.0).unwrap();
        assert!(stable_subordinator_sample(one, 2.5, 10, 1)
            .unwrap()
            .values
            .iter()
            .all(|&v| v == 2.5));
        assert!(inv_stable_marginal_sample(one, 2.5, 10, 1)
            .unwrap()
            .values
            .iter()
            .all(|&v| v == 2.5));
        let s = spec(1.0, 1.0, 0.5, 0.5);
        assert!(frac_skellam_sample(&s, 0.0, 0.0, 10, 1)
            .unwrap()
            .values
            .iter()
            .all(|&v| v == 0.0));
    }

    #[test]
    fn stable_draws_are_positive_and_finite() {
        let mut r = rng::stream(3, 0, 0);
        for &a in &[0.1, 0.3, 0.5, 0.9, 0.99] {
            for _ in 0..2000 {
                let d = positive_stable(a, &mut r);
                assert!(d > 0.0 && d.is_finite(), "alpha={a} draw={d}");
            }
        }
    }

    #[test]
    fn classical_branch_matches_skellam() {
        let ctl = SeriesControl::default();
        let s = spec(1.5, 2.0, 1.0, 1.0);
        for n in -10..=10 {
            let a = frac_skellam_pmf(&s, 2.0, 1.0, n, ctl).unwrap();
            let b = twoparam_skellam_pmf(n, 1.5, 2.0, 2.0, 1.0).unwrap();
            assert!((a - b).abs() < 1e-9, "n={n}: {a} vs {b}");
        }
    }

    #[test]
    fn pmf_normalises() {
        let ctl = SeriesControl::default();
        let s = spec(1.0, 1.0, 0.6, 0.6);
        let total: f64 = (-40..=40)
            .map(|n| frac_skellam_pmf(&s, 1.0, 1.0, n, ctl).unwrap())
            .sum();
        assert!((total - 1.0).abs() < 1e-6, "{total}");
        let lattice = frac_skellam_lattice_pmf(&s, 1.0, 1.0, ctl).unwrap();
        assert!((lattice.total_mass() - 1.0).abs() < 1e-6);
        for n in -5..=5 {
            let direct = frac_skellam_pmf(&s, 1.0, 1.0, n, ctl).unwrap();
            assert!((lattice.prob(n) - direct).abs() < 1e-10);
        }
    }

    #[test]
    fn wright_form_matches_convolution_symmetric() {
        let ctl = SeriesControl::default();
        let s = spec(1.0, 1.0, 0.5, 0.5);
        for n in -2..=2 {
            let a = frac_skellam_pmf(&s, 1.0, 1.0, n, ctl).unwrap();
            let b = frac_skellam_pmf_wright(&s, 1.0, 1.0, n, ctl).unwrap();
            assert!((a - b).abs() < 1e-6, "n={n}: {a} vs {b}");
        }
    }

    #[test]
    fn wright_form_matches_convolution_asymmetric() {
        let ctl = SeriesControl::default();
        let s = spec(1.3, 0.6, 0.4, 0.8);
        for n in -3..=3 {
            let a = frac_skellam_pmf(&s, 0.7, 1.6, n, ctl).unwrap();
            let b = frac_skellam_pmf_wright(&s, 0.7, 1.6, n, ctl).unwrap();
            assert!((a - b).abs() < 1e-8, "n={n}: {a} vs {b}");
        }
    }

    #[test]
    fn moment_formulas() {
        let s = spec(1.3, 1.3, 0.4, 0.4);
        let m = frac_skellam_moments(&s, 2.0, 2.0, VarianceForm::Printed).unwrap();
        assert_eq!(m.mean, 0.0);
        let c = spec(1.5, 0.5, 1.0, 1.0);
        for form in [VarianceForm::Printed, VarianceForm::Squared] {
            let m = frac_skellam_moments(&c, 2.0, 3.0, form).unwrap();
            assert!((m.mean - 1.5).abs() < 1e-12);
            assert!((m.variance - 4.5).abs() < 1e-12);
        }
    }

    #[test]
    fn squared_variance_matches_pmf_variance() {
        let ctl = SeriesControl::default();
        let s = spec(2.0, 0.7, 0.6, 0.8);
        let (t1, t2) = (1.5, 0.8);
        let pmf = frac_skellam_lattice_pmf(&s, t1, t2, ctl).unwrap();
        let mean = pmf.mean();
        let var: f64 = pmf.iter().map(|(n, p)| (n as f64 - mean).powi(2) * p).sum();
        let m = frac_skellam_moments(&s, t1, t2, VarianceForm::Squared).unwrap();
        assert!((mean - m.mean).abs() < 1e-6);
        assert!((var - m.variance).abs() < 1e-5, "{var} vs {}", m.variance);
    }
}
