//! Skellam process indexed by one time coordinate per jump:
//! `𝒮(t) = Σ_j j N_j(t_j)` with independent one-parameter Poisson `N_j`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde_json::json;

use crate::data::{Jump, LatticePmf, SampleBatch};
use crate::error::{Error, Result};
use crate::gmsp::{push_step, sample_runs, skellam_pmf, step_law, Moments, LATTICE_TAIL};
use crate::rng::{self, tags, PoissonSampler};

/// Times keyed by jump value.
pub type JumpTimes = BTreeMap<Jump, f64>;

/// Jump set with one Poisson rate per jump.
#[derive(Debug, Clone, PartialEq)]
pub struct AltSpec {
    rates: BTreeMap<Jump, f64>,
}

impl AltSpec {
    pub fn new(jumps: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let mut rates = BTreeMap::new();
        for (j, lambda) in jumps {
            if j == 0.0 || !j.is_finite() {
                return Err(Error::param(format!("jump sizes must be finite and nonzero, got {j}")));
            }
            if !(lambda > 0.0) || !lambda.is_finite() {
                return Err(Error::param(format!(
                    "rate for jump {j} must be positive, got {lambda}"
                )));
            }
            if rates.insert(Jump(j), lambda).is_some() {
                return Err(Error::param(format!("duplicate jump {j}")));
            }
        }
        if rates.is_empty() {
            return Err(Error::Empty("jump set"));
        }
        Ok(Self { rates })
    }

    /// Index dimension `#J`.
    pub fn dim(&self) -> usize {
        self.rates.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Jump, f64)> + '_ {
        self.rates.iter().map(|(j, r)| (*j, *r))
    }

    pub fn jumps(&self) -> Vec<Jump> {
        self.rates.keys().copied().collect()
    }

    pub fn rate(&self, j: Jump) -> Option<f64> {
        self.rates.get(&j).copied()
    }

    /// Builds a time map for this spec, checking keys and values.
    pub fn times(&self, pairs: impl IntoIterator<Item = (f64, f64)>) -> Result<JumpTimes> {
        let t: JumpTimes = pairs.into_iter().map(|(j, t)| (Jump(j), t)).collect();
        self.check_times(&t)?;
        Ok(t)
    }

    /// The same time `t` for every jump.
    pub fn constant_times(&self, t: f64) -> Result<JumpTimes> {
        self.times(self.rates.keys().map(|j| (j.0, t)))
    }

    fn check_times(&self, t: &JumpTimes) -> Result<()> {
        if t.len() != self.rates.len() || !self.rates.keys().all(|j| t.contains_key(j)) {
            let want: Vec<_> = self.rates.keys().map(|j| j.0).collect();
            let got: Vec<_> = t.keys().map(|j| j.0).collect();
            return Err(Error::KeyMismatch(format!("expected jumps {want:?}, got {got:?}")));
        }
        if let Some(bad) = t.values().find(|x| !(**x >= 0.0) || !x.is_finite()) {
            return Err(Error::param(format!("times must be finite and nonnegative, got {bad}")));
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!(self
            .iter()
            .map(|(j, r)| json!({"jump": j.0, "rate": r}))
            .collect::<Vec<_>>())
    }
}

fn times_json(t: &JumpTimes) -> serde_json::Value {
    json!(t.iter().map(|(j, t)| json!({"jump": j.0, "t": t})).collect::<Vec<_>>())
}

/// Draws of `𝒮(t)`.
pub fn alt_sample(spec: &AltSpec, t: &JumpTimes, n_draws: usize, seed: u64) -> Result<SampleBatch> {
    spec.check_times(t)?;
    let parts: Vec<(f64, PoissonSampler)> = spec
        .iter()
        .map(|(j, lambda)| (j.0, PoissonSampler::new(lambda * t[&j])))
        .collect();
    let values = rng::draw_batch(n_draws, seed, tags::ALT, |rng| {
        parts.iter().map(|(j, d)| j * d.sample(rng) as f64).sum()
    });
    Ok(SampleBatch::new(
        "alt",
        json!({"jumps": spec.to_json(), "t": times_json(t)}),
        seed,
        values,
    ))
}

/// Mean `Σ j λ_j t_j`, variance `Σ j² λ_j t_j` and covariance
/// `Σ j² λ_j min{s_j, t_j}`.
pub fn alt_moments(spec: &AltSpec, s: &JumpTimes, t: &JumpTimes) -> Result<Moments> {
    spec.check_times(s)?;
    spec.check_times(t)?;
    let mut m = Moments {
        mean: 0.0,
        variance: 0.0,
        covariance: 0.0,
    };
    for (j, lambda) in spec.iter() {
        let (sj, tj) = (s[&j], t[&j]);
        m.mean += j.0 * lambda * tj;
        m.variance += j.0 * j.0 * lambda * tj;
        m.covariance += j.0 * j.0 * lambda * sj.min(tj);
    }
    Ok(m)
}

/// `E u^{𝒮(t)} = exp(Σ_j λ_j t_j (u^j - 1))`, evaluated at complex `u`.
pub fn alt_pgf(spec: &AltSpec, t: &JumpTimes, u: Complex64) -> Result<Complex64> {
    spec.check_times(t)?;
    let exponent: Complex64 = spec
        .iter()
        .map(|(j, lambda)| lambda * t[&j] * (u.powf(j.0) - 1.0))
        .sum();
    Ok(exponent.exp())
}

/// CF of the increment `𝒮(t) - 𝒮(s)` for `s ⪯ t`:
/// `exp(Σ_j λ_j (t_j - s_j)(e^{izj} - 1))`.
pub fn alt_increment_cf(spec: &AltSpec, s: &JumpTimes, t: &JumpTimes, z: f64) -> Result<Complex64> {
    spec.check_times(s)?;
    spec.check_times(t)?;
    if spec.jumps().iter().any(|j| s[j] > t[j]) {
        return Err(Error::param("increment requires s ⪯ t"));
    }
    let exponent: Complex64 = spec
        .iter()
        .map(|(j, lambda)| lambda * (t[&j] - s[&j]) * (Complex64::new(0.0, z * j.0).exp() - 1.0))
        .sum();
    Ok(exponent.exp())
}

/// Exact lattice law of `𝒮(t)` for integer jumps.
pub fn alt_lattice_pmf(spec: &AltSpec, t: &JumpTimes) -> Result<LatticePmf> {
    spec.check_times(t)?;
    let mut pmf = LatticePmf::point(0);
    for (j, lambda) in spec.iter() {
        let ji = j
            .as_integer()
            .ok_or_else(|| Error::param(format!("lattice pmf needs integer jumps, got {j}")))?;
        pmf = pmf.convolve(&LatticePmf::poisson(lambda * t[&j], LATTICE_TAIL).scaled(ji));
    }
    Ok(pmf)
}

/// Rule `p^{(k)}_{l_j, j'}`: probability that step `l` of block `block`
/// takes the value `target`.
pub trait AltArrayRule: Sync {
    fn prob(&self, block: Jump, l: usize, target: Jump) -> f64;
}

impl<F> AltArrayRule for F
where
    F: Fn(Jump, usize, Jump) -> f64 + Sync,
{
    fn prob(&self, block: Jump, l: usize, target: Jump) -> f64 {
        self(block, l, target)
    }
}

/// `p^{(k)}_{l_j, j'} = λ_j δ_{j,j'} / β_k`.
#[derive(Debug, Clone)]
pub struct KroneckerRule {
    pub spec: AltSpec,
    pub beta: f64,
}

impl KroneckerRule {
    pub fn new(spec: AltSpec, beta: f64) -> Result<Self> {
        let total: f64 = spec.iter().map(|(_, r)| r).sum();
        if !(beta > total) {
            return Err(Error::InvalidRule(format!(
                "beta {beta} must exceed the total rate {total}"
            )));
        }
        Ok(Self { spec, beta })
    }
}

impl AltArrayRule for KroneckerRule {
    fn prob(&self, block: Jump, _l: usize, target: Jump) -> f64 {
        if block == target {
            self.spec.rate(block).unwrap_or(0.0) / self.beta
        } else {
            0.0
        }
    }
}

/// Draws of `U_k(t) = Σ_j Σ_{l_j=1}^{[α_k t_j]} X^{(k)}_{l_j}`.
///
/// Steps whose rule gives exactly zero mass to a target omit that target;
/// every remaining probability must lie in (0,1) with row sum below one.
pub fn alt_array_sample(
    scale: f64,
    rule: &dyn AltArrayRule,
    jumps: &[Jump],
    t: &JumpTimes,
    n_draws: usize,
    seed: u64,
) -> Result<SampleBatch> {
    if !(scale >= 0.0) || !scale.is_finite() {
        return Err(Error::param(format!("array scale must be nonnegative, got {scale}")));
    }
    let mut runs = Vec::new();
    for (&block, &tj) in t {
        let steps = (scale * tj).floor() as usize;
        for l in 1..=steps {
            let mut support = Vec::new();
            let mut probs = Vec::new();
            for &target in jumps {
                let p = rule.prob(block, l, target);
                if p != 0.0 {
                    support.push(target);
                    probs.push(p);
                }
            }
            if support.is_empty() {
                continue;
            }
            push_step(&mut runs, step_law(&support, &probs)?);
        }
    }
    let values = rng::draw_batch(n_draws, seed, tags::ALT_ARRAY, |rng| sample_runs(&runs, rng));
    Ok(SampleBatch::new(
        "alt-array",
        json!({"scale": scale, "jumps": jumps, "t": times_json(t)}),
        seed,
        values,
    ))
}

/// Pmf of `N_1(t_1) - N_2(t_2)`:
/// `e^{-λ1t1-λ2t2} (λ1t1/λ2t2)^{n/2} I_|n|(2√(λ1λ2t1t2))`.
pub fn twoparam_skellam_pmf(n: i64, lambda1: f64, lambda2: f64, t1: f64, t2: f64) -> Result<f64> {
    if [lambda1, lambda2, t1, t2].iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain("non-finite Skellam parameter".into()));
    }
    skellam_pmf(n, lambda1 * t1, lambda2 * t2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pm() -> AltSpec {
        AltSpec::new([(1.0, 1.0), (-1.0, 1.0)]).unwrap()
    }

    #[test]
    fn spec_and_key_validation() {
        assert!(AltSpec::new([]).is_err());
        assert!(AltSpec::new([(0.0, 1.0)]).is_err());
        assert!(AltSpec::new([(1.0, -1.0)]).is_err());
        let s = pm();
        assert!(matches!(s.times([(1.0, 1.0)]), Err(Error::KeyMismatch(_))));
        assert!(matches!(s.times([(1.0, 1.0), (2.0, 1.0)]), Err(Error::KeyMismatch(_))));
        assert!(s.times([(1.0, 1.0), (-1.0, -0.5)]).is_err());
    }

    #[test]
    fn zero_times_give_zero_draws() {
        let s = pm();
        let t = s.constant_times(0.0).unwrap();
        assert!(alt_sample(&s, &t, 50, 2).unwrap().values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn moment_examples() {
        let s = pm();
        let z = s.constant_times(0.0).unwrap();
        let m = alt_moments(&s, &z, &z).unwrap();
        assert_eq!((m.mean, m.variance, m.covariance), (0.0, 0.0, 0.0));
        let t = s.times([(1.0, 2.0), (-1.0, 1.0)]).unwrap();
        let m = alt_moments(&s, &t, &t).unwrap();
        assert_eq!((m.mean, m.variance), (1.0, 3.0));
        assert_eq!(m.covariance, m.variance);
        let earlier = s.times([(1.0, 0.5), (-1.0, 3.0)]).unwrap();
        assert_eq!(alt_moments(&s, &earlier, &t).unwrap().covariance, 1.5);
    }

    #[test]
    fn increment_cf_examples() {
        let s = pm();
        let zero = s.constant_times(0.0).unwrap();
        let one = s.constant_times(1.0).unwrap();
        assert_eq!(
            alt_increment_cf(&s, &zero, &one, 0.0).unwrap(),
            Complex64::new(1.0, 0.0)
        );
        assert_eq!(alt_increment_cf(&s, &one, &one, 1.3).unwrap(), Complex64::new(1.0, 0.0));
        for &z in &[-1.0, 0.4, 2.5] {
            let v = alt_increment_cf(&s, &zero, &one, z).unwrap();
            assert!((v.re - (2.0 * (f64::cos(z) - 1.0)).exp()).abs() < 1e-14);
            assert!(v.im.abs() < 1e-14);
        }
        assert!(alt_increment_cf(&s, &one, &zero, 1.0).is_err());
    }

    #[test]
    fn increment_cf_matches_continued_pgf() {
        let s = AltSpec::new([(1.0, 0.7), (-2.0, 0.4), (3.0, 0.2)]).unwrap();
        let zero = s.constant_times(0.0).unwrap();
        let t = s.times([(1.0, 1.5), (-2.0, 0.3), (3.0, 2.0)]).unwrap();
        for i in -12..=12 {
            let z = i as f64 * 0.25;
            let cf = alt_increment_cf(&s, &zero, &t, z).unwrap();
            let pgf = alt_pgf(&s, &t, Complex64::new(0.0, z).exp()).unwrap();
            assert!((cf - pgf).norm() < 1e-12, "z={z}");
        }
    }

    #[test]
    fn twoparam_examples() {
        let p = twoparam_skellam_pmf(0, 1.0, 1.0, 1.0, 1.0).unwrap();
        assert!((p - (-2.0f64).exp() * 2.279_585_302_336_067).abs() < 1e-10);
        for n in 0..=10 {
            let a = twoparam_skellam_pmf(n, 2.0, 1.0, 0.5, 1.0).unwrap();
            let b = twoparam_skellam_pmf(-n, 2.0, 1.0, 0.5, 1.0).unwrap();
            assert_eq!(a, b);
        }
        assert!(twoparam_skellam_pmf(0, f64::INFINITY, 1.0, 1.0, 1.0).is_err());
        // t2 = 0: Poisson branch
        let want = crate::special_fn::poisson_pmf(3, 2.0);
        assert!((twoparam_skellam_pmf(3, 2.0, 1.0, 1.0, 0.0).unwrap() - want).abs() < 1e-15);
    }

    #[test]
    fn twoparam_normalises() {
        let total: f64 = (-60..=60)
            .map(|n| twoparam_skellam_pmf(n, 3.0, 0.5, 2.0, 0.5).unwrap())
            .sum();
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn kronecker_rule_validation() {
        assert!(KroneckerRule::new(pm(), 2.0).is_err());
        let r = KroneckerRule::new(pm(), 10.0).unwrap();
        assert_eq!(r.prob(Jump(1.0), 1, Jump(-1.0)), 0.0);
        assert_eq!(r.prob(Jump(1.0), 3, Jump(1.0)), 0.1);
    }

    #[test]
    fn array_zero_steps_and_invalid_rule() {
        let s = pm();
        let rule = KroneckerRule::new(s.clone(), 10.0).unwrap();
        let t = s.constant_times(0.05).unwrap();
        let b = alt_array_sample(10.0, &rule, &s.jumps(), &t, 20, 0).unwrap();
        assert!(b.values.iter().all(|&v| v == 0.0));
        let bad = |_: Jump, _: usize, _: Jump| 0.7;
        let t = s.constant_times(1.0).unwrap();
        assert!(matches!(
            alt_array_sample(10.0, &bad, &s.jumps(), &t, 5, 0),
            Err(Error::InvalidRule(_))
        ));
    }
}
