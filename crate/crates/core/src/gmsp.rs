//! Generalized multiparameter Skellam process `S(t) = Σ_j j N_j(t)` with
//! independent multiparameter Poisson processes `N_j` of rates `Λ_j`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde_json::json;

use crate::data::{Jump, LatticePmf, SampleBatch};
use crate::error::{Error, Result};
use crate::mpp::{check_dim, RateVector, TimePoint};
use crate::rng::{self, tags, Categorical, PoissonSampler};
use crate::special_fn::{ln_bessel_i, poisson_pmf};

/// Tail mass allowed per Poisson factor in lattice pmfs.
pub const LATTICE_TAIL: f64 = 1e-12;

/// Jump set `J` with one rate vector `Λ_j` per jump.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpSpec {
    jumps: BTreeMap<Jump, RateVector>,
    dim: usize,
}

impl JumpSpec {
    pub fn new(jumps: impl IntoIterator<Item = (f64, RateVector)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        let mut dim = None;
        for (j, rates) in jumps {
            if j == 0.0 || !j.is_finite() {
                return Err(Error::param(format!("jump sizes must be finite and nonzero, got {j}")));
            }
            match dim {
                None => dim = Some(rates.dim()),
                Some(d) => check_dim(d, rates.dim())?,
            }
            if map.insert(Jump(j), rates).is_some() {
                return Err(Error::param(format!("duplicate jump {j}")));
            }
        }
        let dim = dim.ok_or(Error::Empty("jump set"))?;
        Ok(Self { jumps: map, dim })
    }

    /// Spec with `Λ_j = (λ^{(j)}, ..., λ^{(j)})` in dimension `dim`.
    pub fn equal_rates(jump_rates: &[(f64, f64)], dim: usize) -> Result<Self> {
        let pairs = jump_rates
            .iter()
            .map(|&(j, r)| RateVector::uniform(r, dim).map(|v| (j, v)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(pairs)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn iter(&self) -> impl Iterator<Item = (Jump, &RateVector)> {
        self.jumps.iter().map(|(j, r)| (*j, r))
    }

    pub fn jumps(&self) -> Vec<Jump> {
        self.jumps.keys().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.jumps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jumps.is_empty()
    }

    pub fn is_integer(&self) -> bool {
        self.jumps.keys().all(|j| j.as_integer().is_some())
    }

    /// `Σ_j λ_k^{(j)}` for axis `k`.
    pub fn axis_total(&self, k: usize) -> f64 {
        self.jumps.values().map(|r| r.as_slice()[k]).sum()
    }

    /// Jump law on axis `k`: `P{Y = j} ∝ λ_k^{(j)}`.
    pub fn axis_jump_law(&self, k: usize) -> Categorical {
        let pairs: Vec<(f64, f64)> = self.iter().map(|(j, r)| (j.0, r.as_slice()[k])).collect();
        Categorical::from_weights(&pairs).expect("positive rates")
    }

    pub fn to_json(&self) -> serde_json::Value {
        let jumps: Vec<_> = self
            .iter()
            .map(|(j, r)| json!({"jump": j.0, "rates": r.as_slice()}))
            .collect();
        json!(jumps)
    }
}

/// First two moments and the auto covariance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
    pub covariance: f64,
}

/// `n_draws` copies of `S(t)`.
pub fn gmsp_sample(spec: &JumpSpec, t: &TimePoint, n_draws: usize, seed: u64) -> Result<SampleBatch> {
    check_dim(spec.dim(), t.dim())?;
    let parts: Vec<(f64, PoissonSampler)> = spec
        .iter()
        .map(|(j, r)| Ok((j.0, PoissonSampler::new(r.dot(t)?))))
        .collect::<Result<_>>()?;
    let values = rng::draw_batch(n_draws, seed, tags::GMSP, |rng| {
        parts.iter().map(|(j, d)| j * d.sample(rng) as f64).sum()
    });
    Ok(SampleBatch::new(
        "gmsp",
        json!({"jumps": spec.to_json(), "t": t.as_slice()}),
        seed,
        values,
    ))
}

/// `E u^{S(t)} = exp(Σ_j Λ_j·t (u^j - 1))` for `0 < u <= 1`.
pub fn gmsp_pgf(spec: &JumpSpec, t: &TimePoint, u: f64) -> Result<f64> {
    if !(u > 0.0 && u <= 1.0) {
        return Err(Error::param(format!("pgf argument must lie in (0, 1], got {u}")));
    }
    let mut exponent = 0.0;
    for (j, r) in spec.iter() {
        exponent += r.dot(t)? * (u.powf(j.0) - 1.0);
    }
    Ok(exponent.exp())
}

/// `E e^{iuS(t)} = exp(Σ_j Λ_j·t (e^{iuj} - 1))`.
pub fn gmsp_cf(spec: &JumpSpec, t: &TimePoint, u: f64) -> Result<Complex64> {
    let mut exponent = Complex64::new(0.0, 0.0);
    for (j, r) in spec.iter() {
        exponent += r.dot(t)? * (Complex64::new(0.0, u * j.0).exp() - 1.0);
    }
    Ok(exponent.exp())
}

/// Mean and variance at `t`, covariance between `S(s)` and `S(t)`.
pub fn gmsp_moments(spec: &JumpSpec, s: &TimePoint, t: &TimePoint) -> Result<Moments> {
    let st = s.min(t)?;
    let mut m = Moments {
        mean: 0.0,
        variance: 0.0,
        covariance: 0.0,
    };
    for (j, r) in spec.iter() {
        let lt = r.dot(t)?;
        m.mean += j.0 * lt;
        m.variance += j.0 * j.0 * lt;
        m.covariance += j.0 * j.0 * r.dot(&st)?;
    }
    Ok(m)
}

/// Law of the difference of independent Poisson variables with means `a`, `b`:
/// `e^{-a-b} (a/b)^{n/2} I_|n|(2√(ab))`.
pub fn skellam_pmf(n: i64, a: f64, b: f64) -> Result<f64> {
    if !a.is_finite() || !b.is_finite() || a < 0.0 || b < 0.0 {
        return Err(Error::Domain(format!(
            "Skellam means must be finite and nonnegative, got {a}, {b}"
        )));
    }
    if b == 0.0 {
        return Ok(if n >= 0 { poisson_pmf(n as u64, a) } else { 0.0 });
    }
    if a == 0.0 {
        return Ok(if n <= 0 { poisson_pmf(n.unsigned_abs(), b) } else { 0.0 });
    }
    // (a/b)^{n/2} as exp((n/2)(ln a - ln b)) keeps pmf(n) and pmf(-n) symmetric.
    let log = -(a + b) + 0.5 * n as f64 * (a.ln() - b.ln()) + ln_bessel_i(n, 2.0 * (a * b).sqrt())?;
    Ok(log.exp())
}

/// Pmf of the multiparameter Skellam process `N_1(t) - N_2(t)`.
pub fn msp_pmf(n: i64, rates1: &RateVector, rates2: &RateVector, t: &TimePoint) -> Result<f64> {
    skellam_pmf(n, rates1.dot(t)?, rates2.dot(t)?)
}

/// `S(t)` through `Σ_k Σ_{l <= N_k(t_k)} Y^k_l` with
/// `N_k ~ Poisson(t_k Σ_j λ_k^{(j)})` and `P{Y^k = j} ∝ λ_k^{(j)}`.
pub fn gmsp_compound_peraxis_sample(spec: &JumpSpec, t: &TimePoint, n_draws: usize, seed: u64) -> Result<SampleBatch> {
    check_dim(spec.dim(), t.dim())?;
    let axes: Vec<(PoissonSampler, Categorical)> = (0..spec.dim())
        .map(|k| {
            (
                PoissonSampler::new(t.as_slice()[k] * spec.axis_total(k)),
                spec.axis_jump_law(k),
            )
        })
        .collect();
    let values = rng::draw_batch(n_draws, seed, tags::GMSP_PERAXIS, |rng| {
        let mut s = 0.0;
        for (count, law) in &axes {
            for _ in 0..count.sample(rng) {
                s += law.sample(rng);
            }
        }
        s
    });
    Ok(SampleBatch::new(
        "gmsp-peraxis",
        json!({"jumps": spec.to_json(), "t": t.as_slice()}),
        seed,
        values,
    ))
}

/// Equal-rate case `Λ_j = (λ^{(j)}, ..., λ^{(j)})`: `S(t) = Σ_{l <= N(t)} Y_l`
/// with `N(t) ~ Poisson((Σ_j λ^{(j)})(t_1 + ... + t_M))`.
pub fn gmsp_compound_equalrate_sample(
    jump_rates: &[(f64, f64)],
    dim: usize,
    t: &TimePoint,
    n_draws: usize,
    seed: u64,
) -> Result<SampleBatch> {
    // Validates jumps and rates the same way a JumpSpec would.
    let spec = JumpSpec::equal_rates(jump_rates, dim)?;
    check_dim(dim, t.dim())?;
    let total: f64 = jump_rates.iter().map(|p| p.1).sum();
    let count = PoissonSampler::new(total * t.sum());
    let law = spec.axis_jump_law(0);
    let values = rng::draw_batch(n_draws, seed, tags::GMSP_EQUALRATE, |rng| {
        (0..count.sample(rng)).map(|_| law.sample(rng)).sum()
    });
    Ok(SampleBatch::new(
        "gmsp-equalrate",
        json!({"jump_rates": jump_rates, "dim": dim, "t": t.as_slice()}),
        seed,
        values,
    ))
}

/// Exact lattice law of `S(t)` for integer jump sets, by convolving
/// truncated Poisson laws of the `j N_j(t)` terms.
pub fn gmsp_lattice_pmf(spec: &JumpSpec, t: &TimePoint) -> Result<LatticePmf> {
    let mut pmf = LatticePmf::point(0);
    for (j, r) in spec.iter() {
        let j = j
            .as_integer()
            .ok_or_else(|| Error::param(format!("lattice pmf needs integer jumps, got {j}")))?;
        pmf = pmf.convolve(&LatticePmf::poisson(r.dot(t)?, LATTICE_TAIL).scaled(j));
    }
    Ok(pmf)
}

/// Probability rule `p^{(n)}_{l_k, j}` of a triangular array.
pub trait ArrayRule: Sync {
    /// Probability that step `l` (1-based) on `axis` equals `jump` at scale `n`.
    fn prob(&self, axis: usize, l: usize, jump: Jump, n: usize) -> f64;
}

impl<F> ArrayRule for F
where
    F: Fn(usize, usize, Jump, usize) -> f64 + Sync,
{
    fn prob(&self, axis: usize, l: usize, jump: Jump, n: usize) -> f64 {
        self(axis, l, jump, n)
    }
}

/// `p^{(n)}_{l_k, j} = λ_k^{(j)} / n`.
#[derive(Debug, Clone)]
pub struct ConstantRateRule {
    spec: JumpSpec,
}

impl ConstantRateRule {
    pub fn new(spec: JumpSpec) -> Self {
        Self { spec }
    }
}

impl ArrayRule for ConstantRateRule {
    fn prob(&self, axis: usize, _l: usize, jump: Jump, n: usize) -> f64 {
        self.spec
            .jumps
            .get(&jump)
            .map_or(0.0, |r| r.as_slice()[axis] / n as f64)
    }
}

/// Scale `n` together with its probability rule.
pub struct TriangularArraySpec<'a> {
    pub n: usize,
    pub rule: &'a dyn ArrayRule,
}

/// Step law of `X^{(n)}_l`: `j` with probability `p_j`, zero otherwise.
pub(crate) fn step_law(jumps: &[Jump], probs: &[f64]) -> Result<Categorical> {
    let total: f64 = probs.iter().sum();
    if probs.iter().any(|p| !(*p > 0.0 && *p < 1.0)) || !(total < 1.0) {
        return Err(Error::InvalidRule(format!(
            "step probabilities {probs:?} must lie in (0,1) with sum below 1"
        )));
    }
    let mut pairs: Vec<(f64, f64)> = jumps.iter().zip(probs).map(|(j, p)| (j.0, *p)).collect();
    pairs.push((0.0, 1.0 - total));
    Ok(Categorical::from_weights(&pairs).expect("valid weights"))
}

/// Consecutive array steps that share one law.
#[derive(Debug, Clone)]
pub(crate) struct StepRun {
    law: Categorical,
    count: u64,
}

/// Appends a step, merging it into the previous run when the laws agree.
pub(crate) fn push_step(runs: &mut Vec<StepRun>, law: Categorical) {
    match runs.last_mut() {
        Some(run) if run.law == law => run.count += 1,
        _ => runs.push(StepRun { law, count: 1 }),
    }
}

pub(crate) fn sample_runs<R: rand::Rng + ?Sized>(runs: &[StepRun], rng: &mut R) -> f64 {
    runs.iter().map(|r| r.law.sample_sum(r.count, rng)).sum()
}

/// Draws of `S^{(n)}(t) = Σ_k Σ_{l_k=1}^{[n t_k]} X^{(n)}_{l_k}`.
pub fn gmsp_array_sample(
    spec: &TriangularArraySpec<'_>,
    jumps: &[Jump],
    t: &TimePoint,
    n_draws: usize,
    seed: u64,
) -> Result<SampleBatch> {
    if spec.n == 0 {
        return Err(Error::param("array scale must be at least 1"));
    }
    if jumps.is_empty() {
        return Err(Error::Empty("jump set"));
    }
    let mut runs = Vec::new();
    for (k, &tk) in t.as_slice().iter().enumerate() {
        let steps = (spec.n as f64 * tk).floor() as usize;
        for l in 1..=steps {
            let probs: Vec<f64> = jumps.iter().map(|&j| spec.rule.prob(k, l, j, spec.n)).collect();
            push_step(&mut runs, step_law(jumps, &probs)?);
        }
    }
    let values = rng::draw_batch(n_draws, seed, tags::GMSP_ARRAY, |rng| sample_runs(&runs, rng));
    Ok(SampleBatch::new(
        "gmsp-array",
        json!({"scale": spec.n, "jumps": jumps, "t": t.as_slice()}),
        seed,
        values,
    ))
}
