//! Scalar special functions behind the closed-form laws.
//!
//! All series are summed in log-space with explicit sign tracking and stop
//! once `|term| < abs_tol * (1 + |partial|)` holds for three consecutive terms.

use std::f64::consts::PI;
use std::sync::OnceLock;

use statrs::function::gamma as sgamma;

use crate::error::{Error, Result};

/// Truncation controls shared by every series in this module.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesControl {
    pub abs_tol: f64,
    pub max_terms: usize,
}

impl Default for SeriesControl {
    fn default() -> Self {
        Self {
            abs_tol: 1e-14,
            max_terms: 10_000,
        }
    }
}

impl SeriesControl {
    pub fn new(abs_tol: f64, max_terms: usize) -> Result<Self> {
        if !(abs_tol > 0.0) || !abs_tol.is_finite() {
            return Err(Error::param(format!("abs_tol must be positive, got {abs_tol}")));
        }
        if max_terms == 0 {
            return Err(Error::param("max_terms must be at least 1"));
        }
        Ok(Self { abs_tol, max_terms })
    }
}

const SMALL_RUN: usize = 3;

/// Tracks the three-consecutive-small-terms stopping rule.
#[derive(Debug, Clone, Copy)]
struct StopRule {
    tol: f64,
    run: usize,
}

impl StopRule {
    fn new(tol: f64) -> Self {
        Self { tol, run: 0 }
    }

    fn observe(&mut self, term: f64, partial: f64) -> bool {
        if term.abs() < self.tol * (1.0 + partial.abs()) {
            self.run += 1;
        } else {
            self.run = 0;
        }
        self.run >= SMALL_RUN
    }
}

/// Neumaier-compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    sgamma::ln_gamma(x)
}

/// `(ln|Γ(x)|, sign Γ(x))` on the whole real line minus the poles.
pub fn ln_gamma_signed(x: f64) -> Result<(f64, f64)> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("gamma of non-finite argument {x}")));
    }
    if x > 0.0 {
        return Ok((sgamma::ln_gamma(x), 1.0));
    }
    if x.fract() == 0.0 {
        return Err(Error::Domain(format!("gamma pole at {x}")));
    }
    // Γ(x) Γ(1-x) = π / sin(πx), with Γ(1-x) > 0 here.
    let s = (PI * x).sin();
    Ok(((PI / s.abs()).ln() - sgamma::ln_gamma(1.0 - x), s.signum()))
}

pub fn ln_factorial(n: u64) -> f64 {
    sgamma::ln_gamma(n as f64 + 1.0)
}

/// Poisson(mean) probability of `k`; `mean = 0` is the point mass at 0.
pub fn poisson_pmf(k: u64, mean: f64) -> f64 {
    if mean <= 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    (-mean + k as f64 * mean.ln() - ln_factorial(k)).exp()
}

/// Modified Bessel function of the first kind `I_n(x)` for integer order,
/// from its power series with the default [`SeriesControl`].
pub fn bessel_i(n: i64, x: f64) -> Result<f64> {
    bessel_i_with(n, x, SeriesControl::default())
}

pub fn bessel_i_with(n: i64, x: f64, ctl: SeriesControl) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("bessel_i at non-finite x = {x}")));
    }
    let n = n.unsigned_abs();
    if x == 0.0 {
        return Ok(if n == 0 { 1.0 } else { 0.0 });
    }
    // I_n(-x) = (-1)^n I_n(x)
    let sign = if x < 0.0 && n % 2 == 1 { -1.0 } else { 1.0 };
    let lh = (x.abs() / 2.0).ln();
    let mut acc = CompensatedSum::default();
    let mut stop = StopRule::new(ctl.abs_tol);
    for m in 0..ctl.max_terms as u64 {
        let k = (2 * m + n) as f64;
        let term = (k * lh - ln_factorial(m + n) - ln_factorial(m)).exp();
        acc.add(term);
        if stop.observe(term, acc.value()) {
            return Ok(sign * acc.value());
        }
    }
    Err(Error::Truncation {
        partial: sign * acc.value(),
        terms: ctl.max_terms,
    })
}

/// `ln I_n(x)` for `x > 0`, with truncation relative to the partial sum.
///
/// Used by the Skellam pmf, where `I_n` is multiplied by factors that can be
/// far from one and an absolute cutoff would lose small probabilities.
pub fn ln_bessel_i(n: i64, x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("ln_bessel_i needs finite x > 0, got {x}")));
    }
    let n = n.unsigned_abs();
    let lh = (x / 2.0).ln();
    let ctl = SeriesControl::default();
    // Terms are positive: keep a running log-sum-exp.
    let mut scale = f64::NEG_INFINITY;
    let mut acc = 0.0;
    let mut run = 0;
    for m in 0..ctl.max_terms as u64 {
        let lt = (2 * m + n) as f64 * lh - ln_factorial(m + n) - ln_factorial(m);
        if lt > scale {
            acc = acc * (scale - lt).exp() + 1.0;
            scale = lt;
        } else {
            acc += (lt - scale).exp();
        }
        if (lt - scale).exp() < ctl.abs_tol * acc {
            run += 1;
            if run >= SMALL_RUN {
                return Ok(scale + acc.ln());
            }
        } else {
            run = 0;
        }
    }
    Err(Error::Truncation {
        partial: (scale + acc.ln()).exp(),
        terms: ctl.max_terms,
    })
}

/// A `(value, weight)` parameter pair of a Wright-type series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WrightParam {
    pub value: f64,
    pub weight: f64,
}

impl WrightParam {
    pub fn new(value: f64, weight: f64) -> Self {
        Self { value, weight }
    }

    fn at(self, m: u64) -> f64 {
        self.value + m as f64 * self.weight
    }
}

impl From<(f64, f64)> for WrightParam {
    fn from(p: (f64, f64)) -> Self {
        Self::new(p.0, p.1)
    }
}

/// Generalized Wright function with two numerator and three denominator
/// parameter pairs:
///
/// `sum_m Γ(a1+mA1) Γ(a2+mA2) / (Γ(b1+mB1) Γ(b2+mB2) Γ(b3+mB3)) z^m / m!`
///
/// A pole in a numerator gamma is a domain error; a pole in a denominator
/// gamma makes that term vanish (`1/Γ` is entire).
pub fn wright_psi23(a: [WrightParam; 2], b: [WrightParam; 3], z: f64, ctl: SeriesControl) -> Result<f64> {
    if !z.is_finite() {
        return Err(Error::Domain(format!("wright_psi23 at non-finite z = {z}")));
    }
    let lz = z.abs().ln();
    let mut acc = CompensatedSum::default();
    let mut stop = StopRule::new(ctl.abs_tol);
    for m in 0..ctl.max_terms as u64 {
        let term = wright_term(&a, &b, z, lz, m)?;
        acc.add(term);
        if stop.observe(term, acc.value()) {
            return Ok(acc.value());
        }
    }
    Err(Error::Truncation {
        partial: acc.value(),
        terms: ctl.max_terms,
    })
}

fn wright_term(a: &[WrightParam; 2], b: &[WrightParam; 3], z: f64, lz: f64, m: u64) -> Result<f64> {
    if z == 0.0 && m > 0 {
        return Ok(0.0);
    }
    let mut log = 0.0;
    let mut sign = 1.0;
    for p in a {
        let (l, s) = ln_gamma_signed(p.at(m))?;
        log += l;
        sign *= s;
    }
    for p in b {
        let x = p.at(m);
        if x <= 0.0 && x.fract() == 0.0 {
            return Ok(0.0);
        }
        let (l, s) = ln_gamma_signed(x)?;
        log -= l;
        sign *= s;
    }
    if m > 0 {
        log += m as f64 * lz - ln_factorial(m);
        if z < 0.0 && m % 2 == 1 {
            sign = -sign;
        }
    }
    Ok(sign * log.exp())
}

fn check_frac_args(lambda: f64, t: f64, alpha: f64) -> Result<()> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::param(format!("rate must be positive, got {lambda}")));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::param(format!("time must be nonnegative, got {t}")));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::param(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    Ok(())
}

/// Probability that a fractional Poisson process with rate `lambda` and
/// index `alpha` sits at `n` at time `t`, by [`frac_poisson_mixture`].
///
/// The series form [`frac_poisson_series`] is exact in principle but its
/// alternating terms cancel badly for small `alpha` or large `n`; it serves
/// as a cross-check. `alpha = 1` is the ordinary Poisson pmf.
pub fn frac_poisson_pmf(n: u64, lambda: f64, t: f64, alpha: f64, ctl: SeriesControl) -> Result<f64> {
    Ok(frac_poisson_mixture(n..n + 1, lambda, t, alpha, ctl)?[0])
}

/// The series `((λt^α)^n / n!) Σ_r ((n+r)!/r!) (-λt^α)^r / Γ(α(n+r)+1)`.
///
/// The terms alternate and can be huge compared to the result for small
/// `alpha` or large `n`; a sum outside `[-1e-6, 1 + 1e-6]` is reported as
/// [`Error::Divergence`].
pub fn frac_poisson_series(n: u64, lambda: f64, t: f64, alpha: f64, ctl: SeriesControl) -> Result<f64> {
    check_frac_args(lambda, t, alpha)?;
    if t == 0.0 {
        return Ok(if n == 0 { 1.0 } else { 0.0 });
    }
    if alpha == 1.0 {
        return Ok(poisson_pmf(n, lambda * t));
    }
    series_sum(n, lambda * t.powf(alpha), alpha, ctl).map(|v| v.clamp(0.0, 1.0))
}

fn series_sum(n: u64, x: f64, alpha: f64, ctl: SeriesControl) -> Result<f64> {
    let lx = x.ln();
    let prefix = n as f64 * lx - ln_factorial(n);
    let mut acc = CompensatedSum::default();
    let mut stop = StopRule::new(ctl.abs_tol);
    let mut pending: Option<f64> = None;
    let mut done = false;
    for r in 0..ctl.max_terms as u64 {
        let log =
            prefix + ln_factorial(n + r) - ln_factorial(r) + r as f64 * lx - ln_gamma(alpha * (n + r) as f64 + 1.0);
        let term = if r % 2 == 0 { log.exp() } else { -log.exp() };
        // Adjacent terms of opposite sign are combined before accumulation.
        match pending.take() {
            Some(prev) => acc.add(prev + term),
            None => pending = Some(term),
        }
        let partial = acc.value() + pending.unwrap_or(0.0);
        if stop.observe(term, partial) {
            done = true;
            break;
        }
    }
    if let Some(p) = pending {
        acc.add(p);
    }
    let value = acc.value();
    if value.abs() > 1.0 + 1e-6 || value < -1e-6 || !value.is_finite() {
        return Err(Error::Divergence { partial: value });
    }
    if !done {
        return Err(Error::Truncation {
            partial: value,
            terms: ctl.max_terms,
        });
    }
    Ok(value)
}

const TANH_SINH_LEVELS: usize = 5;

/// Tanh-sinh nodes on `(0, 1)` as `(x, 1 - x, weight)`, step `2^{-(2+level)}`
/// over `|s| <= 4`.
fn tanh_sinh_nodes(level: usize) -> &'static [(f64, f64, f64)] {
    static NODES: OnceLock<Vec<Vec<(f64, f64, f64)>>> = OnceLock::new();
    &NODES.get_or_init(|| {
        (0..TANH_SINH_LEVELS)
            .map(|level| {
                let per_unit = 4_i64 << level;
                let h = 1.0 / per_unit as f64;
                (-4 * per_unit..=4 * per_unit)
                    .filter_map(|k| {
                        let s = k as f64 * h;
                        let v = 0.5 * PI * s.sinh();
                        let x = 1.0 / (1.0 + (-2.0 * v).exp());
                        let xc = 1.0 / (1.0 + (2.0 * v).exp());
                        let w = 0.25 * PI * h * s.cosh() / v.cosh().powi(2);
                        (x > 0.0 && xc > 0.0 && w > 0.0).then_some((x, xc, w))
                    })
                    .collect()
            })
            .collect()
    })[level]
}

/// Fractional Poisson probabilities for every `n` in `range`, computed as
/// `E[e^{-λL} (λL)^n / n!]` with the inverse-stable clock written as
/// `L = t^α (E / A(U))^{1-α}` (`U` uniform on `(0, π)`, `E` unit
/// exponential, `A` Kanter's function) and both expectations done by
/// tanh-sinh quadrature. The step is halved until two successive levels
/// agree within `ctl.abs_tol` (floored at 1e-15).
pub fn frac_poisson_mixture(
    range: std::ops::Range<u64>,
    lambda: f64,
    t: f64,
    alpha: f64,
    ctl: SeriesControl,
) -> Result<Vec<f64>> {
    check_frac_args(lambda, t, alpha)?;
    if t == 0.0 || alpha == 1.0 {
        return Ok(range
            .map(|n| {
                if t == 0.0 {
                    f64::from(n == 0)
                } else {
                    poisson_pmf(n, lambda * t)
                }
            })
            .collect());
    }
    let tol = ctl.abs_tol.max(1e-15);
    let mut prev = mixture_level(&range, lambda * t.powf(alpha), alpha, 0);
    for level in 1..TANH_SINH_LEVELS {
        let next = mixture_level(&range, lambda * t.powf(alpha), alpha, level);
        let gap = next.iter().zip(&prev).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prev = next;
        if gap <= tol {
            return Ok(prev.into_iter().map(|p| p.clamp(0.0, 1.0)).collect());
        }
    }
    Err(Error::Truncation {
        partial: prev.first().copied().unwrap_or(0.0),
        terms: TANH_SINH_LEVELS,
    })
}

fn mixture_level(range: &std::ops::Range<u64>, scale: f64, alpha: f64, level: usize) -> Vec<f64> {
    let nodes = tanh_sinh_nodes(level);
    let beta = 1.0 - alpha;
    let ln_fact: Vec<f64> = range.clone().map(ln_factorial).collect();
    let mut out = vec![0.0; ln_fact.len()];
    for &(x, xc, wu) in nodes {
        // U = πx; sin U is taken from the complement for accuracy near π.
        let u = PI * x;
        let ln_sin_a = (alpha * u).sin().ln();
        let ln_a = (ln_sin_a - (PI * xc).sin().ln()) / beta + (beta * u).sin().ln() - ln_sin_a;
        let c = scale * (-beta * ln_a).exp();
        for &(y, yc, we) in nodes {
            // E = -ln y
            let e = if y < 0.5 { -y.ln() } else { -(-yc).ln_1p() };
            let m = c * e.powf(beta);
            let w = wu * we;
            if m == 0.0 {
                if range.start == 0 && !out.is_empty() {
                    out[0] += w;
                }
                continue;
            }
            let lm = m.ln();
            for (i, n) in range.clone().enumerate() {
                out[i] += w * (n as f64 * lm - m - ln_fact[i]).exp();
            }
        }
    }
    out
}
