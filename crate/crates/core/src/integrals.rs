//! Riemann integrals of multiparameter paths over rectangles `Π_k [0, t_k]`.
//!
//! Paths are evaluated at the lower-left corners of a uniform lattice with
//! `r_k` cells per axis. Every process handled here is additive across axes,
//! `X(t) = Σ_k X_k(t_k)`, so the lattice sum reduces to per-axis sums:
//!
//! `Π_k (t_k/r_k) Σ_lattice X = Σ_k (Π_{k'≠k} t_{k'}) (t_k/r_k) Σ_{l<r_k} X_k(l t_k/r_k)`.

use num_complex::Complex64;
use serde_json::json;

use crate::data::SampleBatch;
use crate::error::{Error, Result};
use crate::gmsp::JumpSpec;
use crate::mpp::{check_dim, GridPath, RateVector, TimePoint};
use crate::rng::{self, tags, Categorical, PoissonSampler, SeedRecord, StreamRng};

/// Rectangle `Π_k [0, t_k]` with `r_k` Riemann cells along axis `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct RectDomain {
    pub t: TimePoint,
    pub resolution: Vec<usize>,
}

impl RectDomain {
    pub fn new(t: TimePoint, resolution: Vec<usize>) -> Result<Self> {
        check_dim(t.dim(), resolution.len())?;
        if resolution.contains(&0) {
            return Err(Error::param("resolutions must be at least 1"));
        }
        Ok(Self { t, resolution })
    }

    /// Same resolution on every axis.
    pub fn uniform(t: TimePoint, r: usize) -> Result<Self> {
        let m = t.dim();
        Self::new(t, vec![r; m])
    }

    pub fn dim(&self) -> usize {
        self.t.dim()
    }

    pub fn volume(&self) -> f64 {
        self.t.volume()
    }

    /// Lattice times `l t_k / r_k`, `l = 0..=r_k`, per axis.
    pub fn lattice_axes(&self) -> Vec<Vec<f64>> {
        self.t
            .as_slice()
            .iter()
            .zip(&self.resolution)
            .map(|(&tk, &r)| (0..=r).map(|l| tk * l as f64 / r as f64).collect())
            .collect()
    }

    /// `Π_{k'≠k} t_{k'}`.
    fn cofactor(&self, k: usize) -> f64 {
        self.t
            .as_slice()
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != k)
            .map(|(_, t)| t)
            .product()
    }
}

/// Finite jump law `P{X = value} = prob`.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpLaw {
    pairs: Vec<(f64, f64)>,
    sampler: Categorical,
}

impl JumpLaw {
    pub fn new(pairs: Vec<(f64, f64)>) -> Result<Self> {
        let sampler = Categorical::from_weights(&pairs)
            .ok_or_else(|| Error::param("jump law needs nonnegative weights with positive total"))?;
        let probs = sampler.probabilities();
        let pairs = pairs.iter().zip(probs).map(|(p, q)| (p.0, q)).collect();
        Ok(Self { pairs, sampler })
    }

    pub fn pairs(&self) -> &[(f64, f64)] {
        &self.pairs
    }

    /// `E e^{iuX}`.
    pub fn cf(&self, u: f64) -> Complex64 {
        self.pairs
            .iter()
            .map(|&(x, p)| p * Complex64::new(0.0, u * x).exp())
            .sum()
    }

    pub fn sample(&self, rng: &mut StreamRng) -> f64 {
        self.sampler.sample(rng)
    }
}

/// Processes whose paths can be integrated.
#[derive(Debug, Clone, PartialEq)]
pub enum IntegrandProcess {
    Mpp(RateVector),
    Gmsp(JumpSpec),
    /// `Σ_{r <= N(t)} X_r` with an MPP `N` of the given rates.
    Compound {
        rates: RateVector,
        law: JumpLaw,
    },
}

impl IntegrandProcess {
    pub fn dim(&self) -> usize {
        match self {
            Self::Mpp(r) => r.dim(),
            Self::Gmsp(s) => s.dim(),
            Self::Compound { rates, .. } => rates.dim(),
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Self::Mpp(_) => "mpp",
            Self::Gmsp(_) => "gmsp",
            Self::Compound { .. } => "compound",
        }
    }

    fn to_json(&self) -> serde_json::Value {
        match self {
            Self::Mpp(r) => json!({"rates": r.as_slice()}),
            Self::Gmsp(s) => json!({"jumps": s.to_json()}),
            Self::Compound { rates, law } => json!({"rates": rates.as_slice(), "law": law.pairs()}),
        }
    }

    fn axis_increment(&self, k: usize, dt: f64) -> AxisIncrement<'_> {
        match self {
            Self::Mpp(r) => AxisIncrement::Counting(PoissonSampler::new(r.as_slice()[k] * dt)),
            Self::Gmsp(s) => AxisIncrement::Skellam(
                s.iter()
                    .map(|(j, r)| (j.0, PoissonSampler::new(r.as_slice()[k] * dt)))
                    .collect(),
            ),
            Self::Compound { rates, law } => {
                AxisIncrement::Compound(PoissonSampler::new(rates.as_slice()[k] * dt), law)
            }
        }
    }
}

/// Increment law of the one-parameter component on one axis over a cell.
enum AxisIncrement<'a> {
    Counting(PoissonSampler),
    Skellam(Vec<(f64, PoissonSampler)>),
    Compound(PoissonSampler, &'a JumpLaw),
}

impl AxisIncrement<'_> {
    fn sample(&self, rng: &mut StreamRng) -> f64 {
        match self {
            Self::Counting(d) => d.sample(rng) as f64,
            Self::Skellam(parts) => parts.iter().map(|(j, d)| j * d.sample(rng) as f64).sum(),
            Self::Compound(d, law) => (0..d.sample(rng)).map(|_| law.sample(rng)).sum(),
        }
    }
}

fn axis_lattice_paths(process: &IntegrandProcess, dom: &RectDomain, rng: &mut StreamRng) -> Vec<Vec<f64>> {
    (0..dom.dim())
        .map(|k| {
            let r = dom.resolution[k];
            let inc = process.axis_increment(k, dom.t.as_slice()[k] / r as f64);
            let mut path = Vec::with_capacity(r + 1);
            let mut acc = 0.0;
            path.push(0.0);
            for _ in 0..r {
                acc += inc.sample(rng);
                path.push(acc);
            }
            path
        })
        .collect()
}

fn additive_riemann_sum(paths: &[Vec<f64>], dom: &RectDomain) -> f64 {
    paths
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let r = dom.resolution[k];
            let cell = dom.t.as_slice()[k] / r as f64;
            dom.cofactor(k) * cell * p[..r].iter().sum::<f64>()
        })
        .sum()
}

/// Samples one path of `process` on the lattice of `dom` (`r_k + 1` points
/// per axis).
pub fn sample_lattice_path(process: &IntegrandProcess, dom: &RectDomain, seed: u64) -> Result<GridPath> {
    check_dim(process.dim(), dom.dim())?;
    let mut rng = rng::stream(seed, tags::INTEGRAL, 0);
    let paths = axis_lattice_paths(process, dom, &mut rng);
    Ok(GridPath::from_axis_paths(
        dom.lattice_axes(),
        &paths,
        SeedRecord::new(seed, tags::INTEGRAL),
    ))
}

/// Lower-left Riemann sum of a materialised lattice path. The path axes must
/// be the uniform lattices `l t_k / r_k`, `l = 0..=r_k`.
pub fn riemann_sum_grid(path: &GridPath) -> f64 {
    let shape = path.shape();
    let cell: f64 = path
        .axes
        .iter()
        .map(|a| a.last().copied().unwrap_or(0.0) / (a.len() - 1).max(1) as f64)
        .product();
    let m = shape.len();
    let mut idx = vec![0usize; m];
    let mut total = 0.0;
    let cells: Vec<usize> = shape.iter().map(|&n| n.saturating_sub(1)).collect();
    if cells.contains(&0) {
        return 0.0;
    }
    loop {
        total += path.get(&idx);
        let mut k = m;
        loop {
            if k == 0 {
                return total * cell;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < cells[k] {
                break;
            }
            idx[k] = 0;
        }
    }
}

/// Keeps every `factor`-th lattice point on each axis.
pub fn coarsen(path: &GridPath, factor: usize) -> GridPath {
    let shape = path.shape();
    let axes: Vec<Vec<f64>> = path
        .axes
        .iter()
        .map(|a| a.iter().step_by(factor).copied().collect())
        .collect();
    let new_shape: Vec<usize> = axes.iter().map(Vec::len).collect();
    let total: usize = new_shape.iter().product();
    let mut values = Vec::with_capacity(total);
    let mut idx = vec![0usize; shape.len()];
    for _ in 0..total {
        let fine: Vec<usize> = idx.iter().map(|i| i * factor).collect();
        values.push(path.get(&fine));
        for k in (0..new_shape.len()).rev() {
            idx[k] += 1;
            if idx[k] < new_shape[k] {
                break;
            }
            idx[k] = 0;
        }
    }
    GridPath {
        axes,
        values,
        seed: path.seed.clone(),
    }
}

/// Draws of the lattice Riemann integral of `process` over `dom`.
pub fn integral_sample(process: &IntegrandProcess, dom: &RectDomain, n_draws: usize, seed: u64) -> Result<SampleBatch> {
    check_dim(process.dim(), dom.dim())?;
    let params = json!({
        "integrand": process.name(),
        "process": process.to_json(),
        "t": dom.t.as_slice(),
        "resolution": dom.resolution,
    });
    if dom.volume() == 0.0 {
        return Ok(SampleBatch::new("integral", params, seed, vec![0.0; n_draws]));
    }
    let values = rng::draw_batch(n_draws, seed, tags::INTEGRAL, |rng| {
        let paths = axis_lattice_paths(process, dom, rng);
        additive_riemann_sum(&paths, dom)
    });
    Ok(SampleBatch::new("integral", params, seed, values))
}

/// `∫_0^1 (e^{icx} - 1) dx` in closed form.
pub fn unit_phase_integral(c: f64) -> Complex64 {
    let ic = Complex64::new(0.0, c);
    if c.abs() < 1e-4 {
        // ic/2 + (ic)^2/6 + (ic)^3/24 + (ic)^4/120
        return ic * (0.5 + ic * (1.0 / 6.0 + ic * (1.0 / 24.0 + ic / 120.0)));
    }
    (ic.exp() - 1.0) / ic - 1.0
}

/// Characteristic function of the integral of an MPP over `Π_k [0, t_k]`:
/// `exp(Σ_k t_k λ_k ∫_0^1 (e^{iu(Π t)x} - 1) dx)`.
pub fn integral_cf_mpp(rates: &RateVector, t: &TimePoint, u: f64) -> Result<Complex64> {
    check_dim(rates.dim(), t.dim())?;
    let inner = unit_phase_integral(u * t.volume());
    let weight: f64 = rates.as_slice().iter().zip(t.as_slice()).map(|(l, t)| l * t).sum();
    Ok((weight * inner).exp())
}

/// CF of the integral of a compound MPP with jump law `law`:
/// `exp(Σ_k t_k λ_k E ∫_0^1 (e^{iu(Π t)Xx} - 1) dx)`.
pub fn integral_cf_compound(rates: &RateVector, law: &JumpLaw, t: &TimePoint, u: f64) -> Result<Complex64> {
    check_dim(rates.dim(), t.dim())?;
    let vol = t.volume();
    let inner: Complex64 = law
        .pairs()
        .iter()
        .map(|&(x, p)| p * unit_phase_integral(u * vol * x))
        .sum();
    let weight: f64 = rates.as_slice().iter().zip(t.as_slice()).map(|(l, t)| l * t).sum();
    Ok((weight * inner).exp())
}

/// CF of the integral of a GMSP.
pub fn integral_cf_gmsp(spec: &JumpSpec, t: &TimePoint, u: f64) -> Result<Complex64> {
    check_dim(spec.dim(), t.dim())?;
    let vol = t.volume();
    let mut exponent = Complex64::new(0.0, 0.0);
    for (j, r) in spec.iter() {
        let inner = unit_phase_integral(u * vol * j.0);
        exponent += r.dot(t)? * inner;
    }
    Ok(exponent.exp())
}

/// Log-characteristic function `ψ(v) = ln E e^{ivY_k(1)}` of a one-parameter
/// Lévy component.
pub type LogCf<'a> = &'a (dyn Fn(f64) -> Complex64 + Sync);

pub const LEVY_QUAD_TOL: f64 = 1e-10;

/// CF of the integral of a multiparameter Lévy process with per-axis
/// log-CFs `psi[k]`: `exp(Σ_k t_k ∫_0^1 ψ_k(u (Π t) x) dx)`, by adaptive
/// Simpson quadrature.
pub fn integral_cf_levy(psi: &[LogCf<'_>], t: &TimePoint, u: f64) -> Result<Complex64> {
    check_dim(psi.len(), t.dim())?;
    let c = u * t.volume();
    let mut exponent = Complex64::new(0.0, 0.0);
    for (k, f) in psi.iter().enumerate() {
        let tk = t.as_slice()[k];
        if tk == 0.0 {
            continue;
        }
        let integral = adaptive_simpson(&|x: f64| f(c * x), 0.0, 1.0, LEVY_QUAD_TOL)?;
        exponent += tk * integral;
    }
    Ok(exponent.exp())
}

const MAX_DEPTH: u32 = 40;

/// Adaptive Simpson quadrature of a complex integrand.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> Complex64, a: f64, b: f64, tol: f64) -> Result<Complex64> {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &dyn Fn(f64) -> Complex64,
    a: f64,
    b: f64,
    fa: Complex64,
    fm: Complex64,
    fb: Complex64,
    whole: Complex64,
    tol: f64,
    depth: u32,
) -> Result<Complex64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    if !(flm.re.is_finite() && flm.im.is_finite() && frm.re.is_finite() && frm.im.is_finite()) {
        return Err(Error::Quadrature(format!("non-finite integrand near x = {m}")));
    }
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.norm() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::Quadrature(format!("tolerance {tol} not reached on [{a}, {b}]")));
    }
    Ok(simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?)
}

/// Which algebraic arrangement of the per-axis uniform-compound identity to draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PerAxisForm {
    /// `(Π_k t_k) Σ_k Σ_{r <= N_k(t_k)} X^{(k)}_r U_r`.
    Printed,
    /// `Σ_k (Π_{k'≠k} t_{k'}) t_k Σ_{r <= N_k(t_k)} X^{(k)}_r U_r`.
    PerAxis,
}

/// Uniform-weighted compound representations of path integrals.
#[derive(Debug, Clone, PartialEq)]
pub enum UniformCompound {
    /// Compound MPP: `(Π t) Σ_{r <= N(t)} X_r U_r`.
    CompoundMpp {
        rates: RateVector,
        law: JumpLaw,
        t: TimePoint,
    },
    /// GMSP through independent per-axis compound Poisson sums.
    PerAxisGmsp {
        spec: JumpSpec,
        t: TimePoint,
        form: PerAxisForm,
    },
    /// GMSP with `Λ_j = (λ^{(j)}, ..., λ^{(j)})`: `(Π t) Σ_{r <= N(t)} X_r U_r`
    /// with `N(t) ~ Poisson((Σ_j λ^{(j)}) Σ_k t_k)`.
    EqualRateGmsp { jump_rates: Vec<(f64, f64)>, t: TimePoint },
}

fn weighted_uniform_sum(count: u64, law: &dyn Fn(&mut StreamRng) -> f64, rng: &mut StreamRng) -> f64 {
    use rand::Rng;
    let mut s = 0.0;
    for _ in 0..count {
        let x = law(rng);
        let u: f64 = rng.random();
        s += x * u;
    }
    s
}

pub fn uniform_compound_sample(kind: &UniformCompound, n_draws: usize, seed: u64) -> Result<SampleBatch> {
    match kind {
        UniformCompound::CompoundMpp { rates, law, t } => {
            let count = PoissonSampler::new(rates.dot(t)?);
            let vol = t.volume();
            let values = rng::draw_batch(n_draws, seed, tags::UNIFORM_COMPOUND, |rng| {
                let n = count.sample(rng);
                vol * weighted_uniform_sum(n, &|r| law.sample(r), rng)
            });
            Ok(SampleBatch::new(
                "uniform-compound-mpp",
                json!({"rates": rates.as_slice(), "law": law.pairs(), "t": t.as_slice()}),
                seed,
                values,
            ))
        }
        UniformCompound::PerAxisGmsp { spec, t, form } => {
            check_dim(spec.dim(), t.dim())?;
            let dom = RectDomain::uniform(t.clone(), 1)?;
            let axes: Vec<(PoissonSampler, Categorical, f64)> = (0..spec.dim())
                .map(|k| {
                    let tk = t.as_slice()[k];
                    (
                        PoissonSampler::new(tk * spec.axis_total(k)),
                        spec.axis_jump_law(k),
                        dom.cofactor(k) * tk,
                    )
                })
                .collect();
            let vol = t.volume();
            let form = *form;
            let values = rng::draw_batch(n_draws, seed, tags::UNIFORM_COMPOUND, |rng| {
                let mut total = 0.0;
                for (count, law, weight) in &axes {
                    let n = count.sample(rng);
                    let s = weighted_uniform_sum(n, &|r| law.sample(r), rng);
                    total += match form {
                        PerAxisForm::Printed => s,
                        PerAxisForm::PerAxis => weight * s,
                    };
                }
                match form {
                    PerAxisForm::Printed => vol * total,
                    PerAxisForm::PerAxis => total,
                }
            });
            Ok(SampleBatch::new(
                "uniform-compound-peraxis",
                json!({"jumps": spec.to_json(), "t": t.as_slice(), "form": format!("{form:?}")}),
                seed,
                values,
            ))
        }
        UniformCompound::EqualRateGmsp { jump_rates, t } => {
            let spec = JumpSpec::equal_rates(jump_rates, t.dim())?;
            let total: f64 = jump_rates.iter().map(|p| p.1).sum();
            let count = PoissonSampler::new(total * t.sum());
            let law = spec.axis_jump_law(0);
            let vol = t.volume();
            let values = rng::draw_batch(n_draws, seed, tags::UNIFORM_COMPOUND, |rng| {
                let n = count.sample(rng);
                vol * weighted_uniform_sum(n, &|r| law.sample(r), rng)
            });
            Ok(SampleBatch::new(
                "uniform-compound-equalrate",
                json!({"jump_rates": jump_rates, "t": t.as_slice()}),
                seed,
                values,
            ))
        }
    }
}

/// `(t_k, Π_{k'≠k} t_{k'}, per-jump event counts)` for one axis.
type AxisEvents = (f64, f64, Vec<(f64, PoissonSampler)>);

/// `Σ_k (Π_{k'≠k} t_{k'}) ∫_0^{t_k} S_k(s) ds` with each one-parameter
/// integral computed exactly from event times: `∫_0^t S = Σ_events j (t - T)`.
pub fn peraxis_integral_sample(spec: &JumpSpec, t: &TimePoint, n_draws: usize, seed: u64) -> Result<SampleBatch> {
    use rand::Rng;
    check_dim(spec.dim(), t.dim())?;
    let dom = RectDomain::uniform(t.clone(), 1)?;
    let parts: Vec<AxisEvents> = (0..spec.dim())
        .map(|k| {
            let tk = t.as_slice()[k];
            let counts = spec
                .iter()
                .map(|(j, r)| (j.0, PoissonSampler::new(r.as_slice()[k] * tk)))
                .collect();
            (tk, dom.cofactor(k), counts)
        })
        .collect();
    let values = rng::draw_batch(n_draws, seed, tags::INTEGRAL_PERAXIS, |rng| {
        let mut total = 0.0;
        for (tk, cof, counts) in &parts {
            let mut axis = 0.0;
            for (j, d) in counts {
                for _ in 0..d.sample(rng) {
                    let event: f64 = rng.random::<f64>() * tk;
                    axis += j * (tk - event);
                }
            }
            total += cof * axis;
        }
        total
    });
    Ok(SampleBatch::new(
        "integral-peraxis",
        json!({"jumps": spec.to_json(), "t": t.as_slice()}),
        seed,
        values,
    ))
}
