//! Multiparameter Poisson process.
//!
//! `N(t)` for `t` in `R^M_+` is sampled through its additive decomposition
//! `N(t) = N_1(t_1) + ... + N_M(t_M)` into independent one-parameter Poisson
//! processes with rates `λ_k`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, tags, PoissonSampler, SeedRecord, StreamRng};
use crate::special_fn::poisson_pmf;

/// Rate parameter `Λ = (λ_1, ..., λ_M)`, all strictly positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateVector(Vec<f64>);

impl RateVector {
    pub fn new(lambda: Vec<f64>) -> Result<Self> {
        if lambda.is_empty() {
            return Err(Error::Empty("rate vector"));
        }
        if let Some(bad) = lambda.iter().find(|l| !(**l > 0.0) || !l.is_finite()) {
            return Err(Error::param(format!("rates must be finite and positive, got {bad}")));
        }
        Ok(Self(lambda))
    }

    /// `M` copies of the same rate.
    pub fn uniform(rate: f64, dim: usize) -> Result<Self> {
        Self::new(vec![rate; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// `Λ · t`.
    pub fn dot(&self, t: &TimePoint) -> Result<f64> {
        check_dim(self.dim(), t.dim())?;
        Ok(self.0.iter().zip(t.as_slice()).map(|(l, t)| l * t).sum())
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }
}

/// A point of `R^M_+`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimePoint(Vec<f64>);

impl TimePoint {
    pub fn new(t: Vec<f64>) -> Result<Self> {
        if t.is_empty() {
            return Err(Error::Empty("time point"));
        }
        if let Some(bad) = t.iter().find(|x| !(**x >= 0.0) || !x.is_finite()) {
            return Err(Error::param(format!("times must be finite and nonnegative, got {bad}")));
        }
        Ok(Self(t))
    }

    pub fn origin(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn is_origin(&self) -> bool {
        self.0.iter().all(|&x| x == 0.0)
    }

    /// Coordinate-wise order `self ⪯ other`.
    pub fn precedes(&self, other: &TimePoint) -> bool {
        self.dim() == other.dim() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// Coordinate-wise minimum.
    pub fn min(&self, other: &TimePoint) -> Result<TimePoint> {
        check_dim(self.dim(), other.dim())?;
        Ok(Self(self.0.iter().zip(&other.0).map(|(a, b)| a.min(*b)).collect()))
    }

    /// `self - earlier`, requiring `earlier ⪯ self`.
    pub fn minus(&self, earlier: &TimePoint) -> Result<TimePoint> {
        check_dim(self.dim(), earlier.dim())?;
        if !earlier.precedes(self) {
            return Err(Error::param("time points are not ordered"));
        }
        Ok(Self(self.0.iter().zip(&earlier.0).map(|(a, b)| a - b).collect()))
    }

    pub fn volume(&self) -> f64 {
        self.0.iter().product()
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Values of a multiparameter process on a rectangular lattice.
///
/// `values` is row-major over `axes` (last axis fastest).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPath {
    pub axes: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    pub seed: SeedRecord,
}

impl GridPath {
    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(Vec::len).collect()
    }

    fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter()
            .zip(&self.axes)
            .fold(0, |acc, (&i, axis)| acc * axis.len() + i)
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.values[self.flat_index(idx)]
    }

    /// Builds a grid from per-axis one-parameter paths by summing them.
    pub fn from_axis_paths(axes: Vec<Vec<f64>>, paths: &[Vec<f64>], seed: SeedRecord) -> Self {
        let shape: Vec<usize> = axes.iter().map(Vec::len).collect();
        let total: usize = shape.iter().product();
        let mut values = Vec::with_capacity(total);
        let mut idx = vec![0usize; shape.len()];
        for _ in 0..total {
            values.push(idx.iter().zip(paths).map(|(&i, p)| p[i]).sum());
            for k in (0..shape.len()).rev() {
                idx[k] += 1;
                if idx[k] < shape[k] {
                    break;
                }
                idx[k] = 0;
            }
        }
        Self { axes, values, seed }
    }

    /// True when the values never decrease along any coordinate direction.
    pub fn is_monotone(&self) -> bool {
        let shape = self.shape();
        let m = shape.len();
        let mut stride = vec![1usize; m];
        for k in (0..m.saturating_sub(1)).rev() {
            stride[k] = stride[k + 1] * shape[k + 1];
        }
        for (flat, &v) in self.values.iter().enumerate() {
            for k in 0..m {
                let coord = (flat / stride[k]) % shape[k];
                if coord + 1 < shape[k] && self.values[flat + stride[k]] < v {
                    return false;
                }
            }
        }
        true
    }
}

pub(crate) fn validate_axes(axes: &[Vec<f64>]) -> Result<()> {
    for axis in axes {
        if axis.is_empty() {
            return Err(Error::Empty("grid axis"));
        }
        if axis.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) {
            return Err(Error::param("axis times must be finite and nonnegative"));
        }
        if axis.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::param("axis times must be strictly increasing"));
        }
    }
    Ok(())
}

/// Cumulative path of a one-parameter process at the times of `axis`, built
/// from independent increments between consecutive times.
pub(crate) fn axis_path<F>(axis: &[f64], rng: &mut StreamRng, mut increment: F) -> Vec<f64>
where
    F: FnMut(f64, &mut StreamRng) -> f64,
{
    let mut prev = 0.0;
    let mut acc = 0.0;
    axis.iter()
        .map(|&t| {
            acc += increment(t - prev, rng);
            prev = t;
            acc
        })
        .collect()
}

/// `P{N(t) = n} = e^{-Λ·t} (Λ·t)^n / n!`.
pub fn mpp_pmf(n: u64, rates: &RateVector, t: &TimePoint) -> Result<f64> {
    Ok(poisson_pmf(n, rates.dot(t)?))
}

/// Samples `N` on the product lattice of `axes`, one child stream per axis.
pub fn mpp_sample_grid(rates: &RateVector, axes: &[Vec<f64>], seed: u64) -> Result<GridPath> {
    check_dim(rates.dim(), axes.len())?;
    validate_axes(axes)?;
    let paths: Vec<Vec<f64>> = axes
        .iter()
        .zip(rates.as_slice())
        .enumerate()
        .map(|(k, (axis, &lambda))| {
            let mut rng = rng::stream(seed, tags::MPP_GRID, k as u64);
            axis_path(axis, &mut rng, |dt, rng| rng::poisson(rng, lambda * dt) as f64)
        })
        .collect();
    Ok(GridPath::from_axis_paths(
        axes.to_vec(),
        &paths,
        SeedRecord::new(seed, tags::MPP_GRID),
    ))
}

/// Draws of `N(t)`.
pub fn mpp_sample(rates: &RateVector, t: &TimePoint, n_draws: usize, seed: u64) -> Result<Vec<f64>> {
    let mean = rates.dot(t)?;
    let d = PoissonSampler::new(mean);
    Ok(rng::draw_batch(n_draws, seed, tags::MPP_GRID, |rng| {
        d.sample(rng) as f64
    }))
}

/// `Cov(N(s), N(t)) = Σ_k λ_k min{s_k, t_k}`.
pub fn mpp_covariance(rates: &RateVector, s: &TimePoint, t: &TimePoint) -> Result<f64> {
    rates.dot(&s.min(t)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn rv(v: &[f64]) -> RateVector {
        RateVector::new(v.to_vec()).unwrap()
    }

    fn tp(v: &[f64]) -> TimePoint {
        TimePoint::new(v.to_vec()).unwrap()
    }

    #[test]
    fn pmf_examples() {
        assert_eq!(mpp_pmf(0, &rv(&[1.0, 2.0]), &tp(&[0.0, 0.0])).unwrap(), 1.0);
        assert_relative_eq!(
            mpp_pmf(1, &rv(&[1.0, 2.0]), &tp(&[1.0, 1.0])).unwrap(),
            3.0 * (-3.0f64).exp(),
            max_relative = 1e-14
        );
        let want = (-1.0f64).exp() / 120.0;
        assert_relative_eq!(
            mpp_pmf(5, &rv(&[0.5]), &tp(&[2.0])).unwrap(),
            want,
            max_relative = 1e-13
        );
        assert!(matches!(
            mpp_pmf(0, &rv(&[1.0]), &tp(&[1.0, 1.0])),
            Err(Error::DimensionMismatch { expected: 1, found: 2 })
        ));
    }

    #[test]
    fn covariance_examples() {
        let r = rv(&[1.0, 2.0]);
        assert_eq!(mpp_covariance(&r, &tp(&[0.0, 0.0]), &tp(&[0.0, 0.0])).unwrap(), 0.0);
        assert_eq!(mpp_covariance(&r, &tp(&[1.0, 3.0]), &tp(&[2.0, 1.0])).unwrap(), 3.0);
        let t = tp(&[1.5, 0.25]);
        assert_eq!(mpp_covariance(&r, &t, &t).unwrap(), r.dot(&t).unwrap());
    }

    #[test]
    fn validation() {
        assert!(RateVector::new(vec![]).is_err());
        assert!(RateVector::new(vec![1.0, 0.0]).is_err());
        assert!(TimePoint::new(vec![-1.0]).is_err());
        assert!(mpp_sample_grid(&rv(&[1.0]), &[vec![]], 0).is_err());
        assert!(mpp_sample_grid(&rv(&[1.0]), &[vec![1.0, 1.0]], 0).is_err());
    }

    #[test]
    fn origin_grid_is_zero() {
        let g = mpp_sample_grid(&rv(&[1.0, 3.0]), &[vec![0.0], vec![0.0]], 5).unwrap();
        assert_eq!(g.values, vec![0.0]);
    }

    #[test]
    fn grid_paths_are_monotone_and_additive() {
        let axes = vec![vec![0.0, 0.5, 1.0, 2.0], vec![0.0, 1.0, 3.0]];
        for seed in 0..50 {
            let g = mpp_sample_grid(&rv(&[2.0, 1.0]), &axes, seed).unwrap();
            assert!(g.is_monotone());
            assert_eq!(g.get(&[0, 0]), 0.0);
            // N(t1, t2) = N(t1, 0) + N(0, t2) - N(0, 0)
            for i in 0..4 {
                for j in 0..3 {
                    assert_eq!(g.get(&[i, j]), g.get(&[i, 0]) + g.get(&[0, j]));
                }
            }
        }
    }

    #[test]
    fn grid_sampling_is_reproducible() {
        let axes = vec![vec![0.1, 0.2], vec![1.0]];
        let a = mpp_sample_grid(&rv(&[1.0, 1.0]), &axes, 9).unwrap();
        let b = mpp_sample_grid(&rv(&[1.0, 1.0]), &axes, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.seed.root, 9);
    }

    #[test]
    fn monotone_detection() {
        let g = GridPath {
            axes: vec![vec![0.0, 1.0], vec![0.0, 1.0]],
            values: vec![0.0, 1.0, 2.0, 1.0],
            seed: SeedRecord::new(0, 0),
        };
        assert!(!g.is_monotone());
    }

    #[test]
    fn time_point_order() {
        assert!(tp(&[1.0, 2.0]).precedes(&tp(&[1.0, 3.0])));
        assert!(!tp(&[1.0, 2.0]).precedes(&tp(&[0.5, 3.0])));
        assert!(tp(&[1.0, 2.0]).minus(&tp(&[0.5, 3.0])).is_err());
    }
}
