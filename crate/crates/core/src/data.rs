//! Shared data carriers: jump keys, sample batches, lattice pmfs and CF tables.

use std::cmp::Ordering;
use std::fmt;

use num_complex::Complex64;
use serde::ser::SerializeSeq;
use serde::{Deserialize, Serialize, Serializer};

use crate::special_fn::poisson_pmf;

/// A nonzero jump size used as a map key (total order on `f64`).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Jump(pub f64);

impl Jump {
    pub fn value(self) -> f64 {
        self.0
    }

    /// The jump as an integer, if it is one.
    pub fn as_integer(self) -> Option<i64> {
        let v = self.0;
        (v.fract() == 0.0 && v.abs() < 9.0e15).then_some(v as i64)
    }
}

impl PartialEq for Jump {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Jump {}

impl PartialOrd for Jump {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Jump {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl fmt::Display for Jump {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Metadata that reproduces a batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchMeta {
    pub seed: u64,
    pub n: usize,
    pub process: String,
    pub params: serde_json::Value,
}

/// i.i.d. draws of a scalar quantity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleBatch {
    pub meta: BatchMeta,
    #[serde(serialize_with = "serialize_values")]
    pub values: Vec<f64>,
}

fn serialize_values<S: Serializer>(values: &[f64], s: S) -> Result<S::Ok, S::Error> {
    let integer = values.iter().all(|v| v.fract() == 0.0 && v.abs() < 9.0e15);
    let mut seq = s.serialize_seq(Some(values.len()))?;
    for v in values {
        if integer {
            seq.serialize_element(&(*v as i64))?;
        } else {
            seq.serialize_element(v)?;
        }
    }
    seq.end()
}

impl SampleBatch {
    pub fn new(process: &str, params: serde_json::Value, seed: u64, values: Vec<f64>) -> Self {
        Self {
            meta: BatchMeta {
                seed,
                n: values.len(),
                process: process.to_string(),
                params,
            },
            values,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// True when every draw is an integer (lattice data).
    pub fn is_integer(&self) -> bool {
        self.values.iter().all(|v| v.fract() == 0.0 && v.abs() < 9.0e15)
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        let n = self.values.len() as f64;
        let m = self.mean();
        self.values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0)
    }

    pub fn stderr_mean(&self) -> f64 {
        (self.variance() / self.values.len() as f64).sqrt()
    }
}

/// Probability masses on the contiguous integer range
/// `offset ..= offset + probs.len() - 1`, with the mass left outside recorded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticePmf {
    pub offset: i64,
    pub probs: Vec<f64>,
    pub truncation_mass: f64,
}

impl LatticePmf {
    pub fn point(at: i64) -> Self {
        Self {
            offset: at,
            probs: vec![1.0],
            truncation_mass: 0.0,
        }
    }

    /// Poisson(mean) on `0..=K`, with `K` the first index whose upper tail is
    /// at most `tail`.
    pub fn poisson(mean: f64, tail: f64) -> Self {
        if mean <= 0.0 {
            return Self::point(0);
        }
        let mut probs = Vec::new();
        let mut cum = 0.0;
        let mut k = 0u64;
        loop {
            let p = poisson_pmf(k, mean);
            probs.push(p);
            cum += p;
            if (k as f64) > mean && 1.0 - cum <= tail {
                break;
            }
            k += 1;
        }
        Self {
            offset: 0,
            probs,
            truncation_mass: (1.0 - cum).max(0.0),
        }
    }

    pub fn min(&self) -> i64 {
        self.offset
    }

    pub fn max(&self) -> i64 {
        self.offset + self.probs.len() as i64 - 1
    }

    pub fn prob(&self, n: i64) -> f64 {
        if n < self.min() || n > self.max() {
            0.0
        } else {
            self.probs[(n - self.offset) as usize]
        }
    }

    pub fn total_mass(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .map(move |(i, &p)| (self.offset + i as i64, p))
    }

    /// Law of `j * X` for a nonzero integer `j`.
    pub fn scaled(&self, j: i64) -> Self {
        assert!(j != 0, "scale must be nonzero");
        let (lo, hi) = if j > 0 {
            (self.min() * j, self.max() * j)
        } else {
            (self.max() * j, self.min() * j)
        };
        let mut probs = vec![0.0; (hi - lo + 1) as usize];
        for (n, p) in self.iter() {
            probs[(n * j - lo) as usize] += p;
        }
        Self {
            offset: lo,
            probs,
            truncation_mass: self.truncation_mass,
        }
    }

    /// Law of the sum of independent variables with laws `self` and `other`.
    pub fn convolve(&self, other: &Self) -> Self {
        let mut probs = vec![0.0; self.probs.len() + other.probs.len() - 1];
        for (i, &a) in self.probs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (k, &b) in other.probs.iter().enumerate() {
                probs[i + k] += a * b;
            }
        }
        let t1 = self.truncation_mass;
        let t2 = other.truncation_mass;
        Self {
            offset: self.offset + other.offset,
            probs,
            truncation_mass: t1 + t2 - t1 * t2,
        }
    }

    /// Table of `f(n)` for `lo <= n <= hi`; the mass missing from the table
    /// is recorded as truncation mass.
    pub fn tabulate(lo: i64, hi: i64, mut f: impl FnMut(i64) -> crate::Result<f64>) -> crate::Result<Self> {
        assert!(lo <= hi, "empty range");
        let probs = (lo..=hi).map(&mut f).collect::<crate::Result<Vec<f64>>>()?;
        let total: f64 = probs.iter().sum();
        Ok(Self {
            offset: lo,
            probs,
            truncation_mass: (1.0 - total).max(0.0),
        })
    }

    pub fn mean(&self) -> f64 {
        self.iter().map(|(n, p)| n as f64 * p).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CfRow {
    pub u: f64,
    pub re: f64,
    pub im: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
}

/// Characteristic-function values on a frequency grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CfTable {
    pub rows: Vec<CfRow>,
}

impl CfTable {
    pub fn exact(u_grid: &[f64], f: impl Fn(f64) -> Complex64) -> Self {
        Self {
            rows: u_grid
                .iter()
                .map(|&u| {
                    let z = f(u);
                    CfRow {
                        u,
                        re: z.re,
                        im: z.im,
                        radius: None,
                    }
                })
                .collect(),
        }
    }

    pub fn value(&self, i: usize) -> Complex64 {
        Complex64::new(self.rows[i].re, self.rows[i].im)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}
