//! Seeded random streams.
//!
//! Every random quantity is drawn from a ChaCha8 stream addressed by
//! `(root seed, tag, index)`. The key is `splitmix64(seed ^ splitmix64(tag))`
//! and `index` selects the ChaCha stream, so draw `i` of a batch never depends
//! on how many threads generated the batch.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub type StreamRng = ChaCha8Rng;

/// Human-readable description of the splitting rule, stored with every artifact.
pub const SPLIT_RULE: &str = "chacha8(key=splitmix64(seed^splitmix64(tag)), stream=index)";

pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn stream(seed: u64, tag: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(tag)));
    rng.set_stream(index);
    rng
}

/// Seed bookkeeping carried by grid paths and batches.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedRecord {
    pub root: u64,
    pub tag: u64,
    pub rule: String,
}

impl SeedRecord {
    pub fn new(root: u64, tag: u64) -> Self {
        Self {
            root,
            tag,
            rule: SPLIT_RULE.to_string(),
        }
    }
}

// Stream tags. Distinct samplers sharing a root seed stay independent.
pub(crate) mod tags {
    pub const MPP_GRID: u64 = 0x1001;
    pub const GMSP: u64 = 0x2001;
    pub const GMSP_PERAXIS: u64 = 0x2002;
    pub const GMSP_EQUALRATE: u64 = 0x2003;
    pub const GMSP_ARRAY: u64 = 0x2004;
    pub const INTEGRAL: u64 = 0x3001;
    pub const INTEGRAL_PERAXIS: u64 = 0x3002;
    pub const UNIFORM_COMPOUND: u64 = 0x3003;
    pub const ALT: u64 = 0x4001;
    pub const ALT_ARRAY: u64 = 0x4002;
    pub const STABLE: u64 = 0x5001;
    pub const INV_STABLE: u64 = 0x5002;
    pub const FRAC_SKELLAM: u64 = 0x5003;
}

/// Draws `n` values, value `i` from `stream(seed, tag, i)`. Runs on the
/// current rayon pool; the output is independent of the pool size.
/// Negative zero is normalised to `0.0` (an empty `f64` sum is `-0.0`).
pub fn draw_batch<F>(n: usize, seed: u64, tag: u64, draw: F) -> Vec<f64>
where
    F: Fn(&mut StreamRng) -> f64 + Sync,
{
    (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, tag, i);
            draw(&mut rng) + 0.0
        })
        .collect()
}

/// Poisson draw that accepts a zero mean.
pub fn poisson<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    let d = Poisson::new(mean).expect("finite positive Poisson mean");
    d.sample(rng) as u64
}

/// Precomputed Poisson sampler for repeated draws with the same mean.
#[derive(Debug, Clone)]
pub struct PoissonSampler(Option<Poisson<f64>>);

impl PoissonSampler {
    pub fn new(mean: f64) -> Self {
        if mean > 0.0 {
            Self(Some(Poisson::new(mean).expect("finite positive Poisson mean")))
        } else {
            Self(None)
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match &self.0 {
            Some(d) => d.sample(rng) as u64,
            None => 0,
        }
    }
}

/// Finite discrete law on arbitrary real values, sampled by inversion.
#[derive(Debug, Clone, PartialEq)]
pub struct Categorical {
    values: Vec<f64>,
    cumulative: Vec<f64>,
}

impl Categorical {
    /// Builds the law from `(value, weight)` pairs; weights are normalised.
    pub fn from_weights(pairs: &[(f64, f64)]) -> Option<Self> {
        let total: f64 = pairs.iter().map(|p| p.1).sum();
        if pairs.is_empty() || !(total > 0.0) || pairs.iter().any(|p| p.1 < 0.0) {
            return None;
        }
        let mut acc = 0.0;
        let mut cumulative = Vec::with_capacity(pairs.len());
        for &(_, w) in pairs {
            acc += w / total;
            cumulative.push(acc);
        }
        *cumulative.last_mut().unwrap() = 1.0;
        Some(Self {
            values: pairs.iter().map(|p| p.0).collect(),
            cumulative,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn probabilities(&self) -> Vec<f64> {
        let mut prev = 0.0;
        self.cumulative
            .iter()
            .map(|&c| {
                let p = c - prev;
                prev = c;
                p
            })
            .collect()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let idx = self.cumulative.partition_point(|&c| c <= u);
        self.values[idx.min(self.values.len() - 1)]
    }

    /// Sum of `count` independent draws, via multinomial category counts
    /// (sequential binomials), so the cost does not grow with `count`.
    pub fn sample_sum<R: Rng + ?Sized>(&self, count: u64, rng: &mut R) -> f64 {
        if count == 1 {
            return self.sample(rng);
        }
        let probs = self.probabilities();
        let mut rest = count;
        let mut mass = 1.0;
        let mut sum = 0.0;
        let last = probs.len() - 1;
        for (i, (&v, &p)) in self.values.iter().zip(&probs).enumerate() {
            if rest == 0 {
                break;
            }
            let c = if i == last {
                rest
            } else {
                let q = if mass > 0.0 { (p / mass).clamp(0.0, 1.0) } else { 1.0 };
                Binomial::new(rest, q).expect("probability in [0, 1]").sample(rng)
            };
            sum += v * c as f64;
            rest -= c;
            mass -= p;
        }
        sum
    }
}
