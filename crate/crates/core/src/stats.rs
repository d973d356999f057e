//! Statistical checks used to compare samplers with exact laws and with
//! each other.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::data::{CfRow, CfTable, Jump, LatticePmf};
use crate::error::{Error, Result};

/// Default minimum expected count per chi-square bin.
pub const MIN_EXPECTED: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub identity: String,
    pub statistic: f64,
    pub p_value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub critical: Option<f64>,
    pub n: usize,
    pub seed: u64,
    /// Significance level for p-value tests; absent for critical comparisons.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub level: Option<f64>,
    pub verdict: Verdict,
}

impl TestReport {
    /// Passes when `p_value > level`.
    pub fn from_p_value(identity: &str, statistic: f64, p_value: f64, n: usize, seed: u64, level: f64) -> Self {
        let p_value = p_value.clamp(0.0, 1.0);
        Self {
            identity: identity.to_string(),
            statistic,
            p_value: Some(p_value),
            critical: None,
            n,
            seed,
            level: Some(level),
            verdict: Verdict::from_bool(p_value > level),
        }
    }

    /// Passes when `statistic <= critical`.
    pub fn from_critical(identity: &str, statistic: f64, critical: f64, n: usize, seed: u64) -> Self {
        Self {
            identity: identity.to_string(),
            statistic,
            p_value: None,
            critical: Some(critical),
            n,
            seed,
            level: None,
            verdict: Verdict::from_bool(statistic <= critical),
        }
    }

    pub fn named(mut self, identity: &str) -> Self {
        self.identity = identity.to_string();
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict.passed()
    }
}

fn nonempty(values: &[f64], what: &'static str) -> Result<()> {
    if values.is_empty() {
        return Err(Error::Empty(what));
    }
    Ok(())
}

fn as_integers(values: &[f64]) -> Result<Vec<i64>> {
    values
        .iter()
        .map(|&v| {
            Jump(v)
                .as_integer()
                .ok_or_else(|| Error::Domain(format!("lattice test needs integer data, got {v}")))
        })
        .collect()
}

/// `(1/N) Σ e^{iuX_r}` on `u_grid`, each row carrying the radius `4/√N`.
pub fn empirical_cf(values: &[f64], u_grid: &[f64]) -> Result<CfTable> {
    nonempty(values, "batch")?;
    let n = values.len() as f64;
    let radius = 4.0 / n.sqrt();
    let rows = u_grid
        .iter()
        .map(|&u| {
            let (mut re, mut im) = (0.0, 0.0);
            for &x in values {
                let (s, c) = (u * x).sin_cos();
                re += c;
                im += s;
            }
            CfRow {
                u,
                re: re / n,
                im: im / n,
                radius: Some(radius),
            }
        })
        .collect();
    Ok(CfTable { rows })
}

/// Largest `|emp(u) - exact(u)|` over the table, compared against its radius.
pub fn cf_gap_report(
    identity: &str,
    table: &CfTable,
    exact: impl Fn(f64) -> Complex64,
    seed: u64,
    n: usize,
) -> TestReport {
    let mut worst = 0.0_f64;
    let mut radius = f64::INFINITY;
    for (i, row) in table.rows.iter().enumerate() {
        worst = worst.max((table.value(i) - exact(row.u)).norm());
        if let Some(r) = row.radius {
            radius = radius.min(r);
        }
    }
    TestReport::from_critical(identity, worst, radius, n, seed)
}

fn chi2_sf(stat: f64, dof: usize) -> f64 {
    if dof == 0 {
        return 1.0;
    }
    match ChiSquared::new(dof as f64) {
        Ok(d) => d.sf(stat),
        Err(_) => f64::NAN,
    }
}

/// Groups consecutive cells left to right until each group's weight reaches
/// `min`; a light final group is folded into its predecessor. Returns the
/// cell index boundaries of each group.
fn merge_cells(weights: &[f64], min: f64) -> Vec<std::ops::Range<usize>> {
    let mut groups = Vec::new();
    let mut start = 0;
    let mut acc = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        acc += w;
        if acc >= min {
            groups.push(start..i + 1);
            start = i + 1;
            acc = 0.0;
        }
    }
    if start < weights.len() {
        match groups.last_mut() {
            Some(last) => last.end = weights.len(),
            None => groups.push(0..weights.len()),
        }
    }
    groups
}

/// Pearson chi-square of an integer batch against a lattice pmf. Draws
/// below or above the pmf's support count towards the outermost cells, and
/// the truncation mass is added to the last cell.
pub fn chi2_gof(values: &[f64], pmf: &LatticePmf, min_expected: f64, level: f64) -> Result<TestReport> {
    nonempty(values, "batch")?;
    let ints = as_integers(values)?;
    let n = values.len() as f64;
    let (lo, hi) = (pmf.min(), pmf.max());
    let mut observed = vec![0.0; pmf.probs.len()];
    for k in ints {
        observed[(k.clamp(lo, hi) - lo) as usize] += 1.0;
    }
    let mut expected: Vec<f64> = pmf.probs.iter().map(|p| p * n).collect();
    if let Some(last) = expected.last_mut() {
        *last += pmf.truncation_mass * n;
    }
    let total: f64 = expected.iter().sum();
    if total < min_expected {
        return Err(Error::InsufficientMass(total));
    }
    let groups = merge_cells(&expected, min_expected);
    let mut stat = 0.0;
    for g in &groups {
        let o: f64 = observed[g.clone()].iter().sum();
        let e: f64 = expected[g.clone()].iter().sum();
        stat += (o - e) * (o - e) / e;
    }
    if groups.len() == 1 {
        stat = 0.0;
    }
    let p = chi2_sf(stat, groups.len() - 1);
    Ok(TestReport::from_p_value("chi2-gof", stat, p, values.len(), 0, level))
}

fn tally(values: &[f64]) -> BTreeMap<Jump, f64> {
    let mut map = BTreeMap::new();
    for &v in values {
        // -0.0 and 0.0 must share a cell
        *map.entry(Jump(v + 0.0)).or_insert(0.0) += 1.0;
    }
    map
}

/// Two-sample chi-square homogeneity test for discrete batches. Cells are
/// the distinct observed values in increasing order, merged until each
/// sample's expected count under the pooled law reaches `min_expected`.
pub fn chi2_two_sample(a: &[f64], b: &[f64], min_expected: f64, level: f64) -> Result<TestReport> {
    nonempty(a, "first batch")?;
    nonempty(b, "second batch")?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let ta = tally(a);
    let tb = tally(b);
    let keys: Vec<Jump> = {
        let mut k: Vec<Jump> = ta.keys().chain(tb.keys()).copied().collect();
        k.sort();
        k.dedup();
        k
    };
    let ca: Vec<f64> = keys.iter().map(|k| ta.get(k).copied().unwrap_or(0.0)).collect();
    let cb: Vec<f64> = keys.iter().map(|k| tb.get(k).copied().unwrap_or(0.0)).collect();
    // expected count in the smaller sample under the pooled law
    let share = na.min(nb) / (na + nb);
    let weights: Vec<f64> = ca.iter().zip(&cb).map(|(x, y)| (x + y) * share).collect();
    let total: f64 = weights.iter().sum();
    if total < min_expected {
        return Err(Error::InsufficientMass(total));
    }
    let groups = merge_cells(&weights, min_expected);
    let (k1, k2) = ((nb / na).sqrt(), (na / nb).sqrt());
    let mut stat = 0.0;
    for g in &groups {
        let x: f64 = ca[g.clone()].iter().sum();
        let y: f64 = cb[g.clone()].iter().sum();
        let d = k1 * x - k2 * y;
        stat += d * d / (x + y);
    }
    if groups.len() == 1 {
        stat = 0.0;
    }
    let p = chi2_sf(stat, groups.len() - 1);
    Ok(TestReport::from_p_value(
        "chi2-two-sample",
        stat,
        p,
        a.len() + b.len(),
        0,
        level,
    ))
}

/// Two-sample KS statistics `(D, D+, D-)` with `D+ = sup (F_a - F_b)`.
pub fn ks_statistics(a: &[f64], b: &[f64]) -> Result<(f64, f64, f64)> {
    nonempty(a, "first batch")?;
    nonempty(b, "second batch")?;
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let (na, nb) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0, 0);
    let (mut plus, mut minus) = (0.0_f64, 0.0_f64);
    while i < xs.len() && j < ys.len() {
        let v = if xs[i].total_cmp(&ys[j]).is_le() { xs[i] } else { ys[j] };
        while i < xs.len() && xs[i] == v {
            i += 1;
        }
        while j < ys.len() && ys[j] == v {
            j += 1;
        }
        let d = i as f64 / na - j as f64 / nb;
        plus = plus.max(d);
        minus = minus.max(-d);
    }
    Ok((plus.max(minus), plus, minus))
}

/// Asymptotic Kolmogorov tail `Q(λ) = 2 Σ (-1)^{k-1} e^{-2k²λ²}`.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=200 {
        let term = sign * (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        sum += term;
        if term.abs() < 1e-16 * sum.abs().max(1e-300) {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Two-sample Kolmogorov-Smirnov test with Stephens' small-sample
/// adjustment of the asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64], level: f64) -> Result<TestReport> {
    let (d, _, _) = ks_statistics(a, b)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let en = (na * nb / (na + nb)).sqrt();
    let p = kolmogorov_sf((en + 0.12 + 0.11 / en) * d);
    Ok(TestReport::from_p_value(
        "ks-two-sample",
        d,
        p,
        a.len() + b.len(),
        0,
        level,
    ))
}

/// Total variation between the empirical law of an integer batch and a
/// lattice pmf; draws off the support and the pmf's truncation mass count
/// in full.
pub fn tv_distance(values: &[f64], pmf: &LatticePmf) -> Result<f64> {
    nonempty(values, "batch")?;
    let ints = as_integers(values)?;
    let n = values.len() as f64;
    let (lo, hi) = (pmf.min(), pmf.max());
    let mut counts = vec![0.0; pmf.probs.len()];
    let mut outside = 0.0;
    for k in ints {
        if (lo..=hi).contains(&k) {
            counts[(k - lo) as usize] += 1.0;
        } else {
            outside += 1.0;
        }
    }
    let inside: f64 = counts.iter().zip(&pmf.probs).map(|(c, p)| (c / n - p).abs()).sum();
    Ok(0.5 * (inside + outside / n + pmf.truncation_mass))
}

/// Mean check: passes when `|mean - expected| <= k * stderr`.
pub fn mean_gap(identity: &str, values: &[f64], expected: f64, k: f64, seed: u64) -> Result<TestReport> {
    nonempty(values, "batch")?;
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    let se = (var / n).sqrt();
    Ok(gap_report(identity, mean - expected, se, k, values.len(), seed))
}

/// Variance check with the large-sample standard error
/// `sqrt((m4 - s^4) / N)` of the sample variance.
pub fn variance_gap(identity: &str, values: &[f64], expected: f64, k: f64, seed: u64) -> Result<TestReport> {
    nonempty(values, "batch")?;
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let m2 = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let m4 = values.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
    let var = m2 * n / (n - 1.0).max(1.0);
    let se = ((m4 - m2 * m2).max(0.0) / n).sqrt();
    Ok(gap_report(identity, var - expected, se, k, values.len(), seed))
}

fn gap_report(identity: &str, gap: f64, se: f64, k: f64, n: usize, seed: u64) -> TestReport {
    // statistic in stderr units; an exact zero gap passes even when se = 0
    let z = if gap == 0.0 { 0.0 } else { gap.abs() / se };
    TestReport::from_critical(identity, z, k, n, seed)
}
