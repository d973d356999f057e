//! The `skellam-lab` command-line front end.
//!
//! Every subcommand writes one artifact, CSV (header row, `\n` endings) or
//! JSON. JSON artifacts carry their full parameter metadata; CSV artifacts
//! written to a file get a `<out>.meta.json` sidecar holding the same.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::altskellam::{alt_array_sample, alt_lattice_pmf, alt_pgf, alt_sample, AltSpec, JumpTimes, KroneckerRule};
use crate::data::{CfTable, Jump, LatticePmf, SampleBatch};
use crate::error::{Error, Result};
use crate::fractional::{
    frac_skellam_pmf, frac_skellam_sample, inv_stable_marginal_sample, stable_subordinator_sample, FracSkellamSpec,
    StableIndex,
};
use crate::gmsp::{
    gmsp_array_sample, gmsp_cf, gmsp_lattice_pmf, gmsp_sample, msp_pmf, ConstantRateRule, JumpSpec, TriangularArraySpec,
};
use crate::integrals::{integral_cf_gmsp, integral_cf_mpp, integral_sample, IntegrandProcess, RectDomain};
use crate::mpp::{mpp_pmf, mpp_sample, RateVector, TimePoint};
use crate::special_fn::SeriesControl;
use crate::stats::{empirical_cf, tv_distance};
use crate::verify;

/// Environment variable capping the worker pool size.
pub const THREADS_ENV: &str = "SKELLAM_LAB_THREADS";

#[derive(Debug, Parser)]
#[command(name = "skellam-lab", version, about = "Multiparameter Skellam process laboratory")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw i.i.d. samples of a process at a fixed time.
    Simulate(SimulateArgs),
    /// Tabulate a probability mass function.
    Pmf(PmfArgs),
    /// Tabulate a characteristic function, exact or empirical.
    Cf(CfArgs),
    /// Sample a lattice Riemann integral and its closed-form CF.
    Integral(IntegralArgs),
    /// Total variation of a triangular array against its limit, per scale.
    Converge(ConvergeArgs),
    /// Run a named statistical identity check.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProcessKind {
    Mpp,
    Gmsp,
    Msp,
    Alt,
    FracSkellam,
    Stable,
    InvStable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ProcessArgs {
    #[arg(long, value_enum)]
    pub process: ProcessKind,
    /// Jump spec `j:r_1,...,r_M;...` (decimal point mandatory in rates).
    #[arg(long, allow_hyphen_values = true)]
    pub jumps: Option<String>,
    /// MPP rates `r_1,...,r_M`.
    #[arg(long)]
    pub rates: Option<String>,
    /// Time point `t_1,...,t_M`, or a scalar time.
    #[arg(long)]
    pub t: Option<String>,
    /// First-component rates (broadcast to the dimension of `--t`).
    #[arg(long)]
    pub l1: Option<String>,
    /// Second-component rates (broadcast to the dimension of `--t`).
    #[arg(long)]
    pub l2: Option<String>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub t1: Option<f64>,
    #[arg(long)]
    pub t2: Option<f64>,
    /// Per-jump times `j:t;...` for the alternate process.
    #[arg(long, allow_hyphen_values = true)]
    pub times: Option<String>,
    /// Absolute series tolerance.
    #[arg(long, default_value_t = 1e-14)]
    pub tol: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_terms: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OutputArgs {
    /// Output path; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub process: ProcessArgs,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PmfArgs {
    #[command(flatten)]
    pub process: ProcessArgs,
    /// Tabulate `|n| <= nmax` (or `0..=nmax` for counting processes).
    #[arg(long, default_value_t = 20)]
    pub nmax: i64,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CfArgs {
    #[command(flatten)]
    pub process: ProcessArgs,
    /// Comma-separated evaluation points.
    #[arg(long, allow_hyphen_values = true)]
    pub u: Option<String>,
    /// Evaluation grid `start:stop:step`.
    #[arg(long, allow_hyphen_values = true)]
    pub u_grid: Option<String>,
    /// Estimate from `--n` draws instead of the closed form.
    #[arg(long)]
    pub empirical: bool,
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct IntegralArgs {
    #[command(flatten)]
    pub process: ProcessArgs,
    /// Lattice points per axis.
    #[arg(long, default_value_t = 512)]
    pub r: usize,
    #[arg(long, allow_hyphen_values = true, default_value = "0.25,0.5,1")]
    pub u: String,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ConvergeArgs {
    /// `gmsp` (constant-rate rule) or `alt` (Kronecker rule).
    #[command(flatten)]
    pub process: ProcessArgs,
    #[arg(long, default_value = "10,100,1000")]
    pub scales: String,
    #[arg(long, default_value_t = 100_000)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(long)]
    pub identity: String,
    /// Draw count; the identity's default when absent.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses arguments, runs the command and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return 2;
    }
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Error::param(format!("{THREADS_ENV} must be a positive integer, got {raw:?}")))?;
    // A second initialisation in the same process keeps the first pool.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Pmf(a) => cmd_pmf(a),
        Command::Cf(a) => cmd_cf(a),
        Command::Integral(a) => cmd_integral(a),
        Command::Converge(a) => cmd_converge(a),
        Command::Verify(a) => cmd_verify(a),
    }
}

// ---- parsing ----

fn parse_real(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::param(format!("not a number: {s:?}")))
}

/// Comma-separated reals.
pub fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',').map(parse_real).collect()
}

/// `j:r_1,...,r_M` groups joined by `;`.
pub fn parse_jumps(s: &str) -> Result<Vec<(f64, Vec<f64>)>> {
    s.split(';')
        .filter(|g| !g.trim().is_empty())
        .map(|group| {
            let (j, rates) = group
                .split_once(':')
                .ok_or_else(|| Error::param(format!("jump group {group:?} must look like j:r1,r2")))?;
            let rates: Vec<&str> = rates.split(',').collect();
            if let Some(bad) = rates.iter().find(|r| !r.contains('.')) {
                return Err(Error::param(format!("rate {bad:?} needs a decimal point")));
            }
            Ok((
                parse_real(j)?,
                rates.iter().map(|r| parse_real(r)).collect::<Result<_>>()?,
            ))
        })
        .collect()
}

/// `j:t` pairs joined by `;`.
pub fn parse_times(s: &str) -> Result<Vec<(f64, f64)>> {
    s.split(';')
        .filter(|g| !g.trim().is_empty())
        .map(|pair| {
            let (j, t) = pair
                .split_once(':')
                .ok_or_else(|| Error::param(format!("time entry {pair:?} must look like j:t")))?;
            Ok((parse_real(j)?, parse_real(t)?))
        })
        .collect()
}

/// `start:stop:step`, inclusive of `stop` up to rounding.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<f64> = s.split(':').map(parse_real).collect::<Result<_>>()?;
    let [start, stop, step] = parts[..] else {
        return Err(Error::param(format!("grid {s:?} must look like start:stop:step")));
    };
    if !(step > 0.0) || stop < start {
        return Err(Error::param(format!("grid {s:?} needs step > 0 and stop >= start")));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=count).map(|i| start + i as f64 * step).collect())
}

fn required<'a, T>(v: &'a Option<T>, flag: &str) -> Result<&'a T> {
    v.as_ref()
        .ok_or_else(|| Error::param(format!("--{flag} is required for this process")))
}

fn require_draws(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::param("--n must be at least 1"));
    }
    Ok(())
}

impl ProcessArgs {
    fn ctl(&self) -> Result<SeriesControl> {
        SeriesControl::new(self.tol, self.max_terms)
    }

    fn time_point(&self) -> Result<TimePoint> {
        TimePoint::new(parse_list(required(&self.t, "t")?)?)
    }

    fn scalar_time(&self) -> Result<f64> {
        let t = parse_list(required(&self.t, "t")?)?;
        match t[..] {
            [x] => Ok(x),
            _ => Err(Error::param("--t must be a single time for this process")),
        }
    }

    fn mpp_rates(&self) -> Result<RateVector> {
        RateVector::new(parse_list(required(&self.rates, "rates")?)?)
    }

    fn jump_spec(&self) -> Result<JumpSpec> {
        let groups = parse_jumps(required(&self.jumps, "jumps")?)?;
        JumpSpec::new(
            groups
                .into_iter()
                .map(|(j, r)| RateVector::new(r).map(|r| (j, r)))
                .collect::<Result<Vec<_>>>()?,
        )
    }

    fn broadcast(&self, flag: &str, v: &Option<String>, dim: usize) -> Result<RateVector> {
        let r = parse_list(required(v, flag)?)?;
        match r.len() {
            1 => RateVector::uniform(r[0], dim),
            n if n == dim => RateVector::new(r),
            n => Err(Error::DimensionMismatch {
                expected: dim,
                found: n,
            }),
        }
    }

    /// `(λ1, λ2, t)` for the multiparameter Skellam process.
    fn msp(&self) -> Result<(RateVector, RateVector, TimePoint)> {
        let t = self.time_point()?;
        let l1 = self.broadcast("l1", &self.l1, t.dim())?;
        let l2 = self.broadcast("l2", &self.l2, t.dim())?;
        Ok((l1, l2, t))
    }

    fn msp_spec(&self) -> Result<(JumpSpec, TimePoint)> {
        let (l1, l2, t) = self.msp()?;
        Ok((JumpSpec::new([(1.0, l1), (-1.0, l2)])?, t))
    }

    fn alt(&self) -> Result<(AltSpec, JumpTimes)> {
        let groups = parse_jumps(required(&self.jumps, "jumps")?)?;
        let mut pairs = Vec::new();
        for (j, r) in groups {
            match r[..] {
                [rate] => pairs.push((j, rate)),
                _ => {
                    return Err(Error::param(format!(
                        "alternate process takes one rate per jump, got {r:?} for {j}"
                    )))
                }
            }
        }
        let spec = AltSpec::new(pairs)?;
        let times = match (&self.times, &self.t) {
            (Some(s), _) => spec.times(parse_times(s)?)?,
            (None, Some(_)) => spec.constant_times(self.scalar_time()?)?,
            (None, None) => return Err(Error::param("--times or --t is required for the alternate process")),
        };
        Ok((spec, times))
    }

    fn scalar_rate(&self, flag: &str, v: &Option<String>) -> Result<f64> {
        match parse_list(required(v, flag)?)?[..] {
            [x] => Ok(x),
            _ => Err(Error::param(format!("--{flag} must be a single rate for this process"))),
        }
    }

    fn frac(&self) -> Result<(FracSkellamSpec, f64, f64)> {
        let alpha = *required(&self.alpha, "alpha")?;
        let spec = FracSkellamSpec::new(
            self.scalar_rate("l1", &self.l1)?,
            self.scalar_rate("l2", &self.l2)?,
            alpha,
            self.beta.unwrap_or(alpha),
        )?;
        Ok((spec, *required(&self.t1, "t1")?, *required(&self.t2, "t2")?))
    }

    fn stable_index(&self) -> Result<StableIndex> {
        StableIndex::new(*required(&self.alpha, "alpha")?)
    }

    fn sample(&self, n: usize, seed: u64) -> Result<SampleBatch> {
        require_draws(n)?;
        match self.process {
            ProcessKind::Mpp => {
                let (r, t) = (self.mpp_rates()?, self.time_point()?);
                let values = mpp_sample(&r, &t, n, seed)?;
                Ok(SampleBatch::new(
                    "mpp",
                    json!({"rates": r.as_slice(), "t": t.as_slice()}),
                    seed,
                    values,
                ))
            }
            ProcessKind::Gmsp => gmsp_sample(&self.jump_spec()?, &self.time_point()?, n, seed),
            ProcessKind::Msp => {
                let (spec, t) = self.msp_spec()?;
                gmsp_sample(&spec, &t, n, seed)
            }
            ProcessKind::Alt => {
                let (spec, t) = self.alt()?;
                alt_sample(&spec, &t, n, seed)
            }
            ProcessKind::FracSkellam => {
                let (spec, t1, t2) = self.frac()?;
                frac_skellam_sample(&spec, t1, t2, n, seed)
            }
            ProcessKind::Stable => stable_subordinator_sample(self.stable_index()?, self.scalar_time()?, n, seed),
            ProcessKind::InvStable => inv_stable_marginal_sample(self.stable_index()?, self.scalar_time()?, n, seed),
        }
    }

    fn exact_cf(&self, u: f64) -> Result<Complex64> {
        match self.process {
            ProcessKind::Mpp => {
                let mean = self.mpp_rates()?.dot(&self.time_point()?)?;
                Ok((mean * (Complex64::new(0.0, u).exp() - 1.0)).exp())
            }
            ProcessKind::Gmsp => gmsp_cf(&self.jump_spec()?, &self.time_point()?, u),
            ProcessKind::Msp => {
                let (spec, t) = self.msp_spec()?;
                gmsp_cf(&spec, &t, u)
            }
            ProcessKind::Alt => {
                let (spec, t) = self.alt()?;
                alt_pgf(&spec, &t, Complex64::new(0.0, u).exp())
            }
            ProcessKind::FracSkellam | ProcessKind::Stable | ProcessKind::InvStable => {
                Err(Error::param("no closed-form CF for this process; use --empirical"))
            }
        }
    }

    fn lattice_pmf(&self, nmax: i64) -> Result<LatticePmf> {
        if nmax < 0 {
            return Err(Error::param("--nmax must be nonnegative"));
        }
        let ctl = self.ctl()?;
        let pmf = match self.process {
            ProcessKind::Mpp => {
                let (r, t) = (self.mpp_rates()?, self.time_point()?);
                LatticePmf::tabulate(0, nmax, |n| mpp_pmf(n as u64, &r, &t))?
            }
            ProcessKind::Gmsp => restrict(&gmsp_lattice_pmf(&self.jump_spec()?, &self.time_point()?)?, nmax),
            ProcessKind::Msp => {
                let (l1, l2, t) = self.msp()?;
                LatticePmf::tabulate(-nmax, nmax, |n| msp_pmf(n, &l1, &l2, &t))?
            }
            ProcessKind::Alt => {
                let (spec, t) = self.alt()?;
                restrict(&alt_lattice_pmf(&spec, &t)?, nmax)
            }
            ProcessKind::FracSkellam => {
                let (spec, t1, t2) = self.frac()?;
                LatticePmf::tabulate(-nmax, nmax, |n| frac_skellam_pmf(&spec, t1, t2, n, ctl))?
            }
            ProcessKind::Stable | ProcessKind::InvStable => {
                return Err(Error::param("pmf is only defined for lattice-valued processes"))
            }
        };
        Ok(pmf)
    }
}

/// The part of `pmf` on `|n| <= nmax`, with the rest moved to truncation mass.
fn restrict(pmf: &LatticePmf, nmax: i64) -> LatticePmf {
    let lo = pmf.min().max(-nmax);
    let hi = pmf.max().min(nmax);
    if lo > hi {
        return LatticePmf {
            offset: 0,
            probs: vec![0.0],
            truncation_mass: 1.0,
        };
    }
    let probs: Vec<f64> = (lo..=hi).map(|n| pmf.prob(n)).collect();
    let total: f64 = probs.iter().sum();
    LatticePmf {
        offset: lo,
        probs,
        truncation_mass: (1.0 - total).max(0.0),
    }
}

// ---- output ----

fn fmt_value(v: f64, integer: bool) -> String {
    if integer {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

struct Artifact {
    csv: String,
    json: Value,
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::param(format!("cannot write {}: {e}", path.display())))
}

fn emit(output: &OutputArgs, artifact: Artifact) -> Result<()> {
    let json_text = |v: &Value| format!("{}\n", serde_json::to_string_pretty(v).expect("json values serialize"));
    let body = match output.format {
        Format::Csv => artifact.csv,
        Format::Json => json_text(&artifact.json),
    };
    match &output.out {
        Some(path) => {
            write_text(path, &body)?;
            if output.format == Format::Csv {
                let mut meta = artifact.json;
                strip_table(&mut meta);
                let mut side = path.clone().into_os_string();
                side.push(".meta.json");
                write_text(Path::new(&side), &json_text(&meta))?;
            }
            Ok(())
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(body.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Error::param(format!("cannot write to standard output: {e}")))
        }
    }
}

/// Drops the bulky table fields that the CSV body already holds.
fn strip_table(v: &mut Value) {
    if let Value::Object(map) = v {
        for key in ["values", "rows"] {
            map.remove(key);
        }
    }
}

fn command_meta<T: Serialize>(command: &str, args: &T) -> Value {
    json!({"command": command, "args": args, "version": env!("CARGO_PKG_VERSION")})
}

fn batch_csv(batch: &SampleBatch) -> String {
    let integer = batch.is_integer();
    let mut s = String::from("value\n");
    for &v in &batch.values {
        s.push_str(&fmt_value(v, integer));
        s.push('\n');
    }
    s
}

fn cf_csv(table: &CfTable) -> String {
    let with_radius = table.rows.iter().any(|r| r.radius.is_some());
    let mut s = String::from(if with_radius { "u,re,im,radius\n" } else { "u,re,im\n" });
    for r in &table.rows {
        s.push_str(&format!("{},{},{}", r.u, r.re, r.im));
        if with_radius {
            s.push_str(&format!(",{}", r.radius.unwrap_or(f64::NAN)));
        }
        s.push('\n');
    }
    s
}

// ---- commands ----

pub fn cmd_simulate(a: &SimulateArgs) -> Result<()> {
    let batch = a.process.sample(a.n, a.seed)?;
    let mut json = serde_json::to_value(&batch).expect("batch serializes");
    json["meta"]["command"] = command_meta("simulate", a);
    emit(
        &a.output,
        Artifact {
            csv: batch_csv(&batch),
            json,
        },
    )
}

pub fn cmd_pmf(a: &PmfArgs) -> Result<()> {
    let pmf = a.process.lattice_pmf(a.nmax)?;
    let mut csv = String::from("n,probability,truncation_mass\n");
    let mut rows = Vec::new();
    for (n, p) in pmf.iter() {
        csv.push_str(&format!("{n},{p},{}\n", pmf.truncation_mass));
        rows.push(json!({"n": n, "probability": p}));
    }
    let json = json!({
        "meta": command_meta("pmf", a),
        "truncation_mass": pmf.truncation_mass,
        "rows": rows,
    });
    emit(&a.output, Artifact { csv, json })
}

fn u_points(u: &Option<String>, grid: &Option<String>) -> Result<Vec<f64>> {
    match (u, grid) {
        (Some(_), Some(_)) => Err(Error::param("give either --u or --u-grid, not both")),
        (Some(u), None) => parse_list(u),
        (None, Some(g)) => parse_grid(g),
        (None, None) => Err(Error::param("--u or --u-grid is required")),
    }
}

pub fn cmd_cf(a: &CfArgs) -> Result<()> {
    let us = u_points(&a.u, &a.u_grid)?;
    let table = if a.empirical {
        empirical_cf(&a.process.sample(a.n, a.seed)?.values, &us)?
    } else {
        // validate once so closure failures below cannot occur
        a.process.exact_cf(0.0)?;
        CfTable::exact(&us, |u| a.process.exact_cf(u).expect("parameters validated"))
    };
    let json = json!({"meta": command_meta("cf", a), "rows": table.rows});
    emit(
        &a.output,
        Artifact {
            csv: cf_csv(&table),
            json,
        },
    )
}

pub fn cmd_integral(a: &IntegralArgs) -> Result<()> {
    require_draws(a.n)?;
    let p = &a.process;
    let t = p.time_point()?;
    let us = parse_list(&a.u)?;
    let dom = RectDomain::uniform(t.clone(), a.r)?;
    let (process, cf) = match p.process {
        ProcessKind::Mpp => {
            let r = p.mpp_rates()?;
            integral_cf_mpp(&r, &t, 0.0)?;
            let cf = CfTable::exact(&us, |u| integral_cf_mpp(&r, &t, u).expect("dims checked"));
            (IntegrandProcess::Mpp(r), cf)
        }
        ProcessKind::Gmsp | ProcessKind::Msp => {
            let spec = if p.process == ProcessKind::Gmsp {
                p.jump_spec()?
            } else {
                p.msp_spec()?.0
            };
            integral_cf_gmsp(&spec, &t, 0.0)?;
            let cf = CfTable::exact(&us, |u| integral_cf_gmsp(&spec, &t, u).expect("dims checked"));
            (IntegrandProcess::Gmsp(spec), cf)
        }
        _ => return Err(Error::param("integral supports --process mpp, gmsp or msp")),
    };
    let batch = integral_sample(&process, &dom, a.n, a.seed)?;
    let json = json!({
        "meta": command_meta("integral", a),
        "batch": batch,
        "cf": cf.rows,
    });
    emit(
        &a.output,
        Artifact {
            csv: batch_csv(&batch),
            json,
        },
    )
}

pub fn cmd_converge(a: &ConvergeArgs) -> Result<()> {
    require_draws(a.n)?;
    let scales = parse_list(&a.scales)?;
    let mut rows = Vec::new();
    match a.process.process {
        ProcessKind::Gmsp | ProcessKind::Msp => {
            let (spec, t) = if a.process.process == ProcessKind::Gmsp {
                (a.process.jump_spec()?, a.process.time_point()?)
            } else {
                a.process.msp_spec()?
            };
            let limit = gmsp_lattice_pmf(&spec, &t)?;
            let rule = ConstantRateRule::new(spec.clone());
            for &s in &scales {
                if !(s >= 1.0) || s.fract() != 0.0 {
                    return Err(Error::param(format!("array scales must be positive integers, got {s}")));
                }
                let arr = TriangularArraySpec {
                    n: s as usize,
                    rule: &rule,
                };
                let batch = gmsp_array_sample(&arr, &spec.jumps(), &t, a.n, a.seed)?;
                rows.push((s, tv_distance(&batch.values, &limit)?));
            }
        }
        ProcessKind::Alt => {
            let (spec, t) = a.process.alt()?;
            let limit = alt_lattice_pmf(&spec, &t)?;
            let jumps: Vec<Jump> = spec.jumps();
            for &s in &scales {
                let rule = KroneckerRule::new(spec.clone(), s)?;
                let batch = alt_array_sample(s, &rule, &jumps, &t, a.n, a.seed)?;
                rows.push((s, tv_distance(&batch.values, &limit)?));
            }
        }
        _ => return Err(Error::param("converge supports --process gmsp, msp or alt")),
    }
    let mut csv = String::from("scale,tv_distance\n");
    for (s, tv) in &rows {
        csv.push_str(&format!("{s},{tv}\n"));
    }
    let json = json!({
        "meta": command_meta("converge", a),
        "rows": rows.iter().map(|(s, tv)| json!({"scale": s, "tv_distance": tv})).collect::<Vec<_>>(),
    });
    emit(&a.output, Artifact { csv, json })
}

pub fn cmd_verify(a: &VerifyArgs) -> Result<()> {
    let report = verify::run_identity(&a.identity, a.seed, a.n)?;
    emit(
        &OutputArgs {
            out: a.out.clone(),
            format: Format::Json,
        },
        Artifact {
            csv: String::new(),
            json: serde_json::to_value(&report).expect("report serializes"),
        },
    )
}
