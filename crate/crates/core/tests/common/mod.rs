#![allow(dead_code)]

use skellam_lab::LatticePmf;

/// Law of a sum of independent Bernoulli(p_i) variables, by direct DP.
pub fn poisson_binomial(ps: &[f64]) -> LatticePmf {
    let mut probs = vec![1.0];
    for &p in ps {
        let mut next = vec![0.0; probs.len() + 1];
        for (k, q) in probs.iter().enumerate() {
            next[k] += q * (1.0 - p);
            next[k + 1] += q * p;
        }
        probs = next;
    }
    LatticePmf {
        offset: 0,
        probs,
        truncation_mass: 0.0,
    }
}

/// Poisson pmf by the product recurrence, independent of the library's log-gamma.
pub fn poisson_table(mean: f64, len: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(len);
    let mut p = (-mean).exp();
    for k in 0..len {
        if k > 0 {
            p *= mean / k as f64;
        }
        out.push(p);
    }
    out
}

/// `Σ_l Pois_a(l + n⁺) Pois_b(l + n⁻)`, the Skellam pmf by brute-force convolution.
pub fn skellam_convolution(n: i64, a: f64, b: f64) -> f64 {
    let len = 400;
    let pa = poisson_table(a, len);
    let pb = poisson_table(b, len);
    let (up, down) = if n >= 0 {
        (n as usize, 0)
    } else {
        (0, n.unsigned_abs() as usize)
    };
    (0..len - up.max(down)).map(|l| pa[l + up] * pb[l + down]).sum()
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

pub fn correlation(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (mean(x), mean(y));
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

/// `|mean(x) - want| <= k * stderr`.
pub fn mean_within(x: &[f64], want: f64, k: f64) -> bool {
    let n = x.len() as f64;
    let m = mean(x);
    let var = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m - want).abs() <= k * (var / n).sqrt()
}

/// One invocation of every CLI command, shared by the CLI tests and the
/// determinism acceptance check.
pub const CLI_COMMANDS: &[&[&str]] = &[
    &[
        "simulate",
        "--process",
        "gmsp",
        "--jumps",
        "1:1.0,2.0;-1:0.5,0.5",
        "--t",
        "1.0,1.0",
        "--n",
        "1000",
        "--seed",
        "7",
    ],
    &[
        "simulate",
        "--process",
        "frac-skellam",
        "--l1",
        "1",
        "--l2",
        "1",
        "--alpha",
        "0.5",
        "--beta",
        "0.5",
        "--t1",
        "1",
        "--t2",
        "1",
        "--n",
        "200",
        "--format",
        "json",
    ],
    &[
        "simulate",
        "--process",
        "alt",
        "--jumps",
        "1:1.0;-1:0.6;2:0.3",
        "--times",
        "1:1.5;-1:1.0;2:0.5",
        "--n",
        "500",
        "--seed",
        "2",
    ],
    &[
        "simulate",
        "--process",
        "inv-stable",
        "--alpha",
        "0.6",
        "--t",
        "2",
        "--n",
        "300",
        "--seed",
        "4",
    ],
    &[
        "pmf",
        "--process",
        "msp",
        "--l1",
        "1",
        "--l2",
        "1",
        "--t",
        "1,1",
        "--nmax",
        "20",
    ],
    &[
        "pmf",
        "--process",
        "frac-skellam",
        "--l1",
        "1",
        "--l2",
        "0.5",
        "--alpha",
        "0.5",
        "--t1",
        "1",
        "--t2",
        "1",
        "--nmax",
        "8",
        "--format",
        "json",
    ],
    &[
        "cf",
        "--process",
        "gmsp",
        "--jumps",
        "1:1.0,2.0;-0.5:0.5,0.5",
        "--t",
        "1,1",
        "--u-grid",
        "-1:1:0.5",
    ],
    &[
        "cf",
        "--process",
        "msp",
        "--l1",
        "1",
        "--l2",
        "0.5",
        "--t",
        "1,2",
        "--u",
        "0.5,1",
        "--empirical",
        "--n",
        "2000",
        "--seed",
        "5",
    ],
    &[
        "integral",
        "--process",
        "mpp",
        "--rates",
        "1.0,0.5",
        "--t",
        "1,1.5",
        "--r",
        "64",
        "--n",
        "200",
        "--seed",
        "6",
    ],
    &[
        "integral",
        "--process",
        "gmsp",
        "--jumps",
        "1:1.0,0.5;-1:0.5,1.0",
        "--t",
        "1,1.5",
        "--r",
        "32",
        "--n",
        "100",
        "--format",
        "json",
    ],
    &[
        "converge",
        "--process",
        "msp",
        "--l1",
        "1",
        "--l2",
        "0.5",
        "--t",
        "1,1",
        "--scales",
        "10,100",
        "--n",
        "5000",
        "--seed",
        "8",
    ],
    &[
        "converge",
        "--process",
        "alt",
        "--jumps",
        "1:1.0;-1:0.6",
        "--t",
        "1",
        "--scales",
        "10,100",
        "--n",
        "5000",
        "--seed",
        "8",
    ],
    &[
        "verify",
        "--identity",
        "compound-equalrate",
        "--seed",
        "3",
        "--n",
        "20000",
    ],
];

/// Runs the CLI binary and returns `(exit code, stdout, stderr)`.
pub fn run_cli(args: &[&str], env: &[(&str, &str)]) -> (i32, Vec<u8>, String) {
    let mut cmd = std::process::Command::new(env!("CARGO_BIN_EXE_skellam-lab"));
    cmd.args(args);
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        out.stdout,
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}
