//! Command-line surface and run configuration.
//!
//! Precedence (lowest to highest): built-in defaults, command-line flags,
//! then the optional `--config` JSON file.  Exit codes: 0 success, 1 compute
//! error, 2 configuration error.

use clap::{Parser, Subcommand};
use serde::Deserialize;
use std::path::PathBuf;

/// Configuration-stage failure (bad flags, bad files); exits with code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn cfg_err<T>(msg: impl Into<String>) -> anyhow::Result<T> {
    Err(ConfigError(msg.into()).into())
}

#[derive(Parser, Debug)]
#[command(
    name = "stargraph",
    about = "Spectral statistics of quantum star graphs",
    long_about = "Spectral statistics of quantum star graphs: eigenvalue sweeps of the \
secular equation sum_j tan(k L_j) = 0, eigenfunction matrix elements, the analytic \
large-graph limit distribution F(R), empirical-vs-analytic comparisons, scarred \
eigenfunction subsequences, and figure reproduction.\n\n\
CSV outputs carry a `# stargraph-csv/1 <schema>` header line; all floating-point \
fields are shortest-round-trip formatted, and identical configuration plus seed \
reproduces byte-identical files.\n\n\
CSV schemas:\n  \
spectrum:        n, k, residual, left_pole_bond, right_pole_bond\n  \
matrix-elements: n, k, me_exact, me_leading\n  \
limit-cdf:       R, F, err_estimate\n  \
scars:           r, epsilon, n, k, sec2_i1, sec2_i2, sec2_max_other, ratio, mass, residual\n  \
fig6 deviations: v, R, deviation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub cmd: Command,

    /// RNG seed for any stochastic step (required whenever lengths are sampled).
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker threads (default: all cores). Results are thread-count invariant.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Relative residual tolerance of the eigenvalue solver.
    #[arg(long, global = true)]
    pub tol: Option<f64>,

    /// Directory prefixed to all output paths.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,

    /// JSON config file; its fields override the corresponding flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Solve the first N eigenvalues and write them as CSV.
    Spectrum {
        /// Graph spec JSON: {"lengths":[..]} or {"v":..,"alpha":..,"l_bar":..,"delta_l":..,"seed":..}
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        count: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Exact and leading indicator matrix elements over the first N eigenvalues.
    MatrixElements {
        #[arg(long)]
        graph: PathBuf,
        /// Indicator covers bonds 1..=v.
        #[arg(long)]
        v: usize,
        /// Bond count is alpha * v.
        #[arg(long)]
        alpha: usize,
        #[arg(long)]
        count: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Tabulate the analytic limit CDF F(R) on an R grid.
    LimitCdf {
        #[arg(long)]
        alpha: u32,
        /// Grid as start:stop:step, e.g. 0.01:0.99:0.01.
        #[arg(long, default_value = "0.01:0.99:0.01")]
        r_grid: String,
        /// Oscillatory-integral cutoff (escalated automatically if unstable).
        #[arg(long, default_value_t = 200.0)]
        cutoff: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare the empirical matrix-element distribution against a CDF table.
    Compare {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        v: usize,
        #[arg(long)]
        alpha: usize,
        #[arg(long)]
        count: usize,
        /// CSV produced by limit-cdf.
        #[arg(long)]
        cdf: PathBuf,
        /// Report JSON path.
        #[arg(long)]
        out: PathBuf,
        /// Compare the exact matrix element instead of the leading term.
        #[arg(long, default_value_t = false)]
        exact: bool,
    },
    /// Hunt pole-bunching events and certify scarred eigenvalues.
    Scars {
        #[arg(long)]
        graph: PathBuf,
        /// Target bond pair, 1-based, e.g. 1,2.
        #[arg(long, default_value = "1,2")]
        bonds: String,
        /// Strictly decreasing bunch widths, e.g. 0.2,0.1,0.05,0.02.
        #[arg(long, default_value = "0.2,0.1,0.05,0.02")]
        eps: String,
        /// Torus-walk budget (accepts scientific notation, e.g. 1e7).
        #[arg(long, default_value = "1e7")]
        budget: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Reproduce the comparison figures end to end (CSV + SVG).
    Figures {
        /// fig5 (single-v ECDF vs F) or fig6 (deviation curves over a v list).
        #[arg(long)]
        id: String,
        #[arg(long, default_value_t = 3)]
        alpha: u32,
        /// v for fig5.
        #[arg(long)]
        v: Option<usize>,
        /// Comma-separated v list for fig6.
        #[arg(long)]
        v_list: Option<String>,
        /// Eigenvalues per ECDF.
        #[arg(long)]
        count: Option<usize>,
        /// Mean bond length of the sampled ensemble.
        #[arg(long)]
        l_bar: Option<f64>,
        /// Length spread coefficient: delta_l = l_bar * spread_c / v^2.
        #[arg(long)]
        spread_c: Option<f64>,
    },
}

/// Settings shared by every subcommand after merging defaults, flags, and the
/// config file.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub threads: usize,
    pub tol: f64,
    pub out_dir: PathBuf,
}

#[derive(Deserialize, Default, Debug)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    seed: Option<u64>,
    threads: Option<usize>,
    tol: Option<f64>,
    out_dir: Option<PathBuf>,
}

impl Cli {
    pub fn resolve(&self) -> anyhow::Result<RunConfig> {
        let mut rc = RunConfig {
            seed: self.seed,
            threads: self.threads.unwrap_or_else(num_threads_default),
            tol: self.tol.unwrap_or(1e-11),
            out_dir: self.out_dir.clone().unwrap_or_else(|| PathBuf::from(".")),
        };
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| ConfigError(format!("cannot read config {path:?}: {e}")))?;
            let fc: FileConfig = serde_json::from_str(&text)
                .map_err(|e| ConfigError(format!("bad config {path:?}: {e}")))?;
            if let Some(s) = fc.seed {
                rc.seed = Some(s);
            }
            if let Some(t) = fc.threads {
                rc.threads = t;
            }
            if let Some(t) = fc.tol {
                rc.tol = t;
            }
            if let Some(d) = fc.out_dir {
                rc.out_dir = d;
            }
        }
        if !(rc.tol > 0.0 && rc.tol < 1e-3) {
            return cfg_err(format!("tolerance {} outside (0, 1e-3)", rc.tol));
        }
        if rc.threads == 0 {
            return cfg_err("thread count must be positive");
        }
        Ok(rc)
    }
}

fn num_threads_default() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

/// Graph specification file: explicit lengths or an ensemble recipe.
#[derive(Deserialize, Debug)]
#[serde(untagged, deny_unknown_fields)]
pub enum GraphSpec {
    Lengths {
        lengths: Vec<f64>,
        #[serde(default)]
        l_min: Option<f64>,
    },
    Ensemble {
        v: usize,
        alpha: usize,
        l_bar: f64,
        delta_l: f64,
        seed: u64,
        #[serde(default)]
        l_min: Option<f64>,
    },
}

pub fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> anyhow::Result<Vec<T>> {
    s.split(',')
        .map(|t| t.trim().parse::<T>().map_err(|_| ConfigError(format!("bad {what}: {t}")).into()))
        .collect()
}

pub fn parse_budget(s: &str) -> anyhow::Result<u64> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| ConfigError(format!("bad budget: {s}")))?;
    if !(v >= 1.0 && v <= 1e15) {
        return cfg_err(format!("budget {s} out of range"));
    }
    Ok(v as u64)
}

/// `start:stop:step` grid syntax.
pub fn parse_grid(s: &str) -> anyhow::Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return cfg_err(format!("grid must be start:stop:step, got {s}"));
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|t| t.parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| ConfigError(format!("bad grid {s}: {e}")))?;
    let grid = stargraph_core::limitdist::uniform_grid(nums[0], nums[1], nums[2]);
    if grid.is_empty() {
        return cfg_err(format!("empty grid {s}"));
    }
    Ok(grid)
}
