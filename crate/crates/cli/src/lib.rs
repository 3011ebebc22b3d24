//! Command implementations behind the `parfam` binary: fitting a dataset,
//! benchmarking a problem directory, printing expressivity tables and
//! generating synthetic problems.
//!
//! Exit codes are stable: 0 success, 2 input error, 3 no result within
//! budget, 1 anything else.

pub mod benchmark;
pub mod config;
pub mod report;

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use parfam::data::HOLDOUT_FRACTION;
use parfam::datagen::generate_problem;
use parfam::expressivity::{exact_counts, ratio_table, TreeParams};
use parfam::metrics::{complexity, parse_expr, r_squared, Expr};
use parfam::search::fit_auto;
use parfam::Dataset;

pub use config::RunConfig;
pub use report::{write_atomic, FitResult};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NO_RESULT: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    NoResult(String),
    #[error("{0}")]
    Failure(String),
}

impl CliError {
    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::NoResult(_) => EXIT_NO_RESULT,
            CliError::Failure(_) => EXIT_FAILURE,
        }
    }
}

impl From<parfam::Error> for CliError {
    fn from(e: parfam::Error) -> Self {
        use parfam::Error as E;
        match e {
            E::Io(_) | E::Data { .. } | E::Parse { .. } | E::InvalidConfig(_) | E::InvalidSpec(_) => {
                CliError::Input(e.to_string())
            }
            E::DimensionMismatch { .. } => CliError::Input(e.to_string()),
            E::NoCandidate(_) => CliError::NoResult(e.to_string()),
            E::ZeroDenominator | E::NonFinite { .. } | E::Numerical(_) => CliError::Failure(e.to_string()),
        }
    }
}

/// `R^2` of `expr` on `data`; `-inf` for an empty slice.
pub fn expr_r2(expr: &Expr, data: &Dataset) -> f64 {
    if data.is_empty() {
        return f64::NEG_INFINITY;
    }
    let pred: Vec<f64> = data.rows().map(|x| expr.eval(x)).collect();
    r_squared(data.y(), &pred)
}

/// A completed fit: the serializable document plus the parsed expression.
#[derive(Debug, Clone)]
pub struct FitOutcome {
    pub result: FitResult,
    pub expr: Expr,
    pub wall_time: f64,
}

/// Fits `fit_part` with the configured search and scores the expression on
/// its train/validation split and on `test`.
///
/// Scores come from re-parsing the printed expression, so the document is
/// self-consistent with what a reader would evaluate.
pub fn fit_split(fit_part: &Dataset, test: &Dataset, cfg: &RunConfig) -> Result<FitOutcome, CliError> {
    let start = Instant::now();
    let res = fit_auto(fit_part, &cfg.search, &cfg.fit)?;
    let text = res.best.expression.to_string();
    let expr = parse_expr(&text)?;
    let (train, val) = fit_part.split_tail(HOLDOUT_FRACTION);
    let result = FitResult {
        expression: text,
        r2_train: report::finite(expr_r2(&expr, &train)),
        r2_val: report::finite(expr_r2(&expr, &val)),
        r2_test: report::finite(expr_r2(&expr, test)),
        n_nonzero: res.best.n_nonzero,
        complexity: complexity(&expr),
        spec_used: res.best.spec.summary(),
        spec_index: res.best.spec_index,
        specs_fitted: res.n_specs_fitted,
        specs_total: res.n_specs_total,
        early_stopped: res.early_stopped,
        budget_exhausted: res.budget_exhausted,
        seed: cfg.fit.seed,
        eval_count: res.eval_count,
    };
    Ok(FitOutcome {
        result,
        expr,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

/// Fits a whole dataset: the last 20% of rows are the test set.
pub fn fit_dataset(data: &Dataset, cfg: &RunConfig) -> Result<FitOutcome, CliError> {
    let (fit_part, test) = data.split_tail(HOLDOUT_FRACTION);
    fit_split(&fit_part, &test, cfg)
}

/// `parfam fit`: loads the CSV, fits it and writes the result document.
pub fn cmd_fit(data_path: &Path, cfg: &RunConfig, out_path: Option<&Path>) -> Result<FitOutcome, CliError> {
    let data = Dataset::load(data_path)?;
    let outcome = fit_dataset(&data, cfg)?;
    if let Some(out) = out_path {
        write_atomic(out, &outcome.result.to_document())?;
    }
    Ok(outcome)
}

/// Parameters of `parfam expressivity`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpressivityArgs {
    pub b: u32,
    pub k_max: u32,
    pub n_max: u32,
    /// Length of the exact `c_l`, `d_l` listing; 0 disables it.
    pub l_max: usize,
    pub k: u32,
    pub n: u32,
}

impl Default for ExpressivityArgs {
    fn default() -> Self {
        Self {
            b: 4,
            k_max: 6,
            n_max: 9,
            l_max: 0,
            k: 3,
            n: 4,
        }
    }
}

/// `parfam expressivity`: the ratio table, rows `n`, columns `k`, and
/// optionally the exact counts for one `(b, k, n)`.
pub fn cmd_expressivity(args: &ExpressivityArgs) -> Result<String, CliError> {
    if args.b == 0 || args.k_max == 0 || args.n_max == 0 || args.k == 0 || args.n == 0 {
        return Err(CliError::input("expressivity arguments must be positive"));
    }
    let ks: Vec<u32> = (1..=args.k_max).collect();
    let ns: Vec<u32> = (1..=args.n_max).collect();
    let table = ratio_table(args.b, &ks, &ns)?;
    let mut out = String::new();
    writeln!(out, "# growth ratio r2/x1 for b={}", args.b).unwrap();
    write!(out, "n\\k").unwrap();
    for k in &ks {
        write!(out, "\t{k}").unwrap();
    }
    out.push('\n');
    for (n, row) in ns.iter().zip(&table) {
        write!(out, "{n}").unwrap();
        for v in row {
            write!(out, "\t{v:.4}").unwrap();
        }
        out.push('\n');
    }
    if args.l_max > 0 {
        let p = TreeParams::new(args.n, args.k, args.b)?;
        let counts = exact_counts(p, args.l_max);
        writeln!(out, "\n# exact counts for b={} k={} n={}", args.b, args.k, args.n).unwrap();
        writeln!(out, "l\tc_l\td_l").unwrap();
        for l in 1..=args.l_max {
            writeln!(out, "{l}\t{}\t{}", counts.c[l], counts.d[l]).unwrap();
        }
    }
    Ok(out)
}

/// Summary of a `parfam generate` run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenerateSummary {
    pub written: usize,
    pub rejected: usize,
}

/// Draws attempts before giving up on reaching `count` accepted problems.
const MAX_ATTEMPTS_PER_PROBLEM: usize = 100;

/// `parfam generate`: writes `count` accepted problems as
/// `problem_NNNN.csv` plus a `problem_NNNN.expr` ground-truth sidecar.
pub fn cmd_generate(cfg: &RunConfig, out_dir: &Path, count: usize, seed: u64) -> Result<GenerateSummary, CliError> {
    cfg.gen.validate()?;
    std::fs::create_dir_all(out_dir).map_err(|e| CliError::input(format!("{}: {e}", out_dir.display())))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut written = 0;
    let mut rejected = 0;
    while written < count {
        if rejected >= MAX_ATTEMPTS_PER_PROBLEM * count.max(1) {
            return Err(CliError::NoResult(format!(
                "only {written} of {count} problems accepted after {rejected} rejections"
            )));
        }
        match generate_problem(&cfg.gen, &mut rng)? {
            Some(p) => {
                let stem = out_dir.join(format!("problem_{written:04}"));
                write_atomic(&stem.with_extension("csv"), &p.data.to_csv_string())?;
                write_atomic(&stem.with_extension("expr"), &format!("{}\n", p.expr))?;
                written += 1;
            }
            None => rejected += 1,
        }
    }
    Ok(GenerateSummary { written, rejected })
}
