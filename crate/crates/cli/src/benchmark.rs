//! Benchmark runs over a directory of `name.csv` + `name.expr` pairs.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use parfam::data::HOLDOUT_FRACTION;
use parfam::metrics::{add_noise, parse_expr, symbolic_match, EvalReport, Expr, MatchKind};
use parfam::search::spec_rng;
use parfam::Dataset;

use crate::report::{finite, to_document, write_atomic};
use crate::{fit_split, CliError, RunConfig};

/// One benchmark problem on disk.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub name: String,
    pub data: PathBuf,
    pub truth: PathBuf,
}

/// Lists `*.csv` files of `dir` in name order with their `.expr` sidecars.
pub fn discover(dir: &Path) -> Result<Vec<Problem>, CliError> {
    let entries = std::fs::read_dir(dir).map_err(|e| CliError::input(format!("{}: {e}", dir.display())))?;
    let mut out = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| CliError::input(e.to_string()))?.path();
        if path.extension().is_some_and(|e| e == "csv") {
            let name = path.file_stem().unwrap_or_default().to_string_lossy().into_owned();
            out.push(Problem {
                truth: path.with_extension("expr"),
                data: path,
                name,
            });
        }
    }
    out.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Evaluated,
    /// Fitting produced no candidate; counts as a miss.
    Failed,
    /// Unreadable data or ground truth; excluded from the rates.
    Skipped,
}

/// Per-problem row of the summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemRecord {
    pub name: String,
    pub status: Status,
    pub truth: Option<String>,
    pub expression: Option<String>,
    pub r2_test: Option<f64>,
    pub accuracy_hit: bool,
    pub symbolic_hit: bool,
    pub match_kind: Option<String>,
    pub complexity: Option<usize>,
    pub spec_used: Option<String>,
    pub eval_count: u64,
    pub message: Option<String>,
}

impl ProblemRecord {
    fn empty(name: &str, status: Status, message: String) -> Self {
        Self {
            name: name.to_string(),
            status,
            truth: None,
            expression: None,
            r2_test: None,
            accuracy_hit: false,
            symbolic_hit: false,
            match_kind: None,
            complexity: None,
            spec_used: None,
            eval_count: 0,
            message: Some(message),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkSummary {
    pub noise: f64,
    pub seed: u64,
    pub n_problems: usize,
    pub n_evaluated: usize,
    pub n_failed: usize,
    pub n_skipped: usize,
    /// Share of evaluated or failed problems with test `R^2 > 0.999`.
    pub accuracy_rate: f64,
    /// Share of evaluated or failed problems matching the ground truth.
    pub symbolic_rate: f64,
    pub problems: Vec<ProblemRecord>,
}

impl BenchmarkSummary {
    fn new(noise: f64, seed: u64, problems: Vec<ProblemRecord>) -> Self {
        let count = |s: Status| problems.iter().filter(|p| p.status == s).count();
        let (n_evaluated, n_failed, n_skipped) = (count(Status::Evaluated), count(Status::Failed), count(Status::Skipped));
        let scored = (n_evaluated + n_failed).max(1) as f64;
        let rate = |f: fn(&ProblemRecord) -> bool| problems.iter().filter(|p| f(p)).count() as f64 / scored;
        Self {
            noise,
            seed,
            n_problems: problems.len(),
            n_evaluated,
            n_failed,
            n_skipped,
            accuracy_rate: rate(|p| p.accuracy_hit),
            symbolic_rate: rate(|p| p.symbolic_hit),
            problems,
        }
    }

    /// Tab-separated table: one row per problem, then the aggregate rates.
    pub fn table(&self) -> String {
        let mut s = String::from("problem\tstatus\tr2_test\taccuracy\tsymbolic\tcomplexity\texpression\n");
        for p in &self.problems {
            let status = match p.status {
                Status::Evaluated => "ok",
                Status::Failed => "failed",
                Status::Skipped => "skipped",
            };
            let r2 = p.r2_test.map_or("-".to_string(), |v| format!("{v:.6}"));
            let cx = p.complexity.map_or("-".to_string(), |v| v.to_string());
            writeln!(
                s,
                "{}\t{status}\t{r2}\t{}\t{}\t{cx}\t{}",
                p.name,
                u8::from(p.accuracy_hit),
                u8::from(p.symbolic_hit),
                p.expression.as_deref().unwrap_or("-")
            )
            .unwrap();
        }
        writeln!(
            s,
            "# accuracy_rate={:.4} symbolic_rate={:.4} evaluated={} failed={} skipped={}",
            self.accuracy_rate, self.symbolic_rate, self.n_evaluated, self.n_failed, self.n_skipped
        )
        .unwrap();
        s
    }
}

fn load_truth(path: &Path) -> Result<Expr, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_expr(text.trim()).map_err(|e| format!("{}: {e}", path.display()))
}

/// Fits one problem. Noise is added to the fitting rows only; the test
/// rows keep the clean targets.
pub fn run_problem(p: &Problem, index: usize, cfg: &RunConfig, noise: f64, seed: u64) -> ProblemRecord {
    let truth = match load_truth(&p.truth) {
        Ok(t) => t,
        Err(m) => return ProblemRecord::empty(&p.name, Status::Skipped, m),
    };
    let data = match Dataset::load(&p.data) {
        Ok(d) if d.n_vars() >= truth.n_vars() => d,
        Ok(_) => return ProblemRecord::empty(&p.name, Status::Skipped, "ground truth uses more variables than the data".into()),
        Err(e) => return ProblemRecord::empty(&p.name, Status::Skipped, e.to_string()),
    };
    let mut rng = spec_rng(seed, index);
    let (fit_part, test) = data.split_tail(HOLDOUT_FRACTION);
    let fit_part = if noise > 0.0 {
        let noisy = add_noise(fit_part.y(), noise, &mut rng);
        fit_part.with_targets(noisy).expect("same length")
    } else {
        fit_part
    };
    let mut cfg = cfg.clone();
    cfg.fit.seed = seed;
    let outcome = match fit_split(&fit_part, &test, &cfg) {
        Ok(o) => o,
        Err(e) => {
            let mut r = ProblemRecord::empty(&p.name, Status::Failed, e.to_string());
            r.truth = Some(truth.to_string());
            return r;
        }
    };
    let m = symbolic_match(&outcome.expr, &truth, &data.bounds(), &mut rng);
    let r2 = outcome.result.r2_test.unwrap_or(f64::NEG_INFINITY);
    let report = EvalReport::new(r2, m.is_match(), outcome.result.complexity, outcome.wall_time);
    ProblemRecord {
        name: p.name.clone(),
        status: Status::Evaluated,
        truth: Some(truth.to_string()),
        expression: Some(outcome.result.expression),
        r2_test: finite(report.r2),
        accuracy_hit: report.accuracy_hit,
        symbolic_hit: report.symbolic_hit,
        match_kind: m.kind.map(|k| match k {
            MatchKind::Offset => "offset".to_string(),
            MatchKind::Factor => "factor".to_string(),
        }),
        complexity: Some(report.complexity),
        spec_used: Some(outcome.result.spec_used),
        eval_count: outcome.result.eval_count,
        message: None,
    }
}

/// `parfam benchmark`: fits every problem on a pool of `jobs` workers and
/// writes `problems/<name>.json`, `summary.json` and `summary.tsv` under
/// `out_dir`.
pub fn cmd_benchmark(
    problems_dir: &Path,
    cfg: &RunConfig,
    out_dir: Option<&Path>,
    noise: f64,
    seed: u64,
    jobs: usize,
) -> Result<BenchmarkSummary, CliError> {
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err(CliError::input("noise level must be a non-negative number"));
    }
    let problems = discover(problems_dir)?;
    if problems.is_empty() {
        return Err(CliError::input(format!("{}: no .csv problems found", problems_dir.display())));
    }
    let record_dir = match out_dir {
        Some(d) => {
            let rd = d.join("problems");
            std::fs::create_dir_all(&rd).map_err(|e| CliError::input(format!("{}: {e}", rd.display())))?;
            Some(rd)
        }
        None => None,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| CliError::Failure(e.to_string()))?;
    let records: Vec<Result<ProblemRecord, CliError>> = pool.install(|| {
        problems
            .par_iter()
            .enumerate()
            .map(|(i, p)| {
                let rec = run_problem(p, i, cfg, noise, seed);
                if let Some(rd) = &record_dir {
                    write_atomic(&rd.join(format!("{}.json", p.name)), &to_document(&rec))?;
                }
                Ok(rec)
            })
            .collect()
    });
    let records = records.into_iter().collect::<Result<Vec<_>, _>>()?;
    let summary = BenchmarkSummary::new(noise, seed, records);
    if let Some(d) = out_dir {
        write_atomic(&d.join("summary.json"), &to_document(&summary))?;
        write_atomic(&d.join("summary.tsv"), &summary.table())?;
    }
    Ok(summary)
}
