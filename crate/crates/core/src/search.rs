//! Traversal of model specs from simple to complex, fitting each until one
//! validates above the success threshold.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, HOLDOUT_FRACTION};
use crate::error::{Error, Result};
use crate::family::{BaseFunction, BaseKind, Family, ModelSpec};
use crate::metrics::{r_squared, Expr};
use crate::optimize::{finetune, fit_coefficients, FitConfig};

/// Tolerance under which two validation `R^2` values tie.
pub const R2_TIE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub max_deg_input_num: u32,
    pub max_deg_input_den: u32,
    pub max_deg_output_num: u32,
    pub max_deg_output_den: u32,
    pub max_base_functions: usize,
    pub base_functions: Vec<BaseKind>,
    pub max_var_power: u32,
    pub success_r2: f64,
    /// Seconds; checked between specs.
    pub time_budget: Option<f64>,
    /// Objective evaluations; checked between specs.
    pub eval_budget: Option<u64>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            max_deg_input_num: 2,
            max_deg_input_den: 2,
            max_deg_output_num: 4,
            max_deg_output_den: 3,
            max_base_functions: 2,
            base_functions: vec![BaseKind::Sqrt, BaseKind::Cos, BaseKind::Exp],
            max_var_power: 3,
            success_r2: 0.999,
            time_budget: None,
            eval_budget: None,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.into()));
        if !(self.success_r2 > 0.0 && self.success_r2 <= 1.0) {
            return bad("success_r2 must lie in (0, 1]");
        }
        if self.max_deg_output_num == 0 {
            return bad("max_deg_output_num must be at least 1");
        }
        if self.max_base_functions > 0 && self.max_deg_input_num == 0 {
            return bad("max_deg_input_num must be at least 1 when base functions are used");
        }
        if self.max_base_functions > 0 && self.base_functions.is_empty() {
            return bad("base function pool is empty");
        }
        if self.time_budget.is_some_and(|t| !(t > 0.0)) {
            return bad("time_budget must be positive");
        }
        if self.eval_budget == Some(0) {
            return bad("eval_budget must be positive");
        }
        Ok(())
    }
}

/// All multisets of size `b` over `pool`, as non-decreasing index sequences.
fn multisets(pool: &[BaseKind], b: usize) -> Vec<Vec<BaseKind>> {
    fn rec(pool: &[BaseKind], b: usize, from: usize, cur: &mut Vec<BaseKind>, out: &mut Vec<Vec<BaseKind>>) {
        if cur.len() == b {
            out.push(cur.clone());
            return;
        }
        for i in from..pool.len() {
            cur.push(pool[i]);
            rec(pool, b, i, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(pool, b, 0, &mut Vec::with_capacity(b), &mut out);
    out
}

/// Specs in visiting order: the polynomial, then rationals with the
/// denominator degree as the outer loop, then for each number of base
/// functions every degree combination and base-function multiset.
pub fn traverse_specs(cfg: &SearchConfig, n_vars: usize) -> Vec<ModelSpec> {
    let base = |funcs: &[BaseKind], din_num, din_den, dout_num, dout_den| ModelSpec {
        n_vars,
        base_functions: funcs.iter().map(|k| BaseFunction::new(*k)).collect(),
        deg_input_num: din_num,
        deg_input_den: din_den,
        deg_output_num: dout_num,
        deg_output_den: dout_den,
        max_var_power: cfg.max_var_power,
    };
    let mut out = vec![base(&[], 0, 0, cfg.max_deg_output_num, 0)];
    for d2out in 1..=cfg.max_deg_output_den {
        for d1out in 1..=cfg.max_deg_output_num {
            out.push(base(&[], 0, 0, d1out, d2out));
        }
    }
    let mut pool = cfg.base_functions.clone();
    pool.dedup();
    for b in 1..=cfg.max_base_functions {
        let sets = multisets(&pool, b);
        for d2out in 0..=cfg.max_deg_output_den {
            for d1out in 1..=cfg.max_deg_output_num {
                for d2in in 0..=cfg.max_deg_input_den {
                    for d1in in 1..=cfg.max_deg_input_num {
                        for set in &sets {
                            out.push(base(set, d1in, d2in, d1out, d2out));
                        }
                    }
                }
            }
        }
    }
    out
}

/// A fitted and sparsified spec.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub spec_index: usize,
    pub spec: ModelSpec,
    pub theta: Vec<f64>,
    pub expression: Expr,
    pub r2_train: f64,
    pub r2_val: f64,
    pub n_nonzero: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub best: Candidate,
    pub n_specs_fitted: usize,
    pub n_specs_total: usize,
    pub eval_count: u64,
    pub early_stopped: bool,
    pub budget_exhausted: bool,
    pub wall_time: f64,
}

/// Replaces `best` when `c` validates better, or ties with fewer nonzeros.
fn better(c: &Candidate, best: &Candidate) -> bool {
    if c.r2_val > best.r2_val + R2_TIE {
        return true;
    }
    (c.r2_val - best.r2_val).abs() <= R2_TIE && c.n_nonzero < best.n_nonzero
}

/// Per-spec random stream derived from `(seed, index)`.
pub fn spec_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Fits one spec: global search on `train`, then the threshold schedule
/// selected on `val`. Returns the candidate and the evaluation count.
pub fn fit_spec(
    spec: &ModelSpec,
    spec_index: usize,
    train: &Dataset,
    val: &Dataset,
    fit: &FitConfig,
) -> Result<(Candidate, u64)> {
    let fam = Family::new(spec.clone())?;
    let pt = fam.prepare(train)?;
    let pv = fam.prepare(val)?;
    let mut rng = spec_rng(fit.seed, spec_index);
    let opt = fit_coefficients(&pt, fit, &mut rng)?;
    let ft = finetune(&pt, &pv, &opt.theta, &fit.thresholds, fit.max_local_steps)?;
    let evals = (opt.n_evals + ft.evals()) as u64;
    let theta = ft.theta;
    let r2_train = pt.predict(&theta).map_or(f64::NEG_INFINITY, |p| r_squared(train.y(), &p));
    let r2_val = pv.predict(&theta).map_or(f64::NEG_INFINITY, |p| r_squared(val.y(), &p));
    let expression = fam.expression(&theta)?;
    let n_nonzero = theta.iter().filter(|v| **v != 0.0).count();
    Ok((
        Candidate {
            spec_index,
            spec: spec.clone(),
            theta,
            expression,
            r2_train,
            r2_val,
            n_nonzero,
        },
        evals,
    ))
}

/// Visits [`traverse_specs`] in order, fitting each spec on the first 80%
/// of `data` and validating on the rest. Stops once a candidate validates
/// above `success_r2` or a budget runs out.
pub fn fit_auto(data: &Dataset, search: &SearchConfig, fit: &FitConfig) -> Result<SearchResult> {
    search.validate()?;
    fit.validate()?;
    if data.len() < 2 {
        return Err(Error::InvalidConfig("need at least two data rows".into()));
    }
    let start = Instant::now();
    let (train, val) = data.split_tail(HOLDOUT_FRACTION);
    let specs = traverse_specs(search, data.n_vars());
    let mut best: Option<Candidate> = None;
    let mut evals = 0u64;
    let mut fitted = 0;
    let mut early_stopped = false;
    let mut budget_exhausted = false;

    for (i, spec) in specs.iter().enumerate() {
        if search.time_budget.is_some_and(|t| start.elapsed().as_secs_f64() >= t)
            || search.eval_budget.is_some_and(|b| evals >= b)
        {
            budget_exhausted = true;
            break;
        }
        fitted += 1;
        let (cand, n) = match fit_spec(spec, i, &train, &val, fit) {
            Ok(r) => r,
            Err(Error::NoCandidate(_)) | Err(Error::Numerical(_)) | Err(Error::NonFinite { .. }) => continue,
            Err(e) => return Err(e),
        };
        evals += n;
        let success = cand.r2_val > search.success_r2;
        if cand.r2_val.is_finite() && best.as_ref().is_none_or(|b| better(&cand, b)) {
            best = Some(cand);
        }
        if success {
            early_stopped = true;
            break;
        }
    }

    let best = best.ok_or_else(|| {
        Error::NoCandidate(if budget_exhausted {
            "budget exhausted before any finite candidate".into()
        } else {
            "no spec produced a finite candidate".into()
        })
    })?;
    Ok(SearchResult {
        best,
        n_specs_fitted: fitted,
        n_specs_total: specs.len(),
        eval_count: evals,
        early_stopped,
        budget_exhausted,
        wall_time: start.elapsed().as_secs_f64(),
    })
}
