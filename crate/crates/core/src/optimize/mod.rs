//! Coefficient fitting: BFGS local search, basin hopping and multi-start
//! global search, and threshold-based sparsification.

pub mod basin;
pub mod bfgs;
pub mod finetune;
pub mod multistart;

use std::time::Instant;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::Prepared;

pub use basin::{basin_hopping, BasinHopping, GlobalResult};
pub use bfgs::{bfgs, BfgsResult, BfgsStatus};
pub use finetune::{finetune, FinetuneResult, Stage};
pub use multistart::multistart;

/// A differentiable objective. `eval` writes the gradient into `grad` and
/// returns the value, or `None` where the objective is not finite.
pub trait Objective {
    fn dim(&self) -> usize;
    fn eval(&self, x: &[f64], grad: &mut [f64]) -> Option<f64>;
}

/// Objective backed by a closure.
pub struct FnObjective<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&[f64], &mut [f64]) -> Option<f64>> FnObjective<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F: Fn(&[f64], &mut [f64]) -> Option<f64>> Objective for FnObjective<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &[f64], grad: &mut [f64]) -> Option<f64> {
        (self.f)(x, grad)
    }
}

/// `MSE + lambda * R` of a family on prepared data.
pub struct LossObjective<'a, 'b> {
    pub data: &'b Prepared<'a>,
    pub lambda: f64,
}

impl Objective for LossObjective<'_, '_> {
    fn dim(&self) -> usize {
        self.data.family().n_params()
    }

    fn eval(&self, x: &[f64], grad: &mut [f64]) -> Option<f64> {
        self.data.loss_grad(x, self.lambda, grad).ok()
    }
}

/// Restricts an objective to the coordinates in `free`; every other
/// coordinate stays at its value in `base`.
pub struct Masked<'o, O> {
    inner: &'o O,
    free: Vec<usize>,
    base: Vec<f64>,
}

impl<'o, O: Objective> Masked<'o, O> {
    pub fn new(inner: &'o O, base: Vec<f64>, free: Vec<usize>) -> Self {
        Self { inner, free, base }
    }

    pub fn expand(&self, x: &[f64]) -> Vec<f64> {
        let mut full = self.base.clone();
        for (&i, v) in self.free.iter().zip(x) {
            full[i] = *v;
        }
        full
    }

    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        self.free.iter().map(|&i| full[i]).collect()
    }
}

impl<O: Objective> Objective for Masked<'_, O> {
    fn dim(&self) -> usize {
        self.free.len()
    }

    fn eval(&self, x: &[f64], grad: &mut [f64]) -> Option<f64> {
        let full = self.expand(x);
        let mut g = vec![0.0; full.len()];
        let f = self.inner.eval(&full, &mut g)?;
        for (gi, &i) in grad.iter_mut().zip(&self.free) {
            *gi = g[i];
        }
        Some(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    BasinHopping,
    MultistartBfgs,
}

impl std::str::FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "basin_hopping" => Ok(Backend::BasinHopping),
            "multistart_bfgs" => Ok(Backend::MultistartBfgs),
            other => Err(Error::InvalidConfig(format!("unknown backend `{other}`"))),
        }
    }
}

pub const DEFAULT_THRESHOLDS: [f64; 4] = [1e-5, 1e-4, 1e-3, 1e-2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub lambda: f64,
    pub bh_iterations: usize,
    /// Step limit per local search; `None` means 100 times the dimension.
    pub max_local_steps: Option<usize>,
    pub step_size: f64,
    pub temperature: f64,
    pub backend: Backend,
    pub n_starts: usize,
    pub seed: u64,
    pub thresholds: Vec<f64>,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            lambda: 0.001,
            bh_iterations: 10,
            max_local_steps: None,
            step_size: 0.5,
            temperature: 1.0,
            backend: Backend::BasinHopping,
            n_starts: 10,
            seed: 0,
            thresholds: DEFAULT_THRESHOLDS.to_vec(),
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.into()));
        if !(self.lambda >= 0.0) {
            return bad("lambda must be non-negative");
        }
        if self.bh_iterations < 1 {
            return bad("bh_iterations must be at least 1");
        }
        if self.n_starts < 1 {
            return bad("n_starts must be at least 1");
        }
        if !(self.step_size > 0.0) || !(self.temperature > 0.0) {
            return bad("step_size and temperature must be positive");
        }
        if self.max_local_steps == Some(0) {
            return bad("max_local_steps must be at least 1");
        }
        if self.thresholds.iter().any(|t| !(1e-5..=1e-2).contains(t)) {
            return bad("thresholds must lie in [1e-5, 1e-2]");
        }
        if self.thresholds.windows(2).any(|w| w[0] >= w[1]) {
            return bad("thresholds must be strictly increasing");
        }
        Ok(())
    }

    pub fn local_steps(&self, dim: usize) -> usize {
        self.max_local_steps.unwrap_or(100 * dim.max(1))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimResult {
    pub theta: Vec<f64>,
    pub loss: f64,
    pub mse: f64,
    pub n_local_searches: usize,
    pub n_accepted: usize,
    pub n_evals: usize,
    pub wall_time: f64,
}

/// Standard-normal starting point.
pub fn random_start(dim: usize, rng: &mut impl Rng) -> Vec<f64> {
    (0..dim).map(|_| rng.sample(StandardNormal)).collect()
}

/// Global search over the coefficients of a prepared family with the
/// configured backend, from a standard-normal start.
pub fn fit_coefficients(data: &Prepared<'_>, cfg: &FitConfig, rng: &mut impl Rng) -> Result<OptimResult> {
    cfg.validate()?;
    let start = Instant::now();
    let obj = LossObjective {
        data,
        lambda: cfg.lambda,
    };
    let dim = obj.dim();
    let steps = cfg.local_steps(dim);
    let g = match cfg.backend {
        Backend::BasinHopping => {
            let x0 = random_start(dim, rng);
            let bh = BasinHopping {
                iterations: cfg.bh_iterations,
                step_size: cfg.step_size,
                temperature: cfg.temperature,
                max_local_steps: steps,
            };
            basin_hopping(&obj, &x0, &bh, rng)
        }
        Backend::MultistartBfgs => multistart(&obj, cfg.n_starts, steps, rng),
    };
    if !g.f.is_finite() {
        return Err(Error::NoCandidate("no finite local minimum found".into()));
    }
    let mse = data.mse(&g.x)?;
    let loss = data.loss(&g.x, cfg.lambda)?;
    Ok(OptimResult {
        theta: g.x,
        loss,
        mse,
        n_local_searches: g.n_local_searches,
        n_accepted: g.n_accepted,
        n_evals: g.n_evals,
        wall_time: start.elapsed().as_secs_f64(),
    })
}
