//! Synthetic problems: sparse coefficient draws from a model family and
//! datasets sampled on a box with bounded targets.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::algebra::MonomialBasis;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::family::{Family, ModelSpec, Part};
use crate::metrics::Expr;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub spec: ModelSpec,
    pub n_points: usize,
    pub domain_low: f64,
    pub domain_high: f64,
    pub min_nonzero: usize,
    pub max_nonzero: usize,
    pub coeff_std: f64,
    pub y_cap: f64,
    pub max_resamples: usize,
}

impl GenConfig {
    pub fn new(spec: ModelSpec) -> Self {
        Self {
            spec,
            n_points: 200,
            domain_low: 1.0,
            domain_high: 5.0,
            min_nonzero: 1,
            max_nonzero: 3,
            coeff_std: 3.0,
            y_cap: 1000.0,
            max_resamples: 6,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        let bad = |m: &str| Err(Error::InvalidConfig(m.into()));
        if !(self.domain_low < self.domain_high) {
            return bad("domain_low must be below domain_high");
        }
        if !(self.y_cap > 0.0) {
            return bad("y_cap must be positive");
        }
        if self.min_nonzero == 0 || self.min_nonzero > self.max_nonzero {
            return bad("nonzero range must satisfy 1 <= min <= max");
        }
        if !(self.coeff_std > 0.0) {
            return bad("coeff_std must be positive");
        }
        if self.n_points == 0 {
            return bad("n_points must be positive");
        }
        Ok(())
    }
}

fn degree(e: &[u32]) -> u32 {
    e.iter().sum()
}

// Chooses the support of one polynomial: a maximal-degree monomial, then
// one monomial per entry of `must_touch` (input indices that have to appear),
// then random fill up to `count`.
fn choose_support(basis: &MonomialBasis, count: usize, must_touch: &[usize], rng: &mut impl Rng) -> Vec<usize> {
    let exps = basis.exponents();
    let top = exps.iter().map(|e| degree(e)).max().unwrap_or(0);
    let mut support = Vec::new();

    let touches_missing = |i: usize, support: &[usize]| {
        must_touch
            .iter()
            .any(|&j| exps[i][j] > 0 && !support.iter().any(|&s: &usize| exps[s][j] > 0))
    };
    let tops: Vec<usize> = (0..exps.len()).filter(|&i| degree(&exps[i]) == top).collect();
    // prefer a top-degree monomial that already covers a required input
    let preferred: Vec<usize> = tops.iter().copied().filter(|&i| touches_missing(i, &[])).collect();
    let pick = preferred.choose(rng).or_else(|| tops.choose(rng)).copied();
    support.extend(pick);

    for &j in must_touch {
        if support.iter().any(|&s| exps[s][j] > 0) {
            continue;
        }
        let options: Vec<usize> = (0..exps.len()).filter(|&i| exps[i][j] > 0).collect();
        support.extend(options.choose(rng).copied());
    }

    let mut rest: Vec<usize> = (0..exps.len()).filter(|i| !support.contains(i)).collect();
    rest.shuffle(rng);
    while support.len() < count.min(exps.len()) {
        match rest.pop() {
            Some(i) => support.push(i),
            None => break,
        }
    }
    support.sort_unstable();
    support
}

/// Draws sparse coefficients for `cfg.spec` and returns them with the
/// simplified expression they define.
pub fn sample_function(cfg: &GenConfig, rng: &mut impl Rng) -> Result<(Vec<f64>, Expr)> {
    cfg.validate()?;
    let fam = Family::new(cfg.spec.clone())?;
    let n = cfg.spec.n_vars;
    let k = cfg.spec.n_base();
    let normal = Normal::new(0.0, cfg.coeff_std).expect("valid std");
    let mut theta = vec![0.0; fam.n_params()];
    let base_inputs: Vec<usize> = (n..n + k).collect();

    for b in fam.layout().blocks() {
        let basis = match (b.rational == k, b.part) {
            (false, Part::Numerator) => fam.input_num_basis(),
            (false, Part::Denominator) => fam.input_den_basis(),
            (true, Part::Numerator) => fam.output_num_basis(),
            (true, Part::Denominator) => fam.output_den_basis().expect("output denominator"),
        };
        let count = rng.random_range(cfg.min_nonzero..=cfg.max_nonzero);
        let must: &[usize] = if b.rational == k && b.part == Part::Numerator {
            &base_inputs
        } else {
            &[]
        };
        for i in choose_support(basis, count, must, rng) {
            let mut v = 0.0;
            while v == 0.0 {
                v = normal.sample(rng);
            }
            theta[b.offset + i] = v;
        }
    }
    let expr = fam.expression(&theta)?;
    Ok((theta, expr))
}

/// Samples `cfg.n_points` rows uniformly on the box and evaluates `f`.
/// Rows with non-finite or out-of-cap targets are redrawn for up to
/// `cfg.max_resamples` rounds; returns `None` if violations remain.
pub fn sample_dataset(f: impl Fn(&[f64]) -> f64, n_vars: usize, cfg: &GenConfig, rng: &mut impl Rng) -> Result<Option<Dataset>> {
    cfg.validate()?;
    let (lo, hi) = (cfg.domain_low, cfg.domain_high);
    let mut x: Vec<f64> = (0..cfg.n_points * n_vars).map(|_| rng.random_range(lo..hi)).collect();
    let mut y: Vec<f64> = x.chunks_exact(n_vars).map(&f).collect();
    let ok = |v: f64| v.is_finite() && v.abs() <= cfg.y_cap;
    for _ in 0..cfg.max_resamples {
        let bad: Vec<usize> = (0..cfg.n_points).filter(|&i| !ok(y[i])).collect();
        if bad.is_empty() {
            break;
        }
        for i in bad {
            for v in &mut x[i * n_vars..(i + 1) * n_vars] {
                *v = rng.random_range(lo..hi);
            }
            y[i] = f(&x[i * n_vars..(i + 1) * n_vars]);
        }
    }
    if y.iter().any(|&v| !ok(v)) {
        return Ok(None);
    }
    Dataset::new(n_vars, x, y).map(Some)
}

/// A generated problem with its ground truth.
#[derive(Debug, Clone)]
pub struct Problem {
    pub theta: Vec<f64>,
    pub expr: Expr,
    pub data: Dataset,
}

/// One function draw and dataset; `None` when the dataset is rejected.
pub fn generate_problem(cfg: &GenConfig, rng: &mut impl Rng) -> Result<Option<Problem>> {
    let (theta, expr) = sample_function(cfg, rng)?;
    let data = sample_dataset(|x| expr.eval(x), cfg.spec.n_vars, cfg, rng)?;
    Ok(data.map(|data| Problem { theta, expr, data }))
}
