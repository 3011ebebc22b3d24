//! Benchmark metrics: coefficient of determination, the evaluation-based
//! symbolic equivalence oracle, complexity and target noise.

pub mod expr;
pub mod parse;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

pub use expr::{complexity, BinaryOp, Expr, UnaryOp};
pub use parse::parse_expr;

/// `R^2` above which a fit counts as an accuracy solution.
pub const ACCURACY_R2: f64 = 0.999;
/// Points sampled by [`symbolic_match`].
pub const MATCH_SAMPLES: usize = 256;
/// Relative spread below which a difference or ratio counts as constant.
pub const MATCH_TOL: f64 = 1e-6;
/// Largest tolerated share of non-finite samples in [`symbolic_match`].
pub const MAX_NONFINITE_SHARE: f64 = 0.05;

/// `1 - SS_res / SS_tot`.
///
/// For constant `y` the result is 1 when the prediction reproduces it (RMSE
/// at most `1e-8 * (1 + |y|)`) and `-inf` otherwise.
pub fn r_squared(y: &[f64], pred: &[f64]) -> f64 {
    assert_eq!(y.len(), pred.len(), "length mismatch");
    assert!(!y.is_empty(), "empty input");
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    let ss_tot: f64 = y.iter().map(|v| (v - mean) * (v - mean)).sum();
    let ss_res: f64 = y.iter().zip(pred).map(|(a, b)| (a - b) * (a - b)).sum();
    if ss_tot == 0.0 {
        let rmse = (ss_res / n).sqrt();
        return if rmse <= 1e-8 * (1.0 + mean.abs()) {
            1.0
        } else {
            f64::NEG_INFINITY
        };
    }
    1.0 - ss_res / ss_tot
}

/// Adds `N(0, sigma^2 * mean(y^2))` noise to every entry.
pub fn add_noise(y: &[f64], sigma: f64, rng: &mut impl Rng) -> Vec<f64> {
    assert!(sigma >= 0.0, "noise level must be non-negative");
    let second_moment = y.iter().map(|v| v * v).sum::<f64>() / y.len().max(1) as f64;
    let std = sigma * second_moment.sqrt();
    if std == 0.0 {
        return y.to_vec();
    }
    let normal = Normal::new(0.0, std).expect("finite std");
    y.iter().map(|v| v + normal.sample(rng)).collect()
}

/// Rounds `c` to the coarsest of 0..=3 decimals that lies within
/// `1e-4 * max(1, |c|)`; returns `c` unchanged when none does.
pub fn snap_constant(c: f64) -> f64 {
    let tol = 1e-4 * c.abs().max(1.0);
    for decimals in 0..=3 {
        let scale = 10f64.powi(decimals);
        let r = (c * scale).round() / scale;
        if (c - r).abs() <= tol {
            return r;
        }
    }
    c
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchKind {
    Offset,
    Factor,
}

/// Outcome of [`symbolic_match`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymbolicMatch {
    pub kind: Option<MatchKind>,
    /// Too many samples evaluated to a non-finite value.
    pub nonfinite: bool,
}

impl SymbolicMatch {
    pub fn is_match(&self) -> bool {
        self.kind.is_some()
    }
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Decides whether `pred` equals `truth` up to an additive or multiplicative
/// constant by sampling the box `domain`. Constants of both trees are
/// snapped with [`snap_constant`] first, which keeps the test reflexive.
pub fn symbolic_match(pred: &Expr, truth: &Expr, domain: &[(f64, f64)], rng: &mut impl Rng) -> SymbolicMatch {
    let pred = pred.map_consts(&snap_constant);
    let truth = truth.map_consts(&snap_constant);
    let mut diffs = Vec::with_capacity(MATCH_SAMPLES);
    let mut ratios = Vec::with_capacity(MATCH_SAMPLES);
    let mut bad = 0usize;
    let mut x = vec![0.0; domain.len()];
    for _ in 0..MATCH_SAMPLES {
        for (xi, &(lo, hi)) in x.iter_mut().zip(domain) {
            *xi = if hi > lo { rng.random_range(lo..hi) } else { lo };
        }
        let p = pred.eval(&x);
        let t = truth.eval(&x);
        if !p.is_finite() || !t.is_finite() {
            bad += 1;
            continue;
        }
        diffs.push(p - t);
        if t.abs() > 1e-8 {
            ratios.push(p / t);
        }
    }
    if bad as f64 > MAX_NONFINITE_SHARE * MATCH_SAMPLES as f64 || diffs.is_empty() {
        return SymbolicMatch {
            kind: None,
            nonfinite: true,
        };
    }
    let (md, sd) = mean_std(&diffs);
    if sd < MATCH_TOL * (1.0 + md.abs()) {
        return SymbolicMatch {
            kind: Some(MatchKind::Offset),
            nonfinite: false,
        };
    }
    if ratios.len() >= 2 {
        let (mr, sr) = mean_std(&ratios);
        if mr != 0.0 && sr < MATCH_TOL * mr.abs() {
            return SymbolicMatch {
                kind: Some(MatchKind::Factor),
                nonfinite: false,
            };
        }
    }
    SymbolicMatch {
        kind: None,
        nonfinite: false,
    }
}

/// Per-problem benchmark outcome.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub r2: f64,
    pub accuracy_hit: bool,
    pub symbolic_hit: bool,
    pub complexity: usize,
    pub wall_time: f64,
}

impl EvalReport {
    pub fn new(r2: f64, symbolic_hit: bool, complexity: usize, wall_time: f64) -> Self {
        Self {
            r2,
            accuracy_hit: r2 > ACCURACY_R2,
            symbolic_hit,
            complexity,
            wall_time,
        }
    }
}
