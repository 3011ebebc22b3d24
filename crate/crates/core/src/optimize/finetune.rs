//! Sparsification: zero small coefficients at increasing thresholds,
//! re-optimize the survivors, and keep the stage that validates best.

use crate::error::Result;
use crate::family::{Part, Prepared};

use super::bfgs::bfgs;
use super::{LossObjective, Masked, Objective};

/// One threshold stage of the schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct Stage {
    pub threshold: f64,
    /// Nonzero count right after thresholding, before re-optimization.
    pub n_kept: usize,
    pub theta: Vec<f64>,
    /// `+inf` when the candidate is not finite on the validation rows.
    pub val_mse: f64,
    pub evals: usize,
}

impl Stage {
    pub fn n_nonzero(&self) -> usize {
        self.theta.iter().filter(|v| **v != 0.0).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FinetuneResult {
    pub theta: Vec<f64>,
    pub val_mse: f64,
    pub selected: usize,
    pub stages: Vec<Stage>,
}

impl FinetuneResult {
    pub fn evals(&self) -> usize {
        self.stages.iter().map(|s| s.evals).sum()
    }
}

/// Validation-MSE slack within which stages count as tied.
fn tie_tolerance(best: f64, val: &Prepared<'_>) -> f64 {
    let y = val.y();
    let scale = y.iter().map(|v| v * v).sum::<f64>() / y.len().max(1) as f64;
    1e-9 * scale + 1e-6 * best
}

/// Runs the threshold schedule on `theta`.
///
/// Denominator blocks are rescaled to unit norm first (the model is
/// unchanged), and each keeps at least its largest entry. Re-optimization
/// minimizes the training MSE over the surviving coordinates.
pub fn finetune(
    train: &Prepared<'_>,
    val: &Prepared<'_>,
    theta: &[f64],
    thresholds: &[f64],
    max_local_steps: Option<usize>,
) -> Result<FinetuneResult> {
    let fam = train.family();
    let mut cur = theta.to_vec();
    fam.normalize_denominators(&mut cur)?;
    let obj = LossObjective { data: train, lambda: 0.0 };
    let mut stages = Vec::with_capacity(thresholds.len());

    for &t in thresholds {
        let mut keep: Vec<bool> = cur.iter().map(|v| v.abs() >= t).collect();
        for b in fam.layout().blocks().iter().filter(|b| b.part == Part::Denominator) {
            if !keep[b.range()].iter().any(|k| *k) {
                let arg = b
                    .range()
                    .max_by(|&i, &j| cur[i].abs().total_cmp(&cur[j].abs()))
                    .expect("nonempty block");
                keep[arg] = true;
            }
        }
        for (v, k) in cur.iter_mut().zip(&keep) {
            if !k {
                *v = 0.0;
            }
        }
        let free: Vec<usize> = (0..cur.len()).filter(|&i| keep[i]).collect();
        let n_kept = free.len();
        let mut evals = 0;
        if !free.is_empty() {
            let masked = Masked::new(&obj, cur.clone(), free);
            let x0 = masked.restrict(&cur);
            let steps = max_local_steps.unwrap_or(100 * masked.dim());
            let r = bfgs(&masked, &x0, steps);
            evals = r.evals;
            if r.is_finite() {
                cur = masked.expand(&r.x);
                fam.normalize_denominators(&mut cur)?;
            }
        }
        let val_mse = val.mse(&cur).unwrap_or(f64::INFINITY);
        stages.push(Stage {
            threshold: t,
            n_kept,
            theta: cur.clone(),
            val_mse,
            evals,
        });
    }

    let best = stages.iter().map(|s| s.val_mse).fold(f64::INFINITY, f64::min);
    let selected = if best.is_finite() {
        let tol = tie_tolerance(best, val);
        stages
            .iter()
            .enumerate()
            .filter(|(_, s)| s.val_mse <= best + tol)
            .min_by(|(_, a), (_, b)| {
                a.n_nonzero()
                    .cmp(&b.n_nonzero())
                    .then(a.val_mse.total_cmp(&b.val_mse))
            })
            .map(|(i, _)| i)
    } else {
        None
    };
    match selected {
        Some(i) => Ok(FinetuneResult {
            theta: stages[i].theta.clone(),
            val_mse: stages[i].val_mse,
            selected: i,
            stages,
        }),
        None => {
            let mut theta = theta.to_vec();
            fam.normalize_denominators(&mut theta)?;
            let val_mse = val.mse(&theta).unwrap_or(f64::INFINITY);
            Ok(FinetuneResult {
                theta,
                val_mse,
                selected: usize::MAX,
                stages,
            })
        }
    }
}
