//! Basin hopping: perturb, minimize locally, accept by the Metropolis rule.

use rand::Rng;

use super::bfgs::{bfgs, BfgsResult};
use super::Objective;

/// Outcome of a global search over a generic objective.
#[derive(Debug, Clone)]
pub struct GlobalResult {
    /// Best point seen; the start point when no local search was finite.
    pub x: Vec<f64>,
    pub f: f64,
    pub n_local_searches: usize,
    pub n_accepted: usize,
    pub n_evals: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct BasinHopping {
    pub iterations: usize,
    pub step_size: f64,
    pub temperature: f64,
    pub max_local_steps: usize,
}

/// Metropolis rule: accept when `exp(-(f_new - f_old) / t) >= u`.
pub fn metropolis_accept(f_old: f64, f_new: f64, temperature: f64, u: f64) -> bool {
    if f_new <= f_old {
        return true;
    }
    (-(f_new - f_old) / temperature).exp() >= u
}

/// Runs an initial local search from `x0`, then `iterations` rounds of
/// uniform perturbation in `[-step_size, step_size]` per coordinate followed
/// by a local search. Returns the best minimum seen.
pub fn basin_hopping(obj: &impl Objective, x0: &[f64], cfg: &BasinHopping, rng: &mut impl Rng) -> GlobalResult {
    let first = bfgs(obj, x0, cfg.max_local_steps);
    let mut n_evals = first.evals;
    let mut current: Option<BfgsResult> = first.is_finite().then_some(first);
    let mut best = current.clone();
    let mut n_accepted = 0;
    let mut trial = vec![0.0; x0.len()];

    for _ in 0..cfg.iterations {
        let from = current.as_ref().map_or(x0, |c| c.x.as_slice());
        for (t, v) in trial.iter_mut().zip(from) {
            *t = v + rng.random_range(-cfg.step_size..=cfg.step_size);
        }
        let r = bfgs(obj, &trial, cfg.max_local_steps);
        n_evals += r.evals;
        let u: f64 = rng.random();
        if !r.is_finite() {
            continue;
        }
        let accept = match &current {
            None => true,
            Some(c) => metropolis_accept(c.f, r.f, cfg.temperature, u),
        };
        if best.as_ref().is_none_or(|b| r.f < b.f) {
            best = Some(r.clone());
        }
        if accept {
            current = Some(r);
            n_accepted += 1;
        }
    }

    let (x, f) = best.map_or((x0.to_vec(), f64::INFINITY), |b| (b.x, b.f));
    GlobalResult {
        x,
        f,
        n_local_searches: cfg.iterations + 1,
        n_accepted,
        n_evals,
    }
}
