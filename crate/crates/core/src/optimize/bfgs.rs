//! Dense BFGS with a backtracking Armijo line search.

use super::Objective;

/// Gradient norm below which a point counts as stationary.
pub const GRAD_TOL: f64 = 1e-8;
/// Armijo sufficient-decrease constant.
pub const ARMIJO_C: f64 = 1e-4;
/// Step shrink factor per backtrack.
pub const BACKTRACK: f64 = 0.5;
/// Backtracks before the line search gives up.
pub const MAX_BACKTRACKS: usize = 40;
/// Consecutive steps with relative decrease below [`STALL_REL`] that end the run.
pub const STALL_STEPS: usize = 8;
pub const STALL_REL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BfgsStatus {
    Converged,
    MaxSteps,
    LineSearchFailed,
    Stalled,
    /// The objective was not finite at the starting point.
    NonFiniteStart,
}

#[derive(Debug, Clone)]
pub struct BfgsResult {
    pub x: Vec<f64>,
    /// Objective at `x`; `+inf` when the start was not finite.
    pub f: f64,
    pub steps: usize,
    pub evals: usize,
    pub status: BfgsStatus,
}

impl BfgsResult {
    pub fn is_finite(&self) -> bool {
        self.status != BfgsStatus::NonFiniteStart && self.f.is_finite()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn set_identity(h: &mut [f64], n: usize, scale: f64) {
    h.fill(0.0);
    for i in 0..n {
        h[i * n + i] = scale;
    }
}

/// Minimizes `obj` from `x0`. Every accepted step decreases the objective,
/// so the returned point is the best iterate.
pub fn bfgs(obj: &impl Objective, x0: &[f64], max_steps: usize) -> BfgsResult {
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut g = vec![0.0; n];
    let mut evals = 1;
    let Some(mut f) = obj.eval(&x, &mut g) else {
        return BfgsResult {
            x,
            f: f64::INFINITY,
            steps: 0,
            evals,
            status: BfgsStatus::NonFiniteStart,
        };
    };

    let mut h = vec![0.0; n * n];
    set_identity(&mut h, n, 1.0);
    let mut h_is_identity = true;
    let mut p = vec![0.0; n];
    let mut x_new = vec![0.0; n];
    let mut g_new = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut hy = vec![0.0; n];
    let mut stall = 0;
    let mut steps = 0;

    let status = loop {
        let gnorm = norm(&g);
        if gnorm < GRAD_TOL {
            break BfgsStatus::Converged;
        }
        if steps >= max_steps {
            break BfgsStatus::MaxSteps;
        }

        for i in 0..n {
            p[i] = -dot(&h[i * n..(i + 1) * n], &g);
        }
        let mut slope = dot(&g, &p);
        if !(slope < 0.0) {
            set_identity(&mut h, n, 1.0);
            h_is_identity = true;
            p.iter_mut().zip(&g).for_each(|(pi, gi)| *pi = -gi);
            slope = -gnorm * gnorm;
        }

        let mut alpha = if h_is_identity { 1.0 / gnorm.max(1.0) } else { 1.0 };
        let mut accepted = None;
        for _ in 0..=MAX_BACKTRACKS {
            for i in 0..n {
                x_new[i] = x[i] + alpha * p[i];
            }
            evals += 1;
            if let Some(fv) = obj.eval(&x_new, &mut g_new) {
                if fv <= f + ARMIJO_C * alpha * slope {
                    accepted = Some(fv);
                    break;
                }
            }
            alpha *= BACKTRACK;
        }
        let Some(f_new) = accepted else {
            if h_is_identity {
                break BfgsStatus::LineSearchFailed;
            }
            set_identity(&mut h, n, 1.0);
            h_is_identity = true;
            continue;
        };
        steps += 1;

        for i in 0..n {
            s[i] = x_new[i] - x[i];
            y[i] = g_new[i] - g[i];
        }
        if f - f_new <= STALL_REL * f.abs().max(1.0) {
            stall += 1;
        } else {
            stall = 0;
        }
        std::mem::swap(&mut x, &mut x_new);
        std::mem::swap(&mut g, &mut g_new);
        f = f_new;
        if stall >= STALL_STEPS {
            break BfgsStatus::Stalled;
        }

        let sy = dot(&s, &y);
        let yy = dot(&y, &y);
        if sy > 1e-10 * norm(&s) * yy.sqrt() && sy > 0.0 {
            if h_is_identity {
                set_identity(&mut h, n, sy / yy);
            }
            let rho = 1.0 / sy;
            for i in 0..n {
                hy[i] = dot(&h[i * n..(i + 1) * n], &y);
            }
            let yhy = dot(&y, &hy);
            let c = rho * rho * yhy + rho;
            for i in 0..n {
                for j in 0..n {
                    h[i * n + j] += c * s[i] * s[j] - rho * (hy[i] * s[j] + s[i] * hy[j]);
                }
            }
            h_is_identity = false;
        }
    };

    BfgsResult {
        x,
        f,
        steps,
        evals,
        status,
    }
}
