use rand::Rng;

use super::basin::GlobalResult;
use super::bfgs::bfgs;
use super::{random_start, Objective};

/// Independent BFGS runs from standard-normal starts; keeps the best.
pub fn multistart(obj: &impl Objective, n_starts: usize, max_steps: usize, rng: &mut impl Rng) -> GlobalResult {
    let dim = obj.dim();
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut n_evals = 0;
    let mut first_start = None;
    for _ in 0..n_starts {
        let x0 = random_start(dim, rng);
        let r = bfgs(obj, &x0, max_steps);
        n_evals += r.evals;
        first_start.get_or_insert(x0);
        if r.is_finite() && best.as_ref().is_none_or(|(_, f)| r.f < *f) {
            best = Some((r.x, r.f));
        }
    }
    let (x, f) = best.unwrap_or_else(|| (first_start.unwrap_or_default(), f64::INFINITY));
    GlobalResult {
        x,
        f,
        n_local_searches: n_starts,
        n_accepted: 0,
        n_evals,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimize::FnObjective;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_start_equals_plain_bfgs() {
        let obj = FnObjective::new(2, |x: &[f64], g: &mut [f64]| {
            g[0] = 2.0 * (x[0] - 1.0);
            g[1] = 4.0 * (x[1] + 2.0);
            Some((x[0] - 1.0).powi(2) + 2.0 * (x[1] + 2.0).powi(2))
        });
        let r = multistart(&obj, 1, 100, &mut ChaCha8Rng::seed_from_u64(5));
        let x0 = random_start(2, &mut ChaCha8Rng::seed_from_u64(5));
        let direct = bfgs(&obj, &x0, 100);
        assert_eq!(r.x, direct.x);
        assert_eq!(r.f, direct.f);
    }

    #[test]
    fn convex_starts_agree() {
        let obj = FnObjective::new(3, |x: &[f64], g: &mut [f64]| {
            let mut f = 0.0;
            for i in 0..3 {
                g[i] = 2.0 * x[i];
                f += x[i] * x[i];
            }
            Some(f + 1.0)
        });
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..5 {
            let x0 = random_start(3, &mut rng);
            assert!((bfgs(&obj, &x0, 100).f - 1.0).abs() < 1e-6);
        }
    }
}
