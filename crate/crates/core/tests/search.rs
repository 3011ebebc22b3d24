use std::collections::HashSet;

use parfam::data::HOLDOUT_FRACTION;
use parfam::metrics::{parse_expr, symbolic_match};
use parfam::optimize::FitConfig;
use parfam::search::{fit_auto, fit_spec, traverse_specs, SearchConfig};
use parfam::{BaseKind, Dataset};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn config_strategy() -> impl Strategy<Value = SearchConfig> {
    (
        1u32..=3,
        0u32..=2,
        1u32..=4,
        0u32..=3,
        0usize..=2,
        proptest::sample::subsequence(BaseKind::ALL.to_vec(), 1..=3),
    )
        .prop_map(|(din, dinden, dout, doutden, nb, pool)| SearchConfig {
            max_deg_input_num: din,
            max_deg_input_den: dinden,
            max_deg_output_num: dout,
            max_deg_output_den: doutden,
            max_base_functions: nb,
            base_functions: pool,
            ..SearchConfig::default()
        })
}

fn binomial(n: usize, r: usize) -> usize {
    (0..r).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn traversal_is_deterministic_and_duplicate_free(cfg in config_strategy(), n_vars in 1usize..=3) {
        let a = traverse_specs(&cfg, n_vars);
        prop_assert_eq!(&a, &traverse_specs(&cfg, n_vars));
        let set: HashSet<_> = a.iter().collect();
        prop_assert_eq!(set.len(), a.len());
        prop_assert_eq!(a[0].n_base(), 0);
        prop_assert_eq!(a[0].deg_output_den, 0);

        let p = cfg.base_functions.len();
        let per = (cfg.max_deg_output_den as usize + 1)
            * cfg.max_deg_output_num as usize
            * (cfg.max_deg_input_den as usize + 1)
            * cfg.max_deg_input_num as usize;
        let expected = 1
            + (cfg.max_deg_output_den * cfg.max_deg_output_num) as usize
            + (1..=cfg.max_base_functions).map(|b| per * binomial(p + b - 1, b)).sum::<usize>();
        prop_assert_eq!(a.len(), expected);

        for w in a.windows(2) {
            prop_assert!(w[0].n_base() <= w[1].n_base());
        }
        for s in &a {
            prop_assert!(s.validate().is_ok());
            prop_assert!(s.n_base() <= cfg.max_base_functions);
        }
    }
}

fn grid(n: usize, lo: f64, hi: f64, f: impl Fn(f64) -> f64) -> Dataset {
    let xs: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
    let ys = xs.iter().map(|&x| f(x)).collect();
    Dataset::new(1, xs, ys).unwrap()
}

fn small_search() -> SearchConfig {
    SearchConfig {
        max_deg_input_num: 1,
        max_deg_input_den: 0,
        max_deg_output_num: 2,
        max_deg_output_den: 1,
        max_base_functions: 1,
        base_functions: vec![BaseKind::Sin],
        max_var_power: 2,
        ..SearchConfig::default()
    }
}

#[test]
fn early_stop_is_sound() {
    let data = grid(60, -2.0, 2.0, |x| 0.5 + 2.0 * x * x);
    let r = fit_auto(&data, &small_search(), &FitConfig::default()).unwrap();
    assert!(r.early_stopped);
    assert!(r.best.r2_val > 0.999);
    assert_eq!(r.n_specs_fitted, r.best.spec_index + 1);
    assert_eq!(r.best.spec_index, 0);
}

#[test]
fn eval_budget_accounting_matches_per_spec_counts() {
    // no member of the small family reaches the threshold, so only the budget stops the search
    let data = grid(60, 0.1, 3.0, |x| (3.0 * x).sin() * x.exp() + (1.0 / x).sqrt());
    let search = small_search();
    let fit = FitConfig {
        bh_iterations: 2,
        ..FitConfig::default()
    };
    let (train, val) = data.split_tail(HOLDOUT_FRACTION);
    let specs = traverse_specs(&search, 1);
    let per_spec: Vec<u64> = specs
        .iter()
        .enumerate()
        .map(|(i, s)| fit_spec(s, i, &train, &val, &fit).map_or(0, |(_, n)| n))
        .collect();
    let budget = per_spec[0] + per_spec[1] / 2;
    let r = fit_auto(
        &data,
        &SearchConfig {
            eval_budget: Some(budget),
            ..search
        },
        &fit,
    )
    .unwrap();
    assert!(r.budget_exhausted);
    assert!(!r.early_stopped);
    assert_eq!(r.n_specs_fitted, 2);
    assert_eq!(r.eval_count, per_spec[0] + per_spec[1]);
    assert!(r.eval_count < budget + per_spec[1]);
}

#[test]
fn full_traversal_without_success_visits_every_spec() {
    let data = grid(40, 0.1, 3.0, |x| (5.0 * x).sin() / x + x.ln());
    let search = SearchConfig {
        success_r2: 1.0,
        ..small_search()
    };
    let fit = FitConfig {
        bh_iterations: 1,
        ..FitConfig::default()
    };
    let r = fit_auto(&data, &search, &fit).unwrap();
    assert_eq!(r.n_specs_fitted, r.n_specs_total);
    assert!(!r.early_stopped && !r.budget_exhausted);
    assert_eq!(r, fit_auto(&data, &search, &fit).map(|mut s| {
        s.wall_time = r.wall_time;
        s
    }).unwrap());
}

#[test]
fn constant_data_reduces_to_the_constant() {
    let data = grid(30, -1.0, 1.0, |_| 3.0);
    let r = fit_auto(&data, &SearchConfig::default(), &FitConfig::default()).unwrap();
    assert_eq!(r.best.spec_index, 0);
    assert_eq!(r.best.expression.simplify(), parfam::Expr::Const(3.0));
}

fn nguyen_search() -> SearchConfig {
    SearchConfig {
        max_deg_input_num: 2,
        max_deg_input_den: 0,
        max_deg_output_num: 6,
        max_deg_output_den: 0,
        max_base_functions: 2,
        base_functions: vec![BaseKind::Sin, BaseKind::Exp],
        max_var_power: 6,
        ..SearchConfig::default()
    }
}

#[test]
fn cubic_is_recovered_by_the_polynomial_spec() {
    let truth = parse_expr("(((x0^3) + (x0^2)) + x0)").unwrap();
    let data = grid(20, -1.0, 1.0, |x| truth.eval(&[x]));
    let r = fit_auto(&data, &nguyen_search(), &FitConfig::default()).unwrap();
    assert_eq!(r.best.spec_index, 0);
    let m = symbolic_match(&r.best.expression, &truth, &[(-1.0, 1.0)], &mut ChaCha8Rng::seed_from_u64(0));
    assert!(m.is_match(), "{}", r.best.expression);
}

// The regularized objective prefers smooth approximations of this target
// over its exact form; see the README section on known limitations.
#[test]
#[ignore = "unattained: the exact form is not the regularized optimum"]
fn sin_cos_product_is_recovered_in_most_seeds() {
    let truth = parse_expr("((sin((x0^2)) * cos(x0)) - 1.0)").unwrap();
    let mut hits = 0;
    for seed in 0..6u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let xs: Vec<f64> = (0..100).map(|_| rng.random_range(-2.0..2.0)).collect();
        let ys = xs.iter().map(|x| truth.eval(&[*x])).collect();
        let data = Dataset::new(1, xs, ys).unwrap();
        let fit = FitConfig { seed, ..FitConfig::default() };
        let r = fit_auto(&data, &nguyen_search(), &fit).unwrap();
        let m = symbolic_match(&r.best.expression, &truth, &[(-2.0, 2.0)], &mut ChaCha8Rng::seed_from_u64(seed));
        hits += usize::from(m.is_match() && r.best.spec.n_base() > 0);
    }
    assert!(hits >= 4, "{hits}/6 recovered");
}
