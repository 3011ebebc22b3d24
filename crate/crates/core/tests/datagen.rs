use parfam::datagen::{generate_problem, GenConfig};
use parfam::family::evaluate;
use parfam::optimize::FitConfig;
use parfam::search::{fit_auto, SearchConfig};
use parfam::{BaseFunction, BaseKind, ModelSpec};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn gen_strategy() -> impl Strategy<Value = GenConfig> {
    (
        1usize..=2,
        proptest::option::of(0usize..BaseKind::ALL.len()),
        1u32..=3,
        0u32..=1,
        1usize..=3,
        10usize..60,
    )
        .prop_map(|(n_vars, kind, deg, den, max_nz, n_points)| {
            let mut spec = ModelSpec::polynomial(n_vars, deg, 2);
            if let Some(i) = kind {
                spec.base_functions = vec![BaseFunction::new(BaseKind::ALL[i])];
                spec.deg_input_num = 1;
            }
            spec.deg_output_den = den;
            GenConfig {
                n_points,
                max_nonzero: max_nz + usize::from(kind.is_some()),
                ..GenConfig::new(spec)
            }
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_datasets_respect_the_contract(cfg in gen_strategy(), seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let Some(p) = generate_problem(&cfg, &mut rng).unwrap() else {
            return Ok(());
        };
        prop_assert_eq!(p.data.len(), cfg.n_points);
        prop_assert_eq!(p.data.n_vars(), cfg.spec.n_vars);
        for x in p.data.x() {
            prop_assert!((cfg.domain_low..cfg.domain_high).contains(x));
        }
        for y in p.data.y() {
            prop_assert!(y.is_finite() && y.abs() <= cfg.y_cap);
        }
        let from_theta = evaluate(&cfg.spec, &p.theta, &p.data).unwrap();
        for ((row, a), b) in p.data.rows().zip(&from_theta).zip(p.data.y()) {
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + b.abs()), "row {:?}: {} vs {}", row, a, b);
        }
    }
}

#[test]
fn low_degree_problems_are_recovered() {
    let cfg = GenConfig::new(ModelSpec::polynomial(1, 2, 2));
    let search = SearchConfig {
        max_base_functions: 0,
        max_deg_output_num: 2,
        max_deg_output_den: 0,
        max_var_power: 2,
        ..SearchConfig::default()
    };
    let mut hits = 0;
    for seed in 0..6 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = generate_problem(&cfg, &mut rng).unwrap().unwrap();
        let r = fit_auto(&p.data, &search, &FitConfig::default()).unwrap();
        if r.best.r2_val > 0.999 {
            hits += 1;
        }
    }
    assert!(hits >= 4, "{hits}/6 recovered");
}
