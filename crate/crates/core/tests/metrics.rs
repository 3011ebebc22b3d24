use parfam::metrics::{complexity, parse_expr, r_squared, symbolic_match, BinaryOp, Expr, MatchKind, UnaryOp};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn expr_strategy() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (-50.0f64..50.0).prop_map(Expr::Const),
        (0usize..3).prop_map(Expr::Var),
    ];
    leaf.prop_recursive(5, 40, 2, |inner| {
        let unary = prop_oneof![
            Just(UnaryOp::Sin),
            Just(UnaryOp::Cos),
            Just(UnaryOp::Exp),
            Just(UnaryOp::Sqrt),
            Just(UnaryOp::Log),
            Just(UnaryOp::Neg),
        ];
        let binary = prop_oneof![
            Just(BinaryOp::Add),
            Just(BinaryOp::Sub),
            Just(BinaryOp::Mul),
            Just(BinaryOp::Div),
        ];
        prop_oneof![
            (unary, inner.clone()).prop_map(|(op, a)| Expr::unary(op, a)),
            (binary, inner.clone(), inner.clone()).prop_map(|(op, a, b)| Expr::Binary(op, Box::new(a), Box::new(b))),
            (inner, 1u32..5).prop_map(|(a, p)| Expr::pow(a, p)),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn r2_is_affine_invariant(
        y in proptest::collection::vec(-10.0f64..10.0, 3..40),
        noise in proptest::collection::vec(-1.0f64..1.0, 40),
        a in prop_oneof![-100.0f64..-0.01, 0.01f64..100.0],
        c in -100.0f64..100.0,
    ) {
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        prop_assume!(y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() > 1e-3);
        let pred: Vec<f64> = y.iter().zip(&noise).map(|(v, e)| v + e).collect();
        let r = r_squared(&y, &pred);
        let ty: Vec<f64> = y.iter().map(|v| a * v + c).collect();
        let tp: Vec<f64> = pred.iter().map(|v| a * v + c).collect();
        let rt = r_squared(&ty, &tp);
        prop_assert!((r - rt).abs() <= 1e-12 * (1.0 + r.abs()), "{} vs {}", r, rt);
        prop_assert!(r <= 1.0);
    }

    #[test]
    fn printed_expressions_parse_back(e in expr_strategy()) {
        let text = e.to_string();
        let back = parse_expr(&text).unwrap();
        prop_assert_eq!(&back, &e);
        prop_assert_eq!(complexity(&back), complexity(&e));
        let s = e.simplify();
        prop_assert_eq!(parse_expr(&s.to_string()).unwrap(), s);
    }

    #[test]
    fn symbolic_match_is_reflexive(e in expr_strategy(), seed in 0u64..1000) {
        let dom = [(1.0, 5.0); 3];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = symbolic_match(&e, &e, &dom, &mut rng);
        prop_assert!(m.is_match() || m.nonfinite);
    }

    #[test]
    fn offset_match_is_symmetric(e in expr_strategy(), c in -5.0f64..5.0, seed in 0u64..1000) {
        let dom = [(1.0, 5.0); 3];
        let shifted = Expr::add(e.clone(), Expr::Const(c.round()));
        let a = symbolic_match(&shifted, &e, &dom, &mut ChaCha8Rng::seed_from_u64(seed));
        let b = symbolic_match(&e, &shifted, &dom, &mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(a.kind == Some(MatchKind::Offset), b.kind == Some(MatchKind::Offset));
    }
}

#[test]
fn match_kinds() {
    let dom = [(1.0, 5.0)];
    let truth = parse_expr("(sin(x0) * x0)").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let shifted = parse_expr("((sin(x0) * x0) + 2.0)").unwrap();
    assert_eq!(symbolic_match(&shifted, &truth, &dom, &mut rng).kind, Some(MatchKind::Offset));
    let scaled = parse_expr("(3.0 * (sin(x0) * x0))").unwrap();
    assert_eq!(symbolic_match(&scaled, &truth, &dom, &mut rng).kind, Some(MatchKind::Factor));
    let other = parse_expr("(cos(x0) * x0)").unwrap();
    assert!(!symbolic_match(&other, &truth, &dom, &mut rng).is_match());
}

#[test]
fn near_integer_constants_are_snapped_before_matching() {
    let dom = [(1.0, 5.0)];
    let truth = parse_expr("(x0^2)").unwrap();
    let pred = parse_expr("((x0^2) + (0.00003 * x0))").unwrap();
    let m = symbolic_match(&pred, &truth, &dom, &mut ChaCha8Rng::seed_from_u64(1));
    assert!(m.is_match());
}
