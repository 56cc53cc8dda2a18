use proptest::prelude::*;
use wml_core::expr::{BinaryOp, Expr, RadialFunction, UnaryOp};

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![(0.0f64..5.0).prop_map(Expr::Const), Just(Expr::Var)]
}

/// Trees built from operations that stay smooth and finite for r in (0.1, 10)
/// as long as the results are checked before use.
fn tree() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(4, 24, 2, |inner| {
        let unary = prop_oneof![
            Just(UnaryOp::Neg),
            Just(UnaryOp::Exp),
            Just(UnaryOp::Sin),
            Just(UnaryOp::Cos),
            Just(UnaryOp::Tanh),
            Just(UnaryOp::Sinh),
            Just(UnaryOp::Cosh),
        ];
        let binary = prop_oneof![Just(BinaryOp::Add), Just(BinaryOp::Sub), Just(BinaryOp::Mul)];
        prop_oneof![
            (unary, inner.clone()).prop_map(|(op, a)| Expr::Unary(op, Box::new(a))),
            (binary, inner.clone(), inner).prop_map(|(op, a, b)| Expr::Binary(op, Box::new(a), Box::new(b))),
        ]
    })
}

fn sane(v: f64) -> bool {
    v.is_finite() && v.abs() < 1e100
}

proptest! {
    #[test]
    fn product_rule(a in tree(), b in tree(), r in 0.1f64..10.0) {
        let fa = RadialFunction::from_ast(a.clone());
        let fb = RadialFunction::from_ast(b.clone());
        let prod = RadialFunction::from_ast(Expr::Binary(BinaryOp::Mul, Box::new(a), Box::new(b)));
        let (ja, jb) = match (fa.eval_jet(r), fb.eval_jet(r)) {
            (Ok(x), Ok(y)) => (x, y),
            _ => return Err(TestCaseError::reject("domain")),
        };
        let jp = prod.eval_jet(r).unwrap();
        let terms = [ja.d1 * jb.value, ja.value * jb.d1];
        prop_assume!(terms.iter().all(|t| sane(*t)));
        let scale = terms[0].abs() + terms[1].abs();
        prop_assert!((jp.d1 - terms[0] - terms[1]).abs() <= 1e-12 * scale, "{} vs {:?}", jp.d1, terms);
        let sum = RadialFunction::from_ast(Expr::Binary(BinaryOp::Add, Box::new(fa.ast().clone()), Box::new(fb.ast().clone())));
        let js = sum.eval_jet(r).unwrap();
        prop_assert!((js.d2 - ja.d2 - jb.d2).abs() <= 1e-12 * (ja.d2.abs() + jb.d2.abs()));
    }

    #[test]
    fn chain_rule_through_exp(a in tree(), r in 0.1f64..10.0) {
        let Ok(ja) = RadialFunction::from_ast(a.clone()).eval_jet(r) else {
            return Err(TestCaseError::reject("domain"));
        };
        prop_assume!(ja.value < 200.0 && sane(ja.d1) && sane(ja.d2));
        let je = RadialFunction::from_ast(Expr::Unary(UnaryOp::Exp, Box::new(a))).eval_jet(r).unwrap();
        let e = ja.value.exp();
        prop_assert!((je.d1 - e * ja.d1).abs() <= 1e-12 * (e * ja.d1).abs().max(f64::MIN_POSITIVE));
        let want = e * (ja.d2 + ja.d1 * ja.d1);
        prop_assert!((je.d2 - want).abs() <= 1e-12 * e * (ja.d2.abs() + ja.d1 * ja.d1));
    }

    #[test]
    fn print_parse_round_trip(a in tree()) {
        let text = a.to_string();
        let back = RadialFunction::parse(&text).unwrap();
        prop_assert_eq!(back.ast(), &a);
    }

    #[test]
    fn parse_is_deterministic(a in tree(), r in 0.1f64..10.0) {
        let f = RadialFunction::from_ast(a);
        let g = RadialFunction::parse(f.source()).unwrap();
        match (f.eval_jet(r), g.eval_jet(r)) {
            (Ok(x), Ok(y)) => prop_assert_eq!(x, y),
            (Err(x), Err(y)) => prop_assert_eq!(x, y),
            other => prop_assert!(false, "{:?}", other),
        }
    }

    #[test]
    fn derivatives_match_central_differences(
        c in prop::array::uniform4(0.2f64..2.0),
        which in 0usize..5,
        r in 0.2f64..5.0,
    ) {
        let text = [
            format!("{}*sin({}*r) + cos(r)", c[0], c[1]),
            format!("exp(-{}*r^2) * r^3", c[0]),
            format!("log(1 + {}*r) + sqrt({} + r)", c[0], c[1]),
            format!("sinh({}*r)/({} + r)", c[0], c[1]),
            format!("(r^2 + {})^{} * tanh({}*r)", c[0], c[1], c[2] + c[3]),
        ][which].clone();
        let f = RadialFunction::parse(&text).unwrap();
        let h = 1e-5;
        let j = f.eval_jet(r).unwrap();
        let (p, m) = (f.eval_jet(r + h).unwrap(), f.eval_jet(r - h).unwrap());
        let d1 = (p.value - m.value) / (2.0 * h);
        let d2 = (p.d1 - m.d1) / (2.0 * h);
        let s1 = j.d1.abs().max(j.value.abs());
        let s2 = j.d2.abs().max(j.d1.abs());
        prop_assert!((d1 - j.d1).abs() < 1e-6 * s1, "{text}: {d1} vs {}", j.d1);
        prop_assert!((d2 - j.d2).abs() < 1e-6 * s2, "{text}: {d2} vs {}", j.d2);
    }
}
