use hilfer_cli::expr::{parse_expression, Ast, BinOp, Env, Func, Var};
use proptest::prelude::*;

fn leaf() -> impl Strategy<Value = Ast> {
    prop_oneof![
        prop_oneof![0.0f64..1e6, 1e-12f64..1e-3, Just(0.0), Just(2.0)].prop_map(Ast::Num),
        Just(Ast::Var(Var::T)),
        Just(Ast::Var(Var::S)),
        (0usize..3).prop_map(|k| Ast::Var(Var::U(k))),
        (0usize..3, 0usize..3).prop_map(|(component, point)| Ast::Var(Var::UAt { component, point })),
    ]
}

fn op() -> impl Strategy<Value = BinOp> {
    prop_oneof![
        Just(BinOp::Add),
        Just(BinOp::Sub),
        Just(BinOp::Mul),
        Just(BinOp::Div),
        Just(BinOp::Pow)
    ]
}

fn ast() -> impl Strategy<Value = Ast> {
    leaf().prop_recursive(6, 48, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|x| Ast::Neg(Box::new(x))),
            (op(), inner.clone(), inner.clone()).prop_map(|(o, l, r)| Ast::Bin(o, Box::new(l), Box::new(r))),
            (proptest::sample::select(Func::ALL.to_vec()), inner).prop_map(|(f, x)| Ast::Call(f, Box::new(x))),
        ]
    })
}

proptest! {
    #[test]
    fn unparse_then_parse_is_identity(tree in ast()) {
        let text = tree.to_string();
        let parsed = parse_expression(&text).unwrap();
        prop_assert_eq!(parsed.ast(), &tree);
        let again = parse_expression(&parsed.to_string()).unwrap();
        prop_assert_eq!(again.ast(), &tree);
    }

    #[test]
    fn arbitrary_input_never_panics(src in "[-+*/^()@a-z0-9. ]{0,40}") {
        match parse_expression(&src) {
            Ok(e) => {
                let u = [0.5, 1.5, 2.5];
                let rows: [&[f64]; 3] = [&u, &u, &u];
                let env = Env { t: 0.3, s: 0.1, u: &u, at: &rows };
                let _ = e.eval(&env);
            }
            Err(err) => prop_assert!(err.offset <= src.len()),
        }
    }

    #[test]
    fn evaluation_respects_precedence(a in 0.1f64..5.0, b in 0.1f64..3.0, c in 0.1f64..2.0) {
        let src = format!("{a:?} - {b:?} * {c:?} ^ 2");
        let v = parse_expression(&src).unwrap().eval(&Env::default()).unwrap();
        prop_assert_eq!(v, a - b * c.powf(2.0));
    }
}
