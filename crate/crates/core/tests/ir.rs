use std::collections::BTreeSet;

use matlang::gen::{generate_case, GenConfig};
use matlang::ir::{free_vars, fresh_name, validate_dialect, walk, Dialect, Expr};
use proptest::prelude::*;

/// Set-based free-variable reference.
fn naive_free(e: &Expr) -> BTreeSet<String> {
    let union = |es: &mut dyn Iterator<Item = &Expr>| es.flat_map(naive_free).collect::<BTreeSet<_>>();
    match e {
        Expr::Var(n) => BTreeSet::from([n.clone()]),
        Expr::Transpose(a) | Expr::Ones(a) | Expr::Diag(a) | Expr::PickAny(a) => naive_free(a),
        Expr::MatMul(a, b) => union(&mut [&**a, &**b].into_iter()),
        Expr::Apply { args, .. } => union(&mut args.iter()),
        Expr::Let { name, bound, body } => {
            let mut inner = naive_free(body);
            inner.remove(name);
            &naive_free(bound) | &inner
        }
        Expr::ForCanonical { v, bindings, inits } => {
            let mut inner = union(&mut bindings.iter().map(|(_, b)| b));
            for (n, _) in bindings {
                inner.remove(n);
            }
            inner.remove(v);
            let mut out = &union(&mut inits.iter()) | &inner;
            out.insert(v.clone());
            out
        }
        Expr::ForCounted { driver, bindings, inits } => {
            let mut inner = union(&mut bindings.iter().map(|(_, b)| b));
            for (n, _) in bindings {
                inner.remove(n);
            }
            &(&naive_free(driver) | &union(&mut inits.iter())) | &inner
        }
    }
}

fn arb_expr() -> impl Strategy<Value = Expr> {
    let names = prop::sample::select(vec!["A", "B", "X", "Y", "v"]);
    let leaf = names.clone().prop_map(Expr::var);
    leaf.prop_recursive(5, 40, 3, move |inner| {
        let names = names.clone();
        prop_oneof![
            inner.clone().prop_map(Expr::t),
            inner.clone().prop_map(Expr::ones),
            inner.clone().prop_map(Expr::pick_any),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.matmul(b)),
            (names.clone(), inner.clone(), inner.clone()).prop_map(|(n, b, body)| Expr::let_in(n, b, body)),
            (names.clone(), names.clone(), inner.clone(), inner.clone())
                .prop_map(|(v, x, body, init)| Expr::for_canonical(v, vec![(x, body)], vec![init])),
            (inner.clone(), names.clone(), names, inner.clone(), inner.clone(), inner).prop_map(
                |(d, x, y, bx, by, init)| Expr::for_counted(d, vec![(x, bx), (y, by)], vec![init.clone(), init])
            ),
        ]
    })
}

proptest! {
    #[test]
    fn free_vars_matches_reference(e in arb_expr()) {
        prop_assert_eq!(free_vars(&e), naive_free(&e));
    }

    #[test]
    fn fresh_name_avoids_the_set(
        hint in "[a-zA-Z]{1,3}",
        taken in prop::collection::btree_set(0usize..12_000, 0..10_000),
        bare in any::<bool>(),
    ) {
        let mut avoid: BTreeSet<String> = taken.iter().map(|k| format!("{hint}_{k}")).collect();
        if bare {
            avoid.insert(hint.clone());
        }
        let n = fresh_name(&avoid, &hint);
        prop_assert!(!avoid.contains(&n));
        prop_assert_eq!(&n, &fresh_name(&avoid, &hint));
    }
}

#[test]
fn fresh_name_examples() {
    let set = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<BTreeSet<_>>();
    assert_eq!(fresh_name(&set(&["v", "V"]), "V"), "V_1");
    assert_eq!(fresh_name(&set(&[]), "V"), "V");
    assert_eq!(fresh_name(&set(&["V", "V_1"]), "V"), "V_2");
}

#[test]
fn free_vars_on_generated_subexpressions() {
    for index in 0..200 {
        let dialect = [Dialect::ForMl, Dialect::SiforMl, Dialect::DecMl, Dialect::Core][index % 4];
        let case = generate_case(3, index as u64, &GenConfig::new(dialect, 4));
        walk(&case.expr, &mut |sub| assert_eq!(free_vars(sub), naive_free(sub), "case {index}"));
        let declared: BTreeSet<String> = case.schema.iter().map(|(n, _)| n.clone()).collect();
        assert!(free_vars(&case.expr).is_subset(&declared));
    }
}

#[test]
fn dialects_are_monotone() {
    let chain = [Dialect::Ml, Dialect::ForMl, Dialect::SiforMl];
    for index in 0..300u64 {
        let start = chain[index as usize % 3];
        let case = generate_case(5, index, &GenConfig::new(start, 4));
        let (s, e) = (&case.schema, &case.expr);
        assert!(validate_dialect(e, start, s).is_ok());
        for &d in chain.iter().skip_while(|&&d| d != start) {
            assert!(validate_dialect(e, d, s).is_ok(), "case {index}: {start} program rejected by {d}");
        }
    }
}
