use matlang::eval::eval;
use matlang::gen::{generate_case, GenConfig};
use matlang::harness::{check_soundness, diff_config};
use matlang::ir::{Dialect, Expr, MatrixType, PointwiseFn, ScalarExpr, Schema, SizeTerm};
use matlang::semiring::SemiringId::*;
use matlang::typecheck::{check_fn, infer_type};

const DIALECTS: [Dialect; 6] =
    [Dialect::Ml, Dialect::ForMl, Dialect::SiforMl, Dialect::DecMl, Dialect::MuseMl, Dialect::Core];

/// Reverses bindings 2..m (and their inits) of every loop.
fn permute_tails(e: &Expr) -> Expr {
    let go = |b: &Expr| Box::new(permute_tails(b));
    let swap = |bindings: &[(String, Expr)], inits: &[Expr]| {
        let mut b: Vec<(String, Expr)> = bindings.iter().map(|(n, x)| (n.clone(), permute_tails(x))).collect();
        let mut i: Vec<Expr> = inits.iter().map(permute_tails).collect();
        b[1..].reverse();
        i[1..].reverse();
        (b, i)
    };
    match e {
        Expr::Var(_) => e.clone(),
        Expr::Transpose(a) => Expr::Transpose(go(a)),
        Expr::Ones(a) => Expr::Ones(go(a)),
        Expr::Diag(a) => Expr::Diag(go(a)),
        Expr::PickAny(a) => Expr::PickAny(go(a)),
        Expr::MatMul(a, b) => Expr::MatMul(go(a), go(b)),
        Expr::Apply { func, args } => {
            Expr::Apply { func: func.clone(), args: args.iter().map(permute_tails).collect() }
        }
        Expr::Let { name, bound, body } => Expr::Let { name: name.clone(), bound: go(bound), body: go(body) },
        Expr::ForCanonical { v, bindings, inits } => {
            let (bindings, inits) = swap(bindings, inits);
            Expr::ForCanonical { v: v.clone(), bindings, inits }
        }
        Expr::ForCounted { driver, bindings, inits } => {
            let (bindings, inits) = swap(bindings, inits);
            Expr::ForCounted { driver: go(driver), bindings, inits }
        }
    }
}

#[test]
fn generated_programs_are_sound() {
    let cfg = diff_config();
    let mut evaluated = 0;
    for index in 0..600u64 {
        let case = generate_case(21, index, &GenConfig::new(DIALECTS[index as usize % 6], 6));
        let first = infer_type(&case.schema, &case.expr).unwrap();
        assert_eq!(infer_type(&case.schema, &case.expr).unwrap(), first);
        if check_soundness(&case.schema, &case.expr, &case.instance, &cfg)
            .unwrap_or_else(|e| panic!("case {index}: {e}"))
            .is_some()
        {
            evaluated += 1;
        }
    }
    assert!(evaluated >= 550);
}

#[test]
fn permuting_trailing_bindings_keeps_the_type() {
    let mut permuted = 0;
    for index in 0..400u64 {
        let case = generate_case(23, index, &GenConfig::new(DIALECTS[2 + index as usize % 4], 5));
        let p = permute_tails(&case.expr);
        if p != case.expr {
            permuted += 1;
        }
        assert_eq!(infer_type(&case.schema, &p).unwrap(), infer_type(&case.schema, &case.expr).unwrap());
        if let (Ok(a), Ok(b)) = (eval(&case.instance, &p), eval(&case.instance, &case.expr)) {
            assert_eq!(a, b, "case {index}");
        }
    }
    assert!(permuted > 20, "only {permuted} programs had loops with several bindings");
}

fn ty(r: &str, c: &str, ring: matlang::semiring::SemiringId) -> MatrixType {
    let st = |s: &str| if s == "1" { SizeTerm::One } else { SizeTerm::sym(s) };
    MatrixType::new(st(r), st(c), ring)
}

#[test]
fn rejects_ill_typed_programs() {
    let s = Schema::new().with("A", ty("n", "m", Int)).with("B", ty("n", "m", Real)).with("v", ty("n", "1", Int));
    let bad = [
        Expr::var("A").matmul(Expr::var("A")),
        Expr::var("A").matmul(Expr::var("B").t()),
        Expr::var("A").diag(),
        Expr::var("C"),
        Expr::apply(PointwiseFn::add(Int), vec![Expr::var("A"), Expr::var("B")]),
        Expr::for_counted(Expr::var("A"), vec![("X", Expr::var("X"))], vec![Expr::var("v")]),
        Expr::for_counted(Expr::var("v"), vec![("X", Expr::var("X").t())], vec![Expr::var("A")]),
    ];
    for e in bad {
        assert!(infer_type(&s, &e).is_err(), "{e:?}");
    }
    let ok = Expr::var("A").t().matmul(Expr::var("v"));
    assert_eq!(infer_type(&s, &ok).unwrap(), ty("m", "1", Int));
}

#[test]
fn scalar_rules() {
    let div = PointwiseFn::new(vec![("c", Real)], ScalarExpr::param("c").div(ScalarExpr::param("c")));
    assert_eq!(check_fn(&div).unwrap(), Real);
    let eq = PointwiseFn::new(vec![("a", Int), ("b", Int)], ScalarExpr::param("a").eq(ScalarExpr::param("b")));
    assert_eq!(check_fn(&eq).unwrap(), Bool);
    let sub = PointwiseFn::new(vec![("a", Bool)], ScalarExpr::param("a").sub(ScalarExpr::param("a")));
    assert!(check_fn(&sub).is_err());
    let cast = PointwiseFn::new(vec![("c", Int)], ScalarExpr::param("c").cast(IntMaxPlus));
    assert_eq!(check_fn(&cast).unwrap(), IntMaxPlus);
}
