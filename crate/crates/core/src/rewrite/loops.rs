//! Conversions between canonical-vector loops and counted loops, and the
//! loop-based simulation of `pickAny`.

use crate::ir::{is_counting_ring, Expr, PointwiseFn, ScalarExpr};
use crate::semiring::{one, zero, SemiringId};
use crate::typecheck::TypeEnv;

use super::macros::{add, zero_fill, Ctx};
use super::RewriteError;

/// Rebuilds `e` with `f` applied to each direct child, keeping `env` in
/// sync with the bindings visible to that child.
pub(crate) fn structural(
    e: &Expr,
    env: &mut TypeEnv,
    f: &mut dyn FnMut(&Expr, &mut TypeEnv) -> Result<Expr, RewriteError>,
) -> Result<Expr, RewriteError> {
    Ok(match e {
        Expr::Var(_) => e.clone(),
        Expr::Transpose(a) => f(a, env)?.t(),
        Expr::Ones(a) => f(a, env)?.ones(),
        Expr::Diag(a) => f(a, env)?.diag(),
        Expr::PickAny(a) => f(a, env)?.pick_any(),
        Expr::MatMul(a, b) => f(a, env)?.matmul(f(b, env)?),
        Expr::Apply { func, args } => {
            Expr::Apply { func: func.clone(), args: args.iter().map(|a| f(a, env)).collect::<Result<_, _>>()? }
        }
        Expr::Let { name, bound, body } => {
            let b = f(bound, env)?;
            let ty = env.infer(bound)?;
            env.push(name, ty);
            let r = f(body, env);
            env.pop();
            Expr::Let { name: name.clone(), bound: Box::new(b), body: Box::new(r?) }
        }
        Expr::ForCanonical { v, bindings, inits } => {
            let vt = env
                .lookup(v)
                .cloned()
                .ok_or_else(|| RewriteError::Unsupported(format!("unbound loop vector `{v}`")))?;
            let (bindings, inits) = loop_children(env, Some((v, vt)), bindings, inits, f)?;
            Expr::ForCanonical { v: v.clone(), bindings, inits }
        }
        Expr::ForCounted { driver, bindings, inits } => {
            let d = f(driver, env)?;
            let (bindings, inits) = loop_children(env, None, bindings, inits, f)?;
            Expr::ForCounted { driver: Box::new(d), bindings, inits }
        }
    })
}

type LoopParts = (Vec<(String, Expr)>, Vec<Expr>);

fn loop_children(
    env: &mut TypeEnv,
    v: Option<(&String, crate::ir::MatrixType)>,
    bindings: &[(String, Expr)],
    inits: &[Expr],
    f: &mut dyn FnMut(&Expr, &mut TypeEnv) -> Result<Expr, RewriteError>,
) -> Result<LoopParts, RewriteError> {
    let mut new_inits = Vec::with_capacity(inits.len());
    let mut tys = Vec::with_capacity(inits.len());
    for i in inits {
        new_inits.push(f(i, env)?);
        tys.push(env.infer(i)?);
    }
    let depth = env.depth();
    if let Some((name, ty)) = v {
        env.push(name, ty);
    }
    for ((n, _), t) in bindings.iter().zip(tys) {
        env.push(n, t);
    }
    let mut new_bindings = Vec::with_capacity(bindings.len());
    let mut result = Ok(());
    for (n, b) in bindings {
        match f(b, env) {
            Ok(nb) => new_bindings.push((n.clone(), nb)),
            Err(e) => {
                result = Err(e);
                break;
            }
        }
    }
    env.truncate(depth);
    result.map(|()| (new_bindings, new_inits))
}

/// `a − b` restricted to 0/1 inputs: native subtraction where the ring has
/// it, otherwise `cond(b, 1, cond(a, 1, 0, 0), a)`.
pub(crate) fn minus_fn(r: SemiringId) -> PointwiseFn {
    if is_counting_ring(r) {
        return PointwiseFn::sub(r);
    }
    let (p, l) = (ScalarExpr::param, ScalarExpr::lit);
    let inner = ScalarExpr::cond(p("a"), l(one(r)), l(zero(r)), l(zero(r)));
    PointwiseFn::new(vec![("a", r), ("b", r)], ScalarExpr::cond(p("b"), l(one(r)), inner, p("a")))
}

/// Replaces every canonical loop by a counted loop that tracks the current
/// canonical vector `v` and the not-yet-visited positions `V` as extra
/// bindings.
pub(crate) fn eliminate_canonical(cx: &mut Ctx, env: &mut TypeEnv, e: &Expr) -> Result<Expr, RewriteError> {
    let rebuilt = structural(e, env, &mut |c, env| eliminate_canonical(cx, env, c))?;
    let Expr::ForCanonical { v, mut bindings, mut inits } = rebuilt else {
        return Ok(rebuilt);
    };
    cx.note("canonical-loop");
    let ring = env.lookup(&v).map(|t| t.ring).ok_or_else(|| RewriteError::Unsupported(format!("unbound `{v}`")))?;
    let big = cx.fresh("V");
    let minus = |a: Expr, b: Expr| Expr::apply(minus_fn(ring), vec![a, b]);
    let remaining = minus(Expr::var(&big), Expr::var(&v).t());
    bindings.push((v.clone(), remaining.clone().pick_any().t()));
    bindings.push((big.clone(), remaining));
    inits.push(Expr::var(&v).ones().t().pick_any().t());
    inits.push(Expr::var(&v).ones().t());
    Ok(Expr::ForCounted { driver: Box::new(Expr::var(&v)), bindings, inits })
}

/// Replaces counted loops by canonical loops over a let-bound driver and
/// expands every `pickAny` into nested canonical loops.
pub(crate) fn expand_dec(cx: &mut Ctx, env: &mut TypeEnv, e: &Expr) -> Result<Expr, RewriteError> {
    let rebuilt = structural(e, env, &mut |c, env| expand_dec(cx, env, c))?;
    match (e, rebuilt) {
        (_, Expr::ForCounted { driver, bindings, inits }) => {
            cx.note("counted-loop");
            let vf = cx.fresh("v");
            Ok(Expr::let_in(&vf, *driver, Expr::ForCanonical { v: vf.clone(), bindings, inits }))
        }
        (Expr::PickAny(orig), Expr::PickAny(arg)) => {
            let ring = env.infer(orig)?.ring;
            Ok(pick_any_sim(cx, *arg, ring))
        }
        (_, other) => Ok(other),
    }
}

/// `pickAny(a)` using only canonical loops: an outer loop over rows and an
/// inner loop over columns that keeps the first nonzero it sees.
pub(crate) fn pick_any_sim(cx: &mut Ctx, a: Expr, r: SemiringId) -> Expr {
    cx.note("pickany-sim");
    let names: Vec<String> = ["A", "v", "w", "X", "Y", "B", "R", "F", "D", "P"].iter().map(|h| cx.fresh(h)).collect();
    let [an, v, w, x, y, b, rn, f, d, p] = names.as_slice() else { unreachable!() };
    let var = |n: &String| Expr::var(n);
    let (sp, sl) = (ScalarExpr::param, ScalarExpr::lit);
    let keep_first =
        PointwiseFn::new(vec![("y", r), ("d", r), ("p", r)], ScalarExpr::cond(sp("d"), sl(zero(r)), sp("p"), sp("y")));
    let inner_step = Expr::let_in(
        d,
        var(y).matmul(var(b)),
        Expr::let_in(p, var(rn).matmul(var(w).diag()), Expr::apply(keep_first, vec![var(y), var(d), var(p)])),
    );
    let inner = Expr::for_canonical(w, vec![(y, inner_step)], vec![zero_fill(r, var(y))]);
    let outer_step =
        Expr::let_in(rn, var(v).t().matmul(var(an)), Expr::let_in(f, inner, add(r, var(x), var(v).matmul(var(f)))));
    let outer = Expr::for_canonical(v, vec![(x, outer_step)], vec![zero_fill(r, var(x))]);
    let lets = [
        (an, a),
        (v, var(an).ones()),
        (w, var(an).t().ones()),
        (x, var(an)),
        (y, var(w).t()),
        (b, var(w).matmul(var(w).t())),
    ];
    lets.into_iter().rev().fold(outer, |body, (n, bound)| Expr::let_in(n, bound, body))
}
