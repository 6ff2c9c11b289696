//! Translation of multi-semiring programs into programs over the extended
//! reals, where every value of ring `R` is stored as `enc_R(value)`.

use crate::ir::{Expr, PointwiseFn, ScalarExpr};
use crate::semiring::{enc_value, one, zero, ScalarValue, SemiringId};
use crate::typecheck::TypeEnv;

use super::loops::structural;
use super::macros::{fill, Ctx, ProductOps};
use super::RewriteError;

const T: SemiringId = SemiringId::Real;

fn enc(r: SemiringId, v: ScalarValue) -> ScalarValue {
    enc_value(r, &v).expect("value belongs to its ring")
}

/// `f` lifted to the encoding: decode each argument, apply, encode.
pub(crate) fn lift(f: &PointwiseFn) -> PointwiseFn {
    PointwiseFn {
        params: f.params.iter().map(|(n, _)| (n.clone(), T)).collect(),
        body: ScalarExpr::Encoded {
            func: Box::new(f.clone()),
            args: f.params.iter().map(|(n, _)| ScalarExpr::Param(n.clone())).collect(),
        },
    }
}

/// Encoded addition, multiplication and zero of ring `r`.
pub(crate) fn encoded_ops(r: SemiringId) -> ProductOps {
    ProductOps { ring: T, zero: enc(r, zero(r)), plus: lift(&PointwiseFn::add(r)), times: lift(&PointwiseFn::mul(r)) }
}

/// Rewrites `e` (typed under `env` with its original rings) into an
/// expression over the extended reals. The result may contain canonical
/// loops emitted by macros.
pub(crate) fn encode(cx: &mut Ctx, env: &mut TypeEnv, e: &Expr) -> Result<Expr, RewriteError> {
    let rebuilt = structural(e, env, &mut |c, env| encode(cx, env, c))?;
    Ok(match (e, rebuilt) {
        (Expr::Ones(orig), Expr::Ones(inner)) => {
            let r = env.infer(orig)?.ring;
            fill(T, enc(r, one(r)), inner.ones())
        }
        (Expr::PickAny(orig), Expr::PickAny(inner)) => {
            let r = env.infer(orig)?.ring;
            let z = enc(r, zero(r));
            let en = cx.fresh("E");
            let (p, l) = (ScalarExpr::param, ScalarExpr::lit);
            let mask = PointwiseFn::new(vec![("v", T)], ScalarExpr::cond(p("v"), l(z), l(zero(T)), l(one(T))));
            let select = PointwiseFn::new(vec![("v", T), ("p", T)], ScalarExpr::cond(p("p"), l(one(T)), p("v"), l(z)));
            let picked = Expr::apply(mask, vec![Expr::var(&en)]).pick_any();
            Expr::let_in(&en, *inner, Expr::apply(select, vec![Expr::var(&en), picked]))
        }
        (Expr::Apply { .. }, Expr::Apply { func, args }) => Expr::Apply { func: lift(&func), args },
        (Expr::MatMul(a, _), Expr::MatMul(ea, eb)) => {
            let r = env.infer(a)?.ring;
            if r == T {
                // the encoding of real values is the identity
                ea.matmul(*eb)
            } else {
                cx.matmul(&encoded_ops(r), *ea, *eb)?
            }
        }
        (_, other) => other,
    })
}
