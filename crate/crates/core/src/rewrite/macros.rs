//! Expression macros used by the lowering passes: ordering matrices,
//! rotation, generic summation and a loop-only matrix product.
//!
//! Every macro binds its arguments to fresh names first, so argument
//! expressions are evaluated once and can never capture macro-internal
//! names.

use std::collections::BTreeMap;

use crate::ir::{is_counting_ring, Expr, NameSupply, PointwiseFn};
use crate::semiring::{zero, ScalarValue, SemiringId};

use super::RewriteError;

/// Fresh names plus a tally of macro expansions.
#[derive(Debug, Clone, Default)]
pub struct Ctx {
    pub names: NameSupply,
    pub expansions: BTreeMap<String, usize>,
}

pub(crate) fn add(r: SemiringId, a: Expr, b: Expr) -> Expr {
    Expr::apply(PointwiseFn::add(r), vec![a, b])
}

pub(crate) fn sub(r: SemiringId, a: Expr, b: Expr) -> Expr {
    Expr::apply(PointwiseFn::sub(r), vec![a, b])
}

/// A matrix shaped like `e` holding `value` everywhere.
pub(crate) fn fill(from: SemiringId, value: ScalarValue, e: Expr) -> Expr {
    Expr::apply(PointwiseFn::constant(from, value), vec![e])
}

/// The zero matrix shaped like `e`.
pub(crate) fn zero_fill(r: SemiringId, e: Expr) -> Expr {
    fill(r, zero(r), e)
}

fn var(n: &str) -> Expr {
    Expr::var(n)
}

impl Ctx {
    pub fn new(names: NameSupply) -> Self {
        Ctx { names, expansions: BTreeMap::new() }
    }

    /// A context whose names avoid everything in `exprs`.
    pub fn avoiding(exprs: &[&Expr]) -> Self {
        let mut names = NameSupply::default();
        for e in exprs {
            for n in crate::ir::all_names(e) {
                names.reserve(&n);
            }
        }
        Ctx::new(names)
    }

    pub(crate) fn note(&mut self, what: &str) {
        *self.expansions.entry(what.to_string()).or_default() += 1;
    }

    pub(crate) fn fresh(&mut self, hint: &str) -> String {
        self.names.fresh(hint)
    }

    fn counting(r: SemiringId, what: &str) -> Result<(), RewriteError> {
        if is_counting_ring(r) {
            Ok(())
        } else {
            Err(RewriteError::Unsupported(format!("{what} needs a ring with subtraction, got {r}")))
        }
    }

    /// Last canonical vector of the length of `v`.
    pub fn emax(&mut self, v: Expr, r: SemiringId) -> Expr {
        self.note("emax");
        let vn = self.fresh("v");
        let x = self.fresh("X");
        Expr::let_in(
            &vn,
            v.clone(),
            Expr::let_in(&x, var(&vn), Expr::for_canonical(&vn, vec![(&x, var(&vn))], vec![zero_fill(r, var(&x))])),
        )
    }

    /// First canonical vector of the length of `v`.
    pub fn emin(&mut self, v: Expr) -> Expr {
        self.note("emin");
        v.ones().t().pick_any().t()
    }

    /// Upper-triangular all-ones matrix of the length of `v`.
    pub fn s_le(&mut self, v: Expr, r: SemiringId) -> Result<Expr, RewriteError> {
        Self::counting(r, "ordering matrix")?;
        self.note("s_le");
        let vn = self.fresh("v");
        let x = self.fresh("X");
        let e = self.fresh("E");
        let emax = self.emax(var(&vn), r);
        // X + (X·E + v)·vᵀ + v·Eᵀ
        let step = add(
            r,
            add(r, var(&x), add(r, var(&x).matmul(var(&e)), var(&vn)).matmul(var(&vn).t())),
            var(&vn).matmul(var(&e).t()),
        );
        let lp = Expr::for_canonical(&vn, vec![(&x, step)], vec![zero_fill(r, var(&x))]);
        let body = sub(r, lp, var(&vn).ones().matmul(var(&e).t()));
        Ok(Expr::let_in(&vn, v, Expr::let_in(&x, var(&vn).diag(), Expr::let_in(&e, emax, body))))
    }

    /// Strictly upper-triangular all-ones matrix of the length of `v`.
    pub fn s_lt(&mut self, v: Expr, r: SemiringId) -> Result<Expr, RewriteError> {
        Self::counting(r, "ordering matrix")?;
        self.note("s_lt");
        let w = self.fresh("W");
        let le = self.s_le(var(&w), r)?;
        Ok(Expr::let_in(&w, v, sub(r, le, var(&w).ones().diag())))
    }

    /// Permutation matrix that rotates a vector of the length of `v` up by one.
    pub fn rotate(&mut self, v: Expr, r: SemiringId) -> Result<Expr, RewriteError> {
        self.note("rotate");
        let w = self.fresh("W");
        let lt = self.s_lt(var(&w), r)?;
        let emax = self.emax(var(&w), r);
        let emin = self.emin(var(&w));
        Ok(Expr::let_in(&w, v, add(r, lt.pick_any(), emax.matmul(emin.t()))))
    }

    /// `zero ⊕ v_1 ⊕ ... ⊕ v_n` as a 1x1 matrix, where `zero_fn` is a
    /// constant function and `plus_fn` the binary addition.
    pub fn sum(
        &mut self,
        zero_fn: &PointwiseFn,
        plus_fn: &PointwiseFn,
        v: Expr,
        r: SemiringId,
    ) -> Result<Expr, RewriteError> {
        self.note("sum");
        let w = self.fresh("V");
        let rn = self.fresh("R");
        let x = self.fresh("X");
        let rot = self.rotate(var(&w), r)?;
        let lp = Expr::for_counted(
            var(&w),
            vec![(&x, Expr::apply(plus_fn.clone(), vec![var(&w), var(&rn).matmul(var(&x))]))],
            vec![Expr::apply(zero_fn.clone(), vec![var(&w)])],
        );
        let emax = self.emax(var(&w), r);
        Ok(Expr::let_in(&w, v, Expr::let_in(&rn, rot, Expr::let_in(&x, lp, emax.t().matmul(var(&x))))))
    }

    /// One cell of a product: `sum(times(e1ᵀ, e2))` for a row `e1` and a column `e2`.
    pub fn cellmul(&mut self, ops: &ProductOps, e1: Expr, e2: Expr) -> Result<Expr, RewriteError> {
        self.note("cellmul");
        let prod = Expr::apply(ops.times.clone(), vec![e1.t(), e2]);
        let zero_fn = PointwiseFn::constant(ops.ring, ops.zero);
        self.sum(&zero_fn, &ops.plus, prod, ops.ring)
    }

    /// `zero` everywhere, shaped like `e1 · e2`, using only the dimensions of
    /// the factors.
    fn product_shape(&mut self, ops: &ProductOps, e1: Expr, e2: Expr) -> Expr {
        fill(ops.ring, ops.zero, e1.ones().matmul(e2.t().ones().t()))
    }

    /// Product of a row `e1` with a matrix `e2`, one column at a time.
    pub fn rowmul(&mut self, ops: &ProductOps, e1: Expr, e2: Expr) -> Result<Expr, RewriteError> {
        self.note("rowmul");
        let a = self.fresh("A");
        let b = self.fresh("B");
        let vn = self.fresh("v");
        let x = self.fresh("X");
        let bc = self.fresh("Bc");
        let cell = self.cellmul(ops, var(&a), var(&bc))?;
        let step = Expr::let_in(&bc, var(&b).matmul(var(&vn)), add(ops.ring, var(&x), cell.matmul(var(&vn).t())));
        let init = self.product_shape(ops, var(&a), var(&b));
        let lp = Expr::for_canonical(&vn, vec![(&x, step)], vec![init]);
        Ok(Expr::let_in(&a, e1, Expr::let_in(&b, e2, Expr::let_in(&vn, var(&b).t().ones(), lp))))
    }

    /// Matrix product computed row by row and cell by cell with the given
    /// addition and multiplication.
    pub fn matmul(&mut self, ops: &ProductOps, e1: Expr, e2: Expr) -> Result<Expr, RewriteError> {
        self.note("matmul");
        let a = self.fresh("A");
        let b = self.fresh("B");
        let vn = self.fresh("v");
        let x = self.fresh("X");
        let ar = self.fresh("Ar");
        let row = self.rowmul(ops, var(&ar), var(&b))?;
        let step = Expr::let_in(&ar, var(&vn).t().matmul(var(&a)), add(ops.ring, var(&x), var(&vn).matmul(row)));
        let init = self.product_shape(ops, var(&a), var(&b));
        let lp = Expr::for_canonical(&vn, vec![(&x, step)], vec![init]);
        Ok(Expr::let_in(&a, e1, Expr::let_in(&b, e2, Expr::let_in(&vn, var(&a).ones(), lp))))
    }
}

/// Addition, multiplication and zero for a simulated product; all three
/// operate on values of `ring`, the ring the data is stored in.
#[derive(Debug, Clone)]
pub struct ProductOps {
    pub ring: SemiringId,
    pub zero: ScalarValue,
    pub plus: PointwiseFn,
    pub times: PointwiseFn,
}

/// The ordering macros for a column vector.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderingMacros {
    pub emax: Expr,
    pub emin: Expr,
    pub s_le: Expr,
    pub s_lt: Expr,
}

/// Builds `emax`, `emin`, `S≤` and `S<` for the column vector `v` over `ring`.
pub fn build_ordering_macros(v: &Expr, ring: SemiringId) -> Result<OrderingMacros, RewriteError> {
    let mut cx = Ctx::avoiding(&[v]);
    Ok(OrderingMacros {
        emax: cx.emax(v.clone(), ring),
        emin: cx.emin(v.clone()),
        s_le: cx.s_le(v.clone(), ring)?,
        s_lt: cx.s_lt(v.clone(), ring)?,
    })
}

/// Builds the rotation permutation for the column vector `v`.
pub fn build_rotate(v: &Expr, ring: SemiringId) -> Result<Expr, RewriteError> {
    Ctx::avoiding(&[v]).rotate(v.clone(), ring)
}

/// Builds the generic summation of the column vector `v`.
pub fn build_sum(
    zero_fn: &PointwiseFn,
    plus_fn: &PointwiseFn,
    v: &Expr,
    ring: SemiringId,
) -> Result<Expr, RewriteError> {
    Ctx::avoiding(&[v]).sum(zero_fn, plus_fn, v.clone(), ring)
}

/// Builds the loop-only product of `e1` and `e2`.
pub fn build_matmul_sim(ops: &ProductOps, e1: &Expr, e2: &Expr) -> Result<Expr, RewriteError> {
    Ctx::avoiding(&[e1, e2]).matmul(ops, e1.clone(), e2.clone())
}
