use crate::ir::{Expr, PointwiseFn, ScalarExpr, Schema, SizeTerm};
use crate::semiring::format_scalar;

use super::RingScope;

const LET: u8 = 0;
const SUM: u8 = 1;
const PRODUCT: u8 = 2;
const POSTFIX: u8 = 3;
const ATOM: u8 = 4;

/// Prints a program in the syntax accepted by
/// [`parse_program`](super::parse_program).
pub fn print_program(s: &Schema, e: &Expr) -> String {
    let mut out = String::new();
    for (name, t) in s.iter() {
        out.push_str(&format!("matrix {name} : {} x {} over {};\n", size(&t.rows), size(&t.cols), t.ring));
    }
    out.push_str("in\n");
    out.push_str(&print_expr(s, e));
    out.push('\n');
    out
}

/// Prints an expression whose free variables are typed by `s`.
pub fn print_expr(s: &Schema, e: &Expr) -> String {
    Printer { scope: RingScope::new(s) }.expr(e, LET, 0)
}

fn size(t: &SizeTerm) -> String {
    match t {
        SizeTerm::One => "1".to_string(),
        SizeTerm::Sym(s) => s.clone(),
    }
}

fn indent(n: usize) -> String {
    "  ".repeat(n)
}

struct Printer<'a> {
    scope: RingScope<'a>,
}

impl Printer<'_> {
    /// `Some("+")` or `Some("-")` when `e` prints as infix sugar.
    fn sugar(&mut self, e: &Expr) -> Option<&'static str> {
        let Expr::Apply { func, args } = e else { return None };
        if args.len() != 2 {
            return None;
        }
        let r = self.scope.ring_of(&args[0])?;
        if *func == PointwiseFn::add(r) {
            Some("+")
        } else if *func == PointwiseFn::sub(r) {
            Some("-")
        } else {
            None
        }
    }

    fn prec(&mut self, e: &Expr) -> u8 {
        match e {
            Expr::Let { .. } => LET,
            Expr::MatMul(..) => PRODUCT,
            Expr::Transpose(_) => POSTFIX,
            Expr::Apply { .. } if self.sugar(e).is_some() => SUM,
            _ => ATOM,
        }
    }

    fn expr(&mut self, e: &Expr, min: u8, ind: usize) -> String {
        if self.prec(e) < min {
            return format!("({})", self.expr(e, LET, ind));
        }
        match e {
            Expr::Var(n) => n.clone(),
            Expr::Transpose(a) => format!("{}'", self.expr(a, POSTFIX, ind)),
            Expr::Ones(a) => format!("ones({})", self.expr(a, LET, ind)),
            Expr::Diag(a) => format!("diag({})", self.expr(a, LET, ind)),
            Expr::PickAny(a) => format!("pickany({})", self.expr(a, LET, ind)),
            Expr::MatMul(a, b) => format!("{} * {}", self.expr(a, PRODUCT, ind), self.expr(b, POSTFIX, ind)),
            Expr::Apply { func, args } => {
                if let Some(op) = self.sugar(e) {
                    return format!("{} {op} {}", self.expr(&args[0], SUM, ind), self.expr(&args[1], PRODUCT, ind));
                }
                let args: Vec<String> = args.iter().map(|a| self.expr(a, LET, ind)).collect();
                format!("apply[{}]({})", function(func), args.join(", "))
            }
            Expr::Let { name, bound, body } => {
                let b = self.expr(bound, LET, ind + 1);
                let r = self.scope.ring_of(bound);
                let d = self.scope.depth();
                self.scope.push(name, r);
                let body = self.expr(body, LET, ind);
                self.scope.truncate(d);
                format!("let {name} = {b} in\n{}{body}", indent(ind))
            }
            Expr::ForCanonical { v, bindings, inits } => {
                let vr = self.scope.lookup(v);
                self.for_loop(&format!("for [{v}]"), Some((v, vr)), bindings, inits, None, ind)
            }
            Expr::ForCounted { driver, bindings, inits } => {
                self.for_loop("for", None, bindings, inits, Some(driver), ind)
            }
        }
    }

    fn for_loop(
        &mut self,
        head: &str,
        v: Option<(&String, Option<crate::semiring::SemiringId>)>,
        bindings: &[(String, Expr)],
        inits: &[Expr],
        driver: Option<&Expr>,
        ind: usize,
    ) -> String {
        let mut args: Vec<String> = driver.iter().map(|d| self.expr(d, LET, ind + 1)).collect();
        args.extend(inits.iter().map(|i| self.expr(i, LET, ind + 1)));
        let rings: Vec<_> = inits.iter().map(|i| self.scope.ring_of(i)).collect();
        let d = self.scope.depth();
        if let Some((v, r)) = v {
            self.scope.push(v, r);
        }
        for ((n, _), r) in bindings.iter().zip(rings) {
            self.scope.push(n, r);
        }
        let mut out = format!("{head} {{\n");
        for (i, (n, b)) in bindings.iter().enumerate() {
            let sep = if i + 1 < bindings.len() { ";" } else { "" };
            out.push_str(&format!("{}{n} := {}{sep}\n", indent(ind + 1), self.expr(b, LET, ind + 2)));
        }
        self.scope.truncate(d);
        out.push_str(&format!("{}}}({})", indent(ind), args.join(", ")));
        out
    }
}

fn function(f: &PointwiseFn) -> String {
    let params: Vec<String> = f.params.iter().map(|(n, r)| format!("{n}: {r}")).collect();
    format!("({}) -> {}", params.join(", "), scalar(&f.body, 0))
}

fn scalar(s: &ScalarExpr, min: u8) -> String {
    let prec = match s {
        ScalarExpr::Eq(..) => 0,
        ScalarExpr::Add(..) | ScalarExpr::Sub(..) => 1,
        ScalarExpr::Mul(..) | ScalarExpr::Div(..) => 2,
        _ => 3,
    };
    if prec < min {
        return format!("({})", scalar(s, 0));
    }
    let bin =
        |a: &ScalarExpr, op: &str, b: &ScalarExpr, l: u8, r: u8| format!("{} {op} {}", scalar(a, l), scalar(b, r));
    match s {
        ScalarExpr::Param(n) => n.clone(),
        ScalarExpr::Lit(v) => format!("{}({})", v.ring(), format_scalar(v.scalar())),
        ScalarExpr::Eq(a, b) => bin(a, "==", b, 1, 1),
        ScalarExpr::Add(a, b) => bin(a, "+", b, 1, 2),
        ScalarExpr::Sub(a, b) => bin(a, "-", b, 1, 2),
        ScalarExpr::Mul(a, b) => bin(a, "*", b, 2, 3),
        ScalarExpr::Div(a, b) => bin(a, "/", b, 2, 3),
        ScalarExpr::Cast(r, a) => format!("cast({r}, {})", scalar(a, 0)),
        ScalarExpr::Cond(w, x, y, z) => {
            format!("cond({}, {}, {}, {})", scalar(w, 0), scalar(x, 0), scalar(y, 0), scalar(z, 0))
        }
        ScalarExpr::Encoded { func, args } => {
            let args: Vec<String> = args.iter().map(|a| scalar(a, 0)).collect();
            format!("enc[{}]({})", function(func), args.join(", "))
        }
    }
}
