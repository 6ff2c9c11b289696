//! Type inference for matrix and scalar expressions.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::ir::{Expr, MatrixType, PointwiseFn, ScalarExpr, Schema, SizeTerm};
use crate::semiring::SemiringId;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct TypeError {
    /// Slash-separated path from the program root to the offending node.
    pub path: String,
    pub rule: &'static str,
    pub expected: String,
    pub found: String,
}

impl fmt::Display for TypeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}: expected {}, found {}", self.path, self.rule, self.expected, self.found)
    }
}

fn err(path: &str, rule: &'static str, expected: impl fmt::Display, found: impl fmt::Display) -> TypeError {
    TypeError { path: path.to_string(), rule, expected: expected.to_string(), found: found.to_string() }
}

/// A schema plus a stack of local bindings; inner bindings shadow outer ones.
#[derive(Debug, Clone)]
pub struct TypeEnv<'s> {
    schema: &'s Schema,
    scope: Vec<(String, MatrixType)>,
}

impl<'s> TypeEnv<'s> {
    pub fn new(schema: &'s Schema) -> Self {
        TypeEnv { schema, scope: Vec::new() }
    }

    pub fn lookup(&self, name: &str) -> Option<&MatrixType> {
        self.scope.iter().rev().find(|(n, _)| n == name).map(|(_, t)| t).or_else(|| self.schema.get(name))
    }

    pub fn push(&mut self, name: &str, ty: MatrixType) {
        self.scope.push((name.to_string(), ty));
    }

    pub fn pop(&mut self) {
        self.scope.pop();
    }

    pub fn depth(&self) -> usize {
        self.scope.len()
    }

    pub fn truncate(&mut self, depth: usize) {
        self.scope.truncate(depth);
    }

    /// Infers the type of `e` in this environment.
    pub fn infer(&mut self, e: &Expr) -> Result<MatrixType, TypeError> {
        self.infer_at(e, "root")
    }

    fn infer_at(&mut self, e: &Expr, path: &str) -> Result<MatrixType, TypeError> {
        match e {
            Expr::Var(n) => self.lookup(n).cloned().ok_or_else(|| err(path, "var", "a bound matrix variable", n)),
            Expr::Transpose(a) => {
                let t = self.infer_at(a, &format!("{path}/transpose"))?;
                Ok(MatrixType::new(t.cols, t.rows, t.ring))
            }
            Expr::Ones(a) => {
                let t = self.infer_at(a, &format!("{path}/ones"))?;
                Ok(MatrixType::new(t.rows, SizeTerm::One, t.ring))
            }
            Expr::Diag(a) => {
                let t = self.infer_at(a, &format!("{path}/diag"))?;
                if !t.is_vector() {
                    return Err(err(path, "diag vector", "a column vector", t));
                }
                Ok(MatrixType::new(t.rows.clone(), t.rows, t.ring))
            }
            Expr::MatMul(a, b) => {
                let ta = self.infer_at(a, &format!("{path}/matmul.lhs"))?;
                let tb = self.infer_at(b, &format!("{path}/matmul.rhs"))?;
                if ta.cols != tb.rows {
                    return Err(err(path, "matmul inner dims", format!("rhs rows {}", ta.cols), tb.rows));
                }
                if ta.ring != tb.ring {
                    return Err(err(path, "matmul ring", ta.ring, tb.ring));
                }
                Ok(MatrixType::new(ta.rows, tb.cols, ta.ring))
            }
            Expr::PickAny(a) => self.infer_at(a, &format!("{path}/pickany")),
            Expr::Apply { func, args } => {
                let fpath = format!("{path}/apply.fn");
                let out = check_fn(func).map_err(|mut e| {
                    e.path = format!("{fpath}{}", e.path);
                    e
                })?;
                if args.len() != func.arity() || args.is_empty() {
                    return Err(err(path, "apply arity", func.arity(), args.len()));
                }
                let mut shape: Option<MatrixType> = None;
                for (i, (a, (pname, pring))) in args.iter().zip(&func.params).enumerate() {
                    let t = self.infer_at(a, &format!("{path}/apply.arg[{i}]"))?;
                    if t.ring != *pring {
                        return Err(err(path, "apply arg ring", format!("{pring} for `{pname}`"), t.ring));
                    }
                    match &shape {
                        None => shape = Some(t),
                        Some(s) if s.rows != t.rows || s.cols != t.cols => {
                            return Err(err(
                                path,
                                "apply arg shape",
                                format!("{} x {}", s.rows, s.cols),
                                format!("{} x {}", t.rows, t.cols),
                            ));
                        }
                        Some(_) => {}
                    }
                }
                let s = shape.expect("nonempty args");
                Ok(MatrixType::new(s.rows, s.cols, out))
            }
            Expr::Let { name, bound, body } => {
                let t = self.infer_at(bound, &format!("{path}/let[{name}].bound"))?;
                self.push(name, t);
                let r = self.infer_at(body, &format!("{path}/let[{name}].body"));
                self.pop();
                r
            }
            Expr::ForCanonical { v, bindings, inits } => {
                let vt = self.lookup(v).cloned().ok_or_else(|| err(path, "canonical vector", "a bound vector", v))?;
                if !vt.is_vector() {
                    return Err(err(path, "canonical vector", format!("`{v}` to be a column vector"), vt));
                }
                self.loop_types(path, Some((v, vt)), bindings, inits)
            }
            Expr::ForCounted { driver, bindings, inits } => {
                let dt = self.infer_at(driver, &format!("{path}/for.driver"))?;
                if !dt.is_vector() {
                    return Err(err(path, "counted driver", "a column vector", dt));
                }
                self.loop_types(path, None, bindings, inits)
            }
        }
    }

    fn loop_types(
        &mut self,
        path: &str,
        v: Option<(&String, MatrixType)>,
        bindings: &[(String, Expr)],
        inits: &[Expr],
    ) -> Result<MatrixType, TypeError> {
        if bindings.is_empty() || bindings.len() != inits.len() {
            return Err(err(path, "loop shape", format!("{} initializers", bindings.len()), inits.len()));
        }
        let mut tys = Vec::with_capacity(inits.len());
        for (i, init) in inits.iter().enumerate() {
            tys.push(self.infer_at(init, &format!("{path}/for.init[{i}]"))?);
        }
        let depth = self.depth();
        if let Some((name, ty)) = v {
            self.push(name, ty);
        }
        for ((n, _), t) in bindings.iter().zip(&tys) {
            self.push(n, t.clone());
        }
        let mut result = Ok(());
        for ((n, body), t) in bindings.iter().zip(&tys) {
            match self.infer_at(body, &format!("{path}/for.body[{n}]")) {
                Ok(bt) if &bt == t => {}
                Ok(bt) => {
                    result = Err(err(path, "loop body type", format!("`{n}` : {t}"), bt));
                    break;
                }
                Err(e) => {
                    result = Err(e);
                    break;
                }
            }
        }
        self.truncate(depth);
        result.map(|()| tys.swap_remove(0))
    }
}

/// Infers the type of `e` under schema `s`.
pub fn infer_type(s: &Schema, e: &Expr) -> Result<MatrixType, TypeError> {
    TypeEnv::new(s).infer(e)
}

/// The schema seen by loop bodies: `s` extended with each binding at the
/// type of its initializer, which is typed under `s` itself.
pub fn loop_step_schema(s: &Schema, bindings: &[(String, Expr)], inits: &[Expr]) -> Result<Schema, TypeError> {
    let mut out = s.clone();
    for (i, ((n, _), init)) in bindings.iter().zip(inits).enumerate() {
        let t = TypeEnv::new(s).infer_at(init, &format!("root/for.init[{i}]"))?;
        out.insert(n, t);
    }
    Ok(out)
}

/// Infers the ring of a scalar expression given parameter rings.
pub fn check_scalar(env: &BTreeMap<String, SemiringId>, se: &ScalarExpr) -> Result<SemiringId, TypeError> {
    let params: Vec<(String, SemiringId)> = env.iter().map(|(n, r)| (n.clone(), *r)).collect();
    scalar_ring(&params, se, "")
}

/// Checks a pointwise function and returns the ring of its body.
pub fn check_fn(f: &PointwiseFn) -> Result<SemiringId, TypeError> {
    for (i, (n, _)) in f.params.iter().enumerate() {
        if f.params[..i].iter().any(|(m, _)| m == n) {
            return Err(err("", "scalar param", "distinct parameter names", n));
        }
    }
    scalar_ring(&f.params, &f.body, "")
}

fn same(path: &str, rule: &'static str, a: SemiringId, b: SemiringId) -> Result<SemiringId, TypeError> {
    if a == b {
        Ok(a)
    } else {
        Err(err(path, rule, a, b))
    }
}

fn scalar_ring(params: &[(String, SemiringId)], se: &ScalarExpr, path: &str) -> Result<SemiringId, TypeError> {
    let rec = |e: &ScalarExpr| scalar_ring(params, e, path);
    match se {
        ScalarExpr::Param(n) => params
            .iter()
            .find(|(m, _)| m == n)
            .map(|(_, r)| *r)
            .ok_or_else(|| err(path, "scalar param", "a declared parameter", n)),
        ScalarExpr::Lit(v) => Ok(v.ring()),
        ScalarExpr::Add(a, b) => same(path, "add ring", rec(a)?, rec(b)?),
        ScalarExpr::Mul(a, b) => same(path, "mul ring", rec(a)?, rec(b)?),
        ScalarExpr::Sub(a, b) => {
            let r = same(path, "sub ring", rec(a)?, rec(b)?)?;
            if matches!(r, SemiringId::Int | SemiringId::Real) {
                Ok(r)
            } else {
                Err(err(path, "sub ring", "int or real", r))
            }
        }
        ScalarExpr::Div(a, b) => {
            let r = same(path, "div ring", rec(a)?, rec(b)?)?;
            if r == SemiringId::Real {
                Ok(r)
            } else {
                Err(err(path, "div ring", "real", r))
            }
        }
        ScalarExpr::Eq(a, b) => {
            same(path, "eq ring", rec(a)?, rec(b)?)?;
            Ok(SemiringId::Bool)
        }
        ScalarExpr::Cast(t, a) => {
            rec(a)?;
            Ok(*t)
        }
        ScalarExpr::Cond(w, x, y, z) => {
            same(path, "cond ring", rec(w)?, rec(x)?)?;
            same(path, "cond ring", rec(y)?, rec(z)?)
        }
        ScalarExpr::Encoded { func, args } => {
            check_fn(func)?;
            if args.len() != func.arity() {
                return Err(err(path, "encoded arity", func.arity(), args.len()));
            }
            for a in args {
                let r = rec(a)?;
                if r != SemiringId::Real {
                    return Err(err(path, "encoded arg", SemiringId::Real, r));
                }
            }
            Ok(SemiringId::Real)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semiring::ScalarValue;
    use SemiringId::*;

    fn sym(s: &str) -> SizeTerm {
        SizeTerm::sym(s)
    }

    #[test]
    fn ones_and_matmul() {
        let s = Schema::new().with("A", MatrixType::new(sym("a"), sym("b"), Real));
        assert_eq!(infer_type(&s, &Expr::var("A").ones()).unwrap(), MatrixType::new(sym("a"), SizeTerm::One, Real));
        let s = s.with("B", MatrixType::new(sym("c"), sym("d"), Real));
        let e = infer_type(&s, &Expr::var("A").matmul(Expr::var("B"))).unwrap_err();
        assert_eq!(e.rule, "matmul inner dims");
    }

    #[test]
    fn cast_apply() {
        let s = Schema::new().with("V", MatrixType::new(sym("n"), SizeTerm::One, Int));
        let f = PointwiseFn::new(vec![("c", Int)], ScalarExpr::param("c").cast(IntMaxPlus));
        assert_eq!(
            infer_type(&s, &Expr::apply(f, vec![Expr::var("V")])).unwrap(),
            MatrixType::new(sym("n"), SizeTerm::One, IntMaxPlus)
        );
    }

    #[test]
    fn scalar_rules() {
        let env: BTreeMap<String, SemiringId> = [("c".to_string(), Real)].into();
        let c = || ScalarExpr::param("c");
        assert_eq!(check_scalar(&env, &c().div(c())).unwrap(), Real);
        let env: BTreeMap<String, SemiringId> = [("a".to_string(), Int), ("b".to_string(), Int)].into();
        assert_eq!(check_scalar(&env, &ScalarExpr::param("a").eq(ScalarExpr::param("b"))).unwrap(), Bool);
        let env: BTreeMap<String, SemiringId> = [("a".to_string(), Bool)].into();
        let e = check_scalar(&env, &ScalarExpr::param("a").sub(ScalarExpr::param("a"))).unwrap_err();
        assert_eq!(e.rule, "sub ring");
        let e = check_scalar(&env, &ScalarExpr::param("a").add(ScalarExpr::lit(ScalarValue::int(1)))).unwrap_err();
        assert_eq!(e.rule, "add ring");
    }

    #[test]
    fn loop_schema() {
        let s = Schema::new().with("A", MatrixType::new(sym("a"), sym("a"), Real));
        let bindings = vec![("X".to_string(), Expr::var("X"))];
        let s2 = loop_step_schema(&s, &bindings, &[Expr::var("A")]).unwrap();
        assert_eq!(s2.get("X"), s.get("A"));

        // an init naming a binding resolves in the outer schema, where it is unbound
        let bad = loop_step_schema(&s, &bindings, &[Expr::var("X")]).unwrap_err();
        assert_eq!(bad.rule, "var");

        let two = vec![("X".to_string(), Expr::var("Y")), ("Y".to_string(), Expr::var("X"))];
        let s = s.with("V", MatrixType::new(sym("a"), SizeTerm::One, Real));
        let s3 = loop_step_schema(&s, &two, &[Expr::var("A"), Expr::var("V")]).unwrap();
        assert_eq!(s3.get("X"), s.get("A"));
        assert_eq!(s3.get("Y"), s.get("V"));
    }

    #[test]
    fn loops() {
        let s = Schema::new()
            .with("A", MatrixType::new(sym("a"), sym("a"), Real))
            .with("d", MatrixType::new(sym("n"), SizeTerm::One, Bool));
        let ok =
            Expr::for_counted(Expr::var("d"), vec![("X", Expr::var("X").matmul(Expr::var("A")))], vec![Expr::var("A")]);
        assert_eq!(infer_type(&s, &ok).unwrap(), s.get("A").unwrap().clone());
        let bad = Expr::for_counted(Expr::var("d"), vec![("X", Expr::var("X").ones())], vec![Expr::var("A")]);
        assert_eq!(infer_type(&s, &bad).unwrap_err().rule, "loop body type");
        let canon = Expr::for_canonical("d", vec![("X", Expr::var("d"))], vec![Expr::var("d")]);
        assert!(infer_type(&s, &canon).is_ok());
        let unbound = Expr::for_canonical("v", vec![("X", Expr::var("X"))], vec![Expr::var("A")]);
        assert_eq!(infer_type(&s, &unbound).unwrap_err().rule, "canonical vector");
    }
}
