use std::str::FromStr;

use crate::ir::{detect_dialect, Dialect, Expr, MatrixType, PointwiseFn, ScalarExpr, Schema, SizeTerm};
use crate::semiring::{parse_scalar, zero, SemiringId};

use super::lexer::{lex, Tok, Token};
use super::{RingScope, TextError};

const KEYWORDS: [&str; 9] = ["matrix", "over", "in", "let", "for", "ones", "diag", "pickany", "apply"];

/// Parses a program and reports the smallest dialect that contains it.
pub fn parse_program(text: &str) -> Result<(Schema, Expr, Dialect), TextError> {
    let (s, e) = parse_schema_expr(text)?;
    let d = detect_dialect(&e, &s)?;
    Ok((s, e, d))
}

/// Parses a program without dialect detection.
pub fn parse_schema_expr(text: &str) -> Result<(Schema, Expr), TextError> {
    let mut p = Parser { toks: lex(text)?, pos: 0 };
    let schema = p.declarations()?;
    let surf = p.expr()?;
    p.expect_eof()?;
    let mut scope = RingScope::new(&schema);
    let e = elaborate(&mut scope, surf)?;
    Ok((schema, e))
}

#[derive(Debug, Clone, Copy)]
struct Pos {
    line: usize,
    col: usize,
}

impl Pos {
    fn err(self, msg: impl Into<String>) -> TextError {
        TextError::parse(self.line, self.col, msg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BinOp {
    Plus,
    Minus,
}

/// Matrix expressions before `+`/`-` and zero-initialised loops are
/// resolved to IR.
enum Surf {
    Var(String),
    Transpose(Box<Surf>),
    Ones(Box<Surf>),
    Diag(Box<Surf>),
    PickAny(Box<Surf>),
    MatMul(Box<Surf>, Box<Surf>),
    Bin(BinOp, Box<Surf>, Box<Surf>, Pos),
    Apply(PointwiseFn, Vec<Surf>),
    Let(String, Box<Surf>, Box<Surf>),
    Canonical { v: String, bindings: Vec<(String, Surf, Pos)>, inits: Option<Vec<Surf>> },
    Counted { driver: Box<Surf>, bindings: Vec<(String, Surf, Pos)>, inits: Vec<Surf> },
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn here(&self) -> Pos {
        let t = &self.toks[self.pos];
        Pos { line: t.line, col: t.col }
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, wanted: &str) -> TextError {
        self.here().err(format!("expected {wanted}, found {}", self.peek().describe()))
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(t) if *t == s)
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(self.peek(), Tok::Ident(t) if t == w)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn sym(&mut self, s: &str) -> Result<(), TextError> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{s}`")))
        }
    }

    fn word(&mut self, w: &str) -> Result<(), TextError> {
        if self.is_word(w) {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{w}`")))
        }
    }

    fn ident(&mut self) -> Result<String, TextError> {
        match self.peek() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => Err(self.unexpected("a name")),
        }
    }

    fn ring(&mut self) -> Result<SemiringId, TextError> {
        let at = self.here();
        match self.bump() {
            Tok::Ident(s) => SemiringId::from_str(&s).map_err(|_| at.err(format!("unknown ring `{s}`"))),
            t => Err(at.err(format!("expected a ring, found {}", t.describe()))),
        }
    }

    fn expect_eof(&self) -> Result<(), TextError> {
        match self.peek() {
            Tok::Eof => Ok(()),
            _ => Err(self.unexpected("end of input")),
        }
    }

    fn declarations(&mut self) -> Result<Schema, TextError> {
        let mut s = Schema::new();
        while self.is_word("matrix") {
            self.bump();
            let at = self.here();
            let name = self.ident()?;
            self.sym(":")?;
            let rows = self.size()?;
            self.word("x")?;
            let cols = self.size()?;
            self.word("over")?;
            let ring = self.ring()?;
            self.sym(";")?;
            if s.get(&name).is_some() {
                return Err(at.err(format!("`{name}` declared twice")));
            }
            s.insert(&name, MatrixType::new(rows, cols, ring));
        }
        self.word("in")?;
        Ok(s)
    }

    fn size(&mut self) -> Result<SizeTerm, TextError> {
        match self.peek().clone() {
            Tok::Number(n) if n == "1" => {
                self.bump();
                Ok(SizeTerm::One)
            }
            Tok::Ident(_) => Ok(SizeTerm::Sym(self.ident()?)),
            _ => Err(self.unexpected("a size symbol or `1`")),
        }
    }

    fn expr(&mut self) -> Result<Surf, TextError> {
        if self.is_word("let") {
            self.bump();
            let name = self.ident()?;
            self.sym("=")?;
            let bound = self.expr()?;
            self.word("in")?;
            let body = self.expr()?;
            return Ok(Surf::Let(name, Box::new(bound), Box::new(body)));
        }
        let mut lhs = self.product()?;
        loop {
            let at = self.here();
            let op = if self.eat_sym("+") {
                BinOp::Plus
            } else if self.eat_sym("-") {
                BinOp::Minus
            } else {
                return Ok(lhs);
            };
            let rhs = self.product()?;
            lhs = Surf::Bin(op, Box::new(lhs), Box::new(rhs), at);
        }
    }

    fn product(&mut self) -> Result<Surf, TextError> {
        let mut lhs = self.postfix()?;
        while self.eat_sym("*") {
            let rhs = self.postfix()?;
            lhs = Surf::MatMul(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn postfix(&mut self) -> Result<Surf, TextError> {
        let mut e = self.primary()?;
        while self.eat_sym("'") {
            e = Surf::Transpose(Box::new(e));
        }
        Ok(e)
    }

    fn unary(&mut self, wrap: fn(Box<Surf>) -> Surf) -> Result<Surf, TextError> {
        self.bump();
        self.sym("(")?;
        let e = self.expr()?;
        self.sym(")")?;
        Ok(wrap(Box::new(e)))
    }

    fn primary(&mut self) -> Result<Surf, TextError> {
        match self.peek().clone() {
            Tok::Sym("(") => {
                self.bump();
                let e = self.expr()?;
                self.sym(")")?;
                Ok(e)
            }
            Tok::Ident(w) => match w.as_str() {
                "ones" => self.unary(Surf::Ones),
                "diag" => self.unary(Surf::Diag),
                "pickany" => self.unary(Surf::PickAny),
                "apply" => {
                    self.bump();
                    let at = self.here();
                    self.sym("[")?;
                    let f = self.function()?;
                    self.sym("]")?;
                    let args = self.args()?;
                    if args.len() != f.arity() {
                        return Err(at.err(format!(
                            "function takes {} arguments, applied to {}",
                            f.arity(),
                            args.len()
                        )));
                    }
                    Ok(Surf::Apply(f, args))
                }
                "for" => self.for_loop(),
                "let" => self.expr(),
                _ => Ok(Surf::Var(self.ident()?)),
            },
            _ => Err(self.unexpected("an expression")),
        }
    }

    fn args(&mut self) -> Result<Vec<Surf>, TextError> {
        self.sym("(")?;
        let mut out = vec![self.expr()?];
        while self.eat_sym(",") {
            out.push(self.expr()?);
        }
        self.sym(")")?;
        Ok(out)
    }

    fn for_loop(&mut self) -> Result<Surf, TextError> {
        let at = self.here();
        self.bump();
        let v = if self.eat_sym("[") {
            let v = self.ident()?;
            self.sym("]")?;
            Some(v)
        } else {
            None
        };
        self.sym("{")?;
        let mut bindings = Vec::new();
        loop {
            let bpos = self.here();
            let name = self.ident()?;
            self.sym(":=")?;
            let body = self.expr()?;
            if bindings.iter().any(|(n, _, _): &(String, Surf, Pos)| *n == name) {
                return Err(bpos.err(format!("`{name}` bound twice in one loop")));
            }
            bindings.push((name, body, bpos));
            if self.eat_sym(";") {
                if self.is_sym("}") {
                    break;
                }
            } else {
                break;
            }
        }
        self.sym("}")?;
        let args = if self.is_sym("(") { Some(self.args()?) } else { None };
        match (v, args) {
            (Some(v), None) => Ok(Surf::Canonical { v, bindings, inits: None }),
            (Some(v), Some(inits)) => {
                if inits.len() != bindings.len() {
                    return Err(at.err(format!(
                        "loop binds {} variables but has {} initializers",
                        bindings.len(),
                        inits.len()
                    )));
                }
                Ok(Surf::Canonical { v, bindings, inits: Some(inits) })
            }
            (None, None) => Err(self.unexpected("`(` with the driver of a counted loop")),
            (None, Some(mut args)) => {
                if args.len() != bindings.len() + 1 {
                    return Err(at.err(format!(
                        "counted loop binds {} variables and needs a driver plus {} initializers, got {} arguments",
                        bindings.len(),
                        bindings.len(),
                        args.len()
                    )));
                }
                let driver = args.remove(0);
                Ok(Surf::Counted { driver: Box::new(driver), bindings, inits: args })
            }
        }
    }

    /// `(a: ring, ...) -> body`
    fn function(&mut self) -> Result<PointwiseFn, TextError> {
        self.sym("(")?;
        let mut params: Vec<(String, SemiringId)> = Vec::new();
        loop {
            let at = self.here();
            let name = self.param_name()?;
            self.sym(":")?;
            let r = self.ring()?;
            if params.iter().any(|(n, _)| *n == name) {
                return Err(at.err(format!("parameter `{name}` declared twice")));
            }
            params.push((name, r));
            if !self.eat_sym(",") {
                break;
            }
        }
        self.sym(")")?;
        self.sym("->")?;
        let body = self.scalar()?;
        Ok(PointwiseFn { params, body })
    }

    fn param_name(&mut self) -> Result<String, TextError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.unexpected("a parameter name")),
        }
    }

    fn scalar(&mut self) -> Result<ScalarExpr, TextError> {
        let lhs = self.scalar_sum()?;
        if self.eat_sym("==") {
            let rhs = self.scalar_sum()?;
            return Ok(lhs.eq(rhs));
        }
        Ok(lhs)
    }

    fn scalar_sum(&mut self) -> Result<ScalarExpr, TextError> {
        let mut lhs = self.scalar_product()?;
        loop {
            if self.eat_sym("+") {
                lhs = lhs.add(self.scalar_product()?);
            } else if self.eat_sym("-") {
                lhs = lhs.sub(self.scalar_product()?);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn scalar_product(&mut self) -> Result<ScalarExpr, TextError> {
        let mut lhs = self.scalar_atom()?;
        loop {
            if self.eat_sym("*") {
                lhs = lhs.mul(self.scalar_atom()?);
            } else if self.eat_sym("/") {
                lhs = lhs.div(self.scalar_atom()?);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn scalar_atom(&mut self) -> Result<ScalarExpr, TextError> {
        let at = self.here();
        match self.peek().clone() {
            Tok::Sym("(") => {
                self.bump();
                let e = self.scalar()?;
                self.sym(")")?;
                Ok(e)
            }
            Tok::Ident(w) if w == "cast" && self.peek_at(1) == &Tok::Sym("(") => {
                self.bump();
                self.bump();
                let r = self.ring()?;
                self.sym(",")?;
                let e = self.scalar()?;
                self.sym(")")?;
                Ok(e.cast(r))
            }
            Tok::Ident(w) if w == "cond" && self.peek_at(1) == &Tok::Sym("(") => {
                self.bump();
                self.bump();
                let mut xs = vec![self.scalar()?];
                while self.eat_sym(",") {
                    xs.push(self.scalar()?);
                }
                self.sym(")")?;
                let [w, x, y, z]: [ScalarExpr; 4] =
                    xs.try_into().map_err(|xs: Vec<_>| at.err(format!("cond takes 4 arguments, got {}", xs.len())))?;
                Ok(ScalarExpr::cond(w, x, y, z))
            }
            Tok::Ident(w) if w == "enc" && self.peek_at(1) == &Tok::Sym("[") => {
                self.bump();
                self.bump();
                let f = self.function()?;
                self.sym("]")?;
                self.sym("(")?;
                let mut args = vec![self.scalar()?];
                while self.eat_sym(",") {
                    args.push(self.scalar()?);
                }
                self.sym(")")?;
                if args.len() != f.arity() {
                    return Err(at.err(format!("function takes {} arguments, applied to {}", f.arity(), args.len())));
                }
                Ok(ScalarExpr::Encoded { func: Box::new(f), args })
            }
            Tok::Ident(w) if self.peek_at(1) == &Tok::Sym("(") && SemiringId::from_str(&w).is_ok() => {
                let r = self.ring()?;
                self.sym("(")?;
                let tpos = self.here();
                let neg = self.eat_sym("-");
                let tok = match self.bump() {
                    Tok::Number(n) => n,
                    Tok::Ident(i) if i == "inf" || (!neg && (i == "true" || i == "false")) => i,
                    t => return Err(tpos.err(format!("expected a value, found {}", t.describe()))),
                };
                let tok = if neg { format!("-{tok}") } else { tok };
                self.sym(")")?;
                let v = parse_scalar(r, &tok, true).map_err(|e| tpos.err(e.to_string()))?;
                Ok(ScalarExpr::Lit(v))
            }
            Tok::Ident(_) => Ok(ScalarExpr::Param(self.param_name()?)),
            _ => Err(self.unexpected("a scalar expression")),
        }
    }
}

fn elaborate(scope: &mut RingScope<'_>, s: Surf) -> Result<Expr, TextError> {
    Ok(match s {
        Surf::Var(n) => Expr::Var(n),
        Surf::Transpose(a) => elaborate(scope, *a)?.t(),
        Surf::Ones(a) => elaborate(scope, *a)?.ones(),
        Surf::Diag(a) => elaborate(scope, *a)?.diag(),
        Surf::PickAny(a) => elaborate(scope, *a)?.pick_any(),
        Surf::MatMul(a, b) => elaborate(scope, *a)?.matmul(elaborate(scope, *b)?),
        Surf::Bin(op, a, b, at) => {
            let a = elaborate(scope, *a)?;
            let b = elaborate(scope, *b)?;
            let sym = if op == BinOp::Plus { "+" } else { "-" };
            let r = scope
                .ring_of(&a)
                .ok_or_else(|| at.err(format!("cannot determine the ring of the left operand of `{sym}`")))?;
            let f = if op == BinOp::Plus { PointwiseFn::add(r) } else { PointwiseFn::sub(r) };
            Expr::apply(f, vec![a, b])
        }
        Surf::Apply(f, args) => {
            Expr::Apply { func: f, args: args.into_iter().map(|a| elaborate(scope, a)).collect::<Result<_, _>>()? }
        }
        Surf::Let(name, bound, body) => {
            let bound = elaborate(scope, *bound)?;
            let r = scope.ring_of(&bound);
            let d = scope.depth();
            scope.push(&name, r);
            let body = elaborate(scope, *body);
            scope.truncate(d);
            Expr::Let { name, bound: Box::new(bound), body: Box::new(body?) }
        }
        Surf::Canonical { v, bindings, inits } => {
            let inits = match inits {
                Some(inits) => inits.into_iter().map(|i| elaborate(scope, i)).collect::<Result<Vec<_>, _>>()?,
                None => bindings
                    .iter()
                    .map(|(n, _, at)| {
                        let r = scope.lookup(n).ok_or_else(|| {
                            at.err(format!("zero-initialised `{n}` must be bound in an enclosing scope"))
                        })?;
                        Ok(Expr::apply(PointwiseFn::constant(r, zero(r)), vec![Expr::var(n)]))
                    })
                    .collect::<Result<Vec<_>, TextError>>()?,
            };
            let vr = scope.lookup(&v);
            let bindings = loop_bodies(scope, Some((&v, vr)), bindings, &inits)?;
            Expr::ForCanonical { v, bindings, inits }
        }
        Surf::Counted { driver, bindings, inits } => {
            let driver = elaborate(scope, *driver)?;
            let inits = inits.into_iter().map(|i| elaborate(scope, i)).collect::<Result<Vec<_>, _>>()?;
            let bindings = loop_bodies(scope, None, bindings, &inits)?;
            Expr::ForCounted { driver: Box::new(driver), bindings, inits }
        }
    })
}

fn loop_bodies(
    scope: &mut RingScope<'_>,
    v: Option<(&str, Option<SemiringId>)>,
    bindings: Vec<(String, Surf, Pos)>,
    inits: &[Expr],
) -> Result<Vec<(String, Expr)>, TextError> {
    let rings: Vec<_> = inits.iter().map(|i| scope.ring_of(i)).collect();
    let d = scope.depth();
    if let Some((v, r)) = v {
        scope.push(v, r);
    }
    for ((n, _, _), r) in bindings.iter().zip(rings) {
        scope.push(n, r);
    }
    let out =
        bindings.into_iter().map(|(n, b, _)| Ok((n, elaborate(scope, b)?))).collect::<Result<Vec<_>, TextError>>();
    scope.truncate(d);
    out
}
