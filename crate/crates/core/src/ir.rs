//! Shared abstract syntax for every dialect, plus types, schemas, name
//! handling and per-dialect construct validation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::semiring::{in_carrier, ScalarValue, SemiringId};

/// A dimension: a named size symbol or the literal `1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SizeTerm {
    Sym(String),
    One,
}

impl SizeTerm {
    pub fn sym(name: &str) -> SizeTerm {
        SizeTerm::Sym(name.to_string())
    }
}

impl fmt::Display for SizeTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SizeTerm::Sym(s) => f.write_str(s),
            SizeTerm::One => f.write_str("1"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MatrixType {
    pub rows: SizeTerm,
    pub cols: SizeTerm,
    pub ring: SemiringId,
}

impl MatrixType {
    pub fn new(rows: SizeTerm, cols: SizeTerm, ring: SemiringId) -> Self {
        MatrixType { rows, cols, ring }
    }

    pub fn is_vector(&self) -> bool {
        self.cols == SizeTerm::One
    }
}

impl fmt::Display for MatrixType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} x {} over {}", self.rows, self.cols, self.ring)
    }
}

/// Variable-to-type map. Inserting an existing name replaces its type.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Schema {
    vars: BTreeMap<String, MatrixType>,
}

impl Schema {
    pub fn new() -> Self {
        Schema::default()
    }

    pub fn insert(&mut self, name: &str, ty: MatrixType) {
        self.vars.insert(name.to_string(), ty);
    }

    pub fn with(mut self, name: &str, ty: MatrixType) -> Self {
        self.insert(name, ty);
        self
    }

    pub fn get(&self, name: &str) -> Option<&MatrixType> {
        self.vars.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &MatrixType)> {
        self.vars.iter()
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    /// Size symbols mentioned by any declared type.
    pub fn size_symbols(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for ty in self.vars.values() {
            for t in [&ty.rows, &ty.cols] {
                if let SizeTerm::Sym(s) = t {
                    out.insert(s.clone());
                }
            }
        }
        out
    }

    /// Rings used by declared types.
    pub fn rings(&self) -> BTreeSet<SemiringId> {
        self.vars.values().map(|t| t.ring).collect()
    }
}

impl FromIterator<(String, MatrixType)> for Schema {
    fn from_iter<I: IntoIterator<Item = (String, MatrixType)>>(iter: I) -> Self {
        Schema { vars: iter.into_iter().collect() }
    }
}

/// The six languages, ordered from smallest to largest where they nest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Dialect {
    Ml,
    ForMl,
    SiforMl,
    DecMl,
    MuseMl,
    Core,
}

impl Dialect {
    pub const ALL: [Dialect; 6] =
        [Dialect::Ml, Dialect::ForMl, Dialect::SiforMl, Dialect::DecMl, Dialect::MuseMl, Dialect::Core];

    /// Order in which dialect detection tries languages.
    pub const DETECTION_ORDER: [Dialect; 6] =
        [Dialect::Ml, Dialect::ForMl, Dialect::SiforMl, Dialect::DecMl, Dialect::Core, Dialect::MuseMl];

    pub fn name(self) -> &'static str {
        match self {
            Dialect::Ml => "ml",
            Dialect::ForMl => "for_ml",
            Dialect::SiforMl => "sifor_ml",
            Dialect::DecMl => "dec_ml",
            Dialect::MuseMl => "muse_ml",
            Dialect::Core => "core",
        }
    }

    fn short(self) -> &'static str {
        match self {
            Dialect::Ml => "ml",
            Dialect::ForMl => "for",
            Dialect::SiforMl => "sifor",
            Dialect::DecMl => "dec",
            Dialect::MuseMl => "muse",
            Dialect::Core => "core",
        }
    }

    /// Dialects whose programs live in exactly one semiring.
    pub fn is_single_ring(self) -> bool {
        matches!(self, Dialect::Ml | Dialect::ForMl | Dialect::SiforMl | Dialect::DecMl)
    }

    fn allows_canonical_loop(self) -> bool {
        matches!(self, Dialect::ForMl | Dialect::SiforMl)
    }

    fn allows_dec_constructs(self) -> bool {
        matches!(self, Dialect::DecMl | Dialect::MuseMl | Dialect::Core)
    }
}

impl fmt::Display for Dialect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown dialect `{0}`")]
pub struct UnknownDialect(pub String);

impl FromStr for Dialect {
    type Err = UnknownDialect;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.to_ascii_lowercase();
        Dialect::ALL.into_iter().find(|d| d.name() == s || d.short() == s).ok_or(UnknownDialect(s))
    }
}

/// A scalar function applied cell by cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointwiseFn {
    pub params: Vec<(String, SemiringId)>,
    pub body: ScalarExpr,
}

impl PointwiseFn {
    pub fn new(params: Vec<(&str, SemiringId)>, body: ScalarExpr) -> Self {
        PointwiseFn { params: params.into_iter().map(|(n, r)| (n.to_string(), r)).collect(), body }
    }

    /// `(x: from) -> value`, ignoring its argument.
    pub fn constant(from: SemiringId, value: ScalarValue) -> Self {
        PointwiseFn::new(vec![("x", from)], ScalarExpr::Lit(value))
    }

    /// `(a: r, b: r) -> a + b`.
    pub fn add(r: SemiringId) -> Self {
        PointwiseFn::new(vec![("a", r), ("b", r)], ScalarExpr::param("a").add(ScalarExpr::param("b")))
    }

    /// `(a: r, b: r) -> a - b`.
    pub fn sub(r: SemiringId) -> Self {
        PointwiseFn::new(vec![("a", r), ("b", r)], ScalarExpr::param("a").sub(ScalarExpr::param("b")))
    }

    /// `(a: r, b: r) -> a * b`.
    pub fn mul(r: SemiringId) -> Self {
        PointwiseFn::new(vec![("a", r), ("b", r)], ScalarExpr::param("a").mul(ScalarExpr::param("b")))
    }

    pub fn arity(&self) -> usize {
        self.params.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScalarExpr {
    Param(String),
    Lit(ScalarValue),
    Add(Box<ScalarExpr>, Box<ScalarExpr>),
    Mul(Box<ScalarExpr>, Box<ScalarExpr>),
    Sub(Box<ScalarExpr>, Box<ScalarExpr>),
    Div(Box<ScalarExpr>, Box<ScalarExpr>),
    Eq(Box<ScalarExpr>, Box<ScalarExpr>),
    Cast(SemiringId, Box<ScalarExpr>),
    /// `cond(w, x, y, z)`: `y` if `w = x`, else `z`.
    Cond(Box<ScalarExpr>, Box<ScalarExpr>, Box<ScalarExpr>, Box<ScalarExpr>),
    /// A function lifted to the encoding carrier: arguments are decoded into
    /// the parameter rings, `func` is applied, and the result is encoded
    /// from the body ring. Arguments and result live in `real`.
    Encoded {
        func: Box<PointwiseFn>,
        args: Vec<ScalarExpr>,
    },
}

#[allow(clippy::should_implement_trait)]
impl ScalarExpr {
    pub fn param(name: &str) -> Self {
        ScalarExpr::Param(name.to_string())
    }

    pub fn lit(v: ScalarValue) -> Self {
        ScalarExpr::Lit(v)
    }

    pub fn add(self, other: ScalarExpr) -> Self {
        ScalarExpr::Add(Box::new(self), Box::new(other))
    }

    pub fn mul(self, other: ScalarExpr) -> Self {
        ScalarExpr::Mul(Box::new(self), Box::new(other))
    }

    pub fn sub(self, other: ScalarExpr) -> Self {
        ScalarExpr::Sub(Box::new(self), Box::new(other))
    }

    pub fn div(self, other: ScalarExpr) -> Self {
        ScalarExpr::Div(Box::new(self), Box::new(other))
    }

    pub fn eq(self, other: ScalarExpr) -> Self {
        ScalarExpr::Eq(Box::new(self), Box::new(other))
    }

    pub fn cast(self, target: SemiringId) -> Self {
        ScalarExpr::Cast(target, Box::new(self))
    }

    pub fn cond(w: ScalarExpr, x: ScalarExpr, y: ScalarExpr, z: ScalarExpr) -> Self {
        ScalarExpr::Cond(Box::new(w), Box::new(x), Box::new(y), Box::new(z))
    }

    pub fn children(&self) -> Vec<&ScalarExpr> {
        match self {
            ScalarExpr::Param(_) | ScalarExpr::Lit(_) => vec![],
            ScalarExpr::Add(a, b)
            | ScalarExpr::Mul(a, b)
            | ScalarExpr::Sub(a, b)
            | ScalarExpr::Div(a, b)
            | ScalarExpr::Eq(a, b) => vec![a, b],
            ScalarExpr::Cast(_, a) => vec![a],
            ScalarExpr::Cond(w, x, y, z) => vec![w, x, y, z],
            ScalarExpr::Encoded { args, .. } => args.iter().collect(),
        }
    }
}

/// Matrix expressions of all dialects.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Var(String),
    Transpose(Box<Expr>),
    Ones(Box<Expr>),
    Diag(Box<Expr>),
    MatMul(Box<Expr>, Box<Expr>),
    Apply {
        func: PointwiseFn,
        args: Vec<Expr>,
    },
    PickAny(Box<Expr>),
    Let {
        name: String,
        bound: Box<Expr>,
        body: Box<Expr>,
    },
    /// Loop over the canonical vectors of the in-scope column vector `v`.
    /// Inside the bodies `v` denotes the current canonical vector.
    ForCanonical {
        v: String,
        bindings: Vec<(String, Expr)>,
        inits: Vec<Expr>,
    },
    /// Loop running once per row of `driver`.
    ForCounted {
        driver: Box<Expr>,
        bindings: Vec<(String, Expr)>,
        inits: Vec<Expr>,
    },
}

impl Expr {
    pub fn var(name: &str) -> Expr {
        Expr::Var(name.to_string())
    }

    pub fn t(self) -> Expr {
        Expr::Transpose(Box::new(self))
    }

    pub fn ones(self) -> Expr {
        Expr::Ones(Box::new(self))
    }

    pub fn diag(self) -> Expr {
        Expr::Diag(Box::new(self))
    }

    pub fn pick_any(self) -> Expr {
        Expr::PickAny(Box::new(self))
    }

    pub fn matmul(self, rhs: Expr) -> Expr {
        Expr::MatMul(Box::new(self), Box::new(rhs))
    }

    pub fn apply(func: PointwiseFn, args: Vec<Expr>) -> Expr {
        Expr::Apply { func, args }
    }

    pub fn let_in(name: &str, bound: Expr, body: Expr) -> Expr {
        Expr::Let { name: name.to_string(), bound: Box::new(bound), body: Box::new(body) }
    }

    pub fn for_canonical(v: &str, bindings: Vec<(&str, Expr)>, inits: Vec<Expr>) -> Expr {
        Expr::ForCanonical {
            v: v.to_string(),
            bindings: bindings.into_iter().map(|(n, e)| (n.to_string(), e)).collect(),
            inits,
        }
    }

    pub fn for_counted(driver: Expr, bindings: Vec<(&str, Expr)>, inits: Vec<Expr>) -> Expr {
        Expr::ForCounted {
            driver: Box::new(driver),
            bindings: bindings.into_iter().map(|(n, e)| (n.to_string(), e)).collect(),
            inits,
        }
    }

    /// Number of nodes, counting loop bodies and inits.
    pub fn size(&self) -> usize {
        1 + match self {
            Expr::Var(_) => 0,
            Expr::Transpose(e) | Expr::Ones(e) | Expr::Diag(e) | Expr::PickAny(e) => e.size(),
            Expr::MatMul(a, b) => a.size() + b.size(),
            Expr::Apply { args, .. } => args.iter().map(Expr::size).sum(),
            Expr::Let { bound, body, .. } => bound.size() + body.size(),
            Expr::ForCanonical { bindings, inits, .. } => {
                bindings.iter().map(|(_, b)| b.size()).sum::<usize>() + inits.iter().map(Expr::size).sum::<usize>()
            }
            Expr::ForCounted { driver, bindings, inits } => {
                driver.size()
                    + bindings.iter().map(|(_, b)| b.size()).sum::<usize>()
                    + inits.iter().map(Expr::size).sum::<usize>()
            }
        }
    }
}

/// Matrix variables read by `e` that no enclosing binder inside `e` binds.
/// The vector of a canonical loop is read from the surrounding scope.
pub fn free_vars(e: &Expr) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    collect_free(e, &mut Vec::new(), &mut out);
    out
}

fn collect_free(e: &Expr, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
    let mut note = |name: &String, bound: &Vec<String>| {
        if !bound.contains(name) {
            out.insert(name.clone());
        }
    };
    match e {
        Expr::Var(n) => note(n, bound),
        Expr::Transpose(a) | Expr::Ones(a) | Expr::Diag(a) | Expr::PickAny(a) => collect_free(a, bound, out),
        Expr::MatMul(a, b) => {
            collect_free(a, bound, out);
            collect_free(b, bound, out);
        }
        Expr::Apply { args, .. } => args.iter().for_each(|a| collect_free(a, bound, out)),
        Expr::Let { name, bound: b, body } => {
            collect_free(b, bound, out);
            bound.push(name.clone());
            collect_free(body, bound, out);
            bound.pop();
        }
        Expr::ForCanonical { v, bindings, inits } => {
            note(v, bound);
            inits.iter().for_each(|i| collect_free(i, bound, out));
            let depth = bound.len();
            bound.push(v.clone());
            bound.extend(bindings.iter().map(|(n, _)| n.clone()));
            bindings.iter().for_each(|(_, b)| collect_free(b, bound, out));
            bound.truncate(depth);
        }
        Expr::ForCounted { driver, bindings, inits } => {
            collect_free(driver, bound, out);
            inits.iter().for_each(|i| collect_free(i, bound, out));
            let depth = bound.len();
            bound.extend(bindings.iter().map(|(n, _)| n.clone()));
            bindings.iter().for_each(|(_, b)| collect_free(b, bound, out));
            bound.truncate(depth);
        }
    }
}

/// Every matrix-level name occurring in `e`, free or bound.
pub fn all_names(e: &Expr) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    walk(e, &mut |node| match node {
        Expr::Var(n) => {
            out.insert(n.clone());
        }
        Expr::Let { name, .. } => {
            out.insert(name.clone());
        }
        Expr::ForCanonical { v, bindings, .. } => {
            out.insert(v.clone());
            out.extend(bindings.iter().map(|(n, _)| n.clone()));
        }
        Expr::ForCounted { bindings, .. } => {
            out.extend(bindings.iter().map(|(n, _)| n.clone()));
        }
        _ => {}
    });
    out
}

/// Pre-order traversal over every sub-expression.
pub fn walk<'a>(e: &'a Expr, f: &mut impl FnMut(&'a Expr)) {
    f(e);
    match e {
        Expr::Var(_) => {}
        Expr::Transpose(a) | Expr::Ones(a) | Expr::Diag(a) | Expr::PickAny(a) => walk(a, f),
        Expr::MatMul(a, b) => {
            walk(a, f);
            walk(b, f);
        }
        Expr::Apply { args, .. } => args.iter().for_each(|a| walk(a, f)),
        Expr::Let { bound, body, .. } => {
            walk(bound, f);
            walk(body, f);
        }
        Expr::ForCanonical { bindings, inits, .. } => {
            inits.iter().for_each(|i| walk(i, f));
            bindings.iter().for_each(|(_, b)| walk(b, f));
        }
        Expr::ForCounted { driver, bindings, inits } => {
            walk(driver, f);
            inits.iter().for_each(|i| walk(i, f));
            bindings.iter().for_each(|(_, b)| walk(b, f));
        }
    }
}

/// Returns `hint` if unused, else `hint_k` for the smallest `k >= 1` not in `avoid`.
pub fn fresh_name(avoid: &BTreeSet<String>, hint: &str) -> String {
    if !avoid.contains(hint) {
        return hint.to_string();
    }
    (1..).map(|k| format!("{hint}_{k}")).find(|n| !avoid.contains(n)).expect("unbounded name space")
}

/// Hands out names that are fresh with respect to a growing avoid set.
#[derive(Debug, Clone, Default)]
pub struct NameSupply {
    used: BTreeSet<String>,
    introduced: Vec<String>,
}

impl NameSupply {
    /// Seeds the supply with every name in `e` and in `schema`.
    pub fn for_program(e: &Expr, schema: &Schema) -> Self {
        let mut used = all_names(e);
        used.extend(schema.iter().map(|(n, _)| n.clone()));
        NameSupply { used, introduced: Vec::new() }
    }

    pub fn reserve(&mut self, name: &str) {
        self.used.insert(name.to_string());
    }

    pub fn fresh(&mut self, hint: &str) -> String {
        let n = fresh_name(&self.used, hint);
        self.used.insert(n.clone());
        self.introduced.push(n.clone());
        n
    }

    /// Names handed out so far, in order.
    pub fn introduced(&self) -> &[String] {
        &self.introduced
    }
}

/// A single construct that is not legal in the checked dialect.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub path: String,
    pub rule: &'static str,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} [{}]", self.path, self.message, self.rule)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("program is not valid {dialect}: {}", .violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
pub struct DialectError {
    pub dialect: Dialect,
    pub violations: Vec<Violation>,
}

/// Checks that every construct in `e` belongs to dialect `d` under schema `s`.
pub fn validate_dialect(e: &Expr, d: Dialect, s: &Schema) -> Result<(), DialectError> {
    let rings = s.rings();
    let ring = if d.is_single_ring() {
        match rings.len() {
            0 => single_literal_ring(e),
            1 => rings.iter().next().copied(),
            _ => None,
        }
    } else {
        None
    };
    let mut v = Validator { d, ring, out: Vec::new() };
    if d.is_single_ring() && rings.len() > 1 {
        v.push(
            "schema".into(),
            "single-ring",
            format!(
                "{} programs use one semiring, schema uses {}",
                d.short(),
                rings.iter().map(|r| r.name()).collect::<Vec<_>>().join(", ")
            ),
        );
    }
    v.expr(e, "root".to_string());
    if v.out.is_empty() {
        Ok(())
    } else {
        Err(DialectError { dialect: d, violations: v.out })
    }
}

/// Smallest dialect (in detection order) that accepts the program.
pub fn detect_dialect(e: &Expr, s: &Schema) -> Result<Dialect, DialectError> {
    let mut last = None;
    for d in Dialect::DETECTION_ORDER {
        match validate_dialect(e, d, s) {
            Ok(()) => return Ok(d),
            Err(err) => last = Some(err),
        }
    }
    Err(last.expect("at least one dialect checked"))
}

fn single_literal_ring(e: &Expr) -> Option<SemiringId> {
    let mut found = None;
    walk(e, &mut |node| {
        if let Expr::Apply { func, .. } = node {
            if found.is_none() {
                found = func.params.first().map(|p| p.1);
            }
        }
    });
    found
}

struct Validator {
    d: Dialect,
    ring: Option<SemiringId>,
    out: Vec<Violation>,
}

impl Validator {
    fn push(&mut self, path: String, rule: &'static str, message: String) {
        self.out.push(Violation { path, rule, message });
    }

    fn loop_shape(&mut self, path: &str, bindings: &[(String, Expr)], inits: &[Expr], v: Option<&str>) {
        if bindings.is_empty() || bindings.len() != inits.len() {
            self.push(
                path.to_string(),
                "loop-shape",
                format!("loop has {} bindings and {} initializers", bindings.len(), inits.len()),
            );
        }
        let mut seen = BTreeSet::new();
        for (n, _) in bindings {
            if !seen.insert(n.as_str()) {
                self.push(path.to_string(), "loop-shape", format!("binding `{n}` appears twice"));
            }
            if Some(n.as_str()) == v {
                self.push(path.to_string(), "loop-shape", format!("binding `{n}` shadows the loop vector"));
            }
        }
    }

    fn expr(&mut self, e: &Expr, path: String) {
        let d = self.d;
        match e {
            Expr::Var(_) => {}
            Expr::Transpose(a) => self.expr(a, format!("{path}/transpose")),
            Expr::Ones(a) => self.expr(a, format!("{path}/ones")),
            Expr::Diag(a) => self.expr(a, format!("{path}/diag")),
            Expr::MatMul(a, b) => {
                self.expr(a, format!("{path}/matmul.lhs"));
                self.expr(b, format!("{path}/matmul.rhs"));
            }
            Expr::PickAny(a) => {
                if !d.allows_dec_constructs() {
                    self.push(path.clone(), "pickany-dialect", format!("pickAny not in {}", d.short()));
                }
                self.expr(a, format!("{path}/pickany"));
            }
            Expr::Apply { func, args } => {
                self.pointwise(func, &format!("{path}/apply.fn"));
                for (i, a) in args.iter().enumerate() {
                    self.expr(a, format!("{path}/apply.arg[{i}]"));
                }
            }
            Expr::Let { bound, body, name } => {
                self.expr(bound, format!("{path}/let[{name}].bound"));
                self.expr(body, format!("{path}/let[{name}].body"));
            }
            Expr::ForCanonical { v, bindings, inits } => {
                if !d.allows_canonical_loop() {
                    self.push(path.clone(), "canonical-loop-dialect", format!("canonical loop not in {}", d.short()));
                } else if d == Dialect::ForMl && bindings.len() > 1 {
                    self.push(
                        path.clone(),
                        "single-binding-loop",
                        format!("for loops bind one variable, found {}", bindings.len()),
                    );
                }
                self.loop_shape(&path, bindings, inits, Some(v));
                for (i, init) in inits.iter().enumerate() {
                    self.expr(init, format!("{path}/for.init[{i}]"));
                }
                for (n, b) in bindings {
                    self.expr(b, format!("{path}/for.body[{n}]"));
                }
            }
            Expr::ForCounted { driver, bindings, inits } => {
                if !d.allows_dec_constructs() {
                    self.push(path.clone(), "counted-loop-dialect", format!("counted loop not in {}", d.short()));
                }
                self.loop_shape(&path, bindings, inits, None);
                self.expr(driver, format!("{path}/for.driver"));
                for (i, init) in inits.iter().enumerate() {
                    self.expr(init, format!("{path}/for.init[{i}]"));
                }
                for (n, b) in bindings {
                    self.expr(b, format!("{path}/for.body[{n}]"));
                }
            }
        }
    }

    fn check_ring(&mut self, path: &str, r: SemiringId, what: &str) {
        if self.d.is_single_ring() && Some(r) != self.ring {
            let expected = self.ring.map(|r| r.name()).unwrap_or("<none>");
            self.push(
                path.to_string(),
                "single-ring",
                format!("{what} over {r} in a {} program over {expected}", self.d.short()),
            );
        }
    }

    fn pointwise(&mut self, f: &PointwiseFn, path: &str) {
        let mut seen = BTreeSet::new();
        for (n, r) in &f.params {
            if !seen.insert(n.as_str()) {
                self.push(path.to_string(), "pointwise-params", format!("parameter `{n}` appears twice"));
            }
            self.check_ring(path, *r, &format!("parameter `{n}`"));
        }
        self.scalar(&f.body, path, &seen);
    }

    fn scalar(&mut self, se: &ScalarExpr, path: &str, params: &BTreeSet<&str>) {
        let d = self.d;
        let single = d.is_single_ring();
        let ring = self.ring;
        match se {
            ScalarExpr::Param(n) => {
                if !params.contains(n.as_str()) {
                    self.push(path.to_string(), "pointwise-params", format!("unknown parameter `{n}`"));
                }
            }
            ScalarExpr::Lit(v) => {
                self.check_ring(path, v.ring(), "literal");
                let strict = !single || v.ring() != SemiringId::Real;
                if strict && !in_carrier(v.ring(), v.scalar()) {
                    self.push(
                        path.to_string(),
                        "literal-carrier",
                        format!("literal {v} is outside the carrier of {}", v.ring()),
                    );
                }
            }
            ScalarExpr::Cast(_, _) if single => {
                self.push(path.to_string(), "no-cast", format!("cast not in {}", d.short()));
            }
            ScalarExpr::Eq(_, _) if single && ring != Some(SemiringId::Bool) => {
                self.push(path.to_string(), "single-ring", format!("equality yields bool in a {} program", d.short()));
            }
            ScalarExpr::Sub(_, _) if single && !matches!(ring, Some(SemiringId::Int | SemiringId::Real)) => {
                self.push(path.to_string(), "single-ring", "subtraction needs int or real".to_string());
            }
            ScalarExpr::Div(_, _) if single && ring != Some(SemiringId::Real) => {
                self.push(path.to_string(), "single-ring", "division needs real".to_string());
            }
            ScalarExpr::Encoded { func, .. } => {
                if d == Dialect::Core {
                    self.push(path.to_string(), "scalar-grammar", "encoded function not in core".to_string());
                } else if single && ring != Some(SemiringId::Real) {
                    self.push(path.to_string(), "single-ring", "encoded functions operate over real".to_string());
                }
                let inner: BTreeSet<&str> = func.params.iter().map(|p| p.0.as_str()).collect();
                if inner.len() != func.params.len() {
                    self.push(path.to_string(), "pointwise-params", "encoded function repeats a parameter".to_string());
                }
                let saved = (self.d, self.ring);
                // The wrapped function is multi-ring by construction.
                self.d = Dialect::MuseMl;
                self.ring = None;
                self.scalar(&func.body, path, &inner);
                (self.d, self.ring) = saved;
            }
            _ => {}
        }
        if !matches!(se, ScalarExpr::Encoded { .. } | ScalarExpr::Param(_) | ScalarExpr::Lit(_)) {
            for c in se.children() {
                self.scalar(c, path, params);
            }
        } else if let ScalarExpr::Encoded { args, .. } = se {
            for a in args {
                self.scalar(a, path, params);
            }
        }
    }
}

/// Rings with native subtraction.
pub fn is_counting_ring(r: SemiringId) -> bool {
    matches!(r, SemiringId::Int | SemiringId::Real)
}
