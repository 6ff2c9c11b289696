//! Dense evaluator for all dialects.

use std::collections::BTreeMap;
use std::fmt;
use std::rc::Rc;

use thiserror::Error;

use crate::ir::{Expr, PointwiseFn, ScalarExpr, Schema, SizeTerm};
use crate::semiring::{
    add_scalar, cast_value, dec_value, div_scalar, enc_value, format_scalar, in_encoded_carrier, mul_scalar, normalize,
    one_scalar, parse_scalar, sub_scalar, zero_scalar, ArithError, Domain, Scalar, ScalarValue, SemiringId,
};
use crate::typecheck::check_fn;

pub const DEFAULT_MAX_ELEMENTS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unbound matrix variable `{0}`")]
    Unbound(String),
    #[error("dimension mismatch in {op}: {detail}")]
    Shape { op: &'static str, detail: String },
    #[error("semiring mismatch in {op}: expected {expected}, found {found}")]
    Ring { op: &'static str, expected: SemiringId, found: SemiringId },
    #[error("{source}{}", cell_suffix(.cell))]
    Arith { cell: Option<(usize, usize)>, source: ArithError },
    #[error("integer {value} exceeds the configured bound{}", cell_suffix(.cell))]
    IntBound { cell: Option<(usize, usize)>, value: i64 },
    #[error("matrix of {rows} x {cols} exceeds the element limit {limit}")]
    TooLarge { rows: usize, cols: usize, limit: usize },
    #[error("instance does not conform: {0}")]
    Instance(String),
    #[error("ill-typed pointwise function: {0}")]
    Type(String),
}

fn cell_suffix(cell: &Option<(usize, usize)>) -> String {
    match cell {
        Some((r, c)) => format!(" at cell ({}, {})", r + 1, c + 1),
        None => String::new(),
    }
}

impl EvalError {
    /// Errors a well-typed program on a conforming instance must never raise.
    pub fn is_soundness_violation(&self) -> bool {
        matches!(
            self,
            EvalError::Unbound(_)
                | EvalError::Shape { .. }
                | EvalError::Ring { .. }
                | EvalError::Instance(_)
                | EvalError::Type(_)
        )
    }
}

impl From<ArithError> for EvalError {
    fn from(source: ArithError) -> Self {
        EvalError::Arith { cell: None, source }
    }
}

/// Dense row-major matrix over one semiring.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    ring: SemiringId,
    data: Vec<Scalar>,
}

impl Matrix {
    /// Builds a matrix from row-major payloads. Real matrices may carry the
    /// infinities used by encoded programs.
    pub fn new(rows: usize, cols: usize, ring: SemiringId, mut data: Vec<Scalar>) -> Result<Matrix, EvalError> {
        for s in &mut data {
            *s = normalize(*s);
        }
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(EvalError::Shape {
                op: "matrix",
                detail: format!("{rows} x {cols} with {} entries", data.len()),
            });
        }
        if let Some(bad) = data.iter().find(|s| !in_encoded_carrier(ring, **s)) {
            return Err(ArithError::NotInCarrier { value: format_scalar(*bad), ring }.into());
        }
        Ok(Matrix { rows, cols, ring, data })
    }

    pub fn filled(rows: usize, cols: usize, v: ScalarValue) -> Matrix {
        Matrix { rows, cols, ring: v.ring(), data: vec![v.scalar(); rows * cols] }
    }

    pub fn zeros(rows: usize, cols: usize, ring: SemiringId) -> Matrix {
        Matrix { rows, cols, ring, data: vec![zero_scalar(ring); rows * cols] }
    }

    /// Builds a matrix from value tokens, one slice per row.
    pub fn from_tokens(ring: SemiringId, rows: &[&[&str]]) -> Result<Matrix, EvalError> {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::new();
        for row in rows {
            if row.len() != cols {
                return Err(EvalError::Shape { op: "matrix", detail: "ragged rows".into() });
            }
            for tok in *row {
                data.push(parse_scalar(ring, tok, true)?.scalar());
            }
        }
        Matrix::new(rows.len(), cols, ring, data)
    }

    /// Integer matrix (or any int-domain ring), one slice per row.
    pub fn from_ints(ring: SemiringId, rows: &[&[i64]]) -> Matrix {
        let data: Vec<Scalar> = rows.iter().flat_map(|r| r.iter().map(|&x| Scalar::Int(x))).collect();
        Matrix::new(rows.len(), rows.first().map_or(0, |r| r.len()), ring, data).expect("valid int matrix")
    }

    /// Real matrix (or any real-domain ring), one slice per row.
    pub fn from_reals(ring: SemiringId, rows: &[&[f64]]) -> Matrix {
        let data: Vec<Scalar> =
            rows.iter().flat_map(|r| r.iter().map(|&x| Scalar::from_f64(x).expect("not NaN"))).collect();
        Matrix::new(rows.len(), rows.first().map_or(0, |r| r.len()), ring, data).expect("valid real matrix")
    }

    pub fn from_bools(rows: &[&[bool]]) -> Matrix {
        let data: Vec<Scalar> = rows.iter().flat_map(|r| r.iter().map(|&b| Scalar::Bool(b))).collect();
        Matrix::new(rows.len(), rows.first().map_or(0, |r| r.len()), SemiringId::Bool, data).expect("valid matrix")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn ring(&self) -> SemiringId {
        self.ring
    }

    pub fn data(&self) -> &[Scalar] {
        &self.data
    }

    pub fn scalar(&self, r: usize, c: usize) -> Scalar {
        self.data[r * self.cols + c]
    }

    pub fn get(&self, r: usize, c: usize) -> ScalarValue {
        ScalarValue::from_parts_unchecked(self.ring, self.scalar(r, c))
    }

    pub fn is_zero_at(&self, r: usize, c: usize) -> bool {
        self.scalar(r, c) == zero_scalar(self.ring)
    }

    pub fn transpose(&self) -> Matrix {
        let mut data = Vec::with_capacity(self.data.len());
        for c in 0..self.cols {
            for r in 0..self.rows {
                data.push(self.scalar(r, c));
            }
        }
        Matrix { rows: self.cols, cols: self.rows, ring: self.ring, data }
    }

    /// Applies `f` to every entry, producing a matrix over `ring`.
    pub fn try_map(
        &self,
        ring: SemiringId,
        mut f: impl FnMut(ScalarValue) -> Result<ScalarValue, ArithError>,
    ) -> Result<Matrix, EvalError> {
        let mut data = Vec::with_capacity(self.data.len());
        for (i, s) in self.data.iter().enumerate() {
            let v = f(ScalarValue::from_parts_unchecked(self.ring, *s))
                .map_err(|source| EvalError::Arith { cell: Some((i / self.cols, i % self.cols)), source })?;
            data.push(v.scalar());
        }
        Matrix::new(self.rows, self.cols, ring, data)
    }

    /// Entrywise encoding into the extended reals.
    pub fn encode(&self) -> Matrix {
        self.try_map(SemiringId::Real, |v| enc_value(self.ring, &v)).expect("encoding is total")
    }

    /// Entrywise decoding from the extended reals into `ring`.
    pub fn decode(&self, ring: SemiringId) -> Matrix {
        self.try_map(ring, |w| Ok(dec_value(ring, &w))).expect("decoding is total")
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for r in 0..self.rows {
            if r > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for c in 0..self.cols {
                if c > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", format_scalar(self.scalar(r, c)))?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

/// `n x 1` vector with `one(ring)` at 1-based position `k`.
pub fn canonical_vector(n: usize, k: usize, ring: SemiringId) -> Result<Matrix, EvalError> {
    if n == 0 || k == 0 || k > n {
        return Err(EvalError::Shape { op: "canonical vector", detail: format!("index {k} of {n}") });
    }
    let mut m = Matrix::zeros(n, 1, ring);
    m.data[k - 1] = one_scalar(ring);
    Ok(m)
}

/// Keeps, in every row, the entries up to and including the first nonzero.
/// Entries before it are zero already, so each row retains at most its
/// first nonzero entry.
pub fn pick_any(a: &Matrix) -> Matrix {
    let zero = zero_scalar(a.ring);
    let mut out = Matrix::zeros(a.rows, a.cols, a.ring);
    for r in 0..a.rows {
        for c in 0..a.cols {
            let s = a.scalar(r, c);
            out.data[r * a.cols + c] = s;
            if s != zero {
                break;
            }
        }
    }
    out
}

/// Size assignment plus matrix assignment.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Instance {
    pub sizes: BTreeMap<String, usize>,
    pub mats: BTreeMap<String, Matrix>,
}

impl Instance {
    pub fn new() -> Self {
        Instance::default()
    }

    pub fn with_size(mut self, sym: &str, n: usize) -> Self {
        self.sizes.insert(sym.to_string(), n);
        self
    }

    pub fn with_matrix(mut self, name: &str, m: Matrix) -> Self {
        self.mats.insert(name.to_string(), m);
        self
    }

    pub fn size_of(&self, t: &SizeTerm) -> Option<usize> {
        match t {
            SizeTerm::One => Some(1),
            SizeTerm::Sym(s) => self.sizes.get(s).copied(),
        }
    }

    /// Fills in size symbols from the bound matrices, rejecting conflicts.
    pub fn infer_sizes(&mut self, schema: &Schema) -> Result<(), EvalError> {
        for (name, ty) in schema.iter() {
            let Some(m) = self.mats.get(name) else { continue };
            for (term, actual) in [(&ty.rows, m.rows), (&ty.cols, m.cols)] {
                let SizeTerm::Sym(s) = term else { continue };
                match self.sizes.get(s) {
                    Some(&n) if n != actual => {
                        return Err(EvalError::Instance(format!("size `{s}` is {n} but `{name}` has extent {actual}")))
                    }
                    Some(_) => {}
                    None => {
                        self.sizes.insert(s.clone(), actual);
                    }
                }
            }
        }
        Ok(())
    }

    /// Checks that every schema variable is bound to a matrix of its type.
    pub fn check_conforms(&self, schema: &Schema) -> Result<(), EvalError> {
        for (s, &n) in &self.sizes {
            if n == 0 {
                return Err(EvalError::Instance(format!("size `{s}` must be at least 1")));
            }
        }
        for (name, ty) in schema.iter() {
            let m = self.mats.get(name).ok_or_else(|| EvalError::Instance(format!("`{name}` is not bound")))?;
            let rows = self
                .size_of(&ty.rows)
                .ok_or_else(|| EvalError::Instance(format!("size `{}` is not assigned", ty.rows)))?;
            let cols = self
                .size_of(&ty.cols)
                .ok_or_else(|| EvalError::Instance(format!("size `{}` is not assigned", ty.cols)))?;
            if (m.rows, m.cols) != (rows, cols) {
                return Err(EvalError::Instance(format!(
                    "`{name}` is {} x {}, its type {ty} requires {rows} x {cols}",
                    m.rows, m.cols
                )));
            }
            if m.ring != ty.ring {
                return Err(EvalError::Instance(format!("`{name}` is over {}, its type requires {}", m.ring, ty.ring)));
            }
        }
        Ok(())
    }

    /// The same instance with every matrix encoded into the extended reals.
    pub fn encode(&self) -> Instance {
        Instance { sizes: self.sizes.clone(), mats: self.mats.iter().map(|(n, m)| (n.clone(), m.encode())).collect() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig {
    pub max_elements: usize,
    /// When set, any int-domain result with larger magnitude is an error.
    pub int_bound: Option<i64>,
    /// Record the binding states of every loop execution.
    pub trace_loops: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig { max_elements: DEFAULT_MAX_ELEMENTS, int_bound: None, trace_loops: false }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EvalStats {
    /// Number of loop body evaluations, one per binding per iteration.
    pub body_evals: u64,
    pub loop_iterations: u64,
}

/// Binding states `I_0 .. I_n` of one loop execution.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopTrace {
    pub names: Vec<String>,
    pub states: Vec<Vec<Matrix>>,
}

impl LoopTrace {
    /// The successive values of binding `name`.
    pub fn binding(&self, name: &str) -> Option<Vec<&Matrix>> {
        let i = self.names.iter().position(|n| n == name)?;
        Some(self.states.iter().map(|s| &s[i]).collect())
    }
}

/// Evaluates expressions against an instance.
pub struct Evaluator<'i> {
    instance: &'i Instance,
    config: EvalConfig,
    globals: BTreeMap<String, Rc<Matrix>>,
    env: Vec<(String, Rc<Matrix>)>,
    stats: EvalStats,
    traces: Vec<LoopTrace>,
}

/// Evaluates `e` with the default configuration.
pub fn eval(i: &Instance, e: &Expr) -> Result<Matrix, EvalError> {
    Evaluator::new(i, EvalConfig::default()).eval(e)
}

impl<'i> Evaluator<'i> {
    pub fn new(instance: &'i Instance, config: EvalConfig) -> Self {
        Evaluator {
            instance,
            config,
            globals: BTreeMap::new(),
            env: Vec::new(),
            stats: EvalStats::default(),
            traces: Vec::new(),
        }
    }

    pub fn stats(&self) -> &EvalStats {
        &self.stats
    }

    /// Loop traces in order of loop completion; empty unless tracing is on.
    pub fn traces(&self) -> &[LoopTrace] {
        &self.traces
    }

    pub fn eval(&mut self, e: &Expr) -> Result<Matrix, EvalError> {
        self.env.clear();
        let m = self.eval_rc(e)?;
        Ok(Rc::try_unwrap(m).unwrap_or_else(|rc| (*rc).clone()))
    }

    fn lookup(&mut self, name: &str) -> Result<Rc<Matrix>, EvalError> {
        if let Some((_, m)) = self.env.iter().rev().find(|(n, _)| n == name) {
            return Ok(m.clone());
        }
        if let Some(m) = self.globals.get(name) {
            return Ok(m.clone());
        }
        let m = Rc::new(self.instance.mats.get(name).cloned().ok_or_else(|| EvalError::Unbound(name.to_string()))?);
        self.globals.insert(name.to_string(), m.clone());
        Ok(m)
    }

    fn check_size(&self, rows: usize, cols: usize) -> Result<(), EvalError> {
        match rows.checked_mul(cols) {
            Some(n) if n <= self.config.max_elements => Ok(()),
            _ => Err(EvalError::TooLarge { rows, cols, limit: self.config.max_elements }),
        }
    }

    fn check_bound(&self, ring: SemiringId, s: Scalar, cell: (usize, usize)) -> Result<(), EvalError> {
        if let (Some(bound), Domain::Int, Scalar::Int(x)) = (self.config.int_bound, ring.domain(), s) {
            if x.unsigned_abs() > bound.unsigned_abs() {
                return Err(EvalError::IntBound { cell: Some(cell), value: x });
            }
        }
        Ok(())
    }

    fn eval_rc(&mut self, e: &Expr) -> Result<Rc<Matrix>, EvalError> {
        match e {
            Expr::Var(n) => self.lookup(n),
            Expr::Transpose(a) => Ok(Rc::new(self.eval_rc(a)?.transpose())),
            Expr::Ones(a) => {
                let m = self.eval_rc(a)?;
                Ok(Rc::new(Matrix::filled(m.rows, 1, ScalarValue::from_parts_unchecked(m.ring, one_scalar(m.ring)))))
            }
            Expr::Diag(a) => {
                let m = self.eval_rc(a)?;
                if m.cols != 1 {
                    return Err(EvalError::Shape {
                        op: "diag",
                        detail: format!("{} x {} is not a vector", m.rows, m.cols),
                    });
                }
                self.check_size(m.rows, m.rows)?;
                let mut out = Matrix::zeros(m.rows, m.rows, m.ring);
                for i in 0..m.rows {
                    out.data[i * m.rows + i] = m.data[i];
                }
                Ok(Rc::new(out))
            }
            Expr::MatMul(a, b) => {
                let ma = self.eval_rc(a)?;
                let mb = self.eval_rc(b)?;
                Ok(Rc::new(self.matmul(&ma, &mb)?))
            }
            Expr::PickAny(a) => Ok(Rc::new(pick_any(&*self.eval_rc(a)?))),
            Expr::Apply { func, args } => {
                let mut ms = Vec::with_capacity(args.len());
                for a in args {
                    ms.push(self.eval_rc(a)?);
                }
                let refs: Vec<&Matrix> = ms.iter().map(|m| &**m).collect();
                Ok(Rc::new(self.apply(func, &refs)?))
            }
            Expr::Let { name, bound, body } => {
                let v = self.eval_rc(bound)?;
                self.env.push((name.clone(), v));
                let r = self.eval_rc(body);
                self.env.pop();
                r
            }
            Expr::ForCanonical { v, bindings, inits } => {
                let vm = self.lookup(v)?;
                if vm.cols != 1 {
                    return Err(EvalError::Shape {
                        op: "canonical loop",
                        detail: format!("`{v}` is {} x {}, not a vector", vm.rows, vm.cols),
                    });
                }
                self.run_loop(Some((v, vm.ring)), vm.rows, bindings, inits)
            }
            Expr::ForCounted { driver, bindings, inits } => {
                let d = self.eval_rc(driver)?;
                if d.cols != 1 {
                    return Err(EvalError::Shape {
                        op: "counted loop",
                        detail: format!("driver is {} x {}, not a vector", d.rows, d.cols),
                    });
                }
                self.run_loop(None, d.rows, bindings, inits)
            }
        }
    }

    fn run_loop(
        &mut self,
        v: Option<(&String, SemiringId)>,
        n: usize,
        bindings: &[(String, Expr)],
        inits: &[Expr],
    ) -> Result<Rc<Matrix>, EvalError> {
        if bindings.is_empty() || bindings.len() != inits.len() {
            return Err(EvalError::Shape {
                op: "loop",
                detail: format!("{} bindings, {} initializers", bindings.len(), inits.len()),
            });
        }
        let mut state = Vec::with_capacity(inits.len());
        for init in inits {
            state.push(self.eval_rc(init)?);
        }
        let mut trace = self.config.trace_loops.then(|| LoopTrace {
            names: bindings.iter().map(|(n, _)| n.clone()).collect(),
            states: vec![state.iter().map(|m| (**m).clone()).collect()],
        });
        for k in 1..=n {
            let depth = self.env.len();
            if let Some((name, ring)) = v {
                self.env.push((name.clone(), Rc::new(canonical_vector(n, k, ring)?)));
            }
            for ((name, _), m) in bindings.iter().zip(&state) {
                self.env.push((name.clone(), m.clone()));
            }
            let mut next = Vec::with_capacity(state.len());
            let mut failure = None;
            for (_, body) in bindings {
                self.stats.body_evals += 1;
                match self.eval_rc(body) {
                    Ok(m) => next.push(m),
                    Err(e) => {
                        failure = Some(e);
                        break;
                    }
                }
            }
            self.env.truncate(depth);
            if let Some(e) = failure {
                return Err(e);
            }
            for ((name, _), (old, new)) in bindings.iter().zip(state.iter().zip(&next)) {
                if (old.rows, old.cols, old.ring) != (new.rows, new.cols, new.ring) {
                    return Err(EvalError::Shape {
                        op: "loop",
                        detail: format!(
                            "`{name}` changed from {} x {} over {} to {} x {} over {}",
                            old.rows, old.cols, old.ring, new.rows, new.cols, new.ring
                        ),
                    });
                }
            }
            self.stats.loop_iterations += 1;
            state = next;
            if let Some(t) = trace.as_mut() {
                t.states.push(state.iter().map(|m| (**m).clone()).collect());
            }
        }
        if let Some(t) = trace {
            self.traces.push(t);
        }
        Ok(state.swap_remove(0))
    }

    fn matmul(&self, a: &Matrix, b: &Matrix) -> Result<Matrix, EvalError> {
        if a.ring != b.ring {
            return Err(EvalError::Ring { op: "matmul", expected: a.ring, found: b.ring });
        }
        if a.cols != b.rows {
            return Err(EvalError::Shape {
                op: "matmul",
                detail: format!("{} x {} times {} x {}", a.rows, a.cols, b.rows, b.cols),
            });
        }
        self.check_size(a.rows, b.cols)?;
        let ring = a.ring;
        let zero = zero_scalar(ring);
        let mut out = Matrix::zeros(a.rows, b.cols, ring);
        for i in 0..a.rows {
            let row = &mut out.data[i * b.cols..(i + 1) * b.cols];
            for k in 0..a.cols {
                let x = a.scalar(i, k);
                if x == zero {
                    continue;
                }
                for (j, acc) in row.iter_mut().enumerate() {
                    let y = b.scalar(k, j);
                    if y == zero {
                        continue;
                    }
                    let cell = |source| EvalError::Arith { cell: Some((i, j)), source };
                    let p = mul_scalar(ring, x, y).map_err(cell)?;
                    *acc = add_scalar(ring, *acc, p).map_err(cell)?;
                }
            }
            for (j, s) in row.iter().enumerate() {
                self.check_bound(ring, *s, (i, j))?;
            }
        }
        Ok(out)
    }

    fn apply(&self, func: &PointwiseFn, args: &[&Matrix]) -> Result<Matrix, EvalError> {
        let compiled = CompiledFn::new(func)?;
        if args.len() != compiled.params.len() || args.is_empty() {
            return Err(EvalError::Shape {
                op: "apply",
                detail: format!("{} arguments for {} parameters", args.len(), compiled.params.len()),
            });
        }
        let (rows, cols) = (args[0].rows, args[0].cols);
        for (m, &r) in args.iter().zip(&compiled.params) {
            if (m.rows, m.cols) != (rows, cols) {
                return Err(EvalError::Shape {
                    op: "apply",
                    detail: format!("arguments {rows} x {cols} and {} x {}", m.rows, m.cols),
                });
            }
            if m.ring != r {
                return Err(EvalError::Ring { op: "apply", expected: r, found: m.ring });
            }
        }
        let mut data = Vec::with_capacity(rows * cols);
        let mut vals = vec![Scalar::Bool(false); args.len()];
        for idx in 0..rows * cols {
            for (slot, m) in vals.iter_mut().zip(args) {
                *slot = m.data[idx];
            }
            let cell = (idx / cols, idx % cols);
            let s = compiled.body.eval(&vals).map_err(|source| EvalError::Arith { cell: Some(cell), source })?;
            self.check_bound(compiled.out, s, cell)?;
            data.push(s);
        }
        Matrix::new(rows, cols, compiled.out, data)
    }
}

/// Applies a pointwise function to conforming matrices.
pub fn eval_pointwise(func: &PointwiseFn, args: &[Matrix]) -> Result<Matrix, EvalError> {
    let inst = Instance::new();
    let ev = Evaluator::new(&inst, EvalConfig::default());
    let refs: Vec<&Matrix> = args.iter().collect();
    ev.apply(func, &refs)
}

/// Evaluates a scalar expression with the given parameter values.
pub fn eval_scalar(env: &BTreeMap<String, ScalarValue>, se: &ScalarExpr) -> Result<ScalarValue, EvalError> {
    let params: Vec<(String, SemiringId)> = env.iter().map(|(n, v)| (n.clone(), v.ring())).collect();
    let f = PointwiseFn { params, body: se.clone() };
    let compiled = CompiledFn::new(&f)?;
    let vals: Vec<Scalar> = env.values().map(|v| v.scalar()).collect();
    let s = compiled.body.eval(&vals)?;
    Ok(ScalarValue::from_parts_unchecked(compiled.out, s))
}

struct CompiledFn {
    params: Vec<SemiringId>,
    out: SemiringId,
    body: CScalar,
}

/// Scalar expression with parameters resolved to slots and rings attached.
enum CScalar {
    Param(usize),
    Lit(Scalar),
    Add(SemiringId, Box<CScalar>, Box<CScalar>),
    Mul(SemiringId, Box<CScalar>, Box<CScalar>),
    Sub(SemiringId, Box<CScalar>, Box<CScalar>),
    Div(SemiringId, Box<CScalar>, Box<CScalar>),
    Eq(Box<CScalar>, Box<CScalar>),
    Cast(SemiringId, SemiringId, Box<CScalar>),
    Cond(Box<CScalar>, Box<CScalar>, Box<CScalar>, Box<CScalar>),
    Encoded { inner: Box<CompiledFn>, args: Vec<CScalar> },
}

impl CompiledFn {
    fn new(f: &PointwiseFn) -> Result<CompiledFn, EvalError> {
        let out = check_fn(f).map_err(|e| EvalError::Type(e.to_string()))?;
        let (body, _) = compile(&f.params, &f.body)?;
        Ok(CompiledFn { params: f.params.iter().map(|p| p.1).collect(), out, body })
    }
}

fn compile(params: &[(String, SemiringId)], se: &ScalarExpr) -> Result<(CScalar, SemiringId), EvalError> {
    let rec = |e: &ScalarExpr| compile(params, e);
    let bx = Box::new;
    Ok(match se {
        ScalarExpr::Param(n) => {
            let i = params
                .iter()
                .position(|(m, _)| m == n)
                .ok_or_else(|| EvalError::Type(format!("unknown parameter `{n}`")))?;
            (CScalar::Param(i), params[i].1)
        }
        ScalarExpr::Lit(v) => (CScalar::Lit(v.scalar()), v.ring()),
        ScalarExpr::Add(a, b) => {
            let ((a, r), (b, _)) = (rec(a)?, rec(b)?);
            (CScalar::Add(r, bx(a), bx(b)), r)
        }
        ScalarExpr::Mul(a, b) => {
            let ((a, r), (b, _)) = (rec(a)?, rec(b)?);
            (CScalar::Mul(r, bx(a), bx(b)), r)
        }
        ScalarExpr::Sub(a, b) => {
            let ((a, r), (b, _)) = (rec(a)?, rec(b)?);
            (CScalar::Sub(r, bx(a), bx(b)), r)
        }
        ScalarExpr::Div(a, b) => {
            let ((a, r), (b, _)) = (rec(a)?, rec(b)?);
            (CScalar::Div(r, bx(a), bx(b)), r)
        }
        ScalarExpr::Eq(a, b) => {
            let ((a, _), (b, _)) = (rec(a)?, rec(b)?);
            (CScalar::Eq(bx(a), bx(b)), SemiringId::Bool)
        }
        ScalarExpr::Cast(t, a) => {
            let (a, src) = rec(a)?;
            (CScalar::Cast(src, *t, bx(a)), *t)
        }
        ScalarExpr::Cond(w, x, y, z) => {
            let ((w, _), (x, _), (y, r), (z, _)) = (rec(w)?, rec(x)?, rec(y)?, rec(z)?);
            (CScalar::Cond(bx(w), bx(x), bx(y), bx(z)), r)
        }
        ScalarExpr::Encoded { func, args } => {
            let inner = CompiledFn::new(func)?;
            let args = args.iter().map(|a| rec(a).map(|p| p.0)).collect::<Result<Vec<_>, _>>()?;
            (CScalar::Encoded { inner: Box::new(inner), args }, SemiringId::Real)
        }
    })
}

impl CScalar {
    fn eval(&self, vals: &[Scalar]) -> Result<Scalar, ArithError> {
        Ok(match self {
            CScalar::Param(i) => vals[*i],
            CScalar::Lit(s) => *s,
            CScalar::Add(r, a, b) => add_scalar(*r, a.eval(vals)?, b.eval(vals)?)?,
            CScalar::Mul(r, a, b) => mul_scalar(*r, a.eval(vals)?, b.eval(vals)?)?,
            CScalar::Sub(r, a, b) => sub_scalar(*r, a.eval(vals)?, b.eval(vals)?)?,
            CScalar::Div(r, a, b) => div_scalar(*r, a.eval(vals)?, b.eval(vals)?)?,
            CScalar::Eq(a, b) => Scalar::Bool(a.eval(vals)? == b.eval(vals)?),
            CScalar::Cast(src, dst, a) => {
                let v = ScalarValue::from_parts_unchecked(*src, a.eval(vals)?);
                cast_value(*src, *dst, &v)?.scalar()
            }
            CScalar::Cond(w, x, y, z) => {
                if w.eval(vals)? == x.eval(vals)? {
                    y.eval(vals)?
                } else {
                    z.eval(vals)?
                }
            }
            CScalar::Encoded { inner, args } => {
                let mut decoded = Vec::with_capacity(args.len());
                for (a, &r) in args.iter().zip(&inner.params) {
                    let w = ScalarValue::from_parts_unchecked(SemiringId::Real, a.eval(vals)?);
                    decoded.push(dec_value(r, &w).scalar());
                }
                let out = ScalarValue::from_parts_unchecked(inner.out, inner.body.eval(&decoded)?);
                enc_value(inner.out, &out)?.scalar()
            }
        })
    }
}
