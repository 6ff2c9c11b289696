//! Test oracles written independently of the library's arithmetic and
//! evaluator.
#![allow(dead_code)]

use std::collections::HashMap;

use matlang::algos::{oracle_reach, oracle_sssp, oracle_wcc, run_reach, run_sssp, run_wcc, GraphSpec, GOLDEN};
use matlang::eval::{eval, EvalConfig, Evaluator, Instance, Matrix};
use matlang::gen::random_instance;
use matlang::harness::{diff_against, diff_config, DiffOutcome, Pass};
use matlang::ir::{Expr, MatrixType, PointwiseFn, ScalarExpr, Schema, SizeTerm};
use matlang::rewrite::{encode_to_dec, lower_dec_to_sifor, Lowered};
use matlang::semiring::{cast_value, dec_value, enc_value, sr_add, sr_mul, zero, Scalar, ScalarValue, SemiringId};
use rand::Rng;

use SemiringId::*;

pub fn zero_of(r: SemiringId) -> Scalar {
    match r {
        Bool => Scalar::Bool(false),
        Int => Scalar::Int(0),
        Real => Scalar::Real(0.0),
        IntMinPlus | RealMinPlus => Scalar::PosInf,
        IntMaxPlus | RealMaxPlus => Scalar::NegInf,
    }
}

pub fn one_of(r: SemiringId) -> Scalar {
    match r {
        Bool => Scalar::Bool(true),
        Int => Scalar::Int(1),
        Real => Scalar::Real(1.0),
        IntMinPlus | IntMaxPlus => Scalar::Int(0),
        RealMinPlus | RealMaxPlus => Scalar::Real(0.0),
    }
}

fn real(x: f64) -> Result<Scalar, String> {
    if x.is_finite() {
        Ok(Scalar::Real(if x == 0.0 { 0.0 } else { x }))
    } else {
        Err(format!("real overflow {x}"))
    }
}

fn int(x: Option<i64>) -> Result<Scalar, String> {
    x.map(Scalar::Int).ok_or_else(|| "int overflow".to_string())
}

/// Numeric value of a finite payload, for ordering tropical values.
fn num(s: Scalar) -> f64 {
    match s {
        Scalar::Int(i) => i as f64,
        Scalar::Real(x) => x,
        Scalar::PosInf => f64::INFINITY,
        Scalar::NegInf => f64::NEG_INFINITY,
        Scalar::Bool(b) => b as u8 as f64,
    }
}

pub fn add(r: SemiringId, a: Scalar, b: Scalar) -> Result<Scalar, String> {
    Ok(match (r, a, b) {
        (Bool, Scalar::Bool(x), Scalar::Bool(y)) => Scalar::Bool(x | y),
        (Int, Scalar::Int(x), Scalar::Int(y)) => int(x.checked_add(y))?,
        (Real, Scalar::Real(x), Scalar::Real(y)) => real(x + y)?,
        (IntMinPlus | RealMinPlus, _, _) => {
            if num(b) < num(a) {
                b
            } else {
                a
            }
        }
        (IntMaxPlus | RealMaxPlus, _, _) => {
            if num(b) > num(a) {
                b
            } else {
                a
            }
        }
        _ => return Err(format!("bad operands {a:?} {b:?} for {r}")),
    })
}

pub fn mul(r: SemiringId, a: Scalar, b: Scalar) -> Result<Scalar, String> {
    let z = zero_of(r);
    if r.is_min_plus() || r.is_max_plus() {
        if a == z || b == z {
            return Ok(z);
        }
        return match (a, b) {
            (Scalar::Int(x), Scalar::Int(y)) => int(x.checked_add(y)),
            (Scalar::Real(x), Scalar::Real(y)) => real(x + y),
            _ => Err("bad tropical operands".into()),
        };
    }
    Ok(match (a, b) {
        (Scalar::Bool(x), Scalar::Bool(y)) => Scalar::Bool(x & y),
        (Scalar::Int(x), Scalar::Int(y)) => int(x.checked_mul(y))?,
        (Scalar::Real(x), Scalar::Real(y)) => real(x * y)?,
        _ => return Err("bad operands".into()),
    })
}

fn is_bool(r: SemiringId) -> bool {
    r == Bool
}

fn is_int_domain(r: SemiringId) -> bool {
    matches!(r, Int | IntMinPlus | IntMaxPlus)
}

pub fn cast(from: SemiringId, to: SemiringId, x: Scalar) -> Result<Scalar, String> {
    if from == to {
        return Ok(x);
    }
    if x == zero_of(from) {
        return Ok(zero_of(to));
    }
    if is_bool(to) {
        return Ok(Scalar::Bool(true));
    }
    if is_bool(from) {
        return Ok(one_of(to));
    }
    match (is_int_domain(from), is_int_domain(to), x) {
        (true, true, _) | (false, false, _) => Ok(x),
        (true, false, Scalar::Int(i)) => Ok(Scalar::Real(i as f64)),
        (false, true, Scalar::Real(f)) => {
            let fl = f.floor();
            if fl >= -(2f64.powi(63)) && fl < 2f64.powi(63) {
                Ok(Scalar::Int(fl as i64))
            } else {
                Err("cast out of range".into())
            }
        }
        _ => Err(format!("cannot cast {x:?} from {from} to {to}")),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dense {
    pub rows: usize,
    pub cols: usize,
    pub ring: SemiringId,
    pub data: Vec<Scalar>,
}

impl Dense {
    fn at(&self, r: usize, c: usize) -> Scalar {
        self.data[r * self.cols + c]
    }

    pub fn from_matrix(m: &Matrix) -> Dense {
        Dense { rows: m.rows(), cols: m.cols(), ring: m.ring(), data: m.data().to_vec() }
    }

    pub fn to_matrix(&self) -> Matrix {
        Matrix::new(self.rows, self.cols, self.ring, self.data.clone()).expect("valid dense matrix")
    }
}

fn scalar_eval(env: &HashMap<&str, (SemiringId, Scalar)>, s: &ScalarExpr) -> Result<(SemiringId, Scalar), String> {
    let bin = |a: &ScalarExpr, b: &ScalarExpr| -> Result<(SemiringId, Scalar, Scalar), String> {
        let (ra, x) = scalar_eval(env, a)?;
        let (_, y) = scalar_eval(env, b)?;
        Ok((ra, x, y))
    };
    Ok(match s {
        ScalarExpr::Param(n) => *env.get(n.as_str()).ok_or("unknown parameter")?,
        ScalarExpr::Lit(v) => (v.ring(), v.scalar()),
        ScalarExpr::Add(a, b) => {
            let (r, x, y) = bin(a, b)?;
            (r, add(r, x, y)?)
        }
        ScalarExpr::Mul(a, b) => {
            let (r, x, y) = bin(a, b)?;
            (r, mul(r, x, y)?)
        }
        ScalarExpr::Sub(a, b) => {
            let (r, x, y) = bin(a, b)?;
            let v = match (x, y) {
                (Scalar::Int(x), Scalar::Int(y)) => int(x.checked_sub(y))?,
                (Scalar::Real(x), Scalar::Real(y)) => real(x - y)?,
                _ => return Err("bad subtraction".into()),
            };
            (r, v)
        }
        ScalarExpr::Div(a, b) => {
            let (r, x, y) = bin(a, b)?;
            match (x, y) {
                (Scalar::Real(_), Scalar::Real(0.0)) => return Err("division by zero".into()),
                (Scalar::Real(n), Scalar::Real(d)) => (r, real(n / d)?),
                _ => return Err("bad division".into()),
            }
        }
        ScalarExpr::Eq(a, b) => {
            let (_, x, y) = bin(a, b)?;
            (Bool, Scalar::Bool(x == y))
        }
        ScalarExpr::Cast(to, a) => {
            let (from, x) = scalar_eval(env, a)?;
            (*to, cast(from, *to, x)?)
        }
        ScalarExpr::Cond(w, x, y, z) => {
            let (w, x) = (scalar_eval(env, w)?, scalar_eval(env, x)?);
            if w == x {
                scalar_eval(env, y)?
            } else {
                scalar_eval(env, z)?
            }
        }
        ScalarExpr::Encoded { .. } => return Err("encoded functions are not modelled".into()),
    })
}

fn result_ring(f: &PointwiseFn) -> SemiringId {
    fn ring_of(params: &[(String, SemiringId)], s: &ScalarExpr) -> SemiringId {
        match s {
            ScalarExpr::Param(n) => params.iter().find(|(p, _)| p == n).expect("bound parameter").1,
            ScalarExpr::Lit(v) => v.ring(),
            ScalarExpr::Add(a, _) | ScalarExpr::Mul(a, _) | ScalarExpr::Sub(a, _) | ScalarExpr::Div(a, _) => {
                ring_of(params, a)
            }
            ScalarExpr::Eq(..) => Bool,
            ScalarExpr::Cast(r, _) => *r,
            ScalarExpr::Cond(_, _, y, _) => ring_of(params, y),
            ScalarExpr::Encoded { .. } => Real,
        }
    }
    ring_of(&f.params, &f.body)
}

/// Straightforward recursive evaluator over dense matrices.
pub struct Naive {
    env: Vec<(String, Dense)>,
}

impl Naive {
    pub fn new(globals: impl IntoIterator<Item = (String, Matrix)>) -> Self {
        Naive { env: globals.into_iter().map(|(n, m)| (n, Dense::from_matrix(&m))).collect() }
    }

    fn lookup(&self, n: &str) -> Result<Dense, String> {
        self.env.iter().rev().find(|(m, _)| m == n).map(|(_, d)| d.clone()).ok_or(format!("unbound {n}"))
    }

    pub fn eval(&mut self, e: &Expr) -> Result<Dense, String> {
        match e {
            Expr::Var(n) => self.lookup(n),
            Expr::Transpose(a) => {
                let a = self.eval(a)?;
                let mut data = Vec::new();
                for c in 0..a.cols {
                    for r in 0..a.rows {
                        data.push(a.at(r, c));
                    }
                }
                Ok(Dense { rows: a.cols, cols: a.rows, ring: a.ring, data })
            }
            Expr::Ones(a) => {
                let a = self.eval(a)?;
                Ok(Dense { rows: a.rows, cols: 1, ring: a.ring, data: vec![one_of(a.ring); a.rows] })
            }
            Expr::Diag(a) => {
                let a = self.eval(a)?;
                let n = a.rows;
                let mut data = vec![zero_of(a.ring); n * n];
                for i in 0..n {
                    data[i * n + i] = a.data[i];
                }
                Ok(Dense { rows: n, cols: n, ring: a.ring, data })
            }
            Expr::MatMul(a, b) => {
                let (a, b) = (self.eval(a)?, self.eval(b)?);
                if a.cols != b.rows {
                    return Err("inner dimensions".into());
                }
                let mut data = Vec::new();
                for i in 0..a.rows {
                    for j in 0..b.cols {
                        let mut acc = zero_of(a.ring);
                        for k in 0..a.cols {
                            acc = add(a.ring, acc, mul(a.ring, a.at(i, k), b.at(k, j))?)?;
                        }
                        data.push(acc);
                    }
                }
                Ok(Dense { rows: a.rows, cols: b.cols, ring: a.ring, data })
            }
            Expr::Apply { func, args } => {
                let args = args.iter().map(|a| self.eval(a)).collect::<Result<Vec<_>, _>>()?;
                let (rows, cols) = (args[0].rows, args[0].cols);
                let ring = result_ring(func);
                let mut data = Vec::new();
                for i in 0..rows * cols {
                    let env: HashMap<&str, (SemiringId, Scalar)> =
                        func.params.iter().zip(&args).map(|((n, r), a)| (n.as_str(), (*r, a.data[i]))).collect();
                    data.push(scalar_eval(&env, &func.body)?.1);
                }
                Ok(Dense { rows, cols, ring, data })
            }
            Expr::PickAny(a) => {
                let mut a = self.eval(a)?;
                let z = zero_of(a.ring);
                for r in 0..a.rows {
                    let mut seen = false;
                    for c in 0..a.cols {
                        let cell = &mut a.data[r * a.cols + c];
                        if seen {
                            *cell = z;
                        } else if *cell != z {
                            seen = true;
                        }
                    }
                }
                Ok(a)
            }
            Expr::Let { name, bound, body } => {
                let b = self.eval(bound)?;
                self.env.push((name.clone(), b));
                let out = self.eval(body);
                self.env.pop();
                out
            }
            Expr::ForCanonical { v, bindings, inits } => {
                let vv = self.lookup(v)?;
                self.run_loop(Some((v, vv.ring)), vv.rows, bindings, inits)
            }
            Expr::ForCounted { driver, bindings, inits } => {
                let n = self.eval(driver)?.rows;
                self.run_loop(None, n, bindings, inits)
            }
        }
    }

    fn run_loop(
        &mut self,
        v: Option<(&String, SemiringId)>,
        n: usize,
        bindings: &[(String, Expr)],
        inits: &[Expr],
    ) -> Result<Dense, String> {
        let mut state = inits.iter().map(|i| self.eval(i)).collect::<Result<Vec<_>, _>>()?;
        for k in 0..n {
            let mark = self.env.len();
            if let Some((v, ring)) = v {
                let mut data = vec![zero_of(ring); n];
                data[k] = one_of(ring);
                self.env.push((v.clone(), Dense { rows: n, cols: 1, ring, data }));
            }
            for ((name, _), s) in bindings.iter().zip(&state) {
                self.env.push((name.clone(), s.clone()));
            }
            let next = bindings.iter().map(|(_, b)| self.eval(b)).collect::<Result<Vec<_>, _>>();
            self.env.truncate(mark);
            state = next?;
        }
        Ok(state.swap_remove(0))
    }
}

/// A random member of the ring's carrier, including its zero and one.
pub fn sample(rng: &mut impl Rng, r: SemiringId) -> Scalar {
    match rng.gen_range(0..10) {
        0 => return zero_of(r),
        1 => return one_of(r),
        _ => {}
    }
    match r {
        Bool => Scalar::Bool(rng.gen()),
        Int | IntMinPlus | IntMaxPlus => Scalar::Int(rng.gen_range(-1000..=1000)),
        Real | RealMinPlus | RealMaxPlus => Scalar::Real(rng.gen_range(-1000.0..1000.0)),
    }
}

/// Equality for law checks: exact, or 1e-9 relative for the real rings.
pub fn close(r: SemiringId, a: Scalar, b: Scalar) -> bool {
    matlang::harness::scalars_agree(r, a, b)
}

/// Checks the pickAny contract for one input and output.
pub fn check_pick_any(input: &Matrix, output: &Matrix) -> Result<(), String> {
    let z = zero_of(input.ring());
    for r in 0..input.rows() {
        let first = (0..input.cols()).find(|&c| input.scalar(r, c) != z);
        for c in 0..input.cols() {
            let o = output.scalar(r, c);
            let expected = if Some(c) == first { input.scalar(r, c) } else { z };
            if o != expected {
                return Err(format!("row {r} col {c}: {o:?}, expected {expected:?}"));
            }
        }
    }
    Ok(())
}

pub const ALL_RINGS: [SemiringId; 7] = [Bool, Int, Real, IntMinPlus, RealMinPlus, IntMaxPlus, RealMaxPlus];

/// Carrier sample with reals restricted to multiples of 1/8, so sums and
/// products of samples are exact in binary64.
pub fn sample_exact(rng: &mut impl Rng, r: SemiringId) -> Scalar {
    match sample(rng, r) {
        Scalar::Real(_) => Scalar::Real(rng.gen_range(-8000i64..=8000) as f64 / 8.0),
        s => s,
    }
}

fn value(r: SemiringId, s: Scalar) -> ScalarValue {
    ScalarValue::new(r, s).expect("sample in carrier")
}

fn lib_add(r: SemiringId, a: Scalar, b: Scalar) -> Scalar {
    sr_add(&value(r, a), &value(r, b)).expect("add").scalar()
}

fn lib_mul(r: SemiringId, a: Scalar, b: Scalar) -> Scalar {
    sr_mul(&value(r, a), &value(r, b)).expect("mul").scalar()
}

/// Checks the semiring axioms of the library operations on one triple, and
/// that they agree with the oracle operations.
pub fn check_laws_on(r: SemiringId, a: Scalar, b: Scalar, c: Scalar) -> Result<(), String> {
    let (add_, mul_) = (|x, y| lib_add(r, x, y), |x, y| lib_mul(r, x, y));
    let (z, o) = (zero_of(r), one_of(r));
    let laws: [(&str, Scalar, Scalar); 10] = [
        ("add associativity", add_(add_(a, b), c), add_(a, add_(b, c))),
        ("add commutativity", add_(a, b), add_(b, a)),
        ("add identity", add_(a, z), a),
        ("mul associativity", mul_(mul_(a, b), c), mul_(a, mul_(b, c))),
        ("mul commutativity", mul_(a, b), mul_(b, a)),
        ("mul identity", mul_(a, o), a),
        ("zero absorbs", mul_(a, z), z),
        ("left distributivity", mul_(a, add_(b, c)), add_(mul_(a, b), mul_(a, c))),
        ("right distributivity", mul_(add_(a, b), c), add_(mul_(a, c), mul_(b, c))),
        ("oracle agreement", add_(a, b), add(r, a, b)?),
    ];
    for (law, lhs, rhs) in laws {
        if lhs != rhs {
            return Err(format!("{r}: {law} fails on ({a:?}, {b:?}, {c:?}): {lhs:?} vs {rhs:?}"));
        }
    }
    if mul_(a, b) != mul(r, a, b)? {
        return Err(format!("{r}: product of {a:?} and {b:?} disagrees with oracle"));
    }
    Ok(())
}

/// Law checks for one ring: exhaustive for bool, `trials` random triples otherwise.
/// Returns the number of triples checked.
pub fn check_ring_laws(r: SemiringId, rng: &mut impl Rng, trials: usize) -> Result<usize, String> {
    if r == Bool {
        let bs = [Scalar::Bool(false), Scalar::Bool(true)];
        for a in bs {
            for b in bs {
                for c in bs {
                    check_laws_on(r, a, b, c)?;
                }
            }
        }
        return Ok(8);
    }
    for _ in 0..trials {
        let (a, b, c) = (sample_exact(rng, r), sample_exact(rng, r), sample_exact(rng, r));
        check_laws_on(r, a, b, c)?;
    }
    Ok(trials)
}

/// Identity and zero preservation of casts for all 49 ring pairs, plus
/// agreement with the oracle cast on random samples.
pub fn check_casts(rng: &mut impl Rng, samples: usize) -> Result<usize, String> {
    let mut pairs = 0;
    for from in ALL_RINGS {
        for to in ALL_RINGS {
            let z = cast_value(from, to, &zero(from)).map_err(|e| e.to_string())?;
            if z != zero(to) {
                return Err(format!("cast {from} -> {to} maps zero to {z}"));
            }
            for _ in 0..samples {
                let x = sample_exact(rng, from);
                let lib = cast_value(from, to, &value(from, x)).map_err(|e| e.to_string())?;
                if from == to && lib.scalar() != x {
                    return Err(format!("cast {from} -> {from} changes {x:?}"));
                }
                let want = cast(from, to, x)?;
                if lib.scalar() != want || lib.ring() != to {
                    return Err(format!("cast {from} -> {to} of {x:?}: {lib} vs oracle {want:?}"));
                }
            }
            pairs += 1;
        }
    }
    Ok(pairs)
}

/// `dec ∘ enc` is the identity, `enc` maps zero to 0.0, and `enc` is injective on samples.
pub fn check_enc_dec(rng: &mut impl Rng, samples: usize) -> Result<(), String> {
    for r in ALL_RINGS {
        let ez = enc_value(r, &zero(r)).map_err(|e| e.to_string())?;
        if ez.scalar() != Scalar::Real(0.0) {
            return Err(format!("enc of zero in {r} is {ez}"));
        }
        let mut seen: Vec<(Scalar, Scalar)> = Vec::new();
        for _ in 0..samples {
            let x = value(r, sample_exact(rng, r));
            let w = enc_value(r, &x).map_err(|e| e.to_string())?;
            if w.ring() != Real {
                return Err(format!("enc lands in {}", w.ring()));
            }
            let back = dec_value(r, &w);
            if back != x {
                return Err(format!("{r}: dec(enc({x})) = {back}"));
            }
            if let Some((prev, _)) = seen.iter().find(|(p, e)| *e == w.scalar() && *p != x.scalar()) {
                return Err(format!("{r}: enc collides on {prev:?} and {:?}", x.scalar()));
            }
            seen.push((x.scalar(), w.scalar()));
        }
    }
    Ok(())
}

/// Random nonnegative matrix with about a third of its entries zero.
pub fn random_nonneg(rng: &mut impl Rng, rows: usize, cols: usize, r: SemiringId) -> Matrix {
    let data = (0..rows * cols)
        .map(|_| {
            if rng.gen_bool(0.35) {
                return zero_of(r);
            }
            match r {
                Bool => Scalar::Bool(true),
                Int | IntMinPlus | IntMaxPlus => Scalar::Int(rng.gen_range(0..=9)),
                _ => Scalar::Real(rng.gen_range(0..=18) as f64 / 2.0),
            }
        })
        .collect();
    Matrix::new(rows, cols, r, data).expect("carrier values")
}

/// pickAny contract, idempotence, and agreement of the loop simulation on
/// `count` random nonnegative matrices up to 8×8.
pub fn check_pick_any_suite(rng: &mut impl Rng, count: usize) -> Result<usize, String> {
    let rings = [Bool, Int, IntMinPlus];
    let mut checked = 0;
    for i in 0..count {
        let r = rings[i % rings.len()];
        let (rows, cols) = (rng.gen_range(1..=8), rng.gen_range(1..=8));
        let a = random_nonneg(rng, rows, cols, r);
        let schema = Schema::new().with("A", MatrixType::new(SizeTerm::sym("n"), SizeTerm::sym("m"), r));
        let inst = Instance::new().with_matrix("A", a.clone());
        let p = eval(&inst, &Expr::var("A").pick_any()).map_err(|e| e.to_string())?;
        check_pick_any(&a, &p)?;
        for row in 0..rows {
            let nonzero = (0..cols).filter(|&c| !p.is_zero_at(row, c)).count();
            if nonzero > 1 {
                return Err(format!("row {row} keeps {nonzero} entries"));
            }
        }
        let twice = eval(&inst, &Expr::var("A").pick_any().pick_any()).map_err(|e| e.to_string())?;
        if twice != p {
            return Err("pickany is not idempotent".into());
        }
        let low = lower_dec_to_sifor(&Expr::var("A").pick_any(), &schema).map_err(|e| e.to_string())?;
        let sim = low.eval(&inst, EvalConfig::default()).map_err(|e| e.to_string())?;
        if sim != p {
            return Err(format!("simulation differs on {r} matrix {a}: {sim} vs {p}"));
        }
        checked += 1;
    }
    Ok(checked)
}

fn density(rng: &mut impl Rng) -> f64 {
    [0.02, 0.05, 0.1, 0.2, 0.4][rng.gen_range(0..5)]
}

/// WCC program against union-find on `count` random undirected graphs, n ≤ `max_n`.
pub fn check_wcc_suite(rng: &mut impl Rng, count: usize, max_n: usize) -> Result<(), String> {
    for i in 0..count {
        let (n, d) = (rng.gen_range(1..=max_n), density(rng));
        let g = GraphSpec::random_undirected(rng, n, d);
        let got = run_wcc(&g).map_err(|e| format!("graph {i}: {e}"))?;
        if got != oracle_wcc(&g) {
            return Err(format!("graph {i} ({g:?}): {got:?} vs {:?}", oracle_wcc(&g)));
        }
    }
    Ok(())
}

/// Reachability program against BFS on `count` random digraphs.
pub fn check_reach_suite(rng: &mut impl Rng, count: usize, max_n: usize) -> Result<(), String> {
    for i in 0..count {
        let (n, d) = (rng.gen_range(1..=max_n), density(rng));
        let g = GraphSpec::random_directed(rng, n, d, None);
        let s = rng.gen_range(1..=n);
        let got = run_reach(&g, s).map_err(|e| format!("graph {i}: {e}"))?;
        if got != oracle_reach(&g, s) {
            return Err(format!("graph {i} from {s} ({g:?}): {got:?} vs {:?}", oracle_reach(&g, s)));
        }
    }
    Ok(())
}

/// Shortest-path program against Bellman-Ford on `count` random weighted digraphs.
pub fn check_sssp_suite(rng: &mut impl Rng, count: usize, max_n: usize) -> Result<(), String> {
    for i in 0..count {
        let (n, d) = (rng.gen_range(1..=max_n), density(rng));
        let g = GraphSpec::random_directed(rng, n, d, Some(0..=9));
        let s = rng.gen_range(1..=n);
        let got = run_sssp(&g, s).map_err(|e| format!("graph {i}: {e}"))?;
        if got != oracle_sssp(&g, s) {
            return Err(format!("graph {i} from {s} ({g:?}): {got:?} vs {:?}", oracle_sssp(&g, s)));
        }
    }
    Ok(())
}

/// Runs every golden program through `pass` on `per_program` random
/// instances with dims ≤ 6 and compares with direct evaluation. Also runs
/// the always-encoding route (encode, then expand to canonical loops)
/// for counted-loop programs.
/// Returns the number of compared evaluations per program the pass accepts.
pub fn check_golden_pipeline(
    pass: Pass,
    rng: &mut impl Rng,
    per_program: usize,
) -> Result<Vec<(&'static str, usize)>, String> {
    let cfg = diff_config();
    let mut counts = Vec::new();
    for g in GOLDEN {
        let mut compared = 0;
        let (s, e) = g.parse();
        if !pass.applies_to(&e, &s) {
            continue;
        }
        let lowered = pass.run(&e, &s).map_err(|err| format!("{}: {err}", g.name))?;
        let mut routes = vec![lowered];
        if Pass::EncodeToDec.applies_to(&e, &s) {
            let encoded = encode_to_dec(&e, &s)
                .and_then(|l| {
                    let sifor = lower_dec_to_sifor(&l.expr, &l.schema)?;
                    Ok(Lowered { encoded_result: l.encoded_result, ..sifor })
                })
                .map_err(|err| format!("{} (encoded): {err}", g.name))?;
            routes.push(encoded);
        }
        for _ in 0..per_program {
            let inst = random_instance(rng, &s, 6, 0.3);
            let expected = Evaluator::new(&inst, cfg.clone()).eval(&e);
            for l in &routes {
                match diff_against(&expected, l, &inst, &cfg) {
                    DiffOutcome::Equal => compared += 1,
                    DiffOutcome::Skipped(_) => {}
                    bad => return Err(format!("{} via {pass}: {bad}", g.name)),
                }
            }
        }
        counts.push((g.name, compared));
    }
    Ok(counts)
}
