//! Seeded random generation of well-typed programs and conforming
//! instances. Programs are built top-down from a requested type, so every
//! output type-checks by construction.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::eval::{Instance, Matrix};
use crate::ir::{Dialect, Expr, MatrixType, PointwiseFn, ScalarExpr, Schema, SizeTerm};
use crate::semiring::{one, zero, Scalar, ScalarValue, SemiringId};

#[derive(Debug, Clone, PartialEq)]
pub struct GenConfig {
    /// Dialect the programs must belong to.
    pub dialect: Dialect,
    /// Largest value assigned to a size symbol.
    pub max_dim: usize,
    pub max_depth: u32,
    pub max_loop_nesting: u32,
    /// Matrix products per program, not counting rank-one constants.
    pub max_matmuls: u32,
    /// Share of instance entries set to the ring's zero.
    pub zero_density: f64,
}

impl GenConfig {
    pub fn new(dialect: Dialect, max_dim: usize) -> Self {
        GenConfig { dialect, max_dim, max_depth: 5, max_loop_nesting: 2, max_matmuls: 4, zero_density: 0.3 }
    }
}

/// A generated program with an instance to run it on.
#[derive(Debug, Clone, PartialEq)]
pub struct FuzzCase {
    pub seed: u64,
    pub index: u64,
    pub schema: Schema,
    pub expr: Expr,
    pub instance: Instance,
}

/// The RNG for case `index` of a run seeded with `seed`. Cases are
/// independent, so they can be generated in any order.
pub fn case_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn generate_case(seed: u64, index: u64, cfg: &GenConfig) -> FuzzCase {
    let mut rng = case_rng(seed, index);
    let (schema, expr) = generate_program(&mut rng, cfg);
    let instance = random_instance(&mut rng, &schema, cfg.max_dim, cfg.zero_density);
    FuzzCase { seed, index, schema, expr, instance }
}

/// A random schema and a program over it.
pub fn generate_program(rng: &mut impl Rng, cfg: &GenConfig) -> (Schema, Expr) {
    let single = cfg.dialect.is_single_ring().then(|| *SemiringId::ALL.choose(rng).expect("rings"));
    let mut g = Gen {
        rng,
        cfg,
        single,
        syms: Vec::new(),
        env: Vec::new(),
        counter: 0,
        matmuls_left: cfg.max_matmuls,
        loop_depth: 0,
    };
    let schema = g.schema();
    let ty = g.random_type();
    let depth = g.rng.gen_range(1..=cfg.max_depth);
    let e = g.expr(&ty, depth);
    (schema, e)
}

/// Sizes drawn from `1..=max_dim` and matrices with small entries.
pub fn random_instance(rng: &mut impl Rng, schema: &Schema, max_dim: usize, zero_density: f64) -> Instance {
    let mut inst = Instance::new();
    for s in schema.size_symbols() {
        let n = rng.gen_range(1..=max_dim.max(1));
        inst = inst.with_size(&s, n);
    }
    for (name, ty) in schema.iter() {
        let rows = inst.size_of(&ty.rows).expect("symbol sized");
        let cols = inst.size_of(&ty.cols).expect("symbol sized");
        let data =
            (0..rows * cols)
                .map(|_| {
                    if rng.gen_bool(zero_density) {
                        zero(ty.ring).scalar()
                    } else {
                        random_value(rng, ty.ring).scalar()
                    }
                })
                .collect();
        inst = inst.with_matrix(name, Matrix::new(rows, cols, ty.ring, data).expect("conforming matrix"));
    }
    inst
}

/// A small value of the ring's carrier: integers in -3..=3, reals in
/// multiples of 1/2, and the ring's zero now and then.
pub fn random_value(rng: &mut impl Rng, r: SemiringId) -> ScalarValue {
    use SemiringId::*;
    if rng.gen_bool(0.1) {
        return zero(r);
    }
    let s = match r {
        Bool => Scalar::Bool(rng.gen()),
        Int | IntMinPlus | IntMaxPlus => Scalar::Int(rng.gen_range(-3..=3)),
        Real | RealMinPlus | RealMaxPlus => Scalar::Real(f64::from(rng.gen_range(-6..=6i32)) / 2.0),
    };
    ScalarValue::new(r, s).expect("finite value in carrier")
}

struct Gen<'a, R: Rng> {
    rng: &'a mut R,
    cfg: &'a GenConfig,
    single: Option<SemiringId>,
    syms: Vec<String>,
    env: Vec<(String, MatrixType)>,
    counter: usize,
    matmuls_left: u32,
    loop_depth: u32,
}

const SYMS: [&str; 2] = ["n", "m"];

impl<R: Rng> Gen<'_, R> {
    fn fresh(&mut self, hint: &str) -> String {
        self.counter += 1;
        format!("{hint}{}", self.counter)
    }

    fn ring(&mut self) -> SemiringId {
        match self.single {
            Some(r) => r,
            None => *SemiringId::ALL.choose(self.rng).expect("rings"),
        }
    }

    fn dim(&mut self) -> SizeTerm {
        if self.rng.gen_bool(0.2) {
            SizeTerm::One
        } else {
            SizeTerm::Sym(self.syms.choose(self.rng).expect("symbols").clone())
        }
    }

    fn random_type(&mut self) -> MatrixType {
        let (rows, cols, ring) = (self.dim(), self.dim(), self.ring());
        MatrixType::new(rows, cols, ring)
    }

    fn schema(&mut self) -> Schema {
        let nsyms = self.rng.gen_range(1..=SYMS.len());
        self.syms = SYMS[..nsyms].iter().map(|s| s.to_string()).collect();
        let mut s = Schema::new();
        let names = ["A", "B", "C", "D"];
        let count = self.rng.gen_range(nsyms.max(2)..=names.len());
        for (i, name) in names[..count].iter().enumerate() {
            let mut ty = self.random_type();
            // every symbol is the row count of some variable
            if i < nsyms {
                ty.rows = SizeTerm::Sym(self.syms[i].clone());
            }
            s.insert(name, ty.clone());
            self.env.push((name.to_string(), ty));
        }
        s
    }

    fn expr(&mut self, ty: &MatrixType, depth: u32) -> Expr {
        if depth == 0 {
            return self.leaf(ty);
        }
        let d = self.cfg.dialect;
        let dec = matches!(d, Dialect::DecMl | Dialect::MuseMl | Dialect::Core);
        let canonical = matches!(d, Dialect::ForMl | Dialect::SiforMl);
        let can_loop = self.loop_depth < self.cfg.max_loop_nesting;
        let mut choices: Vec<(u32, u8)> = vec![(3, 0), (1, 1), (3, 5), (1, 7)];
        if ty.cols == SizeTerm::One {
            choices.push((1, 2));
        }
        if ty.rows == ty.cols {
            choices.push((1, 3));
        }
        if self.matmuls_left > 0 {
            choices.push((2, 4));
        }
        if dec {
            choices.push((1, 6));
        }
        if dec && can_loop {
            choices.push((2, 8));
        }
        if canonical && can_loop {
            choices.push((2, 9));
        }
        let pick = choices.choose_weighted(self.rng, |c| c.0).expect("nonempty").1;
        match pick {
            0 => self.leaf(ty),
            1 => self.expr(&transposed(ty), depth - 1).t(),
            2 => {
                let src = MatrixType::new(ty.rows.clone(), self.dim(), ty.ring);
                self.expr(&src, depth - 1).ones()
            }
            3 => {
                let v = MatrixType::new(ty.rows.clone(), SizeTerm::One, ty.ring);
                self.expr(&v, depth - 1).diag()
            }
            4 => {
                self.matmuls_left -= 1;
                let k = self.dim();
                let a = self.expr(&MatrixType::new(ty.rows.clone(), k.clone(), ty.ring), depth - 1);
                let b = self.expr(&MatrixType::new(k, ty.cols.clone(), ty.ring), depth - 1);
                a.matmul(b)
            }
            5 => self.apply(ty, depth),
            6 => self.expr(ty, depth - 1).pick_any(),
            7 => {
                let name = self.fresh("t");
                let bty = self.random_type();
                let bound = self.expr(&bty, depth - 1);
                self.env.push((name.clone(), bty));
                let body = self.expr(ty, depth - 1);
                self.env.pop();
                Expr::let_in(&name, bound, body)
            }
            8 => self.counted_loop(ty, depth),
            _ => self.canonical_loop(ty, depth),
        }
    }

    fn binding_types(&mut self, ty: &MatrixType, max: usize) -> Vec<MatrixType> {
        let count = if max > 1 && self.rng.gen_bool(0.4) { self.rng.gen_range(2..=max) } else { 1 };
        let mut tys = vec![ty.clone()];
        for _ in 1..count {
            let t = self.random_type();
            tys.push(t);
        }
        tys
    }

    fn loop_parts(&mut self, tys: &[MatrixType], depth: u32) -> (Vec<(String, Expr)>, Vec<Expr>) {
        let inits: Vec<Expr> = tys.iter().map(|t| self.expr(t, depth - 1)).collect();
        let names: Vec<String> = tys.iter().map(|_| self.fresh("X")).collect();
        let mark = self.env.len();
        for (n, t) in names.iter().zip(tys) {
            self.env.push((n.clone(), t.clone()));
        }
        self.loop_depth += 1;
        let bodies: Vec<(String, Expr)> =
            names.iter().zip(tys).map(|(n, t)| (n.clone(), self.expr(t, depth - 1))).collect();
        self.loop_depth -= 1;
        self.env.truncate(mark);
        (bodies, inits)
    }

    fn counted_loop(&mut self, ty: &MatrixType, depth: u32) -> Expr {
        let dty = MatrixType::new(self.dim(), SizeTerm::One, self.ring());
        let driver = self.expr(&dty, depth - 1);
        let tys = self.binding_types(ty, 3);
        let (bindings, inits) = self.loop_parts(&tys, depth);
        Expr::ForCounted { driver: Box::new(driver), bindings, inits }
    }

    fn canonical_loop(&mut self, ty: &MatrixType, depth: u32) -> Expr {
        let v = self.fresh("v");
        let vty = MatrixType::new(self.dim(), SizeTerm::One, self.ring());
        let bound = self.expr(&vty, depth - 1);
        let max = if self.cfg.dialect == Dialect::ForMl { 1 } else { 3 };
        let tys = self.binding_types(ty, max);
        self.env.push((v.clone(), vty));
        let (bindings, inits) = self.loop_parts(&tys, depth);
        self.env.pop();
        Expr::let_in(&v, bound, Expr::ForCanonical { v: v.clone(), bindings, inits })
    }

    fn apply(&mut self, ty: &MatrixType, depth: u32) -> Expr {
        let arity = if self.rng.gen_bool(0.4) { 2 } else { 1 };
        let params: Vec<(String, SemiringId)> = (0..arity)
            .map(|i| {
                let r = if self.rng.gen_bool(0.5) { ty.ring } else { self.ring() };
                (["a", "b"][i].to_string(), r)
            })
            .collect();
        let args: Vec<Expr> = params
            .iter()
            .map(|(_, r)| self.expr(&MatrixType::new(ty.rows.clone(), ty.cols.clone(), *r), depth - 1))
            .collect();
        let body = self.scalar(ty.ring, &params, 2);
        Expr::Apply { func: PointwiseFn { params, body }, args }
    }

    fn leaf(&mut self, ty: &MatrixType) -> Expr {
        let same_dims = |t: &MatrixType| t.rows == ty.rows && t.cols == ty.cols;
        let exact: Vec<&String> = self.env.iter().filter(|(_, t)| t == ty).map(|(n, _)| n).collect();
        if let Some(n) = exact.choose(self.rng) {
            return Expr::var(n);
        }
        let flipped = transposed(ty);
        let flips: Vec<&String> = self.env.iter().filter(|(_, t)| *t == flipped).map(|(n, _)| n).collect();
        if let Some(n) = flips.choose(self.rng) {
            return Expr::var(n).t();
        }
        if self.single.is_none() {
            let other: Vec<(String, SemiringId)> =
                self.env.iter().filter(|(_, t)| same_dims(t)).map(|(n, t)| (n.clone(), t.ring)).collect();
            if let Some((n, r)) = other.choose(self.rng) {
                let f = PointwiseFn::new(vec![("a", *r)], ScalarExpr::param("a").cast(ty.ring));
                return Expr::apply(f, vec![Expr::var(n)]);
            }
        }
        self.constant(ty)
    }

    /// `dim x 1` vector of the ring's one, built from a variable with that extent.
    fn unit_vector(&mut self, dim: &SizeTerm, ring: SemiringId) -> Expr {
        let anchor = match dim {
            SizeTerm::One => {
                let (n, _) = self.env.choose(self.rng).expect("schema is nonempty").clone();
                Expr::var(&n).ones().t().ones()
            }
            SizeTerm::Sym(s) => {
                let hits: Vec<Expr> = self
                    .env
                    .iter()
                    .flat_map(|(n, t)| {
                        let by_rows = (t.rows == SizeTerm::Sym(s.clone())).then(|| Expr::var(n).ones());
                        let by_cols = (t.cols == SizeTerm::Sym(s.clone())).then(|| Expr::var(n).t().ones());
                        by_rows.into_iter().chain(by_cols)
                    })
                    .collect();
                hits.choose(self.rng).expect("every symbol has an anchor").clone()
            }
        };
        let anchor_ring = self.ring_of_anchor(&anchor);
        if anchor_ring == ring {
            anchor
        } else {
            Expr::apply(PointwiseFn::constant(anchor_ring, one(ring)), vec![anchor])
        }
    }

    fn ring_of_anchor(&self, e: &Expr) -> SemiringId {
        let mut cur = e;
        loop {
            match cur {
                Expr::Var(n) => return self.env.iter().rev().find(|(m, _)| m == n).expect("bound").1.ring,
                Expr::Ones(a) | Expr::Transpose(a) => cur = a,
                _ => unreachable!("anchors are built from ones and transposes"),
            }
        }
    }

    fn constant(&mut self, ty: &MatrixType) -> Expr {
        let r = ty.ring;
        let rows = self.unit_vector(&ty.rows, r);
        let shape = if ty.cols == SizeTerm::One { rows } else { rows.matmul(self.unit_vector(&ty.cols, r).t()) };
        let c = self.literal(r);
        if c == one(r) {
            shape
        } else {
            Expr::apply(PointwiseFn::constant(r, c), vec![shape])
        }
    }

    fn literal(&mut self, r: SemiringId) -> ScalarValue {
        random_value(self.rng, r)
    }

    fn scalar(&mut self, r: SemiringId, params: &[(String, SemiringId)], depth: u32) -> ScalarExpr {
        let multi = self.single.is_none();
        let own: Vec<&String> = params.iter().filter(|(_, pr)| *pr == r).map(|(n, _)| n).collect();
        let foreign: Vec<&String> = params.iter().filter(|(_, pr)| *pr != r).map(|(n, _)| n).collect();
        let mut choices: Vec<(u32, u8)> = vec![(1, 0)];
        if !own.is_empty() {
            choices.push((4, 1));
        }
        if multi && !foreign.is_empty() {
            choices.push((3, 2));
        }
        if depth > 0 {
            choices.extend([(2, 3), (2, 4), (1, 8)]);
            if matches!(r, SemiringId::Int | SemiringId::Real) {
                choices.push((1, 5));
            }
            if r == SemiringId::Real {
                choices.push((1, 6));
            }
            if r == SemiringId::Bool {
                choices.push((1, 7));
            }
        }
        let pick = choices.choose_weighted(self.rng, |c| c.0).expect("nonempty").1;
        match pick {
            0 => ScalarExpr::Lit(self.literal(r)),
            1 => ScalarExpr::param(own.choose(self.rng).expect("nonempty")),
            2 => ScalarExpr::param(foreign.choose(self.rng).expect("nonempty")).cast(r),
            3 => self.scalar(r, params, depth - 1).add(self.scalar(r, params, depth - 1)),
            4 => self.scalar(r, params, depth - 1).mul(self.scalar(r, params, depth - 1)),
            5 => self.scalar(r, params, depth - 1).sub(self.scalar(r, params, depth - 1)),
            6 => {
                let k = [1.0, 2.0, -2.0, 0.5][self.rng.gen_range(0..4)];
                self.scalar(r, params, depth - 1).div(ScalarExpr::lit(ScalarValue::real(k)))
            }
            7 => {
                let s = self.operand_ring(params);
                self.scalar(s, params, depth - 1).eq(self.scalar(s, params, depth - 1))
            }
            _ => {
                let s = self.operand_ring(params);
                let (w, x) = (self.scalar(s, params, depth - 1), self.scalar(s, params, depth - 1));
                ScalarExpr::cond(w, x, self.scalar(r, params, depth - 1), self.scalar(r, params, depth - 1))
            }
        }
    }

    /// Ring for the operands of `==` and `cond` tests.
    fn operand_ring(&mut self, params: &[(String, SemiringId)]) -> SemiringId {
        match self.single {
            Some(r) => r,
            None => params.choose(self.rng).map(|p| p.1).expect("functions have parameters"),
        }
    }
}

fn transposed(t: &MatrixType) -> MatrixType {
    MatrixType::new(t.cols.clone(), t.rows.clone(), t.ring)
}
