//! Graph algorithms written as programs, the graphs they run on, and plain
//! reference implementations to check them against.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::Rng;

use crate::eval::{eval, EvalError, Instance, Matrix};
use crate::ir::{Dialect, Expr, Schema};
use crate::semiring::{one, zero, Scalar, SemiringId};
use crate::textio::parse_program;

/// A shipped program: file name, source text, and the dialect named in its
/// header comment.
#[derive(Debug, Clone, Copy)]
pub struct Golden {
    pub name: &'static str,
    pub source: &'static str,
}

impl Golden {
    /// The dialect recorded in the `// dialect:` header line.
    pub fn declared_dialect(&self) -> Option<Dialect> {
        self.source.lines().find_map(|l| l.trim().strip_prefix("// dialect:")).and_then(|d| d.trim().parse().ok())
    }

    pub fn parse(&self) -> (Schema, Expr) {
        let (s, e, _) = parse_program(self.source).unwrap_or_else(|err| panic!("{}: {err}", self.name));
        (s, e)
    }
}

macro_rules! golden {
    ($name:literal) => {
        Golden { name: $name, source: include_str!(concat!("../programs/", $name, ".ml")) }
    };
}

pub const WCC: Golden = golden!("wcc");
pub const REACH: Golden = golden!("reach");
pub const REACH_LITERAL: Golden = golden!("reach_literal");
pub const SSSP: Golden = golden!("sssp");
pub const VEC_SUM: Golden = golden!("vec_sum");
pub const VEC_MAX: Golden = golden!("vec_max");
pub const RECUR: Golden = golden!("recur");
pub const RECUR_COUNTED: Golden = golden!("recur_counted");

pub const GOLDEN: [Golden; 8] = [WCC, REACH, REACH_LITERAL, SSSP, VEC_SUM, VEC_MAX, RECUR, RECUR_COUNTED];

pub fn golden(name: &str) -> Option<Golden> {
    GOLDEN.iter().copied().find(|g| g.name == name)
}

pub fn wcc_program() -> (Schema, Expr) {
    WCC.parse()
}

pub fn reach_program() -> (Schema, Expr) {
    REACH.parse()
}

pub fn sssp_program() -> (Schema, Expr) {
    SSSP.parse()
}

pub fn vec_sum_program() -> (Schema, Expr) {
    VEC_SUM.parse()
}

pub fn vec_max_program() -> (Schema, Expr) {
    VEC_MAX.parse()
}

/// Vertices are numbered from 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphSpec {
    pub n: usize,
    pub edges: Vec<(usize, usize, Option<i64>)>,
    pub directed: bool,
}

impl GraphSpec {
    pub fn new(n: usize, directed: bool) -> Self {
        GraphSpec { n, edges: Vec::new(), directed }
    }

    pub fn edge(mut self, u: usize, v: usize) -> Self {
        self.add_edge(u, v, None);
        self
    }

    pub fn weighted_edge(mut self, u: usize, v: usize, w: i64) -> Self {
        self.add_edge(u, v, Some(w));
        self
    }

    pub fn add_edge(&mut self, u: usize, v: usize, w: Option<i64>) {
        assert!((1..=self.n).contains(&u) && (1..=self.n).contains(&v), "edge ({u}, {v}) outside 1..={}", self.n);
        self.edges.push((u, v, w));
    }

    /// Edges in both directions when the graph is undirected.
    fn arcs(&self) -> impl Iterator<Item = (usize, usize, Option<i64>)> + '_ {
        self.edges.iter().flat_map(move |&(u, v, w)| {
            let back = (!self.directed && u != v).then_some((v, u, w));
            std::iter::once((u, v, w)).chain(back)
        })
    }

    /// Reads an adjacency matrix: every entry other than the ring's zero is
    /// an arc, weighted by its value when the value is an integer.
    pub fn from_adjacency(m: &Matrix) -> Result<GraphSpec, String> {
        if m.rows() != m.cols() {
            return Err(format!("adjacency matrix must be square, got {} x {}", m.rows(), m.cols()));
        }
        let mut g = GraphSpec::new(m.rows(), true);
        for u in 0..m.rows() {
            for v in 0..m.cols() {
                if m.is_zero_at(u, v) {
                    continue;
                }
                let w = match m.scalar(u, v) {
                    Scalar::Int(w) => Some(w),
                    _ => None,
                };
                g.add_edge(u + 1, v + 1, w);
            }
        }
        Ok(g)
    }

    /// The same edges, ignoring direction.
    pub fn undirected(&self) -> GraphSpec {
        GraphSpec { directed: false, ..self.clone() }
    }

    pub fn adjacency_bool(&self) -> Matrix {
        let mut data = vec![Scalar::Bool(false); self.n * self.n];
        for (u, v, _) in self.arcs() {
            data[(u - 1) * self.n + (v - 1)] = Scalar::Bool(true);
        }
        Matrix::new(self.n, self.n, SemiringId::Bool, data).expect("square matrix")
    }

    /// Weights in the min-plus ring; parallel arcs keep the cheapest.
    pub fn adjacency_min_plus(&self) -> Matrix {
        let mut data = vec![Scalar::PosInf; self.n * self.n];
        for (u, v, w) in self.arcs() {
            let w = w.expect("weighted graph");
            let cell = &mut data[(u - 1) * self.n + (v - 1)];
            if matches!(*cell, Scalar::Int(c) if c <= w) {
                continue;
            }
            *cell = Scalar::Int(w);
        }
        Matrix::new(self.n, self.n, SemiringId::IntMinPlus, data).expect("square matrix")
    }

    pub fn random_undirected(rng: &mut impl Rng, n: usize, density: f64) -> GraphSpec {
        let mut g = GraphSpec::new(n, false);
        for u in 1..=n {
            for v in u + 1..=n {
                if rng.gen_bool(density) {
                    g.add_edge(u, v, None);
                }
            }
        }
        g
    }

    /// Digraph without self-loops, optionally with weights drawn from `weights`.
    pub fn random_directed(
        rng: &mut impl Rng,
        n: usize,
        density: f64,
        weights: Option<std::ops::RangeInclusive<i64>>,
    ) -> GraphSpec {
        let mut g = GraphSpec::new(n, true);
        for u in 1..=n {
            for v in 1..=n {
                if u != v && rng.gen_bool(density) {
                    let w = weights.clone().map(|r| rng.gen_range(r));
                    g.add_edge(u, v, w);
                }
            }
        }
        g
    }
}

/// Column vector that is `one` at `s` and `zero` elsewhere.
pub fn source_vector(n: usize, s: usize, ring: SemiringId) -> Matrix {
    let mut data = vec![zero(ring).scalar(); n];
    data[s - 1] = one(ring).scalar();
    Matrix::new(n, 1, ring, data).expect("vector")
}

fn run(golden: Golden, mats: Vec<(&str, Matrix)>) -> Result<Matrix, EvalError> {
    let (schema, e) = golden.parse();
    let mut inst = mats.into_iter().fold(Instance::new(), |i, (n, m)| i.with_matrix(n, m));
    inst.infer_sizes(&schema)?;
    inst.check_conforms(&schema)?;
    eval(&inst, &e)
}

/// Component labels: vertex to the representative its row selects.
pub fn decode_wcc(x: &Matrix) -> BTreeMap<usize, usize> {
    (0..x.rows()).filter_map(|u| (0..x.cols()).find(|&v| !x.is_zero_at(u, v)).map(|v| (u + 1, v + 1))).collect()
}

pub fn decode_reach(r: &Matrix) -> BTreeSet<usize> {
    (0..r.rows()).filter(|&u| !r.is_zero_at(u, 0)).map(|u| u + 1).collect()
}

/// Distances, `None` for unreachable vertices.
pub fn decode_sssp(r: &Matrix) -> BTreeMap<usize, Option<i64>> {
    (0..r.rows())
        .map(|u| {
            let d = match r.scalar(u, 0) {
                Scalar::Int(d) => Some(d),
                _ => None,
            };
            (u + 1, d)
        })
        .collect()
}

pub fn run_wcc(g: &GraphSpec) -> Result<BTreeMap<usize, usize>, EvalError> {
    Ok(decode_wcc(&run(WCC, vec![("A", g.undirected().adjacency_bool())])?))
}

pub fn run_reach(g: &GraphSpec, s: usize) -> Result<BTreeSet<usize>, EvalError> {
    let src = source_vector(g.n, s, SemiringId::Bool);
    Ok(decode_reach(&run(REACH, vec![("A", g.adjacency_bool()), ("S", src)])?))
}

pub fn run_sssp(g: &GraphSpec, s: usize) -> Result<BTreeMap<usize, Option<i64>>, EvalError> {
    let src = source_vector(g.n, s, SemiringId::IntMinPlus);
    Ok(decode_sssp(&run(SSSP, vec![("A", g.adjacency_min_plus()), ("S", src)])?))
}

/// The program's 1x1 max-plus result: `None` stands for -inf.
pub fn run_vec_max(v: &[i64]) -> Result<Option<i64>, EvalError> {
    let m = run(VEC_MAX, vec![("V", int_vector(v))])?;
    Ok(match m.scalar(0, 0) {
        Scalar::Int(x) => Some(x),
        _ => None,
    })
}

pub fn run_vec_sum(v: &[i64]) -> Result<i64, EvalError> {
    let m = run(VEC_SUM, vec![("V", int_vector(v))])?;
    match m.scalar(0, 0) {
        Scalar::Int(x) => Ok(x),
        other => unreachable!("int sum produced {other:?}"),
    }
}

pub fn int_vector(v: &[i64]) -> Matrix {
    Matrix::new(v.len(), 1, SemiringId::Int, v.iter().map(|&x| Scalar::Int(x)).collect()).expect("nonempty vector")
}

/// Union-find; each component is labelled by its smallest vertex.
pub fn oracle_wcc(g: &GraphSpec) -> BTreeMap<usize, usize> {
    let mut parent: Vec<usize> = (0..=g.n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut x = x;
        while p[x] != r {
            let next = p[x];
            p[x] = r;
            x = next;
        }
        r
    }
    for &(u, v, _) in &g.edges {
        let (a, b) = (find(&mut parent, u), find(&mut parent, v));
        // roots stay component minima
        if a < b {
            parent[b] = a;
        } else {
            parent[a] = b;
        }
    }
    (1..=g.n).map(|u| (u, find(&mut parent, u))).collect()
}

/// Breadth-first search along arcs.
pub fn oracle_reach(g: &GraphSpec, s: usize) -> BTreeSet<usize> {
    let mut adj = vec![Vec::new(); g.n + 1];
    for (u, v, _) in g.arcs() {
        adj[u].push(v);
    }
    let mut seen = BTreeSet::from([s]);
    let mut queue = VecDeque::from([s]);
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if seen.insert(v) {
                queue.push_back(v);
            }
        }
    }
    seen
}

/// Bellman-Ford; `None` for unreachable vertices.
pub fn oracle_sssp(g: &GraphSpec, s: usize) -> BTreeMap<usize, Option<i64>> {
    let mut dist: Vec<Option<i64>> = vec![None; g.n + 1];
    dist[s] = Some(0);
    let arcs: Vec<_> = g.arcs().map(|(u, v, w)| (u, v, w.expect("weighted graph"))).collect();
    for _ in 1..g.n.max(2) {
        let mut changed = false;
        for &(u, v, w) in &arcs {
            if let Some(du) = dist[u] {
                if dist[v].is_none_or(|dv| du + w < dv) {
                    dist[v] = Some(du + w);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    (1..=g.n).map(|u| (u, dist[u])).collect()
}
