//! Differential checking of lowering passes: run a program and its lowered
//! form on the same instance and compare the results.

use std::fmt;

use crate::eval::{EvalConfig, EvalError, Evaluator, Instance, Matrix};
use crate::gen::{generate_case, FuzzCase, GenConfig};
use crate::ir::{validate_dialect, Dialect, Expr, Schema};
use crate::rewrite::{
    encode_to_dec, lower_dec_to_sifor, lower_for_to_sifor, lower_muse_to_dec, lower_sifor_to_dec,
    simulate_core_in_sifor, Lowered, RewriteError,
};
use crate::semiring::{format_scalar, Scalar, SemiringId};
use crate::textio::{print_matrix, print_program};
use crate::typecheck::infer_type;

/// Relative tolerance for the real rings.
pub const REAL_RTOL: f64 = 1e-9;

/// Int values are exact in the encoding up to this magnitude.
pub const ENCODING_INT_BOUND: i64 = 1 << 53;

/// Evaluation settings for differential runs.
pub fn diff_config() -> EvalConfig {
    EvalConfig { int_bound: Some(ENCODING_INT_BOUND), ..EvalConfig::default() }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Mismatch {
    Shape { expected: String, actual: String },
    Cell { row: usize, col: usize, expected: String, actual: String },
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mismatch::Shape { expected, actual } => write!(f, "expected a {expected} matrix, got {actual}"),
            Mismatch::Cell { row, col, expected, actual } => {
                write!(f, "cell ({}, {}): expected {expected}, got {actual}", row + 1, col + 1)
            }
        }
    }
}

fn shape(m: &Matrix) -> String {
    format!("{} x {} {}", m.rows(), m.cols(), m.ring())
}

/// Whether two payloads of `ring` agree: exactly, or within
/// [`REAL_RTOL`] for the real rings.
pub fn scalars_agree(ring: SemiringId, a: Scalar, b: Scalar) -> bool {
    if a == b {
        return true;
    }
    match (a, b) {
        (Scalar::Real(x), Scalar::Real(y)) if ring.is_real_family() => {
            (x - y).abs() <= REAL_RTOL * x.abs().max(y.abs())
        }
        _ => false,
    }
}

/// First difference between `expected` and `actual`, in row-major order.
pub fn compare(expected: &Matrix, actual: &Matrix) -> Result<(), Mismatch> {
    if (expected.rows(), expected.cols(), expected.ring()) != (actual.rows(), actual.cols(), actual.ring()) {
        return Err(Mismatch::Shape { expected: shape(expected), actual: shape(actual) });
    }
    for r in 0..expected.rows() {
        for c in 0..expected.cols() {
            let (a, b) = (expected.scalar(r, c), actual.scalar(r, c));
            if !scalars_agree(expected.ring(), a, b) {
                return Err(Mismatch::Cell { row: r, col: c, expected: format_scalar(a), actual: format_scalar(b) });
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pass {
    ForToSifor,
    SiforToDec,
    DecToSifor,
    MuseToDec,
    EncodeToDec,
    CoreToSifor,
}

impl Pass {
    pub const ALL: [Pass; 6] =
        [Pass::ForToSifor, Pass::SiforToDec, Pass::DecToSifor, Pass::MuseToDec, Pass::EncodeToDec, Pass::CoreToSifor];

    pub fn name(self) -> &'static str {
        match self {
            Pass::ForToSifor => "for_to_sifor",
            Pass::SiforToDec => "sifor_to_dec",
            Pass::DecToSifor => "dec_to_sifor",
            Pass::MuseToDec => "muse_to_dec",
            Pass::EncodeToDec => "encode_to_dec",
            Pass::CoreToSifor => "core_to_sifor",
        }
    }

    /// The dialect a program must be in for the pass to accept it.
    pub fn source(self) -> Dialect {
        match self {
            Pass::ForToSifor => Dialect::ForMl,
            Pass::SiforToDec => Dialect::SiforMl,
            Pass::DecToSifor => Dialect::DecMl,
            Pass::MuseToDec | Pass::EncodeToDec | Pass::CoreToSifor => Dialect::MuseMl,
        }
    }

    pub fn applies_to(self, e: &Expr, s: &Schema) -> bool {
        validate_dialect(e, self.source(), s).is_ok()
    }

    pub fn run(self, e: &Expr, s: &Schema) -> Result<Lowered, RewriteError> {
        match self {
            Pass::ForToSifor => lower_for_to_sifor(e, s),
            Pass::SiforToDec => lower_sifor_to_dec(e, s),
            Pass::DecToSifor => lower_dec_to_sifor(e, s),
            Pass::MuseToDec => lower_muse_to_dec(e, s),
            Pass::EncodeToDec => encode_to_dec(e, s),
            Pass::CoreToSifor => simulate_core_in_sifor(e, s),
        }
    }
}

impl fmt::Display for Pass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DiffOutcome {
    Equal,
    /// The original program hit an arithmetic limit, so there is nothing to compare.
    Skipped(String),
    Mismatch(Mismatch),
    /// The pass rejected the program or the lowered program failed to run.
    Failed(String),
}

impl DiffOutcome {
    pub fn is_failure(&self) -> bool {
        matches!(self, DiffOutcome::Mismatch(_) | DiffOutcome::Failed(_))
    }
}

impl fmt::Display for DiffOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DiffOutcome::Equal => f.write_str("equal"),
            DiffOutcome::Skipped(why) => write!(f, "skipped: {why}"),
            DiffOutcome::Mismatch(m) => write!(f, "mismatch: {m}"),
            DiffOutcome::Failed(why) => write!(f, "failed: {why}"),
        }
    }
}

/// Compares an already computed result of the original program with the
/// lowered program run on the same instance.
pub fn diff_against(
    expected: &Result<Matrix, EvalError>,
    lowered: &Lowered,
    inst: &Instance,
    cfg: &EvalConfig,
) -> DiffOutcome {
    let expected = match expected {
        Ok(m) => m,
        Err(e) if e.is_soundness_violation() => return DiffOutcome::Failed(format!("original program: {e}")),
        Err(e) => return DiffOutcome::Skipped(e.to_string()),
    };
    match lowered.eval(inst, cfg.clone()) {
        Ok(actual) => match compare(expected, &actual) {
            Ok(()) => DiffOutcome::Equal,
            Err(m) => DiffOutcome::Mismatch(m),
        },
        Err(e) => DiffOutcome::Failed(format!("lowered program: {e}")),
    }
}

/// Lowers with `pass` and compares on `inst`.
pub fn diff_pass(pass: Pass, s: &Schema, e: &Expr, inst: &Instance, cfg: &EvalConfig) -> DiffOutcome {
    let expected = Evaluator::new(inst, cfg.clone()).eval(e);
    match pass.run(e, s) {
        Ok(lowered) => diff_against(&expected, &lowered, inst, cfg),
        Err(err) => DiffOutcome::Failed(format!("{pass}: {err}")),
    }
}

/// Evaluates and checks the result against the inferred type. Arithmetic
/// errors are not soundness failures and yield `Ok(None)`.
pub fn check_soundness(s: &Schema, e: &Expr, inst: &Instance, cfg: &EvalConfig) -> Result<Option<Matrix>, String> {
    let ty = infer_type(s, e).map_err(|err| format!("ill-typed: {err}"))?;
    let m = match Evaluator::new(inst, cfg.clone()).eval(e) {
        Ok(m) => m,
        Err(err) if err.is_soundness_violation() => return Err(err.to_string()),
        Err(_) => return Ok(None),
    };
    let rows = inst.size_of(&ty.rows).ok_or("unsized row symbol")?;
    let cols = inst.size_of(&ty.cols).ok_or("unsized column symbol")?;
    if (m.rows(), m.cols(), m.ring()) != (rows, cols, ty.ring) {
        return Err(format!("type {ty} is {rows} x {cols} {}, result is {}", ty.ring, shape(&m)));
    }
    Ok(Some(m))
}

/// Outcome of all checks on one generated case.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseResult {
    pub index: u64,
    pub dialect: Dialect,
    pub soundness: Result<(), String>,
    pub passes: Vec<(Pass, DiffOutcome)>,
}

impl CaseResult {
    pub fn is_failure(&self) -> bool {
        self.soundness.is_err() || self.passes.iter().any(|(_, o)| o.is_failure())
    }
}

/// The dialect mix used by fuzzing: case `i` targets `FUZZ_DIALECTS[i % 5]`.
pub const FUZZ_DIALECTS: [Dialect; 5] =
    [Dialect::ForMl, Dialect::SiforMl, Dialect::DecMl, Dialect::Core, Dialect::Core];

pub fn fuzz_config(index: u64, max_dim: usize) -> GenConfig {
    GenConfig::new(FUZZ_DIALECTS[(index % FUZZ_DIALECTS.len() as u64) as usize], max_dim)
}

/// Passes that accept programs generated for dialect `d`.
pub fn passes_for(d: Dialect) -> &'static [Pass] {
    match d {
        Dialect::Ml | Dialect::ForMl => &[Pass::ForToSifor, Pass::SiforToDec],
        Dialect::SiforMl => &[Pass::SiforToDec],
        Dialect::DecMl => &[Pass::DecToSifor, Pass::EncodeToDec],
        Dialect::MuseMl | Dialect::Core => &[Pass::MuseToDec, Pass::CoreToSifor],
    }
}

/// Checks type soundness and every applicable pass on `case`.
pub fn check_case(case: &FuzzCase, dialect: Dialect, passes: &[Pass], cfg: &EvalConfig) -> CaseResult {
    let (s, e, inst) = (&case.schema, &case.expr, &case.instance);
    let soundness = check_soundness(s, e, inst, cfg).map(|_| ());
    let expected = Evaluator::new(inst, cfg.clone()).eval(e);
    let passes = passes
        .iter()
        .map(|&p| {
            let outcome = match p.run(e, s) {
                Ok(l) => diff_against(&expected, &l, inst, cfg),
                Err(err) => DiffOutcome::Failed(format!("{p}: {err}")),
            };
            (p, outcome)
        })
        .collect();
    CaseResult { index: case.index, dialect, soundness, passes }
}

/// Generates case `index` of the standard fuzz mix and checks it.
pub fn fuzz_case(seed: u64, index: u64, max_dim: usize) -> (FuzzCase, CaseResult) {
    let gen = fuzz_config(index, max_dim);
    let case = generate_case(seed, index, &gen);
    let result = check_case(&case, gen.dialect, passes_for(gen.dialect), &diff_config());
    (case, result)
}

/// Everything needed to reproduce a failing case by hand.
pub fn repro_bundle(case: &FuzzCase, result: &CaseResult) -> String {
    let mut out = format!("== case {} (seed {}, dialect {}) ==\n", case.index, case.seed, result.dialect);
    if let Err(e) = &result.soundness {
        out.push_str(&format!("soundness: {e}\n"));
    }
    for (p, o) in &result.passes {
        out.push_str(&format!("{p}: {o}\n"));
    }
    out.push_str("-- program --\n");
    out.push_str(&print_program(&case.schema, &case.expr));
    for (name, m) in &case.instance.mats {
        out.push_str(&format!("-- {name} --\n{}", print_matrix(m)));
    }
    out
}
