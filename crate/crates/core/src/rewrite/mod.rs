//! Semantics-preserving lowering passes between dialects.
//!
//! * `for` to `sifor`: the shared IR already represents single-binding
//!   loops as multi-binding loops, so this is validation only.
//! * `sifor` to `dec`: canonical loops become counted loops that carry the
//!   canonical vector as state.
//! * `dec` to `sifor`: counted loops become canonical loops and `pickAny`
//!   is expanded into nested loops.
//! * `muse`/`core` to `dec`: every value is encoded into the extended reals
//!   and products over other rings are computed by loop macros.

mod encode;
mod loops;
mod macros;

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

pub use macros::{build_matmul_sim, build_ordering_macros, build_rotate, build_sum, Ctx, OrderingMacros, ProductOps};

use crate::eval::{EvalConfig, EvalError, Evaluator, Instance, Matrix};
use crate::ir::{detect_dialect, validate_dialect, Dialect, DialectError, Expr, MatrixType, NameSupply, Schema};
use crate::semiring::SemiringId;
use crate::typecheck::{infer_type, TypeEnv, TypeError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RewriteError {
    #[error(transparent)]
    Dialect(#[from] DialectError),
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error("{0}")]
    Unsupported(String),
}

/// What a lowering did.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoweringReport {
    pub source: Dialect,
    pub target: Dialect,
    pub fresh_names: Vec<String>,
    pub expansions: BTreeMap<String, usize>,
    /// Whether values were moved into the extended-real encoding.
    pub encoded: bool,
}

impl fmt::Display for LoweringReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "lowered {} -> {}", self.source, self.target)?;
        writeln!(f, "encoded: {}", if self.encoded { "yes" } else { "no" })?;
        writeln!(f, "fresh names: {}", self.fresh_names.len())?;
        for (k, n) in &self.expansions {
            writeln!(f, "  {k}: {n}")?;
        }
        Ok(())
    }
}

/// A lowered program together with how to run it against instances of the
/// original schema.
#[derive(Debug, Clone, PartialEq)]
pub struct Lowered {
    pub expr: Expr,
    pub schema: Schema,
    /// Ring of the original result when values are encoded.
    pub encoded_result: Option<SemiringId>,
    pub report: LoweringReport,
}

impl Lowered {
    /// The instance the lowered program runs on.
    pub fn prepare_instance(&self, original: &Instance) -> Instance {
        if self.encoded_result.is_some() {
            original.encode()
        } else {
            original.clone()
        }
    }

    /// Maps a result of the lowered program back to the original ring.
    pub fn decode_result(&self, m: &Matrix) -> Matrix {
        match self.encoded_result {
            Some(r) => m.decode(r),
            None => m.clone(),
        }
    }

    /// Runs the lowered program on an original instance and decodes.
    pub fn eval(&self, original: &Instance, config: EvalConfig) -> Result<Matrix, EvalError> {
        let inst = self.prepare_instance(original);
        let raw = Evaluator::new(&inst, config).eval(&self.expr)?;
        Ok(self.decode_result(&raw))
    }
}

fn finish(
    expr: Expr,
    schema: Schema,
    source: Dialect,
    target: Dialect,
    encoded_result: Option<SemiringId>,
    cx: Ctx,
) -> Result<Lowered, RewriteError> {
    validate_dialect(&expr, target, &schema)?;
    let report = LoweringReport {
        source,
        target,
        fresh_names: cx.names.introduced().to_vec(),
        expansions: cx.expansions,
        encoded: encoded_result.is_some(),
    };
    Ok(Lowered { expr, schema, encoded_result, report })
}

fn identity(e: &Expr, s: &Schema, source: Dialect, target: Dialect) -> Result<Lowered, RewriteError> {
    finish(e.clone(), s.clone(), source, target, None, Ctx::default())
}

/// Single-binding canonical loops are already sifor loops.
pub fn lower_for_to_sifor(e: &Expr, s: &Schema) -> Result<Lowered, RewriteError> {
    validate_dialect(e, Dialect::ForMl, s)?;
    identity(e, s, Dialect::ForMl, Dialect::SiforMl)
}

/// Replaces canonical loops by counted loops.
pub fn lower_sifor_to_dec(e: &Expr, s: &Schema) -> Result<Lowered, RewriteError> {
    validate_dialect(e, Dialect::SiforMl, s)?;
    infer_type(s, e)?;
    let mut cx = Ctx::new(NameSupply::for_program(e, s));
    let out = loops::eliminate_canonical(&mut cx, &mut TypeEnv::new(s), e)?;
    finish(out, s.clone(), Dialect::SiforMl, Dialect::DecMl, None, cx)
}

/// Replaces counted loops by canonical loops and simulates `pickAny`.
pub fn lower_dec_to_sifor(e: &Expr, s: &Schema) -> Result<Lowered, RewriteError> {
    validate_dialect(e, Dialect::DecMl, s)?;
    infer_type(s, e)?;
    let mut cx = Ctx::new(NameSupply::for_program(e, s));
    let out = loops::expand_dec(&mut cx, &mut TypeEnv::new(s), e)?;
    finish(out, s.clone(), Dialect::DecMl, Dialect::SiforMl, None, cx)
}

/// Lowers a multi-semiring program to a single-semiring counted-loop program.
/// Programs that are already valid `dec` programs are returned unchanged.
pub fn lower_muse_to_dec(e: &Expr, s: &Schema) -> Result<Lowered, RewriteError> {
    let source = muse_source(e, s)?;
    if validate_dialect(e, Dialect::DecMl, s).is_ok() {
        return identity(e, s, source, Dialect::DecMl);
    }
    encode_program(e, s, source)
}

/// Like [`lower_muse_to_dec`] but always encodes, even single-ring programs.
pub fn encode_to_dec(e: &Expr, s: &Schema) -> Result<Lowered, RewriteError> {
    let source = muse_source(e, s)?;
    encode_program(e, s, source)
}

fn muse_source(e: &Expr, s: &Schema) -> Result<Dialect, RewriteError> {
    if validate_dialect(e, Dialect::Core, s).is_ok() {
        return Ok(Dialect::Core);
    }
    validate_dialect(e, Dialect::MuseMl, s)?;
    Ok(Dialect::MuseMl)
}

fn encode_program(e: &Expr, s: &Schema, source: Dialect) -> Result<Lowered, RewriteError> {
    let result = infer_type(s, e)?;
    let mut cx = Ctx::new(NameSupply::for_program(e, s));
    let hybrid = encode::encode(&mut cx, &mut TypeEnv::new(s), e)?;
    let encoded_schema: Schema =
        s.iter().map(|(n, t)| (n.clone(), MatrixType::new(t.rows.clone(), t.cols.clone(), SemiringId::Real))).collect();
    let out = loops::eliminate_canonical(&mut cx, &mut TypeEnv::new(&encoded_schema), &hybrid)?;
    finish(out, encoded_schema, source, Dialect::DecMl, Some(result.ring), cx)
}

/// Simulates a core (or muse) program in sifor: encode to `dec`, then expand
/// back to canonical loops.
pub fn simulate_core_in_sifor(e: &Expr, s: &Schema) -> Result<Lowered, RewriteError> {
    let dec = lower_muse_to_dec(e, s)?;
    let sifor = lower_dec_to_sifor(&dec.expr, &dec.schema)?;
    let mut report = sifor.report;
    report.source = dec.report.source;
    report.encoded = dec.report.encoded;
    report.fresh_names = dec.report.fresh_names.into_iter().chain(report.fresh_names).collect();
    for (k, n) in dec.report.expansions {
        *report.expansions.entry(k).or_default() += n;
    }
    Ok(Lowered { expr: sifor.expr, schema: sifor.schema, encoded_result: dec.encoded_result, report })
}

/// Lowers `e` from whatever dialect it is in to `target` (`dec_ml` or `sifor_ml`).
pub fn lower_to(e: &Expr, s: &Schema, target: Dialect) -> Result<Lowered, RewriteError> {
    let source = detect_dialect(e, s)?;
    match (target, source) {
        (Dialect::DecMl, Dialect::Ml | Dialect::DecMl) => identity(e, s, source, target),
        (Dialect::DecMl, Dialect::ForMl | Dialect::SiforMl) => {
            let mut l = lower_sifor_to_dec(e, s)?;
            l.report.source = source;
            Ok(l)
        }
        (Dialect::DecMl, Dialect::MuseMl | Dialect::Core) => lower_muse_to_dec(e, s),
        (Dialect::SiforMl, Dialect::Ml | Dialect::ForMl | Dialect::SiforMl) => identity(e, s, source, target),
        (Dialect::SiforMl, Dialect::DecMl) => lower_dec_to_sifor(e, s),
        (Dialect::SiforMl, Dialect::MuseMl | Dialect::Core) => simulate_core_in_sifor(e, s),
        _ => Err(RewriteError::Unsupported(format!("no lowering to {target}; use dec_ml or sifor_ml"))),
    }
}
