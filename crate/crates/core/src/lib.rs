//! MATLANG dialects up to GraphAlg Core: a shared IR with per-dialect
//! validation, a type checker, an evaluator over seven fixed semirings, and
//! lowering passes between the dialects.

pub mod algos;
pub mod eval;
pub mod gen;
pub mod harness;
pub mod ir;
pub mod rewrite;
pub mod semiring;
pub mod textio;
pub mod typecheck;
