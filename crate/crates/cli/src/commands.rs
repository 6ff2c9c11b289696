use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use matlang::algos::{self, GraphSpec};
use matlang::eval::{EvalConfig, EvalError, Evaluator, Instance, Matrix};
use matlang::harness::{diff_against, diff_config, fuzz_case, repro_bundle, CaseResult, DiffOutcome, Pass};
use matlang::ir::{validate_dialect, Dialect, Expr, Schema};
use matlang::rewrite::{lower_to, Lowered};
use matlang::semiring::{format_scalar, Scalar, SemiringId};
use matlang::textio::{parse_matrix, parse_program, print_matrix, print_program, TextError};
use matlang::typecheck::infer_type;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::{Algo, Format, InstanceArgs, Target};

pub const EXIT_TYPE: u8 = 2;
pub const EXIT_IO: u8 = 3;
pub const EXIT_INSTANCE: u8 = 4;
pub const EXIT_MISMATCH: u8 = 5;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    fn new(code: u8, message: impl Into<String>) -> Self {
        CliError { code, message: message.into() }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::new(EXIT_IO, format!("cannot read {}: {e}", path.display())))
}

/// Writes `text` to `out`, or to stdout when no path is given.
fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| CliError::new(EXIT_IO, format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn record(v: Value) -> String {
    format!("{v}\n")
}

fn load_program(path: &Path) -> Result<(Schema, Expr, Dialect), CliError> {
    let text = read(path)?;
    parse_program(&text).map_err(|e| {
        let loc = match &e {
            TextError::Parse { line, col, .. } => format!("{}:{line}:{col}: ", path.display()),
            _ => format!("{}: ", path.display()),
        };
        CliError::new(EXIT_TYPE, format!("{loc}{e}"))
    })
}

fn load_matrix(path: &Path) -> Result<Matrix, CliError> {
    parse_matrix(&read(path)?).map_err(|e| CliError::new(EXIT_IO, format!("{}: {e}", path.display())))
}

fn load_instance(schema: &Schema, args: &InstanceArgs) -> Result<Instance, CliError> {
    let mut inst = Instance::new();
    for (sym, n) in &args.sizes {
        inst = inst.with_size(sym, *n);
    }
    for (name, path) in &args.bindings {
        if schema.get(name).is_none() {
            return Err(CliError::new(EXIT_INSTANCE, format!("`{name}` is not declared by the program")));
        }
        inst = inst.with_matrix(name, load_matrix(path)?);
    }
    let instance_error = |e: EvalError| CliError::new(EXIT_INSTANCE, e.to_string());
    inst.infer_sizes(schema).map_err(instance_error)?;
    inst.check_conforms(schema).map_err(instance_error)?;
    Ok(inst)
}

fn matrix_record(m: &Matrix) -> Value {
    let mut entries = Vec::new();
    for r in 0..m.rows() {
        for c in 0..m.cols() {
            if !m.is_zero_at(r, c) {
                entries.push(json!([r + 1, c + 1, format_scalar(m.scalar(r, c))]));
            }
        }
    }
    json!({ "rows": m.rows(), "cols": m.cols(), "ring": m.ring().name(), "entries": entries })
}

fn target_dialect(t: Target) -> Dialect {
    match t {
        Target::Dec => Dialect::DecMl,
        Target::Sifor => Dialect::SiforMl,
    }
}

pub fn check(path: &Path, dialect: Option<&str>, fmt: Format) -> Result<(), CliError> {
    let (s, e, detected) = load_program(path)?;
    if let Some(name) = dialect {
        let d: Dialect = name.parse().map_err(|e| CliError::new(EXIT_TYPE, format!("{e}")))?;
        validate_dialect(&e, d, &s).map_err(|err| CliError::new(EXIT_TYPE, err.to_string()))?;
    }
    let ty = infer_type(&s, &e).map_err(|err| CliError::new(EXIT_TYPE, err.to_string()))?;
    let text = match fmt {
        Format::Text => format!("dialect: {detected}\ntype: {ty}\n"),
        Format::Records => record(json!({
            "command": "check",
            "dialect": detected.name(),
            "rows": ty.rows.to_string(),
            "cols": ty.cols.to_string(),
            "ring": ty.ring.name(),
        })),
    };
    emit(None, &text)
}

pub fn eval(path: &Path, args: &InstanceArgs, out: Option<&Path>, fmt: Format) -> Result<(), CliError> {
    let (s, e, _) = load_program(path)?;
    infer_type(&s, &e).map_err(|err| CliError::new(EXIT_TYPE, err.to_string()))?;
    let inst = load_instance(&s, args)?;
    let m = Evaluator::new(&inst, EvalConfig::default())
        .eval(&e)
        .map_err(|err| CliError::new(EXIT_INSTANCE, format!("evaluation failed: {err}")))?;
    let text = match fmt {
        Format::Text => print_matrix(&m),
        Format::Records => record(matrix_record(&m)),
    };
    emit(out, &text)
}

fn report_record(l: &Lowered) -> Value {
    json!({
        "source": l.report.source.name(),
        "target": l.report.target.name(),
        "encoded": l.report.encoded,
        "fresh_names": l.report.fresh_names.len(),
        "expansions": l.report.expansions,
    })
}

fn lowered(path: &Path, to: Target) -> Result<(Schema, Expr, Lowered), CliError> {
    let (s, e, _) = load_program(path)?;
    let l = lower_to(&e, &s, target_dialect(to)).map_err(|err| CliError::new(EXIT_TYPE, err.to_string()))?;
    Ok((s, e, l))
}

pub fn lower(path: &Path, to: Target, out: Option<&Path>, fmt: Format) -> Result<(), CliError> {
    let (_, _, l) = lowered(path, to)?;
    let program = print_program(&l.schema, &l.expr);
    match fmt {
        Format::Text => {
            eprint!("{}", l.report);
            emit(out, &program)
        }
        Format::Records => {
            let mut rec = report_record(&l);
            match out {
                Some(_) => emit(out, &program)?,
                None => rec["program"] = Value::String(program),
            }
            emit(None, &record(rec))
        }
    }
}

pub fn diff(path: &Path, to: Target, args: &InstanceArgs, fmt: Format) -> Result<(), CliError> {
    let (s, e, l) = lowered(path, to)?;
    let inst = load_instance(&s, args)?;
    let cfg = diff_config();
    let expected = Evaluator::new(&inst, cfg.clone()).eval(&e);
    let outcome = diff_against(&expected, &l, &inst, &cfg);
    let text = match fmt {
        Format::Text => format!("{} -> {}: {outcome}\n", l.report.source, l.report.target),
        Format::Records => {
            let mut rec = outcome_record(&outcome);
            rec["source"] = json!(l.report.source.name());
            rec["target"] = json!(l.report.target.name());
            record(rec)
        }
    };
    emit(None, &text)?;
    match outcome {
        DiffOutcome::Equal => Ok(()),
        DiffOutcome::Skipped(why) => Err(CliError::new(EXIT_INSTANCE, format!("original program failed: {why}"))),
        DiffOutcome::Mismatch(m) => Err(CliError::new(EXIT_MISMATCH, m.to_string())),
        DiffOutcome::Failed(why) => Err(CliError::new(EXIT_MISMATCH, why)),
    }
}

fn outcome_record(o: &DiffOutcome) -> Value {
    match o {
        DiffOutcome::Equal => json!({ "outcome": "equal" }),
        DiffOutcome::Skipped(why) => json!({ "outcome": "skipped", "detail": why }),
        DiffOutcome::Mismatch(m) => json!({ "outcome": "mismatch", "detail": m.to_string() }),
        DiffOutcome::Failed(why) => json!({ "outcome": "failed", "detail": why }),
    }
}

fn source_vertex(source: Option<usize>, n: usize) -> Result<usize, CliError> {
    match source {
        Some(s) if (1..=n).contains(&s) => Ok(s),
        Some(s) => Err(CliError::new(EXIT_INSTANCE, format!("source {s} is not a vertex of a {n}-vertex graph"))),
        None => Err(CliError::new(EXIT_INSTANCE, "this algorithm needs --source")),
    }
}

pub fn algo(name: Algo, path: &Path, source: Option<usize>, out: Option<&Path>, fmt: Format) -> Result<(), CliError> {
    let m = load_matrix(path)?;
    let eval_error = |e: EvalError| CliError::new(EXIT_INSTANCE, format!("evaluation failed: {e}"));
    let mut text = String::new();
    let mut line = |text_line: String, rec: Value| match fmt {
        Format::Text => text.push_str(&format!("{text_line}\n")),
        Format::Records => text.push_str(&record(rec)),
    };
    if name == Algo::Maxv {
        if m.cols() != 1 || m.ring() != SemiringId::Int {
            return Err(CliError::new(EXIT_INSTANCE, "maxv expects an n x 1 int vector"));
        }
        let values: Vec<i64> = m.data().iter().map(|s| if let Scalar::Int(x) = s { *x } else { 0 }).collect();
        let max = algos::run_vec_max(&values).map_err(eval_error)?;
        let shown = max.map_or_else(|| "-inf".to_string(), |x| x.to_string());
        line(shown.clone(), json!({ "max": shown }));
        return emit(out, &text);
    }
    let g = GraphSpec::from_adjacency(&m).map_err(|e| CliError::new(EXIT_INSTANCE, e))?;
    match name {
        Algo::Wcc => {
            for (v, label) in algos::run_wcc(&g).map_err(eval_error)? {
                line(format!("{v} {label}"), json!({ "vertex": v, "component": label }));
            }
        }
        Algo::Reach => {
            let s = source_vertex(source, g.n)?;
            for v in algos::run_reach(&g, s).map_err(eval_error)? {
                line(v.to_string(), json!({ "vertex": v }));
            }
        }
        Algo::Sssp => {
            if m.ring() != SemiringId::IntMinPlus {
                return Err(CliError::new(EXIT_INSTANCE, "sssp expects an int_min_plus adjacency matrix"));
            }
            let s = source_vertex(source, g.n)?;
            for (v, d) in algos::run_sssp(&g, s).map_err(eval_error)? {
                let shown = d.map_or_else(|| "inf".to_string(), |d| d.to_string());
                line(format!("{v} {shown}"), json!({ "vertex": v, "distance": shown }));
            }
        }
        Algo::Maxv => unreachable!("handled above"),
    }
    emit(out, &text)
}

fn case_record(r: &CaseResult) -> Value {
    let passes: Vec<Value> = r
        .passes
        .iter()
        .map(|(p, o)| {
            let mut v = outcome_record(o);
            v["pass"] = json!(p.name());
            v
        })
        .collect();
    json!({
        "case": r.index,
        "dialect": r.dialect.name(),
        "soundness": match &r.soundness { Ok(()) => "ok".to_string(), Err(e) => e.clone() },
        "passes": passes,
        "failure": r.is_failure(),
    })
}

pub fn fuzz(seed: u64, cases: u64, max_dim: usize, out: Option<&Path>, fmt: Format) -> Result<(), CliError> {
    let results: Vec<_> = (0..cases).into_par_iter().map(|i| fuzz_case(seed, i, max_dim)).collect();
    let mut text = String::new();
    let mut tally: Vec<(Pass, [usize; 3])> = Pass::ALL.iter().map(|&p| (p, [0; 3])).collect();
    let mut failures = 0;
    for (case, result) in &results {
        for (p, o) in &result.passes {
            let slot = &mut tally.iter_mut().find(|(q, _)| q == p).expect("known pass").1;
            slot[match o {
                DiffOutcome::Equal => 0,
                DiffOutcome::Skipped(_) => 1,
                _ => 2,
            }] += 1;
        }
        if result.is_failure() {
            failures += 1;
        }
        match fmt {
            Format::Records => text.push_str(&record(case_record(result))),
            Format::Text if result.is_failure() => text.push_str(&repro_bundle(case, result)),
            Format::Text => {}
        }
    }
    match fmt {
        Format::Text => {
            let _ = writeln!(text, "seed {seed}, {cases} cases, max dim {max_dim}");
            for (p, [eq, skip, bad]) in tally.iter().filter(|(_, t)| t.iter().sum::<usize>() > 0) {
                let _ = writeln!(text, "  {p}: {eq} equal, {skip} skipped, {bad} failed");
            }
            let _ = writeln!(text, "{failures} failing cases");
        }
        Format::Records => {
            let passes: serde_json::Map<String, Value> = tally
                .iter()
                .map(|(p, [eq, skip, bad])| {
                    (p.name().to_string(), json!({ "equal": eq, "skipped": skip, "failed": bad }))
                })
                .collect();
            text.push_str(&record(json!({
                "summary": true, "seed": seed, "cases": cases, "max_dim": max_dim,
                "failures": failures, "passes": passes,
            })));
        }
    }
    emit(out, &text)?;
    if failures > 0 {
        return Err(CliError::new(EXIT_MISMATCH, format!("{failures} of {cases} cases failed")));
    }
    Ok(())
}
