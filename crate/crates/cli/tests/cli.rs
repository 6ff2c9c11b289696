use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use matlang::algos::{oracle_wcc, GraphSpec, GOLDEN};
use matlang::gen::{case_rng, random_instance};
use matlang::textio::{parse_matrix, parse_program, print_matrix};
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_matlang"))
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/programs/data").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn golden_file(dir: &TempDir, name: &str) -> String {
    let g = GOLDEN.iter().find(|g| g.name == name).unwrap();
    write(dir, &format!("{name}.ml"), g.source)
}

#[test]
fn check_prints_the_type() {
    let dir = TempDir::new().unwrap();
    let o = run(&["check", &golden_file(&dir, "wcc")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("type: a x a over bool"), "{}", stdout(&o));
    let o = run(&["check", &golden_file(&dir, "wcc"), "--dialect", "core"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn check_reports_type_errors() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "bad.ml", "matrix A : n x m over int;\nin\nA * A\n");
    let o = run(&["check", &p]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("matmul inner dims"), "{}", stderr(&o));

    let p = write(&dir, "syntax.ml", "matrix A : n x n over int;\nin\nA *\n");
    let o = run(&["check", &p]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("syntax.ml:4:1"), "{}", stderr(&o));

    let o = run(&["check", &golden_file(&dir, "vec_max"), "--dialect", "dec_ml"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_files_are_io_errors() {
    let o = run(&["check", "/nonexistent/prog.ml"]);
    assert_eq!(o.status.code(), Some(3));
    let dir = TempDir::new().unwrap();
    let o = run(&["eval", &golden_file(&dir, "wcc"), "--bind", "A=/nonexistent.mtx"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn eval_wcc_matches_union_find() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("labels.mtx");
    let path = data("path4.mtx");
    let o = run(&[
        "eval",
        &golden_file(&dir, "wcc"),
        "--bind",
        &format!("A={}", path.display()),
        "--size",
        "a=4",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let labels = parse_matrix(&fs::read_to_string(out).unwrap()).unwrap();
    let g = GraphSpec::from_adjacency(&parse_matrix(&fs::read_to_string(&path).unwrap()).unwrap()).unwrap();
    let expected = oracle_wcc(&g.undirected());
    assert_eq!(matlang::algos::decode_wcc(&labels), expected);
}

#[test]
fn nonconforming_instances_exit_4() {
    let dir = TempDir::new().unwrap();
    let wcc = golden_file(&dir, "wcc");
    let path = format!("A={}", data("path4.mtx").display());
    let o = run(&["eval", &wcc, "--bind", &path, "--size", "a=5"]);
    assert_eq!(o.status.code(), Some(4));
    let o = run(&["eval", &golden_file(&dir, "sssp"), "--bind", &path]);
    assert_eq!(o.status.code(), Some(4));
    let o = run(&["eval", &wcc]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("not bound"));
}

#[test]
fn algorithms_on_shipped_graphs() {
    let o = run(&["algo", "sssp", data("weighted5.mtx").to_str().unwrap(), "--source", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "1 0\n2 4\n3 5\n4 7\n5 inf\n");
    let o = run(&["algo", "wcc", data("path4.mtx").to_str().unwrap(), "--format", "records"]);
    assert_eq!(stdout(&o).lines().count(), 4);
    assert!(stdout(&o).starts_with(r#"{"component":1,"vertex":1}"#), "{}", stdout(&o));
    let o = run(&["algo", "reach", data("path4.mtx").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
    let dir = TempDir::new().unwrap();
    let v = write(&dir, "v.mtx", "matrix 3 1 int\n1 1 1\n2 1 2\n3 1 3\n");
    let o = run(&["algo", "maxv", &v]);
    assert_eq!(stdout(&o), "3\n");
}

#[test]
fn lowered_programs_are_valid_in_the_target() {
    let dir = TempDir::new().unwrap();
    for g in GOLDEN {
        let prog = golden_file(&dir, g.name);
        for (to, dialect) in [("dec", "dec_ml"), ("sifor", "sifor_ml")] {
            let out = dir.path().join(format!("{}.{to}.ml", g.name));
            let o = run(&["lower", &prog, "--to", to, "--out", out.to_str().unwrap()]);
            assert_eq!(o.status.code(), Some(0), "{} to {to}: {}", g.name, stderr(&o));
            let (s, e, _) = parse_program(&fs::read_to_string(&out).unwrap()).unwrap();
            assert!(matlang::ir::validate_dialect(&e, dialect.parse().unwrap(), &s).is_ok());
            let o = run(&["check", out.to_str().unwrap(), "--dialect", dialect]);
            assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        }
    }
}

#[test]
fn diff_passes_for_every_golden_program_and_target() {
    let dir = TempDir::new().unwrap();
    for (gi, g) in GOLDEN.iter().enumerate() {
        let prog = golden_file(&dir, g.name);
        let (s, _) = g.parse();
        let mut equal = 0;
        for k in 0..3u64 {
            let inst = random_instance(&mut case_rng(gi as u64, k), &s, 5, 0.3);
            let binds: Vec<String> = inst
                .mats
                .iter()
                .map(|(n, m)| format!("{n}={}", write(&dir, &format!("{}_{k}_{n}.mtx", g.name), &print_matrix(m))))
                .collect();
            for to in ["dec", "sifor"] {
                let mut args = vec!["diff", prog.as_str(), "--to", to];
                for b in &binds {
                    args.extend(["--bind", b.as_str()]);
                }
                let o = run(&args);
                assert!(
                    matches!(o.status.code(), Some(0) | Some(4)),
                    "{} to {to}: {}{}",
                    g.name,
                    stdout(&o),
                    stderr(&o)
                );
                if o.status.code() == Some(4) {
                    assert!(stderr(&o).contains("original program failed"), "{}", stderr(&o));
                } else {
                    assert!(stdout(&o).contains(": equal"), "{}", stdout(&o));
                    equal += 1;
                }
            }
        }
        assert!(equal > 0, "{} was never compared", g.name);
    }
}

#[test]
fn fuzz_is_clean_and_deterministic() {
    let args = ["fuzz", "--seed", "7", "--cases", "300", "--max-dim", "6"];
    let first = run(&args);
    assert_eq!(first.status.code(), Some(0), "{}", stdout(&first));
    assert!(stdout(&first).contains("0 failing cases"));
    assert_eq!(run(&args).stdout, first.stdout);

    let rec = ["fuzz", "--seed", "3", "--cases", "40", "--format", "records"];
    let a = run(&rec);
    assert_eq!(a.stdout, run(&rec).stdout);
    let text = stdout(&a);
    assert_eq!(text.lines().count(), 41);
    for (i, line) in text.lines().take(40).enumerate() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["case"], i as u64);
    }
}
