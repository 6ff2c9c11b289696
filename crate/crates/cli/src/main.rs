use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

use commands::CliError;

/// Type-check, evaluate, lower and differentially test MATLANG programs.
#[derive(Debug, Parser)]
#[command(name = "matlang", version)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output style: human-readable text or one JSON record per line.
    #[arg(long, value_enum, global = true, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Records,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Target {
    Dec,
    Sifor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    Wcc,
    Reach,
    Sssp,
    Maxv,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse, validate and type-check a program.
    Check {
        program: PathBuf,
        /// Also require the program to be valid in this dialect.
        #[arg(long)]
        dialect: Option<String>,
    },
    /// Evaluate a program on bound matrices and print the result matrix.
    Eval {
        program: PathBuf,
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rewrite a program into a smaller dialect.
    Lower {
        program: PathBuf,
        #[arg(long, value_enum)]
        to: Target,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a program and its lowering on the same matrices and compare.
    Diff {
        program: PathBuf,
        #[arg(long, value_enum)]
        to: Target,
        #[command(flatten)]
        instance: InstanceArgs,
    },
    /// Run a shipped graph program on an adjacency matrix (or a vector for maxv).
    Algo {
        #[arg(value_enum)]
        name: Algo,
        graph: PathBuf,
        /// Source vertex (1-based) for reach and sssp.
        #[arg(long)]
        source: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate well-typed programs and check every applicable lowering.
    Fuzz {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        cases: u64,
        #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u64).range(1..=64))]
        max_dim: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Default, Args)]
pub struct InstanceArgs {
    /// Bind a schema matrix to a matrix file, NAME=PATH. Repeatable or comma-separated.
    #[arg(long = "bind", value_parser = parse_binding, value_delimiter = ',')]
    pub bindings: Vec<(String, PathBuf)>,
    /// Assign a size symbol, SYM=N. Repeatable or comma-separated.
    #[arg(long = "size", value_parser = parse_size, value_delimiter = ',')]
    pub sizes: Vec<(String, usize)>,
}

fn split_pair(s: &str) -> Result<(&str, &str), String> {
    match s.split_once('=') {
        Some((k, v)) if !k.is_empty() && !v.is_empty() => Ok((k, v)),
        _ => Err(format!("expected NAME=VALUE, got `{s}`")),
    }
}

fn parse_binding(s: &str) -> Result<(String, PathBuf), String> {
    let (k, v) = split_pair(s)?;
    Ok((k.to_string(), PathBuf::from(v)))
}

fn parse_size(s: &str) -> Result<(String, usize), String> {
    let (k, v) = split_pair(s)?;
    match v.parse::<usize>() {
        Ok(n) if n > 0 => Ok((k.to_string(), n)),
        _ => Err(format!("size `{k}` must be a positive integer, got `{v}`")),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let fmt = cli.format;
    match cli.command {
        Command::Check { program, dialect } => commands::check(&program, dialect.as_deref(), fmt),
        Command::Eval { program, instance, out } => commands::eval(&program, &instance, out.as_deref(), fmt),
        Command::Lower { program, to, out } => commands::lower(&program, to, out.as_deref(), fmt),
        Command::Diff { program, to, instance } => commands::diff(&program, to, &instance, fmt),
        Command::Algo { name, graph, source, out } => commands::algo(name, &graph, source, out.as_deref(), fmt),
        Command::Fuzz { seed, cases, max_dim, out } => {
            commands::fuzz(seed, cases, max_dim as usize, out.as_deref(), fmt)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if !e.message.is_empty() {
                eprintln!("error: {}", e.message);
            }
            ExitCode::from(e.code)
        }
    }
}
