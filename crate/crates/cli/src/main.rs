use std::fs;
use std::io::{self, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use eclosure_cli::commands::{self, default_pairs, pairs_for, parse_set};
use eclosure_cli::error::{CliError, Result};
use eclosure_cli::input::load;
use eclosure_cli::record::Format;
use eclosure_cli::selfcheck::{self, Check, SelfcheckOptions};
use eclosure_core::procedures::{RunOptions, DEFAULT_LAMBDA};
use eclosure_core::{Engine, LossFunction, Method, ValueKind};

/// Closed multiple testing procedures and post hoc discovery-set queries.
#[derive(Parser)]
#[command(name = "eclosure", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one procedure and print its result record.
    Run {
        input: PathBuf,
        #[arg(long)]
        method: Method,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = DEFAULT_LAMBDA)]
        lambda: f64,
        /// Search all subsets for a largest member (closed methods only).
        #[arg(long)]
        exhaustive: bool,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Discovery counts of classical procedures and their closed versions.
    Compare {
        input: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "0.05,0.1")]
        alpha: Vec<f64>,
        /// Classical methods; by default every one that fits the input.
        #[arg(long, value_delimiter = ',')]
        method: Vec<Method>,
        /// Kind of a `value` column when no method fixes it.
        #[arg(long, value_enum)]
        kind: Option<KindArg>,
        #[arg(long, default_value_t = DEFAULT_LAMBDA)]
        lambda: f64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Membership, true-discovery bound and critical level of one set.
    Query {
        input: PathBuf,
        #[arg(long)]
        method: Method,
        #[arg(long)]
        alpha: f64,
        /// Comma-separated 1-based indices.
        #[arg(long, default_value = "")]
        set: String,
        /// fdr, fwer, pfer, aer, kfwer:K or fdx:GAMMA.
        #[arg(long, default_value = "fdr")]
        loss: LossFunction,
        /// Fail unless a critical level can be reported.
        #[arg(long)]
        critical_alpha: bool,
        #[arg(long, default_value_t = DEFAULT_LAMBDA)]
        lambda: f64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit figure data as CSV.
    Figure {
        #[arg(value_enum)]
        kind: FigureKind,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare shortcuts with exhaustive enumeration on random instances.
    Selfcheck {
        #[arg(long, default_value_t = 8)]
        m: usize,
        #[arg(long, default_value_t = 500)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Restrict to these checks.
        #[arg(long, value_enum, value_delimiter = ',')]
        check: Vec<Check>,
        /// Re-evaluate instances from a mismatch report.
        #[arg(long)]
        replay: Option<PathBuf>,
        #[arg(long, hide = true)]
        inject_fault: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Serve the session API.
    Serve {
        #[arg(long, default_value = eclosure_service::DEFAULT_ADDR)]
        addr: SocketAddr,
        /// Persist sessions under this directory.
        #[arg(long)]
        dir: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Pvalue,
    Evalue,
    KnockoffStat,
}

impl From<KindArg> for ValueKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Pvalue => ValueKind::Pvalue,
            KindArg::Evalue => ValueKind::Evalue,
            KindArg::KnockoffStat => ValueKind::KnockoffStat,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FigureKind {
    Fig1,
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| CliError::io(p.display().to_string(), e)),
        None => Ok(io::stdout().lock().write_all(text.as_bytes())?),
    }
}

fn options(lambda: f64) -> RunOptions {
    RunOptions { lambda, ..RunOptions::default() }
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    let engine = Engine::from_env();
    match cli.command {
        Command::Run { input, method, alpha, lambda, exhaustive, format, out } => {
            let values = load(&input, Some(method.input_kind()))?;
            let rec = commands::run(&engine, method, &values, alpha, &options(lambda), exhaustive)?;
            emit(out.as_deref(), &rec.render(format)?)?;
        }
        Command::Compare { input, alpha, method, kind, lambda, format, out } => {
            let kind = kind.map(ValueKind::from).or_else(|| method.first().map(|m| m.input_kind()));
            let values = load(&input, kind)?;
            let pairs = if method.is_empty() { default_pairs(values.kind()) } else { pairs_for(&method)? };
            let table = commands::compare(&values, &alpha, &pairs, &options(lambda))?;
            emit(out.as_deref(), &table.render(format)?)?;
        }
        Command::Query { input, method, alpha, set, loss, critical_alpha, lambda, format, out } => {
            let values = load(&input, Some(method.input_kind()))?;
            let set = parse_set(&set, values.m())?;
            let report = commands::query(&engine, method, &values, alpha, loss, set, &options(lambda), critical_alpha)?;
            emit(out.as_deref(), &report.render(format)?)?;
        }
        Command::Figure { kind: FigureKind::Fig1, k, m, alpha, out } => {
            emit(out.as_deref(), &commands::figure_fig1(k, m, alpha)?)?;
        }
        Command::Selfcheck { m, trials, seed, check, replay, inject_fault, out } => {
            let report = match replay {
                Some(path) => {
                    let text = fs::read_to_string(&path).map_err(|e| CliError::io(path.display().to_string(), e))?;
                    selfcheck::replay(&engine, &text)?
                }
                None => {
                    let checks = if check.is_empty() { Check::all() } else { check };
                    selfcheck::selfcheck(&engine, &SelfcheckOptions { m, trials, seed, checks, inject_fault })?
                }
            };
            emit(out.as_deref(), &report.text)?;
            if !report.passed() {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Serve { addr, dir } => {
            let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
            eprintln!("listening on http://{addr}");
            rt.block_on(eclosure_service::serve(addr, dir, engine))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
