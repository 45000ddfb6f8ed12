//! Command-line front end for `unitres`.
//!
//! Exit codes: 0 on success, 1 when a check fails, 2 on usage or input errors.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use thiserror::Error;
use unitres::{
    check_monotone, circuit_to_propagator, dimacs, eval_filtering, extract_circuit,
    failed_literal_formula, propagate, propagate_staged, reify, reify_injected, run_suite,
    tabulate, Circuit, Clause, CnfFormula, Literal, MatchingOutcome, PartialAssignment, Propagator,
    SymbolTable, Table, Var,
};

#[derive(Debug, Parser)]
#[command(
    name = "unitres",
    version,
    about = "Unit resolution as a model of computation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run unit propagation on a DIMACS formula
    Propagate {
        cnf: PathBuf,
        /// Print the literals produced at each stage
        #[arg(long)]
        trace: bool,
    },
    /// Write the role-tagged reified formula
    Reify {
        cnf: PathBuf,
        /// Comma-separated variables to inject
        #[arg(long, value_delimiter = ',')]
        inject: Option<Vec<String>>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Probe a literal directly and through the reified simulation
    FailedLiteral {
        cnf: PathBuf,
        /// Literal such as `a`, `-a` or `-3`
        #[arg(long, allow_hyphen_values = true)]
        literal: String,
    },
    /// Evaluate a propagator on one input
    Eval {
        prop: PathBuf,
        /// Assignment such as `v1=1,v2=x`
        #[arg(long, default_value = "")]
        assign: String,
    },
    /// Tabulate a propagator over every input as CSV
    Tabulate {
        prop: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Compile a monotone circuit into a propagator
    CompileCircuit {
        circuit: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Extract a monotone circuit from a propagator
    ExtractCircuit {
        prop: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run a verification suite, or `all`
    Verify {
        suite: String,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        count: usize,
        /// Report every instance instead of stopping at the first failure
        #[arg(long)]
        keep_going: bool,
    },
    /// Check a propagator or a CSV table for monotonicity
    CheckMonotone { input: PathBuf },
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Input {
        path: PathBuf,
        source: unitres::Error,
    },
    #[error(transparent)]
    Library(#[from] unitres::Error),
    #[error("{0}")]
    Usage(String),
    #[error("writing output: {0}")]
    Output(#[from] std::io::Error),
}

type CliResult<T> = std::result::Result<T, CliError>;

enum Status {
    Ok,
    CheckFailed,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(Status::Ok) => 0,
        Ok(Status::CheckFailed) => 1,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn load<T>(path: &Path, parse: impl FnOnce(&str) -> unitres::Result<T>) -> CliResult<T> {
    parse(&read(path)?).map_err(|source| CliError::Input {
        path: path.to_path_buf(),
        source,
    })
}

fn emit(text: &str, output: Option<&Path>, out: &mut dyn Write) -> CliResult<()> {
    match output {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        }),
        None => Ok(out.write_all(text.as_bytes())?),
    }
}

fn resolve_var(names: &SymbolTable, universe: &CnfFormula, text: &str) -> CliResult<Var> {
    let var = match text.parse::<u32>() {
        Ok(id) => Var::try_new(id),
        Err(_) => names.lookup(text),
    };
    var.filter(|v| universe.variables().contains(v))
        .ok_or_else(|| CliError::Usage(format!("unknown variable `{text}`")))
}

fn resolve_literal(f: &CnfFormula, text: &str) -> CliResult<Literal> {
    let (positive, body) = match text.strip_prefix('-').or_else(|| text.strip_prefix('~')) {
        Some(rest) => (false, rest),
        None => (true, text),
    };
    Ok(Literal::new(resolve_var(f.names(), f, body)?, positive))
}

fn show(names: &SymbolTable, lits: impl IntoIterator<Item = Literal>) -> String {
    lits.into_iter()
        .map(|l| names.literal(l))
        .collect::<Vec<_>>()
        .join(" ")
}

fn execute(command: Command, out: &mut dyn Write) -> CliResult<Status> {
    match command {
        Command::Propagate { cnf, trace } => {
            let f = load(&cnf, dimacs::parse_formula)?;
            let r = propagate_staged(&f);
            if trace {
                for k in 1..=r.rounds() {
                    writeln!(
                        out,
                        "U{k}: {}",
                        show(f.names(), r.stage_from_one(k).iter().copied())
                    )?;
                }
            }
            if r.is_bottom() {
                writeln!(out, "UNSAT(UP)")?;
            } else {
                writeln!(out, "{}", show(f.names(), r.in_order()))?;
            }
        }
        Command::Reify {
            cnf,
            inject,
            output,
        } => {
            let f = load(&cnf, dimacs::parse_formula)?;
            let sigma = match inject {
                None => reify(&f),
                Some(vars) => {
                    let inputs = vars
                        .iter()
                        .map(|v| resolve_var(f.names(), &f, v.trim()))
                        .collect::<CliResult<_>>()?;
                    reify_injected(&f, &inputs)?
                }
            };
            emit(&sigma.to_dimacs(), output.as_deref(), out)?;
        }
        Command::FailedLiteral { cnf, literal } => {
            let f = load(&cnf, dimacs::parse_formula)?;
            let probe = resolve_literal(&f, &literal)?;
            let mut probed = f.clone();
            probed.add_clause(Clause::unit(probe));
            let direct = propagate(&probed).is_bottom();
            let (g, target) = failed_literal_formula(&f, probe);
            let reified = propagate(&g).produced().contains(&target);
            let verdict = |fails| if fails { "fails" } else { "holds" };
            writeln!(out, "direct: {}", verdict(direct))?;
            writeln!(out, "reified: {}", verdict(reified))?;
            writeln!(
                out,
                "agree: {}",
                if direct == reified { "yes" } else { "no" }
            )?;
            if direct != reified {
                return Ok(Status::CheckFailed);
            }
        }
        Command::Eval { prop, assign } => {
            let p = load(&prop, Propagator::from_dimacs)?;
            let a = PartialAssignment::parse(&assign, p.inputs(), p.formula().names())?;
            writeln!(out, "{}", eval_filtering(&p, &a)?)?;
        }
        Command::Tabulate { prop, output } => {
            let p = load(&prop, Propagator::from_dimacs)?;
            emit(&tabulate(&p)?.to_csv(), output.as_deref(), out)?;
        }
        Command::CompileCircuit { circuit, output } => {
            let c = load(&circuit, Circuit::from_text)?;
            if c.inputs().len() % 2 != 0 {
                return Err(CliError::Usage(
                    "a circuit needs an even number of inputs".into(),
                ));
            }
            let vars: Vec<Var> = (1..=(c.inputs().len() / 2) as u32).map(Var::new).collect();
            let p = circuit_to_propagator(&c, &vars)?;
            emit(&p.to_dimacs(), output.as_deref(), out)?;
        }
        Command::ExtractCircuit { prop, output } => {
            let p = load(&prop, Propagator::from_dimacs)?;
            emit(
                &extract_circuit(&p).circuit.to_text(),
                output.as_deref(),
                out,
            )?;
        }
        Command::Verify {
            suite,
            seed,
            count,
            keep_going,
        } => {
            let results = run_suite(&suite, seed, count)?;
            let mut failed = false;
            for r in &results {
                writeln!(out, "{r}")?;
                if !r.passed() {
                    failed = true;
                    if !keep_going {
                        break;
                    }
                }
            }
            if failed {
                return Ok(Status::CheckFailed);
            }
        }
        Command::CheckMonotone { input } => {
            let text = read(&input)?;
            let table = if text.starts_with("assignment,") {
                load(&input, Table::<MatchingOutcome>::from_csv)?
            } else {
                let p = load(&input, Propagator::from_dimacs)?;
                tabulate(&p)?.to_matching()?
            };
            match check_monotone(&table) {
                None => writeln!(out, "monotone")?,
                Some(cx) => {
                    writeln!(out, "{}", cx.describe(table.names()))?;
                    return Ok(Status::CheckFailed);
                }
            }
        }
    }
    Ok(Status::Ok)
}
