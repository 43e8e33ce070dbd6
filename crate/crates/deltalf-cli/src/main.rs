//! Command-line interface: batch checking, a line-based REPL, standalone
//! evaluation, and the metatheory suites.
//!
//! Exit codes: 0 success, 1 type error, 2 parse/resolution/io error,
//! 3 budget exhausted.

use clap::{Parser, Subcommand};
use deltalf::metacheck::run_suites;
use deltalf::parser::{elaborate_permissive, parse_term};
use deltalf::printer::print_term;
use deltalf::reduction::normalize_traced;
use deltalf::session::{error_json, Session, SessionError};
use std::io::{BufRead, Write};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "deltalf", version, about = "Checker and REPL for a logical framework with strong intersection and union types")]
struct Cli {
    /// Reduction step budget for normalization
    #[arg(long, global = true)]
    fuel: Option<usize>,
    /// Beta budget for essence comparisons
    #[arg(long, global = true)]
    essence_fuel: Option<usize>,
    /// Machine-readable error output
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check one or more .dlf files
    Check {
        files: Vec<PathBuf>,
        /// Print coercion terms for Subtype commands
        #[arg(long)]
        emit_coercion: bool,
    },
    /// Interactive session
    Repl,
    /// Evaluate a single expression to normal form
    Eval {
        #[arg(short = 'e', long = "expr")]
        expr: String,
        /// Print each reduction step with its rule and position
        #[arg(long)]
        trace: bool,
    },
    /// Run the metatheory property suites
    Metacheck {
        #[arg(long, default_value_t = 200)]
        seeds: u64,
        #[arg(long, default_value_t = 10)]
        size: usize,
    },
}

fn exit_for(e: &SessionError) -> ExitCode {
    if e.is_fuel() {
        return ExitCode::from(3);
    }
    match e {
        SessionError::Kernel(_) => ExitCode::from(1),
        _ => ExitCode::from(2),
    }
}

fn report(e: &SessionError, json: bool) {
    if json {
        println!("{}", error_json(e));
    } else {
        eprintln!("{e}");
    }
}

fn new_session(cli: &Cli) -> Session {
    let mut s = Session::new();
    if let Some(f) = cli.fuel {
        s.checker.reduction_fuel = f;
    }
    if let Some(f) = cli.essence_fuel {
        s.checker.essence_fuel = f;
    }
    s
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.cmd {
        Cmd::Check {
            files,
            emit_coercion,
        } => {
            if files.is_empty() {
                eprintln!("no input files");
                return ExitCode::from(2);
            }
            for file in files {
                let src = match std::fs::read_to_string(file) {
                    Ok(s) => s,
                    Err(e) => {
                        report(
                            &SessionError::Io(format!("{}: {e}", file.display())),
                            cli.json,
                        );
                        return ExitCode::from(2);
                    }
                };
                let mut session = new_session(&cli);
                session.emit_coercion = *emit_coercion;
                if let Some(dir) = file.parent() {
                    session.base_dir = dir.to_path_buf();
                }
                match session.run_source(&src) {
                    Ok(out) => {
                        for line in out.lines {
                            println!("{line}");
                        }
                        println!("{}: ok", file.display());
                    }
                    Err(e) => {
                        if !cli.json {
                            eprintln!("{}: error", file.display());
                        }
                        report(&e, cli.json);
                        return exit_for(&e);
                    }
                }
            }
            ExitCode::SUCCESS
        }
        Cmd::Repl => {
            let mut session = new_session(&cli);
            let stdin = std::io::stdin();
            let mut code = ExitCode::SUCCESS;
            print!("dlf> ");
            std::io::stdout().flush().ok();
            for line in stdin.lock().lines() {
                let line = match line {
                    Ok(l) => l,
                    Err(_) => break,
                };
                if !line.trim().is_empty() {
                    match session.run_source(&line) {
                        Ok(out) => {
                            for l in out.lines {
                                println!("{l}");
                            }
                            if out.quit {
                                return ExitCode::SUCCESS;
                            }
                        }
                        Err(e) => {
                            report(&e, cli.json);
                            // keep the session alive; remember the failure
                            code = exit_for(&e);
                        }
                    }
                }
                print!("dlf> ");
                std::io::stdout().flush().ok();
            }
            code
        }
        Cmd::Eval { expr, trace } => {
            let session = new_session(&cli);
            let st = match parse_term(expr) {
                Ok(t) => t,
                Err(e) => {
                    report(&SessionError::Parse(e), cli.json);
                    return ExitCode::from(2);
                }
            };
            // standalone evaluation is untyped: names need no declaration
            let t = match elaborate_permissive(&session.signature, &st) {
                Ok(t) => t,
                Err(e) => {
                    report(&SessionError::Elab(e), cli.json);
                    return ExitCode::from(2);
                }
            };
            match normalize_traced(&t, session.checker.reduction_fuel) {
                Ok((nf, steps)) => {
                    if *trace {
                        for r in &steps {
                            let path = if r.path.is_empty() {
                                "root".to_string()
                            } else {
                                r.path
                                    .iter()
                                    .map(|i| i.to_string())
                                    .collect::<Vec<_>>()
                                    .join(".")
                            };
                            println!("{} at {}", r.rule, path);
                        }
                    }
                    println!("{}", print_term(&nf));
                    ExitCode::SUCCESS
                }
                Err(_) => {
                    eprintln!("fuel exhausted");
                    ExitCode::from(3)
                }
            }
        }
        Cmd::Metacheck { seeds, size } => {
            let r = run_suites(*seeds, *size);
            print!("{r}");
            if r.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
    }
}
