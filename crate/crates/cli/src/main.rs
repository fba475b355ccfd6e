use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;
use toto_core::dynamics::{evaluate, render_trace, Status};
use toto_core::harness::selftest::run_selftest;
use toto_core::parse::parse_program;
use toto_core::program::Program;
use toto_core::syntax::TypingCtx;
use toto_core::typing::synthesize;

const EXIT_ERROR: u8 = 1;
const EXIT_STUCK: u8 = 2;
const EXIT_OUT_OF_FUEL: u8 = 3;
const EXIT_SELFTEST: u8 = 4;

#[derive(Parser)]
#[command(name = "toto", version, about = "Typecheck and run programs in the tagged-objects calculus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a program and print it back in canonical form.
    Parse { file: PathBuf },
    /// Print the synthesized type of the main term.
    Typecheck { file: PathBuf },
    /// Typecheck, then evaluate the main term.
    Eval {
        file: PathBuf,
        /// Print every reduction step.
        #[arg(long)]
        trace: bool,
        /// Maximum number of reduction steps.
        #[arg(long, default_value_t = 10_000)]
        fuel: u64,
        /// Print a single JSON object instead of text.
        #[arg(long)]
        json: bool,
        /// Evaluate even if the program does not typecheck.
        #[arg(long)]
        unchecked: bool,
    },
    /// Run differential subtyping, progress and preservation checks.
    Selftest {
        #[arg(long, default_value_t = 1000)]
        cases: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Depth of the type enumeration used for differential subtyping.
        #[arg(long, default_value_t = 3)]
        depth: usize,
    },
}

#[derive(Serialize)]
struct EvalJson {
    status: String,
    steps: usize,
    #[serde(rename = "type")]
    ty: Option<String>,
    term: String,
    store: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trace: Option<Vec<String>>,
}

fn fail(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_ERROR)
}

fn load(path: &Path) -> Result<Program, String> {
    let src = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    Program::parse(&src).map_err(|e| format!("{}: {e}", path.display()))
}

fn parse_cmd(path: &Path) -> ExitCode {
    let src = match std::fs::read_to_string(path) {
        Ok(s) => s,
        Err(e) => return fail(format!("{}: {e}", path.display())),
    };
    match parse_program(&src) {
        Ok(file) => {
            for d in &file.decls {
                match d.parent {
                    Some(p) => println!("tag {} : {} extends {};", d.id, d.body, p),
                    None => println!("tag {} : {};", d.id, d.body),
                }
            }
            println!("{}", file.main);
            ExitCode::SUCCESS
        }
        Err(e) => fail(format!("{}: {e}", path.display())),
    }
}

fn typecheck_cmd(path: &Path) -> ExitCode {
    let program = match load(path) {
        Ok(p) => p,
        Err(e) => return fail(e),
    };
    match synthesize(&TypingCtx::new(), &program.sigma, &program.main) {
        Ok(ty) => {
            println!("{ty}");
            ExitCode::SUCCESS
        }
        Err(e) => fail(format!("{}: {e}", path.display())),
    }
}

fn eval_cmd(path: &Path, trace: bool, fuel: u64, json: bool, unchecked: bool) -> ExitCode {
    let program = match load(path) {
        Ok(p) => p,
        Err(e) => return fail(e),
    };
    let ty = match synthesize(&TypingCtx::new(), &program.sigma, &program.main) {
        Ok(ty) => Some(ty),
        Err(e) if unchecked => {
            eprintln!("warning: {}: {e}", path.display());
            None
        }
        Err(e) => return fail(format!("{}: {e}", path.display())),
    };
    let eval = evaluate(program.store.clone(), program.main.clone(), fuel);
    let rendered = trace.then(|| render_trace(&program.store, &program.main, &eval));
    let code = match eval.status {
        Status::Value => ExitCode::SUCCESS,
        Status::Stuck(_) => ExitCode::from(EXIT_STUCK),
        Status::OutOfFuel => ExitCode::from(EXIT_OUT_OF_FUEL),
    };
    if json {
        let out = EvalJson {
            status: match &eval.status {
                Status::Value => "value".into(),
                Status::Stuck(reason) => format!("stuck: {reason}"),
                Status::OutOfFuel => "out_of_fuel".into(),
            },
            steps: eval.steps(),
            ty: ty.map(|t| t.to_string()),
            term: eval.term.to_string(),
            store: eval.store.entries().iter().map(ToString::to_string).collect(),
            trace: rendered.map(|r| r.lines().map(str::to_owned).collect()),
        };
        println!("{}", serde_json::to_string_pretty(&out).expect("plain data serializes"));
        return code;
    }
    if let Some(r) = rendered {
        print!("{r}");
    }
    match &eval.status {
        Status::Value => println!("value: {}", eval.term),
        Status::Stuck(reason) => println!("stuck ({reason}): {}", eval.term),
        Status::OutOfFuel => println!("out of fuel after {} steps: {}", eval.steps(), eval.term),
    }
    if let Some(t) = &ty {
        println!("type: {t}");
    }
    print!("store:\n{}", eval.store.dump());
    code
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Parse { file } => parse_cmd(&file),
        Command::Typecheck { file } => typecheck_cmd(&file),
        Command::Eval { file, trace, fuel, json, unchecked } => eval_cmd(&file, trace, fuel, json, unchecked),
        Command::Selftest { cases, seed, depth } => {
            let report = run_selftest(cases, seed, depth);
            print!("{}", report.render());
            if report.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_SELFTEST)
            }
        }
    }
}
