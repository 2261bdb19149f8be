//! `fmr`: typecheck, run, compare and law-check `.fmr` programs.
//!
//! Output is JSON by default; `--pretty` switches to a human-readable
//! rendering. Exit codes: 0 success, 1 type error or distinct verdict,
//! 2 timeout or unknown verdict, 64 usage error, 66 unreadable input.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use fmuref::bisim::{bisim_programs, verdict_json, Verdict};
use fmuref::corpus::{corpus, lookup};
use fmuref::lang::{parse, ParseError, Tm, Ty};
use fmuref::laws::run_laws;
use fmuref::semantics::{run_program, RunError, RunReport, Status};
use fmuref::typer::typecheck_closed;

const USAGE: u8 = 64;
const NO_INPUT: u8 = 66;

#[derive(Parser)]
#[command(
    name = "fmr",
    version,
    about = "Step-counting semantics for a language with higher-order references"
)]
struct Cli {
    /// Human-readable output instead of JSON.
    #[arg(long, global = true)]
    pretty: bool,
    /// JSON output (the default); overrides --pretty.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Typecheck a program and print its type.
    Check { file: PathBuf },
    /// Run a program of type `T τ` from the empty heap.
    Eval {
        file: PathBuf,
        /// Maximum number of abstract steps.
        #[arg(long, default_value_t = 10_000)]
        fuel: u64,
    },
    /// Check the store equations and monad laws on random instances.
    Laws {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Instances per law.
        #[arg(long, default_value_t = 200)]
        iters: usize,
    },
    /// Decide weak bisimilarity of two `T Int` programs up to a depth.
    Bisim {
        left: PathBuf,
        right: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        depth: u64,
    },
    /// List the built-in examples, print one, or write them all to a directory.
    Examples {
        name: Option<String>,
        #[arg(long, value_name = "DIR", conflicts_with = "name")]
        out: Option<PathBuf>,
    },
}

/// What a command prints and how it exits.
struct Report {
    json: Value,
    text: String,
    code: u8,
}

impl Report {
    fn new(json: Value, text: impl Into<String>, code: u8) -> Self {
        Report {
            json,
            text: text.into(),
            code,
        }
    }
}

enum Failure {
    Usage(String),
    NoInput(String),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(USAGE),
            };
        }
    };
    let pretty = cli.pretty && !cli.json;
    match run(cli.command) {
        Ok(r) => {
            if pretty {
                println!("{}", r.text.trim_end());
            } else {
                println!("{}", r.json);
            }
            ExitCode::from(r.code)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("fmr: {msg}");
            ExitCode::from(USAGE)
        }
        Err(Failure::NoInput(msg)) => {
            eprintln!("fmr: {msg}");
            ExitCode::from(NO_INPUT)
        }
    }
}

fn run(command: Command) -> Result<Report, Failure> {
    match command {
        Command::Check { file } => check(&file),
        Command::Eval { file, fuel } => eval(&file, fuel),
        Command::Laws { seed, iters } => {
            let r = run_laws(seed, iters);
            Ok(Report::new(
                r.to_json(),
                r.to_string(),
                if r.all_ok() { 0 } else { 1 },
            ))
        }
        Command::Bisim { left, right, depth } => bisim(&left, &right, depth),
        Command::Examples { name, out } => examples(name, out),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::NoInput(format!("{}: {e}", path.display())))
}

fn parse_error(path: &Path, e: &ParseError) -> Report {
    let json = json!({
        "kind": "ParseError",
        "message": e.to_string(),
        "span": { "line": e.line, "col": e.col },
        "expected": e.expected,
        "actual": e.found,
    });
    Report::new(json, format!("{}:{e}", path.display()), 1)
}

/// Read and parse, or produce the report for a parse error.
fn load(path: &Path) -> Result<Result<Tm, Report>, Failure> {
    let src = read(path)?;
    Ok(parse(&src).map_err(|e| parse_error(path, &e)))
}

fn run_error(path: &Path, e: &RunError) -> Report {
    let json = match e {
        RunError::Check(c) => c.to_json(),
        RunError::NotComputation(ty) => json!({
            "kind": "TypeError",
            "message": e.to_string(),
            "expected": "T _",
            "actual": ty.to_string(),
        }),
        RunError::Eval(_) => json!({ "kind": "EvalError", "message": e.to_string() }),
    };
    Report::new(json, format!("{}: {e}", path.display()), 1)
}

fn check(path: &Path) -> Result<Report, Failure> {
    let t = match load(path)? {
        Ok(t) => t,
        Err(r) => return Ok(r),
    };
    Ok(match typecheck_closed(&t) {
        Ok(ty) => Report::new(json!({ "type": ty.to_string() }), ty.to_string(), 0),
        Err(e) => run_error(path, &RunError::Check(e)),
    })
}

fn eval_text(r: &RunReport) -> String {
    let mut s = match (&r.status, &r.value) {
        (Status::Value, Some(v)) => format!("{v} : {} in {} steps\n", r.ty, r.steps),
        _ => format!("timeout after {} steps\n", r.steps),
    };
    for (i, v) in r.heap.iter() {
        let ty = r.world.get(i).map(|t| t.to_string()).unwrap_or_default();
        s.push_str(&format!("  loc {i} : {ty} = {v}\n"));
    }
    s
}

fn eval(path: &Path, fuel: u64) -> Result<Report, Failure> {
    let t = match load(path)? {
        Ok(t) => t,
        Err(r) => return Ok(r),
    };
    Ok(match run_program(&t, fuel) {
        Ok(r) => {
            let code = if r.status == Status::Value { 0 } else { 2 };
            Report::new(r.to_json(), eval_text(&r), code)
        }
        Err(e) => run_error(path, &e),
    })
}

fn bisim(left: &Path, right: &Path, depth: u64) -> Result<Report, Failure> {
    let (l, r) = match (load(left)?, load(right)?) {
        (Ok(l), Ok(r)) => (l, r),
        (Err(rep), _) | (_, Err(rep)) => return Ok(rep),
    };
    let (v, trace) = match bisim_programs(&l, &r, depth) {
        Ok(res) => res,
        Err(e) => {
            // Say which side is at fault.
            let left_ok = typecheck_closed(&l).is_ok_and(|t| t == Ty::comp(Ty::Int));
            let side = if left_ok { right } else { left };
            return Ok(run_error(side, &e));
        }
    };
    let code = match v {
        Verdict::Strong { .. } | Verdict::Weak { .. } => 0,
        Verdict::Distinct { .. } => 1,
        Verdict::Unknown { .. } => 2,
    };
    let mut text = match &v {
        Verdict::Strong { steps, value } => {
            format!("strong: both return {value} after {steps} steps")
        }
        Verdict::Weak {
            left_steps,
            right_steps,
            value,
        } => {
            format!("weak: both return {value}, left after {left_steps} steps, right after {right_steps}")
        }
        Verdict::Distinct {
            left,
            right,
            left_steps,
            right_steps,
        } => {
            format!("distinct: left returns {left} after {left_steps} steps, right returns {right} after {right_steps}")
        }
        Verdict::Unknown { depth } => format!("unknown: no verdict within depth {depth}"),
    };
    if let Some(t) = &trace {
        let atoms: Vec<String> = t.iter().map(|a| a.to_string()).collect();
        text.push_str(&format!("\ntrace: {}", atoms.join(", ")));
    }
    Ok(Report::new(verdict_json(&v, trace.as_ref()), text, code))
}

fn examples(name: Option<String>, out: Option<PathBuf>) -> Result<Report, Failure> {
    if let Some(dir) = out {
        fs::create_dir_all(&dir)
            .map_err(|e| Failure::NoInput(format!("{}: {e}", dir.display())))?;
        let mut written = Vec::new();
        for ex in corpus() {
            let path = dir.join(ex.file_name());
            let body = format!("-- {}\n-- : {}\n{}", ex.about, ex.ty, ex.source);
            fs::write(&path, body)
                .map_err(|e| Failure::NoInput(format!("{}: {e}", path.display())))?;
            written.push(path.display().to_string());
        }
        let text = format!("wrote {} files to {}", written.len(), dir.display());
        return Ok(Report::new(json!({ "written": written }), text, 0));
    }
    if let Some(name) = name {
        let ex =
            lookup(&name).ok_or_else(|| Failure::Usage(format!("no example named `{name}`")))?;
        let json =
            json!({ "name": ex.name, "type": ex.ty, "about": ex.about, "source": ex.source });
        return Ok(Report::new(json, ex.source.clone(), 0));
    }
    let all = corpus();
    let width = all.iter().map(|e| e.name.len()).max().unwrap_or(0);
    let text: Vec<String> = all
        .iter()
        .map(|e| format!("{:width$}  {}  ({})", e.name, e.ty, e.about))
        .collect();
    let json: Vec<Value> = all
        .iter()
        .map(|e| json!({ "name": e.name, "type": e.ty, "about": e.about }))
        .collect();
    Ok(Report::new(Value::Array(json), text.join("\n"), 0))
}
