//! The `altlf` command: compile a property, stream one verdict per prefix of
//! a trace, and optionally export the automata and constraint graphs.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};

use crate::dot;
use crate::error::Error;
use crate::formula::parse_property_file;
use crate::monitor::{Mode, Monitor, Options};
use crate::oracle::{BoundedOracle, ValueGrid};
use crate::trace::load_trace;

pub const EXIT_OK: i32 = 0;
/// An `--oracle-check` disagreement.
pub const EXIT_ORACLE_MISMATCH: i32 = 1;
pub const EXIT_FORMAT: i32 = 2;
pub const EXIT_UNSUPPORTED_GC: i32 = 3;
pub const EXIT_NODE_LIMIT: i32 = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Auto,
    Nolookahead,
    Summary,
    Mcz,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Jsonl,
}

#[derive(Debug, Parser)]
#[command(name = "altlf", version, about = "Anticipatory monitoring of temporal properties over linear arithmetic")]
pub struct Args {
    /// Property file: declarations followed by a formula.
    #[arg(long, value_name = "FILE")]
    pub property: PathBuf,
    /// Trace file, CSV or `.json`.
    #[arg(long, value_name = "FILE")]
    pub trace: PathBuf,
    #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
    pub mode: ModeArg,
    #[arg(long, value_name = "FILE.dot")]
    pub emit_dfa: Option<PathBuf>,
    #[arg(long, value_name = "FILE.dot")]
    pub emit_nfa: Option<PathBuf>,
    /// Constraint graph of a DFA state, e.g. `2:cg.dot`.
    #[arg(long, value_name = "STATE:FILE.dot")]
    pub emit_cg: Vec<String>,
    #[arg(long, value_name = "N", default_value_t = 10_000)]
    pub max_cg_nodes: usize,
    /// Compare every verdict with a bounded search over continuations.
    #[arg(long)]
    pub oracle_check: bool,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub output: OutputFormat,
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::UnsupportedGc => EXIT_UNSUPPORTED_GC,
        Error::NodeLimit(_) => EXIT_NODE_LIMIT,
        Error::Parse { .. } | Error::Trace(_) | Error::Usage(_) | Error::Io(_) => EXIT_FORMAT,
        Error::UnsupportedFragment(_) | Error::StateLimit(_) | Error::AtomLimit(..) => 1,
    }
}

fn parse_cg_target(s: &str) -> Result<(usize, PathBuf), Error> {
    let (state, file) =
        s.split_once(':').ok_or_else(|| Error::Usage(format!("--emit-cg `{s}`: expected STATE:FILE.dot")))?;
    let state =
        state.parse().map_err(|_| Error::Usage(format!("--emit-cg `{s}`: `{state}` is not a DFA state index")))?;
    Ok((state, PathBuf::from(file)))
}

fn read(path: &PathBuf, flag: &str) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| Error::Usage(format!("--{flag} {}: {e}", path.display())))
}

fn write_file(path: &PathBuf, text: &str, flag: &str) -> Result<(), Error> {
    std::fs::write(path, text).map_err(|e| Error::Usage(format!("--{flag} {}: {e}", path.display())))
}

/// Runs the command on already parsed arguments and returns the exit code.
pub fn run(args: &Args, out: &mut impl Write, err: &mut impl Write) -> i32 {
    match run_inner(args, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn run_inner(args: &Args, out: &mut impl Write, err: &mut impl Write) -> Result<i32, Error> {
    let cg_targets = args.emit_cg.iter().map(|s| parse_cg_target(s)).collect::<Result<Vec<_>, _>>()?;
    let prop = parse_property_file(&read(&args.property, "property")?).map_err(|e| match e {
        Error::Parse { line, col, msg } => Error::Usage(format!("{}:{line}:{col}: {msg}", args.property.display())),
        e => e,
    })?;
    let mode = match args.mode {
        ModeArg::Auto => None,
        ModeArg::Nolookahead => Some(Mode::NoLookahead),
        ModeArg::Summary => Some(Mode::Summary),
        ModeArg::Mcz => Some(Mode::Mcz),
    };
    let opts = Options { mode, node_limit: args.max_cg_nodes, ..Options::default() };
    let monitor = Monitor::new(&prop.formula, &prop.decls, &opts)?;
    // property errors take precedence over trace errors
    let trace = load_trace(&args.trace, &prop.decls).map_err(|e| match e {
        Error::Trace(m) => Error::Trace(format!("{}: {m}", args.trace.display())),
        e => e,
    })?;
    writeln!(err, "class {}, mode {}, {} DFA states", monitor.class, monitor.mode, monitor.automaton.dfa.len())?;
    if let Some(w) = &monitor.warning {
        writeln!(err, "warning: {w}")?;
    }
    if let Some(p) = &args.emit_nfa {
        write_file(p, &dot::nfa_dot(&monitor.automaton), "emit-nfa")?;
    }
    if let Some(p) = &args.emit_dfa {
        let labels = (monitor.mode == Mode::NoLookahead).then(|| monitor.automaton.dfa.reachability_labels());
        write_file(p, &dot::dfa_dot(&monitor.automaton, labels.as_deref()), "emit-dfa")?;
    }
    for (state, _) in &cg_targets {
        if *state >= monitor.automaton.dfa.len() {
            return Err(Error::Usage(format!(
                "--emit-cg: state {state} does not exist (the DFA has {} states)",
                monitor.automaton.dfa.len()
            )));
        }
    }

    let oracle = args
        .oracle_check
        .then(|| BoundedOracle::new(&prop.formula, &prop.decls, ValueGrid::adaptive(&prop.formula, &prop.decls), 4));
    let mut residual = oracle.as_ref().map(|o| o.initial());
    let mut code = EXIT_OK;
    let mut session = monitor.session();
    // last extended assignment seen in each DFA state, for per-assignment graphs
    let mut seen = vec![None; monitor.automaton.dfa.len()];
    if args.output == OutputFormat::Csv {
        writeln!(out, "index,verdict")?;
    }
    for (i, a) in trace.iter().enumerate() {
        let verdict = match session.step(a) {
            Ok(v) => Some(v),
            Err(Error::NodeLimit(n)) => {
                writeln!(err, "instant {i}: constraint graph exceeded {n} nodes, verdict UNKNOWN")?;
                code = code.max(EXIT_NODE_LIMIT);
                None
            }
            Err(e) => return Err(e),
        };
        seen[session.state()] = session.last_extended().cloned();
        let shown = verdict.map_or("UNKNOWN".to_string(), |v| v.to_string());
        match args.output {
            OutputFormat::Csv => writeln!(out, "{i},{shown}")?,
            OutputFormat::Jsonl => writeln!(out, "{}", serde_json::json!({"index": i, "verdict": shown}))?,
        }
        out.flush()?;
        if let (Some(o), Some(rho)) = (&oracle, residual.as_mut()) {
            let p = o.progress(rho, a);
            if let (Some(expected), Some(got)) = (o.verdict(&p), verdict) {
                if expected != got {
                    writeln!(err, "oracle mismatch at instant {i}: monitor {got}, bounded search {expected}")?;
                    if code == EXIT_OK {
                        code = EXIT_ORACLE_MISMATCH;
                    }
                }
            }
            *rho = o.residual(&p);
        }
    }

    for (state, path) in &cg_targets {
        let text = match monitor.mode {
            Mode::Mcz => {
                match &seen[*state] {
                    Some(a) => dot::cg_dot(&monitor.automaton, &*monitor.assignment_graph(*state, a)?),
                    None => {
                        writeln!(err, "warning: --emit-cg: the trace never reached state {state}; no assignment to seed its graph")?;
                        continue;
                    }
                }
            }
            _ => dot::cg_dot(&monitor.automaton, &monitor.summary(*state)?.graph),
        };
        write_file(path, &text, "emit-cg")?;
    }
    Ok(code)
}

/// Entry point of the binary.
pub fn main_with_args(argv: impl IntoIterator<Item = std::ffi::OsString>) -> i32 {
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_FORMAT } else { EXIT_OK };
        }
    };
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(&args, &mut stdout.lock(), &mut stderr.lock())
}
