//! Subcommand implementations. Each returns the process exit code or a
//! [`CliError`] carrying its own.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, BufReader};
use std::path::{Path, PathBuf};

use gp2_core::explorer::{
    audit_invariants, compare_semantics, explore as explore_space, konig_witness, outcomes,
    replay_lasso, AuditReport, ComparisonReport, StateSpace,
};
use gp2_core::graph::{parse_host_graph, serialize_host_graph, HostGraph};
use gp2_core::lexer::ParseError;
use gp2_core::outcome::{Bottom, Bounds, OutcomeSet, Stuck};
use gp2_core::program::{
    check_context_conditions, expand_procedures, parse_program, ContextError, ExpandError,
    ExpandedProgram,
};
use gp2_core::smallstep::{
    run_trace, Chooser, EngineError, ExtConfig, Machine, RunStatus, Strategy, TraceDocument,
};
use serde::Serialize;
use thiserror::Error;

use crate::interactive::Prompter;
use crate::{ExploreArgs, Format, Inputs, RunArgs, StrategyArg};

pub const EXIT_USAGE: u8 = 1;
const EXIT_CONTEXT: u8 = 2;
const EXIT_INTERNAL: u8 = 3;
const EXIT_VIOLATION: u8 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}:{source}", path.display())]
    Parse { path: PathBuf, source: ParseError },
    #[error(transparent)]
    Expand(#[from] ExpandError),
    #[error("context condition violated at {0}")]
    Context(#[from] ContextError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } | CliError::Parse { .. } => EXIT_USAGE,
            CliError::Expand(_) | CliError::Context(_) => EXIT_CONTEXT,
            CliError::Engine(_) | CliError::Internal(_) => EXIT_INTERNAL,
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn load_program(path: &Path) -> Result<ExpandedProgram, CliError> {
    let decl = parse_program(&read(path)?).map_err(|source| CliError::Parse {
        path: path.to_owned(),
        source,
    })?;
    let program = expand_procedures(&decl)?;
    check_context_conditions(&program.main)?;
    Ok(program)
}

fn load_graph(path: &Path) -> Result<HostGraph, CliError> {
    parse_host_graph(&read(path)?).map_err(|source| CliError::Parse {
        path: path.to_owned(),
        source,
    })
}

fn load(inputs: &Inputs) -> Result<(ExpandedProgram, HostGraph), CliError> {
    Ok((load_program(&inputs.program)?, load_graph(&inputs.graph)?))
}

fn emit_json(doc: &impl Serialize) {
    println!(
        "{}",
        serde_json::to_string_pretty(doc).expect("documents serialize")
    );
}

#[derive(Serialize)]
struct ParseDocument {
    main: String,
    rules: Vec<String>,
    graph: Option<String>,
}

pub fn parse(program: &Path, graph: Option<&Path>, format: Format) -> Result<u8, CliError> {
    let p = load_program(program)?;
    let graph = graph.map(load_graph).transpose()?;
    let doc = ParseDocument {
        main: p.main.to_string(),
        rules: p.rules.keys().cloned().collect(),
        graph: graph.as_ref().map(serialize_host_graph),
    };
    match format {
        Format::Json => emit_json(&doc),
        Format::Text => {
            println!("Main = {}", doc.main);
            println!("rules: {}", doc.rules.join(", "));
            if let Some(g) = doc.graph {
                println!("graph: {g}");
            }
        }
    }
    Ok(0)
}

#[derive(Serialize)]
struct RunDocument {
    status: RunStatus,
    steps: usize,
    /// The final graph when the run terminated with one.
    graph: Option<String>,
    fail: bool,
    trace: Option<TraceDocument>,
}

pub fn run(args: &RunArgs) -> Result<u8, CliError> {
    let (program, g) = load(&args.inputs)?;
    let machine = Machine::new(&program);
    let start = machine.initial(g)?;
    let mut chooser: Box<dyn Chooser> = match args.strategy {
        StrategyArg::First => Strategy::First.chooser(),
        StrategyArg::Random(seed) => Strategy::Random(seed).chooser(),
        StrategyArg::Interactive => {
            Box::new(Prompter::new(BufReader::new(io::stdin()), io::stderr()))
        }
    };
    let trace = run_trace(&machine, start, &mut *chooser, args.fuel.get())?;
    let steps = trace.steps.len();
    let (graph, fail) = match trace.last() {
        ExtConfig::Stack(s) if trace.status == RunStatus::Terminated => {
            (Some(serialize_host_graph(s.top().graph())), false)
        }
        ExtConfig::Fail => (None, true),
        _ => (None, false),
    };
    if trace.status == RunStatus::Stuck {
        return Err(CliError::Internal(format!(
            "no successor for {}",
            trace.last()
        )));
    }
    match args.inputs.format {
        Format::Json => emit_json(&RunDocument {
            status: trace.status,
            steps,
            graph,
            fail,
            trace: args.trace.then(|| trace.document()),
        }),
        Format::Text => {
            if args.trace || trace.status == RunStatus::Aborted {
                eprint!("{}", trace.to_text());
            }
            match (trace.status, graph) {
                (RunStatus::Cutoff, _) => println!("cutoff after {steps} steps"),
                (RunStatus::Aborted, _) => println!("aborted after {steps} steps"),
                (_, Some(g)) => println!("{g}"),
                (_, None) => println!("fail"),
            }
        }
    }
    Ok(0)
}

fn bounds(args: &ExploreArgs) -> Bounds {
    Bounds {
        max_states: args.max_states.get(),
        max_depth: args.max_depth.get(),
        old_fuel: args.old_fuel.get(),
        parallel: args.parallel,
    }
}

fn write_dot(args: &ExploreArgs, space: &StateSpace) -> Result<(), CliError> {
    if let Some(path) = &args.dot {
        fs::write(path, space.to_dot()).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
    }
    Ok(())
}

fn kebab(v: &impl Serialize) -> String {
    match serde_json::to_value(v) {
        Ok(serde_json::Value::String(s)) => s,
        other => format!("{other:?}"),
    }
}

fn outcome_text(out: &OutcomeSet) -> String {
    let mut text = String::new();
    for g in &out.graphs {
        let _ = writeln!(text, "graph {g}");
    }
    if out.fail {
        text.push_str("fail\n");
    }
    if out.bottom != Bottom::Absent {
        let _ = writeln!(text, "bottom {}", kebab(&out.bottom));
    }
    if out.stuck != Stuck::None {
        let _ = writeln!(text, "stuck {}", kebab(&out.stuck));
    }
    if out.exhausted {
        text.push_str("exhausted\n");
    }
    text
}

pub fn explore(args: &ExploreArgs) -> Result<u8, CliError> {
    let (program, g) = load(&args.inputs)?;
    let machine = Machine::new(&program);
    let space = explore_space(&machine, machine.initial(g)?, &bounds(args))?;
    write_dot(args, &space)?;
    let out = outcomes(&space);
    match args.inputs.format {
        Format::Json => emit_json(&out),
        Format::Text => print!("{}", outcome_text(&out)),
    }
    Ok(0)
}

fn comparison_text(r: &ComparisonReport) -> String {
    let mut text = String::new();
    for m in &r.outcomes {
        let side = match (m.old, m.new) {
            (true, true) => "both",
            (true, false) => "old ",
            (false, true) => "new ",
            (false, false) => continue,
        };
        let _ = writeln!(text, "{side} {}", m.outcome);
    }
    let _ = writeln!(text, "closed {}", r.closed);
    let _ = writeln!(text, "contained {}", r.contained);
    let _ = writeln!(text, "equal-excluding-bottom {}", r.equal_excluding_bottom);
    for v in &r.violations {
        let _ = writeln!(text, "violation {v}");
    }
    text
}

pub fn compare(args: &ExploreArgs) -> Result<u8, CliError> {
    let (program, g) = load(&args.inputs)?;
    let b = bounds(args);
    if args.dot.is_some() {
        let machine = Machine::new(&program);
        write_dot(
            args,
            &explore_space(&machine, machine.initial(g.clone())?, &b)?,
        )?;
    }
    let report = compare_semantics(&program, g, &b)?;
    match args.inputs.format {
        Format::Json => emit_json(&report),
        Format::Text => print!("{}", comparison_text(&report)),
    }
    Ok(if report.closed && report.has_violation() {
        EXIT_VIOLATION
    } else {
        0
    })
}

#[derive(Serialize)]
struct LassoDocument {
    stem: Vec<usize>,
    cycle: Vec<usize>,
    replays: bool,
}

#[derive(Serialize)]
struct AuditDocument {
    #[serde(flatten)]
    report: AuditReport,
    exhausted: bool,
    lasso: Option<LassoDocument>,
}

pub fn audit(args: &ExploreArgs) -> Result<u8, CliError> {
    let (program, g) = load(&args.inputs)?;
    let machine = Machine::new(&program);
    let space = explore_space(&machine, machine.initial(g)?, &bounds(args))?;
    write_dot(args, &space)?;
    let report = audit_invariants(&machine, &space)?;
    let lasso = match konig_witness(&space) {
        Some(l) => Some(LassoDocument {
            replays: replay_lasso(&machine, &space, &l)?,
            stem: l.stem,
            cycle: l.cycle,
        }),
        None => None,
    };
    let passed = report.passed() && lasso.as_ref().is_none_or(|l| l.replays);
    let doc = AuditDocument {
        report,
        exhausted: space.frontier_exhausted,
        lasso,
    };
    match args.inputs.format {
        Format::Json => emit_json(&doc),
        Format::Text => {
            println!("states {}", doc.report.states_checked);
            println!("max-out-degree {}", doc.report.max_out_degree);
            for v in &doc.report.violations {
                println!(
                    "violation {} at state {}: {}",
                    kebab(&v.kind),
                    v.state,
                    v.detail
                );
            }
            if let Some(l) = &doc.lasso {
                println!(
                    "lasso stem {} cycle {} replays {}",
                    l.stem.len(),
                    l.cycle.len(),
                    l.replays
                );
            }
            if doc.exhausted {
                println!("exhausted");
            }
        }
    }
    Ok(if passed { 0 } else { EXIT_INTERNAL })
}
