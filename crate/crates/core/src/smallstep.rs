//! Small-step semantics over graph stacks.
//!
//! A configuration is a command with a stack of host graphs, a final stack,
//! or `fail`. Entering an `if` or `try` duplicates the top of the stack and
//! turns the statement into an auxiliary `ITE`/`TRY` whose condition then
//! runs step by step; leaving it pops either the condition's result or the
//! backup copy. Loops unfold into `try P then P! else skip`.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::graph::{serialize_host_graph, HostGraph, KeyedGraph};
use crate::program::{Command, ExpandedProgram, Level};
use crate::rule::{apply_rule_set, Rule, RuleError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Rule(#[from] RuleError),
    #[error("unknown rule `{0}`")]
    UnknownRule(String),
    #[error("procedure call `{0}` was not expanded")]
    Unexpanded(String),
    #[error("internal invariant violated: {0} on a stack of size {1}")]
    StackUnderflow(&'static str, usize),
    #[error("`{0}` must be positive")]
    NonPositive(&'static str),
    #[error("auxiliary command `{0}` in the old semantics")]
    Auxiliary(String),
}

pub type Cmd = Arc<ExtCommand>;

/// Commands extended with the auxiliary `ITE` and `TRY` constructs.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ExtCommand {
    Call(Vec<String>),
    Loop(Cmd),
    If {
        cond: Cmd,
        then: Cmd,
        els: Option<Cmd>,
    },
    Try {
        cond: Cmd,
        then: Option<Cmd>,
        els: Option<Cmd>,
    },
    Or(Cmd, Cmd),
    /// Right-nested: the first component is never a sequence.
    Seq(Cmd, Cmd),
    Break,
    Skip,
    Fail,
    Ite(Cmd, Cmd, Cmd),
    TryAux(Cmd, Cmd, Cmd),
}

impl ExtCommand {
    pub fn from_command(c: &Command) -> Result<Cmd, EngineError> {
        let sub = |c: &Command| ExtCommand::from_command(c);
        let opt = |c: &Option<Box<Command>>| c.as_deref().map(ExtCommand::from_command).transpose();
        Ok(Arc::new(match c {
            Command::Call(n) => ExtCommand::Call(n.clone()),
            Command::ProcCall(p) => return Err(EngineError::Unexpanded(p.clone())),
            Command::Loop(b) => ExtCommand::Loop(sub(b)?),
            Command::If { cond, then, els } => ExtCommand::If {
                cond: sub(cond)?,
                then: sub(then)?,
                els: opt(els)?,
            },
            Command::Try { cond, then, els } => ExtCommand::Try {
                cond: sub(cond)?,
                then: opt(then)?,
                els: opt(els)?,
            },
            Command::Or(a, b) => ExtCommand::Or(sub(a)?, sub(b)?),
            Command::Seq(a, b) => return Ok(seq(sub(a)?, sub(b)?)),
            Command::Break => ExtCommand::Break,
            Command::Skip => ExtCommand::Skip,
            Command::Fail => ExtCommand::Fail,
        }))
    }

    /// Number of `ITE` and `TRY` constructs in the command.
    pub fn count_aux(&self) -> usize {
        let inner = |c: &Cmd| c.count_aux();
        let opt = |c: &Option<Cmd>| c.as_ref().map_or(0, |c| c.count_aux());
        match self {
            ExtCommand::Ite(a, b, c) | ExtCommand::TryAux(a, b, c) => {
                1 + inner(a) + inner(b) + inner(c)
            }
            ExtCommand::Loop(b) => inner(b),
            ExtCommand::If { cond, then, els } => inner(cond) + inner(then) + opt(els),
            ExtCommand::Try { cond, then, els } => inner(cond) + opt(then) + opt(els),
            ExtCommand::Or(a, b) | ExtCommand::Seq(a, b) => inner(a) + inner(b),
            ExtCommand::Call(_) | ExtCommand::Break | ExtCommand::Skip | ExtCommand::Fail => 0,
        }
    }

    /// The subterm that the next step rewrites, found by descending through
    /// sequences and auxiliary conditions.
    pub fn redex(&self) -> &ExtCommand {
        match self {
            ExtCommand::Seq(a, _) if **a != ExtCommand::Break => a.redex(),
            ExtCommand::Ite(c, _, _) => c.redex(),
            ExtCommand::TryAux(c, p, q)
                if !(**c == ExtCommand::Break
                    && matches!(**p, ExtCommand::Loop(_))
                    && **q == ExtCommand::Skip) =>
            {
                c.redex()
            }
            other => other,
        }
    }
}

/// `first; rest`, re-associated to the right.
pub fn seq(first: Cmd, rest: Cmd) -> Cmd {
    match &*first {
        ExtCommand::Seq(a, b) => seq(a.clone(), seq(b.clone(), rest)),
        _ => Arc::new(ExtCommand::Seq(first, rest)),
    }
}

fn level(c: &ExtCommand) -> Level {
    match c {
        ExtCommand::Seq(..) => Level::Seq,
        ExtCommand::If { .. } | ExtCommand::Try { .. } => Level::Command,
        ExtCommand::Or(..) => Level::Block,
        _ => Level::Primary,
    }
}

struct At<'a>(&'a ExtCommand, Level);

impl fmt::Display for At<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let At(cmd, need) = *self;
        if level(cmd) < need {
            return write!(f, "({})", At(cmd, Level::Seq));
        }
        match cmd {
            ExtCommand::Call(names) if names.len() == 1 => f.write_str(&names[0]),
            ExtCommand::Call(names) => write!(f, "{{{}}}", names.join(", ")),
            ExtCommand::Loop(body) => match **body {
                ExtCommand::Call(_) => write!(f, "{}!", At(body, Level::Primary)),
                _ => write!(f, "({})!", At(body, Level::Seq)),
            },
            ExtCommand::If { cond, then, els } => {
                write!(
                    f,
                    "if {} then {}",
                    At(cond, Level::Block),
                    At(then, Level::Block)
                )?;
                if let Some(e) = els {
                    write!(f, " else {}", At(e, Level::Block))?;
                }
                Ok(())
            }
            ExtCommand::Try { cond, then, els } => {
                write!(f, "try {}", At(cond, Level::Block))?;
                if let Some(t) = then {
                    write!(f, " then {}", At(t, Level::Block))?;
                }
                if let Some(e) = els {
                    write!(f, " else {}", At(e, Level::Block))?;
                }
                Ok(())
            }
            ExtCommand::Or(a, b) => {
                write!(f, "{} or {}", At(a, Level::Primary), At(b, Level::Block))
            }
            ExtCommand::Seq(a, b) => write!(f, "{}; {}", At(a, Level::Command), At(b, Level::Seq)),
            ExtCommand::Break => f.write_str("break"),
            ExtCommand::Skip => f.write_str("skip"),
            ExtCommand::Fail => f.write_str("fail"),
            ExtCommand::Ite(c, p, q) | ExtCommand::TryAux(c, p, q) => {
                let name = if matches!(cmd, ExtCommand::Ite(..)) {
                    "ITE"
                } else {
                    "TRY"
                };
                write!(
                    f,
                    "{name}({}, {}, {})",
                    At(c, Level::Seq),
                    At(p, Level::Seq),
                    At(q, Level::Seq)
                )
            }
        }
    }
}

impl fmt::Display for ExtCommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        At(self, Level::Seq).fmt(f)
    }
}

/// A non-empty stack of host graphs. Position 0 of [`GraphStack::iter`] is
/// the top.
#[derive(Clone, Debug)]
pub struct GraphStack(Vec<Arc<KeyedGraph>>);

impl GraphStack {
    pub fn new(g: HostGraph) -> Self {
        GraphStack(vec![Arc::new(KeyedGraph::new(g))])
    }

    pub fn from_graphs(top_first: Vec<Arc<KeyedGraph>>) -> Self {
        let mut v = top_first;
        v.reverse();
        GraphStack(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn top(&self) -> &Arc<KeyedGraph> {
        self.0.last().expect("graph stacks are non-empty")
    }

    /// Graphs from the top down.
    pub fn iter(&self) -> impl Iterator<Item = &Arc<KeyedGraph>> {
        self.0.iter().rev()
    }

    pub fn push(&self, g: Arc<KeyedGraph>) -> Self {
        let mut v = self.0.clone();
        v.push(g);
        GraphStack(v)
    }

    pub fn pop(&self) -> Result<Self, EngineError> {
        if self.0.len() < 2 {
            return Err(EngineError::StackUnderflow("pop", self.0.len()));
        }
        Ok(GraphStack(self.0[..self.0.len() - 1].to_vec()))
    }

    pub fn pop2(&self) -> Result<Self, EngineError> {
        let n = self.0.len();
        if n < 2 {
            return Err(EngineError::StackUnderflow("pop2", n));
        }
        let mut v = self.0.clone();
        v.remove(n - 2);
        Ok(GraphStack(v))
    }

    /// `push(g, pop(S))` without the intermediate stack.
    fn replace_top(&self, g: Arc<KeyedGraph>) -> Self {
        let mut v = self.0.clone();
        *v.last_mut().expect("graph stacks are non-empty") = g;
        GraphStack(v)
    }

    /// Canonical keys from the top down.
    pub fn keys(&self) -> Vec<String> {
        self.iter().map(|g| g.key().to_string()).collect()
    }
}

impl fmt::Display for GraphStack {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, g) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            f.write_str(&serialize_host_graph(g.graph()))?;
        }
        f.write_str("]")
    }
}

#[derive(Clone, Debug)]
pub enum ExtConfig {
    Running(Cmd, GraphStack),
    Stack(GraphStack),
    Fail,
}

/// Identity of a configuration: the command term and the canonical keys of
/// the stack, top first.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ConfigKey {
    Running(Cmd, Vec<String>),
    Stack(Vec<String>),
    Fail,
}

impl ExtConfig {
    pub fn initial(c: &Command, g: HostGraph) -> Result<Self, EngineError> {
        Ok(ExtConfig::Running(
            ExtCommand::from_command(c)?,
            GraphStack::new(g),
        ))
    }

    pub fn is_terminal(&self) -> bool {
        !matches!(self, ExtConfig::Running(..))
    }

    pub fn stack(&self) -> Option<&GraphStack> {
        match self {
            ExtConfig::Running(_, s) | ExtConfig::Stack(s) => Some(s),
            ExtConfig::Fail => None,
        }
    }

    pub fn key(&self) -> ConfigKey {
        match self {
            ExtConfig::Running(c, s) => ConfigKey::Running(c.clone(), s.keys()),
            ExtConfig::Stack(s) => ConfigKey::Stack(s.keys()),
            ExtConfig::Fail => ConfigKey::Fail,
        }
    }
}

impl fmt::Display for ExtConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtConfig::Running(c, s) => write!(f, "<{c}, {s}>"),
            ExtConfig::Stack(s) => write!(f, "{s}"),
            ExtConfig::Fail => f.write_str("fail"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Inference {
    Call1,
    Call2,
    Seq1,
    Seq2,
    Seq3,
    Break,
    Alap1,
    Alap2,
    If1,
    If2,
    If3,
    If4,
    If5,
    Try1,
    Try2,
    Try3,
    Try4,
    Try5,
    Try6,
    Try7,
    Or1,
    Or2,
    Skip,
    Fail,
}

impl Inference {
    pub fn name(self) -> &'static str {
        use Inference::*;
        match self {
            Call1 => "call1",
            Call2 => "call2",
            Seq1 => "seq1",
            Seq2 => "seq2",
            Seq3 => "seq3",
            Break => "break",
            Alap1 => "alap1",
            Alap2 => "alap2",
            If1 => "if1",
            If2 => "if2",
            If3 => "if3",
            If4 => "if4",
            If5 => "if5",
            Try1 => "try1",
            Try2 => "try2",
            Try3 => "try3",
            Try4 => "try4",
            Try5 => "try5",
            Try6 => "try6",
            Try7 => "try7",
            Or1 => "or1",
            Or2 => "or2",
            Skip => "skip",
            Fail => "fail",
        }
    }
}

/// The applied inference rule with its chain of premises, innermost first:
/// `call1/seq2/try2` is a `try2` step whose premise is a `seq2` step whose
/// premise is a `call1` step.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StepLabel(pub Vec<Inference>);

impl StepLabel {
    fn axiom(r: Inference) -> Self {
        StepLabel(vec![r])
    }

    fn under(mut self, r: Inference) -> Self {
        self.0.push(r);
        self
    }
}

impl fmt::Display for StepLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.0.iter().map(|r| r.name()).collect();
        f.write_str(&names.join("/"))
    }
}

pub type Successor = (StepLabel, ExtConfig);

/// The transition relation of an expanded program.
pub struct Machine<'p> {
    program: &'p ExpandedProgram,
}

impl<'p> Machine<'p> {
    pub fn new(program: &'p ExpandedProgram) -> Self {
        Machine { program }
    }

    pub fn program(&self) -> &'p ExpandedProgram {
        self.program
    }

    pub fn initial(&self, g: HostGraph) -> Result<ExtConfig, EngineError> {
        ExtConfig::initial(&self.program.main, g)
    }

    fn rules(&self, names: &[String]) -> Result<Vec<&'p Rule>, EngineError> {
        names
            .iter()
            .map(|n| {
                self.program
                    .rules
                    .get(n)
                    .map(|r| r.as_ref())
                    .ok_or_else(|| EngineError::UnknownRule(n.clone()))
            })
            .collect()
    }

    /// Graphs a rule-set call can produce on `g`, one per isomorphism class.
    pub fn call_results(
        &self,
        names: &[String],
        g: &HostGraph,
    ) -> Result<Vec<KeyedGraph>, EngineError> {
        Ok(apply_rule_set(&self.rules(names)?, g)?)
    }

    /// All one-step successors of a configuration, in a fixed order; empty
    /// for terminal configurations and for a bare `break`.
    pub fn successors(&self, cfg: &ExtConfig) -> Result<Vec<Successor>, EngineError> {
        let ExtConfig::Running(c, s) = cfg else {
            return Ok(Vec::new());
        };
        let mut out = self.step(c, s)?;
        if out.len() > 1 {
            let mut seen = HashSet::new();
            out.retain(|(l, c)| seen.insert((l.clone(), c.key())));
        }
        Ok(out)
    }

    fn step(&self, c: &Cmd, s: &GraphStack) -> Result<Vec<Successor>, EngineError> {
        use ExtCommand as E;
        use Inference as I;
        let run = |c: Cmd, s: GraphStack| ExtConfig::Running(c, s);
        let one = |r: I, cfg: ExtConfig| Ok(vec![(StepLabel::axiom(r), cfg)]);
        let skip = || Arc::new(E::Skip);
        match &**c {
            E::Call(names) => {
                let results = self.call_results(names, s.top().graph())?;
                if results.is_empty() {
                    return one(I::Call2, ExtConfig::Fail);
                }
                Ok(results
                    .into_iter()
                    .map(|g| {
                        (
                            StepLabel::axiom(I::Call1),
                            ExtConfig::Stack(s.replace_top(Arc::new(g))),
                        )
                    })
                    .collect())
            }
            E::Seq(p, q) => {
                if **p == E::Break {
                    return one(I::Break, run(p.clone(), s.clone()));
                }
                Ok(self
                    .step(p, s)?
                    .into_iter()
                    .map(|(l, cfg)| match cfg {
                        ExtConfig::Running(p2, s2) => {
                            (l.under(I::Seq1), run(seq(p2, q.clone()), s2))
                        }
                        ExtConfig::Stack(s2) => (l.under(I::Seq2), run(q.clone(), s2)),
                        ExtConfig::Fail => (l.under(I::Seq3), ExtConfig::Fail),
                    })
                    .collect())
            }
            E::Break => Ok(Vec::new()),
            E::Loop(p) => one(
                I::Alap1,
                run(
                    Arc::new(E::Try {
                        cond: p.clone(),
                        then: Some(c.clone()),
                        els: Some(skip()),
                    }),
                    s.clone(),
                ),
            ),
            E::If { cond, then, els } => match els {
                Some(e) => one(
                    I::If1,
                    run(
                        Arc::new(E::Ite(cond.clone(), then.clone(), e.clone())),
                        s.push(s.top().clone()),
                    ),
                ),
                None => one(
                    I::If5,
                    run(
                        Arc::new(E::If {
                            cond: cond.clone(),
                            then: then.clone(),
                            els: Some(skip()),
                        }),
                        s.clone(),
                    ),
                ),
            },
            E::Try { cond, then, els } => {
                let complete = |t: Cmd, e: Cmd| {
                    Arc::new(E::Try {
                        cond: cond.clone(),
                        then: Some(t),
                        els: Some(e),
                    })
                };
                match (then, els) {
                    (Some(t), Some(e)) => one(
                        I::Try1,
                        run(
                            Arc::new(E::TryAux(cond.clone(), t.clone(), e.clone())),
                            s.push(s.top().clone()),
                        ),
                    ),
                    (Some(t), None) => one(I::Try5, run(complete(t.clone(), skip()), s.clone())),
                    (None, Some(e)) => one(I::Try6, run(complete(skip(), e.clone()), s.clone())),
                    (None, None) => one(I::Try7, run(complete(skip(), skip()), s.clone())),
                }
            }
            E::Ite(cond, p, q) => {
                let mut out = Vec::new();
                for (l, cfg) in self.step(cond, s)? {
                    out.push(match cfg {
                        ExtConfig::Running(c2, s2) => (
                            l.under(I::If2),
                            run(Arc::new(E::Ite(c2, p.clone(), q.clone())), s2),
                        ),
                        ExtConfig::Stack(s2) => (l.under(I::If3), run(p.clone(), s2.pop()?)),
                        ExtConfig::Fail => (l.under(I::If4), run(q.clone(), s.pop()?)),
                    });
                }
                Ok(out)
            }
            E::TryAux(cond, p, q) => {
                if **cond == E::Break && matches!(**p, E::Loop(_)) && **q == E::Skip {
                    return one(I::Alap2, ExtConfig::Stack(s.pop2()?));
                }
                let mut out = Vec::new();
                for (l, cfg) in self.step(cond, s)? {
                    out.push(match cfg {
                        ExtConfig::Running(c2, s2) => (
                            l.under(I::Try2),
                            run(Arc::new(E::TryAux(c2, p.clone(), q.clone())), s2),
                        ),
                        ExtConfig::Stack(s2) => (l.under(I::Try3), run(p.clone(), s2.pop2()?)),
                        ExtConfig::Fail => (l.under(I::Try4), run(q.clone(), s.pop()?)),
                    });
                }
                Ok(out)
            }
            E::Or(a, b) => Ok(vec![
                (StepLabel::axiom(I::Or1), run(a.clone(), s.clone())),
                (StepLabel::axiom(I::Or2), run(b.clone(), s.clone())),
            ]),
            E::Skip => one(I::Skip, ExtConfig::Stack(s.clone())),
            E::Fail => one(I::Fail, ExtConfig::Fail),
        }
    }
}

/// Picks one successor at each nondeterministic point.
pub trait Chooser {
    /// Returns the index of the chosen option, or `None` to abort the run.
    fn choose(&mut self, current: &ExtConfig, options: &[Successor]) -> Option<usize>;
}

/// How `run_trace` resolves nondeterminism.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Strategy {
    First,
    Random(u64),
    /// Choice indices consumed at nondeterministic points; the first option
    /// is taken once the script runs out.
    Scripted(Vec<usize>),
}

struct FirstChooser;

impl Chooser for FirstChooser {
    fn choose(&mut self, _: &ExtConfig, _: &[Successor]) -> Option<usize> {
        Some(0)
    }
}

struct RandomChooser(ChaCha8Rng);

impl Chooser for RandomChooser {
    fn choose(&mut self, _: &ExtConfig, options: &[Successor]) -> Option<usize> {
        Some(self.0.random_range(0..options.len()))
    }
}

struct ScriptedChooser(std::vec::IntoIter<usize>);

impl Chooser for ScriptedChooser {
    fn choose(&mut self, _: &ExtConfig, options: &[Successor]) -> Option<usize> {
        match self.0.next() {
            Some(i) if i < options.len() => Some(i),
            Some(_) => None,
            None => Some(0),
        }
    }
}

impl Strategy {
    pub fn chooser(&self) -> Box<dyn Chooser> {
        match self {
            Strategy::First => Box::new(FirstChooser),
            Strategy::Random(seed) => Box::new(RandomChooser(ChaCha8Rng::seed_from_u64(*seed))),
            Strategy::Scripted(v) => Box::new(ScriptedChooser(v.clone().into_iter())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStatus {
    Terminated,
    /// Fuel ran out on a non-terminal configuration: the run diverges or
    /// was cut off.
    Cutoff,
    /// The chooser declined to pick a successor.
    Aborted,
    /// A non-terminal configuration without successors.
    Stuck,
}

/// Drives the machine one transition at a time without retaining history.
pub struct Runner<'m, 'p> {
    machine: &'m Machine<'p>,
    current: ExtConfig,
    steps: usize,
}

pub enum StepOutcome {
    Moved(StepLabel),
    Finished(RunStatus),
}

impl<'m, 'p> Runner<'m, 'p> {
    pub fn new(machine: &'m Machine<'p>, start: ExtConfig) -> Self {
        Runner {
            machine,
            current: start,
            steps: 0,
        }
    }

    pub fn current(&self) -> &ExtConfig {
        &self.current
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn step(&mut self, chooser: &mut dyn Chooser) -> Result<StepOutcome, EngineError> {
        if self.current.is_terminal() {
            return Ok(StepOutcome::Finished(RunStatus::Terminated));
        }
        let mut options = self.machine.successors(&self.current)?;
        let pick = match options.len() {
            0 => return Ok(StepOutcome::Finished(RunStatus::Stuck)),
            1 => 0,
            _ => match chooser.choose(&self.current, &options) {
                Some(i) => i,
                None => return Ok(StepOutcome::Finished(RunStatus::Aborted)),
            },
        };
        let (label, next) = options.swap_remove(pick);
        self.current = next;
        self.steps += 1;
        Ok(StepOutcome::Moved(label))
    }
}

#[derive(Debug, Clone)]
pub struct TraceStep {
    pub label: StepLabel,
    pub config: ExtConfig,
}

#[derive(Debug, Clone)]
pub struct Trace {
    pub initial: ExtConfig,
    pub steps: Vec<TraceStep>,
    pub status: RunStatus,
}

impl Trace {
    pub fn last(&self) -> &ExtConfig {
        self.steps.last().map_or(&self.initial, |s| &s.config)
    }

    pub fn labels(&self) -> Vec<String> {
        self.steps.iter().map(|s| s.label.to_string()).collect()
    }

    /// One line per step: `-> [label] <command> , <stack>`.
    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", render(&self.initial));
        for s in &self.steps {
            out.push_str(&format!("-> [{}] {}\n", s.label, render(&s.config)));
        }
        out
    }

    pub fn document(&self) -> TraceDocument {
        let record = |step: usize, label: Option<String>, cfg: &ExtConfig| {
            let (kind, command) = match cfg {
                ExtConfig::Running(c, _) => ("running", Some(c.to_string())),
                ExtConfig::Stack(_) => ("stack", None),
                ExtConfig::Fail => ("fail", None),
            };
            TraceRecord {
                step,
                label,
                kind,
                command,
                stack: cfg.stack().map(GraphStack::keys).unwrap_or_default(),
            }
        };
        let mut records = vec![record(0, None, &self.initial)];
        for (i, s) in self.steps.iter().enumerate() {
            records.push(record(i + 1, Some(s.label.to_string()), &s.config));
        }
        TraceDocument {
            status: self.status,
            steps: records,
        }
    }
}

fn render(cfg: &ExtConfig) -> String {
    match cfg {
        ExtConfig::Running(c, s) => format!("<{c}> , {s}"),
        ExtConfig::Stack(s) => s.to_string(),
        ExtConfig::Fail => "fail".into(),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceRecord {
    pub step: usize,
    pub label: Option<String>,
    pub kind: &'static str,
    pub command: Option<String>,
    /// Canonical keys of the stack graphs, top first.
    pub stack: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceDocument {
    pub status: RunStatus,
    pub steps: Vec<TraceRecord>,
}

/// Runs from `start` until a terminal configuration, a stuck or aborted
/// choice, or `fuel` steps.
pub fn run_trace(
    machine: &Machine,
    start: ExtConfig,
    chooser: &mut dyn Chooser,
    fuel: usize,
) -> Result<Trace, EngineError> {
    if fuel == 0 {
        return Err(EngineError::NonPositive("fuel"));
    }
    let mut runner = Runner::new(machine, start.clone());
    let mut steps = Vec::new();
    let status = loop {
        if runner.steps() == fuel {
            break if runner.current().is_terminal() {
                RunStatus::Terminated
            } else {
                RunStatus::Cutoff
            };
        }
        match runner.step(chooser)? {
            StepOutcome::Moved(label) => steps.push(TraceStep {
                label,
                config: runner.current().clone(),
            }),
            StepOutcome::Finished(status) => break status,
        }
    };
    Ok(Trace {
        initial: start,
        steps,
        status,
    })
}
