//! GP 2 programs: abstract syntax, parsing, printing, procedure expansion and
//! context conditions.

mod context;
mod expand;
mod parse;

use std::collections::BTreeMap;
use std::fmt;

use crate::rule::Rule;

pub use context::{check_context_conditions, ContextError};
pub use expand::{expand_procedures, ExpandError, ExpandedProgram};
pub use parse::{parse_command, parse_program};

/// A command sequence. Sequencing is kept right-nested: the first component
/// of a [`Command::Seq`] is never itself a sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Command {
    /// Rule-set call; a bare rule name is a one-element set.
    Call(Vec<String>),
    ProcCall(String),
    Loop(Box<Command>),
    If {
        cond: Box<Command>,
        then: Box<Command>,
        els: Option<Box<Command>>,
    },
    Try {
        cond: Box<Command>,
        then: Option<Box<Command>>,
        els: Option<Box<Command>>,
    },
    Or(Box<Command>, Box<Command>),
    Seq(Box<Command>, Box<Command>),
    Break,
    Skip,
    Fail,
}

impl Command {
    pub fn call(names: &[&str]) -> Self {
        Command::Call(names.iter().map(|s| s.to_string()).collect())
    }

    /// `first; rest`, re-associated to the right.
    pub fn seq(first: Command, rest: Command) -> Self {
        match first {
            Command::Seq(a, b) => Command::seq(*a, Command::seq(*b, rest)),
            first => Command::Seq(Box::new(first), Box::new(rest)),
        }
    }

    pub fn looped(body: Command) -> Self {
        Command::Loop(Box::new(body))
    }

    pub fn or(left: Command, right: Command) -> Self {
        Command::Or(Box::new(left), Box::new(right))
    }

    pub fn if_then(cond: Command, then: Command, els: Option<Command>) -> Self {
        Command::If {
            cond: Box::new(cond),
            then: Box::new(then),
            els: els.map(Box::new),
        }
    }

    pub fn try_then(cond: Command, then: Option<Command>, els: Option<Command>) -> Self {
        Command::Try {
            cond: Box::new(cond),
            then: then.map(Box::new),
            els: els.map(Box::new),
        }
    }

    /// Calls `f` on this command and every subcommand, parents first.
    pub fn visit(&self, f: &mut impl FnMut(&Command)) {
        f(self);
        match self {
            Command::Loop(p) => p.visit(f),
            Command::If { cond, then, els } => {
                cond.visit(f);
                then.visit(f);
                if let Some(e) = els {
                    e.visit(f);
                }
            }
            Command::Try { cond, then, els } => {
                cond.visit(f);
                if let Some(t) = then {
                    t.visit(f);
                }
                if let Some(e) = els {
                    e.visit(f);
                }
            }
            Command::Or(a, b) | Command::Seq(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Command::Call(_)
            | Command::ProcCall(_)
            | Command::Break
            | Command::Skip
            | Command::Fail => {}
        }
    }

    /// Names of all rules called anywhere in the command.
    pub fn rule_names(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.visit(&mut |c| {
            if let Command::Call(names) = c {
                out.extend(names.iter().cloned());
            }
        });
        out.sort();
        out.dedup();
        out
    }
}

/// Binding strength used by the printer; larger binds tighter.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) enum Level {
    Seq,
    Command,
    Block,
    Primary,
}

fn fmt_names(names: &[String], f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if names.len() == 1 {
        f.write_str(&names[0])
    } else {
        write!(f, "{{{}}}", names.join(", "))
    }
}

struct At<'a>(&'a Command, Level);

impl fmt::Display for At<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let At(cmd, need) = *self;
        let own = match cmd {
            Command::Seq(..) => Level::Seq,
            Command::If { .. } | Command::Try { .. } => Level::Command,
            Command::Or(..) => Level::Block,
            _ => Level::Primary,
        };
        if own < need {
            return write!(f, "({})", At(cmd, Level::Seq));
        }
        match cmd {
            Command::Call(names) => fmt_names(names, f),
            Command::ProcCall(p) => f.write_str(p),
            Command::Loop(body) => match **body {
                Command::Call(_) | Command::ProcCall(_) => {
                    write!(f, "{}!", At(body, Level::Primary))
                }
                _ => write!(f, "({})!", At(body, Level::Seq)),
            },
            Command::If { cond, then, els } => {
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
            Command::Try { cond, then, els } => {
                write!(f, "try {}", At(cond, Level::Block))?;
                if let Some(t) = then {
                    write!(f, " then {}", At(t, Level::Block))?;
                }
                if let Some(e) = els {
                    write!(f, " else {}", At(e, Level::Block))?;
                }
                Ok(())
            }
            Command::Or(a, b) => write!(f, "{} or {}", At(a, Level::Primary), At(b, Level::Block)),
            Command::Seq(a, b) => write!(f, "{}; {}", At(a, Level::Command), At(b, Level::Seq)),
            Command::Break => f.write_str("break"),
            Command::Skip => f.write_str("skip"),
            Command::Fail => f.write_str("fail"),
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        At(self, Level::Seq).fmt(f)
    }
}

/// Rules and procedures declared at one level of nesting.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Scope {
    pub rules: BTreeMap<String, Rule>,
    pub procedures: BTreeMap<String, ProcedureDecl>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProcedureDecl {
    pub locals: Scope,
    pub body: Command,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProgramDecl {
    pub main: Command,
    pub globals: Scope,
}
