//! The earlier semantics: one transition relation on configurations of a
//! command and a single host graph, where `if`, `try` and loops take their
//! condition or body as a premise evaluated to completion.
//!
//! Premises quantify over derivations of any length, so they are evaluated
//! by a breadth-first search limited by a fuel budget. A premise that does
//! not settle within fuel yields whatever outcomes it found and marks the
//! step incomplete.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

use crate::graph::{HostGraph, KeyedGraph};
use crate::outcome::{Bottom, Bounds, OutcomeSet, Stuck};
use crate::program::ExpandedProgram;
use crate::rule::apply_rule_set;
use crate::smallstep::{seq, Cmd, EngineError, ExtCommand};

#[derive(Clone, Debug)]
pub enum OldConfig {
    Running(Cmd, Arc<KeyedGraph>),
    Graph(Arc<KeyedGraph>),
    Fail,
}

impl OldConfig {
    pub fn initial(program: &ExpandedProgram, g: HostGraph) -> Result<Self, EngineError> {
        Ok(OldConfig::Running(
            ExtCommand::from_command(&program.main)?,
            Arc::new(KeyedGraph::new(g)),
        ))
    }
}

impl fmt::Display for OldConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OldConfig::Running(c, g) => write!(f, "<{c}, {:?}>", g),
            OldConfig::Graph(g) => write!(f, "{:?}", g),
            OldConfig::Fail => f.write_str("fail"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OldInference {
    Call1,
    Call2,
    Seq1,
    Seq2,
    Seq3,
    Break,
    If1,
    If2,
    If3,
    Try1,
    Try2,
    Try3,
    Try4,
    Try5,
    Alap1,
    Alap2,
    Alap3,
    Or1,
    Or2,
    Skip,
    Fail,
}

impl OldInference {
    pub fn name(self) -> &'static str {
        use OldInference::*;
        match self {
            Call1 => "call1'",
            Call2 => "call2'",
            Seq1 => "seq1'",
            Seq2 => "seq2'",
            Seq3 => "seq3'",
            Break => "break'",
            If1 => "if1'",
            If2 => "if2'",
            If3 => "if3'",
            Try1 => "try1'",
            Try2 => "try2'",
            Try3 => "try3'",
            Try4 => "try4'",
            Try5 => "try5'",
            Alap1 => "alap1'",
            Alap2 => "alap2'",
            Alap3 => "alap3'",
            Or1 => "or1'",
            Or2 => "or2'",
            Skip => "skip'",
            Fail => "fail'",
        }
    }
}

/// Inference chain, innermost first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OldLabel(pub Vec<OldInference>);

impl fmt::Display for OldLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.0.iter().map(|r| r.name()).collect();
        f.write_str(&names.join("/"))
    }
}

#[derive(Debug, Clone)]
pub struct OldStep {
    pub successors: Vec<(OldLabel, OldConfig)>,
    /// Some premise did not settle within fuel, so successors may be missing.
    pub incomplete: bool,
}

/// Everything a premise derivation can reach from its start configuration.
#[derive(Debug, Clone, Default)]
pub struct PremiseOutcome {
    pub graphs: Vec<Arc<KeyedGraph>>,
    pub fail: bool,
    /// Graphs `H` of reachable configurations `<break, H>`, including the
    /// start configuration.
    pub breaks: Vec<Arc<KeyedGraph>>,
    pub complete: bool,
}

type MemoKey = (Cmd, String);

/// Evaluator for the old transition relation with a memo of settled
/// premises.
pub struct OldMachine<'p> {
    program: &'p ExpandedProgram,
    fuel_per_step: usize,
    memo: HashMap<MemoKey, Arc<PremiseOutcome>>,
}

impl<'p> OldMachine<'p> {
    pub fn new(program: &'p ExpandedProgram, fuel_per_step: usize) -> Self {
        OldMachine {
            program,
            fuel_per_step,
            memo: HashMap::new(),
        }
    }

    /// One-step successors; premises of this step share `fuel_per_step`.
    pub fn old_successors(&mut self, cfg: &OldConfig) -> Result<OldStep, EngineError> {
        let OldConfig::Running(c, g) = cfg else {
            return Ok(OldStep {
                successors: Vec::new(),
                incomplete: false,
            });
        };
        let mut fuel = self.fuel_per_step;
        let mut step = self.step(c, g, &mut fuel)?;
        if step.successors.len() > 1 {
            let mut seen = HashSet::new();
            step.successors.retain(|(l, cfg)| {
                let key = match cfg {
                    OldConfig::Running(c, g) => (Some(c.clone()), g.key().to_string()),
                    OldConfig::Graph(g) => (None, g.key().to_string()),
                    OldConfig::Fail => (None, String::new()),
                };
                seen.insert((l.clone(), matches!(cfg, OldConfig::Fail), key))
            });
        }
        Ok(step)
    }

    fn step(
        &mut self,
        c: &Cmd,
        g: &Arc<KeyedGraph>,
        fuel: &mut usize,
    ) -> Result<OldStep, EngineError> {
        use ExtCommand as E;
        use OldInference as I;
        let label = |r: I| OldLabel(vec![r]);
        let done = |successors: Vec<(OldLabel, OldConfig)>| OldStep {
            successors,
            incomplete: false,
        };
        let run = |c: &Cmd, g: &Arc<KeyedGraph>| OldConfig::Running(c.clone(), g.clone());
        let skip = || Arc::new(E::Skip);
        Ok(match &**c {
            E::Call(names) => {
                let rules = names
                    .iter()
                    .map(|n| {
                        self.program
                            .rules
                            .get(n)
                            .map(|r| r.as_ref())
                            .ok_or_else(|| EngineError::UnknownRule(n.clone()))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                let results = apply_rule_set(&rules, g.graph())?;
                if results.is_empty() {
                    done(vec![(label(I::Call2), OldConfig::Fail)])
                } else {
                    done(
                        results
                            .into_iter()
                            .map(|h| (label(I::Call1), OldConfig::Graph(Arc::new(h))))
                            .collect(),
                    )
                }
            }
            E::Seq(p, _) if **p == E::Break => done(vec![(label(I::Break), run(p, g))]),
            E::Seq(p, q) => {
                let inner = self.step(p, g, fuel)?;
                OldStep {
                    successors: inner
                        .successors
                        .into_iter()
                        .map(|(mut l, cfg)| match cfg {
                            OldConfig::Running(p2, h) => {
                                l.0.push(I::Seq1);
                                (l, OldConfig::Running(seq(p2, q.clone()), h))
                            }
                            OldConfig::Graph(h) => {
                                l.0.push(I::Seq2);
                                (l, OldConfig::Running(q.clone(), h))
                            }
                            OldConfig::Fail => {
                                l.0.push(I::Seq3);
                                (l, OldConfig::Fail)
                            }
                        })
                        .collect(),
                    incomplete: inner.incomplete,
                }
            }
            E::Break => done(Vec::new()),
            E::If {
                cond,
                then,
                els: None,
            } => done(vec![(
                label(I::If3),
                OldConfig::Running(
                    Arc::new(E::If {
                        cond: cond.clone(),
                        then: then.clone(),
                        els: Some(skip()),
                    }),
                    g.clone(),
                ),
            )]),
            E::If {
                cond,
                then,
                els: Some(els),
            } => {
                let out = self.evaluate(cond, g, fuel)?;
                let mut successors = Vec::new();
                if !out.graphs.is_empty() {
                    successors.push((label(I::If1), run(then, g)));
                }
                if out.fail {
                    successors.push((label(I::If2), run(els, g)));
                }
                let settled = successors.len() == 2;
                OldStep {
                    successors,
                    incomplete: !out.complete && !settled,
                }
            }
            E::Try {
                cond,
                then: Some(then),
                els: Some(els),
            } => {
                let out = self.evaluate(cond, g, fuel)?;
                let mut successors: Vec<_> = out
                    .graphs
                    .iter()
                    .map(|h| (label(I::Try1), run(then, h)))
                    .collect();
                if out.fail {
                    successors.push((label(I::Try2), run(els, g)));
                }
                OldStep {
                    successors,
                    incomplete: !out.complete,
                }
            }
            E::Try { cond, then, els } => {
                let (r, then, els) = match (then, els) {
                    (Some(t), None) => (I::Try3, t.clone(), skip()),
                    (None, Some(e)) => (I::Try4, skip(), e.clone()),
                    _ => (I::Try5, skip(), skip()),
                };
                done(vec![(
                    label(r),
                    OldConfig::Running(
                        Arc::new(E::Try {
                            cond: cond.clone(),
                            then: Some(then),
                            els: Some(els),
                        }),
                        g.clone(),
                    ),
                )])
            }
            E::Loop(body) => {
                let out = self.evaluate(body, g, fuel)?;
                let mut successors: Vec<_> = out
                    .graphs
                    .iter()
                    .map(|h| (label(I::Alap1), run(c, h)))
                    .collect();
                if out.fail {
                    successors.push((label(I::Alap2), OldConfig::Graph(g.clone())));
                }
                successors.extend(
                    out.breaks
                        .iter()
                        .map(|h| (label(I::Alap3), OldConfig::Graph(h.clone()))),
                );
                OldStep {
                    successors,
                    incomplete: !out.complete,
                }
            }
            E::Or(a, b) => done(vec![(label(I::Or1), run(a, g)), (label(I::Or2), run(b, g))]),
            E::Skip => done(vec![(label(I::Skip), OldConfig::Graph(g.clone()))]),
            E::Fail => done(vec![(label(I::Fail), OldConfig::Fail)]),
            E::Ite(..) | E::TryAux(..) => return Err(EngineError::Auxiliary(c.to_string())),
        })
    }

    /// Outcomes of all derivations from `<c, g>`, searched breadth-first
    /// while fuel lasts. Each expanded configuration costs one unit, nested
    /// premises included.
    pub fn evaluate(
        &mut self,
        c: &Cmd,
        g: &Arc<KeyedGraph>,
        fuel: &mut usize,
    ) -> Result<Arc<PremiseOutcome>, EngineError> {
        let memo_key = (c.clone(), g.key().to_string());
        if let Some(hit) = self.memo.get(&memo_key) {
            return Ok(hit.clone());
        }
        let mut out = PremiseOutcome {
            complete: true,
            ..PremiseOutcome::default()
        };
        let mut graph_keys = BTreeSet::new();
        let mut break_keys = BTreeSet::new();
        let mut visited = HashSet::new();
        visited.insert(memo_key.clone());
        let mut queue = VecDeque::from([(c.clone(), g.clone())]);
        while let Some((c, g)) = queue.pop_front() {
            if *c == ExtCommand::Break {
                if break_keys.insert(g.key().to_string()) {
                    out.breaks.push(g);
                }
                continue;
            }
            if *fuel == 0 {
                out.complete = false;
                break;
            }
            *fuel -= 1;
            let step = self.step(&c, &g, fuel)?;
            if step.incomplete {
                out.complete = false;
            }
            for (_, next) in step.successors {
                match next {
                    OldConfig::Graph(h) => {
                        if graph_keys.insert(h.key().to_string()) {
                            out.graphs.push(h);
                        }
                    }
                    OldConfig::Fail => out.fail = true,
                    OldConfig::Running(c2, h) => {
                        if visited.insert((c2.clone(), h.key().to_string())) {
                            queue.push_back((c2, h));
                        }
                    }
                }
            }
        }
        let out = Arc::new(out);
        if out.complete {
            self.memo.insert(memo_key, out.clone());
        }
        Ok(out)
    }
}

/// The old semantic function on `g`: terminal outcomes of the top-level
/// transition system, explored breadth-first within `bounds`.
///
/// Bottom is certain when a cycle of configurations is reachable or a
/// configuration provably has no successors; it is only possible when some
/// premise ran out of fuel without any successor or the search was cut off.
pub fn old_semantic_function(
    program: &ExpandedProgram,
    g: HostGraph,
    bounds: &Bounds,
) -> Result<OutcomeSet, EngineError> {
    bounds.validate()?;
    let mut machine = OldMachine::new(program, bounds.old_fuel);
    let start = OldConfig::initial(program, g)?;
    let OldConfig::Running(c0, g0) = &start else {
        unreachable!("initial configurations are running")
    };
    let mut outcome = OutcomeSet::empty();
    let mut index: HashMap<MemoKey, usize> = HashMap::new();
    let mut states: Vec<(Cmd, Arc<KeyedGraph>, usize)> = vec![(c0.clone(), g0.clone(), 0)];
    index.insert((c0.clone(), g0.key().to_string()), 0);
    let mut edges = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    let mut definite = false;
    while let Some(i) = queue.pop_front() {
        let (c, g, depth) = states[i].clone();
        if depth >= bounds.max_depth {
            outcome.exhausted = true;
            continue;
        }
        let step = machine.old_successors(&OldConfig::Running(c, g))?;
        if step.incomplete {
            outcome.exhausted = true;
        }
        if step.successors.is_empty() {
            if step.incomplete {
                outcome.stuck = outcome.stuck.max(Stuck::Undetermined);
            } else {
                outcome.stuck = Stuck::Definite;
                definite = true;
            }
        }
        for (_, next) in step.successors {
            match next {
                OldConfig::Graph(h) => {
                    outcome.graphs.insert(h.key().to_string());
                }
                OldConfig::Fail => outcome.fail = true,
                OldConfig::Running(c2, h) => {
                    let key = (c2.clone(), h.key().to_string());
                    let j = match index.get(&key) {
                        Some(&j) => j,
                        None if states.len() >= bounds.max_states => {
                            outcome.exhausted = true;
                            continue;
                        }
                        None => {
                            states.push((c2, h, depth + 1));
                            index.insert(key, states.len() - 1);
                            queue.push_back(states.len() - 1);
                            states.len() - 1
                        }
                    };
                    edges.push((i, j));
                }
            }
        }
    }
    let mut graph = DiGraph::<(), ()>::with_capacity(states.len(), edges.len());
    for _ in 0..states.len() {
        graph.add_node(());
    }
    let self_loop = edges.iter().any(|&(a, b)| a == b);
    for (a, b) in edges {
        graph.add_edge(NodeIndex::new(a), NodeIndex::new(b), ());
    }
    let cycle = self_loop || tarjan_scc(&graph).iter().any(|scc| scc.len() > 1);
    outcome.bottom = if cycle || definite {
        Bottom::CycleDefinite
    } else if outcome.exhausted || outcome.stuck != Stuck::None {
        Bottom::FuelPossible
    } else {
        Bottom::Absent
    };
    Ok(outcome)
}
