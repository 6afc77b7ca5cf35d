//! Bounded exhaustive exploration of the small-step transition system.
//!
//! States are identified by their command term and the canonical keys of
//! their stack graphs. The search is breadth-first and level-synchronous:
//! successors of a level may be computed in parallel, but new states are
//! numbered in frontier order, so the resulting space does not depend on
//! scheduling.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use rayon::prelude::*;
use serde::Serialize;

use crate::bigstep::old_semantic_function;
use crate::graph::HostGraph;
use crate::outcome::{Bottom, Bounds, OutcomeSet, Stuck};
use crate::program::ExpandedProgram;
use crate::smallstep::{Cmd, EngineError, ExtCommand, ExtConfig, Machine, StepLabel, Successor};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum StateKey {
    Running(Cmd, Vec<u32>),
    Stack(Vec<u32>),
    Fail,
}

#[derive(Default)]
struct Interner(HashMap<String, u32>);

impl Interner {
    fn id(&mut self, key: &str) -> u32 {
        if let Some(&i) = self.0.get(key) {
            return i;
        }
        let i = self.0.len() as u32;
        self.0.insert(key.to_string(), i);
        i
    }

    fn key(&mut self, cfg: &ExtConfig) -> StateKey {
        match cfg {
            ExtConfig::Running(c, s) => {
                StateKey::Running(c.clone(), s.iter().map(|g| self.id(g.key())).collect())
            }
            ExtConfig::Stack(s) => StateKey::Stack(s.iter().map(|g| self.id(g.key())).collect()),
            ExtConfig::Fail => StateKey::Fail,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition {
    pub from: usize,
    pub label: StepLabel,
    pub to: usize,
}

/// Explored states; state 0 is the initial configuration.
#[derive(Clone, Debug, Default)]
pub struct StateSpace {
    pub states: Vec<ExtConfig>,
    pub depth: Vec<usize>,
    /// Predecessor on a shortest path from the initial state.
    pub parent: Vec<Option<usize>>,
    /// Successors were computed (false for terminal states and for states
    /// left unexpanded by a bound).
    pub expanded: Vec<bool>,
    pub transitions: Vec<Transition>,
    /// Outgoing transition indices per state.
    pub outgoing: Vec<Vec<usize>>,
    pub frontier_exhausted: bool,
}

impl StateSpace {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Adds a state and returns its index.
    pub fn push_state(&mut self, cfg: ExtConfig, depth: usize, parent: Option<usize>) -> usize {
        self.states.push(cfg);
        self.depth.push(depth);
        self.parent.push(parent);
        self.expanded.push(false);
        self.outgoing.push(Vec::new());
        self.states.len() - 1
    }

    pub fn push_transition(&mut self, from: usize, label: StepLabel, to: usize) {
        self.outgoing[from].push(self.transitions.len());
        self.transitions.push(Transition { from, label, to });
    }

    pub fn out_degree(&self, state: usize) -> usize {
        self.outgoing[state].len()
    }

    /// Transitions along a shortest path from the initial state.
    pub fn path_to(&self, state: usize) -> Vec<&Transition> {
        let mut path = Vec::new();
        let mut cur = state;
        while let Some(p) = self.parent[cur] {
            let t = self.outgoing[p]
                .iter()
                .map(|&t| &self.transitions[t])
                .find(|t| t.to == cur)
                .expect("a parent has a transition to its child");
            path.push(t);
            cur = p;
        }
        path.reverse();
        path
    }

    /// States lying on a cycle, grouped by strongly connected component.
    pub fn cyclic_components(&self) -> Vec<Vec<usize>> {
        let mut g = DiGraph::<(), ()>::with_capacity(self.len(), self.transitions.len());
        for _ in 0..self.len() {
            g.add_node(());
        }
        for t in &self.transitions {
            g.add_edge(NodeIndex::new(t.from), NodeIndex::new(t.to), ());
        }
        tarjan_scc(&g)
            .into_iter()
            .filter(|scc| scc.len() > 1 || self.transitions_between(scc[0].index(), scc[0].index()))
            .map(|scc| {
                let mut v: Vec<usize> = scc.into_iter().map(NodeIndex::index).collect();
                v.sort_unstable();
                v
            })
            .collect()
    }

    fn transitions_between(&self, a: usize, b: usize) -> bool {
        self.outgoing[a]
            .iter()
            .any(|&t| self.transitions[t].to == b)
    }

    /// Graphviz rendering: one node per state, edges labelled by their
    /// inference chains.
    pub fn to_dot(&self) -> String {
        let esc = |s: &str| s.replace('\\', "\\\\").replace('"', "\\\"");
        let mut out = String::from("digraph states {\n  node [shape=box, fontname=monospace];\n");
        for (i, cfg) in self.states.iter().enumerate() {
            let shape = if cfg.is_terminal() {
                ", peripheries=2"
            } else {
                ""
            };
            let _ = writeln!(out, "  s{i} [label=\"{}\"{shape}];", esc(&cfg.to_string()));
        }
        for t in &self.transitions {
            let _ = writeln!(
                out,
                "  s{} -> s{} [label=\"{}\"];",
                t.from,
                t.to,
                esc(&t.label.to_string())
            );
        }
        out.push_str("}\n");
        out
    }
}

/// Successors with the canonical keys of their stacks already computed, so
/// the expensive part runs on the worker thread.
fn keyed_successors(machine: &Machine, cfg: &ExtConfig) -> Result<Vec<Successor>, EngineError> {
    let succ = machine.successors(cfg)?;
    for (_, c) in &succ {
        if let Some(s) = c.stack() {
            for g in s.iter() {
                g.key();
            }
        }
    }
    Ok(succ)
}

/// Breadth-first exploration from `start`. States at depth `max_depth` are
/// not expanded, and no state beyond `max_states` is added; either cut sets
/// `frontier_exhausted`.
pub fn explore(
    machine: &Machine,
    start: ExtConfig,
    bounds: &Bounds,
) -> Result<StateSpace, EngineError> {
    bounds.validate()?;
    let mut space = StateSpace::default();
    let mut interner = Interner::default();
    let mut index = HashMap::new();
    index.insert(interner.key(&start), 0);
    space.push_state(start, 0, None);
    let mut frontier = vec![0usize];
    let mut depth = 0;
    while !frontier.is_empty() {
        let running: Vec<usize> = frontier
            .into_iter()
            .filter(|&i| !space.states[i].is_terminal())
            .collect();
        if running.is_empty() {
            break;
        }
        if depth >= bounds.max_depth {
            space.frontier_exhausted = true;
            break;
        }
        let results: Vec<Result<Vec<Successor>, EngineError>> = if bounds.parallel {
            running
                .par_iter()
                .map(|&i| keyed_successors(machine, &space.states[i]))
                .collect()
        } else {
            running
                .iter()
                .map(|&i| keyed_successors(machine, &space.states[i]))
                .collect()
        };
        let mut next = Vec::new();
        for (&i, result) in running.iter().zip(results) {
            space.expanded[i] = true;
            for (label, cfg) in result? {
                let key = interner.key(&cfg);
                let j = match index.get(&key) {
                    Some(&j) => j,
                    None if space.len() >= bounds.max_states => {
                        space.frontier_exhausted = true;
                        continue;
                    }
                    None => {
                        let j = space.push_state(cfg, depth + 1, Some(i));
                        index.insert(key, j);
                        next.push(j);
                        j
                    }
                };
                space.push_transition(i, label, j);
            }
        }
        frontier = next;
        depth += 1;
    }
    Ok(space)
}

/// The outcome set read off an explored space.
pub fn outcomes(space: &StateSpace) -> OutcomeSet {
    let mut out = OutcomeSet::empty();
    out.exhausted = space.frontier_exhausted;
    for (i, cfg) in space.states.iter().enumerate() {
        match cfg {
            ExtConfig::Stack(s) => {
                out.graphs.insert(s.top().key().to_string());
            }
            ExtConfig::Fail => out.fail = true,
            ExtConfig::Running(..) if space.expanded[i] && space.out_degree(i) == 0 => {
                out.stuck = Stuck::Definite;
            }
            ExtConfig::Running(..) => {}
        }
    }
    out.bottom = if !space.cyclic_components().is_empty() {
        Bottom::CycleDefinite
    } else if out.exhausted {
        Bottom::FuelPossible
    } else {
        Bottom::Absent
    };
    out
}

/// The new semantic function on `g`, restricted to `bounds`.
pub fn new_semantic_function(
    program: &ExpandedProgram,
    g: HostGraph,
    bounds: &Bounds,
) -> Result<OutcomeSet, EngineError> {
    let machine = Machine::new(program);
    let space = explore(&machine, machine.initial(g)?, bounds)?;
    Ok(outcomes(&space))
}

/// A path from the initial state into a cycle: evidence of an infinite run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lasso {
    /// States from the initial state up to the cycle entry, inclusive.
    pub stem: Vec<usize>,
    /// States of the cycle starting at the entry; the last one steps back
    /// to the entry.
    pub cycle: Vec<usize>,
}

/// The shortest-stem lasso, with a shortest cycle through its entry.
pub fn konig_witness(space: &StateSpace) -> Option<Lasso> {
    let components = space.cyclic_components();
    let mut member = vec![usize::MAX; space.len()];
    for (c, scc) in components.iter().enumerate() {
        for &s in scc {
            member[s] = c;
        }
    }
    let entry = (0..space.len())
        .filter(|&s| member[s] != usize::MAX)
        .min_by_key(|&s| (space.depth[s], s))?;
    let comp = member[entry];

    // Shortest way back to the entry inside its component.
    let mut prev = vec![usize::MAX; space.len()];
    let mut queue = VecDeque::from([entry]);
    let mut last = None;
    'search: while let Some(s) = queue.pop_front() {
        for &t in &space.outgoing[s] {
            let to = space.transitions[t].to;
            if to == entry {
                last = Some(s);
                break 'search;
            }
            if member[to] == comp && prev[to] == usize::MAX {
                prev[to] = s;
                queue.push_back(to);
            }
        }
    }
    let mut cycle = vec![last?];
    while *cycle.last().expect("non-empty") != entry {
        cycle.push(prev[*cycle.last().expect("non-empty")]);
    }
    cycle.reverse();

    let mut stem: Vec<usize> = space.path_to(entry).iter().map(|t| t.from).collect();
    stem.push(entry);
    Some(Lasso { stem, cycle })
}

/// Re-derives every step of the lasso from the transition relation.
pub fn replay_lasso(
    machine: &Machine,
    space: &StateSpace,
    lasso: &Lasso,
) -> Result<bool, EngineError> {
    let mut interner = Interner::default();
    let mut walk: Vec<usize> = lasso.stem.clone();
    walk.extend(lasso.cycle.iter().skip(1));
    walk.push(lasso.cycle[0]);
    if walk.first() != Some(&0) {
        return Ok(false);
    }
    for pair in walk.windows(2) {
        let target = interner.key(&space.states[pair[1]]);
        let mut found = false;
        for (_, cfg) in machine.successors(&space.states[pair[0]])? {
            if interner.key(&cfg) == target {
                found = true;
                break;
            }
        }
        if !found {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InvariantKind {
    NonBlocking,
    StackSize,
    TerminalStack,
    OutDegree,
}

#[derive(Clone, Debug, Serialize)]
pub struct Violation {
    pub kind: InvariantKind,
    pub state: usize,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct AuditReport {
    pub states_checked: usize,
    pub max_out_degree: usize,
    pub violations: Vec<Violation>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks every explored state: non-terminal expanded states have a
/// successor, running stacks hold one graph more than the number of `ITE`
/// and `TRY` constructs, final stacks hold one graph, and out-degree stays
/// within the nondeterminism of the next redex (the distinct results of a
/// rule-set call, two for `or`, one otherwise).
pub fn audit_invariants(machine: &Machine, space: &StateSpace) -> Result<AuditReport, EngineError> {
    let mut report = AuditReport {
        states_checked: space.len(),
        max_out_degree: 0,
        violations: Vec::new(),
    };
    let mut flag = |kind, state, detail: String| {
        report.violations.push(Violation {
            kind,
            state,
            detail,
        })
    };
    let mut max_out = 0;
    for (i, cfg) in space.states.iter().enumerate() {
        let degree = space.out_degree(i);
        max_out = max_out.max(degree);
        match cfg {
            ExtConfig::Running(c, s) => {
                if space.expanded[i] && degree == 0 {
                    flag(
                        InvariantKind::NonBlocking,
                        i,
                        format!("no successor for {cfg}"),
                    );
                }
                let expected = c.count_aux() + 1;
                if s.len() != expected {
                    flag(
                        InvariantKind::StackSize,
                        i,
                        format!("stack of {} graphs, expected {expected}", s.len()),
                    );
                }
                if space.expanded[i] {
                    let bound = match c.redex() {
                        ExtCommand::Call(names) => {
                            machine.call_results(names, s.top().graph())?.len().max(1)
                        }
                        ExtCommand::Or(..) => 2,
                        _ => 1,
                    };
                    if degree > bound {
                        flag(
                            InvariantKind::OutDegree,
                            i,
                            format!("out-degree {degree} exceeds {bound}"),
                        );
                    }
                }
            }
            ExtConfig::Stack(s) if s.len() != 1 => {
                flag(
                    InvariantKind::TerminalStack,
                    i,
                    format!("final stack of {} graphs", s.len()),
                );
            }
            ExtConfig::Stack(_) | ExtConfig::Fail => {}
        }
    }
    report.max_out_degree = max_out;
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct Membership {
    /// A canonical graph text, `fail`, or `bottom`.
    pub outcome: String,
    pub old: bool,
    pub new: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ComparisonReport {
    pub old: OutcomeSet,
    pub new: OutcomeSet,
    /// Neither search was cut off, so the checks below are conclusive.
    pub closed: bool,
    /// Every old outcome, bottom included, is a new outcome.
    pub contained: bool,
    pub equal_excluding_bottom: bool,
    pub outcomes: Vec<Membership>,
    /// Failed checks on a closed comparison, each with a witness.
    pub violations: Vec<String>,
}

impl ComparisonReport {
    pub fn has_violation(&self) -> bool {
        !self.violations.is_empty()
    }
}

/// Runs both semantics on `g` and checks that the old outcomes are among
/// the new ones and that both agree once bottom is set aside.
pub fn compare_semantics(
    program: &ExpandedProgram,
    g: HostGraph,
    bounds: &Bounds,
) -> Result<ComparisonReport, EngineError> {
    let old = old_semantic_function(program, g.clone(), bounds)?;
    let machine = Machine::new(program);
    let space = explore(&machine, machine.initial(g)?, bounds)?;
    let new = outcomes(&space);

    let mut outcomes_list: Vec<Membership> = old
        .graphs
        .union(&new.graphs)
        .map(|k| Membership {
            outcome: k.clone(),
            old: old.graphs.contains(k),
            new: new.graphs.contains(k),
        })
        .collect();
    outcomes_list.push(Membership {
        outcome: "fail".into(),
        old: old.fail,
        new: new.fail,
    });
    outcomes_list.push(Membership {
        outcome: "bottom".into(),
        old: old.has_bottom(),
        new: new.has_bottom(),
    });

    let closed = !old.exhausted && !new.exhausted;
    let contained = old.contained_in(&new);
    let equal = old.same_excluding_bottom(&new);
    let mut violations = Vec::new();
    if closed {
        let witness = |pred: &dyn Fn(&ExtConfig) -> bool| {
            (0..space.len()).find(|&i| pred(&space.states[i])).map(|i| {
                space
                    .path_to(i)
                    .iter()
                    .map(|t| t.label.to_string())
                    .collect::<Vec<_>>()
                    .join(", ")
            })
        };
        for m in &outcomes_list {
            if m.old == m.new {
                continue;
            }
            let is_bottom = m.outcome == "bottom";
            if is_bottom && m.new {
                continue;
            }
            let trace = if m.new && m.outcome == "fail" {
                witness(&|c| matches!(c, ExtConfig::Fail))
            } else if m.new {
                witness(&|c| matches!(c, ExtConfig::Stack(s) if s.top().key() == m.outcome))
            } else {
                None
            };
            let side = if m.old { "old only" } else { "new only" };
            violations.push(match trace {
                Some(t) => format!("{side}: {} (new run: {t})", m.outcome),
                None => format!("{side}: {}", m.outcome),
            });
        }
    }
    Ok(ComparisonReport {
        old,
        new,
        closed,
        contained,
        equal_excluding_bottom: equal,
        outcomes: outcomes_list,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{discrete, grey_node, path, program_with_rules};
    use crate::graph::canonical_key;
    use crate::smallstep::GraphStack;
    use std::sync::Arc;

    fn bounds(max_depth: usize) -> Bounds {
        Bounds {
            max_states: 20_000,
            max_depth,
            old_fuel: 500,
            parallel: false,
        }
    }

    fn space(main: &str, g: HostGraph, max_depth: usize) -> (ExpandedProgram, StateSpace) {
        let p = program_with_rules(main);
        let s = {
            let m = Machine::new(&p);
            explore(&m, m.initial(g).unwrap(), &bounds(max_depth)).unwrap()
        };
        (p, s)
    }

    #[test]
    fn skip_has_two_states() {
        let (_, s) = space("skip", path(2), 10);
        assert_eq!((s.len(), s.transitions.len()), (2, 1));
        let out = outcomes(&s);
        assert_eq!(out.graphs.len(), 1);
        assert_eq!(out.bottom, Bottom::Absent);
        assert!(konig_witness(&s).is_none());
    }

    #[test]
    fn deterministic_loop_is_a_single_path() {
        let (p, s) = space("r!", path(3), 100);
        assert_eq!(s.len(), 11);
        assert!((0..s.len()).all(|i| s.out_degree(i) <= 1));
        let out = outcomes(&s);
        assert_eq!(
            out.graphs.iter().collect::<Vec<_>>(),
            [&canonical_key(&discrete(1))]
        );
        assert!(!out.fail && out.bottom == Bottom::Absent);
        let m = Machine::new(&p);
        let audit = audit_invariants(&m, &s).unwrap();
        assert!(audit.passed());
        assert_eq!(audit.max_out_degree, 1);
    }

    #[test]
    fn identity_loop_has_a_replayable_lasso() {
        let (p, s) = space("r3!", grey_node(), 100);
        let lasso = konig_witness(&s).unwrap();
        assert_eq!(lasso.stem, [0]);
        assert_eq!(lasso.cycle.len(), 3);
        assert!(lasso
            .cycle
            .iter()
            .any(|&i| matches!(&s.states[i], ExtConfig::Running(c, _) if c.to_string().starts_with("TRY"))));
        assert!(replay_lasso(&Machine::new(&p), &s, &lasso).unwrap());
        assert_eq!(outcomes(&s).bottom, Bottom::CycleDefinite);
    }

    #[test]
    fn growing_loop_is_only_possibly_divergent() {
        let mut counts = Vec::new();
        for d in [10, 20, 40] {
            let (_, s) = space("{r1, r2}!", grey_node(), d);
            assert!(s.frontier_exhausted);
            assert!(konig_witness(&s).is_none());
            let out = outcomes(&s);
            assert_eq!(out.bottom, Bottom::FuelPossible);
            counts.push((s.len(), out.graphs.len()));
        }
        assert!(counts
            .windows(2)
            .all(|w| w[0].0 < w[1].0 && w[0].1 < w[1].1));
    }

    #[test]
    fn rule_set_call_has_out_degree_two() {
        let (p, s) = space("{r1, r2}", grey_node(), 10);
        let m = Machine::new(&p);
        let audit = audit_invariants(&m, &s).unwrap();
        assert!(audit.passed());
        assert_eq!(audit.max_out_degree, 2);
    }

    #[test]
    fn injected_stuck_state_is_reported() {
        let p = program_with_rules("skip");
        let m = Machine::new(&p);
        let mut s = StateSpace::default();
        let i = s.push_state(
            ExtConfig::Running(Arc::new(ExtCommand::Break), GraphStack::new(path(1))),
            0,
            None,
        );
        s.expanded[i] = true;
        let audit = audit_invariants(&m, &s).unwrap();
        assert_eq!(audit.violations.len(), 1);
        assert_eq!(audit.violations[0].kind, InvariantKind::NonBlocking);
    }

    #[test]
    fn parallel_exploration_matches_sequential() {
        let p = program_with_rules("try ({r1, r2}!) then skip else skip");
        let m = Machine::new(&p);
        let seq = explore(&m, m.initial(grey_node()).unwrap(), &bounds(25)).unwrap();
        let par = explore(
            &m,
            m.initial(grey_node()).unwrap(),
            &Bounds {
                parallel: true,
                ..bounds(25)
            },
        )
        .unwrap();
        assert_eq!(seq.to_dot(), par.to_dot());
        assert_eq!(seq.transitions, par.transitions);
    }

    #[test]
    fn hidden_cycle_separates_the_semantics() {
        let p = program_with_rules("try ({r3, r2}!) then skip else skip");
        let r = compare_semantics(&p, grey_node(), &bounds(200)).unwrap();
        assert!(r.closed && r.contained && r.equal_excluding_bottom);
        assert!(!r.has_violation());
        assert_eq!(r.old.bottom, Bottom::Absent);
        assert_eq!(r.new.bottom, Bottom::CycleDefinite);
        assert_eq!(r.new.graphs, [canonical_key(&discrete(0))].into());
    }

    #[test]
    fn comparison_on_the_cycle_recogniser() {
        let p = program_with_rules("delete!; {edge, loop}");
        let r = compare_semantics(&p, crate::fixtures::cycle(3), &bounds(200)).unwrap();
        assert!(r.closed && r.equal_excluding_bottom && !r.has_violation());
        assert_eq!(
            (r.new.graphs.len(), r.new.fail, r.new.bottom),
            (1, false, Bottom::Absent)
        );
        let r = compare_semantics(&p, path(3), &bounds(200)).unwrap();
        assert!(r.closed && !r.has_violation());
        assert!(r.new.graphs.is_empty() && r.new.fail && r.old.fail);
    }

    #[test]
    fn zero_bounds_are_rejected() {
        let p = program_with_rules("skip");
        let m = Machine::new(&p);
        let b = Bounds {
            max_depth: 0,
            ..bounds(1)
        };
        assert!(matches!(
            explore(&m, m.initial(path(1)).unwrap(), &b),
            Err(EngineError::NonPositive("max_depth"))
        ));
    }
}
