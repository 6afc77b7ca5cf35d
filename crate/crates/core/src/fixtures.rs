//! Sample rules, programs and graphs, plus seeded generators of random host
//! graphs and context-valid programs for differential testing.

use rand::seq::IndexedRandom;
use rand::Rng;

use crate::graph::{parse_host_graph, EdgeMark, GraphBuilder, HostGraph, ListValue, NodeMark};
use crate::program::{expand_procedures, parse_program, Command, ExpandedProgram};

/// Deletes the target of an edge whose source is kept.
pub const RULE_R: &str =
    "r() = [ (1@1, empty) (2, empty) | (e, 1, 2, empty) ] => [ (1@1, empty) | ]";
/// Adds an unmarked node next to a grey one.
pub const RULE_R1: &str =
    "r1() = [ (1@1, empty # grey) | ] => [ (1@1, empty # grey) (2, empty) | ]";
/// Deletes a grey node.
pub const RULE_R2: &str = "r2() = [ (1, empty # grey) | ] => [ | ]";
/// Identity on a grey node.
pub const RULE_R3: &str = "r3() = [ (1@1, empty # grey) | ] => [ (1@1, empty # grey) | ]";
/// Deletes the source of an edge whose target is kept.
pub const RULE_COMB: &str =
    "comb() = [ (1@1, empty) (2, empty) | (e, 2, 1, empty) ] => [ (1@1, empty) | ]";
pub const RULE_DELETE: &str = "delete(a, x, y: list) = [ (1@1, x) (2@2, y) | (e, 1, 2, a) ]
    => [ (1@1, x) (2@2, y) | ] where indeg(1) = 0";
pub const RULE_EDGE: &str = "edge(a, x, y: list) = [ (1@1, x) (2@2, y) | (e, 1, 2, a) ]
    => [ (1@1, x) (2@2, y) | (e, 1, 2, a) ]";
pub const RULE_LOOP: &str =
    "loop(a, x: list) = [ (1@1, x) | (e, 1, 1, a) ] => [ (1@1, x) | (e, 1, 1, a) ]";

/// Rule names used by the random program generator.
pub const INVENTORY: [&str; 7] = ["r", "r1", "r2", "r3", "delete", "edge", "loop"];

/// Fails exactly on acyclic graphs.
pub const CYCLIC_MAIN: &str = "delete!; {edge, loop}";

/// Declarations of every inventory rule and the comb rule.
pub fn rule_declarations() -> String {
    [
        RULE_R,
        RULE_R1,
        RULE_R2,
        RULE_R3,
        RULE_COMB,
        RULE_DELETE,
        RULE_EDGE,
        RULE_LOOP,
    ]
    .join("\n")
}

/// `main` together with all sample rules, expanded.
pub fn program_with_rules(main: &str) -> ExpandedProgram {
    let text = format!("Main = {main}\n{}", rule_declarations());
    expand_procedures(&parse_program(&text).expect("sample program parses"))
        .expect("sample program expands")
}

/// The two-level conditional program run on [`branching_start`]; its `r1`
/// is the edge-target deletion rule.
pub fn branching_program() -> ExpandedProgram {
    let text = format!(
        "Main = try (if (r1; r1) then (r1; r1))\n{}",
        RULE_R.replacen("r()", "r1()", 1)
    );
    expand_procedures(&parse_program(&text).expect("parses")).expect("expands")
}

fn graph(text: &str) -> HostGraph {
    parse_host_graph(text).expect("sample graph parses")
}

pub fn grey_node() -> HostGraph {
    graph("[ (1, empty # grey) | ]")
}

/// A node with two outgoing edges.
pub fn branching_start() -> HostGraph {
    graph("[ (1, empty) (2, empty) (3, empty) | (1, 2, 1, empty) (2, 2, 3, empty) ]")
}

/// `n` isolated unmarked nodes.
pub fn discrete(n: usize) -> HostGraph {
    let mut b = GraphBuilder::new();
    for i in 1..=n {
        b.add_node(i.to_string(), ListValue::empty(), NodeMark::None, false)
            .expect("fresh id");
    }
    b.build()
}

/// The directed path `1 -> 2 -> ... -> n`.
pub fn path(n: usize) -> HostGraph {
    with_edges(n, &(1..n).map(|i| (i, i + 1)).collect::<Vec<_>>())
}

/// The directed cycle through `1..n`.
pub fn cycle(n: usize) -> HostGraph {
    let mut edges: Vec<(usize, usize)> = (1..n).map(|i| (i, i + 1)).collect();
    edges.push((n, 1));
    with_edges(n, &edges)
}

/// Unmarked nodes `1..=n` with the given 1-based edges.
pub fn with_edges(n: usize, edges: &[(usize, usize)]) -> HostGraph {
    let mut b = GraphBuilder::new();
    for i in 1..=n {
        b.add_node(i.to_string(), ListValue::empty(), NodeMark::None, false)
            .expect("fresh id");
    }
    for (k, &(s, t)) in edges.iter().enumerate() {
        b.add_edge(
            (k + 1).to_string(),
            &s.to_string(),
            &t.to_string(),
            ListValue::empty(),
            EdgeMark::None,
        )
        .expect("endpoints exist");
    }
    b.build()
}

/// A graph with at most `max_nodes` nodes, some grey, empty labels, and a
/// few edges (loops and parallel edges allowed).
pub fn random_graph(rng: &mut impl Rng, max_nodes: usize) -> HostGraph {
    let n = rng.random_range(0..=max_nodes);
    let mut b = GraphBuilder::new();
    for i in 1..=n {
        let mark = if rng.random_bool(0.3) {
            NodeMark::Grey
        } else {
            NodeMark::None
        };
        b.add_node(i.to_string(), ListValue::empty(), mark, false)
            .expect("fresh id");
    }
    if n > 0 {
        for k in 1..=rng.random_range(0..=n + 1) {
            let s = rng.random_range(1..=n).to_string();
            let t = rng.random_range(1..=n).to_string();
            b.add_edge(k.to_string(), &s, &t, ListValue::empty(), EdgeMark::None)
                .expect("endpoints exist");
        }
    }
    b.build()
}

/// A random directed graph on `n` nodes that is acyclic, or, when `cyclic`
/// is set, contains at least one directed cycle (possibly a loop).
pub fn random_dag_or_cyclic(rng: &mut impl Rng, n: usize, cyclic: bool) -> HostGraph {
    let mut edges = Vec::new();
    for s in 1..=n {
        for t in s + 1..=n {
            if rng.random_bool(0.4) {
                edges.push((s, t));
            }
        }
    }
    if cyclic {
        let a = rng.random_range(1..=n);
        let b = rng.random_range(a..=n);
        // A path a -> ... -> b closed by b -> a.
        edges.extend((a..b).map(|i| (i, i + 1)));
        edges.push((b, a));
    }
    // Hide the topological order behind a random relabelling.
    let mut perm: Vec<usize> = (1..=n).collect();
    for i in (1..perm.len()).rev() {
        perm.swap(i, rng.random_range(0..=i));
    }
    let edges: Vec<(usize, usize)> = edges
        .iter()
        .map(|&(s, t)| (perm[s - 1], perm[t - 1]))
        .collect();
    with_edges(n, &edges)
}

/// A context-valid command over [`INVENTORY`] whose constructs nest at most
/// `depth` deep.
pub fn random_program(rng: &mut impl Rng, depth: usize) -> Command {
    gen(rng, depth, false)
}

fn gen(rng: &mut impl Rng, depth: usize, in_loop: bool) -> Command {
    let leaf = depth == 0 || rng.random_bool(0.3);
    if leaf {
        return match rng.random_range(0..10) {
            0 => Command::Skip,
            1 => Command::Fail,
            2 if in_loop => Command::Break,
            3 | 4 => {
                let k = rng.random_range(0..=2);
                let names: Vec<&str> = INVENTORY.choose_multiple(rng, k).copied().collect();
                Command::call(&names)
            }
            _ => Command::call(&[INVENTORY.choose(rng).expect("non-empty")]),
        };
    }
    let d = depth - 1;
    match rng.random_range(0..6) {
        0 => Command::seq(gen(rng, d, in_loop), gen(rng, d, in_loop)),
        1 => Command::looped(gen(rng, d, true)),
        2 => {
            let els = rng.random_bool(0.5).then(|| gen(rng, d, in_loop));
            Command::if_then(gen(rng, d, false), gen(rng, d, in_loop), els)
        }
        3 => {
            let cond = gen(rng, d, false);
            let then = rng.random_bool(0.6).then(|| gen(rng, d, in_loop));
            let els = rng.random_bool(0.5).then(|| gen(rng, d, in_loop));
            Command::try_then(cond, then, els)
        }
        4 => Command::or(gen(rng, d, in_loop), gen(rng, d, in_loop)),
        _ => Command::seq(
            gen(rng, d, in_loop),
            Command::seq(gen(rng, d, in_loop), gen(rng, d, in_loop)),
        ),
    }
}

/// A generated command declared as `Main` together with the sample rules.
pub fn random_expanded(rng: &mut impl Rng, depth: usize) -> ExpandedProgram {
    program_with_rules(&random_program(rng, depth).to_string())
}
