//! Canonical forms of host graphs.
//!
//! Nodes are ordered by colour refinement followed by individualisation:
//! whenever the refined partition still has a non-singleton cell, each
//! member of the first such cell is tried as the next node and the smallest
//! resulting encoding wins. Two members whose transposition is an
//! automorphism give identical subtrees, so only one of them is explored.
//! When a whole cell consists of such interchangeable nodes it is split in
//! one go, which keeps large discrete graphs linear.

use std::collections::HashMap;
use std::fmt;
use std::sync::OnceLock;

use super::{serialize_host_graph, EdgeMark, GraphBuilder, HostGraph, ListValue, NodeMark};

type Encoding = (Vec<u32>, Vec<(u32, u32, u32)>);

struct Classes<'g> {
    node_class: Vec<u32>,
    edge_class: Vec<u32>,
    node_values: Vec<(&'g ListValue, NodeMark, bool)>,
    edge_values: Vec<(&'g ListValue, EdgeMark)>,
}

fn rank<T: Ord + Clone>(items: &[T]) -> (Vec<u32>, Vec<T>) {
    let mut distinct: Vec<T> = items.to_vec();
    distinct.sort();
    distinct.dedup();
    let ranks = items
        .iter()
        .map(|x| distinct.binary_search(x).expect("value present") as u32)
        .collect();
    (ranks, distinct)
}

impl<'g> Classes<'g> {
    fn new(g: &'g HostGraph) -> Self {
        let nodes: Vec<_> = g
            .nodes()
            .iter()
            .map(|n| (&n.label, n.mark, n.rooted))
            .collect();
        let edges: Vec<_> = g.edges().iter().map(|e| (&e.label, e.mark)).collect();
        let (node_class, node_values) = rank(&nodes);
        let (edge_class, edge_values) = rank(&edges);
        Classes {
            node_class,
            edge_class,
            node_values,
            edge_values,
        }
    }
}

/// Colour refinement to the coarsest equitable partition. Colours are ranks,
/// and the previous colour leads every signature, so the relative order of
/// existing cells is preserved.
fn refine(g: &HostGraph, classes: &Classes, colors: &mut Vec<u64>) {
    let mut distinct = count_distinct(colors);
    loop {
        let sigs: Vec<(u64, Vec<(u8, u64, u32)>)> = (0..g.node_count())
            .map(|v| {
                let mut nbrs: Vec<(u8, u64, u32)> = g
                    .out_edges(v)
                    .iter()
                    .map(|&e| (0, colors[g.edge(e).target], classes.edge_class[e]))
                    .chain(
                        g.in_edges(v)
                            .iter()
                            .map(|&e| (1, colors[g.edge(e).source], classes.edge_class[e])),
                    )
                    .collect();
                nbrs.sort_unstable();
                (colors[v], nbrs)
            })
            .collect();
        let (ranks, uniq) = rank(&sigs);
        *colors = ranks.into_iter().map(u64::from).collect();
        if uniq.len() == distinct {
            return;
        }
        distinct = uniq.len();
    }
}

fn count_distinct(colors: &[u64]) -> usize {
    let mut c = colors.to_vec();
    c.sort_unstable();
    c.dedup();
    c.len()
}

/// Whether swapping `u` and `v` (same node class) maps the edge multiset to
/// itself.
fn swap_is_automorphism(g: &HostGraph, classes: &Classes, u: usize, v: usize) -> bool {
    if classes.node_class[u] != classes.node_class[v] {
        return false;
    }
    if g.indegree(u) != g.indegree(v) || g.outdegree(u) != g.outdegree(v) {
        return false;
    }
    let swap = |x: usize| {
        if x == u {
            v
        } else if x == v {
            u
        } else {
            x
        }
    };
    let mut incident: Vec<usize> = [u, v]
        .iter()
        .flat_map(|&x| g.out_edges(x).iter().chain(g.in_edges(x)))
        .copied()
        .collect();
    incident.sort_unstable();
    incident.dedup();
    let mut before: Vec<(usize, usize, u32)> = incident
        .iter()
        .map(|&e| (g.edge(e).source, g.edge(e).target, classes.edge_class[e]))
        .collect();
    let mut after: Vec<(usize, usize, u32)> = before
        .iter()
        .map(|&(s, t, c)| (swap(s), swap(t), c))
        .collect();
    before.sort_unstable();
    after.sort_unstable();
    before == after
}

fn encode(g: &HostGraph, classes: &Classes, colors: &[u64]) -> Encoding {
    let mut order: Vec<usize> = (0..g.node_count()).collect();
    order.sort_by_key(|&v| colors[v]);
    let mut pos = vec![0u32; g.node_count()];
    for (p, &v) in order.iter().enumerate() {
        pos[v] = p as u32;
    }
    let nodes = order.iter().map(|&v| classes.node_class[v]).collect();
    let mut edges: Vec<(u32, u32, u32)> = g
        .edges()
        .iter()
        .enumerate()
        .map(|(i, e)| (pos[e.source], pos[e.target], classes.edge_class[i]))
        .collect();
    edges.sort_unstable();
    (nodes, edges)
}

fn search(g: &HostGraph, classes: &Classes, mut colors: Vec<u64>, best: &mut Option<Encoding>) {
    refine(g, classes, &mut colors);
    let mut cells: HashMap<u64, Vec<usize>> = HashMap::new();
    for (v, &c) in colors.iter().enumerate() {
        cells.entry(c).or_default().push(v);
    }
    let target = cells
        .iter()
        .filter(|(_, members)| members.len() > 1)
        .min_by_key(|(c, _)| **c)
        .map(|(_, m)| m.clone());
    let Some(cell) = target else {
        let enc = encode(g, classes, &colors);
        if best.as_ref().is_none_or(|b| enc < *b) {
            *best = Some(enc);
        }
        return;
    };

    let scale = g.node_count() as u64 + 1;
    let first = cell[0];
    if cell[1..]
        .iter()
        .all(|&v| swap_is_automorphism(g, classes, first, v))
    {
        let mut next: Vec<u64> = colors.iter().map(|&c| c * scale).collect();
        for (i, &v) in cell.iter().enumerate() {
            next[v] += i as u64;
        }
        search(g, classes, next, best);
        return;
    }

    let mut tried: Vec<usize> = Vec::new();
    for &v in &cell {
        if tried
            .iter()
            .any(|&u| swap_is_automorphism(g, classes, u, v))
        {
            continue;
        }
        let mut next: Vec<u64> = colors.iter().map(|&c| c * 2).collect();
        for &w in &cell {
            if w != v {
                next[w] += 1;
            }
        }
        search(g, classes, next, best);
        tried.push(v);
    }
}

/// The canonical representative of the isomorphism class of `g`: nodes are
/// renamed `1..n` and edges `1..m` in canonical order.
pub fn canonical_form(g: &HostGraph) -> HostGraph {
    let classes = Classes::new(g);
    let mut best = None;
    search(
        g,
        &classes,
        classes.node_class.iter().map(|&c| u64::from(c)).collect(),
        &mut best,
    );
    let (nodes, edges) = best.unwrap_or_default();
    let mut b = GraphBuilder::new();
    for (i, &class) in nodes.iter().enumerate() {
        let (label, mark, rooted) = classes.node_values[class as usize];
        b.add_node((i + 1).to_string(), label.clone(), mark, rooted)
            .expect("fresh canonical ids");
    }
    for (i, &(s, t, class)) in edges.iter().enumerate() {
        let (label, mark) = classes.edge_values[class as usize];
        b.add_edge(
            (i + 1).to_string(),
            &(s + 1).to_string(),
            &(t + 1).to_string(),
            label.clone(),
            mark,
        )
        .expect("canonical endpoints exist");
    }
    b.build()
}

/// A string that is equal for two graphs exactly when they are isomorphic.
/// It is the host-graph text of [`canonical_form`].
pub fn canonical_key(g: &HostGraph) -> String {
    serialize_host_graph(&canonical_form(g))
}

/// A host graph with its canonical key, computed on first use.
#[derive(Clone)]
pub struct KeyedGraph {
    graph: HostGraph,
    key: OnceLock<String>,
}

impl KeyedGraph {
    pub fn new(graph: HostGraph) -> Self {
        KeyedGraph {
            graph,
            key: OnceLock::new(),
        }
    }

    pub fn with_key(graph: HostGraph, key: String) -> Self {
        let cell = OnceLock::new();
        let _ = cell.set(key);
        KeyedGraph { graph, key: cell }
    }

    pub fn graph(&self) -> &HostGraph {
        &self.graph
    }

    pub fn key(&self) -> &str {
        self.key.get_or_init(|| canonical_key(&self.graph))
    }

    pub fn into_graph(self) -> HostGraph {
        self.graph
    }
}

impl From<HostGraph> for KeyedGraph {
    fn from(g: HostGraph) -> Self {
        KeyedGraph::new(g)
    }
}

impl fmt::Debug for KeyedGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", serialize_host_graph(&self.graph))
    }
}
