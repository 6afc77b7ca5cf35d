//! Host graphs: directed, labelled graphs with parallel edges, loops, marks
//! and root flags.
//!
//! A [`HostGraph`] is immutable once built. Construction goes through
//! [`GraphBuilder`], which validates ids and endpoints and stores nodes and
//! edges sorted by id (numeric ids ascending, then the remaining ids
//! lexicographically). Node and edge ids are opaque strings; internally items
//! are addressed by dense indices into the sorted vectors.

mod canon;
mod iso;
pub(crate) mod text;

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use canon::{canonical_form, canonical_key, KeyedGraph};
pub use iso::is_isomorphic;
pub use text::{parse_host_graph, serialize_host_graph};

/// A single list entry: an integer or a character string.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Atom {
    Int(i64),
    Str(String),
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Int(n) => write!(f, "{n}"),
            Atom::Str(s) => {
                f.write_str("\"")?;
                for c in s.chars() {
                    match c {
                        '"' => f.write_str("\\\"")?,
                        '\\' => f.write_str("\\\\")?,
                        '\n' => f.write_str("\\n")?,
                        c => write!(f, "{c}")?,
                    }
                }
                f.write_str("\"")
            }
        }
    }
}

/// A GP 2 list value. A list of length one is the same value as its single
/// atom, so every label is represented as a list.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ListValue(pub Vec<Atom>);

impl ListValue {
    pub fn empty() -> Self {
        ListValue(Vec::new())
    }

    pub fn int(n: i64) -> Self {
        ListValue(vec![Atom::Int(n)])
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.0
    }

    /// The integer value of a length-one integer list.
    pub fn as_int(&self) -> Option<i64> {
        match self.0.as_slice() {
            [Atom::Int(n)] => Some(*n),
            _ => None,
        }
    }
}

impl From<Atom> for ListValue {
    fn from(a: Atom) -> Self {
        ListValue(vec![a])
    }
}

impl fmt::Display for ListValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("empty");
        }
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(":")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
pub enum NodeMark {
    #[default]
    None,
    Grey,
    Red,
    Green,
    Blue,
}

impl NodeMark {
    pub fn name(self) -> Option<&'static str> {
        match self {
            NodeMark::None => None,
            NodeMark::Grey => Some("grey"),
            NodeMark::Red => Some("red"),
            NodeMark::Green => Some("green"),
            NodeMark::Blue => Some("blue"),
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "none" => NodeMark::None,
            "grey" => NodeMark::Grey,
            "red" => NodeMark::Red,
            "green" => NodeMark::Green,
            "blue" => NodeMark::Blue,
            _ => return None,
        })
    }
}

#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
pub enum EdgeMark {
    #[default]
    None,
    Dashed,
    Red,
    Green,
    Blue,
}

impl EdgeMark {
    pub fn name(self) -> Option<&'static str> {
        match self {
            EdgeMark::None => None,
            EdgeMark::Dashed => Some("dashed"),
            EdgeMark::Red => Some("red"),
            EdgeMark::Green => Some("green"),
            EdgeMark::Blue => Some("blue"),
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "none" => EdgeMark::None,
            "dashed" => EdgeMark::Dashed,
            "red" => EdgeMark::Red,
            "green" => EdgeMark::Green,
            "blue" => EdgeMark::Blue,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Node {
    pub id: String,
    pub label: ListValue,
    pub mark: NodeMark,
    pub rooted: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Edge {
    pub id: String,
    /// Index of the source node.
    pub source: usize,
    /// Index of the target node.
    pub target: usize,
    pub label: ListValue,
    pub mark: EdgeMark,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("duplicate node id `{0}`")]
    DuplicateNode(String),
    #[error("duplicate edge id `{0}`")]
    DuplicateEdge(String),
    #[error("edge `{edge}` refers to unknown {end} node `{node}`")]
    UnknownEndpoint {
        edge: String,
        end: &'static str,
        node: String,
    },
    #[error("comb size must be at least 1, got {0}")]
    InvalidCombSize(usize),
}

/// Total order on ids: numeric ids first (by value), then all other ids
/// lexicographically.
pub fn id_order(a: &str, b: &str) -> Ordering {
    match (a.parse::<i64>(), b.parse::<i64>()) {
        (Ok(x), Ok(y)) => x.cmp(&y).then_with(|| a.cmp(b)),
        (Ok(_), Err(_)) => Ordering::Less,
        (Err(_), Ok(_)) => Ordering::Greater,
        (Err(_), Err(_)) => a.cmp(b),
    }
}

/// Smallest numeric id strictly greater than every numeric id in `ids`.
pub(crate) fn fresh_numeric_id<'a>(ids: impl IntoIterator<Item = &'a str>) -> i64 {
    ids.into_iter()
        .filter_map(|id| id.parse::<i64>().ok())
        .max()
        .map_or(1, |m| m.saturating_add(1).max(1))
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct HostGraph {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    out_edges: Vec<Vec<usize>>,
    in_edges: Vec<Vec<usize>>,
}

impl HostGraph {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node(&self, index: usize) -> &Node {
        &self.nodes[index]
    }

    pub fn edge(&self, index: usize) -> &Edge {
        &self.edges[index]
    }

    /// Indices of edges leaving `node`, ascending.
    pub fn out_edges(&self, node: usize) -> &[usize] {
        &self.out_edges[node]
    }

    /// Indices of edges entering `node`, ascending.
    pub fn in_edges(&self, node: usize) -> &[usize] {
        &self.in_edges[node]
    }

    pub fn outdegree(&self, node: usize) -> usize {
        self.out_edges[node].len()
    }

    pub fn indegree(&self, node: usize) -> usize {
        self.in_edges[node].len()
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.nodes.binary_search_by(|n| id_order(&n.id, id)).ok()
    }

    pub fn edge_index(&self, id: &str) -> Option<usize> {
        self.edges.binary_search_by(|e| id_order(&e.id, id)).ok()
    }

    pub fn to_builder(&self) -> GraphBuilder {
        let mut b = GraphBuilder::new();
        for n in &self.nodes {
            b.add_node(n.id.clone(), n.label.clone(), n.mark, n.rooted)
                .expect("ids of a built graph are unique");
        }
        for e in &self.edges {
            b.add_edge(
                e.id.clone(),
                &self.nodes[e.source].id,
                &self.nodes[e.target].id,
                e.label.clone(),
                e.mark,
            )
            .expect("edges of a built graph are valid");
        }
        b
    }
}

impl fmt::Display for HostGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serialize_host_graph(self))
    }
}

/// Incremental constructor for [`HostGraph`].
#[derive(Clone, Debug, Default)]
pub struct GraphBuilder {
    nodes: Vec<Node>,
    node_ids: HashMap<String, usize>,
    edges: Vec<Edge>,
    edge_ids: HashMap<String, usize>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(
        &mut self,
        id: impl Into<String>,
        label: ListValue,
        mark: NodeMark,
        rooted: bool,
    ) -> Result<(), GraphError> {
        let id = id.into();
        if self.node_ids.contains_key(&id) {
            return Err(GraphError::DuplicateNode(id));
        }
        self.node_ids.insert(id.clone(), self.nodes.len());
        self.nodes.push(Node {
            id,
            label,
            mark,
            rooted,
        });
        Ok(())
    }

    pub fn add_edge(
        &mut self,
        id: impl Into<String>,
        source: &str,
        target: &str,
        label: ListValue,
        mark: EdgeMark,
    ) -> Result<(), GraphError> {
        let id = id.into();
        if self.edge_ids.contains_key(&id) {
            return Err(GraphError::DuplicateEdge(id));
        }
        let lookup = |end: &'static str, node: &str| {
            self.node_ids
                .get(node)
                .copied()
                .ok_or_else(|| GraphError::UnknownEndpoint {
                    edge: id.clone(),
                    end,
                    node: node.to_string(),
                })
        };
        let s = lookup("source", source)?;
        let t = lookup("target", target)?;
        self.edge_ids.insert(id.clone(), self.edges.len());
        self.edges.push(Edge {
            id,
            source: s,
            target: t,
            label,
            mark,
        });
        Ok(())
    }

    pub fn has_node(&self, id: &str) -> bool {
        self.node_ids.contains_key(id)
    }

    pub fn fresh_node_id(&self) -> String {
        fresh_numeric_id(self.nodes.iter().map(|n| n.id.as_str())).to_string()
    }

    pub fn fresh_edge_id(&self) -> String {
        fresh_numeric_id(self.edges.iter().map(|e| e.id.as_str())).to_string()
    }

    pub fn build(self) -> HostGraph {
        let mut order: Vec<usize> = (0..self.nodes.len()).collect();
        order.sort_by(|&a, &b| id_order(&self.nodes[a].id, &self.nodes[b].id));
        let mut remap = vec![0; self.nodes.len()];
        for (new, &old) in order.iter().enumerate() {
            remap[old] = new;
        }
        let mut slots: Vec<Option<Node>> = self.nodes.into_iter().map(Some).collect();
        let nodes: Vec<Node> = order
            .iter()
            .map(|&old| slots[old].take().expect("each node moved once"))
            .collect();

        let mut edges = self.edges;
        for e in &mut edges {
            e.source = remap[e.source];
            e.target = remap[e.target];
        }
        edges.sort_by(|a, b| id_order(&a.id, &b.id));

        let mut out_edges = vec![Vec::new(); nodes.len()];
        let mut in_edges = vec![Vec::new(); nodes.len()];
        for (i, e) in edges.iter().enumerate() {
            out_edges[e.source].push(i);
            in_edges[e.target].push(i);
        }
        HostGraph {
            nodes,
            edges,
            out_edges,
            in_edges,
        }
    }
}

/// The comb graph with `k` teeth: a directed path `1 -> 2 -> ... -> k` (the
/// spine) and nodes `k+1 .. 2k`, where tooth `k+i` has a single edge into
/// spine node `i`. All labels are empty and nothing is marked.
pub fn make_comb(k: usize) -> Result<HostGraph, GraphError> {
    if k < 1 {
        return Err(GraphError::InvalidCombSize(k));
    }
    let mut b = GraphBuilder::new();
    for i in 1..=2 * k {
        b.add_node(i.to_string(), ListValue::empty(), NodeMark::None, false)?;
    }
    let mut next_edge = 1;
    for i in 1..k {
        b.add_edge(
            next_edge.to_string(),
            &i.to_string(),
            &(i + 1).to_string(),
            ListValue::empty(),
            EdgeMark::None,
        )?;
        next_edge += 1;
    }
    for i in 1..=k {
        b.add_edge(
            next_edge.to_string(),
            &(k + i).to_string(),
            &i.to_string(),
            ListValue::empty(),
            EdgeMark::None,
        )?;
        next_edge += 1;
    }
    Ok(b.build())
}
