//! Backtracking isomorphism test for host graphs.

use std::collections::HashMap;

use super::{EdgeMark, HostGraph, ListValue, NodeMark};

type EdgeBag<'g> = Vec<(&'g ListValue, EdgeMark)>;

/// Per-node invariant used to prune candidate pairs.
#[derive(PartialEq, Eq, PartialOrd, Ord)]
struct Signature<'g> {
    label: &'g ListValue,
    mark: NodeMark,
    rooted: bool,
    indegree: usize,
    outdegree: usize,
}

struct Side<'g> {
    graph: &'g HostGraph,
    signatures: Vec<Signature<'g>>,
    /// Sorted (label, mark) multisets of the edges from one node to another.
    bags: HashMap<(usize, usize), EdgeBag<'g>>,
}

impl<'g> Side<'g> {
    fn new(graph: &'g HostGraph) -> Self {
        let signatures = (0..graph.node_count())
            .map(|v| {
                let n = graph.node(v);
                Signature {
                    label: &n.label,
                    mark: n.mark,
                    rooted: n.rooted,
                    indegree: graph.indegree(v),
                    outdegree: graph.outdegree(v),
                }
            })
            .collect();
        let mut bags: HashMap<(usize, usize), EdgeBag<'g>> = HashMap::new();
        for e in graph.edges() {
            bags.entry((e.source, e.target))
                .or_default()
                .push((&e.label, e.mark));
        }
        for bag in bags.values_mut() {
            bag.sort();
        }
        Side {
            graph,
            signatures,
            bags,
        }
    }

    fn bag(&self, s: usize, t: usize) -> &[(&'g ListValue, EdgeMark)] {
        self.bags.get(&(s, t)).map_or(&[], |b| b.as_slice())
    }
}

/// True iff there are bijections between the node sets and the edge sets of
/// `a` and `b` that preserve sources, targets, labels, marks and roots.
pub fn is_isomorphic(a: &HostGraph, b: &HostGraph) -> bool {
    if a.node_count() != b.node_count() || a.edge_count() != b.edge_count() {
        return false;
    }
    let left = Side::new(a);
    let right = Side::new(b);

    let mut ls: Vec<&Signature> = left.signatures.iter().collect();
    let mut rs: Vec<&Signature> = right.signatures.iter().collect();
    ls.sort();
    rs.sort();
    if ls != rs {
        return false;
    }

    let order = search_order(a);
    let mut map = vec![usize::MAX; a.node_count()];
    let mut used = vec![false; b.node_count()];
    extend(&left, &right, &order, 0, &mut map, &mut used)
}

/// Visits nodes so that each one is, where possible, adjacent to an earlier
/// one; adjacency checks then prune early.
fn search_order(g: &HostGraph) -> Vec<usize> {
    let n = g.node_count();
    let mut placed = vec![false; n];
    let mut links = vec![0usize; n];
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let next = (0..n)
            .filter(|&v| !placed[v])
            .max_by_key(|&v| {
                (
                    links[v],
                    g.indegree(v) + g.outdegree(v),
                    std::cmp::Reverse(v),
                )
            })
            .expect("an unplaced node remains");
        placed[next] = true;
        order.push(next);
        for &e in g.out_edges(next) {
            links[g.edge(e).target] += 1;
        }
        for &e in g.in_edges(next) {
            links[g.edge(e).source] += 1;
        }
    }
    order
}

fn extend(
    left: &Side,
    right: &Side,
    order: &[usize],
    depth: usize,
    map: &mut [usize],
    used: &mut [bool],
) -> bool {
    let Some(&u) = order.get(depth) else {
        return true;
    };
    for v in 0..right.graph.node_count() {
        if used[v] || left.signatures[u] != right.signatures[v] {
            continue;
        }
        if left.bag(u, u) != right.bag(v, v) {
            continue;
        }
        let consistent = order[..depth].iter().all(|&w| {
            let fw = map[w];
            left.bag(u, w) == right.bag(v, fw) && left.bag(w, u) == right.bag(fw, v)
        });
        if !consistent {
            continue;
        }
        map[u] = v;
        used[v] = true;
        if extend(left, right, order, depth + 1, map, used) {
            return true;
        }
        used[v] = false;
        map[u] = usize::MAX;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{make_comb, parse_host_graph};

    fn g(text: &str) -> HostGraph {
        parse_host_graph(text).unwrap()
    }

    #[test]
    fn empty_graphs() {
        assert!(is_isomorphic(&HostGraph::empty(), &HostGraph::empty()));
    }

    #[test]
    fn relabelled_path() {
        let a = g("[ (1, empty) (2, empty) (3, empty) | (a,1,2, empty) (b,2,3, empty) ]");
        let b = g("[ (7, empty) (8, empty) (9, empty) | (x,9,8, empty) (y,8,7, empty) ]");
        assert!(is_isomorphic(&a, &b));
    }

    #[test]
    fn path_vs_discrete() {
        let a = g("[ (1, empty) (2, empty) (3, empty) | (a,1,2, empty) (b,2,3, empty) ]");
        let b = g("[ (1, empty) (2, empty) (3, empty) | ]");
        assert!(!is_isomorphic(&a, &b));
    }

    #[test]
    fn marks_roots_and_labels_matter() {
        let plain = g("[ (1, empty) | ]");
        assert!(!is_isomorphic(&plain, &g("[ (1, empty # grey) | ]")));
        assert!(!is_isomorphic(&plain, &g("[ (1, empty (R)) | ]")));
        assert!(!is_isomorphic(&plain, &g("[ (1, 0) | ]")));
        let e1 = g("[ (1, empty) (2, empty) | (a, 1, 2, 1) (b, 1, 2, 2) ]");
        let e2 = g("[ (1, empty) (2, empty) | (a, 1, 2, 2) (b, 1, 2, 1) ]");
        let e3 = g("[ (1, empty) (2, empty) | (a, 1, 2, 1) (b, 2, 1, 2) ]");
        assert!(is_isomorphic(&e1, &e2));
        assert!(!is_isomorphic(&e1, &e3));
    }

    #[test]
    fn comb_is_self_isomorphic() {
        let c = make_comb(6).unwrap();
        assert!(is_isomorphic(&c, &c));
    }
}
