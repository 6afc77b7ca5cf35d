//! Rewriting a host graph at a match.

use std::collections::HashSet;

use super::{find_matches, instantiate, Match, Rule, RuleError};
use crate::graph::{fresh_numeric_id, GraphBuilder, HostGraph, KeyedGraph};

/// Replaces the image of the left-hand graph by the right-hand graph.
/// Interface nodes keep their ids; created items get numeric ids above every
/// numeric id already present.
pub fn apply_match(rule: &Rule, m: &Match, g: &HostGraph) -> Result<HostGraph, RuleError> {
    let mut deleted_nodes = HashSet::new();
    let mut kept_as: Vec<Option<usize>> = vec![None; g.node_count()];
    for (ln, &v) in rule.lhs.nodes.iter().zip(&m.nodes) {
        match ln.interface {
            None => {
                deleted_nodes.insert(v);
            }
            Some(n) => {
                kept_as[v] = rule.rhs.node_with_interface(n);
            }
        }
    }
    let deleted_edges: HashSet<usize> = m.edges.iter().copied().collect();

    let mut b = GraphBuilder::new();
    for (v, node) in g.nodes().iter().enumerate() {
        if deleted_nodes.contains(&v) {
            continue;
        }
        let (label, mark, rooted) = match kept_as[v] {
            Some(r) => {
                let rn = &rule.rhs.nodes[r];
                (instantiate(&rn.label, &m.binding)?, rn.mark, rn.rooted)
            }
            None => (node.label.clone(), node.mark, node.rooted),
        };
        b.add_node(node.id.clone(), label, mark, rooted)
            .expect("host ids are unique");
    }

    let mut next_node = fresh_numeric_id(g.nodes().iter().map(|n| n.id.as_str()));
    let mut rhs_ids = Vec::with_capacity(rule.rhs.nodes.len());
    for rn in &rule.rhs.nodes {
        let id = match rn.interface {
            Some(n) => {
                let l = rule
                    .lhs
                    .node_with_interface(n)
                    .expect("interfaces agree on both sides");
                g.node(m.nodes[l]).id.clone()
            }
            None => {
                let id = next_node.to_string();
                next_node += 1;
                b.add_node(
                    id.clone(),
                    instantiate(&rn.label, &m.binding)?,
                    rn.mark,
                    rn.rooted,
                )
                .expect("fresh id is unused");
                id
            }
        };
        rhs_ids.push(id);
    }

    for (i, e) in g.edges().iter().enumerate() {
        if deleted_edges.contains(&i) {
            continue;
        }
        b.add_edge(
            e.id.clone(),
            &g.node(e.source).id,
            &g.node(e.target).id,
            e.label.clone(),
            e.mark,
        )
        .expect("surviving edges have surviving endpoints");
    }
    let mut next_edge = fresh_numeric_id(g.edges().iter().map(|e| e.id.as_str()));
    for re in &rule.rhs.edges {
        b.add_edge(
            next_edge.to_string(),
            &rhs_ids[re.source],
            &rhs_ids[re.target],
            instantiate(&re.label, &m.binding)?,
            re.mark,
        )
        .expect("fresh edge between existing nodes");
        next_edge += 1;
    }
    Ok(b.build())
}

/// All graphs obtainable by applying one rule of the set, one per
/// isomorphism class, sorted by canonical key. An empty result means the
/// call fails.
pub fn apply_rule_set(rules: &[&Rule], g: &HostGraph) -> Result<Vec<KeyedGraph>, RuleError> {
    let mut results = Vec::new();
    for rule in rules {
        for m in find_matches(rule, g)? {
            results.push(KeyedGraph::new(apply_match(rule, &m, g)?));
        }
    }
    if results.len() < 2 {
        return Ok(results);
    }
    let mut seen = HashSet::new();
    results.retain(|k| seen.insert(k.key().to_string()));
    results.sort_by(|a, b| a.key().cmp(b.key()));
    Ok(results)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{
        is_isomorphic, make_comb, parse_host_graph, serialize_host_graph, NodeMark,
    };
    use crate::rule::parse_rule;

    #[test]
    fn deleting_the_sink_of_a_path() {
        let r = parse_rule(
            "r() = [ (1@1, empty) (2, empty) | (e, 1, 2, empty) ] => [ (1@1, empty) | ]",
        )
        .unwrap();
        let g = parse_host_graph(
            "[ (1, empty) (2, empty) (3, empty) | (a,1,2, empty) (b,2,3, empty) ]",
        )
        .unwrap();
        let m = &find_matches(&r, &g).unwrap()[0];
        let h = apply_match(&r, m, &g).unwrap();
        assert_eq!(
            serialize_host_graph(&h),
            "[ (1, empty) (2, empty) | (a, 1, 2, empty) ]"
        );
        assert_eq!(g.node_count(), 3, "input is untouched");
    }

    #[test]
    fn growing_a_grey_node() {
        let r1 =
            parse_rule("r1() = [ (1@1, empty # grey) | ] => [ (1@1, empty # grey) (2, empty) | ]")
                .unwrap();
        let g = parse_host_graph("[ (1, empty # grey) | ]").unwrap();
        let m = &find_matches(&r1, &g).unwrap()[0];
        let h = apply_match(&r1, m, &g).unwrap();
        assert_eq!(
            serialize_host_graph(&h),
            "[ (1, empty # grey) (2, empty) | ]"
        );
    }

    #[test]
    fn relabels_and_remarks_interface_nodes() {
        let r = parse_rule(
            "inc(n: int) = [ (v@1, n # red) | (e, v, v, n) ] => [ (v@1, n + 1) | (f, v, v, n * 2 # dashed) ]",
        )
        .unwrap();
        let g = parse_host_graph("[ (x, 3 # red) (7, empty) | (9, x, x, 3) (k, 7, 7, empty) ]")
            .unwrap();
        let m = &find_matches(&r, &g).unwrap()[0];
        let h = apply_match(&r, m, &g).unwrap();
        assert_eq!(
            serialize_host_graph(&h),
            "[ (7, empty) (x, 4) | (10, x, x, 6 # dashed) (k, 7, 7, empty) ]"
        );
        assert_eq!(h.node(1).mark, NodeMark::None);
    }

    #[test]
    fn identity_rule_preserves_the_graph() {
        let r = parse_rule("id() = [ (1@1, empty) | ] => [ (1@1, empty) | ]").unwrap();
        let g = parse_host_graph("[ (1, empty) (2, empty) | (a, 1, 2, empty) ]").unwrap();
        for m in find_matches(&r, &g).unwrap() {
            assert!(is_isomorphic(&apply_match(&r, &m, &g).unwrap(), &g));
        }
    }

    #[test]
    fn rule_sets_deduplicate_and_may_fail() {
        let r1 =
            parse_rule("r1() = [ (1@1, empty # grey) | ] => [ (1@1, empty # grey) (2, empty) | ]")
                .unwrap();
        let r2 = parse_rule("r2() = [ (1, empty # grey) | ] => [ | ]").unwrap();
        let g = parse_host_graph("[ (1, empty # grey) | ]").unwrap();
        let out = apply_rule_set(&[&r1, &r2], &g).unwrap();
        assert_eq!(out.len(), 2);
        assert!(out.iter().any(|k| k.graph().node_count() == 0));
        assert!(out.iter().any(|k| k.graph().node_count() == 2));
        assert!(apply_rule_set(&[], &g).unwrap().is_empty());

        let comb = parse_rule(
            "comb() = [ (1@1, empty) (2, empty) | (e, 2, 1, empty) ] => [ (1@1, empty) | ]",
        )
        .unwrap();
        let out = apply_rule_set(&[&comb], &make_comb(4).unwrap()).unwrap();
        assert_eq!(out.len(), 4);
        let twice = apply_rule_set(&[&comb, &comb], &make_comb(4).unwrap()).unwrap();
        assert_eq!(twice.len(), 4);
    }

    #[test]
    fn overflow_surfaces_as_an_error() {
        let r = parse_rule("big(n: int) = [ (1@1, n) | ] => [ (1@1, n * n) | ]").unwrap();
        let g = parse_host_graph("[ (1, 9223372036854775807) | ]").unwrap();
        assert!(matches!(
            apply_rule_set(&[&r], &g),
            Err(RuleError::Overflow(_))
        ));
    }
}
