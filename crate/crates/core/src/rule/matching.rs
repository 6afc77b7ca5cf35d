//! Injective matching of left-hand graphs.

use std::collections::HashSet;

use super::{eval_condition, Binding, LabelExpr, Rule, RuleError, Term, VarType};
use crate::graph::{Atom, HostGraph, ListValue};

/// An occurrence of a rule's left-hand graph in a host graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Match {
    /// Host node index for each left-hand node, in declaration order.
    pub nodes: Vec<usize>,
    /// Host edge index for each left-hand edge, in declaration order.
    pub edges: Vec<usize>,
    pub binding: Binding,
}

type Partial = Vec<(String, ListValue)>;

fn lookup<'a>(binding: &'a Partial, name: &str) -> Option<&'a ListValue> {
    binding.iter().find(|(n, _)| n == name).map(|(_, v)| v)
}

/// Matches one term against one atom, extending `binding` on success.
fn match_atom(rule: &Rule, term: &Term, atom: &Atom, binding: &mut Partial) -> bool {
    match term {
        Term::Const(c) => c == atom,
        Term::Var(v) => {
            let ty = rule.var_type(v).unwrap_or(VarType::List);
            if !ty.admits(atom) {
                return false;
            }
            match lookup(binding, v) {
                Some(bound) => bound.atoms() == std::slice::from_ref(atom),
                None => {
                    binding.push((v.clone(), ListValue(vec![atom.clone()])));
                    true
                }
            }
        }
        Term::Arith(_) => false,
    }
}

/// Matches a left-hand label against a host label. With at most one list
/// variable per label the split is unique, so there is at most one way to
/// extend the binding.
pub(crate) fn match_label(
    rule: &Rule,
    label: &LabelExpr,
    value: &ListValue,
    binding: &mut Partial,
) -> bool {
    let start = binding.len();
    let ok = match_label_inner(rule, label, value, binding);
    if !ok {
        binding.truncate(start);
    }
    ok
}

fn match_label_inner(
    rule: &Rule,
    label: &LabelExpr,
    value: &ListValue,
    binding: &mut Partial,
) -> bool {
    let terms = &label.0;
    let atoms = value.atoms();
    let list_at = terms
        .iter()
        .position(|t| matches!(t, Term::Var(v) if rule.var_type(v) == Some(VarType::List)));
    let Some(k) = list_at else {
        return terms.len() == atoms.len()
            && terms
                .iter()
                .zip(atoms)
                .all(|(t, a)| match_atom(rule, t, a, binding));
    };
    let suffix = terms.len() - k - 1;
    if atoms.len() < k + suffix {
        return false;
    }
    let middle_end = atoms.len() - suffix;
    let fixed_ok = terms[..k]
        .iter()
        .zip(&atoms[..k])
        .chain(terms[k + 1..].iter().zip(&atoms[middle_end..]))
        .all(|(t, a)| match_atom(rule, t, a, binding));
    if !fixed_ok {
        return false;
    }
    let Term::Var(name) = &terms[k] else {
        unreachable!("position found a variable")
    };
    let middle = ListValue(atoms[k..middle_end].to_vec());
    match lookup(binding, name) {
        Some(bound) => *bound == middle,
        None => {
            binding.push((name.clone(), middle));
            true
        }
    }
}

struct Search<'a> {
    rule: &'a Rule,
    g: &'a HostGraph,
    lhs_in: Vec<usize>,
    lhs_out: Vec<usize>,
    node_map: Vec<usize>,
    node_used: Vec<bool>,
    edge_map: Vec<usize>,
    edge_used: Vec<bool>,
    binding: Partial,
    found: Vec<Match>,
}

impl Search<'_> {
    fn nodes(&mut self, i: usize) {
        if i == self.rule.lhs.nodes.len() {
            self.edges(0);
            return;
        }
        let ln = &self.rule.lhs.nodes[i];
        for v in 0..self.g.node_count() {
            if self.node_used[v] {
                continue;
            }
            let hn = self.g.node(v);
            if hn.mark != ln.mark
                || hn.rooted != ln.rooted
                || self.g.indegree(v) < self.lhs_in[i]
                || self.g.outdegree(v) < self.lhs_out[i]
            {
                continue;
            }
            let mark = self.binding.len();
            if !match_label(self.rule, &ln.label, &hn.label, &mut self.binding) {
                continue;
            }
            self.node_map[i] = v;
            self.node_used[v] = true;
            self.nodes(i + 1);
            self.node_used[v] = false;
            self.binding.truncate(mark);
        }
    }

    fn edges(&mut self, j: usize) {
        if j == self.rule.lhs.edges.len() {
            self.found.push(Match {
                nodes: self.node_map.clone(),
                edges: self.edge_map.clone(),
                binding: self.binding.iter().cloned().collect(),
            });
            return;
        }
        let le = &self.rule.lhs.edges[j];
        let (s, t) = (self.node_map[le.source], self.node_map[le.target]);
        for &e in self.g.out_edges(s) {
            let he = self.g.edge(e);
            if self.edge_used[e] || he.target != t || he.mark != le.mark {
                continue;
            }
            let mark = self.binding.len();
            if !match_label(self.rule, &le.label, &he.label, &mut self.binding) {
                continue;
            }
            self.edge_map[j] = e;
            self.edge_used[e] = true;
            self.edges(j + 1);
            self.edge_used[e] = false;
            self.binding.truncate(mark);
        }
    }
}

/// Every injective, label-compatible occurrence of the left-hand graph,
/// before the dangling condition and the `where` clause are checked.
pub(crate) fn find_occurrences(rule: &Rule, g: &HostGraph) -> Vec<Match> {
    let n = rule.lhs.nodes.len();
    let mut lhs_in = vec![0; n];
    let mut lhs_out = vec![0; n];
    for e in &rule.lhs.edges {
        lhs_out[e.source] += 1;
        lhs_in[e.target] += 1;
    }
    let mut search = Search {
        rule,
        g,
        lhs_in,
        lhs_out,
        node_map: vec![0; n],
        node_used: vec![false; g.node_count()],
        edge_map: vec![0; rule.lhs.edges.len()],
        edge_used: vec![false; g.edge_count()],
        binding: Vec::new(),
        found: Vec::new(),
    };
    search.nodes(0);
    search.found
}

/// All matches of `rule` in `g` that satisfy the dangling condition and the
/// application condition, ordered lexicographically by the host nodes
/// assigned to the left-hand nodes in declaration order.
pub fn find_matches(rule: &Rule, g: &HostGraph) -> Result<Vec<Match>, RuleError> {
    let mut out = Vec::new();
    for m in find_occurrences(rule, g) {
        if check_dangling(rule, &m, g) && eval_condition(rule, &m, g)? {
            out.push(m);
        }
    }
    Ok(out)
}

/// True iff no host node to be deleted has an incident edge outside the
/// image of the match.
pub fn check_dangling(rule: &Rule, m: &Match, g: &HostGraph) -> bool {
    let matched: HashSet<usize> = m.edges.iter().copied().collect();
    rule.lhs
        .nodes
        .iter()
        .zip(&m.nodes)
        .filter(|(ln, _)| ln.interface.is_none())
        .all(|(_, &v)| {
            g.out_edges(v)
                .iter()
                .chain(g.in_edges(v))
                .all(|e| matched.contains(e))
        })
}
