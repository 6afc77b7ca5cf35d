//! Evaluation of label expressions and application conditions under a match.

use super::{ArithOp, Binding, CmpOp, Condition, IntExpr, LabelExpr, Match, Rule, RuleError, Term};
use crate::graph::{Atom, HostGraph, ListValue};

/// Degree and adjacency information for `indeg`/`outdeg`/`edge`.
struct Site<'a> {
    rule: &'a Rule,
    m: &'a Match,
    g: &'a HostGraph,
}

impl Site<'_> {
    fn host_node(&self, n: u32) -> Result<usize, RuleError> {
        self.rule
            .lhs
            .node_with_interface(n)
            .map(|i| self.m.nodes[i])
            .ok_or_else(|| RuleError::Malformed {
                rule: self.rule.name.clone(),
                reason: format!("condition refers to unknown node {n}"),
            })
    }
}

fn eval_int(e: &IntExpr, binding: &Binding, site: Option<&Site>) -> Result<i64, RuleError> {
    let overflow = || RuleError::Overflow(e.to_string());
    match e {
        IntExpr::Lit(n) => Ok(*n),
        IntExpr::Var(v) => binding
            .get(v)
            .and_then(ListValue::as_int)
            .ok_or_else(|| RuleError::TypeMismatch(format!("`{v}` is not bound to an integer"))),
        IntExpr::Indeg(n) | IntExpr::Outdeg(n) => {
            let site = site.ok_or_else(|| {
                RuleError::TypeMismatch(format!("`{e}` is only meaningful in a condition"))
            })?;
            let v = site.host_node(*n)?;
            let d = if matches!(e, IntExpr::Indeg(_)) {
                site.g.indegree(v)
            } else {
                site.g.outdegree(v)
            };
            i64::try_from(d).map_err(|_| overflow())
        }
        IntExpr::Neg(inner) => eval_int(inner, binding, site)?
            .checked_neg()
            .ok_or_else(overflow),
        IntExpr::Bin(op, a, b) => {
            let a = eval_int(a, binding, site)?;
            let b = eval_int(b, binding, site)?;
            match op {
                ArithOp::Add => a.checked_add(b),
                ArithOp::Sub => a.checked_sub(b),
                ArithOp::Mul => a.checked_mul(b),
            }
            .ok_or_else(overflow)
        }
    }
}

fn eval_label(
    label: &LabelExpr,
    binding: &Binding,
    site: Option<&Site>,
) -> Result<ListValue, RuleError> {
    let mut atoms = Vec::new();
    for t in &label.0 {
        match t {
            Term::Const(a) => atoms.push(a.clone()),
            Term::Var(v) => {
                let value = binding
                    .get(v)
                    .ok_or_else(|| RuleError::TypeMismatch(format!("`{v}` is unbound")))?;
                atoms.extend(value.atoms().iter().cloned());
            }
            Term::Arith(e) => atoms.push(Atom::Int(eval_int(e, binding, site)?)),
        }
    }
    Ok(ListValue(atoms))
}

/// Instantiates a right-hand label under a variable binding.
pub fn instantiate(label: &LabelExpr, binding: &Binding) -> Result<ListValue, RuleError> {
    eval_label(label, binding, None)
}

/// Evaluates the rule's `where` clause for a match; an absent clause holds.
pub fn eval_condition(rule: &Rule, m: &Match, g: &HostGraph) -> Result<bool, RuleError> {
    match &rule.condition {
        None => Ok(true),
        Some(c) => eval(c, &Site { rule, m, g }),
    }
}

fn eval(c: &Condition, site: &Site) -> Result<bool, RuleError> {
    match c {
        Condition::Edge(a, b) => {
            let (s, t) = (site.host_node(*a)?, site.host_node(*b)?);
            Ok(site
                .g
                .out_edges(s)
                .iter()
                .any(|&e| site.g.edge(e).target == t))
        }
        Condition::Not(c) => Ok(!eval(c, site)?),
        Condition::And(a, b) => Ok(eval(a, site)? && eval(b, site)?),
        Condition::Or(a, b) => Ok(eval(a, site)? || eval(b, site)?),
        Condition::Cmp(op, a, b) => {
            let x = eval_label(a, &site.m.binding, Some(site))?;
            let y = eval_label(b, &site.m.binding, Some(site))?;
            match op {
                CmpOp::Eq => Ok(x == y),
                CmpOp::Ne => Ok(x != y),
                _ => {
                    let (Some(x), Some(y)) = (x.as_int(), y.as_int()) else {
                        return Err(RuleError::TypeMismatch(format!(
                            "`{}` compares non-integers {x} and {y}",
                            op.symbol()
                        )));
                    };
                    Ok(match op {
                        CmpOp::Lt => x < y,
                        CmpOp::Le => x <= y,
                        CmpOp::Gt => x > y,
                        CmpOp::Ge => x >= y,
                        CmpOp::Eq | CmpOp::Ne => unreachable!("handled above"),
                    })
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rule::parse_rule;

    fn binding(pairs: &[(&str, ListValue)]) -> Binding {
        pairs
            .iter()
            .map(|(k, v)| (k.to_string(), v.clone()))
            .collect()
    }

    #[test]
    fn instantiates_lists_and_arithmetic() {
        let r = parse_rule("t(x: list; n: int) = [ (v@1, x:n) | ] => [ (v@1, n * n:x:\"s\") | ]")
            .unwrap();
        let b = binding(&[
            ("x", ListValue(vec![Atom::Int(1), Atom::Int(2)])),
            ("n", ListValue::int(7)),
        ]);
        let v = instantiate(&r.rhs.nodes[0].label, &b).unwrap();
        assert_eq!(v.to_string(), "49:1:2:\"s\"");
    }

    #[test]
    fn overflow_is_an_error() {
        let r = parse_rule("t(n: int) = [ (v@1, n) | ] => [ (v@1, n * n) | ]").unwrap();
        let b = binding(&[("n", ListValue::int(i64::MAX))]);
        assert!(matches!(
            instantiate(&r.rhs.nodes[0].label, &b),
            Err(RuleError::Overflow(_))
        ));
        let b = binding(&[("n", ListValue::int(-i64::MAX - 1))]);
        let r = parse_rule("t(n: int) = [ (v@1, n) | ] => [ (v@1, -n) | ]").unwrap();
        assert!(matches!(
            instantiate(&r.rhs.nodes[0].label, &b),
            Err(RuleError::Overflow(_))
        ));
    }
}
