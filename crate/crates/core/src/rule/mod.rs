//! Conditional graph transformation rules: representation, matching and
//! application.
//!
//! Applying a rule `L => R` to a host graph follows the usual operational
//! reading of the double-pushout construction: variables are bound by
//! matching the left-hand labels, an injective occurrence of `L` is chosen
//! that satisfies the dangling condition and the `where` clause, and then
//! interface nodes stay (possibly relabelled), the remaining images of `L`
//! are removed and the remaining items of `R` are added.

mod apply;
mod expr;
mod matching;
mod parse;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::graph::{Atom, EdgeMark, NodeMark};

pub use apply::{apply_match, apply_rule_set};
pub use expr::{eval_condition, instantiate};
pub use matching::{check_dangling, find_matches, Match};
pub(crate) use parse::parse_rule_decl;
pub use parse::{parse_rule, parse_rules};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error("integer overflow while evaluating `{0}`")]
    Overflow(String),
    #[error("type mismatch: {0}")]
    TypeMismatch(String),
    #[error("rule `{rule}` is malformed: {reason}")]
    Malformed { rule: String, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarType {
    Int,
    Char,
    Str,
    Atom,
    List,
}

impl VarType {
    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "int" => VarType::Int,
            "char" => VarType::Char,
            "string" => VarType::Str,
            "atom" => VarType::Atom,
            "list" => VarType::List,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            VarType::Int => "int",
            VarType::Char => "char",
            VarType::Str => "string",
            VarType::Atom => "atom",
            VarType::List => "list",
        }
    }

    /// Whether a single atom inhabits this type.
    pub fn admits(self, atom: &Atom) -> bool {
        match (self, atom) {
            (VarType::Int, Atom::Int(_)) => true,
            (VarType::Str, Atom::Str(_)) => true,
            (VarType::Char, Atom::Str(s)) => s.chars().count() == 1,
            (VarType::Atom, _) | (VarType::List, _) => true,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Variable {
    pub name: String,
    pub ty: VarType,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum IntExpr {
    Lit(i64),
    Var(String),
    /// Indegree of the node with this interface number (conditions only).
    Indeg(u32),
    Outdeg(u32),
    Neg(Box<IntExpr>),
    Bin(ArithOp, Box<IntExpr>, Box<IntExpr>),
}

impl IntExpr {
    fn visit_vars<'a>(&'a self, f: &mut impl FnMut(&'a str)) {
        match self {
            IntExpr::Var(v) => f(v),
            IntExpr::Neg(e) => e.visit_vars(f),
            IntExpr::Bin(_, a, b) => {
                a.visit_vars(f);
                b.visit_vars(f);
            }
            IntExpr::Lit(_) | IntExpr::Indeg(_) | IntExpr::Outdeg(_) => {}
        }
    }

    fn visit_nodes(&self, f: &mut impl FnMut(u32)) {
        match self {
            IntExpr::Indeg(n) | IntExpr::Outdeg(n) => f(*n),
            IntExpr::Neg(e) => e.visit_nodes(f),
            IntExpr::Bin(_, a, b) => {
                a.visit_nodes(f);
                b.visit_nodes(f);
            }
            IntExpr::Lit(_) | IntExpr::Var(_) => {}
        }
    }
}

impl fmt::Display for IntExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IntExpr::Lit(n) => write!(f, "{n}"),
            IntExpr::Var(v) => f.write_str(v),
            IntExpr::Indeg(n) => write!(f, "indeg({n})"),
            IntExpr::Outdeg(n) => write!(f, "outdeg({n})"),
            IntExpr::Neg(e) => write!(f, "-({e})"),
            IntExpr::Bin(op, a, b) => {
                let sym = match op {
                    ArithOp::Add => "+",
                    ArithOp::Sub => "-",
                    ArithOp::Mul => "*",
                };
                write!(f, "({a} {sym} {b})")
            }
        }
    }
}

/// One entry of a label expression.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Const(Atom),
    Var(String),
    Arith(IntExpr),
}

/// A label in a rule: a `:`-separated sequence of terms; `empty` is the
/// empty sequence.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct LabelExpr(pub Vec<Term>);

impl LabelExpr {
    pub fn empty() -> Self {
        LabelExpr(Vec::new())
    }

    fn vars(&self) -> Vec<&str> {
        let mut out = Vec::new();
        for t in &self.0 {
            match t {
                Term::Var(v) => out.push(v.as_str()),
                Term::Arith(e) => e.visit_vars(&mut |v| out.push(v)),
                Term::Const(_) => {}
            }
        }
        out
    }
}

impl fmt::Display for LabelExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("empty");
        }
        for (i, t) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(":")?;
            }
            match t {
                Term::Const(a) => write!(f, "{a}")?,
                Term::Var(v) => f.write_str(v)?,
                Term::Arith(e) => write!(f, "{e}")?,
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RuleNode {
    pub id: String,
    /// Interface number; unnumbered left-hand nodes are deleted and
    /// unnumbered right-hand nodes are created.
    pub interface: Option<u32>,
    pub label: LabelExpr,
    pub mark: NodeMark,
    pub rooted: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RuleEdge {
    pub id: String,
    pub source: usize,
    pub target: usize,
    pub label: LabelExpr,
    pub mark: EdgeMark,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct RuleGraph {
    pub nodes: Vec<RuleNode>,
    pub edges: Vec<RuleEdge>,
}

impl RuleGraph {
    pub fn node_with_interface(&self, n: u32) -> Option<usize> {
        self.nodes.iter().position(|v| v.interface == Some(n))
    }

    fn interfaces(&self) -> Vec<u32> {
        self.nodes.iter().filter_map(|v| v.interface).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    fn is_ordering(self) -> bool {
        matches!(self, CmpOp::Lt | CmpOp::Le | CmpOp::Gt | CmpOp::Ge)
    }
}

/// The `where` clause of a rule.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Condition {
    /// An edge exists from the image of the first interface node to the
    /// image of the second.
    Edge(u32, u32),
    Cmp(CmpOp, LabelExpr, LabelExpr),
    Not(Box<Condition>),
    And(Box<Condition>, Box<Condition>),
    Or(Box<Condition>, Box<Condition>),
}

impl Condition {
    fn visit(&self, f: &mut impl FnMut(&Condition)) {
        f(self);
        match self {
            Condition::Not(c) => c.visit(f),
            Condition::And(a, b) | Condition::Or(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Condition::Edge(..) | Condition::Cmp(..) => {}
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Condition::Edge(a, b) => write!(f, "edge({a}, {b})"),
            Condition::Cmp(op, a, b) => write!(f, "{a} {} {b}", op.symbol()),
            Condition::Not(c) => write!(f, "not ({c})"),
            Condition::And(a, b) => write!(f, "({a}) and ({b})"),
            Condition::Or(a, b) => write!(f, "({a}) or ({b})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Rule {
    pub name: String,
    pub variables: Vec<Variable>,
    pub lhs: RuleGraph,
    pub rhs: RuleGraph,
    pub condition: Option<Condition>,
}

impl Rule {
    /// Builds a rule after checking its well-formedness.
    pub fn new(
        name: impl Into<String>,
        variables: Vec<Variable>,
        lhs: RuleGraph,
        rhs: RuleGraph,
        condition: Option<Condition>,
    ) -> Result<Self, RuleError> {
        let rule = Rule {
            name: name.into(),
            variables,
            lhs,
            rhs,
            condition,
        };
        rule.validate()?;
        Ok(rule)
    }

    pub fn var_type(&self, name: &str) -> Option<VarType> {
        self.variables.iter().find(|v| v.name == name).map(|v| v.ty)
    }

    fn malformed(&self, reason: impl Into<String>) -> RuleError {
        RuleError::Malformed {
            rule: self.name.clone(),
            reason: reason.into(),
        }
    }

    fn validate(&self) -> Result<(), RuleError> {
        let mut declared: HashMap<&str, VarType> = HashMap::new();
        for v in &self.variables {
            if declared.insert(&v.name, v.ty).is_some() {
                return Err(self.malformed(format!("variable `{}` declared twice", v.name)));
            }
        }

        let mut lhs_vars = BTreeSet::new();
        let lhs_labels = self
            .lhs
            .nodes
            .iter()
            .map(|n| &n.label)
            .chain(self.lhs.edges.iter().map(|e| &e.label));
        for label in lhs_labels {
            let mut list_vars = 0;
            for t in &label.0 {
                match t {
                    Term::Arith(e) => {
                        return Err(self
                            .malformed(format!("left-hand label contains the expression `{e}`")))
                    }
                    Term::Var(v) => {
                        let ty = *declared
                            .get(v.as_str())
                            .ok_or_else(|| self.malformed(format!("undeclared variable `{v}`")))?;
                        if ty == VarType::List {
                            list_vars += 1;
                        }
                        lhs_vars.insert(v.as_str());
                    }
                    Term::Const(_) => {}
                }
            }
            if list_vars > 1 {
                return Err(self.malformed(format!(
                    "left-hand label `{label}` contains more than one list variable"
                )));
            }
        }

        for label in self
            .rhs
            .nodes
            .iter()
            .map(|n| &n.label)
            .chain(self.rhs.edges.iter().map(|e| &e.label))
        {
            for t in &label.0 {
                if let Term::Arith(e) = t {
                    let mut degree = false;
                    e.visit_nodes(&mut |_| degree = true);
                    if degree {
                        return Err(
                            self.malformed("indeg/outdeg may only be used in the condition")
                        );
                    }
                }
            }
            self.check_vars(label, &declared, &lhs_vars)?;
        }

        for side in [&self.lhs, &self.rhs] {
            let ifaces = side.interfaces();
            let unique: BTreeSet<u32> = ifaces.iter().copied().collect();
            if unique.len() != ifaces.len() {
                return Err(self.malformed("interface numbers must be unique"));
            }
            for e in &side.edges {
                if e.source >= side.nodes.len() || e.target >= side.nodes.len() {
                    return Err(self.malformed(format!("edge `{}` has no endpoint", e.id)));
                }
            }
        }
        let l: BTreeSet<u32> = self.lhs.interfaces().into_iter().collect();
        let r: BTreeSet<u32> = self.rhs.interfaces().into_iter().collect();
        if l != r {
            return Err(self.malformed("left and right graphs must use the same interface numbers"));
        }

        if let Some(cond) = &self.condition {
            let mut problem = None;
            cond.visit(&mut |c| {
                if problem.is_some() {
                    return;
                }
                match c {
                    Condition::Edge(a, b) => {
                        for n in [a, b] {
                            if !l.contains(n) {
                                problem = Some(format!("condition refers to unknown node {n}"));
                            }
                        }
                    }
                    Condition::Cmp(op, a, b) => {
                        for side in [a, b] {
                            for t in &side.0 {
                                if let Term::Arith(e) = t {
                                    e.visit_nodes(&mut |n| {
                                        if !l.contains(&n) {
                                            problem = Some(format!(
                                                "condition refers to unknown node {n}"
                                            ));
                                        }
                                    });
                                }
                            }
                            if let Err(e) = self.check_vars(side, &declared, &lhs_vars) {
                                problem = Some(e.to_string());
                            }
                            if op.is_ordering() && !self.is_int_valued(side) {
                                problem = Some(format!(
                                    "`{}` needs integer operands, found `{side}`",
                                    op.symbol()
                                ));
                            }
                        }
                    }
                    Condition::Not(_) | Condition::And(..) | Condition::Or(..) => {}
                }
            });
            if let Some(p) = problem {
                return Err(self.malformed(p));
            }
        }
        Ok(())
    }

    fn check_vars(
        &self,
        label: &LabelExpr,
        declared: &HashMap<&str, VarType>,
        lhs_vars: &BTreeSet<&str>,
    ) -> Result<(), RuleError> {
        for v in label.vars() {
            if !declared.contains_key(v) {
                return Err(self.malformed(format!("undeclared variable `{v}`")));
            }
            if !lhs_vars.contains(v) {
                return Err(self.malformed(format!(
                    "variable `{v}` does not occur in the left-hand graph"
                )));
            }
        }
        for t in &label.0 {
            if let Term::Arith(e) = t {
                let mut bad = None;
                e.visit_vars(&mut |v| {
                    if declared.get(v) != Some(&VarType::Int) {
                        bad = Some(v.to_string());
                    }
                });
                if let Some(v) = bad {
                    return Err(self.malformed(format!(
                        "variable `{v}` is used in arithmetic but is not an int"
                    )));
                }
            }
        }
        Ok(())
    }

    fn is_int_valued(&self, label: &LabelExpr) -> bool {
        match label.0.as_slice() {
            [Term::Const(Atom::Int(_))] | [Term::Arith(_)] => true,
            [Term::Var(v)] => self.var_type(v) == Some(VarType::Int),
            _ => false,
        }
    }
}

/// Variable assignment produced by matching.
pub type Binding = BTreeMap<String, crate::graph::ListValue>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_arithmetic_on_the_left() {
        let err = parse_rule("r(n: int) = [ (a@1, n + 1) | ] => [ (a@1, n) | ]").unwrap_err();
        assert!(err.message.contains("left-hand label"), "{err}");
    }

    #[test]
    fn rejects_two_list_variables_in_one_label() {
        let err = parse_rule("r(x, y: list) = [ (a@1, x:y) | ] => [ (a@1, x) | ]").unwrap_err();
        assert!(err.message.contains("more than one list variable"), "{err}");
    }

    #[test]
    fn rejects_right_only_variables() {
        let err = parse_rule("r(x, y: list) = [ (a@1, x) | ] => [ (a@1, y) | ]").unwrap_err();
        assert!(err.message.contains("does not occur"), "{err}");
    }

    #[test]
    fn rejects_mismatched_interfaces() {
        let err = parse_rule("r() = [ (a@1, empty) | ] => [ (a@2, empty) | ]").unwrap_err();
        assert!(err.message.contains("same interface numbers"), "{err}");
    }

    #[test]
    fn rejects_ordering_on_lists() {
        let err =
            parse_rule("r(x: list) = [ (a@1, x) | ] => [ (a@1, x) | ] where x < 2").unwrap_err();
        assert!(err.message.contains("integer operands"), "{err}");
    }

    #[test]
    fn rejects_unknown_condition_nodes() {
        let err = parse_rule("r() = [ (a@1, empty) | ] => [ (a@1, empty) | ] where indeg(2) = 0")
            .unwrap_err();
        assert!(err.message.contains("unknown node 2"), "{err}");
    }
}
