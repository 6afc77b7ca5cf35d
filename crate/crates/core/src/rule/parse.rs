//! Concrete syntax of rule declarations.
//!
//! ```text
//! rule     := name '(' vardecls? ')' '=' rgraph '=>' rgraph ('where' cond)?
//! vardecls := names ':' type (';' names ':' type)*
//! rgraph   := '[' rnode* '|' redge* ']'
//! rnode    := '(' id ('@' int)? ',' label mark? root? ')'
//! redge    := '(' id ',' id ',' id ',' label mark? ')'
//! label    := 'empty' | term (':' term)*
//! term     := string | arith
//! arith    := product (('+' | '-') product)*
//! product  := unary ('*' unary)*
//! unary    := '-' unary | int | var | 'indeg' '(' int ')' | 'outdeg' '(' int ')' | '(' arith ')'
//! cond     := conj ('or' conj)*
//! conj     := neg ('and' neg)*
//! neg      := 'not' neg | 'edge' '(' int ',' int ')' | '(' cond ')' | label cmp label
//! ```

use std::collections::HashMap;

use super::{
    ArithOp, CmpOp, Condition, IntExpr, LabelExpr, Rule, RuleEdge, RuleGraph, RuleNode, Term,
    VarType, Variable,
};
use crate::graph::text::{parse_edge_mark, parse_node_mark, parse_root};
use crate::graph::Atom;
use crate::lexer::{Cursor, ParseError, Tok};

const RESERVED: &[&str] = &[
    "empty", "indeg", "outdeg", "edge", "not", "and", "or", "where",
];

/// Parses a single rule declaration.
pub fn parse_rule(text: &str) -> Result<Rule, ParseError> {
    let mut cur = Cursor::new(text)?;
    let rule = parse_rule_decl(&mut cur)?;
    cur.expect_eof()?;
    Ok(rule)
}

/// Parses a file holding any number of rule declarations.
pub fn parse_rules(text: &str) -> Result<Vec<Rule>, ParseError> {
    let mut cur = Cursor::new(text)?;
    let mut rules = Vec::new();
    while !cur.at_eof() {
        rules.push(parse_rule_decl(&mut cur)?);
    }
    Ok(rules)
}

pub(crate) fn parse_rule_decl(cur: &mut Cursor) -> Result<Rule, ParseError> {
    let start = cur.pos();
    let name = cur.expect_ident()?;
    cur.expect_sym("(")?;
    let mut variables = Vec::new();
    if !cur.is_sym(")") {
        loop {
            let mut names = vec![cur.expect_ident()?];
            while cur.eat_sym(",") {
                names.push(cur.expect_ident()?);
            }
            cur.expect_sym(":")?;
            let pos = cur.pos();
            let ty_name = cur.expect_ident()?;
            let ty = VarType::from_name(&ty_name)
                .ok_or_else(|| ParseError::new(pos, format!("unknown type `{ty_name}`")))?;
            for n in names {
                if RESERVED.contains(&n.as_str()) {
                    return Err(ParseError::new(pos, format!("`{n}` is a reserved word")));
                }
                variables.push(Variable { name: n, ty });
            }
            if !cur.eat_sym(";") {
                break;
            }
        }
    }
    cur.expect_sym(")")?;
    cur.expect_sym("=")?;
    let lhs = parse_rule_graph(cur)?;
    cur.expect_sym("=>")?;
    let rhs = parse_rule_graph(cur)?;
    let condition = if cur.eat_keyword("where") {
        Some(parse_condition(cur)?)
    } else {
        None
    };
    Rule::new(name, variables, lhs, rhs, condition)
        .map_err(|e| ParseError::new(start, e.to_string()))
}

fn parse_rule_graph(cur: &mut Cursor) -> Result<RuleGraph, ParseError> {
    let mut g = RuleGraph::default();
    let mut ids: HashMap<String, usize> = HashMap::new();
    cur.expect_sym("[")?;
    while cur.eat_sym("(") {
        let pos = cur.pos();
        let id = cur.expect_id()?;
        let interface = if cur.eat_sym("@") {
            let n = cur.expect_int()?;
            Some(u32::try_from(n).map_err(|_| ParseError::new(pos, "interface number too large"))?)
        } else {
            None
        };
        cur.expect_sym(",")?;
        let label = parse_label(cur)?;
        let mark = parse_node_mark(cur)?;
        let rooted = parse_root(cur)?;
        cur.expect_sym(")")?;
        if ids.insert(id.clone(), g.nodes.len()).is_some() {
            return Err(ParseError::new(pos, format!("duplicate node id `{id}`")));
        }
        g.nodes.push(RuleNode {
            id,
            interface,
            label,
            mark,
            rooted,
        });
    }
    cur.expect_sym("|")?;
    let mut edge_ids = HashMap::new();
    while cur.eat_sym("(") {
        let pos = cur.pos();
        let id = cur.expect_id()?;
        cur.expect_sym(",")?;
        let endpoint = |cur: &mut Cursor, end: &str| -> Result<usize, ParseError> {
            let p = cur.pos();
            let n = cur.expect_id()?;
            ids.get(&n).copied().ok_or_else(|| {
                ParseError::new(p, format!("edge `{id}` refers to unknown {end} node `{n}`"))
            })
        };
        let source = endpoint(cur, "source")?;
        cur.expect_sym(",")?;
        let target = endpoint(cur, "target")?;
        cur.expect_sym(",")?;
        let label = parse_label(cur)?;
        let mark = parse_edge_mark(cur)?;
        cur.expect_sym(")")?;
        if edge_ids.insert(id.clone(), ()).is_some() {
            return Err(ParseError::new(pos, format!("duplicate edge id `{id}`")));
        }
        g.edges.push(RuleEdge {
            id,
            source,
            target,
            label,
            mark,
        });
    }
    cur.expect_sym("]")?;
    Ok(g)
}

fn parse_label(cur: &mut Cursor) -> Result<LabelExpr, ParseError> {
    if cur.eat_keyword("empty") {
        return Ok(LabelExpr::empty());
    }
    let mut terms = vec![parse_term(cur)?];
    while cur.eat_sym(":") {
        terms.push(parse_term(cur)?);
    }
    Ok(LabelExpr(terms))
}

fn parse_term(cur: &mut Cursor) -> Result<Term, ParseError> {
    if let Tok::Str(s) = cur.peek().clone() {
        cur.next();
        reject_unsupported(cur)?;
        return Ok(Term::Const(Atom::Str(s)));
    }
    let e = parse_arith(cur)?;
    reject_unsupported(cur)?;
    Ok(match e {
        IntExpr::Lit(n) => Term::Const(Atom::Int(n)),
        IntExpr::Neg(inner) if matches!(*inner, IntExpr::Lit(_)) => match *inner {
            IntExpr::Lit(n) => Term::Const(Atom::Int(-n)),
            _ => unreachable!("checked by the guard"),
        },
        IntExpr::Var(v) => Term::Var(v),
        other => Term::Arith(other),
    })
}

fn reject_unsupported(cur: &Cursor) -> Result<(), ParseError> {
    if cur.is_sym("/") {
        Err(cur.error("division is not supported"))
    } else if cur.is_sym(".") {
        Err(cur.error("string concatenation is not supported"))
    } else {
        Ok(())
    }
}

fn parse_arith(cur: &mut Cursor) -> Result<IntExpr, ParseError> {
    let mut left = parse_product(cur)?;
    loop {
        let op = if cur.eat_sym("+") {
            ArithOp::Add
        } else if cur.eat_sym("-") {
            ArithOp::Sub
        } else {
            return Ok(left);
        };
        let right = parse_product(cur)?;
        left = IntExpr::Bin(op, Box::new(left), Box::new(right));
    }
}

fn parse_product(cur: &mut Cursor) -> Result<IntExpr, ParseError> {
    let mut left = parse_unary(cur)?;
    while cur.eat_sym("*") {
        let right = parse_unary(cur)?;
        left = IntExpr::Bin(ArithOp::Mul, Box::new(left), Box::new(right));
    }
    Ok(left)
}

fn parse_unary(cur: &mut Cursor) -> Result<IntExpr, ParseError> {
    if cur.eat_sym("-") {
        return Ok(IntExpr::Neg(Box::new(parse_unary(cur)?)));
    }
    if cur.eat_sym("(") {
        let e = parse_arith(cur)?;
        cur.expect_sym(")")?;
        return Ok(e);
    }
    match cur.peek().clone() {
        Tok::Int(n) => {
            cur.next();
            Ok(IntExpr::Lit(n))
        }
        Tok::Ident(name) if name == "indeg" || name == "outdeg" => {
            cur.next();
            cur.expect_sym("(")?;
            let pos = cur.pos();
            let n = cur.expect_int()?;
            let n = u32::try_from(n).map_err(|_| ParseError::new(pos, "node number too large"))?;
            cur.expect_sym(")")?;
            Ok(if name == "indeg" {
                IntExpr::Indeg(n)
            } else {
                IntExpr::Outdeg(n)
            })
        }
        Tok::Ident(name) if !RESERVED.contains(&name.as_str()) => {
            cur.next();
            Ok(IntExpr::Var(name))
        }
        _ => Err(cur.unexpected("a label term")),
    }
}

fn parse_condition(cur: &mut Cursor) -> Result<Condition, ParseError> {
    let mut left = parse_conj(cur)?;
    while cur.eat_keyword("or") {
        let right = parse_conj(cur)?;
        left = Condition::Or(Box::new(left), Box::new(right));
    }
    Ok(left)
}

fn parse_conj(cur: &mut Cursor) -> Result<Condition, ParseError> {
    let mut left = parse_neg(cur)?;
    while cur.eat_keyword("and") {
        let right = parse_neg(cur)?;
        left = Condition::And(Box::new(left), Box::new(right));
    }
    Ok(left)
}

fn parse_neg(cur: &mut Cursor) -> Result<Condition, ParseError> {
    if cur.eat_keyword("not") {
        return Ok(Condition::Not(Box::new(parse_neg(cur)?)));
    }
    if cur.is_keyword("edge") && matches!(cur.peek_at(1), Tok::Sym("(")) {
        cur.next();
        cur.next();
        let a = node_number(cur)?;
        cur.expect_sym(",")?;
        let b = node_number(cur)?;
        cur.expect_sym(")")?;
        return Ok(Condition::Edge(a, b));
    }
    if cur.is_sym("(") {
        // Either a parenthesised condition or a comparison whose left side
        // starts with a parenthesised expression.
        let mark = cur.mark();
        cur.next();
        if let Ok(c) = parse_condition(cur) {
            if cur.eat_sym(")") && !is_cmp(cur) {
                return Ok(c);
            }
        }
        cur.reset(mark);
    }
    let left = parse_label(cur)?;
    let op = parse_cmp(cur)?;
    let right = parse_label(cur)?;
    Ok(Condition::Cmp(op, left, right))
}

fn node_number(cur: &mut Cursor) -> Result<u32, ParseError> {
    let pos = cur.pos();
    let n = cur.expect_int()?;
    u32::try_from(n).map_err(|_| ParseError::new(pos, "node number too large"))
}

fn is_cmp(cur: &Cursor) -> bool {
    ["=", "!=", "<", "<=", ">", ">="]
        .iter()
        .any(|s| cur.is_sym(s))
}

fn parse_cmp(cur: &mut Cursor) -> Result<CmpOp, ParseError> {
    let ops = [
        ("=", CmpOp::Eq),
        ("!=", CmpOp::Ne),
        ("<=", CmpOp::Le),
        (">=", CmpOp::Ge),
        ("<", CmpOp::Lt),
        (">", CmpOp::Gt),
    ];
    for (sym, op) in ops {
        if cur.eat_sym(sym) {
            return Ok(op);
        }
    }
    Err(cur.unexpected("a comparison operator"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::NodeMark;

    #[test]
    fn parses_the_cycle_rules() {
        let rules = parse_rules(
            "delete(a, x, y: list) = [ (1@1, x) (2@2, y) | (e, 1, 2, a) ]
                 => [ (1@1, x) (2@2, y) | ] where indeg(1) = 0
             loop(a, x: list) = [ (1@1, x) | (e, 1, 1, a) ] => [ (1@1, x) | (e, 1, 1, a) ]",
        )
        .unwrap();
        assert_eq!(rules.len(), 2);
        let d = &rules[0];
        assert_eq!(d.variables.len(), 3);
        assert_eq!(d.lhs.edges.len(), 1);
        assert_eq!(d.rhs.edges.len(), 0);
        assert_eq!(
            d.condition,
            Some(Condition::Cmp(
                CmpOp::Eq,
                LabelExpr(vec![Term::Arith(IntExpr::Indeg(1))]),
                LabelExpr(vec![Term::Const(Atom::Int(0))]),
            ))
        );
    }

    #[test]
    fn marks_roots_and_arithmetic() {
        let r = parse_rule(
            "grow(n: int; s: string) = [ (v@1, n:s # grey (R)) | ] => [ (v@1, n * 2 + 1:s) (w, -3 # red) | ]",
        )
        .unwrap();
        let v = &r.lhs.nodes[0];
        assert_eq!(
            (v.interface, v.mark, v.rooted),
            (Some(1), NodeMark::Grey, true)
        );
        assert_eq!(r.rhs.nodes[0].label.to_string(), "((n * 2) + 1):s");
        assert_eq!(r.rhs.nodes[1].label.0, vec![Term::Const(Atom::Int(-3))]);
    }

    #[test]
    fn condition_precedence() {
        let r = parse_rule(
            "c(n: int) = [ (v@1, n) (w@2, empty) | ] => [ (v@1, n) (w@2, empty) | ]
               where not edge(1, 2) and (n > 3 or outdeg(2) != 0)",
        )
        .unwrap();
        let Some(Condition::And(a, b)) = r.condition else {
            panic!("expected a conjunction")
        };
        assert!(matches!(*a, Condition::Not(_)));
        assert!(matches!(*b, Condition::Or(..)));
        let r = parse_rule("c(n: int) = [ (v@1, n) | ] => [ (v@1, n) | ] where (n + 1) * 2 > 4")
            .unwrap();
        assert!(matches!(r.condition, Some(Condition::Cmp(CmpOp::Gt, ..))));
    }

    #[test]
    fn rejects_unsupported_operators() {
        let err = parse_rule("d(n: int) = [ (v@1, n) | ] => [ (v@1, n / 2) | ]").unwrap_err();
        assert!(err.message.contains("division"), "{err}");
        let err =
            parse_rule("d(s: string) = [ (v@1, s) | ] => [ (v@1, s . \"x\") | ]").unwrap_err();
        assert!(err.message.contains("concatenation"), "{err}");
    }

    #[test]
    fn reports_unknown_endpoints_and_types() {
        let err = parse_rule("d() = [ (1@1, empty) | (e, 1, 9, empty) ] => [ (1@1, empty) | ]")
            .unwrap_err();
        assert!(err.message.contains("unknown target node `9`"), "{err}");
        let err = parse_rule("d(x: float) = [ | ] => [ | ]").unwrap_err();
        assert!(err.message.contains("unknown type"), "{err}");
    }
}
