//! Textual host-graph format.
//!
//! ```text
//! graph := '[' node* '|' edge* ']'
//! node  := '(' id ',' list mark? root? ')'
//! edge  := '(' id ',' id ',' id ',' list mark? ')'
//! list  := 'empty' | atom (':' atom)*
//! atom  := integer | '"' chars '"'
//! mark  := '#' markname
//! root  := '(R)'
//! ```

use super::{Atom, EdgeMark, GraphBuilder, HostGraph, ListValue, NodeMark};
use crate::lexer::{Cursor, ParseError, Tok};

pub fn parse_host_graph(text: &str) -> Result<HostGraph, ParseError> {
    let mut cur = Cursor::new(text)?;
    let g = parse_graph(&mut cur)?;
    cur.expect_eof()?;
    Ok(g)
}

pub(crate) fn parse_graph(cur: &mut Cursor) -> Result<HostGraph, ParseError> {
    let mut b = GraphBuilder::new();
    cur.expect_sym("[")?;
    while cur.is_sym("(") {
        cur.next();
        let pos = cur.pos();
        let id = cur.expect_id()?;
        cur.expect_sym(",")?;
        let label = parse_list(cur)?;
        let mark = parse_node_mark(cur)?;
        let rooted = parse_root(cur)?;
        cur.expect_sym(")")?;
        b.add_node(id, label, mark, rooted)
            .map_err(|e| ParseError::new(pos, e.to_string()))?;
    }
    cur.expect_sym("|")?;
    while cur.is_sym("(") {
        cur.next();
        let pos = cur.pos();
        let id = cur.expect_id()?;
        cur.expect_sym(",")?;
        let src = cur.expect_id()?;
        cur.expect_sym(",")?;
        let tgt = cur.expect_id()?;
        cur.expect_sym(",")?;
        let label = parse_list(cur)?;
        let mark = parse_edge_mark(cur)?;
        cur.expect_sym(")")?;
        b.add_edge(id, &src, &tgt, label, mark)
            .map_err(|e| ParseError::new(pos, e.to_string()))?;
    }
    cur.expect_sym("]")?;
    Ok(b.build())
}

fn parse_list(cur: &mut Cursor) -> Result<ListValue, ParseError> {
    if cur.eat_keyword("empty") {
        return Ok(ListValue::empty());
    }
    let mut atoms = vec![parse_atom(cur)?];
    while cur.eat_sym(":") {
        atoms.push(parse_atom(cur)?);
    }
    Ok(ListValue(atoms))
}

fn parse_atom(cur: &mut Cursor) -> Result<Atom, ParseError> {
    let negative = cur.eat_sym("-");
    match cur.peek().clone() {
        Tok::Int(n) => {
            cur.next();
            Ok(Atom::Int(if negative { -n } else { n }))
        }
        Tok::Str(s) if !negative => {
            cur.next();
            Ok(Atom::Str(s))
        }
        _ => Err(cur.unexpected("an integer or string")),
    }
}

pub(crate) fn parse_node_mark(cur: &mut Cursor) -> Result<NodeMark, ParseError> {
    if !cur.eat_sym("#") {
        return Ok(NodeMark::None);
    }
    let pos = cur.pos();
    let name = cur.expect_ident()?;
    NodeMark::from_name(&name)
        .ok_or_else(|| ParseError::new(pos, format!("unknown node mark `{name}`")))
}

pub(crate) fn parse_edge_mark(cur: &mut Cursor) -> Result<EdgeMark, ParseError> {
    if !cur.eat_sym("#") {
        return Ok(EdgeMark::None);
    }
    let pos = cur.pos();
    let name = cur.expect_ident()?;
    EdgeMark::from_name(&name)
        .ok_or_else(|| ParseError::new(pos, format!("unknown edge mark `{name}`")))
}

pub(crate) fn parse_root(cur: &mut Cursor) -> Result<bool, ParseError> {
    if cur.is_sym("(") && matches!(cur.peek_at(1), Tok::Ident(r) if r == "R") {
        cur.next();
        cur.next();
        cur.expect_sym(")")?;
        Ok(true)
    } else {
        Ok(false)
    }
}

/// Renders a graph in the host-graph format with nodes and edges in
/// ascending id order.
pub fn serialize_host_graph(g: &HostGraph) -> String {
    let mut out = String::from("[");
    for n in g.nodes() {
        out.push_str(&format!(" ({}, {}", n.id, n.label));
        if let Some(m) = n.mark.name() {
            out.push_str(&format!(" # {m}"));
        }
        if n.rooted {
            out.push_str(" (R)");
        }
        out.push(')');
    }
    out.push_str(" |");
    for e in g.edges() {
        out.push_str(&format!(
            " ({}, {}, {}, {}",
            e.id,
            g.node(e.source).id,
            g.node(e.target).id,
            e.label
        ));
        if let Some(m) = e.mark.name() {
            out.push_str(&format!(" # {m}"));
        }
        out.push(')');
    }
    out.push_str(" ]");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const PATH3: &str = "[ (1, empty) (2, empty) (3, empty) | (a,1,2, empty) (b,2,3, empty) ]";

    #[test]
    fn empty_graph() {
        let g = parse_host_graph("[ | ]").unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (0, 0));
        assert_eq!(serialize_host_graph(&g), "[ | ]");
    }

    #[test]
    fn path_round_trip_is_fixed_text() {
        let g = parse_host_graph(PATH3).unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (3, 2));
        let text = serialize_host_graph(&g);
        assert_eq!(
            text,
            "[ (1, empty) (2, empty) (3, empty) | (a, 1, 2, empty) (b, 2, 3, empty) ]"
        );
        assert_eq!(parse_host_graph(&text).unwrap(), g);
    }

    #[test]
    fn grey_root_node() {
        let g = parse_host_graph("[ (1, empty # grey) | ]").unwrap();
        assert_eq!(g.node(0).mark, NodeMark::Grey);
        let g =
            parse_host_graph("[ (x, 1:\"a\":-3 # grey (R)) | (e, x, x, \"l\" # dashed) ]").unwrap();
        assert!(g.node(0).rooted);
        let text = serialize_host_graph(&g);
        assert_eq!(
            text,
            "[ (x, 1:\"a\":-3 # grey (R)) | (e, x, x, \"l\" # dashed) ]"
        );
    }

    #[test]
    fn dangling_endpoint_is_reported() {
        let err = parse_host_graph("[ (1,empty) | (a,1,2,empty) ]").unwrap_err();
        assert!(err.message.contains("unknown target node `2`"), "{err}");
        assert_eq!(err.line, 1);
    }

    #[test]
    fn duplicate_and_syntax_errors() {
        let err = parse_host_graph("[ (1,empty) (1,empty) | ]").unwrap_err();
        assert!(err.message.contains("duplicate node id"));
        let err = parse_host_graph("[ (1,empty)\n (2 empty) | ]").unwrap_err();
        assert_eq!((err.line, err.column), (2, 5));
    }
}
