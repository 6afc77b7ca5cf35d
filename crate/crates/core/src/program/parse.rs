//! Program parser.
//!
//! ```text
//! program   := decl+
//! decl      := 'Main' '=' seq | Proc '=' ('[' local+ ']')? seq | rule
//! seq       := command (';' command)*
//! command   := 'if' block 'then' block ('else' block)?
//!            | 'try' block ('then' block)? ('else' block)?
//!            | block
//! block     := primary ('or' block)?
//! primary   := '(' seq ')' '!'? | call '!'? | 'break' | 'skip' | 'fail'
//! call      := rule | Proc | '{' (rule (',' rule)*)? '}'
//! ```
//!
//! Procedure names start with an upper-case letter, rule names with a
//! lower-case one.

use super::{Command, ProcedureDecl, ProgramDecl, Scope};
use crate::lexer::{Cursor, ParseError, Pos, Tok};
use crate::rule::parse_rule_decl;

const KEYWORDS: &[&str] = &["if", "then", "else", "try", "or", "break", "skip", "fail"];

pub fn parse_program(text: &str) -> Result<ProgramDecl, ParseError> {
    let mut cur = Cursor::new(text)?;
    let mut main = None;
    let mut globals = Scope::default();
    while !cur.at_eof() {
        let pos = cur.pos();
        if cur.is_keyword("Main") {
            cur.next();
            cur.expect_sym("=")?;
            let body = parse_seq(&mut cur)?;
            if main.replace(body).is_some() {
                return Err(ParseError::new(pos, "duplicate declaration of `Main`"));
            }
        } else {
            parse_decl(&mut cur, &mut globals)?;
        }
    }
    let main = main.ok_or_else(|| ParseError::new(cur.pos(), "missing declaration of `Main`"))?;
    Ok(ProgramDecl { main, globals })
}

/// Parses a bare command sequence.
pub fn parse_command(text: &str) -> Result<Command, ParseError> {
    let mut cur = Cursor::new(text)?;
    let c = parse_seq(&mut cur)?;
    cur.expect_eof()?;
    Ok(c)
}

fn is_procedure_name(name: &str) -> bool {
    name.chars().next().is_some_and(char::is_uppercase)
}

fn parse_decl(cur: &mut Cursor, scope: &mut Scope) -> Result<(), ParseError> {
    let pos = cur.pos();
    let Tok::Ident(name) = cur.peek().clone() else {
        return Err(cur.unexpected("a declaration"));
    };
    if name == "Main" {
        return Err(ParseError::new(
            pos,
            "`Main` may only be declared at the top level",
        ));
    }
    if is_procedure_name(&name) {
        cur.next();
        cur.expect_sym("=")?;
        let mut locals = Scope::default();
        if cur.eat_sym("[") {
            while !cur.is_sym("]") {
                parse_decl(cur, &mut locals)?;
            }
            cur.expect_sym("]")?;
        }
        let body = parse_seq(cur)?;
        duplicate_check(scope, &name, pos)?;
        scope
            .procedures
            .insert(name, ProcedureDecl { locals, body });
    } else {
        let rule = parse_rule_decl(cur)?;
        duplicate_check(scope, &rule.name, pos)?;
        scope.rules.insert(rule.name.clone(), rule);
    }
    Ok(())
}

fn duplicate_check(scope: &Scope, name: &str, pos: Pos) -> Result<(), ParseError> {
    if scope.rules.contains_key(name) || scope.procedures.contains_key(name) {
        Err(ParseError::new(
            pos,
            format!("duplicate declaration of `{name}`"),
        ))
    } else {
        Ok(())
    }
}

fn parse_seq(cur: &mut Cursor) -> Result<Command, ParseError> {
    let first = parse_cmd(cur)?;
    if cur.eat_sym(";") {
        Ok(Command::seq(first, parse_seq(cur)?))
    } else {
        Ok(first)
    }
}

fn parse_cmd(cur: &mut Cursor) -> Result<Command, ParseError> {
    if cur.eat_keyword("if") {
        let cond = parse_block(cur)?;
        cur.expect_keyword("then")?;
        let then = parse_block(cur)?;
        let els = if cur.eat_keyword("else") {
            Some(parse_block(cur)?)
        } else {
            None
        };
        return Ok(Command::if_then(cond, then, els));
    }
    if cur.eat_keyword("try") {
        let cond = parse_block(cur)?;
        let then = if cur.eat_keyword("then") {
            Some(parse_block(cur)?)
        } else {
            None
        };
        let els = if cur.eat_keyword("else") {
            Some(parse_block(cur)?)
        } else {
            None
        };
        return Ok(Command::try_then(cond, then, els));
    }
    parse_block(cur)
}

fn parse_block(cur: &mut Cursor) -> Result<Command, ParseError> {
    let left = parse_primary(cur)?;
    if cur.eat_keyword("or") {
        Ok(Command::or(left, parse_block(cur)?))
    } else {
        Ok(left)
    }
}

fn parse_primary(cur: &mut Cursor) -> Result<Command, ParseError> {
    let looped = |cur: &mut Cursor, c: Command| {
        if cur.eat_sym("!") {
            Command::looped(c)
        } else {
            c
        }
    };
    if cur.eat_sym("(") {
        let inner = parse_seq(cur)?;
        cur.expect_sym(")")?;
        return Ok(looped(cur, inner));
    }
    if cur.eat_sym("{") {
        let mut names = Vec::new();
        if !cur.is_sym("}") {
            loop {
                names.push(rule_name(cur)?);
                if !cur.eat_sym(",") {
                    break;
                }
            }
        }
        cur.expect_sym("}")?;
        return Ok(looped(cur, Command::Call(names)));
    }
    for (kw, c) in [
        ("break", Command::Break),
        ("skip", Command::Skip),
        ("fail", Command::Fail),
    ] {
        if cur.eat_keyword(kw) {
            return Ok(c);
        }
    }
    match cur.peek().clone() {
        Tok::Ident(name) if !KEYWORDS.contains(&name.as_str()) && name != "Main" => {
            cur.next();
            let c = if is_procedure_name(&name) {
                Command::ProcCall(name)
            } else {
                Command::Call(vec![name])
            };
            Ok(looped(cur, c))
        }
        _ => Err(cur.unexpected("a command")),
    }
}

fn rule_name(cur: &mut Cursor) -> Result<String, ParseError> {
    let pos = cur.pos();
    let name = cur.expect_ident()?;
    if is_procedure_name(&name) || KEYWORDS.contains(&name.as_str()) {
        return Err(ParseError::new(pos, format!("`{name}` is not a rule name")));
    }
    Ok(name)
}
