//! Macro expansion of procedure calls.

use std::collections::BTreeMap;
use std::sync::Arc;

use thiserror::Error;

use super::{Command, ProgramDecl, Scope};
use crate::rule::Rule;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExpandError {
    #[error("procedure `{0}` is recursive")]
    Recursive(String),
    #[error("unknown procedure `{0}`")]
    UnknownProcedure(String),
    #[error("unknown rule `{0}`")]
    UnknownRule(String),
}

/// A program with every procedure call replaced by its body. Rules declared
/// locally in a procedure `P` are renamed `P.r` (nested procedures stack
/// their prefixes), so all rule names are distinct.
#[derive(Debug, Clone)]
pub struct ExpandedProgram {
    pub main: Command,
    pub rules: BTreeMap<String, Arc<Rule>>,
}

struct Frame<'a> {
    scope: &'a Scope,
    prefix: String,
}

struct Expander<'a> {
    frames: Vec<Frame<'a>>,
    active: Vec<String>,
    rules: BTreeMap<String, Arc<Rule>>,
}

impl<'a> Expander<'a> {
    fn rule(&mut self, name: &str) -> Result<String, ExpandError> {
        for f in self.frames.iter().rev() {
            if let Some(r) = f.scope.rules.get(name) {
                let qualified = format!("{}{name}", f.prefix);
                self.rules.entry(qualified.clone()).or_insert_with(|| {
                    let mut r = r.clone();
                    r.name = qualified.clone();
                    Arc::new(r)
                });
                return Ok(qualified);
            }
        }
        Err(ExpandError::UnknownRule(name.to_string()))
    }

    fn procedure(&mut self, name: &str) -> Result<Command, ExpandError> {
        let depth = (0..self.frames.len())
            .rev()
            .find(|&i| self.frames[i].scope.procedures.contains_key(name))
            .ok_or_else(|| ExpandError::UnknownProcedure(name.to_string()))?;
        let frame = &self.frames[depth];
        let decl = &frame.scope.procedures[name];
        let qualified = format!("{}{name}", frame.prefix);
        if self.active.contains(&qualified) {
            return Err(ExpandError::Recursive(qualified));
        }
        // The body sees the scopes up to its declaration plus its locals.
        let saved = self.frames.split_off(depth + 1);
        self.frames.push(Frame {
            scope: &decl.locals,
            prefix: format!("{qualified}."),
        });
        self.active.push(qualified);
        let body = self.command(&decl.body);
        self.active.pop();
        self.frames.pop();
        self.frames.extend(saved);
        body
    }

    fn command(&mut self, c: &Command) -> Result<Command, ExpandError> {
        let boxed = |e: &mut Self, c: &Command| e.command(c).map(Box::new);
        Ok(match c {
            Command::Call(names) => Command::Call(
                names
                    .iter()
                    .map(|n| self.rule(n))
                    .collect::<Result<_, _>>()?,
            ),
            Command::ProcCall(p) => self.procedure(p)?,
            Command::Loop(b) => Command::Loop(boxed(self, b)?),
            Command::If { cond, then, els } => Command::If {
                cond: boxed(self, cond)?,
                then: boxed(self, then)?,
                els: els.as_deref().map(|e| boxed(self, e)).transpose()?,
            },
            Command::Try { cond, then, els } => Command::Try {
                cond: boxed(self, cond)?,
                then: then.as_deref().map(|t| boxed(self, t)).transpose()?,
                els: els.as_deref().map(|e| boxed(self, e)).transpose()?,
            },
            Command::Or(a, b) => Command::Or(boxed(self, a)?, boxed(self, b)?),
            Command::Seq(a, b) => Command::seq(self.command(a)?, self.command(b)?),
            Command::Break | Command::Skip | Command::Fail => c.clone(),
        })
    }
}

/// Inlines every procedure call in `Main` and resolves rule names through
/// the enclosing declarations.
pub fn expand_procedures(p: &ProgramDecl) -> Result<ExpandedProgram, ExpandError> {
    let mut e = Expander {
        frames: vec![Frame {
            scope: &p.globals,
            prefix: String::new(),
        }],
        active: Vec::new(),
        rules: BTreeMap::new(),
    };
    let main = e.command(&p.main)?;
    Ok(ExpandedProgram {
        main,
        rules: e.rules,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::parse_program;

    const R1: &str = "r1() = [ (1@1, empty # grey) | ] => [ (1@1, empty # grey) (2, empty) | ]";
    const R2: &str = "r2() = [ (1, empty # grey) | ] => [ | ]";

    #[test]
    fn inlines_a_loop_procedure() {
        let p = parse_program(&format!(
            "Loop = {{r1, r2}}! Main = try Loop then skip else skip {R1} {R2}"
        ))
        .unwrap();
        let e = expand_procedures(&p).unwrap();
        assert_eq!(e.main.to_string(), "try {r1, r2}! then skip else skip");
        assert_eq!(e.rules.len(), 2);
    }

    #[test]
    fn no_procedures_leaves_main_unchanged() {
        let p = parse_program(&format!("Main = r1; r2! {R1} {R2}")).unwrap();
        let e = expand_procedures(&p).unwrap();
        assert_eq!(e.main, p.main);
    }

    #[test]
    fn local_rules_are_renamed_apart() {
        let p = parse_program(
            "A = [ r() = [ (1, empty) | ] => [ | ] ] r
             B = [ r() = [ (1@1, empty) | ] => [ (1@1, empty) (2, empty) | ] ] r
             Main = A; B",
        )
        .unwrap();
        let e = expand_procedures(&p).unwrap();
        assert_eq!(e.main.to_string(), "A.r; B.r");
        assert_eq!(e.rules["A.r"].rhs.nodes.len(), 0);
        assert_eq!(e.rules["B.r"].rhs.nodes.len(), 2);
        assert!(e.main.rule_names().iter().all(|n| e.rules.contains_key(n)));
    }

    #[test]
    fn nested_procedures_see_enclosing_locals() {
        let p = parse_program(&format!(
            "Outer = [ Inner = r1; r2  {R1} ] Inner!
             Main = Outer
             {R2}"
        ))
        .unwrap();
        let e = expand_procedures(&p).unwrap();
        assert_eq!(e.main.to_string(), "(Outer.r1; r2)!");
    }

    #[test]
    fn recursion_and_unknown_names() {
        let p = parse_program("A = B B = A Main = A").unwrap();
        assert!(matches!(
            expand_procedures(&p),
            Err(ExpandError::Recursive(_))
        ));
        let p = parse_program("Main = Nope").unwrap();
        assert_eq!(
            expand_procedures(&p).unwrap_err(),
            ExpandError::UnknownProcedure("Nope".into())
        );
        let p = parse_program("Main = nope").unwrap();
        assert_eq!(
            expand_procedures(&p).unwrap_err(),
            ExpandError::UnknownRule("nope".into())
        );
    }
}
