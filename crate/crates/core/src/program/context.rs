//! Context conditions on `break`.

use thiserror::Error;

use super::Command;

/// A violated context condition, located by a path through the syntax tree
/// such as `Main/seq[1]/if.cond/break`.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{path}: {message}")]
pub struct ContextError {
    pub path: String,
    pub message: String,
}

/// Every `break` must lie inside a loop; when it occurs in the condition of
/// an `if` or `try`, that loop must lie inside the same condition.
pub fn check_context_conditions(c: &Command) -> Result<(), ContextError> {
    walk(c, false, &mut vec!["Main".to_string()])
}

fn walk(c: &Command, in_loop: bool, path: &mut Vec<String>) -> Result<(), ContextError> {
    let sub = |c: &Command, in_loop: bool, seg: String, path: &mut Vec<String>| {
        path.push(seg);
        let r = walk(c, in_loop, path);
        path.pop();
        r
    };
    match c {
        Command::Break if !in_loop => {
            path.push("break".into());
            let err = ContextError {
                path: path.join("/"),
                message: "`break` is not enclosed in a loop within the same condition".into(),
            };
            path.pop();
            Err(err)
        }
        Command::Loop(body) => sub(body, true, "loop".into(), path),
        Command::If { cond, then, els } => {
            sub(cond, false, "if.cond".into(), path)?;
            sub(then, in_loop, "if.then".into(), path)?;
            match els {
                Some(e) => sub(e, in_loop, "if.else".into(), path),
                None => Ok(()),
            }
        }
        Command::Try { cond, then, els } => {
            sub(cond, false, "try.cond".into(), path)?;
            if let Some(t) = then {
                sub(t, in_loop, "try.then".into(), path)?;
            }
            match els {
                Some(e) => sub(e, in_loop, "try.else".into(), path),
                None => Ok(()),
            }
        }
        Command::Or(a, b) => {
            sub(a, in_loop, "or.left".into(), path)?;
            sub(b, in_loop, "or.right".into(), path)
        }
        Command::Seq(..) => {
            let mut rest = c;
            let mut i = 0;
            loop {
                match rest {
                    Command::Seq(a, b) => {
                        sub(a, in_loop, format!("seq[{i}]"), path)?;
                        rest = b;
                        i += 1;
                    }
                    last => return sub(last, in_loop, format!("seq[{i}]"), path),
                }
            }
        }
        Command::Break
        | Command::Call(_)
        | Command::ProcCall(_)
        | Command::Skip
        | Command::Fail => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::parse_command;

    fn check(text: &str) -> Result<(), ContextError> {
        check_context_conditions(&parse_command(text).unwrap())
    }

    #[test]
    fn break_needs_a_loop() {
        let err = check("break").unwrap_err();
        assert_eq!(err.path, "Main/break");
        assert!(check("(r1; break)!").is_ok());
        assert!(check("(if r then break else skip)!").is_ok());
    }

    #[test]
    fn break_in_a_condition_needs_a_loop_in_that_condition() {
        let err = check("if (break) then skip else skip").unwrap_err();
        assert_eq!(err.path, "Main/if.cond/break");
        let err = check("(try (r; break) then skip)!").unwrap_err();
        assert_eq!(err.path, "Main/loop/try.cond/seq[1]/break");
        assert!(check("try (r; break)! then skip").is_ok());
    }
}
