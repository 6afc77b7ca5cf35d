//! Interpreter for GP 2 graph programs.
//!
//! The crate provides host graphs with canonical forms, conditional rule
//! application, program parsing and procedure expansion, a small-step
//! semantics over graph stacks, the earlier big-step semantics, and a
//! bounded state-space explorer that compares the two.

pub mod bigstep;
pub mod explorer;
pub mod fixtures;
pub mod graph;
pub mod lexer;
pub mod outcome;
pub mod program;
pub mod rule;
pub mod smallstep;
