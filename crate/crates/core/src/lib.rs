//! A parsing expression grammar engine with two equivalent evaluators and a
//! symbolic string generator.
//!
//! * [`bigstep`] is a direct recursive interpreter of the natural-semantics
//!   rules, including `throw`, `catch` and `try`.
//! * [`machine`] is a small-step frame machine that additionally supports
//!   the cut operator `^`, prunes choice frames under `try` and counts steps.
//! * [`symbolic`] runs the machine over per-position character-set
//!   constraints to describe every string of a fixed length a grammar accepts.
//! * [`harness`] holds corpus tooling: mutation, benchmarking, differential
//!   comparison of grammars and brute-force oracles.

pub mod bigstep;
pub mod charset;
pub mod check;
pub mod fixtures;
pub mod grammar;
pub mod harness;
pub mod machine;
pub mod sugar;
pub mod symbolic;
pub mod syntax;

pub use bigstep::{accepts, eval, EvalBudget, EvalError};
pub use charset::CharSet;
pub use check::{check_cut_placement, check_wellformed, PlacementReport, WellFormednessReport};
pub use grammar::{match_terminal, Expr, Grammar, GrammarError, Outcome, OutcomeKind, Terminal};
pub use machine::{MachineConfig, MachineError, StepMetrics};
pub use sugar::{desugar, SurfaceExpr};
pub use symbolic::{Constraint, ConstrainedString, SymOutcome};
pub use syntax::{parse_grammar, LoadError};
