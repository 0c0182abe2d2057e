//! Tactic expressions and their backtracking interpreter.

pub mod engine;
pub mod expr;
pub mod record;

pub use engine::{assemble, execute, run_first, Builder, Engine, ExecError, Outcome, Success, DEFAULT_FUEL};
pub use expr::{print_cache, MatchArm, TacticDef, TacticExpr, KEYWORDS};
pub use record::TacticRecord;
