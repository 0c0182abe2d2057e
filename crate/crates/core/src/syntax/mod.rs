//! Concrete syntax: lexing, parsing, elaboration and printing.

pub mod command;
pub mod elab;
pub mod lexer;
pub mod parser;
pub mod print;
pub mod surface;

pub use command::Command;
pub use elab::{elab_formula, elab_goal_pattern, elab_statement, elab_term, ElabError, GoalPattern};
pub use lexer::ParseError;
pub use parser::{parse_binders, parse_command, parse_expr, parse_tactic, split_sentences, Sentence};
pub use print::{print_formula, print_state, print_term};
pub use surface::{Binder, Expr};
