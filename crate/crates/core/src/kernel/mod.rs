//! The trusted core: syntax of terms and formulas, the environment of
//! declarations, normalization, matching, and the derivation checker.

pub mod derivation;
pub mod env;
pub mod matching;
pub mod name;
pub mod normalize;
pub mod state;
pub mod term;

pub use derivation::{case_premises, check_derivation, check_proof, Case, Derivation, Direction, Reason, Rejection, Rule, Source};
pub use env::{
    conclusion_of, Branch, Constructor, Declaration, Environment, FixpointFn, Head, InductivePredicate, InductiveType,
    KernelError, KernelResult, Lemma, Namespace, Notation, NotationKind, Param, PredicateRule,
};
pub use matching::{match_formula, match_term};
pub use name::{fresh_name, Name};
pub use normalize::{convertible, normalize, normalize_formula, terms_convertible};
pub use state::{Hyp, HypKind, ProofState};
pub use term::{Formula, Subst, Term};
