#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use tacit_core::document::{DirResolver, Session, SessionConfig};
use tacit_core::syntax::{parse_command, split_sentences, Command};

pub const FILES: [&str; 2] = ["lists", "nat"];

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn source(file: &str) -> String {
    std::fs::read_to_string(fixtures().join(format!("{file}.tac"))).unwrap()
}

pub fn resolver() -> Arc<DirResolver> {
    Arc::new(DirResolver::new(vec![fixtures()]))
}

pub fn session() -> Session {
    Session::new(resolver(), SessionConfig::default()).unwrap()
}

/// Command texts of a source file, in order.
pub fn commands(src: &str) -> Vec<String> {
    split_sentences(src).unwrap().into_iter().map(|s| s.text).collect()
}

/// Index of the `Lemma name` command.
pub fn lemma_index(cmds: &[String], name: &str) -> usize {
    cmds.iter()
        .position(|c| matches!(parse_command(c), Ok(Command::Lemma { name: n, .. }) if n.as_str() == name))
        .unwrap_or_else(|| panic!("no lemma {name}"))
}

/// A session that has run everything before lemma `name` and its statement.
pub fn at_lemma(src: &str, name: &str) -> Session {
    let cmds = commands(src);
    let upto = lemma_index(&cmds, name);
    let mut s = session();
    for c in &cmds[..=upto] {
        s.execute(c).unwrap();
    }
    s
}

/// Statement goals of every lemma in the fixtures, each in the environment
/// just before it, plus the goals their stored proofs pass through.
pub fn fixture_goals() -> Vec<(tacit_core::kernel::Environment, tacit_core::kernel::ProofState)> {
    let mut out = Vec::new();
    for f in FILES {
        let src = source(f);
        let cmds = commands(&src);
        let mut s = session();
        for c in &cmds {
            s.execute(c).unwrap();
            if let Some(g) = s.state().goals().first() {
                out.push((s.state().env.clone(), g.clone()));
            }
        }
    }
    out
}
