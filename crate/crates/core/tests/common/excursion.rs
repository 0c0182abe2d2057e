//! Random walks of execute and undo over a script, compared against a fresh
//! replay of whatever command list the walk ends with.

use rand::rngs::StdRng;
use rand::seq::IndexedRandom;
use rand::Rng;
use tacit_core::document::Session;
use tacit_core::learner::encode_state;

const DETOURS: &[&str] = &[
    "intros.",
    "intro.",
    "simpl.",
    "reflexivity.",
    "f_equal.",
    "auto.",
    "symmetry.",
    "suggest.",
    "apply concat_nil_r.",
    "rewrite concat_nil_r.",
    "Proof.",
    "Qed.",
    "Lemma detour : ∀ ls, ls ++ [] = ls.",
    "frobnicate the goal.",
    "apply .",
];

#[derive(Debug, Default)]
pub struct Walk {
    pub steps: usize,
    pub undos: usize,
    pub failures: usize,
    /// Longest script prefix the session held at any point.
    pub deepest: usize,
}

/// Performs `steps` random moves starting from `session`; a failed command
/// must leave the session exactly as it was.
pub fn walk(session: &mut Session, script: &[String], steps: usize, rng: &mut StdRng) -> Walk {
    let mut w = Walk::default();
    for _ in 0..steps {
        w.steps += 1;
        let pos = session.position();
        match rng.random_range(0..10) {
            0 | 1 => {
                let k = rng.random_range(0..=pos.min(3));
                session.undo(k).unwrap();
                w.undos += 1;
            }
            2 | 3 => {
                let cmd = DETOURS.choose(rng).unwrap();
                try_command(session, cmd, &mut w);
            }
            _ => {
                let at = prefix_len(session, script);
                if at < pos {
                    // Back out of a detour before rejoining the script.
                    session.undo(pos - at).unwrap();
                    w.undos += 1;
                } else if let Some(c) = script.get(at) {
                    try_command(session, c, &mut w);
                }
            }
        }
        w.deepest = w.deepest.max(prefix_len(session, script));
    }
    w
}

fn prefix_len(session: &Session, script: &[String]) -> usize {
    session.commands().zip(script).take_while(|(a, b)| a.trim_end_matches('.') == b.as_str()).count()
}

fn try_command(session: &mut Session, cmd: &str, w: &mut Walk) {
    let before = (session.position(), session.state().digest(), session.state().model.len());
    if session.execute(cmd).is_err() {
        w.failures += 1;
        let after = (session.position(), session.state().digest(), session.state().model.len());
        assert_eq!(before, after, "failed `{cmd}` changed the session");
    }
}

/// Canonical bytes of a session's own database.
pub fn database_bytes(session: &Session) -> Vec<u8> {
    let records: Vec<_> = session.state().records.iter().cloned().collect();
    serde_json::to_vec(&records).unwrap()
}

/// Replays the session's command list from scratch and compares databases,
/// model sizes and predictions. Returns a description of the first
/// difference.
pub fn compare_with_replay(session: &Session, fresh: Session) -> Result<(), String> {
    let mut fresh = fresh;
    for c in session.commands().map(str::to_string).collect::<Vec<_>>() {
        fresh.execute(&c).map_err(|e| format!("replaying `{c}`: {e}"))?;
    }
    if database_bytes(session) != database_bytes(&fresh) {
        return Err("databases differ".into());
    }
    let (a, b) = (session.state(), fresh.state());
    if a.model.len() != b.model.len() || a.model.len() != a.records.len() + a.inherited {
        return Err(format!("model sizes {} vs {} for {} records", a.model.len(), b.model.len(), a.records.len()));
    }
    if let Some(g) = a.goals().first() {
        let v = encode_state(g);
        if a.model.predict(&v) != b.model.predict(&v) {
            return Err("predictions differ".into());
        }
    }
    Ok(())
}
