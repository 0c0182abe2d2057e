//! Sessions: a command list with one immutable state snapshot per position.

use std::fmt;
use std::sync::Arc;

use im::Vector;

use crate::kernel::{check_proof, Declaration, Environment, Lemma, Formula, KernelError, Name, ProofState, Rejection};
use crate::learner::{encode_state, select_learner, LearnerError, Model, TacticView, DEFAULT_LEARNER};
use crate::search::{search, search_failing, Budget, SearchOutcome, Suggestion};
use crate::syntax::{
    elab::{elab_fixpoint, elab_inductive, elab_notation, elab_predicate},
    elab_statement, parse_command, split_sentences, Command, ElabError, ParseError,
};
use crate::tactic::{assemble, execute, print_cache, ExecError, Success, TacticExpr};

use super::resolver::Resolver;
use super::unit::{records_digest, CompiledUnit, DbRecord, Dependency, FORMAT_VERSION};

/// Suggestions shown by the `suggest` command.
pub const SUGGEST_LIMIT: usize = 16;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum DocError {
    #[error("parse error at {}: {}", .0.pos, .0.message)]
    Parse(ParseError),
    #[error("{0}")]
    Elab(String),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("`{0}` is not valid here")]
    InvalidHere(String),
    #[error("tactic `{0}` failed")]
    TacticFailed(String),
    #[error("tactic `{tactic}`: {error}")]
    Exec { tactic: String, error: ExecError },
    #[error("record of `{0}` does not replay")]
    RecordMismatch(String),
    #[error("{0} goal(s) remain open")]
    OpenGoals(usize),
    #[error("proof rejected: {0}")]
    Rejected(Rejection),
    #[error("no proof found")]
    SearchFailed,
    #[error("proof of `{0}` is unfinished")]
    Unfinished(Name),
    #[error("unknown unit `{0}`")]
    UnknownRequire(String),
    #[error("cyclic require of `{0}`")]
    CyclicRequire(String),
    #[error("unit `{unit}` was built against `{dep}` {expected}, but {found} is loaded")]
    HashMismatch { unit: String, dep: String, expected: String, found: String },
    #[error("{0}")]
    Unit(String),
    #[error(transparent)]
    Learner(#[from] LearnerError),
    #[error("cannot undo {requested} command(s) at position {position}")]
    Underflow { requested: usize, position: usize },
    #[error("at byte {pos}: {error}")]
    At { pos: usize, error: Box<DocError> },
}

impl From<ElabError> for DocError {
    fn from(e: ElabError) -> Self {
        DocError::Elab(e.0)
    }
}

impl From<ParseError> for DocError {
    fn from(e: ParseError) -> Self {
        DocError::Parse(e)
    }
}

impl DocError {
    /// Drops the position wrapper.
    pub fn inner(&self) -> &DocError {
        match self {
            DocError::At { error, .. } => error.inner(),
            e => e,
        }
    }
}

#[derive(Clone)]
pub struct OpenProof {
    pub name: Name,
    pub statement: Formula,
    pub goals: Vec<ProofState>,
    pub steps: Vector<Success>,
}

#[derive(Clone)]
pub struct SessionState {
    pub env: Environment,
    /// Declarations made by this document, in order.
    pub own: Vector<Declaration>,
    /// Records made by this document.
    pub records: Vector<DbRecord>,
    /// How many records required units contributed to the model.
    pub inherited: usize,
    pub model: Arc<dyn Model>,
    pub loaded: Vector<Dependency>,
    pub proof: Option<OpenProof>,
}

impl fmt::Debug for SessionState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SessionState")
            .field("declarations", &self.own.len())
            .field("records", &self.records.len())
            .field("inherited", &self.inherited)
            .field("proof", &self.proof.as_ref().map(|p| (&p.name, p.goals.len())))
            .finish()
    }
}

impl SessionState {
    pub fn goals(&self) -> &[ProofState] {
        self.proof.as_ref().map_or(&[], |p| &p.goals)
    }

    pub fn digest(&self) -> String {
        let records: Vec<DbRecord> = self.records.iter().cloned().collect();
        records_digest(&records)
    }
}

#[derive(Clone, Debug)]
pub struct SessionConfig {
    pub learner: String,
    pub budget: Budget,
    /// Check every record replays as it is made.
    pub verify_records: bool,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig { learner: DEFAULT_LEARNER.to_string(), budget: Budget::default(), verify_records: true }
    }
}

/// What a command reports besides its new state.
#[derive(Clone, Debug, Default)]
pub struct Reply {
    pub messages: Vec<String>,
    pub suggestions: Vec<Suggestion>,
    pub search: Option<SearchOutcome>,
}

#[derive(Clone)]
pub struct Session {
    resolver: Arc<dyn Resolver>,
    config: SessionConfig,
    initial: SessionState,
    history: Vec<(String, SessionState)>,
}

impl fmt::Debug for Session {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Session").field("position", &self.position()).field("state", self.state()).finish()
    }
}

impl Session {
    pub fn new(resolver: Arc<dyn Resolver>, config: SessionConfig) -> Result<Session, DocError> {
        let model = select_learner(&config.learner)?.create();
        let initial = SessionState {
            env: Environment::new(),
            own: Vector::new(),
            records: Vector::new(),
            inherited: 0,
            model,
            loaded: Vector::new(),
            proof: None,
        };
        Ok(Session { resolver, config, initial, history: Vec::new() })
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    pub fn position(&self) -> usize {
        self.history.len()
    }

    pub fn state(&self) -> &SessionState {
        self.snapshot(self.position()).expect("current position has a snapshot")
    }

    /// State after the first `i` commands.
    pub fn snapshot(&self, i: usize) -> Option<&SessionState> {
        if i == 0 {
            Some(&self.initial)
        } else {
            self.history.get(i - 1).map(|(_, s)| s)
        }
    }

    pub fn commands(&self) -> impl Iterator<Item = &str> {
        self.history.iter().map(|(c, _)| c.as_str())
    }

    /// Runs one `.`-terminated command (the final dot may be left out).
    pub fn execute(&mut self, text: &str) -> Result<Reply, DocError> {
        let sentences = match split_sentences(text) {
            Ok(s) => s,
            Err(_) if !text.trim_end().ends_with('.') => split_sentences(&format!("{text}."))?,
            Err(e) => return Err(e.into()),
        };
        let [sentence] = sentences.as_slice() else {
            return Err(DocError::Parse(ParseError::new(0, format!("expected one command, found {}", sentences.len()))));
        };
        let cmd = parse_command(&sentence.text).map_err(|e| e.offset(sentence.pos))?;
        self.run(&sentence.text, cmd)
    }

    /// Runs every command of a source file; errors carry the command offset.
    pub fn execute_source(&mut self, src: &str) -> Result<Vec<Reply>, DocError> {
        let mut replies = Vec::new();
        for s in split_sentences(src)? {
            let cmd = parse_command(&s.text).map_err(|e| DocError::Parse(e.offset(s.pos)))?;
            let r = self.run(&s.text, cmd).map_err(|e| DocError::At { pos: s.pos, error: Box::new(e) })?;
            replies.push(r);
        }
        Ok(replies)
    }

    fn run(&mut self, text: &str, cmd: Command) -> Result<Reply, DocError> {
        let (next, reply) = self.step(self.state(), cmd)?;
        self.history.push((format!("{text}."), next));
        Ok(reply)
    }

    pub fn undo(&mut self, k: usize) -> Result<(), DocError> {
        let position = self.position();
        if k > position {
            return Err(DocError::Underflow { requested: k, position });
        }
        self.history.truncate(position - k);
        Ok(())
    }

    /// The compiled form of the current state.
    pub fn unit(&self, name: &str) -> CompiledUnit {
        let st = self.state();
        let mut unit = CompiledUnit {
            version: FORMAT_VERSION,
            name: name.to_string(),
            deps: st.loaded.iter().cloned().collect(),
            decls: Vec::new(),
            tactic_defs: Vec::new(),
            lemmas: Vec::new(),
            records: st.records.iter().cloned().collect(),
        };
        for d in &st.own {
            match d {
                Declaration::Lemma(l) => unit.lemmas.push(l.clone()),
                Declaration::Tactic(t) => unit.tactic_defs.push(t.clone()),
                other => unit.decls.push(other.clone()),
            }
        }
        unit
    }

    fn step(&self, st: &SessionState, cmd: Command) -> Result<(SessionState, Reply), DocError> {
        let mut st = st.clone();
        let mut reply = Reply::default();
        if cmd.in_proof() != st.proof.is_some() {
            let what = match &cmd {
                Command::Lemma { name, .. } => format!("Lemma {name}"),
                other => format!("{other:?}").split(['(', ' ', '{']).next().unwrap_or("command").to_string(),
            };
            return Err(DocError::InvalidHere(what));
        }
        match cmd {
            Command::Require(name) => st = self.require(st, name.as_str())?,
            Command::Inductive(src) => declare(&mut st, Declaration::Inductive(elab_inductive(&src)?))?,
            Command::Predicate(src) => {
                let p = elab_predicate(&st.env, &src)?;
                declare(&mut st, Declaration::Predicate(p))?
            }
            Command::Notation(src) => declare(&mut st, Declaration::Notation(elab_notation(&src)?))?,
            Command::Fixpoint(src) => {
                let (f, notation) = elab_fixpoint(&st.env, &src)?;
                declare(&mut st, Declaration::Fixpoint(f))?;
                if let Some(n) = notation {
                    declare(&mut st, Declaration::Notation(n))?;
                }
            }
            Command::Ltac(def) => declare(&mut st, Declaration::Tactic(def))?,
            Command::Lemma { name, binders, statement } => {
                let statement = elab_statement(&st.env, &binders, &statement)?;
                st.env.check_closed_formula(&statement)?;
                if st.env.lemma(&name).is_some() {
                    return Err(KernelError::DuplicateName { namespace: crate::kernel::Namespace::Lemma, name }.into());
                }
                st.proof = Some(OpenProof {
                    name,
                    goals: vec![ProofState::new(statement.clone())],
                    statement,
                    steps: Vector::new(),
                });
            }
            Command::Proof => {}
            Command::Qed => {
                let proof = st.proof.take().expect("checked above");
                if !proof.goals.is_empty() {
                    return Err(DocError::OpenGoals(proof.goals.len()));
                }
                let d = assemble(proof.steps.iter()).ok_or(DocError::OpenGoals(0))?;
                check_proof(&st.env, &proof.statement, &d).map_err(DocError::Rejected)?;
                declare(&mut st, Declaration::Lemma(Lemma { name: proof.name, statement: proof.statement }))?;
            }
            Command::Suggest => {
                let goal = first_goal(&st)?;
                let mut s = crate::search::suggest(&*st.model, &goal);
                s.truncate(SUGGEST_LIMIT);
                reply.messages = s.iter().map(|x| format!("{} ({:.3})", x.tactic.printed(), x.score)).collect();
                reply.suggestions = s;
            }
            Command::Search => {
                let goal = first_goal(&st)?;
                let outcome = search(&st.env, &*st.model, &goal, &self.config.budget);
                st = self.adopt(st, &outcome, &mut reply)?;
                reply.search = Some(outcome);
            }
            Command::SearchFailing(cache) => {
                let goal = first_goal(&st)?;
                let outcome = search_failing(&st.env, &*st.model, &goal, &cache, &self.config.budget);
                st = self.adopt(st, &outcome, &mut reply)?;
                reply.search = Some(outcome);
            }
            Command::Tactic(t) => st = self.tactic(st, &t)?,
        }
        Ok((st, reply))
    }

    fn adopt(&self, mut st: SessionState, outcome: &SearchOutcome, reply: &mut Reply) -> Result<SessionState, DocError> {
        if !outcome.found() {
            return Err(DocError::SearchFailed);
        }
        for t in &outcome.proof {
            st = self.tactic(st, t)?;
        }
        reply.messages.push(print_cache(&outcome.proof));
        Ok(st)
    }

    fn tactic(&self, mut st: SessionState, t: &TacticExpr) -> Result<SessionState, DocError> {
        let goal = first_goal(&st)?;
        let success = execute(&st.env, &goal, t, self.config.budget.fuel)
            .next()
            .transpose()
            .map_err(|error| DocError::Exec { tactic: t.to_string(), error })?
            .ok_or_else(|| DocError::TacticFailed(t.to_string()))?;
        for rec in &success.records {
            if self.config.verify_records && !rec.replays(&st.env) {
                return Err(DocError::RecordMismatch(rec.printed()));
            }
            let before = encode_state(&rec.before);
            let tactic = TacticView::new(rec.tactic.clone(), &before);
            let after: Vec<_> = rec.after.iter().map(encode_state).collect();
            st.model = st.model.add(&before, &tactic, &after);
            st.records.push_back(DbRecord { before, tactic, after });
        }
        let proof = st.proof.as_mut().expect("inside a proof");
        proof.goals.splice(0..1, success.goals.iter().cloned());
        proof.steps.push_back(success);
        Ok(st)
    }

    fn require(&self, st: SessionState, name: &str) -> Result<SessionState, DocError> {
        if st.loaded.iter().any(|d| d.name == name) {
            return Ok(st);
        }
        let unit = self.resolver.resolve(name)?;
        self.load(st, &unit)
    }

    fn load(&self, mut st: SessionState, unit: &CompiledUnit) -> Result<SessionState, DocError> {
        for dep in &unit.deps {
            if !st.loaded.iter().any(|d| d.name == dep.name) {
                st = self.require(st, &dep.name)?;
            }
            let found = st.loaded.iter().find(|d| d.name == dep.name).expect("just loaded");
            if found.hash != dep.hash {
                return Err(DocError::HashMismatch {
                    unit: unit.name.clone(),
                    dep: dep.name.clone(),
                    expected: dep.hash.clone(),
                    found: found.hash.clone(),
                });
            }
        }
        for d in &unit.decls {
            st.env = st.env.declare(d.clone())?;
        }
        for l in &unit.lemmas {
            st.env = st.env.declare(Declaration::Lemma(l.clone()))?;
        }
        for t in &unit.tactic_defs {
            st.env = st.env.declare(Declaration::Tactic(t.clone()))?;
        }
        for r in &unit.records {
            st.model = st.model.add(&r.before, &r.tactic, &r.after);
            st.inherited += 1;
        }
        st.loaded.push_back(Dependency { name: unit.name.clone(), hash: unit.hash() });
        Ok(st)
    }
}

fn declare(st: &mut SessionState, d: Declaration) -> Result<(), DocError> {
    st.env = st.env.declare(d.clone())?;
    st.own.push_back(d);
    Ok(())
}

fn first_goal(st: &SessionState) -> Result<ProofState, DocError> {
    st.goals().first().cloned().ok_or(DocError::OpenGoals(0))
}

/// Runs a whole file start to finish and returns its compiled unit.
pub fn compile(name: &str, src: &str, resolver: Arc<dyn Resolver>, config: &SessionConfig) -> Result<CompiledUnit, DocError> {
    let mut session = Session::new(resolver, config.clone())?;
    session.execute_source(src)?;
    if let Some(p) = &session.state().proof {
        return Err(DocError::Unfinished(p.name.clone()));
    }
    Ok(session.unit(name))
}
