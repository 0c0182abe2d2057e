//! Compiled units: canonical JSON carrying declarations and the tactic
//! database of one source file.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::kernel::{Declaration, Lemma};
use crate::learner::{ProofStateView, TacticView};
use crate::tactic::TacticDef;

pub const FORMAT_VERSION: u32 = 1;

/// A database row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DbRecord {
    pub before: ProofStateView,
    pub tactic: TacticView,
    pub after: Vec<ProofStateView>,
}

impl DbRecord {
    /// The single state handed to learners: the first goal left, or the
    /// solved marker.
    pub fn first_after(&self) -> ProofStateView {
        self.after.first().cloned().unwrap_or_else(ProofStateView::solved)
    }
}

#[derive(Serialize, Deserialize)]
struct PrintedTactic {
    printed: String,
}

#[derive(Serialize)]
struct RecordOut<'a> {
    before: &'a ProofStateView,
    tactic: PrintedTactic,
    after: &'a [ProofStateView],
}

#[derive(Deserialize)]
struct RecordIn {
    before: ProofStateView,
    tactic: PrintedTactic,
    after: Vec<ProofStateView>,
}

impl Serialize for DbRecord {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        RecordOut {
            before: &self.before,
            tactic: PrintedTactic { printed: self.tactic.printed().to_string() },
            after: &self.after,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for DbRecord {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = RecordIn::deserialize(d)?;
        let tactic = crate::syntax::parse_tactic(&r.tactic.printed).map_err(serde::de::Error::custom)?;
        Ok(DbRecord { tactic: TacticView::new(tactic, &r.before), before: r.before, after: r.after })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dependency {
    pub name: String,
    pub hash: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompiledUnit {
    pub version: u32,
    pub name: String,
    pub deps: Vec<Dependency>,
    pub decls: Vec<Declaration>,
    pub tactic_defs: Vec<TacticDef>,
    pub lemmas: Vec<Lemma>,
    pub records: Vec<DbRecord>,
}

#[derive(Debug, thiserror::Error)]
pub enum UnitError {
    #[error("malformed unit: {0}")]
    Malformed(#[from] serde_json::Error),
    #[error("unsupported unit format version {0}")]
    Version(u32),
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Hash of the canonical encoding of a record list.
pub fn records_digest(records: &[DbRecord]) -> String {
    sha256_hex(&serde_json::to_vec(records).expect("records serialize"))
}

impl CompiledUnit {
    pub fn to_bytes(&self) -> Vec<u8> {
        serde_json::to_vec(self).expect("units serialize")
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<CompiledUnit, UnitError> {
        let u: CompiledUnit = serde_json::from_slice(bytes)?;
        if u.version != FORMAT_VERSION {
            return Err(UnitError::Version(u.version));
        }
        Ok(u)
    }

    pub fn hash(&self) -> String {
        sha256_hex(&self.to_bytes())
    }

    pub fn digest(&self) -> String {
        records_digest(&self.records)
    }
}
