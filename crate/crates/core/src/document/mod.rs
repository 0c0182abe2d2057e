//! Vernacular documents: sessions with per-position snapshots, compilation
//! to units and `Require` inheritance.

pub mod resolver;
pub mod session;
pub mod unit;

pub use resolver::{prelude, Bundled, DirResolver, Resolver, PRELUDE, PRELUDE_SOURCE};
pub use session::{compile, DocError, OpenProof, Reply, Session, SessionConfig, SessionState, SUGGEST_LIMIT};
pub use unit::{records_digest, sha256_hex, CompiledUnit, DbRecord, Dependency, UnitError, FORMAT_VERSION};
