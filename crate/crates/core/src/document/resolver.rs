use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::sync::{Arc, Mutex, OnceLock};

use super::session::{compile, DocError, SessionConfig};
use super::unit::CompiledUnit;

pub const PRELUDE: &str = "Prelude";
pub const PRELUDE_SOURCE: &str = include_str!("../../../../fixtures/prelude.tac");

/// Finds compiled units by name.
pub trait Resolver: Send + Sync {
    fn resolve(&self, name: &str) -> Result<CompiledUnit, DocError>;
}

/// The prelude compiled once per process.
pub fn prelude() -> CompiledUnit {
    static UNIT: OnceLock<CompiledUnit> = OnceLock::new();
    UNIT.get_or_init(|| {
        compile(PRELUDE, PRELUDE_SOURCE, Arc::new(Bundled), &SessionConfig::default()).expect("the bundled prelude compiles")
    })
    .clone()
}

/// Knows only the bundled prelude.
pub struct Bundled;

impl Resolver for Bundled {
    fn resolve(&self, name: &str) -> Result<CompiledUnit, DocError> {
        if name == PRELUDE {
            Ok(prelude())
        } else {
            Err(DocError::UnknownRequire(name.to_string()))
        }
    }
}

/// Looks for `<name>.tco` in the given directories, compiling `<name>.tac`
/// when no compiled unit exists. Falls back to the bundled prelude.
#[derive(Clone)]
pub struct DirResolver {
    inner: Arc<Dirs>,
}

struct Dirs {
    roots: Vec<PathBuf>,
    config: SessionConfig,
    compiled: Mutex<BTreeMap<String, CompiledUnit>>,
    loading: Mutex<BTreeSet<String>>,
}

impl DirResolver {
    pub fn new(roots: Vec<PathBuf>) -> Self {
        Self::with_config(roots, SessionConfig::default())
    }

    /// `config` applies to sources compiled on demand.
    pub fn with_config(roots: Vec<PathBuf>, config: SessionConfig) -> Self {
        DirResolver {
            inner: Arc::new(Dirs {
                roots,
                config,
                compiled: Mutex::new(BTreeMap::new()),
                loading: Mutex::new(BTreeSet::new()),
            }),
        }
    }
}

impl Resolver for DirResolver {
    fn resolve(&self, name: &str) -> Result<CompiledUnit, DocError> {
        let me = &self.inner;
        for root in &me.roots {
            let tco = root.join(format!("{name}.tco"));
            if let Ok(bytes) = std::fs::read(&tco) {
                return CompiledUnit::from_bytes(&bytes).map_err(|e| DocError::Unit(format!("{}: {e}", tco.display())));
            }
        }
        if let Some(u) = me.compiled.lock().expect("resolver cache poisoned").get(name) {
            return Ok(u.clone());
        }
        for root in &me.roots {
            let tac = root.join(format!("{name}.tac"));
            let Ok(src) = std::fs::read_to_string(&tac) else {
                continue;
            };
            if !me.loading.lock().expect("resolver poisoned").insert(name.to_string()) {
                return Err(DocError::CyclicRequire(name.to_string()));
            }
            let unit = compile(name, &src, Arc::new(self.clone()), &me.config);
            me.loading.lock().expect("resolver poisoned").remove(name);
            let unit = unit?;
            me.compiled.lock().expect("resolver cache poisoned").insert(name.to_string(), unit.clone());
            return Ok(unit);
        }
        Bundled.resolve(name)
    }
}
