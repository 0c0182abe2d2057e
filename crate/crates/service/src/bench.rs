//! Leave-one-out benchmark: every lemma is searched for with the database
//! built from the commands before it.

use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use serde::Serialize;
use tacit_core::document::{DocError, Resolver, Session, SessionConfig};
use tacit_core::kernel::Name;
use tacit_core::search::{search, Budget};
use tacit_core::syntax::{parse_command, split_sentences, Command};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub lemma: String,
    pub found: bool,
    pub expansions: usize,
    pub elapsed: f64,
    pub trace: String,
    pub proof_len: usize,
    pub proof: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Aggregate {
    pub total: usize,
    pub proved: usize,
    pub fraction: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub aggregate: Aggregate,
}

/// A session positioned just after a lemma statement, with every earlier
/// command executed and nothing of the lemma's own proof.
#[derive(Clone, Debug)]
pub struct Probe {
    pub lemma: Name,
    pub session: Session,
}

pub fn probes(src: &str, resolver: Arc<dyn Resolver>, config: &SessionConfig) -> Result<Vec<Probe>, DocError> {
    let mut session = Session::new(resolver, config.clone())?;
    let mut out = Vec::new();
    for s in split_sentences(src)? {
        let cmd = parse_command(&s.text).map_err(|e| DocError::Parse(e.offset(s.pos)))?;
        let at = |e| DocError::At { pos: s.pos, error: Box::new(e) };
        if let Command::Lemma { name, .. } = &cmd {
            let mut probe = session.clone();
            probe.execute(&s.text).map_err(at)?;
            out.push(Probe { lemma: name.clone(), session: probe });
        }
        session.execute(&s.text).map_err(at)?;
    }
    Ok(out)
}

pub fn run_probe(probe: &Probe, budget: &Budget) -> BenchRow {
    let st = probe.session.state();
    let goal = st.goals()[0].clone();
    let outcome = search(&st.env, &*st.model, &goal, budget);
    BenchRow {
        lemma: probe.lemma.to_string(),
        found: outcome.found(),
        expansions: outcome.expansions,
        elapsed: outcome.elapsed,
        trace: outcome.trace.clone(),
        proof_len: outcome.proof.len(),
        proof: outcome.proof.iter().map(|t| t.to_string()).collect(),
    }
}

pub fn aggregate(rows: &[BenchRow]) -> Aggregate {
    let total = rows.len();
    let proved = rows.iter().filter(|r| r.found).count();
    let fraction = if total == 0 { 0.0 } else { proved as f64 / total as f64 };
    Aggregate { total, proved, fraction }
}

pub fn bench(src: &str, resolver: Arc<dyn Resolver>, config: &SessionConfig, budget: &Budget) -> Result<BenchReport, DocError> {
    let rows: Vec<BenchRow> = probes(src, resolver, config)?.iter().map(|p| run_probe(p, budget)).collect();
    let aggregate = aggregate(&rows);
    Ok(BenchReport { rows, aggregate })
}

impl BenchReport {
    /// Rows followed by the aggregate, as one JSON array.
    pub fn to_json(&self) -> serde_json::Value {
        let mut items: Vec<serde_json::Value> =
            self.rows.iter().map(|r| serde_json::to_value(r).expect("rows serialize")).collect();
        items.push(serde_json::to_value(&self.aggregate).expect("aggregate serializes"));
        serde_json::Value::Array(items)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["lemma", "found", "expansions", "elapsed", "trace", "proof_len"])?;
        for r in &self.rows {
            w.write_record([
                r.lemma.clone(),
                r.found.to_string(),
                r.expansions.to_string(),
                format!("{:.6}", r.elapsed),
                r.trace.clone(),
                r.proof_len.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes the JSON report to `path` and its CSV mirror beside it.
    pub fn save(&self, path: &Path) -> anyhow::Result<()> {
        std::fs::write(path, serde_json::to_vec_pretty(&self.to_json())?)?;
        let file = std::fs::File::create(path.with_extension("csv"))?;
        self.write_csv(file)?;
        Ok(())
    }
}
