use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use tacit_core::document::SessionConfig;
use tacit_core::learner::{register_learner, RecencyLearner, DEFAULT_LEARNER};
use tacit_core::search::Budget;
use tacit_service::cli;

#[derive(Parser)]
#[command(name = "tacit", version, about = "Tactic-learning proof assistant")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compile a document to a .tco unit.
    Compile {
        path: PathBuf,
        #[arg(short = 'o')]
        out: Option<PathBuf>,
        #[command(flatten)]
        flags: Flags,
    },
    /// Check a document without writing anything.
    Check {
        path: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
    /// Serve the session API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        /// Directory holding the corpus.
        #[arg(default_value = ".")]
        root: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
    /// Search for every lemma using only the lemmas before it.
    Bench {
        path: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        flags: Flags,
    },
}

#[derive(Args)]
struct Flags {
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long)]
    seconds: Option<f64>,
    #[arg(long)]
    breadth: Option<usize>,
    #[arg(long, default_value = DEFAULT_LEARNER)]
    learner: String,
}

impl Flags {
    fn config(&self) -> SessionConfig {
        let mut budget = Budget::default();
        if let Some(n) = self.nodes {
            budget.nodes = n;
        }
        if let Some(s) = self.seconds {
            budget.seconds = Some(s);
        }
        if let Some(b) = self.breadth {
            budget.breadth = b;
        }
        SessionConfig { learner: self.learner.clone(), budget, ..SessionConfig::default() }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Cmd::Compile { path, out, flags } => {
            let written = cli::cli_compile(&path, out.as_deref(), &flags.config())?;
            eprintln!("wrote {}", written.display());
        }
        Cmd::Check { path, flags } => {
            let unit = cli::cli_check(&path, &flags.config())?;
            println!("{}: {} lemmas, {} records", unit.name, unit.lemmas.len(), unit.records.len());
        }
        Cmd::Serve { port, root, flags } => {
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(cli::cli_serve(port, root, flags.config()))?;
        }
        Cmd::Bench { path, out, flags } => {
            let config = flags.config();
            // The file's own `search` commands keep the default budget; only
            // the per-lemma probes use the flags.
            let prefix = SessionConfig { budget: Budget::default(), ..config.clone() };
            let report = cli::cli_bench(&path, &prefix, &config.budget, out.as_deref())?;
            for r in &report.rows {
                println!("{:<24} {:<5} {:>6} {:>8.3}s {}", r.lemma, r.found, r.expansions, r.elapsed, r.trace);
            }
            let a = &report.aggregate;
            println!("proved {}/{} ({:.1}%)", a.proved, a.total, 100.0 * a.fraction);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    register_learner("recency", Arc::new(RecencyLearner)).expect("recency registers once");
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
