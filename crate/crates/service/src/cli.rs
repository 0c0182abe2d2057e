use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{anyhow, Context};
use tacit_core::document::{compile, CompiledUnit, DirResolver, SessionConfig};
use tacit_core::search::Budget;

use crate::bench::{bench, BenchReport};

fn unit_name(path: &Path) -> anyhow::Result<String> {
    path.file_stem()
        .and_then(|s| s.to_str())
        .map(str::to_string)
        .ok_or_else(|| anyhow!("cannot name a unit after {}", path.display()))
}

fn resolver_for(path: &Path, config: &SessionConfig) -> Arc<DirResolver> {
    let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let dir = if dir.as_os_str().is_empty() { PathBuf::from(".") } else { dir };
    Arc::new(DirResolver::with_config(vec![dir], config.clone()))
}

pub fn compile_unit(path: &Path, config: &SessionConfig) -> anyhow::Result<CompiledUnit> {
    let src = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let name = unit_name(path)?;
    compile(&name, &src, resolver_for(path, config), config).with_context(|| format!("compiling {}", path.display()))
}

/// Compiles `path` and writes the unit; returns where it went.
pub fn cli_compile(path: &Path, out: Option<&Path>, config: &SessionConfig) -> anyhow::Result<PathBuf> {
    let unit = compile_unit(path, config)?;
    let out = out.map_or_else(|| path.with_extension("tco"), Path::to_path_buf);
    std::fs::write(&out, unit.to_bytes()).with_context(|| format!("writing {}", out.display()))?;
    Ok(out)
}

pub fn cli_check(path: &Path, config: &SessionConfig) -> anyhow::Result<CompiledUnit> {
    compile_unit(path, config)
}

pub fn cli_bench(path: &Path, config: &SessionConfig, budget: &Budget, out: Option<&Path>) -> anyhow::Result<BenchReport> {
    let src = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let report = bench(&src, resolver_for(path, config), config, budget).with_context(|| format!("benchmarking {}", path.display()))?;
    if let Some(out) = out {
        report.save(out)?;
    }
    Ok(report)
}

pub async fn cli_serve(port: u16, root: PathBuf, config: SessionConfig) -> anyhow::Result<()> {
    let app = crate::http::router(crate::http::AppState::new(root, config));
    let addr = SocketAddr::from(([127, 0, 0, 1], port));
    let listener = tokio::net::TcpListener::bind(addr).await.with_context(|| format!("binding {addr}"))?;
    eprintln!("listening on http://{addr}");
    axum::serve(listener, app).await?;
    Ok(())
}
