//! Executes a spec and writes the table, sidecar metadata and plot.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::{json, Value};

use crate::error::CliError;
use crate::experiments::execute;
use crate::spec::{ExperimentSpec, Format, PlotSpec};
use crate::table::Table;

pub const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "+", env!("MMSEC_GIT_REV"));

/// Command-line settings that take precedence over the spec.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub lanes: Option<usize>,
    pub out: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub format: Option<Format>,
}

impl Overrides {
    pub fn apply(&self, spec: &mut ExperimentSpec) {
        if let Some(s) = self.seed {
            spec.mc.seed = s;
        }
        if let Some(l) = self.lanes {
            spec.mc.lanes = Some(l);
        }
        if let Some(o) = &self.out {
            spec.output.path = Some(o.clone());
        }
        if let Some(f) = self.format {
            spec.output.format = f;
        }
        if let Some(p) = &self.svg {
            let log_y = spec.plot.as_ref().is_some_and(|p| p.log_y);
            spec.plot = Some(PlotSpec {
                path: p.clone(),
                log_y,
            });
        }
    }
}

/// Table bytes in the requested format.
pub fn render(table: &Table, format: Format) -> Result<Vec<u8>, CliError> {
    match format {
        Format::Csv => table.to_csv(),
        Format::Json => table.to_json(),
    }
}

pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".meta.json");
    out.with_file_name(name)
}

fn sidecar(spec: &ExperimentSpec, table: &Table) -> Value {
    let timestamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs());
    json!({
        "version": VERSION,
        "seed": spec.mc.seed,
        "timestamp_unix": timestamp,
        "columns": table.columns,
        "results": table.meta,
        "config": spec,
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::io(format!("creating {}", dir.display()), e))?;
    }
    fs::write(path, bytes).map_err(|e| CliError::io(format!("writing {}", path.display()), e))
}

/// Runs the experiment and writes every requested artifact. The table goes
/// to standard output when the spec names no path.
pub fn run(spec: &ExperimentSpec) -> Result<Table, CliError> {
    let table = execute(spec)?;
    let bytes = render(&table, spec.output.format)?;
    match &spec.output.path {
        Some(p) => {
            write_file(p, &bytes)?;
            let meta = serde_json::to_vec_pretty(&sidecar(spec, &table))
                .map_err(|e| CliError::Output(format!("json: {e}")))?;
            write_file(&sidecar_path(p), &meta)?;
        }
        None => std::io::stdout()
            .write_all(&bytes)
            .map_err(|e| CliError::io("writing standard output", e))?,
    }
    if let Some(plot) = &spec.plot {
        let title = spec.name.as_deref().unwrap_or("mmsec");
        write_file(&plot.path, table.to_svg(title, plot.log_y).as_bytes())?;
    }
    Ok(table)
}
