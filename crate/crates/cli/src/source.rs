//! Loading specifications and generator files.

use std::collections::HashSet;
use std::path::Path;
use std::sync::Arc;

use scengen::dsl::{self, Compiled, Diagnostic, Severity};
use scengen::format::{load_any, Loaded};
use scengen::{CountTables, FormatError, ScenarioGenerator, SgTuple, TraceIndex, TraceSource};

use crate::error::CliError;

pub fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub fn compile_file(path: &Path, scenario: Option<&str>) -> Result<Compiled, CliError> {
    dsl::load(&read_text(path)?, scenario).map_err(|diagnostics| CliError::Spec {
        path: path.to_path_buf(),
        diagnostics,
    })
}

/// Every diagnostic of a specification: syntax and resolution errors, then
/// compile errors of each scenario, then lint warnings.
pub fn check_text(text: &str) -> Vec<Diagnostic> {
    let spec = match dsl::parse(text) {
        Ok(s) => s,
        Err(d) => return d,
    };
    let mut names: Vec<Option<String>> = spec
        .scenarios()
        .map(|s| s.name.as_ref().map(|n| n.name.clone()))
        .collect();
    if names.is_empty() {
        names.push(None);
    }
    let mut seen = HashSet::new();
    let mut out: Vec<Diagnostic> = Vec::new();
    for name in &names {
        if let Err(d) = dsl::compile(&spec, name.as_deref()) {
            for d in d {
                if seen.insert((d.line, d.col, d.code, d.message.clone())) {
                    out.push(d);
                }
            }
        }
    }
    out.sort_by_key(|d| (d.line, d.col));
    out.extend(dsl::lint(&spec));
    out
}

pub fn has_errors(d: &[Diagnostic]) -> bool {
    d.iter().any(|d| d.severity == Severity::Error)
}

fn index(sg: ScenarioGenerator, tables: Option<CountTables>, memory_limit: usize) -> TraceIndex {
    let sg = Arc::new(sg);
    match tables {
        Some(mut t) => {
            t.set_memory_limit(memory_limit);
            TraceIndex::with_tables(sg, t)
        }
        None => TraceIndex::with_memory_limit(sg, memory_limit),
    }
}

/// Opens a generator container or a tuple manifest.
pub fn open_generator(path: &Path, memory_limit: usize) -> Result<Box<dyn TraceSource>, CliError> {
    let format = |source| CliError::Format {
        path: path.to_path_buf(),
        source,
    };
    Ok(match load_any(path, memory_limit).map_err(format)? {
        Loaded::Single(sg, tables) => Box::new(index(*sg, tables, memory_limit)),
        Loaded::Tuple(factors) => {
            let indices = factors
                .into_iter()
                .map(|f| index(f.sg, f.tables, memory_limit))
                .collect();
            Box::new(SgTuple::from_indices(indices).map_err(|e| format(FormatError::Model(e)))?)
        }
    })
}
