//! Trace records: one JSON object per line, or one CSV row per trace.

use std::io::Write;
use std::sync::Arc;

use clap::ValueEnum;
use num_bigint::BigUint;
use scengen::{Schema, TracePrefix};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRecord {
    /// Decimal, since indices routinely exceed 64 bits.
    pub index: String,
    pub horizon: usize,
    /// Variable to value, per step.
    pub steps: Vec<Map<String, Value>>,
}

impl TraceRecord {
    pub fn new(index: &BigUint, p: &TracePrefix) -> Self {
        let steps = p
            .assignments()
            .map(|a| {
                a.bindings()
                    .map(|(k, v)| (k.to_string(), Value::String(v.to_string())))
                    .collect()
            })
            .collect();
        Self {
            index: index.to_string(),
            horizon: p.len(),
            steps,
        }
    }

    /// Re-encodes the steps over `schema`. Every variable must be bound.
    pub fn to_prefix(&self, schema: &Arc<Schema>) -> Result<TracePrefix, String> {
        if self.steps.len() != self.horizon {
            return Err(format!(
                "horizon is {} but {} steps are given",
                self.horizon,
                self.steps.len()
            ));
        }
        let mut steps = Vec::with_capacity(self.steps.len());
        for (t, step) in self.steps.iter().enumerate() {
            if step.len() != schema.len() {
                return Err(format!(
                    "step {t} binds {} variables, the generator has {}",
                    step.len(),
                    schema.len()
                ));
            }
            let mut bindings = Vec::with_capacity(step.len());
            for (k, v) in step {
                let v = v
                    .as_str()
                    .ok_or_else(|| format!("step {t}: value of `{k}` is not a string"))?;
                bindings.push((k.as_str(), v));
            }
            steps.push(
                schema
                    .encode(&bindings)
                    .map_err(|e| format!("step {t}: {e}"))?,
            );
        }
        TracePrefix::new(schema.clone(), steps).map_err(|e| e.to_string())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    /// One JSON object per line.
    #[default]
    Jsonl,
    /// One row per trace, one column per variable per step.
    Csv,
}

pub enum RecordWriter<W: Write> {
    Jsonl(W),
    /// Writer and number of columns.
    Csv(Box<csv::Writer<W>>, usize),
}

impl<W: Write> RecordWriter<W> {
    /// Traces written in CSV mode must not be longer than `max_horizon`;
    /// shorter ones leave their trailing columns empty.
    pub fn new(
        out: W,
        format: OutputFormat,
        schema: &Schema,
        max_horizon: usize,
    ) -> Result<Self, CliError> {
        Ok(match format {
            OutputFormat::Jsonl => RecordWriter::Jsonl(out),
            OutputFormat::Csv => {
                let mut w = csv::Writer::from_writer(out);
                let mut header = vec!["index".to_string(), "horizon".to_string()];
                for t in 0..max_horizon {
                    header.extend(schema.names().map(|v| format!("{v}@{t}")));
                }
                w.write_record(&header)?;
                RecordWriter::Csv(Box::new(w), header.len())
            }
        })
    }

    pub fn write(&mut self, index: &BigUint, p: &TracePrefix) -> Result<(), CliError> {
        match self {
            RecordWriter::Jsonl(w) => {
                serde_json::to_writer(&mut *w, &TraceRecord::new(index, p))?;
                w.write_all(b"\n")?;
            }
            RecordWriter::Csv(w, width) => {
                let mut row = vec![index.to_string(), p.len().to_string()];
                for a in p.assignments() {
                    row.extend(a.bindings().map(|(_, v)| v.to_string()));
                }
                if row.len() > *width {
                    return Err(CliError::Usage(format!(
                        "trace of horizon {} does not fit the csv header",
                        p.len()
                    )));
                }
                row.resize(*width, String::new());
                w.write_record(&row)?;
            }
        }
        Ok(())
    }

    pub fn finish(self) -> Result<(), CliError> {
        match self {
            RecordWriter::Jsonl(mut w) => w.flush()?,
            RecordWriter::Csv(mut w, _) => w.flush()?,
        }
        Ok(())
    }
}
