//! On-disk container for scenario generators.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic      8 bytes  "SCENGEN\0"
//! version    u32      1
//! header_len u32
//! header     JSON     {schema, alphabet, states, edges, origin, tables}
//! offsets    (states + 1) x u32
//! inputs     edges x u32
//! targets    edges x u32
//! tables     present iff header.tables is not null: for k = 0..=h_max, for
//!            each state, u32 byte length then the big-endian magnitude of
//!            ext(x, k) (zero is stored with length 0)
//! ```
//!
//! Prefix-sum rows are recomputed on load. State keys of the original
//! monitor are not stored; a loaded generator uses index keys.
//!
//! A tuple of independent generators is stored as a JSON manifest next to
//! one container per factor.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::count::CountTables;
use crate::error::FormatError;
use crate::monitor::index_key;
use crate::schema::{Schema, ValueIdx};
use crate::sg::{ExploredGraph, Provenance, ScenarioGenerator};

pub const MAGIC: &[u8; 8] = b"SCENGEN\0";
pub const FORMAT_VERSION: u32 = 1;
pub const TUPLE_FORMAT: &str = "scengen-tuple";

#[derive(Serialize, Deserialize)]
struct Header {
    schema: Schema,
    alphabet: Vec<Vec<ValueIdx>>,
    states: usize,
    edges: usize,
    origin: Provenance,
    tables: Option<TablesHeader>,
}

#[derive(Serialize, Deserialize)]
struct TablesHeader {
    h_max: usize,
}

fn write_u32s<W: Write>(w: &mut W, xs: &[u32]) -> std::io::Result<()> {
    let mut buf = Vec::with_capacity(xs.len() * 4);
    for x in xs {
        buf.extend_from_slice(&x.to_le_bytes());
    }
    w.write_all(&buf)
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32, FormatError> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u32s<R: Read>(r: &mut R, n: usize) -> Result<Vec<u32>, FormatError> {
    let mut buf = vec![0u8; n.checked_mul(4).ok_or_else(|| corrupt("array too large"))?];
    r.read_exact(&mut buf)?;
    Ok(buf
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes(c.try_into().expect("chunk of 4")))
        .collect())
}

fn corrupt(msg: &str) -> FormatError {
    FormatError::Corrupt(msg.to_string())
}

/// Writes `sg`, and its tables when given.
pub fn write_sg<W: Write>(
    w: &mut W,
    sg: &ScenarioGenerator,
    tables: Option<&CountTables>,
) -> Result<(), FormatError> {
    let g = sg.graph();
    let tables = tables.filter(|t| t.h_max().is_some());
    let header = Header {
        schema: g.schema().as_ref().clone(),
        alphabet: g.alphabet().to_vec(),
        states: g.num_states(),
        edges: g.num_edges(),
        origin: sg.origin().clone(),
        tables: tables.map(|t| TablesHeader {
            h_max: t.h_max().expect("filtered"),
        }),
    };
    let json = serde_json::to_vec(&header)?;
    w.write_all(MAGIC)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    w.write_all(&(json.len() as u32).to_le_bytes())?;
    w.write_all(&json)?;
    write_u32s(w, g.offsets())?;
    write_u32s(w, g.inputs())?;
    write_u32s(w, g.targets())?;
    if let Some(t) = tables {
        for col in t.ext_columns() {
            for v in col {
                let bytes = if v.bits() == 0 {
                    Vec::new()
                } else {
                    v.to_bytes_be()
                };
                w.write_all(&(bytes.len() as u32).to_le_bytes())?;
                w.write_all(&bytes)?;
            }
        }
    }
    Ok(())
}

/// Reads a container. Tables, when stored, are rebuilt under `memory_limit`.
pub fn read_sg<R: Read>(
    r: &mut R,
    memory_limit: usize,
) -> Result<(ScenarioGenerator, Option<CountTables>), FormatError> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(FormatError::BadMagic);
    }
    let version = read_u32(r)?;
    if version != FORMAT_VERSION {
        return Err(FormatError::Version(version));
    }
    let len = read_u32(r)? as usize;
    let mut json = vec![0u8; len];
    r.read_exact(&mut json)?;
    let header: Header = serde_json::from_slice(&json)?;
    let offsets = read_u32s(r, header.states + 1)?;
    let inputs = read_u32s(r, header.edges)?;
    let targets = read_u32s(r, header.edges)?;
    let keys = (0..header.states as u32).map(index_key).collect();
    let graph = ExploredGraph::from_parts(
        Arc::new(header.schema),
        header.alphabet,
        keys,
        offsets,
        inputs,
        targets,
    )
    .map_err(FormatError::Corrupt)?;
    let sg = ScenarioGenerator::from_graph(graph, header.origin).map_err(FormatError::Corrupt)?;
    let tables = match header.tables {
        None => None,
        Some(th) => {
            let mut columns = Vec::with_capacity(th.h_max + 1);
            for _ in 0..=th.h_max {
                let mut col = Vec::with_capacity(header.states);
                for _ in 0..header.states {
                    let n = read_u32(r)? as usize;
                    let mut buf = vec![0u8; n];
                    r.read_exact(&mut buf)?;
                    col.push(BigUint::from_bytes_be(&buf));
                }
                columns.push(col);
            }
            let t = CountTables::from_ext_columns(sg.graph(), columns, memory_limit)
                .map_err(|e| FormatError::Corrupt(e.to_string()))?;
            check_tables(&sg, &t)?;
            Some(t)
        }
    };
    Ok((sg, tables))
}

/// Stored tables must satisfy the `ext` recurrence.
fn check_tables(sg: &ScenarioGenerator, t: &CountTables) -> Result<(), FormatError> {
    let g = sg.graph();
    let Some(h_max) = t.h_max() else {
        return Ok(());
    };
    for x in 0..g.num_states() as u32 {
        if t.ext(x, 0) != Some(&BigUint::from(1u32)) {
            return Err(corrupt("ext(x, 0) must be 1"));
        }
        for k in 0..h_max {
            let row = t.xi_row(g, x, k).expect("tabulated");
            if row.last() != t.ext(x, k + 1) {
                return Err(corrupt("stored counts do not satisfy the recurrence"));
            }
        }
    }
    Ok(())
}

pub fn save_sg(
    path: &Path,
    sg: &ScenarioGenerator,
    tables: Option<&CountTables>,
) -> Result<(), FormatError> {
    let mut w = BufWriter::new(File::create(path)?);
    write_sg(&mut w, sg, tables)?;
    w.flush()?;
    Ok(())
}

pub fn load_sg(
    path: &Path,
    memory_limit: usize,
) -> Result<(ScenarioGenerator, Option<CountTables>), FormatError> {
    read_sg(&mut BufReader::new(File::open(path)?), memory_limit)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TupleManifest {
    pub format: String,
    pub version: u32,
    pub factors: Vec<FactorEntry>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorEntry {
    /// Container path, relative to the manifest's directory.
    pub file: String,
    /// Names of the monitors conjoined into this factor.
    pub members: Vec<String>,
}

pub struct SavedFactor<'a> {
    pub sg: &'a ScenarioGenerator,
    pub tables: Option<&'a CountTables>,
    pub members: Vec<String>,
}

/// Writes `<stem>.factor<i>.sg` next to `manifest` and the manifest itself.
pub fn save_tuple(manifest: &Path, factors: &[SavedFactor<'_>]) -> Result<(), FormatError> {
    let dir = manifest.parent().unwrap_or(Path::new(""));
    let stem = manifest
        .file_stem()
        .and_then(|s| s.to_str())
        .ok_or_else(|| corrupt("manifest path has no file name"))?;
    let mut entries = Vec::with_capacity(factors.len());
    for (i, f) in factors.iter().enumerate() {
        let file = format!("{stem}.factor{i}.sg");
        save_sg(&dir.join(&file), f.sg, f.tables)?;
        entries.push(FactorEntry {
            file,
            members: f.members.clone(),
        });
    }
    let m = TupleManifest {
        format: TUPLE_FORMAT.into(),
        version: FORMAT_VERSION,
        factors: entries,
    };
    let mut w = BufWriter::new(File::create(manifest)?);
    serde_json::to_writer_pretty(&mut w, &m)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub struct LoadedFactor {
    pub sg: ScenarioGenerator,
    pub tables: Option<CountTables>,
    pub members: Vec<String>,
    pub path: PathBuf,
}

pub enum Loaded {
    Single(Box<ScenarioGenerator>, Option<CountTables>),
    Tuple(Vec<LoadedFactor>),
}

/// Loads either a container or a tuple manifest, told apart by the magic.
pub fn load_any(path: &Path, memory_limit: usize) -> Result<Loaded, FormatError> {
    let mut head = [0u8; 8];
    let n = File::open(path)?.read(&mut head)?;
    if n == 8 && &head == MAGIC {
        let (sg, t) = load_sg(path, memory_limit)?;
        return Ok(Loaded::Single(Box::new(sg), t));
    }
    let m: TupleManifest = serde_json::from_reader(BufReader::new(File::open(path)?))?;
    if m.format != TUPLE_FORMAT {
        return Err(FormatError::BadMagic);
    }
    if m.version != FORMAT_VERSION {
        return Err(FormatError::Version(m.version));
    }
    let dir = path.parent().unwrap_or(Path::new(""));
    let mut out = Vec::with_capacity(m.factors.len());
    for f in m.factors {
        let p = dir.join(&f.file);
        let (sg, tables) = load_sg(&p, memory_limit)?;
        out.push(LoadedFactor {
            sg,
            tables,
            members: f.members,
            path: p,
        });
    }
    Ok(Loaded::Tuple(out))
}
