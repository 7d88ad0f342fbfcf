//! Extension counts, their prefix sums, and lexicographic (un)ranking.
//!
//! `ext[k][x]` is the number of length-`k` paths from state `x`. For every
//! tabulated `k < h_max` and state `x` with out-degree `d`, the prefix-sum
//! row `xi[k][x]` has `d + 1` entries: entry `j` sums `ext[k]` over the
//! targets of the first `j` edges of `x`, and entry `d` equals
//! `ext[k + 1][x]`.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::CountError;
use crate::schema::Schema;
use crate::sg::{ExploredGraph, ScenarioGenerator};
use crate::trace::TracePrefix;

pub const DEFAULT_MEMORY_LIMIT: usize = 8 << 30;

fn big_bytes(v: &BigUint) -> usize {
    std::mem::size_of::<BigUint>() + v.bits().div_ceil(64) as usize * 8
}

/// Number of length-`h` paths from state 0, with O(states) memory.
pub fn count_paths(g: &ExploredGraph, h: usize) -> BigUint {
    let n = g.num_states();
    let mut col = vec![BigUint::one(); n];
    for _ in 0..h {
        col = (0..n as u32)
            .map(|x| {
                g.edge_targets(x)
                    .iter()
                    .fold(BigUint::zero(), |acc, &t| acc + &col[t as usize])
            })
            .collect();
    }
    col.swap_remove(0)
}

#[derive(Clone, Debug)]
pub struct CountTables {
    ext: Vec<Vec<BigUint>>,
    xi: Vec<Vec<BigUint>>,
    bytes: usize,
    memory_limit: usize,
    columns_built: u64,
}

impl CountTables {
    pub fn new(memory_limit: usize) -> Self {
        Self {
            ext: Vec::new(),
            xi: Vec::new(),
            bytes: 0,
            memory_limit,
            columns_built: 0,
        }
    }

    /// Highest tabulated horizon, `None` before the first extension.
    pub fn h_max(&self) -> Option<usize> {
        self.ext.len().checked_sub(1)
    }

    pub fn covers(&self, h: usize) -> bool {
        h < self.ext.len()
    }

    /// Number of `ext` columns computed so far. Stays constant while no
    /// extension happens.
    pub fn columns_built(&self) -> u64 {
        self.columns_built
    }

    /// Approximate heap footprint of the tables.
    pub fn bytes(&self) -> usize {
        self.bytes
    }

    pub fn memory_limit(&self) -> usize {
        self.memory_limit
    }

    pub fn set_memory_limit(&mut self, limit: usize) {
        self.memory_limit = limit;
    }

    pub fn ext(&self, x: u32, k: usize) -> Option<&BigUint> {
        self.ext.get(k)?.get(x as usize)
    }

    pub fn ext_columns(&self) -> &[Vec<BigUint>] {
        &self.ext
    }

    /// Prefix-sum row of `x` at `k`, of length `out_degree(x) + 1`.
    pub fn xi_row(&self, g: &ExploredGraph, x: u32, k: usize) -> Option<&[BigUint]> {
        let col = self.xi.get(k)?;
        let start = g.offsets()[x as usize] as usize + x as usize;
        Some(&col[start..start + g.out_degree(x) + 1])
    }

    /// Tabulates every horizon up to `h`. Already tabulated columns are
    /// left untouched.
    pub fn extend(&mut self, g: &ExploredGraph, h: usize) -> Result<(), CountError> {
        let n = g.num_states();
        if self.ext.is_empty() {
            let col = vec![BigUint::one(); n];
            self.commit_ext(col)?;
        }
        while self.ext.len() <= h {
            let prev = self.ext.last().expect("column 0 exists");
            let mut row_col = Vec::with_capacity(g.num_edges() + n);
            let mut next = Vec::with_capacity(n);
            let mut added = 0usize;
            for x in 0..n as u32 {
                let mut acc = BigUint::zero();
                for &t in g.edge_targets(x) {
                    added += big_bytes(&acc);
                    row_col.push(acc.clone());
                    acc += &prev[t as usize];
                }
                added += big_bytes(&acc);
                row_col.push(acc.clone());
                next.push(acc);
            }
            self.check_budget(added)?;
            self.bytes += added;
            self.xi.push(row_col);
            self.commit_ext(next)?;
        }
        Ok(())
    }

    /// Rebuilds tables from stored `ext` columns, recomputing prefix sums.
    pub fn from_ext_columns(
        g: &ExploredGraph,
        columns: Vec<Vec<BigUint>>,
        memory_limit: usize,
    ) -> Result<Self, CountError> {
        let mut t = Self::new(memory_limit);
        let mut it = columns.into_iter();
        let Some(first) = it.next() else {
            return Ok(t);
        };
        t.commit_ext(first)?;
        for col in it {
            let prev = t.ext.last().expect("column exists");
            let mut row_col = Vec::with_capacity(g.num_edges() + g.num_states());
            for x in 0..g.num_states() as u32 {
                let mut acc = BigUint::zero();
                for &tg in g.edge_targets(x) {
                    row_col.push(acc.clone());
                    acc += &prev[tg as usize];
                }
                row_col.push(acc);
            }
            let added = row_col.iter().map(big_bytes).sum();
            t.check_budget(added)?;
            t.bytes += added;
            t.xi.push(row_col);
            t.commit_ext(col)?;
        }
        Ok(t)
    }

    fn check_budget(&self, added: usize) -> Result<(), CountError> {
        let bytes = self.bytes + added;
        if bytes > self.memory_limit {
            return Err(CountError::MemoryLimit {
                bytes,
                limit: self.memory_limit,
            });
        }
        Ok(())
    }

    fn commit_ext(&mut self, col: Vec<BigUint>) -> Result<(), CountError> {
        let added = col.iter().map(big_bytes).sum();
        self.check_budget(added)?;
        self.bytes += added;
        self.ext.push(col);
        self.columns_built += 1;
        Ok(())
    }
}

/// Anything that counts, unranks and ranks trace prefixes.
pub trait TraceSource: Send + Sync {
    fn schema(&self) -> &Arc<Schema>;

    /// Tabulates horizons up to `h`.
    fn prepare(&mut self, h: usize) -> Result<(), CountError>;

    /// Number of length-`h` prefixes. `h` must be tabulated.
    fn count(&self, h: usize) -> Result<BigUint, CountError>;

    /// The `i`-th length-`h` prefix in lexicographic order.
    fn unrank(&self, i: &BigUint, h: usize) -> Result<TracePrefix, CountError>;

    /// Inverse of [`TraceSource::unrank`].
    fn rank(&self, p: &TracePrefix) -> Result<BigUint, CountError>;
}

/// A scenario generator with its counting tables.
///
/// Methods taking `&mut self` extend the tables on demand; the `&self`
/// variants only read them and can be called concurrently.
#[derive(Debug)]
pub struct TraceIndex {
    sg: Arc<ScenarioGenerator>,
    tables: CountTables,
    work: AtomicU64,
}

impl TraceIndex {
    pub fn new(sg: Arc<ScenarioGenerator>) -> Self {
        Self::with_memory_limit(sg, DEFAULT_MEMORY_LIMIT)
    }

    pub fn with_memory_limit(sg: Arc<ScenarioGenerator>, limit: usize) -> Self {
        Self::with_tables(sg, CountTables::new(limit))
    }

    pub fn with_tables(sg: Arc<ScenarioGenerator>, tables: CountTables) -> Self {
        Self {
            sg,
            tables,
            work: AtomicU64::new(0),
        }
    }

    pub fn sg(&self) -> &Arc<ScenarioGenerator> {
        &self.sg
    }

    pub fn tables(&self) -> &CountTables {
        &self.tables
    }

    pub fn extend(&mut self, h: usize) -> Result<(), CountError> {
        self.tables.extend(self.sg.graph(), h)
    }

    pub fn nb_traces(&mut self, h: usize) -> Result<BigUint, CountError> {
        self.extend(h)?;
        self.count(h)
    }

    pub fn trace(&mut self, i: &BigUint, h: usize) -> Result<TracePrefix, CountError> {
        self.extend(h)?;
        self.unrank(i, h)
    }

    /// Binary-search probes performed by unranking since the last reset.
    pub fn work(&self) -> u64 {
        self.work.load(Ordering::Relaxed)
    }

    pub fn reset_work(&self) {
        self.work.store(0, Ordering::Relaxed);
    }

    fn not_tabulated(&self, h: usize) -> CountError {
        CountError::NotTabulated {
            horizon: h,
            h_max: self.tables.h_max(),
        }
    }

    /// Alphabet indices of the `i`-th length-`h` prefix.
    pub fn unrank_inputs(&self, i: &BigUint, h: usize) -> Result<Vec<u32>, CountError> {
        if !self.tables.covers(h) {
            return Err(self.not_tabulated(h));
        }
        let g = self.sg.graph();
        let total = &self.tables.ext[h][0];
        if i >= total {
            return Err(CountError::IndexOutOfBounds {
                index: i.to_string(),
                horizon: h,
                count: total.to_string(),
            });
        }
        let mut m = i.clone();
        let mut x = 0u32;
        let mut path = Vec::with_capacity(h);
        let mut probes = 0u64;
        for k in (1..=h).rev() {
            let row = self.tables.xi_row(g, x, k - 1).expect("tabulated");
            let j = last_at_most(&row[..row.len() - 1], &m, &mut probes);
            m -= &row[j];
            let e = g.edge_range(x).start + j;
            path.push(g.inputs()[e]);
            x = g.targets()[e];
        }
        self.work.fetch_add(probes, Ordering::Relaxed);
        Ok(path)
    }
}

/// Largest `j` with `row[j] <= m`. `row` is non-decreasing and starts at 0.
fn last_at_most(row: &[BigUint], m: &BigUint, probes: &mut u64) -> usize {
    let (mut lo, mut hi) = (0usize, row.len());
    while hi - lo > 1 {
        *probes += 1;
        let mid = lo + (hi - lo) / 2;
        if row[mid] <= *m {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    *probes += 1;
    lo
}

impl TraceSource for TraceIndex {
    fn schema(&self) -> &Arc<Schema> {
        self.sg.graph().schema()
    }

    fn prepare(&mut self, h: usize) -> Result<(), CountError> {
        self.extend(h)
    }

    fn count(&self, h: usize) -> Result<BigUint, CountError> {
        self.tables
            .ext(0, h)
            .cloned()
            .ok_or_else(|| self.not_tabulated(h))
    }

    fn unrank(&self, i: &BigUint, h: usize) -> Result<TracePrefix, CountError> {
        let g = self.sg.graph();
        let steps = self
            .unrank_inputs(i, h)?
            .into_iter()
            .map(|u| g.input(u).to_vec())
            .collect();
        Ok(TracePrefix::new_unchecked(g.schema().clone(), steps))
    }

    fn rank(&self, p: &TracePrefix) -> Result<BigUint, CountError> {
        let g = self.sg.graph();
        let h = p.len();
        if p.schema() != g.schema() {
            return Err(CountError::InvalidPrefix {
                step: 0,
                reason: "prefix variables differ from the generator's".into(),
            });
        }
        if !self.tables.covers(h) {
            return Err(self.not_tabulated(h));
        }
        let mut r = BigUint::zero();
        let mut x = 0u32;
        for (t, u) in p.steps().iter().enumerate() {
            let invalid = || CountError::InvalidPrefix {
                step: t,
                reason: format!("input {} is not admissible", g.schema().format_values(u)),
            };
            let letter = g.input_index(u).ok_or_else(invalid)?;
            let j = g.edge_inputs(x).binary_search(&letter).map_err(|_| invalid())?;
            let row = self.tables.xi_row(g, x, h - t - 1).expect("tabulated");
            r += &row[j];
            x = g.edge_targets(x)[j];
        }
        Ok(r)
    }
}
