//! Generators over pairwise-independent variable sets, kept as a tuple of
//! factors and never materialized.
//!
//! Indices are mixed-radix numbers whose digits are factor indices, the
//! first factor being the most significant. The induced order on prefixes
//! compares the projections onto the factors one after the other (see
//! [`SgTuple::compare`]). At horizon 1 this is plain lexicographic order
//! over the concatenated variables; at longer horizons it generally is not,
//! so a tuple index and the index of the same prefix in the materialized
//! product differ, while counts and prefix sets agree.

use std::sync::Arc;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::count::{TraceIndex, TraceSource, DEFAULT_MEMORY_LIMIT};
use crate::error::{CountError, ModelError};
use crate::schema::Schema;
use crate::sg::ScenarioGenerator;
use crate::trace::{pair_with_schema, TracePrefix};

#[derive(Debug)]
pub struct SgTuple {
    schema: Arc<Schema>,
    factors: Vec<TraceIndex>,
    /// Positions of each factor's variables in the tuple schema.
    positions: Vec<Vec<usize>>,
}

impl SgTuple {
    pub fn new(factors: Vec<Arc<ScenarioGenerator>>) -> Result<Self, ModelError> {
        Self::with_memory_limit(factors, DEFAULT_MEMORY_LIMIT)
    }

    pub fn with_memory_limit(
        factors: Vec<Arc<ScenarioGenerator>>,
        limit: usize,
    ) -> Result<Self, ModelError> {
        Self::from_indices(
            factors
                .into_iter()
                .map(|f| TraceIndex::with_memory_limit(f, limit))
                .collect(),
        )
    }

    pub fn from_indices(factors: Vec<TraceIndex>) -> Result<Self, ModelError> {
        let schema = Schema::concat(factors.iter().map(|f| f.schema().as_ref()))?;
        let mut positions = Vec::with_capacity(factors.len());
        let mut next = 0;
        for f in &factors {
            let n = f.schema().len();
            positions.push((next..next + n).collect());
            next += n;
        }
        Ok(Self {
            schema: Arc::new(schema),
            factors,
            positions,
        })
    }

    pub fn factors(&self) -> &[TraceIndex] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    /// Product of the factor alphabet sizes.
    pub fn alphabet_size(&self) -> BigUint {
        self.factors
            .iter()
            .map(|f| BigUint::from(f.sg().alphabet_size()))
            .product()
    }

    pub fn nb_traces(&mut self, h: usize) -> Result<BigUint, CountError> {
        self.prepare(h)?;
        self.count(h)
    }

    pub fn trace(&mut self, i: &BigUint, h: usize) -> Result<TracePrefix, CountError> {
        self.prepare(h)?;
        self.unrank(i, h)
    }

    /// Order of tuple indices: projections onto the factors compared in
    /// factor order, each lexicographically.
    pub fn compare(&self, p: &TracePrefix, q: &TracePrefix) -> std::cmp::Ordering {
        for (f, pos) in self.factors.iter().zip(&self.positions) {
            let a = p.project_positions(f.schema().clone(), pos);
            let b = q.project_positions(f.schema().clone(), pos);
            match a.cmp(&b) {
                std::cmp::Ordering::Equal => continue,
                o => return o,
            }
        }
        p.len().cmp(&q.len())
    }

    /// Per-factor indices of tuple index `i`, most significant first.
    pub fn digits(&self, i: &BigUint, h: usize) -> Result<Vec<BigUint>, CountError> {
        let counts = self
            .factors
            .iter()
            .map(|f| f.count(h))
            .collect::<Result<Vec<_>, _>>()?;
        let total: BigUint = counts.iter().product();
        if *i >= total {
            return Err(CountError::IndexOutOfBounds {
                index: i.to_string(),
                horizon: h,
                count: total.to_string(),
            });
        }
        let mut rest = i.clone();
        let mut digits = vec![BigUint::zero(); counts.len()];
        for (d, c) in digits.iter_mut().zip(&counts).rev() {
            let (q, r) = rest.div_rem(c);
            *d = r;
            rest = q;
        }
        Ok(digits)
    }
}

impl TraceSource for SgTuple {
    fn schema(&self) -> &Arc<Schema> {
        &self.schema
    }

    fn prepare(&mut self, h: usize) -> Result<(), CountError> {
        self.factors.iter_mut().try_for_each(|f| f.extend(h))
    }

    fn count(&self, h: usize) -> Result<BigUint, CountError> {
        self.factors
            .iter()
            .try_fold(BigUint::one(), |acc, f| Ok(acc * f.count(h)?))
    }

    fn unrank(&self, i: &BigUint, h: usize) -> Result<TracePrefix, CountError> {
        let digits = self.digits(i, h)?;
        let parts = self
            .factors
            .iter()
            .zip(&digits)
            .map(|(f, d)| f.unrank(d, h))
            .collect::<Result<Vec<_>, _>>()?;
        let refs: Vec<&TracePrefix> = parts.iter().collect();
        if refs.is_empty() {
            return Ok(TracePrefix::new_unchecked(
                self.schema.clone(),
                vec![Vec::new(); h],
            ));
        }
        Ok(pair_with_schema(self.schema.clone(), &refs))
    }

    fn rank(&self, p: &TracePrefix) -> Result<BigUint, CountError> {
        if p.schema() != &self.schema {
            return Err(CountError::InvalidPrefix {
                step: 0,
                reason: "prefix variables differ from the tuple's".into(),
            });
        }
        let h = p.len();
        let mut r = BigUint::zero();
        for (f, pos) in self.factors.iter().zip(&self.positions) {
            let part = p.project_positions(f.schema().clone(), pos);
            r = r * f.count(h)? + f.rank(&part)?;
        }
        Ok(r)
    }
}
