use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use crate::error::ModelError;
use crate::schema::{Assignment, Schema, ValueIdx};

/// A finite sequence of assignments over one schema.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TracePrefix {
    schema: Arc<Schema>,
    steps: Vec<Vec<ValueIdx>>,
}

impl TracePrefix {
    pub fn new(schema: Arc<Schema>, steps: Vec<Vec<ValueIdx>>) -> Result<Self, ModelError> {
        for s in &steps {
            schema.check_values(s)?;
        }
        Ok(Self { schema, steps })
    }

    pub(crate) fn new_unchecked(schema: Arc<Schema>, steps: Vec<Vec<ValueIdx>>) -> Self {
        Self { schema, steps }
    }

    pub fn from_assignments(
        schema: Arc<Schema>,
        steps: &[Assignment],
    ) -> Result<Self, ModelError> {
        let mut out = Vec::with_capacity(steps.len());
        for a in steps {
            if a.schema() != &schema {
                return Err(ModelError::ArityMismatch {
                    expected: schema.len(),
                    got: a.schema().len(),
                });
            }
            out.push(a.values().to_vec());
        }
        Ok(Self::new_unchecked(schema, out))
    }

    pub fn empty(schema: Arc<Schema>) -> Self {
        Self::new_unchecked(schema, Vec::new())
    }

    pub fn schema(&self) -> &Arc<Schema> {
        &self.schema
    }

    /// Horizon of the prefix.
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn steps(&self) -> &[Vec<ValueIdx>] {
        &self.steps
    }

    pub fn step(&self, t: usize) -> Assignment {
        Assignment::new_unchecked(self.schema.clone(), self.steps[t].clone())
    }

    pub fn assignments(&self) -> impl Iterator<Item = Assignment> + '_ {
        (0..self.len()).map(|t| self.step(t))
    }

    pub fn push(&mut self, values: Vec<ValueIdx>) -> Result<(), ModelError> {
        self.schema.check_values(&values)?;
        self.steps.push(values);
        Ok(())
    }

    /// Projects every step onto `names`, keeping schema order.
    pub fn project(&self, names: &[&str]) -> Result<TracePrefix, ModelError> {
        let (schema, positions) = self.schema.restrict(names)?;
        Ok(self.project_positions(Arc::new(schema), &positions))
    }

    pub(crate) fn project_positions(&self, schema: Arc<Schema>, positions: &[usize]) -> Self {
        let steps = self
            .steps
            .iter()
            .map(|s| positions.iter().map(|&p| s[p]).collect())
            .collect();
        Self::new_unchecked(schema, steps)
    }
}

impl PartialOrd for TracePrefix {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Lexicographic over steps, each step compared by variable order then
/// domain order.
impl Ord for TracePrefix {
    fn cmp(&self, other: &Self) -> Ordering {
        self.steps.cmp(&other.steps)
    }
}

impl fmt::Display for TracePrefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (t, s) in self.steps.iter().enumerate() {
            if t > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", self.schema.format_values(s))?;
        }
        write!(f, "]")
    }
}

/// Pointwise union of two prefixes over disjoint variables. The result's
/// schema lists `a`'s variables first.
pub fn pair_traces(a: &TracePrefix, b: &TracePrefix) -> Result<TracePrefix, ModelError> {
    if a.len() != b.len() {
        return Err(ModelError::LengthMismatch(a.len(), b.len()));
    }
    let schema = Schema::concat([a.schema.as_ref(), b.schema.as_ref()])?;
    Ok(pair_with_schema(Arc::new(schema), &[a, b]))
}

/// Pairs any number of prefixes of equal length under an already-built
/// concatenated schema.
pub(crate) fn pair_with_schema(schema: Arc<Schema>, parts: &[&TracePrefix]) -> TracePrefix {
    let h = parts.first().map_or(0, |p| p.len());
    let steps = (0..h)
        .map(|t| {
            let mut s = Vec::with_capacity(schema.len());
            for p in parts {
                s.extend_from_slice(&p.steps[t]);
            }
            s
        })
        .collect();
    TracePrefix::new_unchecked(schema, steps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::VariableDecl;

    fn schema(names: &[&str]) -> Arc<Schema> {
        Arc::new(
            Schema::new(
                names
                    .iter()
                    .map(|n| VariableDecl::new(*n, ["0", "1"]).unwrap())
                    .collect(),
            )
            .unwrap(),
        )
    }

    #[test]
    fn pairing_interleaves_steps() {
        let a = TracePrefix::new(schema(&["a"]), vec![vec![0], vec![1]]).unwrap();
        let b = TracePrefix::new(schema(&["b"]), vec![vec![1], vec![1]]).unwrap();
        let p = pair_traces(&a, &b).unwrap();
        assert_eq!(p.steps(), &[vec![0, 1], vec![1, 1]]);
        assert_eq!(p.project(&["b"]).unwrap().steps(), b.steps());
    }

    #[test]
    fn pairing_errors() {
        let a = TracePrefix::new(schema(&["a"]), vec![vec![0]]).unwrap();
        let b = TracePrefix::new(schema(&["b"]), vec![]).unwrap();
        assert_eq!(pair_traces(&a, &b), Err(ModelError::LengthMismatch(1, 0)));
        assert!(matches!(pair_traces(&a, &a), Err(ModelError::Overlap(_))));
    }

    #[test]
    fn order_is_lexicographic() {
        let s = schema(&["a", "b"]);
        let p = TracePrefix::new(s.clone(), vec![vec![0, 1], vec![1, 1]]).unwrap();
        let q = TracePrefix::new(s, vec![vec![1, 0], vec![0, 0]]).unwrap();
        assert!(p < q);
    }
}
