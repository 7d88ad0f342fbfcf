//! Input variables, their ordered finite domains, and assignments over them.
//!
//! Assignments store one domain index per variable, in the schema's variable
//! order. Comparing two assignments over the same schema is therefore plain
//! lexicographic comparison of the index vectors: variable order first, then
//! declared domain order.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// Index of a value inside its variable's declared domain.
pub type ValueIdx = u16;

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

pub(crate) fn is_value_token(s: &str) -> bool {
    !s.is_empty()
        && s
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '+' | '.' | '%'))
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VariableDecl {
    name: String,
    domain: Vec<String>,
}

impl VariableDecl {
    pub fn new<S: Into<String>>(
        name: impl Into<String>,
        domain: impl IntoIterator<Item = S>,
    ) -> Result<Self, ModelError> {
        let name = name.into();
        if !is_identifier(&name) {
            return Err(ModelError::InvalidName(name));
        }
        let domain: Vec<String> = domain.into_iter().map(Into::into).collect();
        if domain.is_empty() {
            return Err(ModelError::EmptyDomain(name));
        }
        if domain.len() > ValueIdx::MAX as usize {
            return Err(ModelError::DomainTooLarge {
                var: name,
                len: domain.len(),
                max: ValueIdx::MAX as usize,
            });
        }
        for (i, v) in domain.iter().enumerate() {
            if !is_value_token(v) {
                return Err(ModelError::UnknownValue {
                    var: name,
                    value: v.clone(),
                });
            }
            if domain[..i].contains(v) {
                return Err(ModelError::DuplicateValue {
                    var: name,
                    value: v.clone(),
                });
            }
        }
        Ok(Self { name, domain })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> &[String] {
        &self.domain
    }

    pub fn len(&self) -> usize {
        self.domain.len()
    }

    pub fn is_empty(&self) -> bool {
        self.domain.is_empty()
    }

    pub fn value_index(&self, value: &str) -> Option<ValueIdx> {
        self.domain
            .iter()
            .position(|v| v == value)
            .map(|i| i as ValueIdx)
    }

    pub fn value(&self, idx: ValueIdx) -> &str {
        &self.domain[idx as usize]
    }
}

/// Ordered set of variable declarations. The order is the declaration order
/// used for lexicographic comparison of assignments.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Schema {
    vars: Vec<VariableDecl>,
}

impl Schema {
    pub fn new(vars: Vec<VariableDecl>) -> Result<Self, ModelError> {
        for (i, v) in vars.iter().enumerate() {
            if vars[..i].iter().any(|w| w.name == v.name) {
                return Err(ModelError::DuplicateVariable(v.name.clone()));
            }
        }
        Ok(Self { vars })
    }

    pub fn vars(&self) -> &[VariableDecl] {
        &self.vars
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v.name == name)
    }

    pub fn var(&self, name: &str) -> Result<&VariableDecl, ModelError> {
        self.position(name)
            .map(|i| &self.vars[i])
            .ok_or_else(|| ModelError::UnknownVariable(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.vars.iter().map(|v| v.name.as_str())
    }

    /// Cardinality of the full product of the declared domains.
    pub fn input_space_size(&self) -> BigUint {
        self.vars
            .iter()
            .fold(BigUint::from(1u32), |acc, v| acc * BigUint::from(v.len()))
    }

    pub fn is_disjoint(&self, other: &Schema) -> bool {
        self.vars.iter().all(|v| other.position(&v.name).is_none())
    }

    /// Union `self ∪ other`: variables of `self` in order, then the variables
    /// of `other` that `self` lacks. Also returns, for each side, the position
    /// in the union of each of that side's variables.
    pub fn union(&self, other: &Schema) -> Result<(Schema, Vec<usize>, Vec<usize>), ModelError> {
        let mut vars = self.vars.clone();
        let left: Vec<usize> = (0..self.vars.len()).collect();
        let mut right = Vec::with_capacity(other.vars.len());
        for v in &other.vars {
            match self.position(&v.name) {
                Some(i) => {
                    if self.vars[i].domain != v.domain {
                        return Err(ModelError::DomainMismatch {
                            var: v.name.clone(),
                        });
                    }
                    right.push(i);
                }
                None => {
                    right.push(vars.len());
                    vars.push(v.clone());
                }
            }
        }
        Ok((Schema { vars }, left, right))
    }

    /// Concatenation of pairwise-disjoint schemas.
    pub fn concat<'a>(parts: impl IntoIterator<Item = &'a Schema>) -> Result<Schema, ModelError> {
        let mut vars: Vec<VariableDecl> = Vec::new();
        for p in parts {
            for v in &p.vars {
                if vars.iter().any(|w| w.name == v.name) {
                    return Err(ModelError::Overlap(v.name.clone()));
                }
                vars.push(v.clone());
            }
        }
        Ok(Schema { vars })
    }

    /// Restriction of the schema to `names`, keeping schema order.
    pub fn restrict(&self, names: &[&str]) -> Result<(Schema, Vec<usize>), ModelError> {
        for n in names {
            self.var(n)?;
        }
        let positions: Vec<usize> = (0..self.vars.len())
            .filter(|&i| names.contains(&self.vars[i].name.as_str()))
            .collect();
        let vars = positions.iter().map(|&i| self.vars[i].clone()).collect();
        Ok((Schema { vars }, positions))
    }

    /// Every assignment over the schema, in lexicographic order.
    pub fn assignments(&self) -> Assignments<'_> {
        Assignments {
            schema: self,
            next: Some(vec![0; self.vars.len()]),
        }
    }

    pub fn encode(&self, bindings: &[(&str, &str)]) -> Result<Vec<ValueIdx>, ModelError> {
        if bindings.len() != self.vars.len() {
            return Err(ModelError::ArityMismatch {
                expected: self.vars.len(),
                got: bindings.len(),
            });
        }
        let mut values = vec![None; self.vars.len()];
        for (name, value) in bindings {
            let pos = self
                .position(name)
                .ok_or_else(|| ModelError::UnknownVariable(name.to_string()))?;
            let idx = self.vars[pos]
                .value_index(value)
                .ok_or_else(|| ModelError::UnknownValue {
                    var: name.to_string(),
                    value: value.to_string(),
                })?;
            values[pos] = Some(idx);
        }
        values
            .into_iter()
            .enumerate()
            .map(|(i, v)| v.ok_or_else(|| ModelError::UnknownVariable(self.vars[i].name.clone())))
            .collect()
    }

    pub fn check_values(&self, values: &[ValueIdx]) -> Result<(), ModelError> {
        if values.len() != self.vars.len() {
            return Err(ModelError::ArityMismatch {
                expected: self.vars.len(),
                got: values.len(),
            });
        }
        for (v, &x) in self.vars.iter().zip(values) {
            if x as usize >= v.len() {
                return Err(ModelError::ValueOutOfRange {
                    var: v.name.clone(),
                    index: x as usize,
                });
            }
        }
        Ok(())
    }

    pub fn format_values(&self, values: &[ValueIdx]) -> String {
        let body: Vec<String> = self
            .vars
            .iter()
            .zip(values)
            .map(|(v, &x)| format!("{}:{}", v.name, v.value(x)))
            .collect();
        format!("{{{}}}", body.join(", "))
    }
}

/// Odometer over all assignments of a schema.
pub struct Assignments<'a> {
    schema: &'a Schema,
    next: Option<Vec<ValueIdx>>,
}

impl Iterator for Assignments<'_> {
    type Item = Vec<ValueIdx>;

    fn next(&mut self) -> Option<Vec<ValueIdx>> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut i = succ.len();
        loop {
            if i == 0 {
                break;
            }
            i -= 1;
            if (succ[i] as usize) + 1 < self.schema.vars[i].len() {
                succ[i] += 1;
                self.next = Some(succ);
                break;
            }
            succ[i] = 0;
        }
        Some(current)
    }
}

/// A total assignment of domain values to the variables of a schema.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Assignment {
    schema: Arc<Schema>,
    values: Vec<ValueIdx>,
}

impl Assignment {
    pub fn new(schema: Arc<Schema>, values: Vec<ValueIdx>) -> Result<Self, ModelError> {
        schema.check_values(&values)?;
        Ok(Self { schema, values })
    }

    pub(crate) fn new_unchecked(schema: Arc<Schema>, values: Vec<ValueIdx>) -> Self {
        Self { schema, values }
    }

    pub fn from_pairs(schema: Arc<Schema>, bindings: &[(&str, &str)]) -> Result<Self, ModelError> {
        let values = schema.encode(bindings)?;
        Ok(Self { schema, values })
    }

    pub fn schema(&self) -> &Arc<Schema> {
        &self.schema
    }

    pub fn values(&self) -> &[ValueIdx] {
        &self.values
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        let pos = self.schema.position(name)?;
        Some(self.schema.vars[pos].value(self.values[pos]))
    }

    pub fn bindings(&self) -> impl Iterator<Item = (&str, &str)> {
        self.schema
            .vars
            .iter()
            .zip(&self.values)
            .map(|(v, &x)| (v.name.as_str(), v.value(x)))
    }

    /// Projection onto `names`. The result binds exactly those variables,
    /// in this assignment's variable order.
    pub fn project(&self, names: &[&str]) -> Result<Assignment, ModelError> {
        let (schema, positions) = self.schema.restrict(names)?;
        Ok(Assignment {
            schema: Arc::new(schema),
            values: positions.iter().map(|&i| self.values[i]).collect(),
        })
    }
}

impl PartialOrd for Assignment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Lexicographic; only meaningful between assignments over the same schema.
impl Ord for Assignment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.values.cmp(&other.values)
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.schema.format_values(&self.values))
    }
}
