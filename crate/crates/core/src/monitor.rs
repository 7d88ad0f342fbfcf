//! The monitor abstraction: a deterministic, partial transition function over
//! assignments to a set of input variables, with canonical byte-string state
//! keys.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use crate::error::ModelError;
use crate::schema::{Assignment, Schema, ValueIdx};

/// Canonical encoding of a monitor state. Equal states must have equal keys.
pub type StateKey = Vec<u8>;

pub type MonitorRef = Arc<dyn Monitor>;

/// A finite-memory monitor treated as a black box.
///
/// Implementations must be pure: `step` and `transitions` depend only on
/// their arguments, so a monitor can be shared freely between threads.
pub trait Monitor: Send + Sync + fmt::Debug {
    fn schema(&self) -> &Arc<Schema>;

    fn initial_state(&self) -> StateKey;

    /// Successor of `state` under `input`, or `None` when the transition is
    /// undefined. `input` holds one value index per schema variable.
    fn step(&self, state: &[u8], input: &[ValueIdx]) -> Option<StateKey>;

    /// All defined transitions out of `state`, sorted by input in
    /// lexicographic order.
    fn transitions(&self, state: &[u8]) -> Vec<(Vec<ValueIdx>, StateKey)> {
        self.schema()
            .assignments()
            .filter_map(|u| self.step(state, &u).map(|next| (u, next)))
            .collect()
    }

    /// Short human-readable description, used for provenance records.
    fn describe(&self) -> String {
        "monitor".to_string()
    }

    /// Structural fingerprint independent of variable and value names. Two
    /// monitors with equal keys have isomorphic behaviour up to renaming, so
    /// a synthesized generator can be reused between them.
    fn shape_key(&self) -> Option<String> {
        None
    }
}

impl dyn Monitor {
    /// Admissible inputs at `state`, in lexicographic order.
    pub fn admissible(&self, state: &[u8]) -> Vec<Assignment> {
        let schema = self.schema().clone();
        self.transitions(state)
            .into_iter()
            .map(|(u, _)| Assignment::new_unchecked(schema.clone(), u))
            .collect()
    }

    pub fn step_assignment(&self, state: &[u8], input: &Assignment) -> Option<StateKey> {
        if input.schema() != self.schema() {
            return None;
        }
        self.step(state, input.values())
    }
}

pub(crate) fn index_key(i: u32) -> StateKey {
    i.to_le_bytes().to_vec()
}

pub(crate) fn read_index_key(key: &[u8]) -> Option<u32> {
    Some(u32::from_le_bytes(key.try_into().ok()?))
}

/// A transition of an explicit table: `(from, full input assignment, to)`.
pub type TableEntry<'a> = (&'a str, &'a [(&'a str, &'a str)], &'a str);

/// A monitor given by an explicit transition table.
#[derive(Clone, Debug)]
pub struct ExplicitFsm {
    name: String,
    schema: Arc<Schema>,
    states: Vec<String>,
    initial: u32,
    table: Vec<BTreeMap<Vec<ValueIdx>, u32>>,
}

impl ExplicitFsm {
    /// Builds a monitor whose `step` follows `transitions` exactly.
    pub fn new(
        name: impl Into<String>,
        schema: Arc<Schema>,
        states: &[&str],
        initial: &str,
        transitions: &[TableEntry<'_>],
    ) -> Result<Self, ModelError> {
        let mut entries = Vec::with_capacity(transitions.len());
        for (from, bindings, to) in transitions {
            let input = schema.encode(bindings)?;
            entries.push((from.to_string(), input, to.to_string()));
        }
        let states: Vec<String> = states.iter().map(|s| s.to_string()).collect();
        Self::from_entries(name, schema, states, initial, entries)
    }

    /// Like [`ExplicitFsm::new`] with inputs already encoded as value indices.
    pub fn from_entries(
        name: impl Into<String>,
        schema: Arc<Schema>,
        states: Vec<String>,
        initial: &str,
        entries: Vec<(String, Vec<ValueIdx>, String)>,
    ) -> Result<Self, ModelError> {
        let mut index = HashMap::new();
        for (i, s) in states.iter().enumerate() {
            if index.insert(s.clone(), i as u32).is_some() {
                return Err(ModelError::DuplicateState(s.clone()));
            }
        }
        let lookup = |s: &str| {
            index
                .get(s)
                .copied()
                .ok_or_else(|| ModelError::UnknownState(s.to_string()))
        };
        let initial = lookup(initial)?;
        let mut table = vec![BTreeMap::new(); states.len()];
        for (from, input, to) in entries {
            schema.check_values(&input)?;
            let f = lookup(&from)?;
            let t = lookup(&to)?;
            if let Some(prev) = table[f as usize].insert(input.clone(), t) {
                if prev != t {
                    return Err(ModelError::Nondeterministic {
                        state: from,
                        input: schema.format_values(&input),
                    });
                }
            }
        }
        Ok(Self {
            name: name.into(),
            schema,
            states,
            initial,
            table,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn state_names(&self) -> &[String] {
        &self.states
    }

    pub fn state_key(&self, name: &str) -> Option<StateKey> {
        self.states
            .iter()
            .position(|s| s == name)
            .map(|i| index_key(i as u32))
    }

    pub fn transition_count(&self) -> usize {
        self.table.iter().map(BTreeMap::len).sum()
    }
}

impl Monitor for ExplicitFsm {
    fn schema(&self) -> &Arc<Schema> {
        &self.schema
    }

    fn initial_state(&self) -> StateKey {
        index_key(self.initial)
    }

    fn step(&self, state: &[u8], input: &[ValueIdx]) -> Option<StateKey> {
        let s = read_index_key(state)?;
        self.table
            .get(s as usize)?
            .get(input)
            .map(|&t| index_key(t))
    }

    fn transitions(&self, state: &[u8]) -> Vec<(Vec<ValueIdx>, StateKey)> {
        let Some(row) = read_index_key(state).and_then(|s| self.table.get(s as usize)) else {
            return Vec::new();
        };
        row.iter().map(|(u, &t)| (u.clone(), index_key(t))).collect()
    }

    fn describe(&self) -> String {
        format!("fsm {}", self.name)
    }
}

/// Product monitor `a ⋈ b`: both components must accept the projection of
/// each input onto their own variables.
#[derive(Debug, Clone)]
pub struct Conjoint {
    schema: Arc<Schema>,
    a: MonitorRef,
    b: MonitorRef,
    proj_a: Vec<usize>,
    proj_b: Vec<usize>,
    /// Positions (in `b`'s schema) of variables shared with `a`, paired with
    /// their position in `a`'s schema.
    shared: Vec<(usize, usize)>,
}

/// Conjoins two monitors. Shared variables must have identical domains.
pub fn conjoin(a: MonitorRef, b: MonitorRef) -> Result<Conjoint, ModelError> {
    let (schema, proj_a, proj_b) = a.schema().union(b.schema())?;
    let shared = proj_b
        .iter()
        .enumerate()
        .filter(|(_, &u)| u < proj_a.len())
        .map(|(ib, &u)| (ib, u))
        .collect();
    Ok(Conjoint {
        schema: Arc::new(schema),
        a,
        b,
        proj_a,
        proj_b,
        shared,
    })
}

/// Left fold of [`conjoin`] over `parts`.
pub fn conjoin_all(parts: &[MonitorRef]) -> Result<MonitorRef, ModelError> {
    let mut iter = parts.iter().cloned();
    let Some(mut acc) = iter.next() else {
        return Err(ModelError::Template {
            template: "conjoin".into(),
            reason: "nothing to conjoin".into(),
        });
    };
    for m in iter {
        acc = Arc::new(conjoin(acc, m)?);
    }
    Ok(acc)
}

fn pair_key(a: &[u8], b: &[u8]) -> StateKey {
    let mut key = Vec::with_capacity(4 + a.len() + b.len());
    key.extend_from_slice(&(a.len() as u32).to_le_bytes());
    key.extend_from_slice(a);
    key.extend_from_slice(b);
    key
}

fn split_key(key: &[u8]) -> Option<(&[u8], &[u8])> {
    let (len, rest) = key.split_first_chunk::<4>()?;
    let len = u32::from_le_bytes(*len) as usize;
    (rest.len() >= len).then(|| rest.split_at(len))
}

impl Conjoint {
    pub fn components(&self) -> (&MonitorRef, &MonitorRef) {
        (&self.a, &self.b)
    }

    /// Splits a conjoint state key into the component keys.
    pub fn split_state(key: &[u8]) -> Option<(&[u8], &[u8])> {
        split_key(key)
    }

    fn project(input: &[ValueIdx], positions: &[usize]) -> Vec<ValueIdx> {
        positions.iter().map(|&p| input[p]).collect()
    }
}

impl Monitor for Conjoint {
    fn schema(&self) -> &Arc<Schema> {
        &self.schema
    }

    fn initial_state(&self) -> StateKey {
        pair_key(&self.a.initial_state(), &self.b.initial_state())
    }

    fn step(&self, state: &[u8], input: &[ValueIdx]) -> Option<StateKey> {
        let (xa, xb) = split_key(state)?;
        if input.len() != self.schema.len() {
            return None;
        }
        let na = self.a.step(xa, &Self::project(input, &self.proj_a))?;
        let nb = self.b.step(xb, &Self::project(input, &self.proj_b))?;
        Some(pair_key(&na, &nb))
    }

    fn transitions(&self, state: &[u8]) -> Vec<(Vec<ValueIdx>, StateKey)> {
        let Some((xa, xb)) = split_key(state) else {
            return Vec::new();
        };
        let ta = self.a.transitions(xa);
        if ta.is_empty() {
            return Vec::new();
        }
        let tb = self.b.transitions(xb);
        let mut by_shared: HashMap<Vec<ValueIdx>, Vec<usize>> = HashMap::new();
        for (j, (ub, _)) in tb.iter().enumerate() {
            let k = self.shared.iter().map(|&(ib, _)| ub[ib]).collect();
            by_shared.entry(k).or_default().push(j);
        }
        let mut out = Vec::new();
        for (ua, na) in &ta {
            let k: Vec<ValueIdx> = self.shared.iter().map(|&(_, ia)| ua[ia]).collect();
            let Some(matches) = by_shared.get(&k) else {
                continue;
            };
            for &j in matches {
                let (ub, nb) = &tb[j];
                let mut u = vec![0; self.schema.len()];
                for (i, &p) in self.proj_a.iter().enumerate() {
                    u[p] = ua[i];
                }
                for (i, &p) in self.proj_b.iter().enumerate() {
                    u[p] = ub[i];
                }
                out.push((u, pair_key(na, nb)));
            }
        }
        out.sort_unstable_by(|x, y| x.0.cmp(&y.0));
        out
    }

    fn describe(&self) -> String {
        format!("({} & {})", self.a.describe(), self.b.describe())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::VariableDecl;

    fn var(name: &str, dom: &[&str]) -> Arc<Schema> {
        Arc::new(Schema::new(vec![VariableDecl::new(name, dom.iter().copied()).unwrap()]).unwrap())
    }

    fn self_loop(name: &str) -> ExplicitFsm {
        let s = var(name, &["0", "1"]);
        ExplicitFsm::new(
            "loop",
            s,
            &["s"],
            "s",
            &[("s", &[(name, "0")], "s"), ("s", &[(name, "1")], "s")],
        )
        .unwrap()
    }

    #[test]
    fn conjoin_of_two_free_loops_has_four_inputs() {
        let c = conjoin(Arc::new(self_loop("a")), Arc::new(self_loop("b"))).unwrap();
        let m: &dyn Monitor = &c;
        let x0 = m.initial_state();
        let t = m.transitions(&x0);
        assert_eq!(t.len(), 4);
        assert!(t.iter().all(|(_, n)| *n == x0));
    }

    #[test]
    fn conjoin_intersects_on_shared_variable() {
        let s = var("v", &["n", "f"]);
        let forbid_f = ExplicitFsm::new(
            "a",
            s.clone(),
            &["x0", "x1"],
            "x0",
            &[
                ("x0", &[("v", "n")], "x1"),
                ("x1", &[("v", "n")], "x1"),
                ("x1", &[("v", "f")], "x1"),
            ],
        )
        .unwrap();
        let free = ExplicitFsm::new(
            "b",
            s,
            &["y"],
            "y",
            &[("y", &[("v", "n")], "y"), ("y", &[("v", "f")], "y")],
        )
        .unwrap();
        let c: MonitorRef = Arc::new(conjoin(Arc::new(forbid_f), Arc::new(free)).unwrap());
        let adm = c.admissible(&c.initial_state());
        assert_eq!(adm.len(), 1);
        assert_eq!(adm[0].get("v"), Some("n"));
    }

    #[test]
    fn explicit_fsm_rejects_bad_tables() {
        let s = var("v", &["a", "b"]);
        let nondet = ExplicitFsm::new(
            "m",
            s.clone(),
            &["p", "q"],
            "p",
            &[("p", &[("v", "a")], "p"), ("p", &[("v", "a")], "q")],
        );
        assert!(matches!(nondet, Err(ModelError::Nondeterministic { .. })));
        let dangling = ExplicitFsm::new("m", s.clone(), &["p"], "p", &[("p", &[("v", "a")], "r")]);
        assert_eq!(dangling.unwrap_err(), ModelError::UnknownState("r".into()));
        let bad_value = ExplicitFsm::new("m", s, &["p"], "p", &[("p", &[("v", "z")], "p")]);
        assert!(matches!(bad_value, Err(ModelError::UnknownValue { .. })));
    }

    #[test]
    fn domain_mismatch_is_rejected() {
        let a = ExplicitFsm::new("a", var("v", &["0", "1"]), &["s"], "s", &[]).unwrap();
        let b = ExplicitFsm::new("b", var("v", &["0", "2"]), &["s"], "s", &[]).unwrap();
        assert!(matches!(
            conjoin(Arc::new(a), Arc::new(b)),
            Err(ModelError::DomainMismatch { .. })
        ));
    }
}
