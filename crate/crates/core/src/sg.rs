//! Exploration of black-box monitors, safe states and scenario generators.

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::SynthError;
use crate::monitor::{conjoin, index_key, read_index_key, Monitor, MonitorRef, StateKey};
use crate::schema::{Schema, ValueIdx};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExploreLimits {
    pub max_states: usize,
    pub max_edges: usize,
    /// Recompute the transitions of each state the first time it is reached
    /// again and compare them with the recorded ones.
    pub check_revisits: bool,
}

impl Default for ExploreLimits {
    fn default() -> Self {
        Self {
            max_states: 5_000_000,
            max_edges: 50_000_000,
            check_revisits: true,
        }
    }
}

/// Reachable state graph in compressed-row form.
///
/// State 0 is the initial state. The edges of state `x` occupy
/// `offsets[x]..offsets[x + 1]` and are sorted by input index; input indices
/// point into `alphabet`, which is sorted lexicographically.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExploredGraph {
    schema: Arc<Schema>,
    alphabet: Vec<Vec<ValueIdx>>,
    keys: Vec<StateKey>,
    offsets: Vec<u32>,
    inputs: Vec<u32>,
    targets: Vec<u32>,
}

impl ExploredGraph {
    /// Builds a graph from raw arrays, checking well-formedness.
    pub fn from_parts(
        schema: Arc<Schema>,
        alphabet: Vec<Vec<ValueIdx>>,
        keys: Vec<StateKey>,
        offsets: Vec<u32>,
        inputs: Vec<u32>,
        targets: Vec<u32>,
    ) -> Result<Self, String> {
        let n = keys.len();
        if n == 0 || offsets.len() != n + 1 || offsets[0] != 0 {
            return Err("bad state table".into());
        }
        if offsets.windows(2).any(|w| w[0] > w[1]) || offsets[n] as usize != inputs.len() {
            return Err("bad edge offsets".into());
        }
        if inputs.len() != targets.len() {
            return Err("edge arrays differ in length".into());
        }
        if targets.iter().any(|&t| t as usize >= n) {
            return Err("edge target out of range".into());
        }
        if inputs.iter().any(|&u| u as usize >= alphabet.len()) {
            return Err("edge input out of range".into());
        }
        for a in &alphabet {
            schema.check_values(a).map_err(|e| e.to_string())?;
        }
        if alphabet.windows(2).any(|w| w[0] >= w[1]) {
            return Err("alphabet not strictly sorted".into());
        }
        for x in 0..n {
            let row = &inputs[offsets[x] as usize..offsets[x + 1] as usize];
            if row.windows(2).any(|w| w[0] >= w[1]) {
                return Err(format!("edges of state {x} not strictly sorted"));
            }
        }
        Ok(Self {
            schema,
            alphabet,
            keys,
            offsets,
            inputs,
            targets,
        })
    }

    pub fn schema(&self) -> &Arc<Schema> {
        &self.schema
    }

    pub fn num_states(&self) -> usize {
        self.keys.len()
    }

    pub fn num_edges(&self) -> usize {
        self.targets.len()
    }

    /// Every input that labels at least one edge, sorted.
    pub fn alphabet(&self) -> &[Vec<ValueIdx>] {
        &self.alphabet
    }

    pub fn input(&self, idx: u32) -> &[ValueIdx] {
        &self.alphabet[idx as usize]
    }

    pub fn input_index(&self, values: &[ValueIdx]) -> Option<u32> {
        self.alphabet
            .binary_search_by(|a| a.as_slice().cmp(values))
            .ok()
            .map(|i| i as u32)
    }

    /// Key of state `x` in the explored monitor.
    pub fn key(&self, x: u32) -> &[u8] {
        &self.keys[x as usize]
    }

    pub fn keys(&self) -> &[StateKey] {
        &self.keys
    }

    pub fn out_degree(&self, x: u32) -> usize {
        (self.offsets[x as usize + 1] - self.offsets[x as usize]) as usize
    }

    pub fn edge_range(&self, x: u32) -> std::ops::Range<usize> {
        self.offsets[x as usize] as usize..self.offsets[x as usize + 1] as usize
    }

    pub fn edge_inputs(&self, x: u32) -> &[u32] {
        &self.inputs[self.edge_range(x)]
    }

    pub fn edge_targets(&self, x: u32) -> &[u32] {
        &self.targets[self.edge_range(x)]
    }

    pub fn offsets(&self) -> &[u32] {
        &self.offsets
    }

    pub fn inputs(&self) -> &[u32] {
        &self.inputs
    }

    pub fn targets(&self) -> &[u32] {
        &self.targets
    }

    /// Successor of `x` under alphabet entry `input`.
    pub fn successor(&self, x: u32, input: u32) -> Option<u32> {
        let r = self.edge_range(x);
        let j = self.inputs[r.clone()].binary_search(&input).ok()?;
        Some(self.targets[r.start + j])
    }
}

/// Explores every state reachable from the initial state of `m`, depth first.
pub fn explore(m: &dyn Monitor, limits: ExploreLimits) -> Result<ExploredGraph, SynthError> {
    let schema = m.schema().clone();
    let mut index: HashMap<StateKey, u32> = HashMap::new();
    let mut keys: Vec<StateKey> = Vec::new();
    let mut rows: Vec<Vec<(u32, u32)>> = Vec::new();
    let mut alphabet: HashMap<Vec<ValueIdx>, u32> = HashMap::new();
    let mut letters: Vec<Vec<ValueIdx>> = Vec::new();
    // 0 = not expanded, 1 = expanded, 2 = expanded and re-checked
    let mut status: Vec<u8> = Vec::new();
    let mut edges = 0usize;

    let x0 = m.initial_state();
    index.insert(x0.clone(), 0);
    keys.push(x0);
    rows.push(Vec::new());
    status.push(0);
    let mut stack = vec![0u32];

    while let Some(x) = stack.pop() {
        let trans = m.transitions(&keys[x as usize]);
        check_sorted(&schema, &keys[x as usize], &trans)?;
        edges += trans.len();
        if edges > limits.max_edges {
            return Err(SynthError::LimitExceeded {
                what: "edges",
                limit: limits.max_edges,
            });
        }
        let mut row = Vec::with_capacity(trans.len());
        let mut fresh = Vec::new();
        for (u, next) in trans {
            let letter = match alphabet.get(&u) {
                Some(&l) => l,
                None => {
                    let l = letters.len() as u32;
                    alphabet.insert(u.clone(), l);
                    letters.push(u);
                    l
                }
            };
            let target = match index.get(&next) {
                Some(&t) => {
                    if limits.check_revisits && status[t as usize] == 1 {
                        status[t as usize] = 2;
                        verify_revisit(m, &keys[t as usize], &rows[t as usize], &letters, &index)?;
                    }
                    t
                }
                None => {
                    let t = keys.len() as u32;
                    if keys.len() >= limits.max_states {
                        return Err(SynthError::LimitExceeded {
                            what: "states",
                            limit: limits.max_states,
                        });
                    }
                    index.insert(next.clone(), t);
                    keys.push(next);
                    rows.push(Vec::new());
                    status.push(0);
                    fresh.push(t);
                    t
                }
            };
            row.push((letter, target));
        }
        rows[x as usize] = row;
        status[x as usize] = 1;
        stack.extend(fresh.into_iter().rev());
    }

    // Relabel the alphabet in lexicographic order; edge order is preserved
    // because each row was produced in input order.
    let mut order: Vec<u32> = (0..letters.len() as u32).collect();
    order.sort_unstable_by(|&a, &b| letters[a as usize].cmp(&letters[b as usize]));
    let mut relabel = vec![0u32; letters.len()];
    for (new, &old) in order.iter().enumerate() {
        relabel[old as usize] = new as u32;
    }
    let mut sorted_letters = vec![Vec::new(); letters.len()];
    for (old, l) in letters.into_iter().enumerate() {
        sorted_letters[relabel[old] as usize] = l;
    }

    let mut offsets = Vec::with_capacity(keys.len() + 1);
    let mut inputs = Vec::with_capacity(edges);
    let mut targets = Vec::with_capacity(edges);
    offsets.push(0u32);
    for row in &rows {
        for &(l, t) in row {
            inputs.push(relabel[l as usize]);
            targets.push(t);
        }
        offsets.push(inputs.len() as u32);
    }
    Ok(ExploredGraph {
        schema,
        alphabet: sorted_letters,
        keys,
        offsets,
        inputs,
        targets,
    })
}

fn check_sorted(
    schema: &Schema,
    key: &[u8],
    trans: &[(Vec<ValueIdx>, StateKey)],
) -> Result<(), SynthError> {
    for (u, _) in trans {
        if schema.check_values(u).is_err() {
            return Err(SynthError::ContractViolation {
                state: hex(key),
                detail: format!("transition input {u:?} is not an assignment of the schema"),
            });
        }
    }
    if trans.windows(2).any(|w| w[0].0 >= w[1].0) {
        return Err(SynthError::ContractViolation {
            state: hex(key),
            detail: "transitions are not strictly sorted by input".into(),
        });
    }
    Ok(())
}

/// Compares a fresh `transitions` call against the row recorded for an
/// already expanded state.
fn verify_revisit(
    m: &dyn Monitor,
    key: &[u8],
    recorded: &[(u32, u32)],
    letters: &[Vec<ValueIdx>],
    index: &HashMap<StateKey, u32>,
) -> Result<(), SynthError> {
    let again = m.transitions(key);
    let same = recorded.len() == again.len()
        && recorded.iter().zip(&again).all(|(&(l, tgt), (u, next))| {
            letters[l as usize] == *u && index.get(next) == Some(&tgt)
        });
    if same {
        Ok(())
    } else {
        Err(SynthError::ContractViolation {
            state: hex(key),
            detail: "equal state keys produced different transitions".into(),
        })
    }
}

fn hex(key: &[u8]) -> String {
    key.iter().map(|b| format!("{b:02x}")).collect()
}

/// One flag per state of a graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SafeSet {
    flags: Vec<bool>,
}

impl SafeSet {
    pub fn flags(&self) -> &[bool] {
        &self.flags
    }

    pub fn is_safe(&self, x: u32) -> bool {
        self.flags[x as usize]
    }

    pub fn count(&self) -> usize {
        self.flags.iter().filter(|&&b| b).count()
    }
}

/// Greatest set of states each having a transition into the set: states
/// from which some infinite path starts.
///
/// Worklist deletion: a state is removed once all of its successors are
/// removed. Each edge is visited a constant number of times.
pub fn compute_safe_set(g: &ExploredGraph) -> SafeSet {
    let n = g.num_states();
    let mut pred_offsets = vec![0u32; n + 1];
    for &t in &g.targets {
        pred_offsets[t as usize + 1] += 1;
    }
    for i in 0..n {
        pred_offsets[i + 1] += pred_offsets[i];
    }
    let mut fill = pred_offsets.clone();
    let mut preds = vec![0u32; g.targets.len()];
    for x in 0..n as u32 {
        for &t in g.edge_targets(x) {
            preds[fill[t as usize] as usize] = x;
            fill[t as usize] += 1;
        }
    }

    let mut live: Vec<u32> = (0..n as u32).map(|x| g.out_degree(x) as u32).collect();
    let mut flags = vec![true; n];
    let mut work: Vec<u32> = (0..n as u32).filter(|&x| live[x as usize] == 0).collect();
    for &x in &work {
        flags[x as usize] = false;
    }
    while let Some(x) = work.pop() {
        let r = pred_offsets[x as usize] as usize..pred_offsets[x as usize + 1] as usize;
        for &p in &preds[r] {
            let c = &mut live[p as usize];
            *c -= 1;
            if *c == 0 && flags[p as usize] {
                flags[p as usize] = false;
                work.push(p);
            }
        }
    }
    SafeSet { flags }
}

/// Where a generator came from.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    /// Descriptions of the conjoined monitors.
    pub monitors: Vec<String>,
    pub explored_states: usize,
    pub explored_edges: usize,
}

/// A monitor restricted to its safe states: non-blocking, with the same
/// traces as the monitor it was built from.
#[derive(Clone, Debug)]
pub struct ScenarioGenerator {
    graph: ExploredGraph,
    origin: Provenance,
}

impl ScenarioGenerator {
    /// Wraps a graph that must already be non-blocking.
    pub fn from_graph(graph: ExploredGraph, origin: Provenance) -> Result<Self, String> {
        if let Some(x) = (0..graph.num_states() as u32).find(|&x| graph.out_degree(x) == 0) {
            return Err(format!("state {x} has no outgoing edge"));
        }
        Ok(Self { graph, origin })
    }

    pub fn graph(&self) -> &ExploredGraph {
        &self.graph
    }

    /// The same generator over `schema`, which must have the same number of
    /// variables with the same domain sizes.
    pub fn renamed(
        &self,
        schema: Arc<Schema>,
        description: String,
    ) -> Result<Self, crate::error::ModelError> {
        let old = &self.graph.schema;
        if old.len() != schema.len() {
            return Err(crate::error::ModelError::ArityMismatch {
                expected: old.len(),
                got: schema.len(),
            });
        }
        for (a, b) in old.vars().iter().zip(schema.vars()) {
            if a.len() != b.len() {
                return Err(crate::error::ModelError::DomainMismatch {
                    var: b.name().to_string(),
                });
            }
        }
        let mut out = self.clone();
        out.graph.schema = schema;
        out.origin.monitors = vec![description];
        Ok(out)
    }

    pub fn origin(&self) -> &Provenance {
        &self.origin
    }

    pub fn num_states(&self) -> usize {
        self.graph.num_states()
    }

    pub fn num_edges(&self) -> usize {
        self.graph.num_edges()
    }

    /// Number of distinct inputs used by the explored monitor.
    pub fn alphabet_size(&self) -> usize {
        self.graph.alphabet.len()
    }

    pub fn pruned_states(&self) -> usize {
        self.origin.explored_states - self.num_states()
    }

    pub fn pruned_edges(&self) -> usize {
        self.origin.explored_edges - self.num_edges()
    }
}

/// Keeps safe states and the edges between them, compacting indices in
/// original order.
pub fn prune(g: &ExploredGraph, safe: &SafeSet) -> Result<ExploredGraph, SynthError> {
    if !safe.is_safe(0) {
        return Err(SynthError::NoTraces);
    }
    let mut remap = vec![u32::MAX; g.num_states()];
    let mut keys = Vec::new();
    for (x, r) in remap.iter_mut().enumerate() {
        if safe.flags[x] {
            *r = keys.len() as u32;
            keys.push(g.keys[x].clone());
        }
    }
    let mut offsets = vec![0u32];
    let mut inputs = Vec::new();
    let mut targets = Vec::new();
    for x in 0..g.num_states() as u32 {
        if !safe.is_safe(x) {
            continue;
        }
        for (&u, &t) in g.edge_inputs(x).iter().zip(g.edge_targets(x)) {
            if safe.is_safe(t) {
                inputs.push(u);
                targets.push(remap[t as usize]);
            }
        }
        offsets.push(inputs.len() as u32);
    }
    Ok(ExploredGraph {
        schema: g.schema.clone(),
        alphabet: g.alphabet.clone(),
        keys,
        offsets,
        inputs,
        targets,
    })
}

pub fn synthesize_sg(m: &dyn Monitor) -> Result<ScenarioGenerator, SynthError> {
    synthesize_sg_with(m, ExploreLimits::default())
}

pub fn synthesize_sg_with(
    m: &dyn Monitor,
    limits: ExploreLimits,
) -> Result<ScenarioGenerator, SynthError> {
    let g = explore(m, limits)?;
    let safe = compute_safe_set(&g);
    let pruned = prune(&g, &safe)?;
    Ok(ScenarioGenerator {
        origin: Provenance {
            monitors: vec![m.describe()],
            explored_states: g.num_states(),
            explored_edges: g.num_edges(),
        },
        graph: pruned,
    })
}

/// Synthesizes the generator of `sg`'s monitor conjoined with `extra`,
/// exploring the product of the already-pruned generator with `extra`.
pub fn incremental_regen(
    sg: &Arc<ScenarioGenerator>,
    extra: MonitorRef,
) -> Result<ScenarioGenerator, SynthError> {
    let product = conjoin(sg.clone() as MonitorRef, extra.clone()).map_err(SynthError::from)?;
    let mut out = synthesize_sg(&product)?;
    let mut monitors = sg.origin.monitors.clone();
    monitors.push(extra.describe());
    out.origin.monitors = monitors;
    Ok(out)
}

impl Monitor for ScenarioGenerator {
    fn schema(&self) -> &Arc<Schema> {
        &self.graph.schema
    }

    fn initial_state(&self) -> StateKey {
        index_key(0)
    }

    fn step(&self, state: &[u8], input: &[ValueIdx]) -> Option<StateKey> {
        let x = read_index_key(state)?;
        if x as usize >= self.num_states() {
            return None;
        }
        let u = self.graph.input_index(input)?;
        self.graph.successor(x, u).map(index_key)
    }

    fn transitions(&self, state: &[u8]) -> Vec<(Vec<ValueIdx>, StateKey)> {
        let Some(x) = read_index_key(state).filter(|&x| (x as usize) < self.num_states()) else {
            return Vec::new();
        };
        self.graph
            .edge_inputs(x)
            .iter()
            .zip(self.graph.edge_targets(x))
            .map(|(&u, &t)| (self.graph.input(u).to_vec(), index_key(t)))
            .collect()
    }

    fn describe(&self) -> String {
        format!("gen[{}]", self.origin.monitors.join(" & "))
    }
}
