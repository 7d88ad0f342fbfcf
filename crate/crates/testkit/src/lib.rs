//! Random monitors and brute-force oracles.
//!
//! The oracles use nothing but [`Monitor::step`] over the full input space,
//! so they share no code with exploration, pruning or counting.

use std::collections::{HashMap, VecDeque};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use scengen::{ExplicitFsm, Monitor, Schema, StateKey, ValueIdx, VariableDecl};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, Copy, Debug)]
pub struct FsmParams {
    pub max_states: usize,
    /// Upper bound on the number of distinct inputs.
    pub max_inputs: usize,
    /// Range of the per-(state, input) probability of a transition.
    pub density: (f64, f64),
}

impl Default for FsmParams {
    fn default() -> Self {
        Self {
            max_states: 50,
            max_inputs: 6,
            density: (0.1, 0.5),
        }
    }
}

/// Domain sizes for one or two variables with a product of at most `max`.
fn random_domains<R: Rng>(rng: &mut R, max: usize) -> Vec<usize> {
    let max = max.max(2);
    if max >= 4 && rng.gen_bool(0.4) {
        let a = rng.gen_range(2..=max / 2);
        let b = rng.gen_range(2..=(max / a).max(2));
        vec![a, b]
    } else {
        vec![rng.gen_range(2..=max)]
    }
}

/// Schema with variables `<prefix>0`, `<prefix>1`, ... and values `v0`, `v1`, ...
pub fn schema_with(prefix: &str, sizes: &[usize]) -> Arc<Schema> {
    let vars = sizes
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            VariableDecl::new(format!("{prefix}{i}"), (0..n).map(|k| format!("v{k}"))).unwrap()
        })
        .collect();
    Arc::new(Schema::new(vars).unwrap())
}

pub fn random_schema<R: Rng>(rng: &mut R, prefix: &str, max_inputs: usize) -> Arc<Schema> {
    schema_with(prefix, &random_domains(rng, max_inputs))
}

/// A deterministic FSM over `schema` with a random partial transition table.
pub fn random_fsm_over<R: Rng>(rng: &mut R, schema: Arc<Schema>, p: &FsmParams) -> ExplicitFsm {
    let n = rng.gen_range(1..=p.max_states.max(1));
    let density = rng.gen_range(p.density.0..=p.density.1);
    let states: Vec<String> = (0..n).map(|i| format!("q{i}")).collect();
    let mut entries = Vec::new();
    for s in &states {
        for u in schema.assignments() {
            if rng.gen_bool(density) {
                let t = states.choose(rng).unwrap().clone();
                entries.push((s.clone(), u, t));
            }
        }
    }
    ExplicitFsm::from_entries("random", schema, states, "q0", entries).unwrap()
}

pub fn random_fsm<R: Rng>(rng: &mut R, p: &FsmParams) -> ExplicitFsm {
    let schema = random_schema(rng, "x", p.max_inputs);
    random_fsm_over(rng, schema, p)
}

/// Two monitors over disjoint variables.
pub fn random_independent_pair<R: Rng>(rng: &mut R, p: &FsmParams) -> (ExplicitFsm, ExplicitFsm) {
    let sa = random_schema(rng, "a", p.max_inputs);
    let a = random_fsm_over(rng, sa, p);
    let sb = random_schema(rng, "b", p.max_inputs);
    let b = random_fsm_over(rng, sb, p);
    (a, b)
}

/// Two monitors over the same variables.
pub fn random_shared_pair<R: Rng>(rng: &mut R, p: &FsmParams) -> (ExplicitFsm, ExplicitFsm) {
    let s = random_schema(rng, "x", p.max_inputs);
    (
        random_fsm_over(rng, s.clone(), p),
        random_fsm_over(rng, s, p),
    )
}

/// Reachable part of a monitor, built from `step` alone.
#[derive(Clone, Debug)]
pub struct Reachable {
    pub keys: Vec<StateKey>,
    /// `(input, target)` per state, in input order.
    pub edges: Vec<Vec<(Vec<ValueIdx>, usize)>>,
}

pub fn reachable(m: &dyn Monitor) -> Reachable {
    let inputs: Vec<Vec<ValueIdx>> = m.schema().assignments().collect();
    let mut index: HashMap<StateKey, usize> = HashMap::new();
    let mut keys = vec![m.initial_state()];
    index.insert(keys[0].clone(), 0);
    let mut edges: Vec<Vec<(Vec<ValueIdx>, usize)>> = vec![Vec::new()];
    let mut queue = VecDeque::from([0usize]);
    while let Some(x) = queue.pop_front() {
        for u in &inputs {
            if let Some(next) = m.step(&keys[x], u) {
                let t = *index.entry(next.clone()).or_insert_with(|| {
                    keys.push(next);
                    edges.push(Vec::new());
                    queue.push_back(keys.len() - 1);
                    keys.len() - 1
                });
                edges[x].push((u.clone(), t));
            }
        }
    }
    Reachable { keys, edges }
}

/// Strongly connected component id per state (Tarjan, iterative).
fn scc(edges: &[Vec<(Vec<ValueIdx>, usize)>]) -> Vec<usize> {
    let n = edges.len();
    const NONE: usize = usize::MAX;
    let (mut idx, mut low, mut comp) = (vec![NONE; n], vec![0; n], vec![NONE; n]);
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let (mut counter, mut ncomp) = (0, 0);
    for root in 0..n {
        if idx[root] != NONE {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        idx[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut i)) = call.last_mut() {
            if *i < edges[v].len() {
                let w = edges[v][*i].1;
                *i += 1;
                if idx[w] == NONE {
                    idx[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(idx[w]);
                }
            } else {
                call.pop();
                if let Some(&(u, _)) = call.last() {
                    low[u] = low[u].min(low[v]);
                }
                if low[v] == idx[v] {
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack[w] = false;
                        comp[w] = ncomp;
                        if w == v {
                            break;
                        }
                    }
                    ncomp += 1;
                }
            }
        }
    }
    comp
}

/// States from which some cycle is reachable.
pub fn oracle_safe(r: &Reachable) -> Vec<bool> {
    let comp = scc(&r.edges);
    let n = r.keys.len();
    let mut size = HashMap::new();
    for &c in &comp {
        *size.entry(c).or_insert(0usize) += 1;
    }
    let mut safe: Vec<bool> = (0..n)
        .map(|x| size[&comp[x]] > 1 || r.edges[x].iter().any(|&(_, t)| t == x))
        .collect();
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (x, es) in r.edges.iter().enumerate() {
        for &(_, t) in es {
            preds[t].push(x);
        }
    }
    let mut queue: VecDeque<usize> = (0..n).filter(|&x| safe[x]).collect();
    while let Some(t) = queue.pop_front() {
        for &p in &preds[t] {
            if !safe[p] {
                safe[p] = true;
                queue.push_back(p);
            }
        }
    }
    safe
}

/// Every length-`h` computation path from the initial state, as input
/// sequences, with its final state.
pub fn oracle_paths(r: &Reachable, h: usize) -> Vec<(Vec<Vec<ValueIdx>>, usize)> {
    let mut out = Vec::new();
    let mut prefix = Vec::with_capacity(h);
    fn go(
        r: &Reachable,
        x: usize,
        left: usize,
        prefix: &mut Vec<Vec<ValueIdx>>,
        out: &mut Vec<(Vec<Vec<ValueIdx>>, usize)>,
    ) {
        if left == 0 {
            out.push((prefix.clone(), x));
            return;
        }
        for (u, t) in &r.edges[x] {
            prefix.push(u.clone());
            go(r, *t, left - 1, prefix, out);
            prefix.pop();
        }
    }
    go(r, 0, h, &mut prefix, &mut out);
    out
}

/// Length-`h` prefixes of infinite computation paths, sorted.
pub fn oracle_safe_prefixes(m: &dyn Monitor, h: usize) -> Vec<Vec<Vec<ValueIdx>>> {
    let r = reachable(m);
    let safe = oracle_safe(&r);
    let mut out: Vec<Vec<Vec<ValueIdx>>> = oracle_paths(&r, h)
        .into_iter()
        .filter(|(_, x)| safe[*x])
        .map(|(p, _)| p)
        .collect();
    out.sort();
    out
}

/// Number of length-`h` paths ending in a safe state, by plain depth-first
/// enumeration of every path.
pub fn oracle_dfs_count(r: &Reachable, safe: &[bool], h: usize) -> u64 {
    fn go(r: &Reachable, safe: &[bool], x: usize, left: usize) -> u64 {
        if left == 0 {
            return u64::from(safe[x]);
        }
        r.edges[x].iter().map(|&(_, t)| go(r, safe, t, left - 1)).sum()
    }
    go(r, safe, 0, h)
}

/// Number of length-`h` paths, without materializing them.
pub fn oracle_count_paths(r: &Reachable, h: usize, only_safe: Option<&[bool]>) -> u128 {
    let mut memo: HashMap<(usize, usize), u128> = HashMap::new();
    fn go(
        r: &Reachable,
        x: usize,
        left: usize,
        safe: Option<&[bool]>,
        memo: &mut HashMap<(usize, usize), u128>,
    ) -> u128 {
        if left == 0 {
            return u128::from(safe.is_none_or(|s| s[x]));
        }
        if let Some(&c) = memo.get(&(x, left)) {
            return c;
        }
        let c = r.edges[x]
            .iter()
            .map(|&(_, t)| go(r, t, left - 1, safe, memo))
            .sum();
        memo.insert((x, left), c);
        c
    }
    go(r, 0, h, only_safe, &mut memo)
}

/// Pairs every step of `a` with the same step of `b` (variables of `a`
/// first).
pub fn pair_steps(a: &[Vec<ValueIdx>], b: &[Vec<ValueIdx>]) -> Vec<Vec<ValueIdx>> {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.iter().chain(y).copied().collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scc_finds_cycles() {
        let s = schema_with("x", &[2]);
        let m = ExplicitFsm::from_entries(
            "t",
            s,
            vec!["a".into(), "b".into(), "c".into(), "d".into()],
            "a",
            vec![
                ("a".into(), vec![0], "b".into()),
                ("b".into(), vec![0], "a".into()),
                ("a".into(), vec![1], "c".into()),
                ("c".into(), vec![0], "d".into()),
            ],
        )
        .unwrap();
        let r = reachable(&m);
        let safe = oracle_safe(&r);
        assert_eq!(safe.iter().filter(|&&s| s).count(), 2);
        assert_eq!(oracle_count_paths(&r, 2, None), 2);
        assert_eq!(oracle_count_paths(&r, 2, Some(&safe)), 1);
        assert_eq!(oracle_dfs_count(&r, &safe, 2), 1);
        assert_eq!(oracle_dfs_count(&r, &safe, 5), 1);
        assert_eq!(oracle_safe_prefixes(&m, 2), vec![vec![vec![0], vec![0]]]);
    }

    #[test]
    fn random_fsms_respect_bounds() {
        let mut g = rng(1);
        for _ in 0..50 {
            let m = random_fsm(&mut g, &FsmParams::default());
            assert!(m.state_names().len() <= 50);
            assert!(m.schema().assignments().count() <= 6);
        }
    }
}
