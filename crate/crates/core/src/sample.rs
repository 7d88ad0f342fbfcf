//! Uniform sampling, randomized exhaustive enumeration, index-range
//! splitting and the random-walk baseline.

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::count::{count_paths, TraceSource};
use crate::error::{SampleError, SynthError};
use crate::monitor::Monitor;
use crate::sg::{explore, ExploreLimits, ExploredGraph, ScenarioGenerator};
use crate::trace::TracePrefix;

/// Version of the permutation used by [`IndexPermutation`]. Streams produced
/// under one version are stable across releases.
pub const FEISTEL_VERSION: u32 = 1;
pub const CURSOR_VERSION: u32 = 1;
const FEISTEL_ROUNDS: usize = 8;

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform integer in `[0, n)` by rejection on `bits(n - 1)`-bit draws.
///
/// # Panics
/// If `n` is zero.
pub fn uniform_below<R: RngCore + ?Sized>(rng: &mut R, n: &BigUint) -> BigUint {
    assert!(!n.is_zero(), "empty range");
    if n.is_one() {
        return BigUint::zero();
    }
    let bits = (n - 1u32).bits();
    let limbs = bits.div_ceil(64) as usize;
    let top = bits - 64 * (limbs as u64 - 1);
    let mask = if top == 64 { u64::MAX } else { (1u64 << top) - 1 };
    loop {
        let mut digits: Vec<u64> = (0..limbs).map(|_| rng.next_u64()).collect();
        *digits.last_mut().expect("at least one limb") &= mask;
        let v = BigUint::from_slice(&to_u32_digits(&digits));
        if &v < n {
            return v;
        }
    }
}

fn to_u32_digits(limbs: &[u64]) -> Vec<u32> {
    limbs
        .iter()
        .flat_map(|&l| [l as u32, (l >> 32) as u32])
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum HorizonSpec {
    Fixed(usize),
    /// Every horizon in `lo..=hi`, each prefix of each horizon equally likely.
    Range(usize, usize),
}

impl HorizonSpec {
    pub fn bounds(&self) -> (usize, usize) {
        match *self {
            HorizonSpec::Fixed(h) => (h, h),
            HorizonSpec::Range(lo, hi) => (lo, hi),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplePolicy {
    pub horizons: HorizonSpec,
    pub seed: u64,
    pub with_replacement: bool,
}

impl SamplePolicy {
    pub fn fixed(h: usize, seed: u64) -> Self {
        Self {
            horizons: HorizonSpec::Fixed(h),
            seed,
            with_replacement: true,
        }
    }

    pub fn range(lo: usize, hi: usize, seed: u64) -> Self {
        Self {
            horizons: HorizonSpec::Range(lo, hi),
            seed,
            with_replacement: true,
        }
    }

    pub fn without_replacement(mut self) -> Self {
        self.with_replacement = false;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sample {
    pub horizon: usize,
    pub index: BigUint,
    pub trace: TracePrefix,
}

/// Maps global indices over a range of horizons to `(horizon, index)`.
struct HorizonLayout {
    lo: usize,
    cumulative: Vec<BigUint>,
}

impl HorizonLayout {
    fn new<S: TraceSource + ?Sized>(src: &S, lo: usize, hi: usize) -> Result<Self, SampleError> {
        let mut cumulative = Vec::with_capacity(hi - lo + 1);
        let mut acc = BigUint::zero();
        for h in lo..=hi {
            acc += src.count(h)?;
            cumulative.push(acc.clone());
        }
        Ok(Self { lo, cumulative })
    }

    fn total(&self) -> &BigUint {
        self.cumulative.last().expect("non-empty range")
    }

    fn locate(&self, g: &BigUint) -> (usize, BigUint) {
        let j = self.cumulative.partition_point(|c| c <= g);
        let base = if j == 0 {
            BigUint::zero()
        } else {
            self.cumulative[j - 1].clone()
        };
        (self.lo + j, g - base)
    }
}

/// Draws `n` prefixes under `policy`. Uniform over all prefixes of the
/// horizon (or of all horizons of the range, weighted by their counts).
/// Without replacement, the first `n` positions of a keyed permutation of
/// the global index range are used.
pub fn sample_uniform<S: TraceSource + ?Sized>(
    src: &mut S,
    policy: &SamplePolicy,
    n: usize,
) -> Result<Vec<Sample>, SampleError> {
    draw_indices(src, policy, n)?
        .into_iter()
        .map(|(horizon, index)| {
            let trace = src.unrank(&index, horizon)?;
            Ok(Sample {
                horizon,
                index,
                trace,
            })
        })
        .collect()
}

/// The `(horizon, index)` pairs [`sample_uniform`] would unrank, in order.
/// Tabulates `src` up to the largest horizon of the policy.
pub fn draw_indices<S: TraceSource + ?Sized>(
    src: &mut S,
    policy: &SamplePolicy,
    n: usize,
) -> Result<Vec<(usize, BigUint)>, SampleError> {
    let (lo, hi) = policy.horizons.bounds();
    if lo > hi {
        return Err(SampleError::InvalidPolicy(format!(
            "horizon range {lo}..={hi} is empty"
        )));
    }
    src.prepare(hi)?;
    let layout = HorizonLayout::new(&*src, lo, hi)?;
    let total = layout.total().clone();
    if total.is_zero() {
        return Err(SampleError::NoTraces);
    }
    let globals: Vec<BigUint> = if policy.with_replacement {
        let mut rng = rng_from_seed(policy.seed);
        (0..n).map(|_| uniform_below(&mut rng, &total)).collect()
    } else {
        if BigUint::from(n) > total {
            return Err(SampleError::NotEnoughTraces {
                requested: n.to_string(),
                available: total.to_string(),
            });
        }
        let perm = IndexPermutation::new(total, policy.seed);
        (0..n).map(|k| perm.apply(&BigUint::from(k))).collect()
    };
    Ok(globals.iter().map(|g| layout.locate(g)).collect())
}

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// Keyed bijection of `[0, n)`.
///
/// A balanced Feistel network over an even number of bits `b >= bits(n - 1)`
/// permutes `[0, 2^b)`; values outside `[0, n)` are re-encrypted until they
/// land inside (cycle walking). Eight rounds with keys taken from a
/// splitmix64 sequence seeded by `seed`. The round function hashes the
/// 64-bit limbs of the right half with the round key and expands the hash
/// to the half width.
#[derive(Clone, Debug)]
pub struct IndexPermutation {
    n: BigUint,
    half_bits: u64,
    keys: [u64; FEISTEL_ROUNDS],
}

impl IndexPermutation {
    pub fn new(n: BigUint, seed: u64) -> Self {
        let bits = if n <= BigUint::one() {
            0
        } else {
            (&n - 1u32).bits().max(2)
        };
        let bits = bits + bits % 2;
        let mut state = seed;
        let keys = std::array::from_fn(|_| {
            state = state.wrapping_add(GOLDEN);
            mix64(state)
        });
        Self {
            n,
            half_bits: bits / 2,
            keys,
        }
    }

    pub fn len(&self) -> &BigUint {
        &self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n.is_zero()
    }

    fn round(&self, key: u64, r: &BigUint) -> BigUint {
        let mut h = key;
        for limb in r.iter_u64_digits() {
            h = mix64(h ^ limb);
        }
        let limbs = self.half_bits.div_ceil(64);
        let out: Vec<u64> = (0..limbs)
            .map(|j| mix64(h ^ (j + 1).wrapping_mul(GOLDEN)))
            .collect();
        let v = BigUint::from_slice(&to_u32_digits(&out));
        v & self.half_mask()
    }

    fn half_mask(&self) -> BigUint {
        (BigUint::one() << self.half_bits) - 1u32
    }

    fn encrypt(&self, x: &BigUint) -> BigUint {
        let mask = self.half_mask();
        let mut l = x >> self.half_bits;
        let mut r = x & &mask;
        for &k in &self.keys {
            let f = self.round(k, &r);
            let next_r = l ^ f;
            l = r;
            r = next_r;
        }
        (l << self.half_bits) | r
    }

    /// Image of `i`.
    ///
    /// # Panics
    /// If `i >= n`.
    pub fn apply(&self, i: &BigUint) -> BigUint {
        assert!(i < &self.n, "index outside the permuted range");
        if self.half_bits == 0 {
            return i.clone();
        }
        let mut y = self.encrypt(i);
        while y >= self.n {
            y = self.encrypt(&y);
        }
        y
    }
}

/// Splits `[0, n)` into `k` contiguous ranges whose sizes differ by at most
/// one, larger ranges first.
///
/// # Panics
/// If `k` is zero.
pub fn split_ranges(n: &BigUint, k: usize) -> Vec<(BigUint, BigUint)> {
    assert!(k >= 1, "cannot split into zero ranges");
    let (q, r) = n.div_rem(&BigUint::from(k));
    let r = r.to_usize().expect("remainder below k");
    let mut start = BigUint::zero();
    (0..k)
        .map(|j| {
            let len = if j < r { &q + 1u32 } else { q.clone() };
            let end = &start + len;
            let range = (start.clone(), end.clone());
            start = end;
            range
        })
        .collect()
}

/// Resumable position inside a randomized enumeration.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cursor {
    pub version: u32,
    pub feistel_version: u32,
    pub seed: u64,
    pub horizon: usize,
    /// Number of prefixes at `horizon`, decimal.
    pub total: String,
    /// Permutation positions `start..end` are enumerated; decimal.
    pub start: String,
    pub end: String,
    /// Next position to emit; decimal.
    pub position: String,
}

fn parse_big(field: &str, s: &str) -> Result<BigUint, SampleError> {
    s.parse()
        .map_err(|_| SampleError::CursorMismatch(format!("{field} is not a decimal integer")))
}

/// Every prefix of one horizon, once each, in keyed pseudorandom order.
#[derive(Debug)]
pub struct RandomEnumeration<'a, S: TraceSource + ?Sized> {
    src: &'a S,
    horizon: usize,
    seed: u64,
    perm: IndexPermutation,
    start: BigUint,
    end: BigUint,
    position: BigUint,
}

/// Enumerates all length-`h` prefixes. `src` must have `h` tabulated.
pub fn enumerate_random<S: TraceSource + ?Sized>(
    src: &S,
    h: usize,
    seed: u64,
) -> Result<RandomEnumeration<'_, S>, SampleError> {
    let n = src.count(h)?;
    RandomEnumeration::over_range(src, h, seed, BigUint::zero(), n)
}

impl<'a, S: TraceSource + ?Sized> RandomEnumeration<'a, S> {
    /// Enumerates permutation positions `start..end` only. Disjoint position
    /// ranges yield disjoint index sets, so ranges from [`split_ranges`] can
    /// be consumed independently.
    pub fn over_range(
        src: &'a S,
        h: usize,
        seed: u64,
        start: BigUint,
        end: BigUint,
    ) -> Result<Self, SampleError> {
        let n = src.count(h)?;
        if start > end || end > n {
            return Err(SampleError::InvalidPolicy(format!(
                "range {start}..{end} outside 0..{n}"
            )));
        }
        Ok(Self {
            src,
            horizon: h,
            seed,
            perm: IndexPermutation::new(n, seed),
            position: start.clone(),
            start,
            end,
        })
    }

    pub fn resume(src: &'a S, cursor: &Cursor) -> Result<Self, SampleError> {
        if cursor.version != CURSOR_VERSION || cursor.feistel_version != FEISTEL_VERSION {
            return Err(SampleError::CursorMismatch(format!(
                "unsupported cursor version {}/{}",
                cursor.version, cursor.feistel_version
            )));
        }
        let n = src.count(cursor.horizon)?;
        if n != parse_big("total", &cursor.total)? {
            return Err(SampleError::CursorMismatch(format!(
                "cursor was taken over {} prefixes, generator has {n}",
                cursor.total
            )));
        }
        let mut e = Self::over_range(
            src,
            cursor.horizon,
            cursor.seed,
            parse_big("start", &cursor.start)?,
            parse_big("end", &cursor.end)?,
        )?;
        let position = parse_big("position", &cursor.position)?;
        if position < e.start || position > e.end {
            return Err(SampleError::CursorMismatch("position outside range".into()));
        }
        e.position = position;
        Ok(e)
    }

    pub fn cursor(&self) -> Cursor {
        Cursor {
            version: CURSOR_VERSION,
            feistel_version: FEISTEL_VERSION,
            seed: self.seed,
            horizon: self.horizon,
            total: self.perm.len().to_string(),
            start: self.start.to_string(),
            end: self.end.to_string(),
            position: self.position.to_string(),
        }
    }

    pub fn remaining(&self) -> BigUint {
        &self.end - &self.position
    }

    /// Next index without unranking it.
    pub fn next_index(&mut self) -> Option<BigUint> {
        if self.position >= self.end {
            return None;
        }
        let i = self.perm.apply(&self.position);
        self.position += 1u32;
        Some(i)
    }
}

impl<S: TraceSource + ?Sized> Iterator for RandomEnumeration<'_, S> {
    type Item = Result<(BigUint, TracePrefix), SampleError>;

    fn next(&mut self) -> Option<Self::Item> {
        let i = self.next_index()?;
        Some(
            self.src
                .unrank(&i, self.horizon)
                .map(|p| (i, p))
                .map_err(SampleError::from),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WalkOutcome {
    Completed(TracePrefix),
    /// No input was admissible after `step` steps.
    Deadlock { step: usize, prefix: TracePrefix },
}

impl WalkOutcome {
    pub fn is_deadlock(&self) -> bool {
        matches!(self, WalkOutcome::Deadlock { .. })
    }
}

/// Markovian random walk on an unpruned monitor: at each step one of the
/// admissible inputs is chosen uniformly.
pub fn baseline_random_walk(m: &dyn Monitor, h: usize, seed: u64) -> WalkOutcome {
    walk_monitor(m, h, &mut rng_from_seed(seed))
}

pub fn walk_monitor<R: Rng + ?Sized>(m: &dyn Monitor, h: usize, rng: &mut R) -> WalkOutcome {
    let mut prefix = TracePrefix::empty(m.schema().clone());
    let mut x = m.initial_state();
    for step in 0..h {
        let mut trans = m.transitions(&x);
        if trans.is_empty() {
            return WalkOutcome::Deadlock { step, prefix };
        }
        let (u, next) = trans.swap_remove(rng.gen_range(0..trans.len()));
        prefix
            .push(u)
            .expect("monitor transitions are schema assignments");
        x = next;
    }
    WalkOutcome::Completed(prefix)
}

/// Same walk as [`walk_monitor`] on an explored graph. Returns the deadlock
/// step, if any, without building the prefix.
pub fn walk_graph<R: Rng + ?Sized>(g: &ExploredGraph, h: usize, rng: &mut R) -> Option<usize> {
    let mut x = 0u32;
    for step in 0..h {
        let d = g.out_degree(x);
        if d == 0 {
            return Some(step);
        }
        x = g.edge_targets(x)[rng.gen_range(0..d)];
    }
    None
}

fn walk_graphs<R: Rng + ?Sized>(
    factors: &[&ExploredGraph],
    xs: &mut [u32],
    h: usize,
    rng: &mut R,
) -> Option<usize> {
    for step in 0..h {
        for (g, x) in factors.iter().zip(xs.iter_mut()) {
            let d = g.out_degree(*x);
            if d == 0 {
                return Some(step);
            }
            *x = g.edge_targets(*x)[rng.gen_range(0..d)];
        }
    }
    None
}

/// Deadlock statistics over `n` walks.
#[derive(Clone, Debug, PartialEq)]
pub struct WalkStats {
    pub walks: usize,
    pub deadlocks: usize,
    pub mean_deadlock_step: Option<f64>,
}

impl WalkStats {
    pub fn deadlock_fraction(&self) -> f64 {
        if self.walks == 0 {
            0.0
        } else {
            self.deadlocks as f64 / self.walks as f64
        }
    }
}

/// Walks `n` times over the product of independent factors. Choosing
/// uniformly among admissible product inputs is the same as choosing
/// uniformly in every factor, so the product is never built; a walk
/// deadlocks as soon as one factor does.
pub fn walk_stats(factors: &[&ExploredGraph], h: usize, n: usize, seed: u64) -> WalkStats {
    let mut rng = rng_from_seed(seed);
    let mut deadlocks = 0usize;
    let mut steps = 0usize;
    let mut xs = vec![0u32; factors.len()];
    for _ in 0..n {
        xs.fill(0);
        if let Some(s) = walk_graphs(factors, &mut xs, h, &mut rng) {
            deadlocks += 1;
            steps += s;
        }
    }
    WalkStats {
        walks: n,
        deadlocks,
        mean_deadlock_step: (deadlocks > 0).then(|| steps as f64 / deadlocks as f64),
    }
}

/// Exact ratio of generator prefixes to unpruned monitor paths of length `h`.
pub fn sg_selectivity(
    m: &dyn Monitor,
    sg: &ScenarioGenerator,
    h: usize,
) -> Result<Ratio<BigUint>, SampleError> {
    let g = explore(m, ExploreLimits::default()).map_err(|e| match e {
        SynthError::NoTraces => SampleError::NoTraces,
        other => SampleError::InvalidPolicy(other.to_string()),
    })?;
    selectivity_of_graphs(&g, sg.graph(), h)
}

pub fn selectivity_of_graphs(
    unpruned: &ExploredGraph,
    pruned: &ExploredGraph,
    h: usize,
) -> Result<Ratio<BigUint>, SampleError> {
    let den = count_paths(unpruned, h);
    if den.is_zero() {
        return Err(SampleError::ZeroDenominator(h));
    }
    Ok(Ratio::new(count_paths(pruned, h), den))
}

/// Closest `f64` to a ratio of big integers.
pub fn ratio_to_f64(r: &Ratio<BigUint>) -> f64 {
    let (n, d) = (r.numer(), r.denom());
    let shift = n.bits().max(d.bits()).saturating_sub(60);
    let n = (n >> shift).to_f64().unwrap_or(f64::NAN);
    let d = (d >> shift).to_f64().unwrap_or(f64::NAN);
    n / d
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::count::TraceIndex;
    use crate::monitor::ExplicitFsm;
    use crate::schema::{Schema, VariableDecl};
    use crate::sg::synthesize_sg;

    fn free(m: usize) -> Arc<ScenarioGenerator> {
        let dom: Vec<String> = (0..m).map(|i| format!("v{i}")).collect();
        let schema = Arc::new(Schema::new(vec![VariableDecl::new("a", dom).unwrap()]).unwrap());
        let entries = schema
            .assignments()
            .map(|u| ("s".to_string(), u, "s".to_string()))
            .collect();
        let fsm = ExplicitFsm::from_entries("f", schema, vec!["s".into()], "s", entries).unwrap();
        Arc::new(synthesize_sg(&fsm).unwrap())
    }

    #[test]
    fn split_examples() {
        let sizes = |n: u32, k| {
            split_ranges(&BigUint::from(n), k)
                .into_iter()
                .map(|(a, b)| (b - a).to_u32().unwrap())
                .collect::<Vec<_>>()
        };
        assert_eq!(sizes(10, 3), vec![4, 3, 3]);
        assert_eq!(sizes(0, 2), vec![0, 0]);
        let big = BigUint::one() << 128;
        let parts = split_ranges(&big, 4);
        assert!(parts.iter().all(|(a, b)| b - a == BigUint::one() << 126));
        assert_eq!(parts[3].1, big);
    }

    #[test]
    fn permutation_is_a_bijection() {
        for n in [1u32, 2, 3, 6, 17, 720] {
            let p = IndexPermutation::new(BigUint::from(n), 42);
            let mut seen: Vec<u32> = (0..n)
                .map(|i| p.apply(&BigUint::from(i)).to_u32().unwrap())
                .collect();
            seen.sort_unstable();
            assert_eq!(seen, (0..n).collect::<Vec<_>>());
        }
        let a = IndexPermutation::new(BigUint::from(720u32), 1);
        let b = IndexPermutation::new(BigUint::from(720u32), 2);
        let order = |p: &IndexPermutation| -> Vec<BigUint> {
            (0..720u32).map(|i| p.apply(&BigUint::from(i))).collect()
        };
        assert_ne!(order(&a), order(&b));
    }

    #[test]
    fn single_trace_sampling() {
        let mut idx = TraceIndex::new(free(1));
        let s = sample_uniform(&mut idx, &SamplePolicy::fixed(5, 9), 10).unwrap();
        assert!(s.iter().all(|x| x.index.is_zero()));
    }

    #[test]
    fn horizon_range_locates_globals() {
        let mut idx = TraceIndex::new(free(2));
        idx.extend(2).unwrap();
        let layout = HorizonLayout::new(&idx, 1, 2).unwrap();
        assert_eq!(layout.total(), &BigUint::from(6u32));
        assert_eq!(layout.locate(&BigUint::from(1u32)), (1, BigUint::one()));
        assert_eq!(layout.locate(&BigUint::from(2u32)), (2, BigUint::zero()));
    }

    #[test]
    fn enumeration_resumes_from_cursor() {
        let mut idx = TraceIndex::new(free(3));
        idx.extend(3).unwrap();
        let full: Vec<BigUint> = enumerate_random(&idx, 3, 5)
            .unwrap()
            .map(|r| r.unwrap().0)
            .collect();
        let mut e = enumerate_random(&idx, 3, 5).unwrap();
        let head: Vec<BigUint> = e.by_ref().take(10).map(|r| r.unwrap().0).collect();
        let json = serde_json::to_string(&e.cursor()).unwrap();
        let cursor: Cursor = serde_json::from_str(&json).unwrap();
        let tail: Vec<BigUint> = RandomEnumeration::resume(&idx, &cursor)
            .unwrap()
            .map(|r| r.unwrap().0)
            .collect();
        assert_eq!([head, tail].concat(), full);
    }

    #[test]
    fn walks_and_selectivity() {
        let schema = Arc::new(Schema::new(vec![VariableDecl::new("v", ["a", "b"]).unwrap()]).unwrap());
        let fsm = ExplicitFsm::new(
            "m",
            schema,
            &["A", "D"],
            "A",
            &[("A", &[("v", "a")], "A"), ("A", &[("v", "b")], "D")],
        )
        .unwrap();
        let sg = synthesize_sg(&fsm).unwrap();
        let r = sg_selectivity(&fsm, &sg, 3).unwrap();
        // length-3 paths of the monitor: aaa and aab; only aaa survives
        assert_eq!(r, Ratio::new(BigUint::one(), BigUint::from(2u32)));
        let deadlocks = (0..200)
            .filter(|&s| baseline_random_walk(&fsm, 3, s).is_deadlock())
            .count();
        assert!(deadlocks > 0);
        let free = free(2);
        assert_eq!(
            sg_selectivity(free.as_ref(), &free, 4).unwrap(),
            Ratio::one()
        );
        assert!((0..50).all(|s| !baseline_random_walk(free.as_ref(), 4, s).is_deadlock()));
    }

    #[test]
    fn product_walks_deadlock_with_any_factor() {
        let schema = Arc::new(Schema::new(vec![VariableDecl::new("v", ["a", "b"]).unwrap()]).unwrap());
        let fsm = ExplicitFsm::new(
            "m",
            schema,
            &["A", "D"],
            "A",
            &[("A", &[("v", "a")], "A"), ("A", &[("v", "b")], "D")],
        )
        .unwrap();
        let g = explore(&fsm, ExploreLimits::default()).unwrap();
        let other = free(2);
        // a walk survives 3 steps only if its first two inputs are `a`
        for factors in [vec![&g], vec![other.graph(), &g]] {
            let w = walk_stats(&factors, 3, 20_000, 4);
            assert!((w.deadlock_fraction() - 0.75).abs() < 0.02);
            let m = w.mean_deadlock_step.unwrap();
            // deadlock at step 1 w.p. 1/2, at step 2 w.p. 1/4
            assert!((m - 4.0 / 3.0).abs() < 0.05);
        }
        assert_eq!(walk_stats(&[other.graph()], 9, 100, 0).deadlocks, 0);
    }

    #[test]
    fn ratio_conversion() {
        let r = Ratio::new(BigUint::one() << 200, (BigUint::one() << 201) + 0u32);
        assert!((ratio_to_f64(&r) - 0.5).abs() < 1e-12);
    }
}
