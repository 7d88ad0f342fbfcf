//! Scenario generators for simulation-based verification.
//!
//! A [`Monitor`] describes the legal input scenarios of a system as a
//! finite-memory acceptor over assignments. [`synthesize_sg`] prunes it to a
//! non-blocking [`ScenarioGenerator`], and [`TraceIndex`] counts, unranks and
//! ranks its trace prefixes at any horizon. Independent generators combine
//! into an [`SgTuple`] without building their product.

pub mod casestudy;
pub mod count;
pub mod dsl;
pub mod error;
pub mod format;
pub mod monitor;
pub mod product;
pub mod sample;
pub mod schema;
pub mod sg;
pub mod templates;
pub mod trace;

pub use count::{count_paths, CountTables, TraceIndex, TraceSource, DEFAULT_MEMORY_LIMIT};
pub use error::{CountError, FormatError, ModelError, SampleError, SynthError};
pub use monitor::{conjoin, conjoin_all, Conjoint, ExplicitFsm, Monitor, MonitorRef, StateKey};
pub use product::SgTuple;
pub use schema::{Assignment, Schema, ValueIdx, VariableDecl};
pub use sg::{
    compute_safe_set, explore, incremental_regen, synthesize_sg, synthesize_sg_with,
    ExploreLimits, ExploredGraph, Provenance, SafeSet, ScenarioGenerator,
};
pub use trace::{pair_traces, TracePrefix};
pub use sample::{
    baseline_random_walk, draw_indices, enumerate_random, sample_uniform, sg_selectivity, split_ranges,
    Cursor, HorizonSpec, IndexPermutation, RandomEnumeration, Sample, SamplePolicy, WalkOutcome,
};
