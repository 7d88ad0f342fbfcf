use thiserror::Error;

/// Errors raised while building schemas, assignments and monitors.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("variable `{0}` has an empty domain")]
    EmptyDomain(String),
    #[error("variable `{var}` lists value `{value}` more than once")]
    DuplicateValue { var: String, value: String },
    #[error("variable `{0}` declared more than once")]
    DuplicateVariable(String),
    #[error("invalid variable name `{0}`")]
    InvalidName(String),
    #[error("variable `{var}` has {len} values, more than the supported {max}")]
    DomainTooLarge { var: String, len: usize, max: usize },
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("value `{value}` is not in the domain of `{var}`")]
    UnknownValue { var: String, value: String },
    #[error("value index {index} out of range for `{var}`")]
    ValueOutOfRange { var: String, index: usize },
    #[error("assignment binds {got} variables, schema has {expected}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("shared variable `{var}` has different domains in the two monitors")]
    DomainMismatch { var: String },
    #[error("variable sets overlap on `{0}`")]
    Overlap(String),
    #[error("trace prefixes have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("state `{0}` declared more than once")]
    DuplicateState(String),
    #[error("nondeterministic transition from `{state}` on {input}")]
    Nondeterministic { state: String, input: String },
    #[error("invalid template `{template}`: {reason}")]
    Template { template: String, reason: String },
}

/// Errors raised while synthesizing a scenario generator.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum SynthError {
    #[error("initial state is not safe: the monitor entails no trace")]
    NoTraces,
    #[error("exploration limit exceeded: more than {limit} {what}")]
    LimitExceeded { what: &'static str, limit: usize },
    #[error("monitor contract violated at state {state}: {detail}")]
    ContractViolation { state: String, detail: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Errors raised by counting, unranking and ranking.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum CountError {
    #[error("error index out of bounds: index {index} >= nb_traces({horizon}) = {count}")]
    IndexOutOfBounds {
        index: String,
        horizon: usize,
        count: String,
    },
    #[error("horizon {horizon} is not tabulated (tables reach {h_max:?})")]
    NotTabulated { horizon: usize, h_max: Option<usize> },
    #[error("invalid prefix at step {step}: {reason}")]
    InvalidPrefix { step: usize, reason: String },
    #[error(
        "count tables would need {bytes} bytes, above the {limit}-byte limit; \
         raise the limit or use a per-horizon streaming mode"
    )]
    MemoryLimit { bytes: usize, limit: usize },
}

/// Errors raised by samplers and enumerators.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum SampleError {
    #[error("generator has no traces at the requested horizon(s)")]
    NoTraces,
    #[error("invalid sampling policy: {0}")]
    InvalidPolicy(String),
    #[error("cannot draw {requested} distinct traces out of {available}")]
    NotEnoughTraces { requested: String, available: String },
    #[error("selectivity undefined: the monitor has no length-{0} computation")]
    ZeroDenominator(usize),
    #[error("cursor does not match this enumeration: {0}")]
    CursorMismatch(String),
    #[error(transparent)]
    Count(#[from] CountError),
}

/// Errors raised while reading or writing generator files.
#[derive(Debug, Error)]
pub enum FormatError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("not a scenario generator file (bad magic)")]
    BadMagic,
    #[error("unsupported format version {0}")]
    Version(u32),
    #[error("corrupt file: {0}")]
    Corrupt(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}
