//! Parametric constraint monitors.
//!
//! Every template is a deterministic partial transition function with a
//! small canonical state key. One assignment is consumed per time unit. The
//! encodings are:
//!
//! | template | state | key |
//! |---|---|---|
//! | [`RecoveryWindow`] | steps `d` since the pending fault (`0` = idle) | `u16 d` |
//! | [`Recurrence`] | "no event yet" flag, steps since the last event | `u8 first, u16 s` + previous values |
//! | [`ResponseWindow`] | bitmask of ages of triggers still awaiting a response | `u64 mask` + previous values |
//! | [`AtMostK`] (level) | none | empty |
//! | [`AtMostK`] (latched) | bitmask of busy variables | `u64 mask` |
//! | [`RunLength`] | previous value, length of the current run (capped) | `u16 prev+1, u16 run` |
//! | [`NoSimultaneousChange`] | previous values | `u16 prev+1` per variable |
//! | [`StepBounded`] | steps elapsed (capped at warm-up), previous level | `u16 t, u16 prev` |
//! | [`NoReversal`] | previous value | `u16 prev+1` |
//! | [`Unconstrained`] | none | empty |
//!
//! "Previous values" are appended only by templates that watch
//! [`EventSpec::Change`] events. At the first step no variable has changed.
//!
//! Windows are measured in steps: an event at step `t` answered at step
//! `t + d` has delay `d`.

use std::sync::Arc;

use crate::error::ModelError;
use crate::monitor::{Monitor, StateKey};
use crate::schema::{Schema, ValueIdx, VariableDecl};

const MAX_WINDOW: u32 = u16::MAX as u32 - 1;
const MAX_RESPONSE_WINDOW: u32 = 62;

fn template_error(template: &str, reason: impl Into<String>) -> ModelError {
    ModelError::Template {
        template: template.to_string(),
        reason: reason.into(),
    }
}

fn check_window(template: &str, lo: u32, hi: u32, max: u32) -> Result<(), ModelError> {
    if lo == 0 {
        return Err(template_error(template, "window bounds must be positive"));
    }
    if lo > hi {
        return Err(template_error(
            template,
            format!("window minimum {lo} exceeds maximum {hi}"),
        ));
    }
    if hi > max {
        return Err(template_error(
            template,
            format!("window maximum {hi} exceeds {max}"),
        ));
    }
    Ok(())
}

fn sub_schema(decls: &Schema, names: &[&str]) -> Result<Arc<Schema>, ModelError> {
    let mut vars: Vec<VariableDecl> = Vec::new();
    for n in names {
        let v = decls.var(n)?;
        if !vars.iter().any(|w| w.name() == *n) {
            vars.push(v.clone());
        }
    }
    Ok(Arc::new(Schema::new(vars)?))
}

fn value_of(decl: &VariableDecl, value: &str) -> Result<ValueIdx, ModelError> {
    decl.value_index(value).ok_or_else(|| ModelError::UnknownValue {
        var: decl.name().to_string(),
        value: value.to_string(),
    })
}

fn domain_sizes(schema: &Schema) -> String {
    schema
        .vars()
        .iter()
        .map(|v| v.len().to_string())
        .collect::<Vec<_>>()
        .join("x")
}

#[derive(Default)]
struct KeyWriter(Vec<u8>);

impl KeyWriter {
    fn u8(mut self, v: u8) -> Self {
        self.0.push(v);
        self
    }
    fn u16(mut self, v: u16) -> Self {
        self.0.extend_from_slice(&v.to_le_bytes());
        self
    }
    fn u64(mut self, v: u64) -> Self {
        self.0.extend_from_slice(&v.to_le_bytes());
        self
    }
    fn prev(mut self, prev: &Option<Vec<ValueIdx>>) -> Self {
        if let Some(p) = prev {
            self.0.push(1);
            for &v in p {
                self.0.extend_from_slice(&v.to_le_bytes());
            }
        } else {
            self.0.push(0);
        }
        self
    }
    fn finish(self) -> StateKey {
        self.0
    }
}

struct KeyReader<'a>(&'a [u8]);

impl<'a> KeyReader<'a> {
    fn u8(&mut self) -> Option<u8> {
        let (&b, rest) = self.0.split_first()?;
        self.0 = rest;
        Some(b)
    }
    fn u16(&mut self) -> Option<u16> {
        let (b, rest) = self.0.split_first_chunk::<2>()?;
        self.0 = rest;
        Some(u16::from_le_bytes(*b))
    }
    fn u64(&mut self) -> Option<u64> {
        let (b, rest) = self.0.split_first_chunk::<8>()?;
        self.0 = rest;
        Some(u64::from_le_bytes(*b))
    }
    fn prev(&mut self, n: usize) -> Option<Option<Vec<ValueIdx>>> {
        match self.u8()? {
            0 => Some(None),
            _ => (0..n).map(|_| self.u16()).collect::<Option<Vec<_>>>().map(Some),
        }
    }
}

/// An event observed on a single variable at one step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EventSpec {
    /// The variable takes one of the listed values.
    Values { var: String, values: Vec<String> },
    /// The variable's value differs from its value at the previous step.
    Change { var: String },
}

impl EventSpec {
    pub fn values(var: &str, values: &[&str]) -> Self {
        EventSpec::Values {
            var: var.to_string(),
            values: values.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn change(var: &str) -> Self {
        EventSpec::Change {
            var: var.to_string(),
        }
    }

    /// Any value except the first declared one.
    pub fn non_default(decl: &VariableDecl) -> Self {
        EventSpec::Values {
            var: decl.name().to_string(),
            values: decl.domain()[1..].to_vec(),
        }
    }

    pub fn var(&self) -> &str {
        match self {
            EventSpec::Values { var, .. } | EventSpec::Change { var } => var,
        }
    }
}

#[derive(Clone, Debug)]
enum Event {
    In { pos: usize, mask: Vec<bool> },
    Change { pos: usize, slot: usize },
}

impl Event {
    fn holds(&self, prev: &Option<Vec<ValueIdx>>, input: &[ValueIdx]) -> bool {
        match self {
            Event::In { pos, mask } => mask[input[*pos] as usize],
            Event::Change { pos, slot } => prev.as_ref().is_some_and(|p| p[*slot] != input[*pos]),
        }
    }

    fn shape(&self) -> String {
        match self {
            Event::In { pos, mask } => {
                let bits: String = mask.iter().map(|&b| if b { '1' } else { '0' }).collect();
                format!("in{pos}:{bits}")
            }
            Event::Change { pos, .. } => format!("chg{pos}"),
        }
    }
}

/// Resolves events against the schema built from their variables, and
/// assigns each watched-for-change variable a slot in the previous-values
/// vector.
struct EventResolver {
    schema: Arc<Schema>,
    tracked: Vec<usize>,
}

impl EventResolver {
    fn new(decls: &Schema, events: &[&EventSpec]) -> Result<Self, ModelError> {
        let names: Vec<&str> = events.iter().map(|e| e.var()).collect();
        Ok(Self {
            schema: sub_schema(decls, &names)?,
            tracked: Vec::new(),
        })
    }

    fn resolve(&mut self, template: &str, e: &EventSpec) -> Result<Event, ModelError> {
        let pos = self.schema.position(e.var()).expect("event variable in schema");
        let decl = &self.schema.vars()[pos];
        match e {
            EventSpec::Values { values, .. } => {
                if values.is_empty() {
                    return Err(template_error(template, "event value set is empty"));
                }
                let mut mask = vec![false; decl.len()];
                for v in values {
                    mask[value_of(decl, v)? as usize] = true;
                }
                Ok(Event::In { pos, mask })
            }
            EventSpec::Change { .. } => {
                let slot = match self.tracked.iter().position(|&p| p == pos) {
                    Some(s) => s,
                    None => {
                        self.tracked.push(pos);
                        self.tracked.len() - 1
                    }
                };
                Ok(Event::Change { pos, slot })
            }
        }
    }

    fn next_prev(tracked: &[usize], input: &[ValueIdx]) -> Option<Vec<ValueIdx>> {
        (!tracked.is_empty()).then(|| tracked.iter().map(|&p| input[p]).collect())
    }
}

/// A fault on `var` must be repaired after a delay in `[wmin, wmax]`.
///
/// Values play three roles: the fault value, the repair value, and every
/// other value (no-op). With a two-valued domain the fault and repair value
/// may coincide: the value toggles availability. While a fault is pending
/// the fault value (if distinct from the repair value) is inadmissible. An
/// idle repair is inadmissible unless `shared_repair` is set, which is
/// needed when several of these monitors share one repair value.
#[derive(Clone, Debug)]
pub struct RecoveryWindow {
    schema: Arc<Schema>,
    wmin: u16,
    wmax: u16,
    fault: ValueIdx,
    repair: ValueIdx,
    shared_repair: bool,
}

/// Recovery window using the variable's declared roles: the second value is
/// the fault, the last value is the repair, the first is the no-op.
pub fn make_recovery_window(
    decls: &Schema,
    var: &str,
    wmin: u32,
    wmax: u32,
) -> Result<RecoveryWindow, ModelError> {
    let decl = decls.var(var)?;
    if decl.len() < 2 {
        return Err(template_error(
            "recovery_window",
            "variable needs a no-op and a fault value",
        ));
    }
    let fault = decl.value(1).to_string();
    let repair = decl.value((decl.len() - 1) as ValueIdx).to_string();
    RecoveryWindow::new(decls, var, wmin, wmax, &fault, &repair, false)
}

impl RecoveryWindow {
    pub fn new(
        decls: &Schema,
        var: &str,
        wmin: u32,
        wmax: u32,
        fault: &str,
        repair: &str,
        shared_repair: bool,
    ) -> Result<Self, ModelError> {
        check_window("recovery_window", wmin, wmax, MAX_WINDOW)?;
        let schema = sub_schema(decls, &[var])?;
        let decl = &schema.vars()[0];
        let fault = value_of(decl, fault)?;
        let repair = value_of(decl, repair)?;
        if (0..decl.len() as ValueIdx).all(|v| v == fault || v == repair) {
            return Err(template_error(
                "recovery_window",
                "variable needs a value that is neither fault nor repair",
            ));
        }
        Ok(Self {
            schema,
            wmin: wmin as u16,
            wmax: wmax as u16,
            fault,
            repair,
            shared_repair,
        })
    }
}

impl Monitor for RecoveryWindow {
    fn schema(&self) -> &Arc<Schema> {
        &self.schema
    }

    fn initial_state(&self) -> StateKey {
        KeyWriter::default().u16(0).finish()
    }

    fn step(&self, state: &[u8], input: &[ValueIdx]) -> Option<StateKey> {
        let d = KeyReader(state).u16()?;
        let v = *input.first()?;
        let next = if d == 0 {
            if v == self.fault {
                1
            } else if v == self.repair && !self.shared_repair {
                return None;
            } else {
                0
            }
        } else if v == self.repair {
            (self.wmin..=self.wmax).contains(&d).then_some(0)?
        } else if v == self.fault {
            return None;
        } else {
            (d < self.wmax).then_some(d + 1)?
        };
        Some(KeyWriter::default().u16(next).finish())
    }

    fn describe(&self) -> String {
        format!(
            "recovery_window({}, {}, {})",
            self.schema.vars()[0].name(),
            self.wmin,
            self.wmax
        )
    }

    fn shape_key(&self) -> Option<String> {
        Some(format!(
            "recovery_window/{}/{}/{}/{}/{}/{}",
            domain_sizes(&self.schema),
            self.wmin,
            self.wmax,
            self.fault,
            self.repair,
            self.shared_repair
        ))
    }
}

/// The event recurs with gaps in `[pmin, pmax]` between consecutive
/// occurrences; the first occurrence happens within the first `pmax` steps.
#[derive(Clone, Debug)]
pub struct Recurrence {
    schema: Arc<Schema>,
    event: Event,
    tracked: Vec<usize>,
    pmin: u16,
    pmax: u16,
}

pub fn make_recurrence(
    decls: &Schema,
    event: &EventSpec,
    pmin: u32,
    pmax: u32,
) -> Result<Recurrence, ModelError> {
    check_window("recurrence", pmin, pmax, MAX_WINDOW)?;
    let mut r = EventResolver::new(decls, &[event])?;
    let event = r.resolve("recurrence", event)?;
    Ok(Recurrence {
        schema: r.schema,
        event,
        tracked: r.tracked,
        pmin: pmin as u16,
        pmax: pmax as u16,
    })
}

impl Monitor for Recurrence {
    fn schema(&self) -> &Arc<Schema> {
        &self.schema
    }

    fn initial_state(&self) -> StateKey {
        KeyWriter::default().u8(1).u16(0).prev(&None).finish()
    }

    fn step(&self, state: &[u8], input: &[ValueIdx]) -> Option<StateKey> {
        let mut r = KeyReader(state);
        let first = r.u8()? != 0;
        let since = r.u16()?;
        let prev = r.prev(self.tracked.len())?;
        let gap = since + 1;
        let (first, since) = if self.event.holds(&prev, input) {
            let ok = gap <= self.pmax && (first || gap >= self.pmin);
            ok.then_some((false, 0))?
        } else {
            (gap < self.pmax).then_some((first, gap))?
        };
        Some(
            KeyWriter::default()
                .u8(first as u8)
                .u16(since)
                .prev(&EventResolver::next_prev(&self.tracked, input))
                .finish(),
        )
    }

    fn describe(&self) -> String {
        format!("recurrence({}, {})", self.pmin, self.pmax)
    }

    fn shape_key(&self) -> Option<String> {
        Some(format!(
            "recurrence/{}/{}/{}/{}",
            domain_sizes(&self.schema),
            self.event.shape(),
            self.pmin,
            self.pmax
        ))
    }
}

/// Every trigger is followed by a response after a delay in `[amin, amax]`.
/// A response answers every pending trigger whose age lies in the window;
/// younger triggers stay pending. Responses are otherwise unconstrained.
#[derive(Clone, Debug)]
pub struct ResponseWindow {
    schema: Arc<Schema>,
    trigger: Event,
    response: Event,
    tracked: Vec<usize>,
    amin: u32,
    amax: u32,
}

pub fn make_response_window(
    decls: &Schema,
    trigger: &EventSpec,
    response: &EventSpec,
    amin: u32,
    amax: u32,
) -> Result<ResponseWindow, ModelError> {
    check_window("response_window", amin, amax, MAX_RESPONSE_WINDOW)?;
    let mut r = EventResolver::new(decls, &[trigger, response])?;
    let trigger = r.resolve("response_window", trigger)?;
    let response = r.resolve("response_window", response)?;
    Ok(ResponseWindow {
        schema: r.schema,
        trigger,
        response,
        tracked: r.tracked,
        amin,
        amax,
    })
}

impl Monitor for ResponseWindow {
    fn schema(&self) -> &Arc<Schema> {
        &self.schema
    }

    fn initial_state(&self) -> StateKey {
        KeyWriter::default().u64(0).prev(&None).finish()
    }

    fn step(&self, state: &[u8], input: &[ValueIdx]) -> Option<StateKey> {
        let mut r = KeyReader(state);
        let pending = r.u64()?;
        let prev = r.prev(self.tracked.len())?;
        let mut aged = pending << 1;
        if self.trigger.holds(&prev, input) {
            aged |= 1;
        }
        if self.response.holds(&prev, input) {
            let window = ((1u64 << (self.amax + 1)) - 1) & !((1u64 << self.amin) - 1);
            aged &= !window;
        }
        if aged & (1u64 << self.amax) != 0 {
            return None;
        }
        Some(
            KeyWriter::default()
                .u64(aged)
                .prev(&EventResolver::next_prev(&self.tracked, input))
                .finish(),
        )
    }

    fn describe(&self) -> String {
        format!("response_window({}, {})", self.amin, self.amax)
    }

    fn shape_key(&self) -> Option<String> {
        Some(format!(
            "response_window/{}/{}/{}/{}/{}",
            domain_sizes(&self.schema),
            self.trigger.shape(),
            self.response.shape(),
            self.amin,
            self.amax
        ))
    }
}

/// At most `k` of the variables are busy at any step.
///
/// Without release values a variable is busy exactly when its current value
/// is a busy value. With release values busyness is latched: a free variable
/// becomes busy on a busy value, a busy one is freed by a release value, and
/// a release on a free variable (or a busy value on a busy one) is
/// inadmissible. A value listed as both acts as a toggle.
#[derive(Clone, Debug)]
pub struct AtMostK {
    schema: Arc<Schema>,
    k: usize,
    busy: Vec<Vec<bool>>,
    release: Option<Vec<Vec<bool>>>,
}

pub fn make_at_most_k(
    decls: &Schema,
    vars: &[&str],
    k: usize,
    busy: &[&str],
    release: Option<&[&str]>,
) -> Result<AtMostK, ModelError> {
    if vars.is_empty() {
        return Err(template_error("at_most_k", "no variables given"));
    }
    let schema = sub_schema(decls, vars)?;
    if release.is_some() && schema.len() > 64 {
        return Err(template_error(
            "at_most_k",
            "latched mode supports at most 64 variables",
        ));
    }
    let masks = |values: &[&str]| -> Result<Vec<Vec<bool>>, ModelError> {
        for v in values {
            if !schema.vars().iter().any(|d| d.value_index(v).is_some()) {
                return Err(template_error(
                    "at_most_k",
                    format!("value `{v}` is in no variable's domain"),
                ));
            }
        }
        Ok(schema
            .vars()
            .iter()
            .map(|d| d.domain().iter().map(|x| values.contains(&x.as_str())).collect())
            .collect())
    };
    if busy.is_empty() {
        return Err(template_error("at_most_k", "busy value set is empty"));
    }
    let busy = masks(busy)?;
    let release = release.map(masks).transpose()?;
    Ok(AtMostK {
        schema,
        k,
        busy,
        release,
    })
}

impl Monitor for AtMostK {
    fn schema(&self) -> &Arc<Schema> {
        &self.schema
    }

    fn initial_state(&self) -> StateKey {
        match self.release {
            None => Vec::new(),
            Some(_) => KeyWriter::default().u64(0).finish(),
        }
    }

    fn step(&self, state: &[u8], input: &[ValueIdx]) -> Option<StateKey> {
        match &self.release {
            None => {
                let n = input
                    .iter()
                    .zip(&self.busy)
                    .filter(|(&v, m)| m[v as usize])
                    .count();
                (n <= self.k).then(Vec::new)
            }
            Some(release) => {
                let mut mask = KeyReader(state).u64()?;
                for (i, &v) in input.iter().enumerate() {
                    let bit = 1u64 << i;
                    let is_busy = self.busy[i][v as usize];
                    let is_release = release[i][v as usize];
                    if mask & bit != 0 {
                        if is_release {
                            mask &= !bit;
                        } else if is_busy {
                            return None;
                        }
                    } else if is_busy {
                        mask |= bit;
                    } else if is_release {
                        return None;
                    }
                }
                (mask.count_ones() as usize <= self.k)
                    .then(|| KeyWriter::default().u64(mask).finish())
            }
        }
    }

    fn describe(&self) -> String {
        format!("at_most_k({} vars, {})", self.schema.len(), self.k)
    }

    fn shape_key(&self) -> Option<String> {
        let bits = |m: &Vec<Vec<bool>>| {
            m.iter()
                .map(|v| v.iter().map(|&b| if b { '1' } else { '0' }).collect::<String>())
                .collect::<Vec<_>>()
                .join(",")
        };
        Some(format!(
            "at_most_k/{}/{}/{}/{}",
            domain_sizes(&self.schema),
            self.k,
            bits(&self.busy),
            self.release.as_ref().map(bits).unwrap_or_default()
        ))
    }
}

/// Bounds on the length of maximal runs of a constant value. `min` is the
/// dwell time (a value is kept at least that long before changing), `max`
/// forces a change at least every `max` steps.
#[derive(Clone, Debug)]
pub struct RunLength {
    schema: Arc<Schema>,
    min: Option<u16>,
    max: Option<u16>,
}

/// Value stable for at least `dmin` steps between changes.
pub fn make_dwell(decls: &Schema, var: &str, dmin: u32) -> Result<RunLength, ModelError> {
    check_window("dwell", dmin, dmin, MAX_WINDOW)?;
    Ok(RunLength {
        schema: sub_schema(decls, &[var])?,
        min: Some(dmin as u16),
        max: None,
    })
}

/// Value changes at least every `dmax` steps.
pub fn make_max_dwell(decls: &Schema, var: &str, dmax: u32) -> Result<RunLength, ModelError> {
    check_window("max_dwell", dmax, dmax, MAX_WINDOW)?;
    Ok(RunLength {
        schema: sub_schema(decls, &[var])?,
        min: None,
        max: Some(dmax as u16),
    })
}

impl Monitor for RunLength {
    fn schema(&self) -> &Arc<Schema> {
        &self.schema
    }

    fn initial_state(&self) -> StateKey {
        KeyWriter::default().u16(0).u16(0).finish()
    }

    fn step(&self, state: &[u8], input: &[ValueIdx]) -> Option<StateKey> {
        let mut r = KeyReader(state);
        let prev = r.u16()?;
        let run = r.u16()?;
        let v = *input.first()?;
        let run = if prev == 0 {
            1
        } else if prev - 1 == v {
            if self.max.is_some_and(|m| run >= m) {
                return None;
            }
            let cap = self.max.unwrap_or_else(|| self.min.unwrap_or(1));
            (run + 1).min(cap)
        } else {
            if self.min.is_some_and(|m| run < m) {
                return None;
            }
            1
        };
        Some(KeyWriter::default().u16(v + 1).u16(run).finish())
    }

    fn describe(&self) -> String {
        match (self.min, self.max) {
            (Some(m), _) => format!("dwell({m})"),
            (_, Some(m)) => format!("max_dwell({m})"),
            _ => "run_length".into(),
        }
    }

    fn shape_key(&self) -> Option<String> {
        Some(format!(
            "run_length/{}/{:?}/{:?}",
            domain_sizes(&self.schema),
            self.min,
            self.max
        ))
    }
}

/// At most one of the variables changes value between consecutive steps.
#[derive(Clone, Debug)]
pub struct NoSimultaneousChange {
    schema: Arc<Schema>,
}

pub fn make_no_simultaneous_change(
    decls: &Schema,
    vars: &[&str],
) -> Result<NoSimultaneousChange, ModelError> {
    if vars.len() < 2 {
        return Err(template_error(
            "no_simultaneous_change",
            "needs at least two variables",
        ));
    }
    Ok(NoSimultaneousChange {
        schema: sub_schema(decls, vars)?,
    })
}

impl Monitor for NoSimultaneousChange {
    fn schema(&self) -> &Arc<Schema> {
        &self.schema
    }

    fn initial_state(&self) -> StateKey {
        KeyWriter::default().prev(&None).finish()
    }

    fn step(&self, state: &[u8], input: &[ValueIdx]) -> Option<StateKey> {
        let prev = KeyReader(state).prev(self.schema.len())?;
        if let Some(p) = &prev {
            if p.iter().zip(input).filter(|(a, b)| a != b).count() > 1 {
                return None;
            }
        }
        Some(KeyWriter::default().prev(&Some(input.to_vec())).finish())
    }

    fn describe(&self) -> String {
        format!("no_simultaneous_change({} vars)", self.schema.len())
    }

    fn shape_key(&self) -> Option<String> {
        Some(format!("no_simultaneous_change/{}", domain_sizes(&self.schema)))
    }
}

/// Quantised excursion around a nominal level.
///
/// The domain is read as ordered levels. The value stays within `band`
/// positions of `nominal`, moves between consecutive steps by zero or by one
/// of `steps` positions (the signal starts from `nominal`), and equals
/// `nominal` during the first `warmup` steps.
#[derive(Clone, Debug)]
pub struct StepBounded {
    schema: Arc<Schema>,
    nominal: ValueIdx,
    band: u16,
    steps: Vec<u16>,
    warmup: u16,
}

pub fn make_step_bounded(
    decls: &Schema,
    var: &str,
    band: u32,
    steps: &[u32],
    warmup: u32,
    nominal: Option<&str>,
) -> Result<StepBounded, ModelError> {
    let schema = sub_schema(decls, &[var])?;
    let decl = &schema.vars()[0];
    let nominal = match nominal {
        Some(n) => value_of(decl, n)?,
        None => ((decl.len() - 1) / 2) as ValueIdx,
    };
    if steps.is_empty() || steps.contains(&0) {
        return Err(template_error(
            "step_bounded",
            "step sizes must be positive and non-empty",
        ));
    }
    if band > MAX_WINDOW || warmup > MAX_WINDOW || steps.iter().any(|&s| s > MAX_WINDOW) {
        return Err(template_error("step_bounded", "parameter out of range"));
    }
    let mut steps: Vec<u16> = steps.iter().map(|&s| s as u16).collect();
    steps.sort_unstable();
    steps.dedup();
    Ok(StepBounded {
        schema,
        nominal,
        band: band as u16,
        steps,
        warmup: warmup as u16,
    })
}

impl Monitor for StepBounded {
    fn schema(&self) -> &Arc<Schema> {
        &self.schema
    }

    fn initial_state(&self) -> StateKey {
        KeyWriter::default().u16(0).u16(self.nominal).finish()
    }

    fn step(&self, state: &[u8], input: &[ValueIdx]) -> Option<StateKey> {
        let mut r = KeyReader(state);
        let t = r.u16()?;
        let prev = r.u16()?;
        let v = *input.first()?;
        if v.abs_diff(self.nominal) > self.band {
            return None;
        }
        if t < self.warmup && v != self.nominal {
            return None;
        }
        let delta = v.abs_diff(prev);
        if delta != 0 && self.steps.binary_search(&delta).is_err() {
            return None;
        }
        Some(KeyWriter::default().u16((t + 1).min(self.warmup)).u16(v).finish())
    }

    fn describe(&self) -> String {
        format!("step_bounded(band {}, warmup {})", self.band, self.warmup)
    }

    fn shape_key(&self) -> Option<String> {
        Some(format!(
            "step_bounded/{}/{}/{}/{:?}/{}",
            domain_sizes(&self.schema),
            self.nominal,
            self.band,
            self.steps,
            self.warmup
        ))
    }
}

/// The first and last domain values never follow each other directly: a
/// request in one direction is not immediately undone by the opposite one.
#[derive(Clone, Debug)]
pub struct NoReversal {
    schema: Arc<Schema>,
}

pub fn make_no_reversal(decls: &Schema, var: &str) -> Result<NoReversal, ModelError> {
    let schema = sub_schema(decls, &[var])?;
    if schema.vars()[0].len() < 2 {
        return Err(template_error("no_reversal", "needs at least two values"));
    }
    Ok(NoReversal { schema })
}

impl Monitor for NoReversal {
    fn schema(&self) -> &Arc<Schema> {
        &self.schema
    }

    fn initial_state(&self) -> StateKey {
        KeyWriter::default().u16(0).finish()
    }

    fn step(&self, state: &[u8], input: &[ValueIdx]) -> Option<StateKey> {
        let prev = KeyReader(state).u16()?;
        let v = *input.first()?;
        let last = (self.schema.vars()[0].len() - 1) as ValueIdx;
        if prev != 0 {
            let p = prev - 1;
            if (p == 0 && v == last) || (p == last && v == 0) {
                return None;
            }
        }
        Some(KeyWriter::default().u16(v + 1).finish())
    }

    fn describe(&self) -> String {
        format!("no_reversal({})", self.schema.vars()[0].name())
    }

    fn shape_key(&self) -> Option<String> {
        Some(format!("no_reversal/{}", domain_sizes(&self.schema)))
    }
}

/// Declares variables without constraining them.
#[derive(Clone, Debug)]
pub struct Unconstrained {
    schema: Arc<Schema>,
}

pub fn make_unconstrained(decls: &Schema, vars: &[&str]) -> Result<Unconstrained, ModelError> {
    if vars.is_empty() {
        return Err(template_error("unconstrained", "no variables given"));
    }
    Ok(Unconstrained {
        schema: sub_schema(decls, vars)?,
    })
}

impl Monitor for Unconstrained {
    fn schema(&self) -> &Arc<Schema> {
        &self.schema
    }

    fn initial_state(&self) -> StateKey {
        Vec::new()
    }

    fn step(&self, _state: &[u8], input: &[ValueIdx]) -> Option<StateKey> {
        (input.len() == self.schema.len()).then(Vec::new)
    }

    fn describe(&self) -> String {
        format!("unconstrained({} vars)", self.schema.len())
    }

    fn shape_key(&self) -> Option<String> {
        Some(format!("unconstrained/{}", domain_sizes(&self.schema)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monitor::MonitorRef;

    fn decls(vars: &[(&str, &[&str])]) -> Schema {
        Schema::new(
            vars.iter()
                .map(|(n, d)| VariableDecl::new(*n, d.iter().copied()).unwrap())
                .collect(),
        )
        .unwrap()
    }

    /// Runs `inputs` (one value per step, single-variable monitor) and
    /// reports the first rejected step.
    fn run(m: &dyn Monitor, inputs: &[&[ValueIdx]]) -> Result<StateKey, usize> {
        let mut x = m.initial_state();
        for (t, u) in inputs.iter().enumerate() {
            x = m.step(&x, u).ok_or(t)?;
        }
        Ok(x)
    }

    #[test]
    fn recovery_window_follows_the_window() {
        let d = decls(&[("j", &["-", "f", "r"])]);
        let m = make_recovery_window(&d, "j", 2, 3).unwrap();
        // fault, noop, repair at delay 2
        assert!(run(&m, &[&[1], &[0], &[2]]).is_ok());
        // repair at delay 1 is too early
        assert_eq!(run(&m, &[&[1], &[2]]), Err(1));
        // delay 4 is too late: the third noop is rejected
        assert_eq!(run(&m, &[&[1], &[0], &[0], &[0]]), Err(3));
        // stray repair
        assert_eq!(run(&m, &[&[2]]), Err(0));
        // double fault
        assert_eq!(run(&m, &[&[1], &[1]]), Err(1));
    }

    #[test]
    fn toggle_recovery_window() {
        let d = decls(&[("j", &["-", "x"])]);
        let m = make_recovery_window(&d, "j", 2, 3).unwrap();
        assert!(run(&m, &[&[1], &[0], &[1], &[1]]).is_ok());
        assert_eq!(run(&m, &[&[1], &[1]]), Err(1));
    }

    #[test]
    fn at_most_one_of_two_busy() {
        let d = decls(&[("a", &["0", "1"]), ("b", &["0", "1"])]);
        let m: MonitorRef = Arc::new(make_at_most_k(&d, &["a", "b"], 1, &["1"], None).unwrap());
        let adm = m.admissible(&m.initial_state());
        assert_eq!(adm.len(), 3);
        assert!(adm.iter().all(|u| u.values() != [1, 1]));

        let latched: MonitorRef =
            Arc::new(make_at_most_k(&d, &["a", "b"], 1, &["1"], Some(&["1"])).unwrap());
        let x = latched.step(&latched.initial_state(), &[1, 0]).unwrap();
        let adm = latched.admissible(&x);
        // a is busy: b may not become busy unless a is released at the same step
        assert!(adm.iter().all(|u| u.values() != [0, 1]));
        assert!(adm.iter().any(|u| u.values() == [1, 1]));
    }

    #[test]
    fn degenerate_response_window() {
        let d = decls(&[("a", &["0", "1"]), ("b", &["0", "1"])]);
        let m: MonitorRef = Arc::new(
            make_response_window(
                &d,
                &EventSpec::values("a", &["1"]),
                &EventSpec::values("b", &["1"]),
                2,
                2,
            )
            .unwrap(),
        );
        let x1 = m.step(&m.initial_state(), &[1, 0]).unwrap();
        // delay 1: a response is allowed but does not count
        let x2 = m.step(&x1, &[0, 1]).unwrap();
        // delay 2: response required
        assert!(m.admissible(&x2).iter().all(|u| u.get("b") == Some("1")));
        assert_eq!(m.admissible(&x2).len(), 2);
    }

    #[test]
    fn overlapping_triggers_keep_their_own_windows() {
        let d = decls(&[("a", &["0", "1"]), ("b", &["0", "1"])]);
        let m = make_response_window(
            &d,
            &EventSpec::values("a", &["1"]),
            &EventSpec::values("b", &["1"]),
            3,
            3,
        )
        .unwrap();
        // triggers at 0 and 2, responses at 3 and 5
        let ok: [&[ValueIdx]; 6] = [&[1, 0], &[0, 0], &[1, 0], &[0, 1], &[0, 0], &[0, 1]];
        assert!(run(&m, &ok).is_ok());
        // the response at 3 leaves the trigger at 2 unanswered
        let late: [&[ValueIdx]; 6] = [&[1, 0], &[0, 0], &[1, 0], &[0, 1], &[0, 0], &[0, 0]];
        assert_eq!(run(&m, &late), Err(5));
    }

    #[test]
    fn recurrence_gaps() {
        let d = decls(&[("s", &["-", "e"])]);
        let m = make_recurrence(&d, &EventSpec::values("s", &["e"]), 2, 3).unwrap();
        assert!(run(&m, &[&[1], &[0], &[1], &[0], &[0], &[1]]).is_ok());
        assert_eq!(run(&m, &[&[1], &[1]]), Err(1));
        assert_eq!(run(&m, &[&[0], &[0], &[0]]), Err(2));
    }

    #[test]
    fn dwell_and_max_dwell() {
        let d = decls(&[("v", &["a", "b"])]);
        let dwell = make_dwell(&d, "v", 2).unwrap();
        assert!(run(&dwell, &[&[0], &[0], &[1], &[1], &[0]]).is_ok());
        assert_eq!(run(&dwell, &[&[0], &[1]]), Err(1));
        let maxd = make_max_dwell(&d, "v", 2).unwrap();
        assert_eq!(run(&maxd, &[&[0], &[0], &[0]]), Err(2));
        assert!(run(&maxd, &[&[0], &[0], &[1], &[0]]).is_ok());
    }

    #[test]
    fn step_bounded_levels() {
        let d = decls(&[("v", &["m2", "m1", "n", "p1", "p2"])]);
        let m = make_step_bounded(&d, "v", 1, &[1], 2, None).unwrap();
        assert_eq!(run(&m, &[&[3]]), Err(0));
        assert_eq!(run(&m, &[&[2], &[2], &[4]]), Err(2));
        assert!(run(&m, &[&[2], &[2], &[3], &[1]]).is_err());
        assert!(run(&m, &[&[2], &[2], &[3], &[2], &[1]]).is_ok());
    }

    #[test]
    fn no_reversal_and_no_simultaneous_change() {
        let d = decls(&[("r", &["neg", "zero", "pos"]), ("q", &["a", "b"])]);
        let m = make_no_reversal(&d, "r").unwrap();
        assert_eq!(run(&m, &[&[0], &[2]]), Err(1));
        assert!(run(&m, &[&[0], &[1], &[2]]).is_ok());
        let c = make_no_simultaneous_change(&d, &["r", "q"]).unwrap();
        assert!(c.step(&c.step(&c.initial_state(), &[0, 0]).unwrap(), &[1, 1]).is_none());
    }

    #[test]
    fn window_validation() {
        let d = decls(&[("s", &["-", "f", "r"])]);
        assert!(make_recovery_window(&d, "s", 3, 2).is_err());
        assert!(make_recovery_window(&d, "s", 0, 2).is_err());
        assert!(make_recurrence(&d, &EventSpec::values("s", &["f"]), 0, 2).is_err());
        assert!(make_response_window(
            &d,
            &EventSpec::values("s", &["f"]),
            &EventSpec::values("s", &["r"]),
            1,
            63
        )
        .is_err());
        assert!(matches!(
            make_recovery_window(&d, "nope", 1, 2),
            Err(ModelError::UnknownVariable(_))
        ));
    }
}
