use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::Arc;

use super::ast::*;
use super::{Diagnostic, ErrorCode};
use crate::error::{ModelError, SynthError};
use crate::monitor::{conjoin_all, ExplicitFsm, MonitorRef};
use crate::schema::{Schema, ValueIdx, VariableDecl};
use crate::sg::{synthesize_sg_with, ExploreLimits, ScenarioGenerator};
use crate::templates::*;

pub const TEMPLATES: [&str; 10] = [
    "recovery_window",
    "recurrence",
    "response_window",
    "at_most_k",
    "dwell",
    "max_dwell",
    "no_simultaneous_change",
    "step_bounded",
    "no_reversal",
    "unconstrained",
];

fn model_diag(span: Span, e: ModelError) -> Diagnostic {
    let code = match e {
        ModelError::UnknownVariable(_) => ErrorCode::UnknownVariable,
        ModelError::UnknownValue { .. } => ErrorCode::UnknownValue,
        ModelError::EmptyDomain(_)
        | ModelError::DuplicateValue { .. }
        | ModelError::DomainMismatch { .. }
        | ModelError::DomainTooLarge { .. } => ErrorCode::Domain,
        _ => ErrorCode::TemplateArgs,
    };
    Diagnostic::error(code, span, e.to_string())
}

/// Declared variables in declaration order. Invalid declarations are
/// reported and skipped.
pub(crate) fn declarations(spec: &Spec, diags: &mut Vec<Diagnostic>) -> Schema {
    let mut vars: Vec<VariableDecl> = Vec::new();
    for v in spec.vars() {
        if vars.iter().any(|w| w.name() == v.name.name) {
            diags.push(Diagnostic::error(
                ErrorCode::Duplicate,
                v.name.span,
                format!("variable `{}` declared more than once", v.name.name),
            ));
            continue;
        }
        if let Some((_, dup)) = v
            .values
            .iter()
            .enumerate()
            .find(|(i, x)| v.values[..*i].iter().any(|y| y.name == x.name))
        {
            diags.push(Diagnostic::error(
                ErrorCode::Domain,
                dup.span,
                format!("value `{}` listed twice in `{}`", dup.name, v.name.name),
            ));
            continue;
        }
        match VariableDecl::new(
            v.name.name.clone(),
            v.values.iter().map(|x| x.name.clone()),
        ) {
            Ok(d) => vars.push(d),
            Err(e) => diags.push(model_diag(v.name.span, e)),
        }
    }
    Schema::new(vars).expect("names checked unique")
}

/// Name resolution and template validation over a syntactically valid
/// tree.
pub(crate) fn check(spec: &Spec, diags: &mut Vec<Diagnostic>) {
    let decls = declarations(spec, diags);
    let mut names: HashMap<String, Span> = HashMap::new();
    let mut dup = |diags: &mut Vec<Diagnostic>, id: &Ident, what: &str| {
        if names.insert(id.name.clone(), id.span).is_some() {
            diags.push(Diagnostic::error(
                ErrorCode::Duplicate,
                id.span,
                format!("{what} `{}` defined more than once", id.name),
            ));
        }
    };
    // variables whose declaration was rejected; monitors over them are not
    // checked further
    let broken: HashSet<&str> = spec
        .vars()
        .map(|v| v.name.name.as_str())
        .filter(|v| decls.position(v).is_none())
        .collect();
    for m in spec.monitors() {
        dup(diags, &m.name, "monitor");
        if mentions_any(m, &broken) {
            continue;
        }
        match &m.body {
            MonitorBody::Fsm(stmts) => check_fsm(&decls, stmts, diags),
            MonitorBody::Template(call) => {
                if let Err(d) = build_template(&decls, call) {
                    diags.push(d);
                }
            }
        }
    }
    let mut default_seen = false;
    for s in spec.scenarios() {
        match &s.name {
            Some(n) => dup(diags, n, "scenario"),
            None if default_seen => diags.push(Diagnostic::error(
                ErrorCode::Duplicate,
                s.span,
                "unnamed scenario defined more than once",
            )),
            None => default_seen = true,
        }
    }
    let monitors: HashSet<&str> = spec.monitors().map(|m| m.name.name.as_str()).collect();
    let scenarios: HashMap<&str, &ScenarioDef> = spec
        .scenarios()
        .filter_map(|s| s.name.as_ref().map(|n| (n.name.as_str(), s)))
        .collect();
    for s in spec.scenarios() {
        for t in &s.terms {
            if !monitors.contains(t.name.as_str()) && !scenarios.contains_key(t.name.as_str()) {
                diags.push(Diagnostic::error(
                    ErrorCode::UnknownMonitor,
                    t.span,
                    format!("unknown monitor `{}`", t.name),
                ));
            }
        }
    }
    check_cycles(&scenarios, diags);
    let mut groups = HashSet::new();
    for g in spec.groups() {
        if !groups.insert(g.name.name.as_str()) {
            diags.push(Diagnostic::error(
                ErrorCode::Duplicate,
                g.name.span,
                format!("group `{}` defined more than once", g.name.name),
            ));
        }
        for m in &g.members {
            if !monitors.contains(m.name.as_str()) {
                diags.push(Diagnostic::error(
                    ErrorCode::UnknownMonitor,
                    m.span,
                    format!("unknown monitor `{}`", m.name),
                ));
            }
        }
    }
}

fn mentions_any(m: &MonitorDef, names: &HashSet<&str>) -> bool {
    let hit = |id: &Ident| names.contains(id.name.as_str());
    match &m.body {
        MonitorBody::Fsm(stmts) => stmts.iter().any(|st| match st {
            FsmStmt::Vars(vs) => vs.iter().any(hit),
            FsmStmt::On { pattern, .. } => pattern.iter().any(|(v, _)| hit(v)),
            FsmStmt::State { .. } => false,
        }),
        MonitorBody::Template(call) => call.args.iter().any(|a| match &a.value {
            ArgValue::Word(w) => hit(w),
            ArgValue::Set { items, .. } => items.iter().any(hit),
        }),
    }
}

fn check_cycles(scenarios: &HashMap<&str, &ScenarioDef>, diags: &mut Vec<Diagnostic>) {
    // 0 = unvisited, 1 = on stack, 2 = done
    fn visit<'a>(
        name: &'a str,
        scenarios: &HashMap<&'a str, &'a ScenarioDef>,
        mark: &mut HashMap<&'a str, u8>,
        diags: &mut Vec<Diagnostic>,
    ) {
        mark.insert(name, 1);
        for t in &scenarios[name].terms {
            let t = t.name.as_str();
            if !scenarios.contains_key(t) {
                continue;
            }
            match mark.get(t).copied().unwrap_or(0) {
                0 => visit(t, scenarios, mark, diags),
                1 => {
                    let s = scenarios[t];
                    diags.push(Diagnostic::error(
                        ErrorCode::CyclicScenario,
                        s.name.as_ref().map_or(s.span, |n| n.span),
                        format!("scenario `{t}` refers to itself"),
                    ))
                }
                _ => {}
            }
        }
        mark.insert(name, 2);
    }
    let mut mark = HashMap::new();
    let mut names: Vec<&str> = scenarios.keys().copied().collect();
    names.sort_unstable();
    for n in names {
        if mark.get(n).copied().unwrap_or(0) == 0 {
            visit(n, scenarios, &mut mark, diags);
        }
    }
}

struct FsmParts {
    schema: Arc<Schema>,
    states: Vec<String>,
    initial: String,
}

fn fsm_parts(
    decls: &Schema,
    stmts: &[FsmStmt],
    diags: &mut Vec<Diagnostic>,
) -> Option<FsmParts> {
    let before = diags.len();
    let mut used: Vec<&str> = Vec::new();
    let mut states: Vec<String> = Vec::new();
    let mut initial: Option<(String, Span)> = None;
    let mut first_state: Option<Span> = None;
    let var_ok = |diags: &mut Vec<Diagnostic>, v: &Ident| -> bool {
        if decls.position(&v.name).is_none() {
            diags.push(Diagnostic::error(
                ErrorCode::UnknownVariable,
                v.span,
                format!("unknown variable `{}`", v.name),
            ));
            return false;
        }
        true
    };
    for s in stmts {
        match s {
            FsmStmt::Vars(vs) => {
                for v in vs {
                    if var_ok(diags, v) && !used.contains(&v.name.as_str()) {
                        used.push(&v.name);
                    }
                }
            }
            FsmStmt::State { name, initial: init } => {
                first_state.get_or_insert(name.span);
                if states.contains(&name.name) {
                    diags.push(Diagnostic::error(
                        ErrorCode::FsmState,
                        name.span,
                        format!("state `{}` declared more than once", name.name),
                    ));
                }
                states.push(name.name.clone());
                if *init {
                    if initial.is_some() {
                        diags.push(Diagnostic::error(
                            ErrorCode::FsmState,
                            name.span,
                            "more than one initial state",
                        ));
                    } else {
                        initial = Some((name.name.clone(), name.span));
                    }
                }
            }
            FsmStmt::On { pattern, .. } => {
                let mut bound: Vec<&str> = Vec::new();
                for (v, x) in pattern {
                    if !var_ok(diags, v) {
                        continue;
                    }
                    if bound.contains(&v.name.as_str()) {
                        diags.push(Diagnostic::error(
                            ErrorCode::FsmState,
                            v.span,
                            format!("variable `{}` bound twice in one pattern", v.name),
                        ));
                    }
                    bound.push(&v.name);
                    let d = decls.var(&v.name).expect("checked");
                    if d.value_index(&x.name).is_none() {
                        diags.push(Diagnostic::error(
                            ErrorCode::UnknownValue,
                            x.span,
                            format!("value `{}` is not in the domain of `{}`", x.name, v.name),
                        ));
                    }
                    if !used.contains(&v.name.as_str()) {
                        used.push(&v.name);
                    }
                }
            }
        }
    }
    for s in stmts {
        if let FsmStmt::On { from, to, .. } = s {
            for st in [from, to] {
                if !states.contains(&st.name) {
                    diags.push(Diagnostic::error(
                        ErrorCode::FsmState,
                        st.span,
                        format!("unknown state `{}`", st.name),
                    ));
                }
            }
        }
    }
    if initial.is_none() {
        diags.push(Diagnostic::error(
            ErrorCode::FsmState,
            first_state.unwrap_or_default(),
            "no initial state",
        ));
    }
    if diags.len() > before {
        return None;
    }
    let mut used: Vec<&str> = used;
    used.sort_by_key(|n| decls.position(n));
    let (schema, _) = decls.restrict(&used).expect("checked");
    Some(FsmParts {
        schema: Arc::new(schema),
        states,
        initial: initial.expect("checked").0,
    })
}

fn check_fsm(decls: &Schema, stmts: &[FsmStmt], diags: &mut Vec<Diagnostic>) {
    fsm_parts(decls, stmts, diags);
}

fn build_fsm(
    decls: &Schema,
    name: &str,
    stmts: &[FsmStmt],
    diags: &mut Vec<Diagnostic>,
) -> Option<MonitorRef> {
    let parts = fsm_parts(decls, stmts, diags)?;
    let schema = parts.schema;
    let mut table: BTreeMap<(String, Vec<ValueIdx>), (String, Span)> = BTreeMap::new();
    let mut ok = true;
    for s in stmts {
        let FsmStmt::On {
            span,
            pattern,
            from,
            to,
        } = s
        else {
            continue;
        };
        let mut fixed: Vec<Option<ValueIdx>> = vec![None; schema.len()];
        for (v, x) in pattern {
            let p = schema.position(&v.name).expect("fsm variable");
            fixed[p] = schema.vars()[p].value_index(&x.name);
        }
        // wildcard expansion in declared domain order
        for u in schema.assignments() {
            if fixed.iter().zip(&u).any(|(f, &x)| f.is_some_and(|f| f != x)) {
                continue;
            }
            let key = (from.name.clone(), u);
            match table.get(&key) {
                Some((prev, _)) if *prev != to.name => {
                    diags.push(Diagnostic::error(
                        ErrorCode::Nondeterministic,
                        *span,
                        format!(
                            "nondeterministic transition from `{}` on {}: `{}` or `{}`",
                            from.name,
                            schema.format_values(&key.1),
                            prev,
                            to.name
                        ),
                    ));
                    ok = false;
                    break;
                }
                Some(_) => {}
                None => {
                    table.insert(key, (to.name.clone(), *span));
                }
            }
        }
    }
    if !ok {
        return None;
    }
    let entries = table
        .into_iter()
        .map(|((f, u), (t, _))| (f, u, t))
        .collect();
    match ExplicitFsm::from_entries(name, schema, parts.states, &parts.initial, entries) {
        Ok(m) => Some(Arc::new(m)),
        Err(e) => {
            diags.push(model_diag(Span::default(), e));
            None
        }
    }
}

struct Args<'a> {
    call: &'a TemplateCall,
    positional: Vec<&'a ArgValue>,
    keywords: Vec<(&'a Ident, &'a ArgValue)>,
}

impl<'a> Args<'a> {
    fn new(call: &'a TemplateCall) -> Result<Self, Diagnostic> {
        let mut positional = Vec::new();
        let mut keywords: Vec<(&Ident, &ArgValue)> = Vec::new();
        for a in &call.args {
            match &a.key {
                None if !keywords.is_empty() => {
                    return Err(Self::err_at(
                        a.value.span(),
                        "positional argument after keyword argument",
                    ))
                }
                None => positional.push(&a.value),
                Some(k) => {
                    if keywords.iter().any(|(q, _)| q.name == k.name) {
                        return Err(Self::err_at(
                            k.span,
                            format!("argument `{}` given twice", k.name),
                        ));
                    }
                    keywords.push((k, &a.value));
                }
            }
        }
        Ok(Self {
            call,
            positional,
            keywords,
        })
    }

    fn err_at(span: Span, msg: impl Into<String>) -> Diagnostic {
        Diagnostic::error(ErrorCode::TemplateArgs, span, msg.into())
    }

    fn err(&self, msg: impl Into<String>) -> Diagnostic {
        Self::err_at(
            self.call.template.span,
            format!("{}: {}", self.call.template.name, msg.into()),
        )
    }

    /// Checks arity and keyword names.
    fn expect(&self, min: usize, max: usize, keywords: &[&str]) -> Result<(), Diagnostic> {
        let n = self.positional.len();
        if n < min || n > max {
            let want = if min == max {
                format!("{min}")
            } else {
                format!("{min} to {max}")
            };
            return Err(self.err(format!("expected {want} positional arguments, got {n}")));
        }
        for (k, _) in &self.keywords {
            if !keywords.contains(&k.name.as_str()) {
                return Err(Self::err_at(
                    k.span,
                    format!(
                        "{} has no argument `{}`",
                        self.call.template.name, k.name
                    ),
                ));
            }
        }
        Ok(())
    }

    fn word_of(v: &'a ArgValue, what: &str) -> Result<&'a Ident, Diagnostic> {
        match v {
            ArgValue::Word(w) => Ok(w),
            ArgValue::Set { span, .. } => Err(Self::err_at(*span, format!("expected {what}"))),
        }
    }

    fn set_of(v: &'a ArgValue, what: &str) -> Result<Vec<&'a Ident>, Diagnostic> {
        match v {
            ArgValue::Set { items, span } => {
                if items.is_empty() {
                    return Err(Self::err_at(*span, format!("{what} must not be empty")));
                }
                Ok(items.iter().collect())
            }
            ArgValue::Word(w) => Ok(vec![w]),
        }
    }

    fn number_of(v: &'a ArgValue, what: &str) -> Result<u32, Diagnostic> {
        let w = Self::word_of(v, what)?;
        w.name
            .parse()
            .map_err(|_| Self::err_at(w.span, format!("expected {what}, found `{}`", w.name)))
    }

    fn word(&self, i: usize, what: &str) -> Result<&'a Ident, Diagnostic> {
        Self::word_of(self.positional[i], what)
    }

    fn number(&self, i: usize, what: &str) -> Result<u32, Diagnostic> {
        Self::number_of(self.positional[i], what)
    }

    fn set(&self, i: usize, what: &str) -> Result<Vec<&'a Ident>, Diagnostic> {
        Self::set_of(self.positional[i], what)
    }

    fn kw(&self, name: &str) -> Option<&'a ArgValue> {
        self.keywords
            .iter()
            .find(|(k, _)| k.name == name)
            .map(|(_, v)| *v)
    }

    fn kw_word(&self, name: &str) -> Result<Option<&'a Ident>, Diagnostic> {
        self.kw(name).map(|v| Self::word_of(v, name)).transpose()
    }

    fn kw_bool(&self, name: &str) -> Result<Option<bool>, Diagnostic> {
        let Some(w) = self.kw_word(name)? else {
            return Ok(None);
        };
        match w.name.as_str() {
            "true" => Ok(Some(true)),
            "false" => Ok(Some(false)),
            other => Err(Self::err_at(
                w.span,
                format!("expected `true` or `false`, found `{other}`"),
            )),
        }
    }

    /// Event on `var`: `change`, a value set, or the non-default values.
    fn event(&self, name: &str, decls: &Schema, var: &Ident) -> Result<EventSpec, Diagnostic> {
        match self.kw(name) {
            None => {
                let d = decls.var(&var.name).map_err(|e| model_diag(var.span, e))?;
                Ok(EventSpec::non_default(d))
            }
            Some(ArgValue::Word(w)) if w.name == "change" => Ok(EventSpec::change(&var.name)),
            Some(v) => {
                let values = Self::set_of(v, name)?;
                let values: Vec<&str> = values.iter().map(|i| i.name.as_str()).collect();
                Ok(EventSpec::values(&var.name, &values))
            }
        }
    }
}

fn names<'a>(ids: &[&'a Ident]) -> Vec<&'a str> {
    ids.iter().map(|i| i.name.as_str()).collect()
}

/// Instantiates a template call against the declared variables.
pub fn build_template(decls: &Schema, call: &TemplateCall) -> Result<MonitorRef, Diagnostic> {
    let a = Args::new(call)?;
    let at = call.template.span;
    let m = |r: Result<MonitorRef, ModelError>| r.map_err(|e| model_diag(at, e));
    match call.template.name.as_str() {
        "recovery_window" => {
            a.expect(3, 3, &["fault", "repair", "shared_repair"])?;
            let v = a.word(0, "variable")?;
            let (wmin, wmax) = (a.number(1, "window minimum")?, a.number(2, "window maximum")?);
            let d = decls.var(&v.name).map_err(|e| model_diag(v.span, e))?;
            if d.len() < 2 {
                return Err(a.err("variable needs at least two values"));
            }
            let fault = a
                .kw_word("fault")?
                .map_or_else(|| d.value(1).to_string(), |w| w.name.clone());
            let repair = a.kw_word("repair")?.map_or_else(
                || d.value((d.len() - 1) as ValueIdx).to_string(),
                |w| w.name.clone(),
            );
            let shared = a.kw_bool("shared_repair")?.unwrap_or(false);
            m(RecoveryWindow::new(decls, &v.name, wmin, wmax, &fault, &repair, shared)
                .map(|x| Arc::new(x) as MonitorRef))
        }
        "recurrence" => {
            a.expect(3, 3, &["on"])?;
            let v = a.word(0, "variable")?;
            let ev = a.event("on", decls, v)?;
            m(make_recurrence(decls, &ev, a.number(1, "period minimum")?, a.number(2, "period maximum")?)
                .map(|x| Arc::new(x) as MonitorRef))
        }
        "response_window" => {
            a.expect(4, 4, &["trigger", "response"])?;
            let vt = a.word(0, "trigger variable")?;
            let vr = a.word(1, "response variable")?;
            let trig = a.event("trigger", decls, vt)?;
            let resp = a.event("response", decls, vr)?;
            m(make_response_window(
                decls,
                &trig,
                &resp,
                a.number(2, "delay minimum")?,
                a.number(3, "delay maximum")?,
            )
            .map(|x| Arc::new(x) as MonitorRef))
        }
        "at_most_k" => {
            a.expect(2, 2, &["busy", "release"])?;
            let vars = a.set(0, "variable set")?;
            let k = a.number(1, "bound")?;
            let busy = match a.kw("busy") {
                Some(v) => Args::set_of(v, "busy")?,
                None => return Err(a.err("missing argument `busy`")),
            };
            let release = a.kw("release").map(|v| Args::set_of(v, "release")).transpose()?;
            let release_names = release.as_ref().map(|r| names(r));
            m(make_at_most_k(
                decls,
                &names(&vars),
                k as usize,
                &names(&busy),
                release_names.as_deref(),
            )
            .map(|x| Arc::new(x) as MonitorRef))
        }
        "dwell" | "max_dwell" => {
            a.expect(2, 2, &[])?;
            let v = a.word(0, "variable")?;
            let d = a.number(1, "duration")?;
            let r = if call.template.name == "dwell" {
                make_dwell(decls, &v.name, d)
            } else {
                make_max_dwell(decls, &v.name, d)
            };
            m(r.map(|x| Arc::new(x) as MonitorRef))
        }
        "no_simultaneous_change" => {
            a.expect(1, 1, &[])?;
            let vars = a.set(0, "variable set")?;
            m(make_no_simultaneous_change(decls, &names(&vars)).map(|x| Arc::new(x) as MonitorRef))
        }
        "step_bounded" => {
            a.expect(4, 4, &["nominal"])?;
            let v = a.word(0, "variable")?;
            let band = a.number(1, "band")?;
            let steps = a
                .set(2, "step sizes")?
                .into_iter()
                .map(|s| {
                    s.name.parse::<u32>().map_err(|_| {
                        Args::err_at(s.span, format!("expected step size, found `{}`", s.name))
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            let warmup = a.number(3, "warm-up")?;
            let nominal = a.kw_word("nominal")?.map(|w| w.name.as_str());
            m(make_step_bounded(decls, &v.name, band, &steps, warmup, nominal)
                .map(|x| Arc::new(x) as MonitorRef))
        }
        "no_reversal" => {
            a.expect(1, 1, &[])?;
            let v = a.word(0, "variable")?;
            m(make_no_reversal(decls, &v.name).map(|x| Arc::new(x) as MonitorRef))
        }
        "unconstrained" => {
            a.expect(1, usize::MAX, &[])?;
            let mut vars = Vec::new();
            for i in 0..a.positional.len() {
                vars.extend(a.set(i, "variable")?);
            }
            m(make_unconstrained(decls, &names(&vars)).map(|x| Arc::new(x) as MonitorRef))
        }
        other => Err(Diagnostic::error(
            ErrorCode::UnknownTemplate,
            at,
            format!("unknown template `{other}`"),
        )),
    }
}

/// A set of monitors over variables shared with no other factor.
#[derive(Clone, Debug)]
pub struct Factor {
    pub members: Vec<String>,
    pub monitor: MonitorRef,
}

#[derive(Clone, Debug)]
pub struct Compiled {
    pub scenario: String,
    pub factors: Vec<Factor>,
    /// Reporting hints: group name and member monitors.
    pub groups: Vec<(String, Vec<String>)>,
}

impl Compiled {
    /// All factors conjoined into one monitor, in factor order.
    pub fn conjoined(&self) -> Result<MonitorRef, ModelError> {
        let parts: Vec<MonitorRef> = self.factors.iter().map(|f| f.monitor.clone()).collect();
        conjoin_all(&parts)
    }

    pub fn schema(&self) -> Schema {
        Schema::concat(self.factors.iter().map(|f| f.monitor.schema().as_ref()))
            .expect("factors are disjoint")
    }

    /// Synthesizes one generator per factor. Factors made of a single
    /// template with the shape of an earlier factor reuse its generator
    /// under their own variable names.
    pub fn synthesize(
        &self,
        limits: ExploreLimits,
    ) -> Result<Vec<SynthesizedFactor>, (usize, SynthError)> {
        let mut cache: HashMap<String, Arc<ScenarioGenerator>> = HashMap::new();
        let mut out = Vec::with_capacity(self.factors.len());
        for (i, f) in self.factors.iter().enumerate() {
            let shape = match f.members.len() {
                1 => f.monitor.shape_key(),
                _ => None,
            };
            if let Some(sg) = shape.as_ref().and_then(|k| cache.get(k)) {
                let renamed = sg
                    .renamed(f.monitor.schema().clone(), f.monitor.describe())
                    .map_err(|e| (i, SynthError::Model(e)))?;
                out.push(SynthesizedFactor {
                    members: f.members.clone(),
                    sg: Arc::new(renamed),
                    reused: true,
                });
                continue;
            }
            let sg = Arc::new(synthesize_sg_with(f.monitor.as_ref(), limits).map_err(|e| (i, e))?);
            if let Some(k) = shape {
                cache.insert(k, sg.clone());
            }
            out.push(SynthesizedFactor {
                members: f.members.clone(),
                sg,
                reused: false,
            });
        }
        Ok(out)
    }
}

#[derive(Clone, Debug)]
pub struct SynthesizedFactor {
    pub members: Vec<String>,
    pub sg: Arc<ScenarioGenerator>,
    pub reused: bool,
}

fn select_scenario<'a>(
    spec: &'a Spec,
    name: Option<&str>,
) -> Result<&'a ScenarioDef, Diagnostic> {
    let all: Vec<&ScenarioDef> = spec.scenarios().collect();
    let pick = match name {
        Some(n) => all
            .iter()
            .find(|s| s.name.as_ref().is_some_and(|x| x.name == n))
            .copied()
            .ok_or_else(|| format!("no scenario named `{n}`")),
        None => all
            .iter()
            .find(|s| s.name.is_none())
            .copied()
            .or(if all.len() == 1 { Some(all[0]) } else { None })
            .ok_or_else(|| {
                if all.is_empty() {
                    "the specification defines no scenario".to_string()
                } else {
                    "several named scenarios and no unnamed one; select one by name".to_string()
                }
            }),
    };
    pick.map_err(|msg| Diagnostic::error(ErrorCode::NoScenario, Span { line: 1, col: 1 }, msg))
}

fn flatten<'a>(
    s: &'a ScenarioDef,
    scenarios: &HashMap<&str, &'a ScenarioDef>,
    out: &mut Vec<&'a Ident>,
    depth: usize,
) {
    if depth > scenarios.len() + 1 {
        return;
    }
    for t in &s.terms {
        match scenarios.get(t.name.as_str()) {
            Some(inner) => flatten(inner, scenarios, out, depth + 1),
            None => {
                if !out.iter().any(|o| o.name == t.name) {
                    out.push(t);
                }
            }
        }
    }
}

/// Conjunction order keeping intermediate products small: after the first
/// monitor, repeatedly take the one adding the fewest new input
/// combinations, earliest first on ties.
fn fold_order(mut rest: Vec<&MonitorRef>) -> Vec<MonitorRef> {
    let mut out: Vec<MonitorRef> = Vec::with_capacity(rest.len());
    let mut seen: HashSet<String> = HashSet::new();
    while !rest.is_empty() {
        let pick = if out.is_empty() {
            0
        } else {
            let added = |m: &MonitorRef| -> f64 {
                m.schema()
                    .vars()
                    .iter()
                    .filter(|v| !seen.contains(v.name()))
                    .map(|v| (v.len() as f64).ln())
                    .sum()
            };
            (0..rest.len())
                .min_by(|&a, &b| added(rest[a]).total_cmp(&added(rest[b])).then(a.cmp(&b)))
                .expect("non-empty")
        };
        let m = rest.remove(pick);
        seen.extend(m.schema().names().map(str::to_string));
        out.push(m.clone());
    }
    out
}

/// Builds the monitors of `scenario` (the unnamed one when `None`) and
/// groups them into independent factors.
pub fn compile(spec: &Spec, scenario: Option<&str>) -> Result<Compiled, Vec<Diagnostic>> {
    let mut diags = Vec::new();
    check(spec, &mut diags);
    if !diags.is_empty() {
        return Err(diags);
    }
    let decls = declarations(spec, &mut diags);
    let chosen = select_scenario(spec, scenario).map_err(|d| vec![d])?;
    let scenarios: HashMap<&str, &ScenarioDef> = spec
        .scenarios()
        .filter_map(|s| s.name.as_ref().map(|n| (n.name.as_str(), s)))
        .collect();
    let mut terms = Vec::new();
    flatten(chosen, &scenarios, &mut terms, 0);

    let defs: HashMap<&str, &MonitorDef> =
        spec.monitors().map(|m| (m.name.name.as_str(), m)).collect();
    let mut monitors: Vec<(String, MonitorRef)> = Vec::new();
    for t in &terms {
        let def = defs[t.name.as_str()];
        let built = match &def.body {
            MonitorBody::Fsm(stmts) => build_fsm(&decls, &def.name.name, stmts, &mut diags),
            MonitorBody::Template(call) => match build_template(&decls, call) {
                Ok(m) => Some(m),
                Err(d) => {
                    diags.push(d);
                    None
                }
            },
        };
        if let Some(m) = built {
            monitors.push((def.name.name.clone(), m));
        }
    }
    if !diags.is_empty() {
        return Err(diags);
    }

    // union-find over shared variables
    let n = monitors.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut owner: HashMap<String, usize> = HashMap::new();
    for (i, (_, m)) in monitors.iter().enumerate() {
        for v in m.schema().names() {
            match owner.get(v) {
                Some(&j) => {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
                None => {
                    owner.insert(v.to_string(), i);
                }
            }
        }
    }
    let mut order: Vec<usize> = Vec::new();
    let mut members: HashMap<usize, Vec<usize>> = HashMap::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        if !members.contains_key(&r) {
            order.push(r);
        }
        members.entry(r).or_default().push(i);
    }
    let mut factors = Vec::with_capacity(order.len());
    for r in order {
        let idx = &members[&r];
        let parts: Vec<MonitorRef> = fold_order(idx.iter().map(|&i| &monitors[i].1).collect());
        let monitor = conjoin_all(&parts).map_err(|e| vec![model_diag(chosen.span, e)])?;
        factors.push(Factor {
            members: idx.iter().map(|&i| monitors[i].0.clone()).collect(),
            monitor,
        });
    }
    let groups = spec
        .groups()
        .map(|g| {
            (
                g.name.name.clone(),
                g.members.iter().map(|m| m.name.clone()).collect(),
            )
        })
        .collect();
    Ok(Compiled {
        scenario: chosen
            .name
            .as_ref()
            .map_or_else(|| "default".to_string(), |n| n.name.clone()),
        factors,
        groups,
    })
}

/// Declared variables that no monitor of any scenario uses, and monitors
/// that no scenario references.
pub fn lint(spec: &Spec) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let referenced: HashSet<&str> = spec
        .scenarios()
        .flat_map(|s| s.terms.iter().map(|t| t.name.as_str()))
        .collect();
    for m in spec.monitors() {
        if !referenced.contains(m.name.name.as_str()) {
            out.push(Diagnostic::warning(
                ErrorCode::Unused,
                m.name.span,
                format!("monitor `{}` is not used by any scenario", m.name.name),
            ));
        }
    }
    out
}
