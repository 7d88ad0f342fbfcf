//! Shipped case studies and the experiment grid over their generators.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::count::{count_paths, TraceSource};
use crate::dsl::{self, Compiled, Diagnostic, Spec};
use crate::error::SynthError;
use crate::product::SgTuple;
use crate::sample::{ratio_to_f64, rng_from_seed, uniform_below};
use crate::sg::{explore, ExploreLimits, ScenarioGenerator};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CaseStudy {
    Fcs,
    Bdc,
    Alma,
}

/// One generator of a case study.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CatalogEntry {
    pub sg: u32,
    pub scenario: &'static str,
    /// Constraint monitors on top of the assumptions, e.g. `1+4+5`.
    pub constraints: &'static str,
    /// Scenario with the same assumptions and no constraint.
    pub baseline: &'static str,
}

const fn entry(
    sg: u32,
    scenario: &'static str,
    constraints: &'static str,
    baseline: &'static str,
) -> CatalogEntry {
    CatalogEntry {
        sg,
        scenario,
        constraints,
        baseline,
    }
}

const FCS: [CatalogEntry; 7] = [
    entry(1, "sg1", "-", "sg1"),
    entry(2, "sg2", "1", "sg1"),
    entry(3, "sg3", "1+3", "sg1"),
    entry(4, "sg4", "1+2", "sg1"),
    entry(5, "sg5", "1+4", "sg1"),
    entry(6, "sg6", "1+4+5", "sg1"),
    entry(7, "sg7", "1+4+6", "sg1"),
];

const BDC: [CatalogEntry; 11] = [
    entry(1, "sg1", "-", "sg1"),
    entry(2, "sg2", "-", "sg2"),
    entry(3, "sg3", "-", "sg3"),
    entry(4, "sg4", "1", "sg1"),
    entry(5, "sg5", "2", "sg1"),
    entry(6, "sg6", "3", "sg2"),
    entry(7, "sg7", "4", "sg2"),
    entry(8, "sg8", "5", "sg3"),
    entry(9, "sg9", "2+4+5", "sg3"),
    entry(10, "sg10", "2+4+5+6", "sg3"),
    entry(11, "sg11", "1+3+5+7", "sg3"),
];

const ALMA: [CatalogEntry; 9] = [
    entry(1, "sg1", "-", "sg1"),
    entry(2, "sg2", "1", "sg1"),
    entry(4, "sg4", "1+3", "sg1"),
    entry(5, "sg5", "1+3+4", "sg1"),
    entry(6, "sg6", "1+3+5", "sg1"),
    entry(7, "sg7", "-", "sg7"),
    entry(8, "sg8", "6", "sg7"),
    entry(9, "sg9", "6+7", "sg7"),
    entry(10, "sg10", "1+3+4+6+7", "assumptions"),
];

impl CaseStudy {
    pub const ALL: [CaseStudy; 3] = [CaseStudy::Fcs, CaseStudy::Bdc, CaseStudy::Alma];

    pub fn id(self) -> &'static str {
        match self {
            CaseStudy::Fcs => "fcs",
            CaseStudy::Bdc => "bdc",
            CaseStudy::Alma => "alma",
        }
    }

    /// Text of the shipped `.mon` file.
    pub fn source(self) -> &'static str {
        match self {
            CaseStudy::Fcs => include_str!("../casestudies/fcs.mon"),
            CaseStudy::Bdc => include_str!("../casestudies/bdc.mon"),
            CaseStudy::Alma => include_str!("../casestudies/alma.mon"),
        }
    }

    pub fn catalog(self) -> &'static [CatalogEntry] {
        match self {
            CaseStudy::Fcs => &FCS,
            CaseStudy::Bdc => &BDC,
            CaseStudy::Alma => &ALMA,
        }
    }

    pub fn entry(self, sg: u32) -> Option<&'static CatalogEntry> {
        self.catalog().iter().find(|e| e.sg == sg)
    }

    pub fn sg_numbers(self) -> Vec<u32> {
        self.catalog().iter().map(|e| e.sg).collect()
    }

    pub fn spec(self) -> Result<Spec, Vec<Diagnostic>> {
        dsl::parse(self.source())
    }

    pub fn compile(self, scenario: &str) -> Result<Compiled, CaseError> {
        let spec = self.spec().map_err(|d| CaseError::Dsl {
            case: self,
            diagnostics: d,
        })?;
        dsl::compile(&spec, Some(scenario)).map_err(|d| CaseError::Dsl {
            case: self,
            diagnostics: d,
        })
    }
}

impl fmt::Display for CaseStudy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for CaseStudy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CaseStudy::ALL
            .into_iter()
            .find(|c| c.id().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown case study `{s}` (expected fcs, bdc or alma)"))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CaseError {
    #[error("{case}: {}", join_diagnostics(.diagnostics))]
    Dsl {
        case: CaseStudy,
        diagnostics: Vec<Diagnostic>,
    },
    #[error("{0} has no generator number {1}")]
    UnknownSg(CaseStudy, u32),
    #[error("{case} generator {sg}: {source}")]
    Synth {
        case: CaseStudy,
        sg: u32,
        source: SynthError,
    },
    #[error("{0}")]
    Count(#[from] crate::error::CountError),
}

fn join_diagnostics(d: &[Diagnostic]) -> String {
    d.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

/// A compiled scenario with one generator per independent factor.
#[derive(Clone, Debug)]
pub struct BuiltScenario {
    pub compiled: Compiled,
    pub factors: Vec<Arc<ScenarioGenerator>>,
    /// Number of factors whose generator was reused from an identical one.
    pub reused: usize,
    pub seconds: f64,
}

impl BuiltScenario {
    pub fn build(compiled: Compiled, limits: ExploreLimits) -> Result<Self, SynthError> {
        let start = Instant::now();
        let synth = compiled.synthesize(limits).map_err(|(_, e)| e)?;
        let reused = synth.iter().filter(|f| f.reused).count();
        Ok(Self {
            compiled,
            factors: synth.into_iter().map(|f| f.sg).collect(),
            reused,
            seconds: start.elapsed().as_secs_f64(),
        })
    }

    /// Product of the factor alphabet sizes.
    pub fn input_space(&self) -> BigUint {
        self.factors
            .iter()
            .map(|f| BigUint::from(f.alphabet_size()))
            .product()
    }

    pub fn tuple(&self) -> SgTuple {
        SgTuple::new(self.factors.clone()).expect("factors are disjoint")
    }
}

/// Number of length-`h` paths of each factor's unpruned monitor, multiplied.
/// Factors with equal shape share one exploration.
pub fn unpruned_counts(
    compiled: &Compiled,
    horizons: &[usize],
    limits: ExploreLimits,
) -> Result<Vec<BigUint>, SynthError> {
    let mut cache: HashMap<String, Vec<BigUint>> = HashMap::new();
    let mut acc = vec![BigUint::one(); horizons.len()];
    for f in &compiled.factors {
        let shape = (f.members.len() == 1)
            .then(|| f.monitor.shape_key())
            .flatten();
        let counts = match shape.as_ref().and_then(|k| cache.get(k)) {
            Some(c) => c.clone(),
            None => {
                let g = explore(f.monitor.as_ref(), limits)?;
                let c: Vec<BigUint> = horizons.iter().map(|&h| count_paths(&g, h)).collect();
                if let Some(k) = shape {
                    cache.insert(k, c.clone());
                }
                c
            }
        };
        for (a, c) in acc.iter_mut().zip(counts) {
            *a *= c;
        }
    }
    Ok(acc)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentRow {
    pub case_study: String,
    pub sg: u32,
    pub constraints: String,
    pub horizon: usize,
    pub factors: usize,
    pub input_space: String,
    /// Exact decimal count, absent when the scenario has no trace.
    pub nb_traces: Option<String>,
    /// Wall-clock seconds to synthesize all factors (nondeterministic).
    pub synth_seconds: Option<f64>,
    /// Mean wall-clock microseconds per extraction, table building included
    /// (nondeterministic).
    pub extraction_us: Option<f64>,
    pub constraint_selectivity: Option<f64>,
    pub sg_selectivity: Option<f64>,
    pub status: String,
}

impl ExperimentRow {
    pub const HEADER: [&'static str; 12] = [
        "case_study",
        "sg",
        "constraints",
        "horizon",
        "factors",
        "input_space",
        "nb_traces",
        "synth_seconds",
        "extraction_us",
        "constraint_selectivity",
        "sg_selectivity",
        "status",
    ];

    pub fn record(&self) -> Vec<String> {
        fn opt<T: ToString>(v: &Option<T>) -> String {
            v.as_ref().map_or_else(String::new, ToString::to_string)
        }
        vec![
            self.case_study.clone(),
            self.sg.to_string(),
            self.constraints.clone(),
            self.horizon.to_string(),
            self.factors.to_string(),
            self.input_space.clone(),
            opt(&self.nb_traces),
            opt(&self.synth_seconds),
            opt(&self.extraction_us),
            opt(&self.constraint_selectivity),
            opt(&self.sg_selectivity),
            self.status.clone(),
        ]
    }
}

#[derive(Clone, Copy, Debug)]
pub struct GridOptions {
    /// Uniform extractions per (generator, horizon) for the timing column.
    pub extractions: usize,
    pub seed: u64,
    pub limits: ExploreLimits,
    /// Run generators in parallel.
    pub parallel: bool,
}

impl Default for GridOptions {
    fn default() -> Self {
        Self {
            extractions: 1000,
            seed: 0,
            limits: ExploreLimits::default(),
            parallel: true,
        }
    }
}

/// Mean seconds per extraction over `n` uniform draws at horizon `h`,
/// counting the tables built for them.
pub fn amortized_extraction(
    built: &BuiltScenario,
    h: usize,
    n: usize,
    seed: u64,
) -> Result<f64, crate::error::CountError> {
    let start = Instant::now();
    let mut tuple = built.tuple();
    tuple.prepare(h)?;
    let total = tuple.count(h)?;
    if total.is_zero() || n == 0 {
        return Ok(0.0);
    }
    let mut rng = rng_from_seed(seed);
    for _ in 0..n {
        let i = uniform_below(&mut rng, &total);
        std::hint::black_box(tuple.unrank(&i, h)?);
    }
    Ok(start.elapsed().as_secs_f64() / n as f64)
}

struct Baseline {
    counts: Vec<BigUint>,
}

fn scenario_counts(
    case: CaseStudy,
    scenario: &str,
    horizons: &[usize],
    limits: ExploreLimits,
) -> Result<Option<Baseline>, CaseError> {
    let compiled = case.compile(scenario)?;
    let built = match BuiltScenario::build(compiled, limits) {
        Ok(b) => b,
        Err(SynthError::NoTraces) => return Ok(None),
        Err(source) => return Err(CaseError::Synth { case, sg: 0, source }),
    };
    let mut t = built.tuple();
    let hmax = horizons.iter().copied().max().unwrap_or(0);
    t.prepare(hmax)?;
    let counts = horizons
        .iter()
        .map(|&h| t.count(h))
        .collect::<Result<_, _>>()?;
    Ok(Some(Baseline { counts }))
}

fn grid_rows(
    case: CaseStudy,
    entry: &CatalogEntry,
    horizons: &[usize],
    baseline: Option<&Baseline>,
    opts: &GridOptions,
) -> Result<Vec<ExperimentRow>, CaseError> {
    let compiled = case.compile(entry.scenario)?;
    let base_row = |h: usize| ExperimentRow {
        case_study: case.id().to_string(),
        sg: entry.sg,
        constraints: entry.constraints.to_string(),
        horizon: h,
        factors: compiled.factors.len(),
        input_space: String::new(),
        nb_traces: None,
        synth_seconds: None,
        extraction_us: None,
        constraint_selectivity: None,
        sg_selectivity: None,
        status: "ok".to_string(),
    };
    let built = match BuiltScenario::build(compiled.clone(), opts.limits) {
        Ok(b) => b,
        Err(SynthError::NoTraces) => {
            return Ok(horizons
                .iter()
                .map(|&h| ExperimentRow {
                    status: "no-traces".into(),
                    ..base_row(h)
                })
                .collect())
        }
        Err(source) => {
            return Err(CaseError::Synth {
                case,
                sg: entry.sg,
                source,
            })
        }
    };
    let unpruned = unpruned_counts(&built.compiled, horizons, opts.limits).map_err(|source| {
        CaseError::Synth {
            case,
            sg: entry.sg,
            source,
        }
    })?;
    let mut tuple = built.tuple();
    let hmax = horizons.iter().copied().max().unwrap_or(0);
    tuple.prepare(hmax)?;
    let input_space = built.input_space().to_string();
    let mut rows = Vec::with_capacity(horizons.len());
    for (k, &h) in horizons.iter().enumerate() {
        let n = tuple.count(h)?;
        let sel = |num: &BigUint, den: &BigUint| {
            (!den.is_zero()).then(|| ratio_to_f64(&Ratio::new(num.clone(), den.clone())))
        };
        let secs = amortized_extraction(&built, h, opts.extractions, opts.seed)?;
        rows.push(ExperimentRow {
            input_space: input_space.clone(),
            synth_seconds: Some(built.seconds),
            extraction_us: Some(secs * 1e6),
            constraint_selectivity: baseline.and_then(|b| sel(&n, &b.counts[k])),
            sg_selectivity: sel(&n, &unpruned[k]),
            nb_traces: Some(n.to_string()),
            ..base_row(h)
        });
    }
    Ok(rows)
}

/// One row per (generator, horizon), generators in the order given.
/// Scenarios without traces yield rows flagged `no-traces`.
pub fn run_grid(
    case: CaseStudy,
    sgs: &[u32],
    horizons: &[usize],
    opts: &GridOptions,
) -> Result<Vec<ExperimentRow>, CaseError> {
    let entries = sgs
        .iter()
        .map(|&sg| case.entry(sg).ok_or(CaseError::UnknownSg(case, sg)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut baselines: HashMap<&str, Option<Baseline>> = HashMap::new();
    for e in &entries {
        if !baselines.contains_key(e.baseline) {
            let b = scenario_counts(case, e.baseline, horizons, opts.limits)?;
            baselines.insert(e.baseline, b);
        }
    }
    let one = |e: &&CatalogEntry| {
        let b = baselines.get(e.baseline).and_then(Option::as_ref);
        grid_rows(case, e, horizons, b, opts)
    };
    let per_sg: Vec<Result<Vec<ExperimentRow>, CaseError>> = if opts.parallel {
        entries.par_iter().map(one).collect()
    } else {
        entries.iter().map(one).collect()
    };
    let mut rows = Vec::new();
    for r in per_sg {
        rows.extend(r?);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalogs_name_existing_scenarios() {
        for case in CaseStudy::ALL {
            let spec = case.spec().unwrap();
            for e in case.catalog() {
                for s in [e.scenario, e.baseline] {
                    dsl::compile(&spec, Some(s)).unwrap();
                }
            }
            dsl::compile(&spec, None).unwrap();
        }
    }

    #[test]
    fn parse_case_names() {
        assert_eq!("FCS".parse::<CaseStudy>().unwrap(), CaseStudy::Fcs);
        assert!("xyz".parse::<CaseStudy>().is_err());
    }

    #[test]
    fn fcs_input_space() {
        let c = CaseStudy::Fcs.compile("sg1").unwrap();
        let b = BuiltScenario::build(c, ExploreLimits::default()).unwrap();
        assert_eq!(b.input_space(), BigUint::from(6u32));
    }

    #[test]
    fn small_grid() {
        let opts = GridOptions {
            extractions: 10,
            ..GridOptions::default()
        };
        let rows = run_grid(CaseStudy::Fcs, &[1, 2], &[5, 10], &opts).unwrap();
        assert_eq!(rows.len(), 4);
        for r in &rows {
            let s = r.sg_selectivity.unwrap();
            assert!(s > 0.0 && s <= 1.0);
        }
        assert_eq!(rows[0].constraint_selectivity, Some(1.0));
    }
}
