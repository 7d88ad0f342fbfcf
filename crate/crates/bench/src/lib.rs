//! Fixtures shared by the benchmarks.

use std::sync::Arc;

use scengen::casestudy::{BuiltScenario, CaseStudy};
use scengen::{ExploreLimits, ScenarioGenerator};

/// Builds a shipped scenario; panics when it has no trace.
pub fn scenario(case: CaseStudy, name: &str) -> BuiltScenario {
    let compiled = case.compile(name).expect("shipped scenario compiles");
    BuiltScenario::build(compiled, ExploreLimits::default()).expect("scenario has traces")
}

/// The single generator of a one-factor scenario.
pub fn single(case: CaseStudy, name: &str) -> Arc<ScenarioGenerator> {
    let b = scenario(case, name);
    assert_eq!(b.factors.len(), 1, "{case} {name} has several factors");
    b.factors[0].clone()
}
