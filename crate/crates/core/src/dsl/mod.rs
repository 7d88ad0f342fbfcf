//! Text format for monitor specifications.
//!
//! ```text
//! #! scengen-dsl v1
//! var mode in {idle, run, fault}
//! monitor spin = dwell(mode, 2)
//! monitor m fsm {
//!   state a initial;
//!   on mode=fault from a to a;
//! }
//! scenario = spin & m
//! ```

pub mod ast;
mod compile;
mod lexer;
mod parser;
mod printer;

use std::fmt;

use serde::Serialize;

pub use ast::{Span, Spec};
pub use compile::{build_template, compile, lint, Compiled, Factor, SynthesizedFactor, TEMPLATES};
pub use printer::pretty_print;

/// Required first line of every specification.
pub const PRAGMA: &str = "#! scengen-dsl v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ErrorCode {
    Syntax,
    Pragma,
    Duplicate,
    UnknownMonitor,
    UnknownTemplate,
    UnknownVariable,
    UnknownValue,
    TemplateArgs,
    Nondeterministic,
    Domain,
    FsmState,
    NoScenario,
    CyclicScenario,
    Unused,
}

impl ErrorCode {
    pub fn code(self) -> &'static str {
        match self {
            ErrorCode::Syntax => "E001",
            ErrorCode::Pragma => "E002",
            ErrorCode::Duplicate => "E003",
            ErrorCode::UnknownMonitor => "E004",
            ErrorCode::UnknownTemplate => "E005",
            ErrorCode::UnknownVariable => "E006",
            ErrorCode::UnknownValue => "E007",
            ErrorCode::TemplateArgs => "E008",
            ErrorCode::Nondeterministic => "E009",
            ErrorCode::Domain => "E010",
            ErrorCode::FsmState => "E011",
            ErrorCode::NoScenario => "E012",
            ErrorCode::CyclicScenario => "E013",
            ErrorCode::Unused => "W001",
        }
    }
}

impl Serialize for ErrorCode {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.code())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub line: u32,
    pub col: u32,
    pub message: String,
    pub code: ErrorCode,
}

impl Diagnostic {
    pub fn error(code: ErrorCode, span: Span, message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Error,
            line: span.line,
            col: span.col,
            message: message.into(),
            code,
        }
    }

    pub fn warning(code: ErrorCode, span: Span, message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Warning,
            ..Self::error(code, span, message)
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(
            f,
            "{}:{}: {sev}[{}]: {}",
            self.line,
            self.col,
            self.code.code(),
            self.message
        )
    }
}

/// Parses and resolves a specification. Every problem found is returned,
/// sorted by position.
pub fn parse(text: &str) -> Result<Spec, Vec<Diagnostic>> {
    let mut diags = Vec::new();
    let first = text.lines().next().unwrap_or("").trim_end();
    if first != PRAGMA {
        diags.push(Diagnostic::error(
            ErrorCode::Pragma,
            Span { line: 1, col: 1 },
            format!("the first line must be `{PRAGMA}`"),
        ));
    }
    let toks = lexer::lex(text, &mut diags);
    let spec = parser::parse_tokens(&toks, &mut diags);
    if diags.is_empty() {
        compile::check(&spec, &mut diags);
    }
    if diags.is_empty() {
        Ok(spec)
    } else {
        diags.sort_by_key(|d| (d.line, d.col));
        Err(diags)
    }
}

/// Parses `text` and compiles the selected scenario.
pub fn load(text: &str, scenario: Option<&str>) -> Result<Compiled, Vec<Diagnostic>> {
    compile(&parse(text)?, scenario)
}
