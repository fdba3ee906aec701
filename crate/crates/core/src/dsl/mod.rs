//! Plain-text scenario format.
//!
//! One statement per line, `#` to end of line is a comment. Parsing
//! never stops at the first problem: each line is checked on its own and
//! every diagnostic is reported. [`serialize_scenario`] writes the
//! canonical form, which parses back to an equal scenario.

mod lexer;
mod parser;
mod serialize;

use std::fmt;

use serde::Serialize;

use crate::scenarios::Scenario;

pub use serialize::serialize_scenario;

/// 1-based line and column; `length` in characters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SourceSpan {
    pub line: usize,
    pub column: usize,
    pub length: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParseDiagnostic {
    pub span: SourceSpan,
    pub severity: Severity,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hint: Option<String>,
}

impl ParseDiagnostic {
    pub fn error(span: SourceSpan, message: impl Into<String>) -> Self {
        Self {
            span,
            severity: Severity::Error,
            message: message.into(),
            hint: None,
        }
    }

    pub fn warning(span: SourceSpan, message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Warning,
            ..Self::error(span, message)
        }
    }

    pub fn with_hint(mut self, hint: &str) -> Self {
        self.hint = Some(hint.to_string());
        self
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(
            f,
            "{}:{}: {kind}: {}",
            self.span.line, self.span.column, self.message
        )?;
        if let Some(h) = &self.hint {
            write!(f, " (expected {h})")?;
        }
        Ok(())
    }
}

/// Result of parsing: a scenario exactly when no diagnostic is an error.
#[derive(Debug, Clone)]
pub struct ParseOutput {
    pub scenario: Option<Scenario>,
    pub diagnostics: Vec<ParseDiagnostic>,
}

/// Parses and validates, keeping warnings alongside the scenario.
pub fn parse_scenario_with_warnings(text: &str) -> ParseOutput {
    parser::parse(text)
}

/// Parses and validates a scenario; on failure returns every diagnostic.
pub fn parse_scenario(text: &str) -> Result<Scenario, Vec<ParseDiagnostic>> {
    let out = parser::parse(text);
    match out.scenario {
        Some(s) => Ok(s),
        None => Err(out.diagnostics),
    }
}

#[cfg(test)]
mod tests;
