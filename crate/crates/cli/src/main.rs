mod args;
mod json;
mod text;

use std::fs;
use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use serde::Serialize;
use wignerlab::consistency::{check_scenario, monte_carlo_check, Verdict};
use wignerlab::dsl::{parse_scenario_with_warnings, serialize_scenario, ParseDiagnostic};
use wignerlab::policies::{parse_policy_list, Policy};
use wignerlab::scenarios::{builtin, BuiltinParams, Scenario, BUILTINS};

use args::{Cli, Command, Format, RunArgs};

const DEFAULT_RUNS: u64 = 1000;

/// Usage, input or parse failure; reported on stderr with exit code 1.
struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

fn diagnostic_line(path: &str, d: &ParseDiagnostic) -> String {
    let kind = if d.is_error() { "" } else { "warning: " };
    let hint = d
        .hint
        .as_ref()
        .map_or(String::new(), |h| format!(" (expected {h})"));
    format!(
        "{path}:{}:{}: {kind}{}{hint}",
        d.span.line, d.span.column, d.message
    )
}

/// Parses a file, printing every diagnostic to stderr.
fn load_file(path: &str) -> Result<Scenario, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure(format!("cannot read {path}: {e}")))?;
    let out = parse_scenario_with_warnings(&text);
    let mut stderr = std::io::stderr().lock();
    for d in &out.diagnostics {
        let _ = writeln!(stderr, "{}", diagnostic_line(path, d));
    }
    out.scenario.ok_or_else(|| {
        Failure(format!(
            "{path}: {} error(s)",
            out.diagnostics.iter().filter(|d| d.is_error()).count()
        ))
    })
}

fn load(a: &RunArgs) -> Result<Scenario, Failure> {
    let params = BuiltinParams {
        theta: a.theta,
        n_env: a.n_env,
    };
    let mut s = match builtin(&a.scenario, params) {
        Some(s) => s?,
        None => load_file(&a.scenario)?,
    };
    if let Some(tol) = a.tol {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(Failure(format!("--tol must be positive, got {tol}")));
        }
        s.checks.iter_mut().for_each(|c| c.tol = tol);
    }
    Ok(s)
}

fn policies(a: &RunArgs, s: &Scenario) -> Result<Vec<Policy>, Failure> {
    let mut out: Vec<Policy> = Vec::new();
    for arg in &a.policies {
        for p in parse_policy_list(arg)? {
            if !out.contains(&p) {
                out.push(p);
            }
        }
    }
    if out.is_empty() {
        out = s.default_policies();
    }
    for p in &out {
        p.check_against(s)?;
    }
    Ok(out)
}

fn emit<T: Serialize>(format: Format, value: &T, text: impl FnOnce() -> String) {
    let body = match format {
        Format::Json => json::to_string(value),
        Format::Text => text(),
    };
    let _ = std::io::stdout().lock().write_all(body.as_bytes());
}

fn cmd_check(a: &RunArgs, sample: bool) -> Result<ExitCode, Failure> {
    let s = load(a)?;
    let policies = policies(a, &s)?;
    let runs = match (sample, a.runs) {
        (true, Some(0)) => return Err(Failure("--runs must be at least 1".into())),
        (true, r) => Some(r.unwrap_or(DEFAULT_RUNS)),
        (false, Some(0)) | (false, None) => None,
        (false, r) => r,
    };
    let mut report = check_scenario(&s, &policies)?;
    report.seed = Some(a.seed);
    if let Some(n) = runs {
        report.monte_carlo = Some(
            policies
                .iter()
                .map(|p| monte_carlo_check(&s, p, n, a.seed))
                .collect::<Result<_, _>>()?,
        );
    }
    emit(a.format, &report, || text::report(&report));
    Ok(if sample || report.verdict() == Verdict::Consistent {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}

fn cmd_parse(path: &str) -> Result<ExitCode, Failure> {
    let s = load_file(path)?;
    let text = serialize_scenario(&s)?;
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct BuiltinEntry {
    name: &'static str,
    description: &'static str,
}

fn cmd_list(format: Format) -> ExitCode {
    let entries: Vec<BuiltinEntry> = BUILTINS
        .iter()
        .map(|&(name, description)| BuiltinEntry { name, description })
        .collect();
    emit(format, &entries, || {
        let width = BUILTINS.iter().map(|(n, _)| n.len()).max().unwrap_or(0);
        BUILTINS
            .iter()
            .map(|(n, d)| format!("{n:width$}  {d}\n"))
            .collect()
    });
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match &cli.command {
        Command::Check(a) => cmd_check(a, false),
        Command::Run(a) => cmd_check(a, true),
        Command::Parse { path } => cmd_parse(path),
        Command::List { format } => Ok(cmd_list(*format)),
    };
    match result {
        Ok(code) => code,
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
