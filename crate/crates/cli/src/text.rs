//! Human-readable rendering of reports.

use std::fmt::Write;

use wignerlab::consistency::{ConsistencyReport, MonteCarloSection, PredictionValue, Sharpness};
use wignerlab::policies::RecordValue;

/// Rounded to 12 decimals for display; JSON output keeps every digit.
fn num(x: f64) -> String {
    let s = format!("{x:.12}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn value(v: &PredictionValue) -> String {
    if let Some(w) = v.witness {
        return format!("witness {}", num(w));
    }
    if let Some(s) = &v.sharpness {
        let sharp = match s {
            Sharpness::Definite(o) => format!("definite {o}"),
            Sharpness::Undefined => "undefined".to_string(),
        };
        return format!("{sharp}; {}", distribution(v));
    }
    if let Some(p) = v.probability {
        return format!("P={}", num(p));
    }
    distribution(v)
}

fn distribution(v: &PredictionValue) -> String {
    let parts: Vec<String> = v
        .distribution
        .iter()
        .filter(|o| o.probability != 0.0)
        .map(|o| format!("{}:{}", o.outcome, num(o.probability)))
        .collect();
    format!("{{{}}}", parts.join(", "))
}

fn record_value(v: &RecordValue) -> String {
    match v {
        RecordValue::Sampled(o) => o.clone(),
        RecordValue::Certain(o) => format!("{o} (certain)"),
        RecordValue::Unresolved => "unresolved".into(),
    }
}

pub fn report(r: &ConsistencyReport) -> String {
    let mut out = String::new();
    let policies: Vec<String> = r.policies.iter().map(|p| p.to_string()).collect();
    let _ = writeln!(out, "scenario: {}", r.scenario);
    let _ = writeln!(out, "policies: {}", policies.join(", "));
    if let Some(seed) = r.seed {
        let _ = writeln!(out, "seed: {seed}");
    }
    let width = policies.iter().map(String::len).max().unwrap_or(0);
    for c in &r.checks {
        let _ = writeln!(
            out,
            "\ncheck #{}: {} [tol {:e}]",
            c.index, c.description, c.tol
        );
        for p in &c.predictions {
            let _ = writeln!(
                out,
                "  {:width$}  {:8} {}",
                p.policy.to_string(),
                p.agent,
                value(&p.value)
            );
            if let Some(f) = &p.fictional {
                let _ = writeln!(
                    out,
                    "  {:width$}  {:8} {} if {} collapsed: {}",
                    "",
                    "",
                    f.label,
                    f.cut,
                    value(&f.value)
                );
            }
        }
        if c.comparisons.len() > 1 {
            for cmp in &c.comparisons {
                let pair: Vec<String> = cmp.policies.iter().map(|p| p.to_string()).collect();
                let _ = writeln!(
                    out,
                    "  {} : gap {} {}",
                    pair.join(" vs "),
                    num(cmp.gap),
                    cmp.verdict.as_str()
                );
            }
        }
        let _ = writeln!(out, "  gap {} -> {}", num(c.gap), c.verdict.as_str());
    }
    if let Some(sections) = &r.monte_carlo {
        for m in sections {
            out.push('\n');
            out.push_str(&monte_carlo(m));
        }
    }
    let _ = writeln!(out, "\nverdict: {}", r.verdict().as_str());
    out
}

fn monte_carlo(m: &MonteCarloSection) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "monte carlo: {} ({} runs, seed {})",
        m.policy, m.runs, m.seed
    );
    for c in &m.checks {
        if !c.sampled {
            let _ = writeln!(out, "  check #{}: not sampled", c.index);
            continue;
        }
        let _ = writeln!(out, "  check #{}: {}", c.index, c.description);
        for o in &c.outcomes {
            let sigma = o
                .sigma
                .map_or(String::new(), |s| format!(", sigma {}", num(s)));
            let flag = if o.flagged { "  FLAGGED" } else { "" };
            let _ = writeln!(
                out,
                "    {}: {}/{} = {} (expected {}{sigma}){flag}",
                o.outcome,
                o.count,
                m.runs,
                num(o.frequency),
                num(o.expected)
            );
        }
    }
    for r in &m.records {
        let counts: Vec<String> = r
            .counts
            .iter()
            .map(|c| format!("{} x{}", record_value(&c.value), c.count))
            .collect();
        let _ = writeln!(out, "  record {}: {}", r.record, counts.join(", "));
    }
    out
}
