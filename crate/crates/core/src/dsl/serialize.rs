use std::fmt::Write;

use crate::error::{Error, Result};
use crate::hilbert::C64;
use crate::scenarios::{
    complex_literal, validate_scenario, BasisSpec, CheckKind, Event, Preparation, Scenario,
};

fn amplitude(z: C64) -> String {
    if z == C64::new(1.0, 0.0) {
        String::new()
    } else {
        complex_literal(z)
    }
}

fn ket(digits: &[usize], dotted: bool) -> String {
    let parts: Vec<String> = digits.iter().map(|d| d.to_string()).collect();
    format!(
        "|{}>",
        if dotted {
            parts.join(".")
        } else {
            parts.concat()
        }
    )
}

fn state_line(s: &Scenario, p: &Preparation) -> String {
    let dotted = p
        .targets
        .iter()
        .any(|t| s.register.dim_of(t).unwrap_or(0) > 10);
    let mut line = format!("STATE {}", p.targets.join(","));
    for (i, (a, digits)) in p.terms.iter().enumerate() {
        let k = ket(digits, dotted);
        if i == 0 {
            let _ = write!(line, " {}{k}", amplitude(*a));
        } else if a.im == 0.0 && a.re.is_sign_negative() {
            let _ = write!(line, " - {}{k}", amplitude(-*a));
        } else {
            let _ = write!(line, " + {}{k}", amplitude(*a));
        }
    }
    line
}

/// Canonical text of a valid scenario.
pub fn serialize_scenario(s: &Scenario) -> Result<String> {
    validate_scenario(s).map_err(Error::InvalidScenario)?;
    let mut out = String::new();
    let _ = writeln!(out, "SCENARIO {}", s.name);
    for sub in s.register.subsystems() {
        let _ = writeln!(out, "SYSTEM {} dim={}", sub.label(), sub.dim());
    }
    for a in &s.agents {
        let _ = writeln!(out, "AGENT {} observes {}", a.name, a.observes.join(" "));
    }
    for p in &s.preparation {
        let _ = writeln!(out, "{}", state_line(s, p));
    }
    for p in &s.policies {
        let _ = writeln!(out, "POLICY {p}");
    }
    for e in &s.events {
        let line = match e {
            Event::Unitary { unitary, targets } => {
                format!("EVENT unitary {unitary} {}", targets.join(" "))
            }
            Event::Measure {
                agent,
                basis,
                targets,
                record,
            } => format!(
                "EVENT measure {agent} basis={basis} targets={} record={record}",
                targets.join(",")
            ),
            Event::Signal {
                record,
                outcome,
                unitary,
                targets,
            } => format!(
                "EVENT signal when {record}=={outcome} apply {unitary} {}",
                targets.join(" ")
            ),
            Event::Noop => "EVENT noop".to_string(),
        };
        let _ = writeln!(out, "{line}");
    }
    for c in &s.checks {
        let tol = format!("{:e}", c.tol);
        let agents = c.agents.join(",");
        let line = match &c.kind {
            CheckKind::Outcome { outcome } => {
                let basis = match c.basis {
                    BasisSpec::Computational => String::new(),
                    ref b => format!(" basis={b}"),
                };
                format!(
                    "CHECK outcome {}=={outcome}{basis} agents={agents} tol={tol}",
                    c.targets.join(",")
                )
            }
            kind => format!(
                "CHECK {} basis={} targets={} agents={agents} tol={tol}",
                kind.name(),
                c.basis,
                c.targets.join(",")
            ),
        };
        let _ = writeln!(out, "{line}");
    }
    Ok(out)
}
