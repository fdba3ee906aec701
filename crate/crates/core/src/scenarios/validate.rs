use std::collections::{HashMap, HashSet};
use std::fmt;

use crate::policies::Policy;

use super::{prepare_factor, CheckKind, Event, Scenario};

/// The part of a scenario a diagnostic refers to (indices are positions
/// in the corresponding list).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Item {
    Scenario,
    System(usize),
    Agent(usize),
    State(usize),
    Policy(usize),
    Event(usize),
    Check(usize),
}

impl fmt::Display for Item {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Item::Scenario => write!(f, "scenario"),
            Item::System(i) => write!(f, "system #{}", i + 1),
            Item::Agent(i) => write!(f, "agent #{}", i + 1),
            Item::State(i) => write!(f, "state #{}", i + 1),
            Item::Policy(i) => write!(f, "policy #{}", i + 1),
            Item::Event(i) => write!(f, "event #{}", i + 1),
            Item::Check(i) => write!(f, "check #{}", i + 1),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationError {
    pub item: Item,
    pub message: String,
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.item, self.message)
    }
}

/// Largest target dimension of a witness check (it builds a dense
/// reduced density matrix).
pub const MAX_WITNESS_DIM: usize = 1024;

pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

struct Diagnostics(Vec<ValidationError>);

impl Diagnostics {
    fn push(&mut self, item: Item, message: impl Into<String>) {
        self.0.push(ValidationError {
            item,
            message: message.into(),
        });
    }

    fn ident(&mut self, item: Item, what: &str, name: &str) {
        if !is_identifier(name) {
            self.push(item, format!("{what} `{name}` is not an identifier"));
        }
    }

    fn targets(&mut self, item: Item, s: &Scenario, targets: &[String]) -> bool {
        let mut ok = true;
        if targets.is_empty() {
            self.push(item, "no targets");
            ok = false;
        }
        for (i, t) in targets.iter().enumerate() {
            if !s.register.contains(t) {
                self.push(item, format!("unknown subsystem `{t}`"));
                ok = false;
            } else if targets[..i].contains(t) {
                self.push(item, format!("subsystem `{t}` listed twice"));
                ok = false;
            }
        }
        ok
    }
}

/// Checks every structural invariant and reports all violations, not just
/// the first.
pub fn validate_scenario(s: &Scenario) -> Result<(), Vec<ValidationError>> {
    let mut d = Diagnostics(Vec::new());
    d.ident(Item::Scenario, "scenario name", &s.name);
    for (i, label) in s.register.labels().enumerate() {
        d.ident(Item::System(i), "subsystem", label);
    }

    let mut agents = HashSet::new();
    for (i, a) in s.agents.iter().enumerate() {
        d.ident(Item::Agent(i), "agent", &a.name);
        if !agents.insert(a.name.as_str()) {
            d.push(Item::Agent(i), format!("duplicate agent `{}`", a.name));
        }
        for (k, t) in a.observes.iter().enumerate() {
            if !s.register.contains(t) {
                d.push(
                    Item::Agent(i),
                    format!("agent `{}` observes unknown subsystem `{t}`", a.name),
                );
            } else if a.observes[..k].contains(t) {
                d.push(Item::Agent(i), format!("subsystem `{t}` listed twice"));
            }
        }
    }

    let mut prepared: HashMap<&str, usize> = HashMap::new();
    for (i, p) in s.preparation.iter().enumerate() {
        let item = Item::State(i);
        if !d.targets(item, s, &p.targets) {
            continue;
        }
        let mut clash = false;
        for t in &p.targets {
            if let Some(prev) = prepared.insert(t, i) {
                d.push(
                    item,
                    format!("subsystem `{t}` already prepared by state #{}", prev + 1),
                );
                clash = true;
            }
        }
        if p.terms.is_empty() {
            d.push(item, "state has no terms");
        } else if !clash {
            if let Err(e) = prepare_factor(&s.register, p) {
                d.push(item, format!("bad state: {e}"));
            }
        }
        if p.terms
            .iter()
            .any(|(a, _)| !a.re.is_finite() || !a.im.is_finite())
        {
            d.push(item, "amplitude is not finite");
        }
    }
    for label in s.register.labels() {
        if !prepared.contains_key(label) {
            d.push(
                Item::Scenario,
                format!("subsystem `{label}` is not prepared"),
            );
        }
    }

    for (i, p) in s.policies.iter().enumerate() {
        if let Policy::CollapseAt(set) = p {
            if set.is_empty() {
                d.push(Item::Policy(i), "collapse_at needs at least one agent");
            }
            for a in set {
                if !agents.contains(a.as_str()) {
                    d.push(Item::Policy(i), format!("unknown agent `{a}`"));
                }
            }
        }
    }

    // record -> (event index, outcome labels if the basis resolves)
    // Record name -> (event index, outcome labels if the basis resolved, measured targets).
    type RecordInfo<'a> = (usize, Option<Vec<String>>, &'a [String]);
    let mut records: HashMap<&str, RecordInfo> = HashMap::new();
    let all_records: HashSet<&str> = s
        .events
        .iter()
        .filter_map(|e| match e {
            Event::Measure { record, .. } => Some(record.as_str()),
            _ => None,
        })
        .collect();
    for (i, e) in s.events.iter().enumerate() {
        let item = Item::Event(i);
        match e {
            Event::Noop => {}
            Event::Unitary { unitary, targets } => {
                if d.targets(item, s, targets) {
                    if let Err(err) = unitary.resolve(&s.register, targets) {
                        d.push(item, err.to_string());
                    }
                }
            }
            Event::Measure {
                agent,
                basis,
                targets,
                record,
            } => {
                d.ident(item, "record", record);
                if !agents.contains(agent.as_str()) {
                    d.push(item, format!("unknown agent `{agent}`"));
                }
                let labels = if d.targets(item, s, targets) {
                    match basis.resolve(&s.register, targets) {
                        Ok(b) => Some(b.labels().map(str::to_string).collect()),
                        Err(err) => {
                            d.push(item, err.to_string());
                            None
                        }
                    }
                } else {
                    None
                };
                if let Some((prev, _, _)) = records.get(record.as_str()) {
                    d.push(
                        item,
                        format!(
                            "duplicate record `{record}` (first used by event #{})",
                            prev + 1
                        ),
                    );
                } else {
                    records.insert(record, (i, labels, targets));
                }
            }
            Event::Signal {
                record,
                outcome,
                unitary,
                targets,
            } => {
                match records.get(record.as_str()) {
                    None if all_records.contains(record.as_str()) => {
                        d.push(
                            item,
                            format!("unknown record `{record}` (it is measured only later)"),
                        );
                    }
                    None => d.push(item, format!("unknown record `{record}`")),
                    Some((_, labels, measured)) => {
                        if let Some(labels) = labels {
                            if !labels.contains(outcome) {
                                d.push(
                                    item,
                                    format!("unknown outcome `{outcome}` for record `{record}`"),
                                );
                            }
                        }
                        if let Some(t) = targets.iter().find(|t| measured.contains(t)) {
                            d.push(
                                item,
                                format!("signal target `{t}` overlaps the measured subsystems"),
                            );
                        }
                    }
                }
                if d.targets(item, s, targets) {
                    if let Err(err) = unitary.resolve(&s.register, targets) {
                        d.push(item, err.to_string());
                    }
                }
            }
        }
    }

    for (i, c) in s.checks.iter().enumerate() {
        let item = Item::Check(i);
        if !(c.tol > 0.0 && c.tol.is_finite()) {
            d.push(item, format!("tolerance {} must be positive", c.tol));
        }
        if c.agents.is_empty() {
            d.push(item, "check names no agents");
        }
        for (k, a) in c.agents.iter().enumerate() {
            match s.agent(a) {
                None => d.push(item, format!("unknown agent `{a}`")),
                Some(_) if c.agents[..k].contains(a) => {
                    d.push(item, format!("agent `{a}` listed twice"))
                }
                Some(agent) => {
                    for t in &c.targets {
                        if s.register.contains(t) && !agent.observes.contains(t) {
                            d.push(item, format!("agent `{a}` does not observe `{t}`"));
                        }
                    }
                }
            }
        }
        if d.targets(item, s, &c.targets) {
            match c.basis.resolve(&s.register, &c.targets) {
                Err(err) => d.push(item, err.to_string()),
                Ok(b) => {
                    if matches!(c.kind, CheckKind::Witness) && b.target_dim() > MAX_WITNESS_DIM {
                        d.push(
                            item,
                            format!(
                                "witness checks support target dimension up to {MAX_WITNESS_DIM}"
                            ),
                        );
                    }
                    if let CheckKind::Outcome { outcome } = &c.kind {
                        if b.outcome_index(outcome).is_none() {
                            d.push(item, format!("unknown outcome `{outcome}`"));
                        }
                    }
                }
            }
        }
    }

    if d.0.is_empty() {
        Ok(())
    } else {
        Err(d.0)
    }
}
