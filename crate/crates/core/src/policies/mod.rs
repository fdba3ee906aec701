//! State-reduction policies and the engine that walks a scenario's events
//! under them.
//!
//! [`Policy::UnitaryOnly`] never collapses: measurement events leave the
//! global state alone and agents are assigned reduced (improper) states.
//! [`Policy::CollapseAt`] places the cut at a set of agents; their
//! measurements are sampled and projected, so agents are assigned proper
//! mixtures over outcomes.
//!
//! A measurement outside the cut still records its outcome when the Born
//! weight of one outcome is at least `1 − EPS_NORM` (marked `Certain`,
//! never sampled). A signal conditioned on an unresolved record acts as a
//! coherently controlled unitary on the measured subsystems' projector.

mod engine;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scenarios::Scenario;

pub(crate) use engine::Compiled;
pub use engine::{
    assign_states, ensemble_over_runs, exact_branches, run_batch, run_trajectory, AssignedState,
    Branch, RecordValue, RunEnsembles, StateAssignment, Trajectory, TrajectoryRng,
};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Policy {
    UnitaryOnly,
    CollapseAt(BTreeSet<String>),
}

impl Policy {
    pub fn collapse_at<S: Into<String>>(agents: impl IntoIterator<Item = S>) -> Self {
        Policy::CollapseAt(agents.into_iter().map(Into::into).collect())
    }

    /// Whether measurements owned by `agent` collapse under this policy.
    pub fn is_active(&self, agent: &str) -> bool {
        match self {
            Policy::UnitaryOnly => false,
            Policy::CollapseAt(set) => set.contains(agent),
        }
    }

    /// Requires a nonempty cut made of agents declared in `s`.
    pub fn check_against(&self, s: &Scenario) -> Result<()> {
        if let Policy::CollapseAt(set) = self {
            if set.is_empty() {
                return Err(Error::InvalidPolicy(
                    "collapse_at needs at least one agent".into(),
                ));
            }
            if let Some(a) = set.iter().find(|a| s.agent(a).is_none()) {
                return Err(Error::InvalidPolicy(format!(
                    "agent `{a}` is not declared in `{}`",
                    s.name
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Policy::UnitaryOnly => f.write_str("unitary_only"),
            Policy::CollapseAt(set) => {
                let names: Vec<&str> = set.iter().map(String::as_str).collect();
                write!(f, "collapse_at:{}", names.join(","))
            }
        }
    }
}

impl FromStr for Policy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "unitary_only" {
            return Ok(Policy::UnitaryOnly);
        }
        let Some(rest) = s.strip_prefix("collapse_at:") else {
            return Err(Error::InvalidPolicy(format!(
                "`{s}`: expected `unitary_only` or `collapse_at:AGENT[,AGENT...]`"
            )));
        };
        let mut set = BTreeSet::new();
        for a in rest.split(',').map(str::trim) {
            if a.is_empty() || !crate::scenarios::is_identifier(a) {
                return Err(Error::InvalidPolicy(format!("`{s}`: bad agent name `{a}`")));
            }
            set.insert(a.to_string());
        }
        Ok(Policy::CollapseAt(set))
    }
}

impl Serialize for Policy {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Parses a comma-separated policy list. Names following a
/// `collapse_at:` entry join its cut until the next policy keyword, so
/// `unitary_only,collapse_at:A,B` is two policies.
pub fn parse_policy_list(s: &str) -> Result<Vec<Policy>> {
    let mut groups: Vec<String> = Vec::new();
    for piece in s.split(',').map(str::trim) {
        let starts_policy = piece == "unitary_only" || piece.starts_with("collapse_at:");
        match groups.last_mut() {
            Some(last) if !starts_policy && last.starts_with("collapse_at:") => {
                last.push(',');
                last.push_str(piece);
            }
            _ => groups.push(piece.to_string()),
        }
    }
    let mut out = Vec::new();
    for g in groups {
        let p: Policy = g.parse()?;
        if !out.contains(&p) {
            out.push(p);
        }
    }
    if out.is_empty() {
        return Err(Error::InvalidPolicy("no policies given".into()));
    }
    Ok(out)
}
