//! Cross-agent, cross-policy comparison of Born-rule predictions.
//!
//! Every check of a scenario is evaluated analytically on the exact final
//! branches under each policy, for each agent the check names. Pairs of
//! policies are compared by total-variation distance; a gap above the
//! check's tolerance is a `CONTRADICTION`, and a sharp value on one side
//! against none on the other is a `DEFINABILITY_MISMATCH`.

mod montecarlo;

use std::collections::HashMap;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::{born_distribution, C64, EPS_NORM};
use crate::mixtures::{interference_witness, reduce_to, DensityOperator, Provenance, StateSource};
use crate::policies::{Branch, Compiled, Policy};
use crate::scenarios::{Check, CheckKind, Event, Scenario};

pub use montecarlo::{
    monte_carlo_check, McCheck, McOutcome, MonteCarloSection, RecordCount, RecordTally,
    TrajectorySummary,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutcomeProbability {
    pub outcome: String,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", content = "outcome", rename_all = "snake_case")]
pub enum Sharpness {
    Definite(String),
    Undefined,
}

/// What one description of the final state predicts for one check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PredictionValue {
    pub distribution: Vec<OutcomeProbability>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probability: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sharpness: Option<Sharpness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<f64>,
}

/// Prediction a unitary-only agent would make if its own measurements
/// collapsed, which that policy does not allow.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fictional {
    pub label: &'static str,
    pub cut: Policy,
    #[serde(flatten)]
    pub value: PredictionValue,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prediction {
    pub agent: String,
    pub policy: Policy,
    #[serde(flatten)]
    pub value: PredictionValue,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fictional: Option<Fictional>,
}

/// Predictions per check, for every (agent, policy) pair the check names.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionTable {
    pub policies: Vec<Policy>,
    /// Indexed by check, then in policy-major, agent-minor order.
    pub checks: Vec<Vec<Prediction>>,
}

impl PredictionTable {
    pub fn build(s: &Scenario, policies: &[Policy]) -> Result<Self> {
        let compiled = Compiled::new(s)?;
        let mut fictional_cache: HashMap<String, Vec<PredictionValue>> = HashMap::new();
        let mut checks: Vec<Vec<Prediction>> = vec![Vec::new(); s.checks.len()];
        let measuring: Vec<&str> = s
            .events
            .iter()
            .filter_map(|e| match e {
                Event::Measure { agent, .. } => Some(agent.as_str()),
                _ => None,
            })
            .collect();
        for policy in policies {
            let values = evaluate(&compiled, policy)?;
            for (i, check) in s.checks.iter().enumerate() {
                for agent in &check.agents {
                    let fictional = if matches!(policy, Policy::UnitaryOnly)
                        && measuring.contains(&agent.as_str())
                    {
                        if !fictional_cache.contains_key(agent) {
                            let cut = Policy::collapse_at([agent.as_str()]);
                            fictional_cache.insert(agent.clone(), evaluate(&compiled, &cut)?);
                        }
                        Some(Fictional {
                            label: "FICTIONAL",
                            cut: Policy::collapse_at([agent.as_str()]),
                            value: fictional_cache[agent][i].clone(),
                        })
                    } else {
                        None
                    };
                    checks[i].push(Prediction {
                        agent: agent.clone(),
                        policy: policy.clone(),
                        value: values[i].clone(),
                        fictional,
                    });
                }
            }
        }
        Ok(Self {
            policies: policies.to_vec(),
            checks,
        })
    }

    /// The same table limited to `policies`.
    pub fn restricted(&self, policies: &[Policy]) -> Self {
        Self {
            policies: policies.to_vec(),
            checks: self
                .checks
                .iter()
                .map(|preds| {
                    preds
                        .iter()
                        .filter(|p| policies.contains(&p.policy))
                        .cloned()
                        .collect()
                })
                .collect(),
        }
    }
}

/// Analytic prediction for every check under `policy`.
pub(crate) fn evaluate(compiled: &Compiled<'_>, policy: &Policy) -> Result<Vec<PredictionValue>> {
    let branches = compiled.exact(policy, |_, _| {})?;
    compiled
        .scenario
        .checks
        .iter()
        .zip(&compiled.check_bases)
        .map(|(check, basis)| {
            let distribution = mixed_distribution(&branches, basis)?;
            let mut value = PredictionValue {
                distribution,
                probability: None,
                sharpness: None,
                witness: None,
            };
            match &check.kind {
                CheckKind::Outcome { outcome } => {
                    value.probability = value
                        .distribution
                        .iter()
                        .find(|o| &o.outcome == outcome)
                        .map(|o| o.probability);
                }
                CheckKind::Distribution => {}
                CheckKind::Definite => {
                    value.sharpness = Some(
                        match value
                            .distribution
                            .iter()
                            .find(|o| o.probability >= 1.0 - EPS_NORM)
                        {
                            Some(o) => Sharpness::Definite(o.outcome.clone()),
                            None => Sharpness::Undefined,
                        },
                    );
                }
                CheckKind::Witness => {
                    let rho = reduced_mixture(compiled, &branches, &check.targets)?;
                    value.witness = Some(interference_witness(&rho, basis)?);
                }
            }
            Ok(value)
        })
        .collect()
}

fn mixed_distribution(
    branches: &[Branch],
    basis: &crate::hilbert::MeasurementBasis,
) -> Result<Vec<OutcomeProbability>> {
    let mut acc = vec![0.0; basis.outcomes().len()];
    for b in branches {
        for (slot, (_, p)) in acc.iter_mut().zip(born_distribution(&b.state, basis)?) {
            *slot += b.probability * p;
        }
    }
    Ok(basis
        .labels()
        .zip(acc)
        .map(|(l, p)| OutcomeProbability {
            outcome: l.to_string(),
            probability: p.clamp(0.0, 1.0),
        })
        .collect())
}

fn reduced_mixture(
    compiled: &Compiled<'_>,
    branches: &[Branch],
    targets: &[String],
) -> Result<DensityOperator> {
    let register = &compiled.scenario.register;
    let sub = register.select(targets)?;
    let d = sub.total_dim();
    let mut matrix = DMatrix::<C64>::zeros(d, d);
    for b in branches {
        matrix += reduce_to(&StateSource::Pure(&b.state), targets)? * C64::new(b.probability, 0.0);
    }
    let labels: Vec<&str> = register.labels().collect();
    Ok(DensityOperator::from_parts(
        sub,
        matrix,
        Provenance::ImproperFromTrace {
            parent: format!("final state on {}", labels.join(",")),
            discarded: register.complement(targets),
        },
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Consistent,
    Contradiction,
    DefinabilityMismatch,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Consistent => "CONSISTENT",
            Verdict::Contradiction => "CONTRADICTION",
            Verdict::DefinabilityMismatch => "DEFINABILITY_MISMATCH",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub policies: Vec<Policy>,
    pub gap: f64,
    pub verdict: Verdict,
}

fn total_variation(a: &[OutcomeProbability], b: &[OutcomeProbability]) -> f64 {
    let mut tv = 0.0;
    for x in a {
        let y = b
            .iter()
            .find(|y| y.outcome == x.outcome)
            .map_or(0.0, |y| y.probability);
        tv += (x.probability - y).abs();
    }
    for y in b {
        if !a.iter().any(|x| x.outcome == y.outcome) {
            tv += y.probability;
        }
    }
    0.5 * tv
}

fn pair_gap(kind: &CheckKind, a: &PredictionValue, b: &PredictionValue) -> f64 {
    match kind {
        CheckKind::Witness => (a.witness.unwrap_or(0.0) - b.witness.unwrap_or(0.0)).abs(),
        _ => total_variation(&a.distribution, &b.distribution),
    }
}

/// Compares every prediction in `table` for check `index` against every
/// other. Each agent the check names must have a prediction under each
/// of the table's policies.
pub fn compare_predictions(
    table: &PredictionTable,
    index: usize,
    check: &Check,
) -> Result<Comparison> {
    let preds = table.checks.get(index).map(Vec::as_slice).unwrap_or(&[]);
    for policy in &table.policies {
        for agent in &check.agents {
            if !preds
                .iter()
                .any(|p| &p.agent == agent && &p.policy == policy)
            {
                return Err(Error::MissingAgent(agent.clone()));
            }
        }
    }
    let preds: Vec<&Prediction> = preds
        .iter()
        .filter(|p| check.agents.contains(&p.agent))
        .collect();
    let mut gap: f64 = 0.0;
    let mut mismatch = false;
    for (i, a) in preds.iter().enumerate() {
        for b in &preds[i + 1..] {
            gap = gap.max(pair_gap(&check.kind, &a.value, &b.value));
            if let (Some(x), Some(y)) = (&a.value.sharpness, &b.value.sharpness) {
                mismatch |= matches!(x, Sharpness::Undefined) != matches!(y, Sharpness::Undefined);
            }
        }
    }
    let verdict = if mismatch {
        Verdict::DefinabilityMismatch
    } else if gap > check.tol {
        Verdict::Contradiction
    } else {
        Verdict::Consistent
    };
    let mut policies = table.policies.clone();
    if policies.len() == 1 {
        policies.push(policies[0].clone());
    }
    Ok(Comparison {
        policies,
        gap,
        verdict,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub index: usize,
    pub kind: &'static str,
    pub description: String,
    pub targets: Vec<String>,
    pub basis: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outcome: Option<String>,
    pub tol: f64,
    pub predictions: Vec<Prediction>,
    /// One entry per unordered policy pair (the self pair for a single policy).
    pub comparisons: Vec<Comparison>,
    pub gap: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub scenario: String,
    pub policies: Vec<Policy>,
    pub seed: Option<u64>,
    pub checks: Vec<CheckReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub monte_carlo: Option<Vec<MonteCarloSection>>,
}

impl ConsistencyReport {
    /// Worst verdict over all checks.
    pub fn verdict(&self) -> Verdict {
        self.checks
            .iter()
            .map(|c| c.verdict)
            .max()
            .unwrap_or(Verdict::Consistent)
    }
}

fn policy_pairs(policies: &[Policy]) -> Vec<Vec<Policy>> {
    if policies.len() == 1 {
        return vec![vec![policies[0].clone()]];
    }
    let mut out = Vec::new();
    for i in 0..policies.len() {
        for j in i + 1..policies.len() {
            out.push(vec![policies[i].clone(), policies[j].clone()]);
        }
    }
    out
}

/// Evaluates every check under every policy and compares each pair.
pub fn check_scenario(s: &Scenario, policies: &[Policy]) -> Result<ConsistencyReport> {
    if policies.is_empty() {
        return Err(Error::InvalidPolicy("no policies given".into()));
    }
    let mut unique: Vec<Policy> = Vec::new();
    for p in policies {
        if !unique.contains(p) {
            unique.push(p.clone());
        }
    }
    let table = PredictionTable::build(s, &unique)?;
    let pairs: Vec<PredictionTable> = policy_pairs(&unique)
        .iter()
        .map(|p| table.restricted(p))
        .collect();
    let mut checks = Vec::with_capacity(s.checks.len());
    for (i, check) in s.checks.iter().enumerate() {
        let comparisons = pairs
            .iter()
            .map(|t| compare_predictions(t, i, check))
            .collect::<Result<Vec<_>>>()?;
        checks.push(CheckReport {
            index: i,
            kind: check.kind.name(),
            description: check.describe(),
            targets: check.targets.clone(),
            basis: check.basis.to_string(),
            outcome: match &check.kind {
                CheckKind::Outcome { outcome } => Some(outcome.clone()),
                _ => None,
            },
            tol: check.tol,
            predictions: table.checks[i].clone(),
            gap: comparisons.iter().map(|c| c.gap).fold(0.0, f64::max),
            verdict: comparisons
                .iter()
                .map(|c| c.verdict)
                .max()
                .unwrap_or(Verdict::Consistent),
            comparisons,
        });
    }
    Ok(ConsistencyReport {
        scenario: s.name.clone(),
        policies: unique,
        seed: None,
        checks,
        monte_carlo: None,
    })
}
