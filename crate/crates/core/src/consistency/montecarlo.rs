use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::policies::{run_batch, Compiled, Policy, RecordValue};
use crate::scenarios::{CheckKind, Scenario};

use super::evaluate;

/// Trajectories listed individually in a section.
pub const LISTED_TRAJECTORIES: usize = 100;

/// Deviations beyond this many binomial σ are flagged.
pub const SIGMA_FLAG: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McOutcome {
    pub outcome: String,
    pub count: u64,
    pub frequency: f64,
    pub expected: f64,
    /// `sqrt(p (1 − p) / n)` at the analytic `p`; absent for a single run.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McCheck {
    pub index: usize,
    pub description: String,
    /// Witness checks have no readout.
    pub sampled: bool,
    pub outcomes: Vec<McOutcome>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecordCount {
    #[serde(flatten)]
    pub value: RecordValue,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecordTally {
    pub record: String,
    pub counts: Vec<RecordCount>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryRecord {
    pub record: String,
    #[serde(flatten)]
    pub value: RecordValue,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectorySummary {
    pub run_index: u64,
    pub records: Vec<TrajectoryRecord>,
    pub readouts: Vec<Option<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloSection {
    pub policy: Policy,
    pub runs: u64,
    pub seed: u64,
    pub checks: Vec<McCheck>,
    pub records: Vec<RecordTally>,
    /// The first runs in run-index order (at most [`LISTED_TRAJECTORIES`]).
    pub trajectories: Vec<TrajectorySummary>,
}

impl MonteCarloSection {
    pub fn any_flagged(&self) -> bool {
        self.checks
            .iter()
            .flat_map(|c| &c.outcomes)
            .any(|o| o.flagged)
    }
}

/// Samples `n` trajectories and sets their check readouts against the
/// analytic probabilities under `policy`.
pub fn monte_carlo_check(
    s: &Scenario,
    policy: &Policy,
    n: u64,
    seed: u64,
) -> Result<MonteCarloSection> {
    if n == 0 {
        return Err(Error::NoRuns);
    }
    let compiled = Compiled::new(s)?;
    let expected = evaluate(&compiled, policy)?;
    let runs = run_batch(s, policy, n, seed, |t| (t.run_index, t.records, t.readouts))?;

    let mut check_counts: Vec<BTreeMap<String, u64>> = vec![BTreeMap::new(); s.checks.len()];
    let mut record_counts: Vec<(String, Vec<RecordCount>)> = Vec::new();
    for (_, records, readouts) in &runs {
        for (counts, r) in check_counts.iter_mut().zip(readouts) {
            if let Some(label) = r {
                *counts.entry(label.clone()).or_default() += 1;
            }
        }
        for (name, value) in records {
            let slot = match record_counts.iter_mut().position(|(r, _)| r == name) {
                Some(i) => &mut record_counts[i].1,
                None => {
                    record_counts.push((name.clone(), Vec::new()));
                    &mut record_counts.last_mut().expect("just pushed").1
                }
            };
            match slot.iter_mut().find(|c| &c.value == value) {
                Some(c) => c.count += 1,
                None => slot.push(RecordCount {
                    value: value.clone(),
                    count: 1,
                }),
            }
        }
    }

    let nf = n as f64;
    let checks = s
        .checks
        .iter()
        .enumerate()
        .map(|(i, check)| {
            let sampled = !matches!(check.kind, CheckKind::Witness);
            let outcomes = if !sampled {
                Vec::new()
            } else {
                expected[i]
                    .distribution
                    .iter()
                    .filter_map(|o| {
                        let count = check_counts[i].get(&o.outcome).copied().unwrap_or(0);
                        if count == 0 && o.probability == 0.0 {
                            return None;
                        }
                        let frequency = count as f64 / nf;
                        let p = o.probability;
                        let sigma = (n > 1).then(|| (p * (1.0 - p) / nf).sqrt());
                        let flagged =
                            sigma.is_some_and(|sd| (frequency - p).abs() > SIGMA_FLAG * sd + 1e-9);
                        Some(McOutcome {
                            outcome: o.outcome.clone(),
                            count,
                            frequency,
                            expected: p,
                            sigma,
                            flagged,
                        })
                    })
                    .collect()
            };
            McCheck {
                index: i,
                description: check.describe(),
                sampled,
                outcomes,
            }
        })
        .collect();

    let trajectories = runs
        .iter()
        .take(LISTED_TRAJECTORIES)
        .map(|(run_index, records, readouts)| TrajectorySummary {
            run_index: *run_index,
            records: records
                .iter()
                .map(|(r, v)| TrajectoryRecord {
                    record: r.clone(),
                    value: v.clone(),
                })
                .collect(),
            readouts: readouts.clone(),
        })
        .collect();

    Ok(MonteCarloSection {
        policy: policy.clone(),
        runs: n,
        seed,
        checks,
        records: record_counts
            .into_iter()
            .map(|(record, counts)| RecordTally { record, counts })
            .collect(),
        trajectories,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::build_molecule_toy;

    #[test]
    fn single_run_has_one_trajectory_and_no_sigma() {
        let m =
            monte_carlo_check(&build_molecule_toy(), &Policy::collapse_at(["F"]), 1, 7).unwrap();
        assert_eq!(m.trajectories.len(), 1);
        assert!(m.checks[0]
            .outcomes
            .iter()
            .all(|o| o.sigma.is_none() && !o.flagged));
    }

    #[test]
    fn unitary_only_photon_every_run() {
        let m = monte_carlo_check(&build_molecule_toy(), &Policy::UnitaryOnly, 1000, 7).unwrap();
        let one = m.checks[0]
            .outcomes
            .iter()
            .find(|o| o.outcome == "1")
            .unwrap();
        assert_eq!(one.count, 1000);
        assert!(!m.any_flagged());
        let mw = m.records.iter().find(|r| r.record == "mW").unwrap();
        assert_eq!(mw.counts.len(), 1);
        assert_eq!(mw.counts[0].value, RecordValue::Certain("PhiPlus".into()));
    }

    #[test]
    fn zero_runs_rejected() {
        assert_eq!(
            monte_carlo_check(&build_molecule_toy(), &Policy::UnitaryOnly, 0, 7).unwrap_err(),
            Error::NoRuns
        );
    }
}
