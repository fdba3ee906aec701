use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::{
    apply_controlled, apply_unitary, born_distribution, sample_outcome, MeasurementBasis, Operator,
    PureState, C64, EPS_NORM,
};
use crate::mixtures::{
    partial_trace, proper_mixture_from_ensemble, reduce_to, DensityOperator, Ensemble, Provenance,
    StateSource,
};
use crate::scenarios::{validate_scenario, Event, Scenario};

use super::Policy;

/// What is known about a measurement record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", content = "outcome", rename_all = "snake_case")]
pub enum RecordValue {
    /// Drawn by a policy-active measurement.
    Sampled(String),
    /// One outcome carried Born weight ≥ 1 − `EPS_NORM`; nothing was drawn.
    Certain(String),
    /// Measurement outside the cut with no certain outcome.
    Unresolved,
}

impl RecordValue {
    pub fn outcome(&self) -> Option<&str> {
        match self {
            RecordValue::Sampled(o) | RecordValue::Certain(o) => Some(o),
            RecordValue::Unresolved => None,
        }
    }
}

/// One exact branch of the evolution under a policy.
#[derive(Debug, Clone)]
pub struct Branch {
    pub probability: f64,
    pub records: Vec<(String, RecordValue)>,
    pub state: PureState,
}

impl Branch {
    pub fn record(&self, name: &str) -> Option<&RecordValue> {
        self.records.iter().find(|(r, _)| r == name).map(|(_, v)| v)
    }
}

pub(crate) enum Step {
    Unitary {
        op: Operator,
        targets: Vec<String>,
    },
    Measure {
        agent: String,
        basis: MeasurementBasis,
        record: String,
    },
    Signal {
        record: String,
        source: usize,
        outcome: usize,
        op: Operator,
        targets: Vec<String>,
    },
    Noop,
}

/// Records, terminal readouts and final state of one trajectory.
type RunOutput = (Vec<(String, RecordValue)>, Vec<Option<String>>, PureState);

/// A validated scenario with every operator and basis resolved.
pub(crate) struct Compiled<'s> {
    pub scenario: &'s Scenario,
    pub initial: PureState,
    pub steps: Vec<Step>,
    pub check_bases: Vec<MeasurementBasis>,
}

impl<'s> Compiled<'s> {
    pub fn new(scenario: &'s Scenario) -> Result<Self> {
        validate_scenario(scenario).map_err(Error::InvalidScenario)?;
        let register = &scenario.register;
        let mut steps = Vec::with_capacity(scenario.events.len());
        let mut sources: HashMap<&str, usize> = HashMap::new();
        for (i, e) in scenario.events.iter().enumerate() {
            steps.push(match e {
                Event::Noop => Step::Noop,
                Event::Unitary { unitary, targets } => Step::Unitary {
                    op: unitary.resolve(register, targets)?,
                    targets: targets.clone(),
                },
                Event::Measure {
                    agent,
                    basis,
                    targets,
                    record,
                } => {
                    sources.insert(record, i);
                    Step::Measure {
                        agent: agent.clone(),
                        basis: basis.resolve(register, targets)?,
                        record: record.clone(),
                    }
                }
                Event::Signal {
                    record,
                    outcome,
                    unitary,
                    targets,
                } => {
                    let source = sources[record.as_str()];
                    let Step::Measure { basis, .. } = &steps[source] else {
                        unreachable!("records point at measurements")
                    };
                    Step::Signal {
                        record: record.clone(),
                        source,
                        outcome: basis.outcome_index(outcome).expect("validated outcome"),
                        op: unitary.resolve(register, targets)?,
                        targets: targets.clone(),
                    }
                }
            });
        }
        let check_bases = scenario
            .checks
            .iter()
            .map(|c| c.basis.resolve(register, &c.targets))
            .collect::<Result<_>>()?;
        Ok(Self {
            scenario,
            initial: scenario.initial_state()?,
            steps,
            check_bases,
        })
    }

    fn source_basis(&self, source: usize) -> &MeasurementBasis {
        match &self.steps[source] {
            Step::Measure { basis, .. } => basis,
            _ => unreachable!("records point at measurements"),
        }
    }

    /// Advances one branch through a deterministic step. Active
    /// measurements are handled by the caller.
    fn deterministic(&self, step: &Step, branch: &mut Branch) -> Result<()> {
        match step {
            Step::Noop => {}
            Step::Unitary { op, targets } => {
                branch.state = apply_unitary(&branch.state, op, targets)?
            }
            Step::Measure { basis, record, .. } => {
                let probs = born_distribution(&branch.state, basis)?;
                let value = match probs.iter().find(|(_, p)| *p >= 1.0 - EPS_NORM) {
                    Some((label, _)) => RecordValue::Certain(label.clone()),
                    None => RecordValue::Unresolved,
                };
                branch.records.push((record.clone(), value));
            }
            Step::Signal {
                record,
                source,
                outcome,
                op,
                targets,
            } => {
                let basis = self.source_basis(*source);
                match branch.record(record).and_then(RecordValue::outcome) {
                    Some(label) => {
                        if label == basis.outcomes()[*outcome].label() {
                            branch.state = apply_unitary(&branch.state, op, targets)?;
                        }
                    }
                    None => {
                        branch.state =
                            apply_controlled(&branch.state, basis, *outcome, op, targets)?;
                    }
                }
            }
        }
        Ok(())
    }

    /// Exact branch list after every step; `observe` sees the initial
    /// branches (step `None`) and the branches after each event.
    pub fn exact(
        &self,
        policy: &Policy,
        mut observe: impl FnMut(Option<usize>, &[Branch]),
    ) -> Result<Vec<Branch>> {
        policy.check_against(self.scenario)?;
        let mut branches = vec![Branch {
            probability: 1.0,
            records: Vec::new(),
            state: self.initial.clone(),
        }];
        observe(None, &branches);
        for (i, step) in self.steps.iter().enumerate() {
            match step {
                Step::Measure {
                    agent,
                    basis,
                    record,
                } if policy.is_active(agent) => {
                    let mut next = Vec::with_capacity(branches.len() * basis.outcomes().len());
                    for b in &branches {
                        for (k, outcome) in basis.outcomes().iter().enumerate() {
                            let (p, collapsed) = b.state.collapse(basis, k)?;
                            if let Some(state) = collapsed {
                                let mut records = b.records.clone();
                                records.push((
                                    record.clone(),
                                    RecordValue::Sampled(outcome.label().to_string()),
                                ));
                                next.push(Branch {
                                    probability: b.probability * p,
                                    records,
                                    state,
                                });
                            }
                        }
                    }
                    branches = next;
                }
                _ => {
                    for b in &mut branches {
                        self.deterministic(step, b)?;
                    }
                }
            }
            observe(Some(i), &branches);
        }
        Ok(branches)
    }

    /// One sampled run. Readouts draw each non-witness check's basis on
    /// the final state, in check order, after all events.
    pub fn run<R: Rng + ?Sized>(&self, policy: &Policy, rng: &mut R) -> Result<RunOutput> {
        let mut branch = Branch {
            probability: 1.0,
            records: Vec::new(),
            state: self.initial.clone(),
        };
        for step in &self.steps {
            match step {
                Step::Measure {
                    agent,
                    basis,
                    record,
                } if policy.is_active(agent) => {
                    let (label, state) = sample_outcome(&branch.state, basis, rng)?;
                    branch.state = state;
                    branch
                        .records
                        .push((record.clone(), RecordValue::Sampled(label)));
                }
                _ => self.deterministic(step, &mut branch)?,
            }
        }
        let mut readouts = Vec::with_capacity(self.check_bases.len());
        for (check, basis) in self.scenario.checks.iter().zip(&self.check_bases) {
            if matches!(check.kind, crate::scenarios::CheckKind::Witness) {
                readouts.push(None);
                continue;
            }
            let probs = born_distribution(&branch.state, basis)?;
            readouts.push(Some(draw(&probs, rng.random::<f64>()).to_string()));
        }
        Ok((branch.records, readouts, branch.state))
    }
}

/// Inverse CDF over `probs` at uniform `u`, skipping zero-weight outcomes.
fn draw(probs: &[(String, f64)], u: f64) -> &str {
    let total: f64 = probs.iter().map(|(_, p)| p).sum();
    let target = u * total;
    let mut acc = 0.0;
    let mut chosen = 0;
    for (i, (_, p)) in probs.iter().enumerate() {
        if *p <= 0.0 {
            continue;
        }
        acc += p;
        chosen = i;
        if target < acc {
            break;
        }
    }
    &probs[chosen].0
}

/// Final exact branches of `s` under `policy`.
pub fn exact_branches(s: &Scenario, policy: &Policy) -> Result<Vec<Branch>> {
    Compiled::new(s)?.exact(policy, |_, _| {})
}

/// ChaCha8 generator for one trajectory: seeded with `seed`, stream
/// `run_index`. Streams of one seed never overlap.
#[derive(Debug, Clone)]
pub struct TrajectoryRng {
    seed: u64,
    run_index: u64,
    inner: ChaCha8Rng,
}

impl TrajectoryRng {
    pub fn new(seed: u64, run_index: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(run_index);
        Self {
            seed,
            run_index,
            inner,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn run_index(&self) -> u64 {
        self.run_index
    }
}

impl RngCore for TrajectoryRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub seed: u64,
    pub run_index: u64,
    /// Every measurement record in event order.
    pub records: Vec<(String, RecordValue)>,
    /// Terminal readout per check (`None` for witness checks).
    pub readouts: Vec<Option<String>>,
    pub final_state: PureState,
}

impl Trajectory {
    /// Sampled outcomes only.
    pub fn outcomes(&self) -> impl Iterator<Item = (&str, &str)> {
        self.records.iter().filter_map(|(r, v)| match v {
            RecordValue::Sampled(o) => Some((r.as_str(), o.as_str())),
            _ => None,
        })
    }

    pub fn record(&self, name: &str) -> Option<&RecordValue> {
        self.records.iter().find(|(r, _)| r == name).map(|(_, v)| v)
    }
}

pub fn run_trajectory(
    s: &Scenario,
    policy: &Policy,
    rng: &mut TrajectoryRng,
) -> Result<Trajectory> {
    let compiled = Compiled::new(s)?;
    policy.check_against(s)?;
    let (records, readouts, final_state) = compiled.run(policy, rng)?;
    Ok(Trajectory {
        seed: rng.seed(),
        run_index: rng.run_index(),
        records,
        readouts,
        final_state,
    })
}

/// Runs `n` trajectories with run indices `0..n`, in parallel, and hands
/// each to `keep` in run-index order. The final state is dropped unless
/// `keep` retains it.
pub fn run_batch<T: Send>(
    s: &Scenario,
    policy: &Policy,
    n: u64,
    seed: u64,
    keep: impl Fn(Trajectory) -> T + Sync,
) -> Result<Vec<T>> {
    let compiled = Compiled::new(s)?;
    policy.check_against(s)?;
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = TrajectoryRng::new(seed, i);
            let (records, readouts, final_state) = compiled.run(policy, &mut rng)?;
            Ok(keep(Trajectory {
                seed,
                run_index: i,
                records,
                readouts,
                final_state,
            }))
        })
        .collect()
}

/// State assigned to an agent at one point in the event sequence.
#[derive(Debug, Clone)]
pub struct AssignedState {
    /// `None` before the first event, otherwise the index of the event just applied.
    pub after_event: Option<usize>,
    pub state: DensityOperator,
    /// Global outcome ensemble behind a collapse-policy assignment.
    pub ensemble: Option<Arc<Ensemble>>,
}

#[derive(Debug, Clone)]
pub struct StateAssignment {
    pub agent: String,
    pub observes: Vec<String>,
    pub steps: Vec<AssignedState>,
    /// Records whose value this agent holds at the end: its own resolved
    /// measurements and the records behind signals that reach subsystems
    /// it observes.
    pub known_records: Vec<String>,
}

impl StateAssignment {
    pub fn last(&self) -> &AssignedState {
        self.steps.last().expect("at least the initial step")
    }
}

fn ensemble_of(branches: &[Branch]) -> Result<Ensemble> {
    Ensemble::new(
        branches
            .iter()
            .map(|b| (b.probability, b.state.clone()))
            .collect(),
    )
}

fn assignment_for(
    observes: &[String],
    branches: &[Branch],
    policy: &Policy,
) -> Result<(DensityOperator, Option<Arc<Ensemble>>)> {
    let register = branches[0].state.register();
    let keep: Vec<String> = register
        .labels()
        .filter(|l| observes.iter().any(|o| o == l))
        .map(str::to_string)
        .collect();
    let discard = register.complement(&keep);
    if matches!(policy, Policy::UnitaryOnly) {
        return Ok((partial_trace(&branches[0].state, &discard)?, None));
    }
    let ensemble = Arc::new(ensemble_of(branches)?);
    if discard.is_empty() {
        return Ok((proper_mixture_from_ensemble(&ensemble), Some(ensemble)));
    }
    let sub = register.select(&keep)?;
    let d = sub.total_dim();
    let mut matrix = DMatrix::<C64>::zeros(d, d);
    for b in branches {
        matrix += reduce_to(&StateSource::Pure(&b.state), &keep)? * C64::new(b.probability, 0.0);
    }
    let labels: Vec<&str> = register.labels().collect();
    let state = DensityOperator::from_parts(
        sub,
        matrix,
        Provenance::ImproperFromTrace {
            parent: format!("proper state on {}", labels.join(",")),
            discarded: discard,
        },
    );
    Ok((state, Some(ensemble)))
}

/// Per-agent state assignments at every step under `policy`. Dense
/// density matrices are built for each agent's observed subsystems.
pub fn assign_states(s: &Scenario, policy: &Policy) -> Result<BTreeMap<String, StateAssignment>> {
    let compiled = Compiled::new(s)?;
    let mut snapshots: Vec<(Option<usize>, Vec<Branch>)> = Vec::new();
    let finals = compiled.exact(policy, |i, b| snapshots.push((i, b.to_vec())))?;
    let mut out = BTreeMap::new();
    for agent in &s.agents {
        let mut steps = Vec::with_capacity(snapshots.len());
        for (i, branches) in &snapshots {
            let (state, ensemble) = assignment_for(&agent.observes, branches, policy)?;
            steps.push(AssignedState {
                after_event: *i,
                state,
                ensemble,
            });
        }
        let resolved = |r: &str| {
            finals
                .iter()
                .all(|b| b.record(r).and_then(RecordValue::outcome).is_some())
        };
        let mut known_records: Vec<String> = Vec::new();
        for e in &s.events {
            let candidate = match e {
                Event::Measure {
                    agent: a, record, ..
                } if *a == agent.name => Some(record),
                Event::Signal {
                    record, targets, ..
                } if targets.iter().any(|t| agent.observes.contains(t)) => Some(record),
                _ => None,
            };
            if let Some(r) = candidate {
                if resolved(r) && !known_records.contains(r) {
                    known_records.push(r.clone());
                }
            }
        }
        out.insert(
            agent.name.clone(),
            StateAssignment {
                agent: agent.name.clone(),
                observes: agent.observes.clone(),
                steps,
                known_records,
            },
        );
    }
    Ok(out)
}

/// Exact and sampled outcome ensembles of the final state.
#[derive(Debug, Clone)]
pub struct RunEnsembles {
    /// Branches weighted by their Born probabilities.
    pub exact: Ensemble,
    /// Distinct sampled-outcome paths weighted by observed frequency.
    pub empirical: Ensemble,
    /// Sampled outcome path and count for each empirical entry.
    pub paths: Vec<(Vec<(String, String)>, u64)>,
}

pub fn ensemble_over_runs(
    s: &Scenario,
    policy: &Policy,
    n: u64,
    seed: u64,
) -> Result<RunEnsembles> {
    if matches!(policy, Policy::UnitaryOnly) {
        return Err(Error::PolicyHasNoOutcomes);
    }
    let exact = ensemble_of(&exact_branches(s, policy)?)?;
    let runs = run_batch(s, policy, n, seed, |t| {
        let path: Vec<(String, String)> = t
            .outcomes()
            .map(|(r, o)| (r.to_string(), o.to_string()))
            .collect();
        (path, t.final_state)
    })?;
    let mut groups: BTreeMap<Vec<(String, String)>, (u64, PureState)> = BTreeMap::new();
    for (path, state) in runs {
        groups.entry(path).or_insert((0, state)).0 += 1;
    }
    let total = n as f64;
    let paths = groups.iter().map(|(p, (c, _))| (p.clone(), *c)).collect();
    let empirical = Ensemble::new(
        groups
            .into_values()
            .map(|(c, st)| (c as f64 / total, st))
            .collect(),
    )?;
    Ok(RunEnsembles {
        exact,
        empirical,
        paths,
    })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::FRAC_1_SQRT_2;

    use super::*;
    use crate::mixtures::density_from_pure;
    use crate::scenarios::{build_epr_bell, build_molecule_toy, build_wigners_friend};

    #[test]
    fn molecule_unitary_only_reaches_bell_state() {
        let s = build_molecule_toy();
        let uo = Policy::UnitaryOnly;
        let mut after_correlation = None;
        let compiled = Compiled::new(&s).unwrap();
        compiled
            .exact(&uo, |i, b| {
                if i == Some(0) {
                    after_correlation = Some(b[0].state.clone());
                }
            })
            .unwrap();
        let psi = after_correlation.unwrap();
        // |Φ+⟩ ⊗ |0⟩_C: indices |000⟩ = 0 and |110⟩ = 6
        assert!((psi.amps()[0].re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((psi.amps()[6].re - FRAC_1_SQRT_2).abs() < 1e-15);
        let finals = compiled.exact(&uo, |_, _| {}).unwrap();
        assert_eq!(finals.len(), 1);
        assert_eq!(
            finals[0].record("mW"),
            Some(&RecordValue::Certain("PhiPlus".into()))
        );
        assert_eq!(finals[0].record("mF"), Some(&RecordValue::Unresolved));
    }

    #[test]
    fn collapse_at_f_splits_into_two_branches() {
        let branches = exact_branches(&build_molecule_toy(), &Policy::collapse_at(["F"])).unwrap();
        assert_eq!(branches.len(), 2);
        for b in &branches {
            assert!((b.probability - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn unknown_cut_agent_is_rejected() {
        let err =
            exact_branches(&build_molecule_toy(), &Policy::collapse_at(["Nobody"])).unwrap_err();
        assert!(matches!(err, Error::InvalidPolicy(_)));
    }

    #[test]
    fn unitary_only_has_no_ensemble() {
        let err =
            ensemble_over_runs(&build_epr_bell(0.0), &Policy::UnitaryOnly, 10, 1).unwrap_err();
        assert_eq!(err, Error::PolicyHasNoOutcomes);
    }

    #[test]
    fn friend_marginal_stays_mixed_after_unitary_only_measurement() {
        let a = assign_states(&build_wigners_friend(), &Policy::UnitaryOnly).unwrap();
        let f = &a["F"];
        assert_eq!(f.steps.len(), 4);
        let last = &f.last().state;
        assert!(matches!(
            last.provenance(),
            Provenance::ImproperFromTrace { .. }
        ));
        assert!((last.matrix()[(0, 0)].re - 0.5).abs() < 1e-12);
        assert!(last.matrix()[(0, 1)].norm() < 1e-12);
        assert!(f.known_records.is_empty());
    }

    #[test]
    fn collapse_assignments_carry_the_ensemble() {
        let a = assign_states(&build_molecule_toy(), &Policy::collapse_at(["F"])).unwrap();
        let w = a["W"].last();
        assert!(matches!(
            w.state.provenance(),
            Provenance::ProperFromEnsemble(_)
        ));
        assert_eq!(w.ensemble.as_ref().unwrap().len(), 2);
        assert_eq!(a["F"].known_records, vec!["mF".to_string()]);
        let uo = assign_states(&build_molecule_toy(), &Policy::UnitaryOnly).unwrap();
        let pure = density_from_pure(
            &exact_branches(&build_molecule_toy(), &Policy::UnitaryOnly).unwrap()[0].state,
        );
        assert!(uo["W"].last().state.matrix_distance(&pure) < 1e-15);
    }

    #[test]
    fn trajectories_are_deterministic() {
        let s = build_molecule_toy();
        let p = Policy::collapse_at(["F"]);
        let a = run_trajectory(&s, &p, &mut TrajectoryRng::new(7, 3)).unwrap();
        let b = run_trajectory(&s, &p, &mut TrajectoryRng::new(7, 3)).unwrap();
        assert_eq!(a.records, b.records);
        assert_eq!(a.readouts, b.readouts);
        assert_eq!(a.final_state, b.final_state);
        assert_eq!(a.outcomes().count(), 1);
    }
}
