//! Seeded generator of valid scenarios.

use std::f64::consts::PI;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wignerlab::hilbert::{Register, C64};
use wignerlab::policies::Policy;
use wignerlab::scenarios::{
    Agent, BasisSpec, Check, CheckKind, Event, Preparation, Scenario, UnitarySpec,
};

fn amplitude(rng: &mut ChaCha8Rng) -> C64 {
    match rng.random_range(0..5) {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(-1.0, 0.0),
        2 => C64::new(rng.random_range(-1.0..1.0), 0.0),
        3 => C64::new(0.0, rng.random_range(-1.0..1.0)),
        _ => C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
    }
}

fn subset<'a>(rng: &mut ChaCha8Rng, items: &'a [String], max: usize) -> Vec<String> {
    let k = rng.random_range(1..=items.len().min(max));
    let mut v: Vec<&'a String> = items.choose_multiple(rng, k).collect();
    v.shuffle(rng);
    v.into_iter().cloned().collect()
}

fn basis_for(rng: &mut ChaCha8Rng, reg: &Register, targets: &[String]) -> BasisSpec {
    let qubits = targets.iter().all(|t| reg.dim_of(t) == Some(2));
    if !qubits {
        return BasisSpec::Computational;
    }
    match rng.random_range(0..4) {
        0 => BasisSpec::Computational,
        1 => BasisSpec::Spin(targets.iter().map(|_| rng.random_range(-PI..PI)).collect()),
        2 if targets.len() >= 2 => BasisSpec::Bell,
        _ => BasisSpec::TotalSpin,
    }
}

fn labels_of(reg: &Register, basis: &BasisSpec, targets: &[String]) -> Vec<String> {
    basis
        .resolve(reg, targets)
        .unwrap()
        .labels()
        .map(str::to_string)
        .collect()
}

fn local_unitary(rng: &mut ChaCha8Rng, dim: usize) -> UnitarySpec {
    match (dim, rng.random_range(0..4)) {
        (_, 0) => UnitarySpec::Hadamard,
        (_, 1) => UnitarySpec::Flip,
        (2, 2) => {
            let (a, b) = (rng.random_range(-PI..PI), rng.random_range(-PI..PI));
            let z = C64::new(0.0, 0.0);
            UnitarySpec::Literal(vec![
                vec![C64::from_polar(1.0, a), z],
                vec![z, C64::from_polar(1.0, b)],
            ])
        }
        (2, _) => {
            let t: f64 = rng.random_range(-PI..PI);
            let (c, s) = (C64::new(t.cos(), 0.0), C64::new(t.sin(), 0.0));
            UnitarySpec::Literal(vec![vec![c, -s], vec![s, c]])
        }
        _ => UnitarySpec::Ident,
    }
}

/// A valid scenario with at most 5 subsystems and 10 events.
pub fn random_scenario(seed: u64) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=5);
    let labels: Vec<String> = (0..n).map(|i| format!("S{i}")).collect();
    let mut dims: Vec<usize> = Vec::with_capacity(n);
    for _ in 0..n {
        let d = match rng.random_range(0..10) {
            0..=5 => 2,
            6 | 7 => 3,
            8 => 4,
            _ => 12,
        };
        // Keep the joint dimension within the dense-simulation cap.
        let room = wignerlab::hilbert::MAX_TOTAL_DIM / dims.iter().product::<usize>().max(1);
        dims.push(if d * 2usize.pow((n - dims.len() - 1) as u32) <= room {
            d
        } else {
            2
        });
    }
    let register = Register::new(labels.iter().cloned().zip(dims.iter().copied())).unwrap();

    let mut order = labels.clone();
    order.shuffle(&mut rng);
    let mut preparation = Vec::new();
    let mut rest = order.as_slice();
    while !rest.is_empty() {
        let take = rng.random_range(1..=rest.len().min(2));
        let targets = rest[..take].to_vec();
        rest = &rest[take..];
        let tdims: Vec<usize> = targets
            .iter()
            .map(|t| register.dim_of(t).unwrap())
            .collect();
        let mut terms: Vec<(C64, Vec<usize>)> = Vec::new();
        for _ in 0..rng.random_range(1..=3) {
            let digits: Vec<usize> = tdims.iter().map(|&d| rng.random_range(0..d)).collect();
            if terms.iter().all(|(_, d)| *d != digits) {
                terms.push((amplitude(&mut rng), digits));
            }
        }
        preparation.push(Preparation { targets, terms });
    }

    let mut agents: Vec<Agent> = (0..rng.random_range(1..=3))
        .map(|i| Agent {
            name: format!("Ag{i}"),
            observes: subset(&mut rng, &labels, 5),
        })
        .collect();
    agents.push(Agent {
        name: "Obs".into(),
        observes: labels.clone(),
    });
    let names: Vec<String> = agents.iter().map(|a| a.name.clone()).collect();

    let policies = (0..rng.random_range(0..=2))
        .map(|_| {
            if rng.random_bool(0.3) {
                Policy::UnitaryOnly
            } else {
                Policy::collapse_at(subset(&mut rng, &names, 3))
            }
        })
        .collect();

    let mut events = Vec::new();
    let mut measured: Vec<(String, Vec<String>, Vec<String>)> = Vec::new();
    for i in 0..rng.random_range(0..=10) {
        let e = match rng.random_range(0..5) {
            0 | 1 => {
                let agent = agents[rng.random_range(0..agents.len() - 1)].clone();
                let targets = subset(&mut rng, &agent.observes, 2);
                let basis = basis_for(&mut rng, &register, &targets);
                let record = format!("r{i}");
                measured.push((
                    record.clone(),
                    labels_of(&register, &basis, &targets),
                    targets.clone(),
                ));
                Event::Measure {
                    agent: agent.name,
                    basis,
                    targets,
                    record,
                }
            }
            2 if !measured.is_empty() => {
                let (record, outcomes, busy) = measured.choose(&mut rng).unwrap().clone();
                let free: Vec<&String> = labels.iter().filter(|l| !busy.contains(l)).collect();
                match free.choose(&mut rng) {
                    Some(t) => Event::Signal {
                        record,
                        outcome: outcomes.choose(&mut rng).unwrap().clone(),
                        unitary: local_unitary(&mut rng, register.dim_of(t).unwrap()),
                        targets: vec![(*t).clone()],
                    },
                    None => Event::Noop,
                }
            }
            3 => {
                let pair: Vec<String> = subset(&mut rng, &labels, 2);
                if pair.len() == 2 && register.dim_of(&pair[0]) == register.dim_of(&pair[1]) {
                    Event::Unitary {
                        unitary: UnitarySpec::Correlate,
                        targets: pair,
                    }
                } else {
                    let t = pair[0].clone();
                    Event::Unitary {
                        unitary: local_unitary(&mut rng, register.dim_of(&t).unwrap()),
                        targets: vec![t],
                    }
                }
            }
            _ => Event::Noop,
        };
        events.push(e);
    }

    let checks = (0..rng.random_range(0..=4))
        .map(|_| {
            let targets = subset(&mut rng, &labels, 3);
            let kind = match rng.random_range(0..4) {
                0 => CheckKind::Outcome {
                    outcome: String::new(),
                },
                1 => CheckKind::Distribution,
                2 => CheckKind::Definite,
                _ => CheckKind::Witness,
            };
            let mut targets = targets;
            if kind == CheckKind::Witness {
                targets.truncate(2);
            }
            let basis = basis_for(&mut rng, &register, &targets);
            let kind = match kind {
                CheckKind::Outcome { .. } => CheckKind::Outcome {
                    outcome: labels_of(&register, &basis, &targets)
                        .choose(&mut rng)
                        .unwrap()
                        .clone(),
                },
                k => k,
            };
            let tol = match rng.random_range(0..3) {
                0 => 1e-9,
                1 => 1e-6,
                _ => rng.random_range(1e-12..0.5),
            };
            Check {
                kind,
                basis,
                targets,
                agents: vec!["Obs".into()],
                tol,
            }
        })
        .collect();

    Scenario {
        name: format!("random_{seed}"),
        register,
        agents,
        preparation,
        policies,
        events,
        checks,
    }
}
