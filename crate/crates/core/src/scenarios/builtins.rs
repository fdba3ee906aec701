use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};
use crate::hilbert::{Register, C64};

use super::{
    Agent, BasisSpec, Check, CheckKind, Event, Preparation, Scenario, UnitarySpec, DEFAULT_TOL,
};

/// Largest environment for [`build_decoherence_demo`].
pub const MAX_ENV: usize = 10;

/// Built-in scenario names with a one-line description.
pub const BUILTINS: &[(&str, &str)] = &[
    (
        "epr_bell",
        "spin triplet on A,B; Alice measures z, Bob measures at angle theta; total-spin definability and joint distribution",
    ),
    (
        "wigners_friend",
        "friend F correlates with S through detector D; F's view of S against W's whole-lab Bell outcome",
    ),
    (
        "molecule_toy",
        "A,B correlated into a Bell state; W's Bell outcome PhiPlus excites C; photon probability per policy",
    ),
    (
        "decoherence_demo",
        "molecule toy with B copied into n environment qubits (--n-env); reduced coherence vs full-register Bell sector",
    ),
];

/// Parameters for the parameterized built-ins.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuiltinParams {
    pub theta: f64,
    pub n_env: usize,
}

impl Default for BuiltinParams {
    fn default() -> Self {
        Self {
            theta: 0.0,
            n_env: 4,
        }
    }
}

/// Looks up a built-in by name.
pub fn builtin(name: &str, params: BuiltinParams) -> Option<Result<Scenario>> {
    match name {
        "epr_bell" => Some(Ok(build_epr_bell(params.theta))),
        "wigners_friend" => Some(Ok(build_wigners_friend())),
        "molecule_toy" => Some(Ok(build_molecule_toy())),
        "decoherence_demo" => Some(build_decoherence_demo(params.n_env)),
        _ => None,
    }
}

fn qubits(labels: &[&str]) -> Register {
    Register::new(labels.iter().map(|l| (*l, 2))).expect("built-in register")
}

fn strs(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

fn even_superposition(target: &str) -> Preparation {
    let a = C64::new(FRAC_1_SQRT_2, 0.0);
    Preparation {
        targets: vec![target.to_string()],
        terms: vec![(a, vec![0]), (a, vec![1])],
    }
}

fn unitary(u: UnitarySpec, targets: &[&str]) -> Event {
    Event::Unitary {
        unitary: u,
        targets: strs(targets),
    }
}

fn measure(agent: &str, basis: BasisSpec, targets: &[&str], record: &str) -> Event {
    Event::Measure {
        agent: agent.into(),
        basis,
        targets: strs(targets),
        record: record.into(),
    }
}

fn check(kind: CheckKind, basis: BasisSpec, targets: &[&str], agents: &[&str]) -> Check {
    Check {
        kind,
        basis,
        targets: strs(targets),
        agents: strs(agents),
        tol: DEFAULT_TOL,
    }
}

/// Spin triplet `(|01⟩ + |10⟩)/√2` on A,B; Alice measures A along z, Bob
/// measures B at polar angle `theta`.
pub fn build_epr_bell(theta: f64) -> Scenario {
    let a = C64::new(FRAC_1_SQRT_2, 0.0);
    Scenario {
        name: "epr_bell".into(),
        register: qubits(&["A", "B"]),
        agents: vec![
            Agent::new("Alice", ["A"]),
            Agent::new("Bob", ["B"]),
            Agent::new("Walter", ["A", "B"]),
        ],
        preparation: vec![Preparation {
            targets: strs(&["A", "B"]),
            terms: vec![(a, vec![0, 1]), (a, vec![1, 0])],
        }],
        policies: vec![],
        events: vec![
            measure("Alice", BasisSpec::Spin(vec![0.0]), &["A"], "mA"),
            measure("Bob", BasisSpec::Spin(vec![theta]), &["B"], "mB"),
        ],
        checks: vec![
            check(
                CheckKind::Definite,
                BasisSpec::TotalSpin,
                &["A", "B"],
                &["Walter"],
            ),
            check(
                CheckKind::Distribution,
                BasisSpec::Spin(vec![0.0, theta]),
                &["A", "B"],
                &["Walter"],
            ),
        ],
    }
}

/// System S in `(|0⟩ + |1⟩)/√2`, detector D and friend F ready in `|0⟩`.
/// Two correlations give `(|000⟩ + |111⟩)/√2`; F then measures S.
pub fn build_wigners_friend() -> Scenario {
    Scenario {
        name: "wigners_friend".into(),
        register: qubits(&["S", "D", "F"]),
        agents: vec![Agent::new("F", ["S"]), Agent::new("W", ["S", "D", "F"])],
        preparation: vec![
            even_superposition("S"),
            Preparation::basis("D", 0),
            Preparation::basis("F", 0),
        ],
        policies: vec![],
        events: vec![
            unitary(UnitarySpec::Correlate, &["S", "D"]),
            unitary(UnitarySpec::Correlate, &["D", "F"]),
            measure("F", BasisSpec::Computational, &["S"], "mF"),
        ],
        checks: vec![
            check(
                CheckKind::Distribution,
                BasisSpec::Computational,
                &["S"],
                &["F", "W"],
            ),
            check(
                CheckKind::Outcome {
                    outcome: "PhiPlus".into(),
                },
                BasisSpec::Bell,
                &["S", "D", "F"],
                &["W"],
            ),
        ],
    }
}

/// A in `(|0⟩ + |1⟩)/√2` correlated with B; F reads A,B in the z basis,
/// W in the Bell basis, and `PhiPlus` flips C.
pub fn build_molecule_toy() -> Scenario {
    build_decoherence_demo(0).expect("n_env = 0 is in range")
}

/// The molecule toy with B copied into `n_env` environment qubits
/// `E1..En`; W's Bell measurement spans A, B and the environment.
/// `n_env = 0` is exactly [`build_molecule_toy`].
pub fn build_decoherence_demo(n_env: usize) -> Result<Scenario> {
    if n_env > MAX_ENV {
        return Err(Error::TooLarge(1 << (3 + n_env)));
    }
    let env: Vec<String> = (1..=n_env).map(|k| format!("E{k}")).collect();
    let env_refs: Vec<&str> = env.iter().map(String::as_str).collect();
    let mut labels = vec!["A", "B", "C"];
    labels.extend(&env_refs);
    let mut w_targets = vec!["A", "B"];
    w_targets.extend(&env_refs);
    let mut w_observes = vec!["A", "B", "C"];
    w_observes.extend(&env_refs);

    let mut preparation = vec![
        even_superposition("A"),
        Preparation::basis("B", 0),
        Preparation::basis("C", 0),
    ];
    preparation.extend(env_refs.iter().map(|e| Preparation::basis(e, 0)));

    let mut events = vec![unitary(UnitarySpec::Correlate, &["A", "B"])];
    events.extend(
        env_refs
            .iter()
            .map(|e| unitary(UnitarySpec::Correlate, &["B", e])),
    );
    events.push(measure("F", BasisSpec::Computational, &["A", "B"], "mF"));
    events.push(measure("W", BasisSpec::Bell, &w_targets, "mW"));
    events.push(Event::Signal {
        record: "mW".into(),
        outcome: "PhiPlus".into(),
        unitary: UnitarySpec::Flip,
        targets: strs(&["C"]),
    });

    let mut checks = vec![check(
        CheckKind::Outcome {
            outcome: "1".into(),
        },
        BasisSpec::Computational,
        &["C"],
        &["F", "W"],
    )];
    if n_env > 0 {
        checks.push(check(
            CheckKind::Witness,
            BasisSpec::Computational,
            &["A", "B"],
            &["F", "W"],
        ));
        checks.push(check(
            CheckKind::Outcome {
                outcome: "PhiPlus".into(),
            },
            BasisSpec::Bell,
            &w_targets,
            &["W"],
        ));
    }

    Ok(Scenario {
        name: if n_env == 0 {
            "molecule_toy"
        } else {
            "decoherence_demo"
        }
        .into(),
        register: qubits(&labels),
        agents: vec![
            Agent::new("F", ["A", "B", "C"]),
            Agent::new("W", w_observes),
        ],
        preparation,
        policies: vec![],
        events,
        checks,
    })
}
