//! Event-sequence model of nested-observer experiments and the built-in
//! constructions.
//!
//! A [`Scenario`] is plain data: the register, who observes what, how each
//! factor is prepared, the ordered events and the checks to evaluate on
//! the final state. Operators and bases are named symbolically
//! ([`UnitarySpec`], [`BasisSpec`]) and resolved against the register on
//! demand, so scenarios compare structurally and round-trip through text.

mod builtins;
mod validate;

use std::fmt;

use crate::error::{Error, Result};
use crate::hilbert::{tensor_product, MeasurementBasis, Operator, PureState, Register, C64};
use crate::numfmt::g17;
use crate::policies::Policy;

pub use builtins::{
    build_decoherence_demo, build_epr_bell, build_molecule_toy, build_wigners_friend, builtin,
    BuiltinParams, BUILTINS, MAX_ENV,
};
pub use validate::{is_identifier, validate_scenario, Item, ValidationError, MAX_WITNESS_DIM};

/// Default tolerance for analytic comparisons.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Agent {
    pub name: String,
    pub observes: Vec<String>,
}

impl Agent {
    pub fn new<S: Into<String>>(name: &str, observes: impl IntoIterator<Item = S>) -> Self {
        Self {
            name: name.to_string(),
            observes: observes.into_iter().map(Into::into).collect(),
        }
    }
}

/// Superposition `Σ a_k |digits_k⟩` on the factor `targets`.
#[derive(Debug, Clone, PartialEq)]
pub struct Preparation {
    pub targets: Vec<String>,
    pub terms: Vec<(C64, Vec<usize>)>,
}

impl Preparation {
    pub fn basis(target: &str, digit: usize) -> Self {
        Self {
            targets: vec![target.to_string()],
            terms: vec![(C64::new(1.0, 0.0), vec![digit])],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum UnitarySpec {
    Ident,
    Hadamard,
    Correlate,
    Flip,
    /// Row-major matrix on the targets' joint factor.
    Literal(Vec<Vec<C64>>),
}

impl UnitarySpec {
    pub fn resolve<S: AsRef<str>>(&self, register: &Register, targets: &[S]) -> Result<Operator> {
        let mut dims = Vec::with_capacity(targets.len());
        for (i, t) in targets.iter().enumerate() {
            let t = t.as_ref();
            let d = register
                .dim_of(t)
                .ok_or_else(|| Error::UnknownTarget(t.to_string()))?;
            if targets[..i].iter().any(|u| u.as_ref() == t) {
                return Err(Error::DuplicateTarget(t.to_string()));
            }
            dims.push(d);
        }
        let arity = |n: usize, name: &str| {
            if dims.len() == n {
                Ok(())
            } else {
                Err(Error::InvalidUnitary(format!(
                    "{name} takes {n} target(s), got {}",
                    dims.len()
                )))
            }
        };
        match self {
            UnitarySpec::Ident => {
                if dims.is_empty() {
                    return Err(Error::InvalidUnitary("IDENT needs a target".into()));
                }
                Ok(Operator::identity(dims))
            }
            UnitarySpec::Hadamard => {
                arity(1, "HADAMARD")?;
                Ok(Operator::hadamard(dims[0]))
            }
            UnitarySpec::Flip => {
                arity(1, "FLIP")?;
                Ok(Operator::flip(dims[0]))
            }
            UnitarySpec::Correlate => {
                arity(2, "CORRELATE")?;
                if dims[0] != dims[1] {
                    return Err(Error::InvalidUnitary(format!(
                        "CORRELATE needs equal dimensions, got {} and {}",
                        dims[0], dims[1]
                    )));
                }
                Ok(Operator::correlate(dims[0]))
            }
            UnitarySpec::Literal(rows) => {
                if dims.is_empty() {
                    return Err(Error::InvalidUnitary("matrix needs a target".into()));
                }
                let n: usize = dims.iter().product();
                if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        actual: rows.len(),
                    });
                }
                let m = nalgebra::DMatrix::from_fn(n, n, |i, j| rows[i][j]);
                Operator::unitary(dims, m)
            }
        }
    }
}

impl fmt::Display for UnitarySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UnitarySpec::Ident => f.write_str("IDENT"),
            UnitarySpec::Hadamard => f.write_str("HADAMARD"),
            UnitarySpec::Correlate => f.write_str("CORRELATE"),
            UnitarySpec::Flip => f.write_str("FLIP"),
            UnitarySpec::Literal(rows) => {
                let rows: Vec<String> = rows
                    .iter()
                    .map(|r| {
                        r.iter()
                            .map(|&z| complex_literal(z))
                            .collect::<Vec<_>>()
                            .join(", ")
                    })
                    .collect();
                write!(f, "[{}]", rows.join("; "))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BasisSpec {
    Computational,
    Bell,
    /// Polar angle (radians) per target qubit.
    Spin(Vec<f64>),
    TotalSpin,
}

impl BasisSpec {
    pub fn resolve<S: AsRef<str>>(
        &self,
        register: &Register,
        targets: &[S],
    ) -> Result<MeasurementBasis> {
        match self {
            BasisSpec::Computational => MeasurementBasis::computational(register, targets),
            BasisSpec::Bell => MeasurementBasis::bell(register, targets),
            BasisSpec::Spin(angles) => MeasurementBasis::spin(register, targets, angles),
            BasisSpec::TotalSpin => MeasurementBasis::total_spin(register, targets),
        }
    }
}

impl fmt::Display for BasisSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasisSpec::Computational => f.write_str("computational"),
            BasisSpec::Bell => f.write_str("bell"),
            BasisSpec::TotalSpin => f.write_str("total_spin"),
            BasisSpec::Spin(angles) => {
                let a: Vec<String> = angles.iter().map(|&x| g17(x)).collect();
                write!(f, "spin({})", a.join(","))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Event {
    Unitary {
        unitary: UnitarySpec,
        targets: Vec<String>,
    },
    /// Active (sampled and collapsed) only when `agent` is inside the
    /// policy's cut; otherwise the state is left alone.
    Measure {
        agent: String,
        basis: BasisSpec,
        targets: Vec<String>,
        record: String,
    },
    /// Applies `unitary` when the earlier measurement `record` produced
    /// `outcome`.
    Signal {
        record: String,
        outcome: String,
        unitary: UnitarySpec,
        targets: Vec<String>,
    },
    Noop,
}

impl Event {
    pub fn targets(&self) -> &[String] {
        match self {
            Event::Unitary { targets, .. }
            | Event::Measure { targets, .. }
            | Event::Signal { targets, .. } => targets,
            Event::Noop => &[],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CheckKind {
    /// Probability of one outcome.
    Outcome { outcome: String },
    /// Full outcome distribution.
    Distribution,
    /// Whether the state sits in a single outcome sector.
    Definite,
    /// Largest inter-outcome coherence of the reduced state on the targets.
    Witness,
}

impl CheckKind {
    pub fn name(&self) -> &'static str {
        match self {
            CheckKind::Outcome { .. } => "outcome",
            CheckKind::Distribution => "distribution",
            CheckKind::Definite => "definite",
            CheckKind::Witness => "witness",
        }
    }
}

/// Quantity compared across agents and policies on the final state.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub kind: CheckKind,
    pub basis: BasisSpec,
    pub targets: Vec<String>,
    pub agents: Vec<String>,
    pub tol: f64,
}

impl Check {
    pub fn describe(&self) -> String {
        let targets = self.targets.join(",");
        match &self.kind {
            CheckKind::Outcome { outcome } => {
                format!("P({targets}=={outcome}) in {} basis", self.basis)
            }
            kind => format!("{} of {targets} in {} basis", kind.name(), self.basis),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub register: Register,
    pub agents: Vec<Agent>,
    pub preparation: Vec<Preparation>,
    pub policies: Vec<Policy>,
    pub events: Vec<Event>,
    pub checks: Vec<Check>,
}

impl Scenario {
    pub fn agent(&self, name: &str) -> Option<&Agent> {
        self.agents.iter().find(|a| a.name == name)
    }

    /// Tensor product of the prepared factors, in register order.
    pub fn initial_state(&self) -> Result<PureState> {
        let mut joint: Option<PureState> = None;
        for prep in &self.preparation {
            let factor = prepare_factor(&self.register, prep)?;
            joint = Some(match joint {
                None => factor,
                Some(s) => tensor_product(&s, &factor)?,
            });
        }
        let joint = joint.ok_or(Error::ZeroVector)?;
        if joint.register().len() != self.register.len() {
            let missing = self
                .register
                .labels()
                .find(|l| !joint.register().contains(l))
                .unwrap_or_default();
            return Err(Error::UnknownTarget(missing.to_string()));
        }
        let order: Vec<&str> = self.register.labels().collect();
        joint.reordered(&order)
    }

    /// Agents that own at least one measurement, in first-use order.
    pub fn measuring_agents(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for e in &self.events {
            if let Event::Measure { agent, .. } = e {
                if !out.contains(&agent.as_str()) {
                    out.push(agent);
                }
            }
        }
        out
    }

    /// The scenario's own POLICY lines, or unitary-only against a cut at
    /// the first measuring agent when it declares none.
    pub fn default_policies(&self) -> Vec<Policy> {
        if !self.policies.is_empty() {
            return self.policies.clone();
        }
        let mut out = vec![Policy::UnitaryOnly];
        if let Some(first) = self.measuring_agents().first() {
            out.push(Policy::collapse_at([*first]));
        }
        out
    }
}

pub(crate) fn prepare_factor(register: &Register, prep: &Preparation) -> Result<PureState> {
    let factor = register.select(&prep.targets)?;
    let dims = factor.dims();
    let mut amps = vec![C64::new(0.0, 0.0); factor.total_dim()];
    for (a, digits) in &prep.terms {
        if digits.len() != dims.len() {
            return Err(Error::LengthMismatch {
                expected: dims.len(),
                actual: digits.len(),
            });
        }
        let mut index = 0;
        for (&d, &dim) in digits.iter().zip(&dims) {
            if d >= dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: d + 1,
                });
            }
            index = index * dim + d;
        }
        amps[index] += a;
    }
    PureState::from_amplitudes(factor, amps)
}

/// `re`, or `(re+imi)` when the imaginary part is nonzero.
pub(crate) fn complex_literal(z: C64) -> String {
    if z.im == 0.0 {
        g17(z.re)
    } else if z.im.is_sign_negative() {
        format!("({}-{}i)", g17(z.re), g17(-z.im))
    } else {
        format!("({}+{}i)", g17(z.re), g17(z.im))
    }
}
