use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};

use super::basis::MeasurementBasis;
use super::linalg::unitarity_error;
use super::operator::{Operator, OperatorKind};
use super::register::{Register, Split};
use super::{C64, EPS_NORM};

/// Normalized amplitude vector over a register.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    register: Register,
    amps: Vec<C64>,
    renormalized: bool,
}

impl PureState {
    /// Normalizes `amps`; `was_renormalized` reports whether the input
    /// norm was off by more than `EPS_NORM`.
    pub fn from_amplitudes(register: Register, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != register.total_dim() {
            return Err(Error::LengthMismatch {
                expected: register.total_dim(),
                actual: amps.len(),
            });
        }
        let norm = norm(&amps);
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::ZeroVector);
        }
        let renormalized = (norm - 1.0).abs() > EPS_NORM;
        let amps = if norm == 1.0 {
            amps
        } else {
            amps.into_iter().map(|a| a / norm).collect()
        };
        Ok(Self {
            register,
            amps,
            renormalized,
        })
    }

    /// Computational basis state `|d_0 d_1 …⟩`, one digit per subsystem.
    pub fn basis(register: Register, digits: &[usize]) -> Result<Self> {
        if digits.len() != register.len() {
            return Err(Error::LengthMismatch {
                expected: register.len(),
                actual: digits.len(),
            });
        }
        let mut index = 0;
        for (&d, dim) in digits.iter().zip(register.dims()) {
            if d >= dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: d + 1,
                });
            }
            index = index * dim + d;
        }
        let mut amps = vec![C64::new(0.0, 0.0); register.total_dim()];
        amps[index] = C64::new(1.0, 0.0);
        Ok(Self {
            register,
            amps,
            renormalized: false,
        })
    }

    /// Wraps amplitudes already known to have unit norm.
    pub(crate) fn from_normalized(register: Register, amps: Vec<C64>) -> Self {
        debug_assert_eq!(register.total_dim(), amps.len());
        Self {
            register,
            amps,
            renormalized: false,
        }
    }

    pub fn register(&self) -> &Register {
        &self.register
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amps)
    }

    pub fn was_renormalized(&self) -> bool {
        self.renormalized
    }

    pub fn inner(&self, other: &PureState) -> Result<C64> {
        if self.register != other.register {
            return Err(Error::RegisterMismatch);
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn max_abs_diff(&self, other: &PureState) -> f64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Same state with the subsystems listed in `order`.
    pub fn reordered<S: AsRef<str>>(&self, order: &[S]) -> Result<PureState> {
        if order.len() != self.register.len() {
            return Err(Error::RegisterMismatch);
        }
        let register = self.register.select(order)?;
        let split = self.register.split(order)?;
        let amps = (0..split.target_dim)
            .map(|t| self.amps[split.index(t, 0)])
            .collect();
        Ok(PureState {
            register,
            amps,
            renormalized: self.renormalized,
        })
    }

    /// `P_i ψ / ‖P_i ψ‖` with the outcome probability, or `None` when the
    /// outcome has zero weight.
    pub fn collapse(
        &self,
        basis: &MeasurementBasis,
        outcome: usize,
    ) -> Result<(f64, Option<PureState>)> {
        let split = basis.split_in(&self.register)?;
        let projected = basis.project(outcome, &self.amps, &split);
        let n = norm(&projected);
        let p = n * n;
        if n == 0.0 {
            return Ok((0.0, None));
        }
        let amps = projected.into_iter().map(|a| a / n).collect();
        Ok((
            p,
            Some(PureState::from_normalized(self.register.clone(), amps)),
        ))
    }
}

fn norm(amps: &[C64]) -> f64 {
    amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

pub fn from_amplitudes(register: Register, amps: Vec<C64>) -> Result<PureState> {
    PureState::from_amplitudes(register, amps)
}

/// `s1 ⊗ s2` on the concatenated register.
pub fn tensor_product(s1: &PureState, s2: &PureState) -> Result<PureState> {
    let register = s1.register.concat(&s2.register)?;
    let amps = s1
        .amps
        .iter()
        .flat_map(|a| s2.amps.iter().map(move |b| a * b))
        .collect();
    Ok(PureState {
        register,
        amps,
        renormalized: s1.renormalized || s2.renormalized,
    })
}

pub(crate) fn apply_local(amps: &[C64], split: &Split, matrix: &DMatrix<C64>) -> Vec<C64> {
    let d = split.target_dim;
    let mut out = vec![C64::new(0.0, 0.0); amps.len()];
    let mut column = vec![C64::new(0.0, 0.0); d];
    for r in 0..split.rest_dim {
        for (t, slot) in column.iter_mut().enumerate() {
            *slot = amps[split.index(t, r)];
        }
        for row in 0..d {
            let mut acc = C64::new(0.0, 0.0);
            for (t, &c) in column.iter().enumerate() {
                let m = matrix[(row, t)];
                if m != C64::new(0.0, 0.0) {
                    acc += m * c;
                }
            }
            out[split.index(row, r)] = acc;
        }
    }
    out
}

fn checked_split<S: AsRef<str>>(register: &Register, u: &Operator, targets: &[S]) -> Result<Split> {
    let split = register.split(targets)?;
    let dims: Vec<usize> = targets
        .iter()
        .map(|t| register.dim_of(t.as_ref()).unwrap_or(0))
        .collect();
    if dims != u.dims() {
        return Err(Error::DimensionMismatch {
            expected: u.dim(),
            actual: split.target_dim,
        });
    }
    Ok(split)
}

/// Applies `u` to the `targets` factor, identity elsewhere.
pub fn apply_unitary<S: AsRef<str>>(
    state: &PureState,
    u: &Operator,
    targets: &[S],
) -> Result<PureState> {
    if u.kind() != OperatorKind::Unitary {
        return Err(Error::NotUnitary(unitarity_error(u.matrix())));
    }
    let split = checked_split(&state.register, u, targets)?;
    Ok(PureState {
        register: state.register.clone(),
        amps: apply_local(&state.amps, &split, u.matrix()),
        renormalized: state.renormalized,
    })
}

/// Coherently controlled `u`: `(I − P) ψ + (U ⊗ P) ψ` where `P` is the
/// projector of `outcome` in `control` and `u` acts on disjoint `targets`.
pub(crate) fn apply_controlled<S: AsRef<str>>(
    state: &PureState,
    control: &MeasurementBasis,
    outcome: usize,
    u: &Operator,
    targets: &[S],
) -> Result<PureState> {
    let control_split = control.split_in(&state.register)?;
    let split = checked_split(&state.register, u, targets)?;
    let projected = control.project(outcome, &state.amps, &control_split);
    let rotated = apply_local(&projected, &split, u.matrix());
    let amps = state
        .amps
        .iter()
        .zip(projected.iter().zip(&rotated))
        .map(|(a, (p, r))| a - p + r)
        .collect();
    Ok(PureState {
        register: state.register.clone(),
        amps,
        renormalized: state.renormalized,
    })
}

/// Born probabilities `⟨ψ|P_i|ψ⟩` per outcome, clamped to [0, 1].
pub fn born_distribution(
    state: &PureState,
    basis: &MeasurementBasis,
) -> Result<Vec<(String, f64)>> {
    let split = basis.split_in(&state.register)?;
    Ok(basis
        .raw_probabilities(&state.amps, &split)
        .into_iter()
        .zip(basis.labels())
        .map(|(p, l)| (l.to_string(), p.clamp(0.0, 1.0)))
        .collect())
}

/// Draws an outcome by inverse-CDF on one uniform `f64` from `rng` and
/// returns it with the collapsed state `P_i ψ / ‖P_i ψ‖`.
pub fn sample_outcome<R: Rng + ?Sized>(
    state: &PureState,
    basis: &MeasurementBasis,
    rng: &mut R,
) -> Result<(String, PureState)> {
    let probs = born_distribution(state, basis)?;
    let u: f64 = rng.random();
    let total: f64 = probs.iter().map(|(_, p)| p).sum();
    let target = u * total;
    let mut acc = 0.0;
    let mut chosen = None;
    for (i, (_, p)) in probs.iter().enumerate() {
        if *p <= 0.0 {
            continue;
        }
        acc += p;
        chosen = Some(i);
        if target < acc {
            break;
        }
    }
    let i = chosen.ok_or(Error::ZeroVector)?;
    let (_, collapsed) = state.collapse(basis, i)?;
    Ok((probs[i].0.clone(), collapsed.ok_or(Error::ZeroVector)?))
}
