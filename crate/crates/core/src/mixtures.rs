//! Density operators that remember where they came from.
//!
//! A reduced state obtained by partial trace (an *improper* mixture) and an
//! ensemble average over known alternatives (a *proper* mixture) can have
//! the same matrix. [`DensityOperator`] keeps the distinction as an
//! immutable [`Provenance`] tag, and deliberately has no `PartialEq`:
//! compare matrices explicitly with [`DensityOperator::matrix_distance`].

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::hilbert::linalg::{eigvalsh, hermiticity_error, spectral_norm};
use crate::hilbert::{
    MeasurementBasis, Operator, OperatorKind, PureState, Register, C64, EPS_NORM,
};

/// Probability-weighted list of pure states on one register.
#[derive(Debug, Clone)]
pub struct Ensemble {
    register: Register,
    entries: Vec<(f64, PureState)>,
}

impl Ensemble {
    pub fn new(entries: Vec<(f64, PureState)>) -> Result<Self> {
        let register = match entries.first() {
            Some((_, s)) => s.register().clone(),
            None => return Err(Error::ProbabilitySumInvalid(0.0)),
        };
        if entries.iter().any(|(_, s)| s.register() != &register) {
            return Err(Error::RegisterMismatch);
        }
        let sum: f64 = entries.iter().map(|(p, _)| p).sum();
        if entries.iter().any(|(p, _)| !(*p >= 0.0)) || !((sum - 1.0).abs() <= EPS_NORM) {
            return Err(Error::ProbabilitySumInvalid(sum));
        }
        Ok(Self { register, entries })
    }

    pub fn register(&self) -> &Register {
        &self.register
    }

    pub fn entries(&self) -> &[(f64, PureState)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone)]
pub enum Provenance {
    Pure,
    ProperFromEnsemble(Arc<Ensemble>),
    ImproperFromTrace {
        parent: String,
        discarded: Vec<String>,
    },
}

impl Provenance {
    pub fn kind(&self) -> &'static str {
        match self {
            Provenance::Pure => "pure",
            Provenance::ProperFromEnsemble(_) => "proper",
            Provenance::ImproperFromTrace { .. } => "improper",
        }
    }
}

#[derive(Debug, Clone)]
pub struct DensityOperator {
    register: Register,
    matrix: DMatrix<C64>,
    provenance: Provenance,
}

impl DensityOperator {
    /// Wraps a matrix, checking Hermiticity, unit trace and positivity
    /// within `EPS_NORM`.
    pub fn new(register: Register, matrix: DMatrix<C64>, provenance: Provenance) -> Result<Self> {
        let n = register.total_dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: matrix.nrows(),
            });
        }
        let herm = hermiticity_error(&matrix);
        if herm > EPS_NORM {
            return Err(Error::NotHermitian(herm));
        }
        let rho = Self {
            register,
            matrix,
            provenance,
        };
        let tr = rho.trace();
        if (tr - 1.0).abs() > EPS_NORM {
            return Err(Error::ProbabilitySumInvalid(tr));
        }
        if rho.eigenvalues().first().is_some_and(|&v| v < -EPS_NORM) {
            return Err(Error::InvalidBasis(
                "matrix is not positive semidefinite".into(),
            ));
        }
        Ok(rho)
    }

    pub(crate) fn from_parts(
        register: Register,
        matrix: DMatrix<C64>,
        provenance: Provenance,
    ) -> Self {
        Self {
            register,
            matrix,
            provenance,
        }
    }

    pub fn register(&self) -> &Register {
        &self.register
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn trace(&self) -> f64 {
        self.matrix.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn purity(&self) -> f64 {
        // Tr(ρ²) = Σ |ρ_ij|² for Hermitian ρ
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        eigvalsh(&self.matrix)
    }

    pub fn hermiticity_error(&self) -> f64 {
        hermiticity_error(&self.matrix)
    }

    /// Largest entrywise difference between the two matrices, ignoring provenance.
    pub fn matrix_distance(&self, other: &DensityOperator) -> f64 {
        if self.matrix.shape() != other.matrix.shape() {
            return f64::INFINITY;
        }
        self.matrix
            .iter()
            .zip(other.matrix.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn born_distribution(&self, basis: &MeasurementBasis) -> Result<Vec<(String, f64)>> {
        sector_weights(&StateSource::Mixed(self), basis).map(|w| {
            basis
                .labels()
                .zip(w)
                .map(|(l, p)| (l.to_string(), p))
                .collect()
        })
    }
}

impl fmt::Display for DensityOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labels: Vec<&str> = self.register.labels().collect();
        write!(
            f,
            "{} state on {}",
            self.provenance.kind(),
            labels.join(",")
        )
    }
}

/// Either kind of state, for operations accepting both.
#[derive(Debug, Clone, Copy)]
pub enum StateSource<'a> {
    Pure(&'a PureState),
    Mixed(&'a DensityOperator),
}

impl<'a> From<&'a PureState> for StateSource<'a> {
    fn from(s: &'a PureState) -> Self {
        StateSource::Pure(s)
    }
}

impl<'a> From<&'a DensityOperator> for StateSource<'a> {
    fn from(s: &'a DensityOperator) -> Self {
        StateSource::Mixed(s)
    }
}

impl StateSource<'_> {
    pub fn register(&self) -> &Register {
        match self {
            StateSource::Pure(s) => s.register(),
            StateSource::Mixed(r) => r.register(),
        }
    }

    fn describe(&self) -> String {
        let labels: Vec<&str> = self.register().labels().collect();
        let kind = match self {
            StateSource::Pure(_) => "pure",
            StateSource::Mixed(r) => r.provenance.kind(),
        };
        format!("{kind} state on {}", labels.join(","))
    }
}

pub fn density_from_pure(state: &PureState) -> DensityOperator {
    let amps = state.amps();
    let n = amps.len();
    DensityOperator {
        register: state.register().clone(),
        matrix: DMatrix::from_fn(n, n, |i, j| amps[i] * amps[j].conj()),
        provenance: Provenance::Pure,
    }
}

/// Reduced matrix on `keep`, in the order given.
pub(crate) fn reduce_to<S: AsRef<str>>(
    source: &StateSource<'_>,
    keep: &[S],
) -> Result<DMatrix<C64>> {
    let split = source.register().split(keep)?;
    let (d, rest) = (split.target_dim, split.rest_dim);
    let mut out = DMatrix::<C64>::zeros(d, d);
    match source {
        StateSource::Pure(s) => {
            let amps = s.amps();
            for r in 0..rest {
                for a in 0..d {
                    let x = amps[split.index(a, r)];
                    if x == C64::new(0.0, 0.0) {
                        continue;
                    }
                    for b in 0..d {
                        out[(a, b)] += x * amps[split.index(b, r)].conj();
                    }
                }
            }
        }
        StateSource::Mixed(rho) => {
            for r in 0..rest {
                for a in 0..d {
                    let ia = split.index(a, r);
                    for b in 0..d {
                        out[(a, b)] += rho.matrix[(ia, split.index(b, r))];
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Traces out `discard`, keeping the remaining subsystems in register
/// order. The result is tagged as an improper mixture. An empty `discard`
/// returns the source unchanged (a pure source stays `Pure`).
pub fn partial_trace<'a, S: AsRef<str>>(
    source: impl Into<StateSource<'a>>,
    discard: &[S],
) -> Result<DensityOperator> {
    let source = source.into();
    let register = source.register();
    for (i, label) in discard.iter().enumerate() {
        let label = label.as_ref();
        if !register.contains(label) {
            return Err(Error::UnknownTarget(label.to_string()));
        }
        if discard[..i].iter().any(|l| l.as_ref() == label) {
            return Err(Error::DuplicateTarget(label.to_string()));
        }
    }
    if discard.is_empty() {
        return Ok(match source {
            StateSource::Pure(s) => density_from_pure(s),
            StateSource::Mixed(r) => r.clone(),
        });
    }
    let keep = register.complement(discard);
    if keep.is_empty() {
        return Err(Error::NothingKept);
    }
    let matrix = reduce_to(&source, &keep)?;
    Ok(DensityOperator {
        register: register.select(&keep)?,
        matrix,
        provenance: Provenance::ImproperFromTrace {
            parent: source.describe(),
            discarded: discard.iter().map(|s| s.as_ref().to_string()).collect(),
        },
    })
}

/// `Σ p_k |ψ_k⟩⟨ψ_k|`, tagged as a proper mixture of `ensemble`.
pub fn proper_mixture_from_ensemble(ensemble: &Ensemble) -> DensityOperator {
    let n = ensemble.register.total_dim();
    let mut matrix = DMatrix::<C64>::zeros(n, n);
    for (p, state) in &ensemble.entries {
        let amps = state.amps();
        for i in 0..n {
            if amps[i] == C64::new(0.0, 0.0) {
                continue;
            }
            let ai = amps[i] * *p;
            for j in 0..n {
                matrix[(i, j)] += ai * amps[j].conj();
            }
        }
    }
    DensityOperator {
        register: ensemble.register.clone(),
        matrix,
        provenance: Provenance::ProperFromEnsemble(Arc::new(ensemble.clone())),
    }
}

/// Builds the ensemble and its proper mixture in one step.
pub fn proper_mixture(entries: Vec<(f64, PureState)>) -> Result<DensityOperator> {
    Ensemble::new(entries).map(|e| proper_mixture_from_ensemble(&e))
}

/// `½ Σ |λ_i(a − b)|`, clamped to [0, 1].
pub fn trace_distance(a: &DensityOperator, b: &DensityOperator) -> Result<f64> {
    if a.register != b.register {
        return Err(Error::RegisterMismatch);
    }
    let diff = &a.matrix - &b.matrix;
    let d = 0.5 * eigvalsh(&diff).iter().map(|v| v.abs()).sum::<f64>();
    Ok(d.clamp(0.0, 1.0))
}

/// Probability of each basis outcome, clamped to [0, 1].
pub fn sector_weights(source: &StateSource<'_>, basis: &MeasurementBasis) -> Result<Vec<f64>> {
    for (t, &d) in basis.targets().iter().zip(basis.dims()) {
        match source.register().dim_of(t) {
            None => return Err(Error::UnknownTarget(t.clone())),
            Some(actual) if actual != d => {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    actual,
                })
            }
            _ => {}
        }
    }
    match source {
        StateSource::Pure(s) => Ok(crate::hilbert::born_distribution(s, basis)?
            .into_iter()
            .map(|(_, p)| p)
            .collect()),
        StateSource::Mixed(_) => {
            let reduced = reduce_to(source, basis.targets())?;
            Ok((0..basis.outcomes().len())
                .map(|i| {
                    let p = basis.projector(i);
                    let w: f64 = p
                        .iter()
                        .zip(reduced.transpose().iter())
                        .map(|(x, y)| (x * y).re)
                        .sum();
                    w.clamp(0.0, 1.0)
                })
                .collect())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Definiteness {
    Definite(f64),
    Undefined,
}

/// Index of the basis outcome whose sector holds the whole state
/// (weight ≥ 1 − `EPS_NORM`), if any. For mixed states this is the
/// condition that the support lies inside that sector.
pub fn definite_sector(
    source: &StateSource<'_>,
    basis: &MeasurementBasis,
) -> Result<Option<usize>> {
    let weights = sector_weights(source, basis)?;
    Ok(weights.iter().position(|&w| w >= 1.0 - EPS_NORM))
}

/// Whether `obs` has a sharp value on the state.
pub fn definite_value<'a>(
    source: impl Into<StateSource<'a>>,
    obs: &Operator,
) -> Result<Definiteness> {
    let source = source.into();
    if obs.kind() != OperatorKind::Hermitian {
        return Err(Error::NotHermitian(hermiticity_error(obs.matrix())));
    }
    if obs.dims() != source.register().dims() {
        return Err(Error::RegisterMismatch);
    }
    let labels: Vec<String> = source.register().labels().map(str::to_string).collect();
    let (basis, levels) = MeasurementBasis::sectors_of(obs, labels, |v| format!("{v}"))?;
    Ok(match definite_sector(&source, &basis)? {
        Some(i) => Definiteness::Definite(levels[i]),
        None => Definiteness::Undefined,
    })
}

/// Largest inter-outcome coherence `max_{i≠j} ‖(P_i ⊗ I) ρ (P_j ⊗ I)‖`
/// (spectral norm) in the given basis. Zero for any proper mixture of the
/// basis's own outcome states.
pub fn interference_witness(rho: &DensityOperator, basis: &MeasurementBasis) -> Result<f64> {
    let register = rho.register();
    for t in basis.targets() {
        if !register.contains(t) {
            return Err(Error::RegisterMismatch);
        }
    }
    let split = basis
        .split_in(register)
        .map_err(|_| Error::RegisterMismatch)?;
    let n = register.total_dim();

    // Columns of W: outcome-major, then basis column, then rest index.
    let mut owners = Vec::with_capacity(n);
    let mut columns: Vec<Vec<(usize, C64)>> = Vec::with_capacity(n);
    for (i, outcome) in basis.outcomes().iter().enumerate() {
        for col in outcome.columns() {
            for r in 0..split.rest_dim {
                owners.push(i);
                columns.push(col.iter().map(|&(t, v)| (split.index(t, r), v)).collect());
            }
        }
    }
    // M = W† ρ W
    let rho_w = DMatrix::from_fn(n, columns.len(), |row, k| {
        columns[k]
            .iter()
            .map(|&(idx, v)| rho.matrix[(row, idx)] * v)
            .sum::<C64>()
    });
    let m = DMatrix::from_fn(columns.len(), columns.len(), |k, l| {
        columns[k]
            .iter()
            .map(|&(idx, v)| v.conj() * rho_w[(idx, l)])
            .sum::<C64>()
    });

    let mut ranges = Vec::new();
    let mut start = 0;
    for i in 0..basis.outcomes().len() {
        let len = owners.iter().filter(|&&o| o == i).count();
        ranges.push(start..start + len);
        start += len;
    }
    let mut best: f64 = 0.0;
    if ranges.iter().all(|r| r.len() <= 1) {
        for k in 0..m.nrows() {
            for l in 0..m.ncols() {
                if owners[k] != owners[l] {
                    best = best.max(m[(k, l)].norm());
                }
            }
        }
        return Ok(best);
    }
    for (i, ri) in ranges.iter().enumerate() {
        for (j, rj) in ranges.iter().enumerate() {
            if i == j || ri.is_empty() || rj.is_empty() {
                continue;
            }
            let block = m
                .view((ri.start, rj.start), (ri.len(), rj.len()))
                .into_owned();
            best = best.max(spectral_norm(&block));
        }
    }
    Ok(best)
}
