use std::collections::HashSet;
use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

use super::linalg::{eigh, group_levels, max_abs};
use super::operator::Operator;
use super::register::{Register, Split};
use super::{C64, EPS_NORM};

/// Largest product spin basis; its outcome columns are dense.
pub const MAX_SPIN_QUBITS: usize = 10;

/// Largest total-spin basis; built by dense diagonalization.
pub const MAX_TOTAL_SPIN_QUBITS: usize = 8;

/// Sparse column: (index, amplitude) pairs with exact zeros omitted.
pub(crate) type SparseVec = Vec<(usize, C64)>;

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    label: String,
    /// Orthonormal columns spanning the outcome's projector range.
    columns: Vec<SparseVec>,
}

impl Outcome {
    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn rank(&self) -> usize {
        self.columns.len()
    }

    pub(crate) fn columns(&self) -> &[SparseVec] {
        &self.columns
    }
}

/// Complete set of orthogonal projectors on a list of target subsystems.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementBasis {
    targets: Vec<String>,
    dims: Vec<usize>,
    outcomes: Vec<Outcome>,
}

fn sparse(dense: impl IntoIterator<Item = C64>) -> SparseVec {
    dense
        .into_iter()
        .enumerate()
        .filter(|(_, z)| *z != C64::new(0.0, 0.0))
        .collect()
}

fn target_dims<S: AsRef<str>>(
    register: &Register,
    targets: &[S],
) -> Result<(Vec<String>, Vec<usize>)> {
    let mut names = Vec::with_capacity(targets.len());
    let mut dims = Vec::with_capacity(targets.len());
    for t in targets {
        let t = t.as_ref();
        let d = register
            .dim_of(t)
            .ok_or_else(|| Error::UnknownTarget(t.to_string()))?;
        if names.iter().any(|n: &String| n == t) {
            return Err(Error::DuplicateTarget(t.to_string()));
        }
        names.push(t.to_string());
        dims.push(d);
    }
    if names.is_empty() {
        return Err(Error::InvalidBasis("no targets".into()));
    }
    Ok((names, dims))
}

fn require_qubits(targets: &[String], dims: &[usize], what: &str) -> Result<()> {
    match targets.iter().zip(dims).find(|(_, &d)| d != 2) {
        Some((t, d)) => Err(Error::InvalidBasis(format!(
            "{what} basis needs qubits, `{t}` has dimension {d}"
        ))),
        None => Ok(()),
    }
}

/// Label of a computational basis outcome: digits concatenated, or
/// dot-separated when some dimension exceeds 10.
pub fn computational_label(digits: &[usize], dims: &[usize]) -> String {
    if dims.iter().all(|&d| d <= 10) {
        digits.iter().map(|d| d.to_string()).collect()
    } else {
        digits
            .iter()
            .map(|d| d.to_string())
            .collect::<Vec<_>>()
            .join(".")
    }
}

fn digits_of(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut digits = vec![0; dims.len()];
    for (slot, &d) in digits.iter_mut().zip(dims).rev() {
        *slot = index % d;
        index /= d;
    }
    digits
}

/// Outcome label for a total-spin sector with eigenvalue `s(s+1)`:
/// `s0`, `s1`, `s0_5`, `s1_5`, ...
fn spin_sector_label(level: f64) -> String {
    let s = (-1.0 + (1.0 + 4.0 * level.max(0.0)).sqrt()) / 2.0;
    let two_s = (2.0 * s).round() as i64;
    if two_s % 2 == 0 {
        format!("s{}", two_s / 2)
    } else {
        format!("s{}_5", two_s / 2)
    }
}

impl MeasurementBasis {
    /// Basis from explicit projector matrices on the factor `targets`
    /// (dimensions `dims`). Projectors must be Hermitian, idempotent,
    /// mutually orthogonal and sum to the identity within `EPS_NORM`.
    pub fn new(
        targets: Vec<String>,
        dims: Vec<usize>,
        projectors: Vec<(String, DMatrix<C64>)>,
    ) -> Result<Self> {
        let n: usize = dims.iter().product();
        if targets.len() != dims.len() || targets.is_empty() {
            return Err(Error::InvalidBasis("targets and dims disagree".into()));
        }
        let mut labels = HashSet::new();
        let mut sum = DMatrix::<C64>::zeros(n, n);
        for (label, p) in &projectors {
            if !labels.insert(label.as_str()) {
                return Err(Error::InvalidBasis(format!("duplicate outcome `{label}`")));
            }
            if p.nrows() != n || p.ncols() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    actual: p.nrows(),
                });
            }
            if max_abs(&(p - p.adjoint())) > EPS_NORM {
                return Err(Error::InvalidBasis(format!(
                    "projector `{label}` is not Hermitian"
                )));
            }
            if max_abs(&(p * p - p)) > EPS_NORM {
                return Err(Error::InvalidBasis(format!(
                    "projector `{label}` is not idempotent"
                )));
            }
            sum += p;
        }
        for (i, (a, pa)) in projectors.iter().enumerate() {
            for (b, pb) in &projectors[i + 1..] {
                if max_abs(&(pa * pb)) > EPS_NORM {
                    return Err(Error::InvalidBasis(format!(
                        "projectors `{a}` and `{b}` overlap"
                    )));
                }
            }
        }
        if max_abs(&(sum - DMatrix::identity(n, n))) > EPS_NORM {
            return Err(Error::InvalidBasis(
                "projectors do not sum to identity".into(),
            ));
        }
        let outcomes = projectors
            .into_iter()
            .map(|(label, p)| {
                let (vals, vecs) = eigh(&p);
                let columns = vals
                    .iter()
                    .enumerate()
                    .filter(|(_, &v)| v > 0.5)
                    .map(|(c, _)| sparse(vecs.column(c).iter().copied()))
                    .collect();
                Outcome { label, columns }
            })
            .collect();
        Ok(Self {
            targets,
            dims,
            outcomes,
        })
    }

    pub fn computational<S: AsRef<str>>(register: &Register, targets: &[S]) -> Result<Self> {
        let (targets, dims) = target_dims(register, targets)?;
        let n: usize = dims.iter().product();
        let outcomes = (0..n)
            .map(|k| Outcome {
                label: computational_label(&digits_of(k, &dims), &dims),
                columns: vec![vec![(k, C64::new(1.0, 0.0))]],
            })
            .collect();
        Ok(Self {
            targets,
            dims,
            outcomes,
        })
    }

    /// Bell basis on two qubits (`PhiPlus`, `PhiMinus`, `PsiPlus`,
    /// `PsiMinus`), generalised to k qubits as the GHZ basis
    /// `(|x⟩ ± |x̄⟩)/√2`. For k > 2 the `x = 0…0` pair keeps the `Phi`
    /// names; the others are `Psi<bits of x>Plus/Minus`.
    pub fn bell<S: AsRef<str>>(register: &Register, targets: &[S]) -> Result<Self> {
        let (targets, dims) = target_dims(register, targets)?;
        require_qubits(&targets, &dims, "bell")?;
        let k = targets.len();
        if k < 2 {
            return Err(Error::InvalidBasis(
                "bell basis needs at least two qubits".into(),
            ));
        }
        let all = (1usize << k) - 1;
        let amp = C64::new(FRAC_1_SQRT_2, 0.0);
        let mut outcomes = Vec::with_capacity(1 << k);
        for x in 0..(1usize << (k - 1)) {
            let stem = match (x, k) {
                (0, _) => "Phi".to_string(),
                (_, 2) => "Psi".to_string(),
                _ => format!("Psi{:0width$b}", x, width = k),
            };
            let xbar = x ^ all;
            outcomes.push(Outcome {
                label: format!("{stem}Plus"),
                columns: vec![vec![(x, amp), (xbar, amp)]],
            });
            outcomes.push(Outcome {
                label: format!("{stem}Minus"),
                columns: vec![vec![(x, amp), (xbar, -amp)]],
            });
        }
        Ok(Self {
            targets,
            dims,
            outcomes,
        })
    }

    /// Product of single-qubit spin bases along polar angles `angles`
    /// (azimuth 0): `|up_θ⟩ = cos(θ/2)|0⟩ + sin(θ/2)|1⟩`,
    /// `|down_θ⟩ = −sin(θ/2)|0⟩ + cos(θ/2)|1⟩`. Labels join the per-qubit
    /// `up`/`down` with `_`.
    pub fn spin<S: AsRef<str>>(register: &Register, targets: &[S], angles: &[f64]) -> Result<Self> {
        let (targets, dims) = target_dims(register, targets)?;
        require_qubits(&targets, &dims, "spin")?;
        if targets.len() > MAX_SPIN_QUBITS {
            return Err(Error::InvalidBasis(format!(
                "spin basis supports at most {MAX_SPIN_QUBITS} qubits"
            )));
        }
        if angles.len() != targets.len() {
            return Err(Error::InvalidBasis(format!(
                "spin basis has {} angle(s) for {} target(s)",
                angles.len(),
                targets.len()
            )));
        }
        if let Some(bad) = angles.iter().find(|a| !a.is_finite()) {
            return Err(Error::InvalidBasis(format!("angle {bad} is not finite")));
        }
        let k = targets.len();
        let mut outcomes = Vec::with_capacity(1 << k);
        for choice in 0..(1usize << k) {
            let mut vec = vec![C64::new(1.0, 0.0)];
            let mut names = Vec::with_capacity(k);
            for (q, theta) in angles.iter().enumerate() {
                let down = (choice >> (k - 1 - q)) & 1 == 1;
                let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
                let local = if down { [-s, c] } else { [c, s] };
                names.push(if down { "down" } else { "up" });
                vec = vec
                    .iter()
                    .flat_map(|a| local.iter().map(move |l| a * l))
                    .collect();
            }
            outcomes.push(Outcome {
                label: names.join("_"),
                columns: vec![sparse(vec)],
            });
        }
        Ok(Self {
            targets,
            dims,
            outcomes,
        })
    }

    /// Eigen-sectors of the total spin squared on the target qubits,
    /// labelled by `s` (`s0`, `s1`, ...), ascending.
    pub fn total_spin<S: AsRef<str>>(register: &Register, targets: &[S]) -> Result<Self> {
        let (targets, dims) = target_dims(register, targets)?;
        require_qubits(&targets, &dims, "total_spin")?;
        if targets.len() > MAX_TOTAL_SPIN_QUBITS {
            return Err(Error::InvalidBasis(format!(
                "total_spin basis supports at most {MAX_TOTAL_SPIN_QUBITS} qubits"
            )));
        }
        let obs = Operator::total_spin_squared(targets.len());
        let (basis, _) = Self::sectors_of(&obs, targets, spin_sector_label)?;
        Ok(basis)
    }

    /// Eigen-sectors of a Hermitian operator on `targets`, with the level
    /// values in outcome order.
    pub fn sectors_of(
        obs: &Operator,
        targets: Vec<String>,
        label: impl Fn(f64) -> String,
    ) -> Result<(Self, Vec<f64>)> {
        if obs.dims().len() != targets.len() {
            return Err(Error::InvalidBasis(
                "observable and targets disagree".into(),
            ));
        }
        let (vals, vecs) = eigh(obs.matrix());
        let levels = group_levels(&vals);
        let values = levels.iter().map(|(v, _)| *v).collect();
        let mut seen = HashSet::new();
        let outcomes = levels
            .into_iter()
            .map(|(v, cols)| {
                let mut name = label(v);
                while !seen.insert(name.clone()) {
                    name.push('\'');
                }
                Outcome {
                    label: name,
                    columns: cols
                        .into_iter()
                        .map(|c| sparse(vecs.column(c).iter().copied()))
                        .collect(),
                }
            })
            .collect();
        Ok((
            Self {
                targets,
                dims: obs.dims().to_vec(),
                outcomes,
            },
            values,
        ))
    }

    pub fn targets(&self) -> &[String] {
        &self.targets
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn target_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn outcomes(&self) -> &[Outcome] {
        &self.outcomes
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.outcomes.iter().map(|o| o.label.as_str())
    }

    pub fn outcome_index(&self, label: &str) -> Option<usize> {
        self.outcomes.iter().position(|o| o.label == label)
    }

    /// Dense projector of outcome `i` on the target factor.
    pub fn projector(&self, i: usize) -> DMatrix<C64> {
        let n = self.target_dim();
        let mut p = DMatrix::zeros(n, n);
        for col in &self.outcomes[i].columns {
            for &(a, va) in col {
                for &(b, vb) in col {
                    p[(a, b)] += va * vb.conj();
                }
            }
        }
        p
    }

    /// Largest deviation of `Σ P_i` from the identity.
    pub fn completeness_error(&self) -> f64 {
        let n = self.target_dim();
        let mut sum = DMatrix::<C64>::zeros(n, n);
        for i in 0..self.outcomes.len() {
            sum += self.projector(i);
        }
        max_abs(&(sum - DMatrix::identity(n, n)))
    }

    /// Index tables for this basis inside `register`, checking dimensions.
    pub(crate) fn split_in(&self, register: &Register) -> Result<Split> {
        for (t, &d) in self.targets.iter().zip(&self.dims) {
            let actual = register
                .dim_of(t)
                .ok_or_else(|| Error::UnknownTarget(t.clone()))?;
            if actual != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    actual,
                });
            }
        }
        register.split(&self.targets)
    }

    /// `‖(P_i ⊗ I) ψ‖²` for every outcome, unclamped.
    pub(crate) fn raw_probabilities(&self, amps: &[C64], split: &Split) -> Vec<f64> {
        self.outcomes
            .iter()
            .map(|o| {
                let mut p = 0.0;
                for col in &o.columns {
                    for r in 0..split.rest_dim {
                        let c: C64 = col
                            .iter()
                            .map(|&(t, v)| v.conj() * amps[split.index(t, r)])
                            .sum();
                        p += c.norm_sqr();
                    }
                }
                p
            })
            .collect()
    }

    /// `(P_i ⊗ I) ψ`, unnormalised.
    pub(crate) fn project(&self, i: usize, amps: &[C64], split: &Split) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); amps.len()];
        for col in &self.outcomes[i].columns {
            for r in 0..split.rest_dim {
                let c: C64 = col
                    .iter()
                    .map(|&(t, v)| v.conj() * amps[split.index(t, r)])
                    .sum();
                if c != C64::new(0.0, 0.0) {
                    for &(t, v) in col {
                        out[split.index(t, r)] += v * c;
                    }
                }
            }
        }
        out
    }
}
