use std::collections::HashSet;

use crate::error::{Error, Result};

use super::MAX_TOTAL_DIM;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Subsystem {
    label: String,
    dim: usize,
}

impl Subsystem {
    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

/// Ordered list of named subsystems spanning a joint Hilbert space.
///
/// Basis indices are row-major over the declared order: the first
/// subsystem varies slowest. For a register `[(A,2),(B,3)]` the index of
/// `|a b⟩` is `a * 3 + b`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Register {
    subsystems: Vec<Subsystem>,
    total_dim: usize,
}

impl Register {
    pub fn new<I, S>(specs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, usize)>,
        S: Into<String>,
    {
        let mut seen = HashSet::new();
        let mut subsystems = Vec::new();
        let mut total_dim: usize = 1;
        for (label, dim) in specs {
            let label = label.into();
            if !seen.insert(label.clone()) {
                return Err(Error::DuplicateLabel(label));
            }
            if dim < 2 {
                return Err(Error::DimTooSmall { label, dim });
            }
            total_dim = total_dim.saturating_mul(dim);
            subsystems.push(Subsystem { label, dim });
        }
        if subsystems.is_empty() {
            return Err(Error::EmptyRegister);
        }
        if total_dim > MAX_TOTAL_DIM {
            return Err(Error::TooLarge(total_dim));
        }
        Ok(Self {
            subsystems,
            total_dim,
        })
    }

    pub fn subsystems(&self) -> &[Subsystem] {
        &self.subsystems
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.subsystems.iter().map(|s| s.label.as_str())
    }

    pub fn dims(&self) -> Vec<usize> {
        self.subsystems.iter().map(|s| s.dim).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    pub fn len(&self) -> usize {
        self.subsystems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsystems.is_empty()
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.subsystems.iter().position(|s| s.label == label)
    }

    pub fn contains(&self, label: &str) -> bool {
        self.position(label).is_some()
    }

    pub fn dim_of(&self, label: &str) -> Option<usize> {
        self.position(label).map(|i| self.subsystems[i].dim)
    }

    /// Register for `self ⊗ other`.
    pub fn concat(&self, other: &Register) -> Result<Register> {
        if let Some(clash) = other.labels().find(|l| self.contains(l)) {
            return Err(Error::LabelClash(clash.to_string()));
        }
        Register::new(
            self.subsystems
                .iter()
                .chain(other.subsystems.iter())
                .map(|s| (s.label.clone(), s.dim)),
        )
    }

    /// Sub-register holding `labels`, in the order given.
    pub fn select<S: AsRef<str>>(&self, labels: &[S]) -> Result<Register> {
        let mut specs = Vec::with_capacity(labels.len());
        for label in labels {
            let label = label.as_ref();
            let dim = self
                .dim_of(label)
                .ok_or_else(|| Error::UnknownTarget(label.to_string()))?;
            specs.push((label.to_string(), dim));
        }
        Register::new(specs)
    }

    /// Labels of this register not in `labels`, in register order.
    pub fn complement<S: AsRef<str>>(&self, labels: &[S]) -> Vec<String> {
        self.labels()
            .filter(|l| !labels.iter().any(|x| x.as_ref() == *l))
            .map(str::to_string)
            .collect()
    }

    /// Decomposes basis indices into (target, rest) coordinates.
    pub(crate) fn split<S: AsRef<str>>(&self, targets: &[S]) -> Result<Split> {
        let mut target_pos = Vec::with_capacity(targets.len());
        for t in targets {
            let t = t.as_ref();
            let pos = self
                .position(t)
                .ok_or_else(|| Error::UnknownTarget(t.to_string()))?;
            if target_pos.contains(&pos) {
                return Err(Error::DuplicateTarget(t.to_string()));
            }
            target_pos.push(pos);
        }
        let rest_pos: Vec<usize> = (0..self.len())
            .filter(|p| !target_pos.contains(p))
            .collect();
        let dims = self.dims();
        let target_dim: usize = target_pos.iter().map(|&p| dims[p]).product();
        let rest_dim: usize = rest_pos.iter().map(|&p| dims[p]).product();

        // Row-major strides of each position inside the full index.
        let mut stride = vec![1usize; dims.len()];
        for p in (0..dims.len().saturating_sub(1)).rev() {
            stride[p] = stride[p + 1] * dims[p + 1];
        }
        let offsets = |positions: &[usize], count: usize| -> Vec<usize> {
            let mut out = Vec::with_capacity(count);
            let mut digits = vec![0usize; positions.len()];
            for _ in 0..count {
                out.push(
                    positions
                        .iter()
                        .zip(&digits)
                        .map(|(&p, &d)| d * stride[p])
                        .sum(),
                );
                for i in (0..digits.len()).rev() {
                    digits[i] += 1;
                    if digits[i] < dims[positions[i]] {
                        break;
                    }
                    digits[i] = 0;
                }
            }
            out
        };
        Ok(Split {
            target_dim,
            rest_dim,
            target_offset: offsets(&target_pos, target_dim),
            rest_offset: offsets(&rest_pos, rest_dim),
        })
    }
}

/// Index tables for viewing a register as `targets ⊗ rest`.
#[derive(Debug, Clone)]
pub(crate) struct Split {
    pub target_dim: usize,
    pub rest_dim: usize,
    target_offset: Vec<usize>,
    rest_offset: Vec<usize>,
}

impl Split {
    #[inline]
    pub fn index(&self, t: usize, r: usize) -> usize {
        self.target_offset[t] + self.rest_offset[r]
    }
}
