use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

use super::linalg::{hermiticity_error, kron, unitarity_error};
use super::{C64, EPS_NORM};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    Unitary,
    Hermitian,
    General,
}

/// Square matrix acting on a tensor factor with dimensions `dims`.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    dims: Vec<usize>,
    matrix: DMatrix<C64>,
    kind: OperatorKind,
}

impl Operator {
    fn checked_shape(dims: &[usize], matrix: &DMatrix<C64>) -> Result<()> {
        let expected: usize = dims.iter().product();
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                actual: matrix.ncols(),
            });
        }
        if matrix.nrows() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                actual: matrix.nrows(),
            });
        }
        Ok(())
    }

    pub fn unitary(dims: Vec<usize>, matrix: DMatrix<C64>) -> Result<Self> {
        Self::checked_shape(&dims, &matrix)?;
        let err = unitarity_error(&matrix);
        if !(err <= EPS_NORM) {
            return Err(Error::NotUnitary(err));
        }
        Ok(Self {
            dims,
            matrix,
            kind: OperatorKind::Unitary,
        })
    }

    pub fn hermitian(dims: Vec<usize>, matrix: DMatrix<C64>) -> Result<Self> {
        Self::checked_shape(&dims, &matrix)?;
        let err = hermiticity_error(&matrix);
        if !(err <= EPS_NORM) {
            return Err(Error::NotHermitian(err));
        }
        Ok(Self {
            dims,
            matrix,
            kind: OperatorKind::Hermitian,
        })
    }

    pub fn general(dims: Vec<usize>, matrix: DMatrix<C64>) -> Result<Self> {
        Self::checked_shape(&dims, &matrix)?;
        Ok(Self {
            dims,
            matrix,
            kind: OperatorKind::General,
        })
    }

    pub fn identity(dims: Vec<usize>) -> Self {
        let n = dims.iter().product();
        Self {
            dims,
            matrix: DMatrix::identity(n, n),
            kind: OperatorKind::Unitary,
        }
    }

    /// Hadamard gate; for `d > 2` the d-dimensional Fourier matrix.
    pub fn hadamard(d: usize) -> Self {
        let norm = 1.0 / (d as f64).sqrt();
        let matrix = if d == 2 {
            DMatrix::from_row_slice(
                2,
                2,
                &[
                    C64::new(norm, 0.0),
                    C64::new(norm, 0.0),
                    C64::new(norm, 0.0),
                    C64::new(-norm, 0.0),
                ],
            )
        } else {
            DMatrix::from_fn(d, d, |j, k| {
                C64::from_polar(norm, 2.0 * PI * (j * k) as f64 / d as f64)
            })
        };
        Self {
            dims: vec![d],
            matrix,
            kind: OperatorKind::Unitary,
        }
    }

    /// `|i, j⟩ → |i, (i + j) mod d⟩` on a pair of d-level systems; CNOT for d = 2.
    pub fn correlate(d: usize) -> Self {
        let n = d * d;
        let mut matrix = DMatrix::zeros(n, n);
        for i in 0..d {
            for j in 0..d {
                matrix[(i * d + (i + j) % d, i * d + j)] = C64::new(1.0, 0.0);
            }
        }
        Self {
            dims: vec![d, d],
            matrix,
            kind: OperatorKind::Unitary,
        }
    }

    /// Cyclic shift `|j⟩ → |j + 1 mod d⟩`; Pauli X for d = 2.
    pub fn flip(d: usize) -> Self {
        let mut matrix = DMatrix::zeros(d, d);
        for j in 0..d {
            matrix[((j + 1) % d, j)] = C64::new(1.0, 0.0);
        }
        Self {
            dims: vec![d],
            matrix,
            kind: OperatorKind::Unitary,
        }
    }

    /// Total spin squared `(Σ σ_i / 2)²` over `n` spin-½ systems (ħ = 1),
    /// eigenvalues `s(s + 1)`.
    pub fn total_spin_squared(n: usize) -> Self {
        let zero = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        let i = C64::new(0.0, 1.0);
        let paulis = [
            DMatrix::from_row_slice(2, 2, &[zero, one, one, zero]),
            DMatrix::from_row_slice(2, 2, &[zero, -i, i, zero]),
            DMatrix::from_row_slice(2, 2, &[one, zero, zero, -one]),
        ];
        let dim = 1usize << n;
        let mut s2 = DMatrix::<C64>::zeros(dim, dim);
        for p in &paulis {
            let mut total = DMatrix::<C64>::zeros(dim, dim);
            for site in 0..n {
                let mut term = DMatrix::<C64>::identity(1, 1);
                for k in 0..n {
                    let factor = if k == site {
                        p.scale(0.5)
                    } else {
                        DMatrix::identity(2, 2)
                    };
                    term = kron(&term, &factor);
                }
                total += term;
            }
            s2 += &total * &total;
        }
        Self {
            dims: vec![2; n],
            matrix: s2,
            kind: OperatorKind::Hermitian,
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }
}
