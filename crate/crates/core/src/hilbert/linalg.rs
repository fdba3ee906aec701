//! Dense complex matrix helpers shared by the state and mixture code.

use nalgebra::DMatrix;

use super::C64;

/// Eigenvalues closer than this are treated as one degenerate level.
pub const DEGENERACY_GAP: f64 = 1e-8;

pub fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a.kronecker(b)
}

pub fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn hermiticity_error(m: &DMatrix<C64>) -> f64 {
    max_abs(&(m - m.adjoint()))
}

pub fn unitarity_error(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    max_abs(&(m.adjoint() * m - DMatrix::<C64>::identity(n, n)))
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
/// The input is symmetrised first so tiny asymmetries do not leak in.
pub fn eigh(m: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let sym = (m + m.adjoint()).scale(0.5);
    let eig = sym.symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

pub fn eigvalsh(m: &DMatrix<C64>) -> Vec<f64> {
    eigh(m).0
}

/// Groups ascending eigenvalues into degenerate levels.
/// Returns (level value, column indices) pairs.
pub fn group_levels(values: &[f64]) -> Vec<(f64, Vec<usize>)> {
    let mut levels: Vec<(f64, Vec<usize>)> = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        match levels.last_mut() {
            Some((first, members))
                if (v - values[members[members.len() - 1]]).abs() <= DEGENERACY_GAP =>
            {
                members.push(i);
                let n = members.len() as f64;
                *first += (v - *first) / n;
            }
            _ => levels.push((v, vec![i])),
        }
    }
    levels
}

/// Largest singular value, via the top eigenvalue of `m† m`.
pub fn spectral_norm(m: &DMatrix<C64>) -> f64 {
    if m.nrows() == 1 || m.ncols() == 1 {
        return m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    }
    let gram = m.adjoint() * m;
    eigvalsh(&gram)
        .last()
        .copied()
        .unwrap_or(0.0)
        .max(0.0)
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn complex_hermitian_spectrum() {
        // sigma_y has eigenvalues -1, +1
        let sy = DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]);
        let (vals, vecs) = eigh(&sy);
        assert!((vals[0] + 1.0).abs() < 1e-12 && (vals[1] - 1.0).abs() < 1e-12);
        let recon = &vecs
            * DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                2,
                vals.iter().map(|&v| c(v, 0.)),
            ))
            * vecs.adjoint();
        assert!(max_abs(&(recon - sy)) < 1e-12);
    }

    #[test]
    fn levels_group_within_gap() {
        let levels = group_levels(&[0.0, 2.0 - 1e-12, 2.0, 2.0 + 1e-12, 3.0]);
        assert_eq!(levels.len(), 3);
        assert_eq!(levels[1].1, vec![1, 2, 3]);
    }

    #[test]
    fn spectral_norm_of_rank_one_block() {
        let m = DMatrix::from_row_slice(2, 2, &[c(0.5, 0.), c(0.5, 0.), c(0., 0.), c(0., 0.)]);
        assert!((spectral_norm(&m) - 0.5f64.sqrt()).abs() < 1e-12);
    }
}
