//! Brute-force reference implementations used as test oracles.

use nalgebra::DMatrix;
use wignerlab::hilbert::C64;

pub fn digits_of(mut i: usize, dims: &[usize]) -> Vec<usize> {
    let mut d = vec![0; dims.len()];
    for k in (0..dims.len()).rev() {
        d[k] = i % dims[k];
        i /= dims[k];
    }
    d
}

pub fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    DMatrix::from_fn(ar * br, ac * bc, |i, j| {
        a[(i / br, j / bc)] * b[(i % br, j % bc)]
    })
}

/// Projector onto `|digit⟩` of subsystem `k`, identity elsewhere.
pub fn local_projector(dims: &[usize], assign: &[(usize, usize)]) -> DMatrix<C64> {
    let mut p = DMatrix::from_element(1, 1, C64::new(1.0, 0.0));
    for (k, &d) in dims.iter().enumerate() {
        let f = match assign.iter().find(|(s, _)| *s == k) {
            Some(&(_, v)) => {
                DMatrix::from_fn(d, d, |i, j| C64::new((i == v && j == v) as u8 as f64, 0.0))
            }
            None => DMatrix::identity(d, d),
        };
        p = kron(&p, &f);
    }
    p
}

pub fn expectation(psi: &[C64], m: &DMatrix<C64>) -> f64 {
    let v = nalgebra::DVector::from_column_slice(psi);
    (v.adjoint() * m * &v)[(0, 0)].re
}

/// Eigenvalues of a Hermitian matrix through its real symmetric embedding,
/// by cyclic Jacobi rotations. Each eigenvalue is returned once.
pub fn jacobi_eigenvalues(h: &DMatrix<C64>) -> Vec<f64> {
    let n = h.nrows();
    let mut a = DMatrix::<f64>::from_fn(2 * n, 2 * n, |i, j| {
        let z = h[(i % n, j % n)];
        match (i < n, j < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    let m = 2 * n;
    for _sweep in 0..100 {
        let off: f64 = (0..m)
            .flat_map(|i| (0..m).map(move |j| (i, j)))
            .filter(|(i, j)| i != j)
            .map(|(i, j)| a[(i, j)].powi(2))
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..m {
            for q in p + 1..m {
                if a[(p, q)].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * a[(p, q)]);
                let sign = if theta < 0.0 { -1.0 } else { 1.0 };
                let t = sign / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..m {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..m {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..m).map(|i| a[(i, i)]).collect();
    ev.sort_by(f64::total_cmp);
    ev.into_iter().step_by(2).collect()
}

pub fn outer(psi: &[C64]) -> DMatrix<C64> {
    DMatrix::from_fn(psi.len(), psi.len(), |i, j| psi[i] * psi[j].conj())
}

/// Keeps the subsystems in `keep` (register order) by summing over
/// matching discarded digits.
pub fn brute_partial_trace(rho: &DMatrix<C64>, dims: &[usize], keep: &[usize]) -> DMatrix<C64> {
    let kdims: Vec<usize> = keep.iter().map(|&k| dims[k]).collect();
    let kd: usize = kdims.iter().product();
    let flat = |digits: &[usize]| keep.iter().fold(0, |acc, &k| acc * dims[k] + digits[k]);
    let mut out = DMatrix::zeros(kd, kd);
    let n = rho.nrows();
    for i in 0..n {
        let di = digits_of(i, dims);
        for j in 0..n {
            let dj = digits_of(j, dims);
            let same_rest = (0..dims.len()).all(|k| keep.contains(&k) || di[k] == dj[k]);
            if same_rest {
                out[(flat(&di), flat(&dj))] += rho[(i, j)];
            }
        }
    }
    out
}
