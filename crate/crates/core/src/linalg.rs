//! Small dense helpers: cyclic Jacobi diagonalization and spectral functions
//! of symmetric matrices.

use nalgebra::DMatrix;

/// Eigen-decomposition of a real symmetric matrix.
#[derive(Clone, Debug)]
pub struct SymmetricEigen {
    /// Eigenvalues in descending order.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, matching `values`.
    pub vectors: DMatrix<f64>,
}

/// Cyclic Jacobi rotations until every off-diagonal element is below
/// `tol` times the Frobenius norm. Intended for matrices up to a few dozen rows.
pub fn jacobi_eigen(m: &DMatrix<f64>, tol: f64) -> SymmetricEigen {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "jacobi_eigen needs a square matrix");
    let mut a = symmetrize(m);
    let mut v = DMatrix::<f64>::identity(n, n);
    let scale = a.norm().max(f64::MIN_POSITIVE);

    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|p| (0..n).filter(move |&q| q != p).map(move |q| (p, q)))
            .map(|(p, q)| a[(p, q)] * a[(p, q)])
            .sum::<f64>()
            .sqrt();
        if off <= tol * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[(y, y)].total_cmp(&a[(x, x)]));
    let values = order.iter().map(|&k| a[(k, k)]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    SymmetricEigen { values, vectors }
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Largest `|m_ij - m_ji|`.
pub fn asymmetry(m: &DMatrix<f64>) -> f64 {
    (m - m.transpose()).amax()
}

/// Rebuilds `V f(D) V^T` from a decomposition.
pub fn spectral_map(eig: &SymmetricEigen, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let n = eig.values.len();
    let mut scaled = eig.vectors.clone();
    for (c, &lam) in eig.values.iter().enumerate() {
        let fl = f(lam);
        for r in 0..n {
            scaled[(r, c)] *= fl;
        }
    }
    &scaled * eig.vectors.transpose()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonalizes_known_matrix() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let e = jacobi_eigen(&m, 1e-14);
        assert!((e.values[0] - 3.0).abs() < 1e-14);
        assert!((e.values[1] - 1.0).abs() < 1e-14);
        let rebuilt = spectral_map(&e, |x| x);
        assert!((rebuilt - m).amax() < 1e-14);
    }

    #[test]
    fn diagonal_input_is_untouched() {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.1, 0.7, 0.2]));
        let e = jacobi_eigen(&m, 1e-14);
        assert_eq!(e.values, vec![0.7, 0.2, 0.1]);
    }

    #[test]
    fn random_symmetric_reconstruction() {
        let n = 9;
        let m = DMatrix::from_fn(n, n, |r, c| ((r * 7 + c * 3) % 11) as f64 + if r == c { 1.0 } else { 0.0 });
        let m = symmetrize(&m);
        let e = jacobi_eigen(&m, 1e-15);
        assert!((spectral_map(&e, |x| x) - &m).amax() < 1e-12);
        let vtv = e.vectors.transpose() * &e.vectors;
        assert!((vtv - DMatrix::identity(n, n)).amax() < 1e-13);
        assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
    }
}
