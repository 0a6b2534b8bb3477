use num_complex::Complex64;

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};
use crate::tolerance;

/// Spectral decomposition `M = V·diag(λ)·V†` of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Unitary; column `k` belongs to `eigenvalues[k]`.
    pub eigenvectors: ComplexMatrix,
}

impl EigenDecomposition {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let v = &self.eigenvectors;
        let scaled = ComplexMatrix::from_fn(v.rows(), v.cols(), |i, j| v[(i, j)] * self.eigenvalues[j]);
        &scaled * &v.adjoint()
    }
}

/// Hermitian eigendecomposition by cyclic complex Jacobi rotations.
///
/// Each rotation first removes the phase of the pivot `m[p][q]` with a
/// diagonal unitary and then applies the real symmetric Jacobi rotation that
/// annihilates it. Sweeps stop once the off-diagonal Frobenius norm is below
/// `eig_rel · ‖M‖_F`.
pub fn eigh(m: &ComplexMatrix) -> Result<EigenDecomposition> {
    let tol = tolerance::active();
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            expected: m.rows(),
            found: m.cols(),
        });
    }
    let deviation = m.hermitian_deviation();
    if deviation > tol.hermitian {
        return Err(Error::NotHermitian { deviation });
    }
    let n = m.rows();
    let mut a = m.hermitian_part();
    for i in 0..n {
        a[(i, i)] = Complex64::new(a[(i, i)].re, 0.0);
    }
    let mut v = ComplexMatrix::identity(n);
    let threshold = tol.eig_rel * a.frobenius();

    let mut converged = false;
    for _sweep in 0..tol.eig_max_sweeps {
        if off_diagonal_norm(&a) <= threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }
    if !converged && off_diagonal_norm(&a) > threshold {
        return Err(Error::NoConvergence {
            sweeps: tol.eig_max_sweeps,
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let eigenvalues = order.iter().map(|&i| a[(i, i)].re).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    // Skip pivots that are already negligible against the diagonal.
    if r < f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
        a[(p, q)] = Complex64::new(0.0, 0.0);
        a[(q, p)] = Complex64::new(0.0, 0.0);
        return;
    }
    let phase = apq / r;
    let theta = (aqq - app) / (2.0 * r);
    let t = if theta >= 0.0 {
        1.0 / (theta + (1.0 + theta * theta).sqrt())
    } else {
        -1.0 / (-theta + (1.0 + theta * theta).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    // G = diag(1, conj(phase)) · [[c, s], [-s, c]] restricted to (p, q).
    let g_pp = Complex64::new(c, 0.0);
    let g_pq = Complex64::new(s, 0.0);
    let g_qp = -phase.conj() * s;
    let g_qq = phase.conj() * c;

    let n = a.rows();
    // A ← A·G
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * g_pp + akq * g_qp;
        a[(k, q)] = akp * g_pq + akq * g_qq;
    }
    // A ← G†·A
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = g_pp.conj() * apk + g_qp.conj() * aqk;
        a[(q, k)] = g_pq.conj() * apk + g_qq.conj() * aqk;
    }
    a[(p, q)] = Complex64::new(0.0, 0.0);
    a[(q, p)] = Complex64::new(0.0, 0.0);
    a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);
    // V ← V·G
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * g_pp + vkq * g_qp;
        v[(k, q)] = vkp * g_pq + vkq * g_qq;
    }
}

/// `exp(M)` for Hermitian `M`, via its eigendecomposition.
pub fn matrix_exp_hermitian(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = eigh(m)?;
    let exps: Vec<f64> = eig.eigenvalues.iter().map(|l| l.exp()).collect();
    let scaled = EigenDecomposition {
        eigenvalues: exps,
        eigenvectors: eig.eigenvectors,
    };
    Ok(scaled.reconstruct().hermitian_part())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_input() {
        let m = ComplexMatrix::from_real_diagonal(&[3.0, 1.0]);
        let e = eigh(&m).unwrap();
        assert_eq!(e.eigenvalues, vec![1.0, 3.0]);
        // columns are a permutation of the identity
        for j in 0..2 {
            let col = e.eigenvectors.column(j);
            let ones = col.iter().filter(|z| (z.norm() - 1.0).abs() < 1e-15).count();
            assert_eq!(ones, 1);
        }
    }

    #[test]
    fn pauli_x_spectrum() {
        let e = eigh(&ComplexMatrix::pauli_x()).unwrap();
        assert!((e.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!((e.eigenvalues[1] - 1.0).abs() < 1e-14);
        assert!(e.reconstruct().approx_eq(&ComplexMatrix::pauli_x(), 1e-14));
    }

    #[test]
    fn complex_entries() {
        let e = eigh(&ComplexMatrix::pauli_y()).unwrap();
        assert!((e.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!(e.eigenvectors.unitary_deviation() < 1e-14);
        assert!(e.reconstruct().approx_eq(&ComplexMatrix::pauli_y(), 1e-14));
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut m = ComplexMatrix::zeros(2, 2);
        m[(0, 1)] = Complex64::new(1.0, 0.0);
        assert!(matches!(eigh(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn zero_matrix() {
        let e = eigh(&ComplexMatrix::zeros(3, 3)).unwrap();
        assert_eq!(e.eigenvalues, vec![0.0; 3]);
    }

    #[test]
    fn exp_of_zero_and_diagonal() {
        let z = matrix_exp_hermitian(&ComplexMatrix::zeros(2, 2)).unwrap();
        assert!(z.approx_eq(&ComplexMatrix::identity(2), 1e-15));
        let d = ComplexMatrix::from_real_diagonal(&[2f64.ln(), 3f64.ln()]);
        let e = matrix_exp_hermitian(&d).unwrap();
        assert!(e.approx_eq(&ComplexMatrix::from_real_diagonal(&[2.0, 3.0]), 1e-14));
    }

    #[test]
    fn exp_pauli_x_against_series() {
        // Taylor series as an independent route.
        let x = ComplexMatrix::pauli_x();
        let mut term = ComplexMatrix::identity(2);
        let mut sum = ComplexMatrix::identity(2);
        for k in 1..30 {
            term = (&term * &x).scale(1.0 / k as f64);
            sum = &sum + &term;
        }
        let expected = &ComplexMatrix::identity(2).scale(1f64.cosh()) + &x.scale(1f64.sinh());
        assert!(sum.approx_eq(&expected, 1e-14));
        let got = matrix_exp_hermitian(&x).unwrap();
        assert!(got.approx_eq(&sum, 1e-12));
    }
}
