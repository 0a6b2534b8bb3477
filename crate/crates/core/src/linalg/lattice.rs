//! Orthogonal projectors and the operations of the projection lattice.

use num_complex::Complex64;

use super::eigen::eigh;
use super::matrix::{inner, norm, CVector, ComplexMatrix};
use crate::error::{Error, Result};
use crate::tolerance;

/// An orthogonal projector together with its rank.
#[derive(Debug, Clone, PartialEq)]
pub struct Projector {
    matrix: ComplexMatrix,
    rank: usize,
}

impl Projector {
    pub fn zero(n: usize) -> Self {
        Self {
            matrix: ComplexMatrix::zeros(n, n),
            rank: 0,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(n),
            rank: n,
        }
    }

    /// Validates `m` as a projector (Hermitian and idempotent).
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        let tol = tolerance::active();
        if !m.is_square() {
            return Err(Error::DimensionMismatch {
                expected: m.rows(),
                found: m.cols(),
            });
        }
        let herm = m.hermitian_deviation();
        let idem = (&m * &m).max_diff(&m);
        let deviation = herm.max(idem);
        if deviation > tol.projector {
            return Err(Error::NotProjector { deviation });
        }
        let eig = eigh(&m)?;
        let rank = eig
            .eigenvalues
            .iter()
            .filter(|&&l| (l - 1.0).abs() <= tol.rank)
            .count();
        Ok(Self { matrix: m, rank })
    }

    /// Re-projects a nearly-projective Hermitian matrix: symmetrizes, rounds
    /// eigenvalues to {0, 1} and rebuilds from the eigenvectors kept.
    pub fn snap(m: &ComplexMatrix) -> Result<Self> {
        let eig = eigh(&m.hermitian_part())?;
        let kept: Vec<CVector> = eig
            .eigenvalues
            .iter()
            .enumerate()
            .filter(|(_, &l)| l > 0.5)
            .map(|(k, _)| eig.eigenvectors.column(k))
            .collect();
        Ok(Self::from_orthonormal(m.rows(), &kept))
    }

    /// Projector onto the span of orthonormal vectors.
    pub(crate) fn from_orthonormal(n: usize, basis: &[CVector]) -> Self {
        let mut m = ComplexMatrix::zeros(n, n);
        for v in basis {
            for i in 0..n {
                for j in 0..n {
                    m[(i, j)] += v[i] * v[j].conj();
                }
            }
        }
        Self {
            matrix: m.hermitian_part(),
            rank: basis.len(),
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn is_zero(&self) -> bool {
        self.rank == 0
    }

    /// Orthonormal basis of the range.
    pub fn basis(&self) -> Vec<CVector> {
        if self.rank == 0 {
            return Vec::new();
        }
        orthonormalize(&self.matrix.columns(), tolerance::active().join_cutoff)
    }

    /// `self ≤ other` in the lattice order: `‖other·self − self‖_max ≤ tol`.
    pub fn leq(&self, other: &Projector, tol: f64) -> bool {
        (&other.matrix * &self.matrix).max_diff(&self.matrix) <= tol
    }

    pub fn approx_eq(&self, other: &Projector, tol: f64) -> bool {
        self.matrix.approx_eq(&other.matrix, tol)
    }

    /// `‖PQ‖_max ≤ tol`.
    pub fn orthogonal_to(&self, other: &Projector, tol: f64) -> bool {
        (&self.matrix * &other.matrix).max_abs() <= tol
    }

    pub fn commutes_with(&self, other: &Projector, tol: f64) -> bool {
        self.matrix.commutator(&other.matrix).max_abs() <= tol
    }

    /// `U P U†`.
    pub fn conjugate_by(&self, u: &ComplexMatrix) -> Projector {
        Projector {
            matrix: self.matrix.conjugate_by(u).hermitian_part(),
            rank: self.rank,
        }
    }

    pub fn apply(&self, v: &[Complex64]) -> CVector {
        self.matrix.mul_vec(v)
    }
}

/// Column-pivoted modified Gram–Schmidt with one reorthogonalization pass.
/// Vectors whose residual norm falls to `cutoff` or below are dropped.
pub fn orthonormalize(vectors: &[CVector], cutoff: f64) -> Vec<CVector> {
    let mut pool: Vec<CVector> = vectors.to_vec();
    let mut basis: Vec<CVector> = Vec::new();
    while !pool.is_empty() {
        let (best, best_norm) = pool
            .iter()
            .enumerate()
            .map(|(i, v)| (i, norm(v)))
            .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best_norm <= cutoff {
            break;
        }
        let mut v = pool.swap_remove(best);
        for _ in 0..2 {
            for b in &basis {
                let c = inner(b, &v);
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= c * bi;
                }
            }
        }
        let nv = norm(&v);
        if nv <= cutoff {
            continue;
        }
        for vi in v.iter_mut() {
            *vi /= nv;
        }
        for w in pool.iter_mut() {
            let c = inner(&v, w);
            for (wi, vi) in w.iter_mut().zip(&v) {
                *wi -= c * vi;
            }
        }
        basis.push(v);
    }
    basis
}

/// Orthogonal projector onto the span of `vectors`, all of length `n`.
pub fn projector_from_basis(n: usize, vectors: &[CVector]) -> Result<Projector> {
    if let Some(bad) = vectors.iter().find(|v| v.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: bad.len(),
        });
    }
    let basis = orthonormalize(vectors, tolerance::active().join_cutoff);
    Ok(Projector::from_orthonormal(n, &basis))
}

fn check_dims(p: &Projector, q: &Projector) -> Result<()> {
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            found: q.dim(),
        });
    }
    Ok(())
}

/// Projector onto `range(p) ∩ range(q)`.
///
/// The intersection is the null space of the stacked operator
/// `[(I−p); (I−q)]`, i.e. the orthogonal complement of its row space, which
/// is spanned by the columns of `I−p` and `I−q`.
pub fn meet(p: &Projector, q: &Projector) -> Result<Projector> {
    check_dims(p, q)?;
    let n = p.dim();
    if p.rank == 0 || q.rank == 0 {
        return Ok(Projector::zero(n));
    }
    if p.rank == n {
        return Ok(q.clone());
    }
    if q.rank == n {
        return Ok(p.clone());
    }
    let id = ComplexMatrix::identity(n);
    let mut rows = (&id - &p.matrix).columns();
    rows.extend((&id - &q.matrix).columns());
    let row_space = orthonormalize(&rows, tolerance::active().meet_cutoff);
    if row_space.len() == n {
        return Ok(Projector::zero(n));
    }
    let span = Projector::from_orthonormal(n, &row_space);
    Projector::snap(&(&id - &span.matrix))
}

/// Projector onto `range(p) + range(q)`.
pub fn join(p: &Projector, q: &Projector) -> Result<Projector> {
    check_dims(p, q)?;
    let n = p.dim();
    if p.rank == 0 {
        return Ok(q.clone());
    }
    if q.rank == 0 {
        return Ok(p.clone());
    }
    if p.rank == n || q.rank == n {
        return Ok(Projector::identity(n));
    }
    let mut cols = p.matrix.columns();
    cols.extend(q.matrix.columns());
    let basis = orthonormalize(&cols, tolerance::active().join_cutoff);
    Projector::snap(&Projector::from_orthonormal(n, &basis).matrix)
}

/// Join of an arbitrary family; the zero projector for an empty family.
pub fn join_all<'a>(n: usize, ps: impl IntoIterator<Item = &'a Projector>) -> Result<Projector> {
    let mut cols: Vec<CVector> = Vec::new();
    for p in ps {
        if p.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: p.dim(),
            });
        }
        if p.rank == n {
            return Ok(Projector::identity(n));
        }
        if p.rank > 0 {
            cols.extend(p.matrix.columns());
        }
    }
    if cols.is_empty() {
        return Ok(Projector::zero(n));
    }
    let basis = orthonormalize(&cols, tolerance::active().join_cutoff);
    Projector::snap(&Projector::from_orthonormal(n, &basis).matrix)
}

/// `I − p`.
pub fn complement(p: &Projector) -> Projector {
    let n = p.dim();
    Projector {
        matrix: &ComplexMatrix::identity(n) - &p.matrix,
        rank: n - p.rank,
    }
}
