//! Observables as finite projection-valued measures.

use std::collections::BTreeSet;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{eigh, norm, CVector, ComplexMatrix, Projector};
use crate::tolerance;

/// A set of spectral values of one observable, identified by index into
/// its ascending eigenvalue list.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct ValueSet(BTreeSet<usize>);

impl ValueSet {
    pub fn new(indices: impl IntoIterator<Item = usize>) -> Self {
        Self(indices.into_iter().collect())
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn full(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub fn single(i: usize) -> Self {
        Self::new([i])
    }

    /// Bitmask over indices < 64.
    pub fn from_bits(bits: u64) -> Self {
        Self((0..64).filter(|i| bits >> i & 1 == 1).collect())
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.contains(&i)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn union(&self, other: &Self) -> Self {
        Self(self.0.union(&other.0).copied().collect())
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        self.0.is_disjoint(&other.0)
    }

    pub fn max_index(&self) -> Option<usize> {
        self.0.iter().next_back().copied()
    }
}

/// Partition of an observable's eigenvalue indices into labelled blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomePartition {
    pub blocks: Vec<ValueSet>,
    pub labels: Vec<String>,
}

impl OutcomePartition {
    /// Labels default to the block index.
    pub fn new(blocks: Vec<ValueSet>) -> Self {
        let labels = (0..blocks.len()).map(|i| i.to_string()).collect();
        Self { blocks, labels }
    }

    pub fn with_labels(blocks: Vec<ValueSet>, labels: Vec<String>) -> Self {
        Self { blocks, labels }
    }

    pub fn discrete(n: usize) -> Self {
        Self::new((0..n).map(ValueSet::single).collect())
    }

    pub fn trivial(n: usize) -> Self {
        Self::new(vec![ValueSet::full(n)])
    }

    /// Checks that the blocks are non-empty, disjoint and cover `0..n`.
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.labels.len() != self.blocks.len() {
            return Err(Error::InvalidPartition(format!(
                "{} labels for {} blocks",
                self.labels.len(),
                self.blocks.len()
            )));
        }
        let mut seen = vec![false; n];
        for (b, block) in self.blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::InvalidPartition(format!("block {b} is empty")));
            }
            for i in block.indices() {
                if i >= n {
                    return Err(Error::InvalidPartition(format!("index {i} out of range in block {b}")));
                }
                if seen[i] {
                    return Err(Error::InvalidPartition(format!("index {i} appears in two blocks")));
                }
                seen[i] = true;
            }
        }
        if let Some(gap) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidPartition(format!("index {gap} is not covered")));
        }
        Ok(())
    }
}

/// A self-adjoint operator in spectral form: strictly ascending eigenvalues
/// with pairwise-orthogonal eigenprojectors summing to the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    dim: usize,
    eigenvalues: Vec<f64>,
    projectors: Vec<Projector>,
}

/// An observable whose spectral points carry user-facing labels; the
/// eigenvalue of block `k` is `k`.
#[derive(Debug, Clone)]
pub struct LabeledObservable {
    pub labels: Vec<String>,
    pub observable: Observable,
}

impl Observable {
    /// Diagonalizes a Hermitian matrix, merging eigenvalues that are closer
    /// than the cluster tolerance into one spectral point.
    pub fn from_matrix(m: &ComplexMatrix) -> Result<Self> {
        let eig = eigh(m)?;
        let n = m.rows();
        let groups = cluster_sorted(&eig.eigenvalues);
        let mut eigenvalues = Vec::with_capacity(groups.len());
        let mut projectors = Vec::with_capacity(groups.len());
        for g in groups {
            let mean = g.iter().map(|&k| eig.eigenvalues[k]).sum::<f64>() / g.len() as f64;
            let basis: Vec<CVector> = g.iter().map(|&k| eig.eigenvectors.column(k)).collect();
            eigenvalues.push(mean);
            projectors.push(Projector::from_orthonormal(n, &basis));
        }
        Ok(Self {
            dim: n,
            eigenvalues,
            projectors,
        })
    }

    /// Builds an observable from spectral data, checking every invariant.
    pub fn from_spectral(eigenvalues: Vec<f64>, projectors: Vec<Projector>) -> Result<Self> {
        let tol = tolerance::active();
        if eigenvalues.len() != projectors.len() || projectors.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: eigenvalues.len(),
                found: projectors.len(),
            });
        }
        let dim = projectors[0].dim();
        if eigenvalues.iter().any(|l| !l.is_finite()) {
            return Err(Error::FunctionUndefined {
                at: "spectral value".into(),
            });
        }
        if eigenvalues.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::PreconditionFailed("eigenvalues must be strictly ascending".into()));
        }
        let mut sum = ComplexMatrix::zeros(dim, dim);
        for (i, p) in projectors.iter().enumerate() {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.dim(),
                });
            }
            if p.is_zero() {
                return Err(Error::PreconditionFailed(format!("projector {i} is zero")));
            }
            for q in &projectors[i + 1..] {
                if !p.orthogonal_to(q, tol.check) {
                    return Err(Error::PreconditionFailed("projectors are not orthogonal".into()));
                }
            }
            sum = &sum + p.matrix();
        }
        if sum.max_diff(&ComplexMatrix::identity(dim)) > tol.check {
            return Err(Error::PreconditionFailed("projectors do not sum to the identity".into()));
        }
        Ok(Self {
            dim,
            eigenvalues,
            projectors,
        })
    }

    /// `c·I`.
    pub fn scalar(dim: usize, c: f64) -> Self {
        Self {
            dim,
            eigenvalues: vec![c],
            projectors: vec![Projector::identity(dim)],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn projectors(&self) -> &[Projector] {
        &self.projectors
    }

    pub fn num_values(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `Σ λ_i P_i`.
    pub fn matrix(&self) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(self.dim, self.dim);
        for (l, p) in self.eigenvalues.iter().zip(&self.projectors) {
            m = &m + &p.matrix().scale(*l);
        }
        m
    }

    /// Index of the spectral value within the cluster tolerance of `v`.
    pub fn index_of(&self, v: f64) -> Option<usize> {
        let tol = tolerance::active().cluster(self.spread());
        self.eigenvalues.iter().position(|&l| (l - v).abs() <= tol)
    }

    fn spread(&self) -> f64 {
        self.eigenvalues.last().unwrap_or(&0.0) - self.eigenvalues.first().unwrap_or(&0.0)
    }

    /// `A(R) = Σ_{λ_i ∈ R} P_i`.
    pub fn evaluate(&self, r: &ValueSet) -> Result<Projector> {
        if let Some(max) = r.max_index() {
            if max >= self.num_values() {
                return Err(Error::IndexOutOfRange {
                    index: max,
                    len: self.num_values(),
                });
            }
        }
        let mut m = ComplexMatrix::zeros(self.dim, self.dim);
        let mut rank = 0;
        for i in r.indices() {
            m = &m + self.projectors[i].matrix();
            rank += self.projectors[i].rank();
        }
        if rank == 0 {
            return Ok(Projector::zero(self.dim));
        }
        if rank == self.dim {
            return Ok(Projector::identity(self.dim));
        }
        Projector::snap(&m)
    }

    /// Spectral family `E_λ = A((−∞, λ])`, with the cluster tolerance
    /// applied at the threshold.
    pub fn spectral_family(&self, lambda: f64) -> Projector {
        let tol = tolerance::active().cluster(self.spread());
        let set = ValueSet::new(
            self.eigenvalues
                .iter()
                .enumerate()
                .filter(|(_, &l)| l <= lambda + tol)
                .map(|(i, _)| i),
        );
        self.evaluate(&set).expect("indices in range")
    }

    /// `M_A^ψ`: eigenvalues with non-negligible amplitude in `psi`.
    pub fn possible_outcomes(&self, psi: &[Complex64]) -> Result<ValueSet> {
        let tol = tolerance::active();
        check_state(self.dim, psi)?;
        Ok(ValueSet::new((0..self.num_values()).filter(|&i| {
            norm(&self.projectors[i].apply(psi)) > tol.outcome
        })))
    }

    /// Coarse-grains to a PVM on the partition's labels.
    pub fn coarse_grain(&self, p: &OutcomePartition) -> Result<LabeledObservable> {
        p.validate(self.num_values())?;
        let projectors = p
            .blocks
            .iter()
            .map(|b| self.evaluate(b))
            .collect::<Result<Vec<_>>>()?;
        let eigenvalues = (0..projectors.len()).map(|k| k as f64).collect();
        Ok(LabeledObservable {
            labels: p.labels.clone(),
            observable: Self {
                dim: self.dim,
                eigenvalues,
                projectors,
            },
        })
    }

    /// `g(A)`: eigenvalues mapped through `g`, projectors merged where `g`
    /// sends distinct eigenvalues to the same value up to
    /// [`Tolerances::same_value`](crate::tolerance::Tolerances::same_value).
    pub fn apply_scalar_function(&self, g: impl Fn(f64) -> f64) -> Result<Observable> {
        let mut mapped: Vec<(f64, usize)> = Vec::with_capacity(self.num_values());
        for (i, &l) in self.eigenvalues.iter().enumerate() {
            let v = g(l);
            if !v.is_finite() {
                return Err(Error::FunctionUndefined { at: format!("{l}") });
            }
            mapped.push((v, i));
        }
        mapped.sort_by(|a, b| a.0.total_cmp(&b.0));
        let values: Vec<f64> = mapped.iter().map(|m| m.0).collect();
        let tol = tolerance::active();
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for k in 0..values.len() {
            match groups.last_mut() {
                Some(g) if tol.same_value(values[k - 1], values[k]) => g.push(k),
                _ => groups.push(vec![k]),
            }
        }
        let mut eigenvalues = Vec::with_capacity(groups.len());
        let mut projectors = Vec::with_capacity(groups.len());
        for g in groups {
            let mean = g.iter().map(|&k| values[k]).sum::<f64>() / g.len() as f64;
            let set = ValueSet::new(g.iter().map(|&k| mapped[k].1));
            eigenvalues.push(mean);
            projectors.push(self.evaluate(&set)?);
        }
        dedupe_ascending(&mut eigenvalues);
        Ok(Observable {
            dim: self.dim,
            eigenvalues,
            projectors,
        })
    }

    /// `U A U†`.
    pub fn conjugate(&self, u: &ComplexMatrix) -> Result<Observable> {
        if u.rows() != self.dim || !u.is_square() {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: u.rows(),
            });
        }
        let deviation = u.unitary_deviation();
        if deviation > tolerance::active().unitary {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(Observable {
            dim: self.dim,
            eigenvalues: self.eigenvalues.clone(),
            projectors: self.projectors.iter().map(|p| p.conjugate_by(u)).collect(),
        })
    }

    /// Same spectral values (within `tol`) and same eigenprojectors (within `tol`).
    pub fn approx_eq(&self, other: &Observable, tol: f64) -> bool {
        self.dim == other.dim
            && self.num_values() == other.num_values()
            && self
                .eigenvalues
                .iter()
                .zip(&other.eigenvalues)
                .all(|(a, b)| (a - b).abs() <= tol)
            && self
                .projectors
                .iter()
                .zip(&other.projectors)
                .all(|(p, q)| p.approx_eq(q, tol))
    }

    /// Largest deviation between spectral data, infinite when the number of
    /// spectral values differs.
    pub fn distance(&self, other: &Observable) -> f64 {
        if self.dim != other.dim || self.num_values() != other.num_values() {
            return f64::INFINITY;
        }
        let values = self
            .eigenvalues
            .iter()
            .zip(&other.eigenvalues)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let projs = self
            .projectors
            .iter()
            .zip(&other.projectors)
            .map(|(p, q)| p.matrix().max_diff(q.matrix()))
            .fold(0.0, f64::max);
        values.max(projs)
    }

    pub fn commutes_with(&self, other: &Observable, tol: f64) -> bool {
        self.projectors
            .iter()
            .all(|p| other.projectors.iter().all(|q| p.commutes_with(q, tol)))
    }
}

/// Spectral order: `a ⊑ b` iff `E^b_λ ≤ E^a_λ` for every λ in the merged
/// spectrum, so that `a ⊑ b` implies `⟨ψ|a|ψ⟩ ≤ ⟨ψ|b|ψ⟩`.
pub fn spectral_leq(a: &Observable, b: &Observable) -> Result<bool> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch {
            expected: a.dim,
            found: b.dim,
        });
    }
    let tol = tolerance::active().check;
    let thresholds = a.eigenvalues.iter().chain(&b.eigenvalues);
    for &lambda in thresholds {
        let ea = a.spectral_family(lambda);
        let eb = b.spectral_family(lambda);
        if !eb.leq(&ea, tol) {
            return Ok(false);
        }
    }
    Ok(true)
}

pub(crate) fn check_state(dim: usize, psi: &[Complex64]) -> Result<()> {
    if psi.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: psi.len(),
        });
    }
    let n = norm(psi);
    if (n - 1.0).abs() > tolerance::active().normalization {
        return Err(Error::NotNormalized { norm: n });
    }
    Ok(())
}

/// Groups indices of an ascending list whose consecutive gaps are within
/// the cluster tolerance for the list's spread.
pub(crate) fn cluster_sorted(values: &[f64]) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    if values.is_empty() {
        return groups;
    }
    let spread = values[values.len() - 1] - values[0];
    let tol = tolerance::active().cluster(spread);
    groups.push(vec![0]);
    for k in 1..values.len() {
        if values[k] - values[k - 1] <= tol {
            groups.last_mut().expect("non-empty").push(k);
        } else {
            groups.push(vec![k]);
        }
    }
    groups
}

// Cluster means of adjacent groups cannot cross, but keep the invariant explicit.
fn dedupe_ascending(values: &mut [f64]) {
    for k in 1..values.len() {
        if values[k] <= values[k - 1] {
            values[k] = values[k - 1].next_up();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sigma_z() -> Observable {
        Observable::from_matrix(&ComplexMatrix::pauli_z()).unwrap()
    }

    fn sigma_x() -> Observable {
        Observable::from_matrix(&ComplexMatrix::pauli_x()).unwrap()
    }

    fn diag_proj(d: &[f64]) -> Projector {
        Projector::new(ComplexMatrix::from_real_diagonal(d)).unwrap()
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn identity_has_one_value() {
        let a = Observable::from_matrix(&ComplexMatrix::identity(3)).unwrap();
        assert_eq!(a.eigenvalues(), &[1.0]);
        assert_eq!(a.projectors()[0].rank(), 3);
    }

    #[test]
    fn sigma_z_spectrum() {
        let z = sigma_z();
        assert_eq!(z.eigenvalues(), &[-1.0, 1.0]);
        assert!(z.projectors()[0].approx_eq(&diag_proj(&[0.0, 1.0]), 1e-15));
        assert!(z.projectors()[1].approx_eq(&diag_proj(&[1.0, 0.0]), 1e-15));
    }

    #[test]
    fn near_degenerate_values_cluster() {
        let m = ComplexMatrix::from_real_diagonal(&[2.0, 2.0 + 1e-12]);
        let a = Observable::from_matrix(&m).unwrap();
        // gap-scan oracle: 1e-12 ≤ max(1e-8, 1e-10 · 1e-12)
        let gap: f64 = 1e-12;
        assert!(gap <= 1e-8f64.max(1e-10 * gap));
        assert_eq!(a.num_values(), 1);
        assert_eq!(a.projectors()[0].rank(), 2);
        let far = Observable::from_matrix(&ComplexMatrix::from_real_diagonal(&[2.0, 2.0 + 1e-6])).unwrap();
        assert_eq!(far.num_values(), 2);
    }

    #[test]
    fn evaluate_examples() {
        let z = sigma_z();
        assert!(z.evaluate(&ValueSet::full(2)).unwrap().approx_eq(&Projector::identity(2), 1e-15));
        assert!(z.evaluate(&ValueSet::single(1)).unwrap().approx_eq(&diag_proj(&[1.0, 0.0]), 1e-15));
        assert!(z.evaluate(&ValueSet::empty()).unwrap().is_zero());
        assert!(matches!(
            z.evaluate(&ValueSet::single(2)),
            Err(Error::IndexOutOfRange { index: 2, len: 2 })
        ));
    }

    #[test]
    fn possible_outcome_examples() {
        let z = sigma_z();
        let up = [c(0.0), c(1.0)];
        // (0, 1) is the −1 eigenvector of σ_z, i.e. index 0
        assert_eq!(z.possible_outcomes(&up).unwrap(), ValueSet::single(0));
        let s = 0.5f64.sqrt();
        assert_eq!(z.possible_outcomes(&[c(s), c(s)]).unwrap(), ValueSet::full(2));
        // (1,0) = ((1,1) + (1,−1))/√2 has both σ_x components
        let x = sigma_x();
        assert_eq!(x.possible_outcomes(&[c(1.0), c(0.0)]).unwrap(), ValueSet::full(2));
        assert!(matches!(
            z.possible_outcomes(&[c(1.0), c(1.0)]),
            Err(Error::NotNormalized { .. })
        ));
    }

    #[test]
    fn coarse_grain_examples() {
        let z = sigma_z();
        let fine = z.coarse_grain(&OutcomePartition::discrete(2)).unwrap();
        for (p, q) in fine.observable.projectors().iter().zip(z.projectors()) {
            assert!(p.approx_eq(q, 1e-15));
        }
        let coarse = z.coarse_grain(&OutcomePartition::trivial(2)).unwrap();
        assert_eq!(coarse.observable.num_values(), 1);
        assert!(coarse.observable.projectors()[0].approx_eq(&Projector::identity(2), 1e-15));

        let a = Observable::from_matrix(&ComplexMatrix::from_real_diagonal(&[1.0, 2.0, 3.0, 4.0])).unwrap();
        let p = OutcomePartition::new(vec![ValueSet::new([0, 1]), ValueSet::new([2, 3])]);
        let cg = a.coarse_grain(&p).unwrap();
        assert!(cg.observable.projectors()[0].approx_eq(&diag_proj(&[1.0, 1.0, 0.0, 0.0]), 1e-15));
        assert!(cg.observable.projectors()[1].approx_eq(&diag_proj(&[0.0, 0.0, 1.0, 1.0]), 1e-15));
        assert_eq!(cg.observable.projectors()[0].rank(), 2);

        let overlap = OutcomePartition::new(vec![ValueSet::new([0, 1]), ValueSet::new([1])]);
        assert!(matches!(z.coarse_grain(&overlap), Err(Error::InvalidPartition(_))));
        let gap = OutcomePartition::new(vec![ValueSet::new([0])]);
        assert!(matches!(z.coarse_grain(&gap), Err(Error::InvalidPartition(_))));
    }

    #[test]
    fn scalar_function_examples() {
        let z = sigma_z();
        assert!(z.apply_scalar_function(|x| x).unwrap().approx_eq(&z, 0.0));
        let e = z.apply_scalar_function(f64::exp).unwrap();
        assert_eq!(e.eigenvalues(), &[(-1f64).exp(), 1f64.exp()]);
        let sq = z.apply_scalar_function(|x| x * x).unwrap();
        assert_eq!(sq.eigenvalues(), &[1.0]);
        assert!(sq.projectors()[0].approx_eq(&Projector::identity(2), 1e-15));
        assert!(matches!(
            z.apply_scalar_function(f64::ln),
            Err(Error::FunctionUndefined { .. })
        ));
    }

    #[test]
    fn spectral_order_examples() {
        let z = sigma_z();
        assert!(spectral_leq(&z, &z).unwrap());
        assert!(spectral_leq(&Observable::scalar(2, 0.0), &Observable::scalar(2, 1.0)).unwrap());
        assert!(!spectral_leq(&Observable::scalar(2, 1.0), &Observable::scalar(2, 0.0)).unwrap());
        let a = Observable::from_matrix(&ComplexMatrix::from_real_diagonal(&[1.0, 2.0])).unwrap();
        let b = Observable::from_matrix(&ComplexMatrix::from_real_diagonal(&[2.0, 3.0])).unwrap();
        // λ=1: E^B = 0 ≤ E^A = diag(1,0); λ=2: E^B = diag(1,0) ≤ I; λ=3: I ≤ I
        assert!(spectral_leq(&a, &b).unwrap());
        assert!(!spectral_leq(&b, &a).unwrap());
        assert!(spectral_leq(&a, &Observable::scalar(3, 0.0)).is_err());
    }

    #[test]
    fn conjugate_examples() {
        let z = sigma_z();
        assert!(z.conjugate(&ComplexMatrix::identity(2)).unwrap().approx_eq(&z, 0.0));
        let s = 0.5f64.sqrt();
        let h = ComplexMatrix::from_fn(2, 2, |i, j| c(if i == 1 && j == 1 { -s } else { s }));
        let x = z.conjugate(&h).unwrap();
        assert!(x.matrix().approx_eq(&ComplexMatrix::pauli_x(), 1e-15));
        let not_unitary = ComplexMatrix::from_real_diagonal(&[1.0, 2.0]);
        assert!(matches!(z.conjugate(&not_unitary), Err(Error::NotUnitary { .. })));
    }

    #[test]
    fn from_spectral_checks_invariants() {
        let p0 = diag_proj(&[1.0, 0.0]);
        let p1 = diag_proj(&[0.0, 1.0]);
        assert!(Observable::from_spectral(vec![0.0, 1.0], vec![p0.clone(), p1.clone()]).is_ok());
        assert!(Observable::from_spectral(vec![1.0, 0.0], vec![p0.clone(), p1.clone()]).is_err());
        assert!(Observable::from_spectral(vec![0.0, 1.0], vec![p0.clone(), p0.clone()]).is_err());
        assert!(Observable::from_spectral(vec![0.0], vec![p0]).is_err());
    }
}
