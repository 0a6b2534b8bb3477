//! Unselected joint measurements as quantum operations.
//!
//! A partition `{Q_i}` of the outcome grid gives projective Kraus elements
//! `J(Q_i)`. They are pairwise orthogonal but need not sum to the identity;
//! the remainder `J⁰ = I − Σ J(Q_i)` is the probability of seeing no
//! outcome at all.

use std::fmt::Write as _;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::joint::{GridPartition, JointObservable};
use crate::linalg::{eigh, inner, norm, CVector, ComplexMatrix, Projector};
use crate::random;
use crate::tolerance;

/// Label of the no-outcome event in probability tables and histograms.
pub const NO_OUTCOME: &str = "none";

/// A positive semi-definite operator with trace at most one.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        let tol = tolerance::active().density;
        if !m.is_square() {
            return Err(Error::DimensionMismatch {
                expected: m.rows(),
                found: m.cols(),
            });
        }
        let dev = m.hermitian_deviation();
        if dev > tol {
            return Err(Error::InvalidDensity(format!("not Hermitian (deviation {dev:.3e})")));
        }
        let m = m.hermitian_part();
        let lowest = eigh(&m)?.eigenvalues.first().copied().unwrap_or(0.0);
        if lowest < -tol {
            return Err(Error::InvalidDensity(format!("negative eigenvalue {lowest:.3e}")));
        }
        let t = m.trace().re;
        if t > 1.0 + tol {
            return Err(Error::InvalidDensity(format!("trace {t} exceeds 1")));
        }
        Ok(Self { matrix: m })
    }

    /// `|ψ⟩⟨ψ|` for a unit vector.
    pub fn pure(psi: &[Complex64]) -> Result<Self> {
        let r = norm(psi);
        if (r - 1.0).abs() > tolerance::active().normalization {
            return Err(Error::NotNormalized { norm: r });
        }
        Self::new(ComplexMatrix::outer(psi))
    }

    pub fn maximally_mixed(n: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(n).scale(1.0 / n as f64),
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    fn require_normalized(&self) -> Result<()> {
        let t = self.trace();
        if (t - 1.0).abs() > tolerance::active().normalization {
            return Err(Error::NotNormalized { norm: t });
        }
        Ok(())
    }
}

/// Projective Kraus elements with labels, plus the defect projector.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementChannel {
    kraus: Vec<Projector>,
    labels: Vec<String>,
    defect: Projector,
}

/// `Tr(K_i ρ)` per outcome and `Tr(J⁰ ρ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeProbabilities {
    pub outcomes: Vec<(String, f64)>,
    pub none: f64,
}

impl OutcomeProbabilities {
    pub fn total(&self) -> f64 {
        self.outcomes.iter().map(|(_, p)| p).sum::<f64>() + self.none
    }
}

impl MeasurementChannel {
    /// Checks pairwise orthogonality and derives the defect.
    pub fn new(kraus: Vec<Projector>, labels: Vec<String>) -> Result<Self> {
        let tol = tolerance::active().check;
        let Some(first) = kraus.first() else {
            return Err(Error::ChannelInvalid("no Kraus elements".into()));
        };
        if labels.len() != kraus.len() {
            return Err(Error::ChannelInvalid("label count differs from Kraus count".into()));
        }
        let n = first.dim();
        let mut sum = ComplexMatrix::zeros(n, n);
        for (i, k) in kraus.iter().enumerate() {
            if k.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: k.dim(),
                });
            }
            for (j, l) in kraus.iter().enumerate().skip(i + 1) {
                let dev = (k.matrix() * l.matrix()).max_abs();
                if dev > tol {
                    return Err(Error::ChannelInvalid(format!(
                        "Kraus elements {i} and {j} are not orthogonal (deviation {dev:.3e})"
                    )));
                }
            }
            sum = &sum + k.matrix();
        }
        let rest = &ComplexMatrix::identity(n) - &sum;
        let dev = (&rest * &rest).max_diff(&rest);
        if dev > tol {
            return Err(Error::ChannelInvalid(format!("defect is not a projector (deviation {dev:.3e})")));
        }
        let defect = Projector::snap(&rest)?;
        Ok(Self { kraus, labels, defect })
    }

    pub fn kraus(&self) -> &[Projector] {
        &self.kraus
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn defect(&self) -> &Projector {
        &self.defect
    }

    pub fn dim(&self) -> usize {
        self.defect.dim()
    }

    pub fn is_trace_preserving(&self) -> bool {
        self.defect.is_zero()
    }

    fn check_dim(&self, rho: &DensityMatrix) -> Result<()> {
        if rho.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: rho.dim(),
            });
        }
        Ok(())
    }

    /// `ρ ↦ Σ_i K_i ρ K_i`.
    pub fn apply_unselected(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        self.check_dim(rho)?;
        Ok(DensityMatrix {
            matrix: self.apply_to(rho.matrix()).hermitian_part(),
        })
    }

    /// The Kraus map on an arbitrary square matrix.
    pub fn apply_to(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let n = self.dim();
        let mut out = ComplexMatrix::zeros(n, n);
        for k in self.kraus.iter().filter(|k| !k.is_zero()) {
            out = &out + &(&(k.matrix() * x) * k.matrix());
        }
        out
    }

    pub fn outcome_probabilities(&self, rho: &DensityMatrix) -> Result<OutcomeProbabilities> {
        self.check_dim(rho)?;
        rho.require_normalized()?;
        let prob = |p: &Projector| (p.matrix() * rho.matrix()).trace().re.max(0.0);
        Ok(OutcomeProbabilities {
            outcomes: self.labels.iter().cloned().zip(self.kraus.iter().map(prob)).collect(),
            none: prob(&self.defect),
        })
    }

    /// A unitary on `H ⊗ A` (`A` of dimension `n+1`, basis index
    /// `h·(n+1) + a`) with `U(|ψ⟩⊗|0⟩) = J⁰|ψ⟩⊗|0⟩ + Σ_i K_i|ψ⟩⊗|i⟩`.
    pub fn realize_ancilla(&self) -> Result<ComplexMatrix> {
        let d = self.dim();
        let s = self.kraus.len() + 1;
        let big = d * s;
        let mut columns: Vec<Option<CVector>> = vec![None; big];
        let mut basis: Vec<CVector> = Vec::with_capacity(big);
        let zero = Complex64::new(0.0, 0.0);
        for j in 0..d {
            let mut col = vec![zero; big];
            for h in 0..d {
                col[h * s] = self.defect.matrix()[(h, j)];
                for (i, k) in self.kraus.iter().enumerate() {
                    col[h * s + i + 1] = k.matrix()[(h, j)];
                }
            }
            basis.push(col.clone());
            columns[j * s] = Some(col);
        }
        let gram = ComplexMatrix::from_fn(d, d, |a, b| inner(&basis[a], &basis[b]));
        let dev = gram.max_diff(&ComplexMatrix::identity(d));
        if dev > tolerance::active().unitary {
            return Err(Error::ChannelInvalid(format!("isometry columns not orthonormal (deviation {dev:.3e})")));
        }
        let free: Vec<usize> = (0..big).filter(|c| columns[*c].is_none()).collect();
        let mut free = free.into_iter();
        for e in 0..big {
            if basis.len() == big {
                break;
            }
            let mut v = vec![zero; big];
            v[e] = Complex64::new(1.0, 0.0);
            for _ in 0..2 {
                for b in &basis {
                    let c = inner(b, &v);
                    for (vi, bi) in v.iter_mut().zip(b) {
                        *vi -= c * bi;
                    }
                }
            }
            let r = norm(&v);
            if r > 1e-6 {
                let v: CVector = v.into_iter().map(|z| z / r).collect();
                basis.push(v.clone());
                columns[free.next().expect("free column")] = Some(v);
            }
        }
        let cols: Vec<CVector> = columns.into_iter().map(|c| c.expect("completed")).collect();
        Ok(ComplexMatrix::from_columns(big, &cols))
    }

    /// Embeds `ρ ⊗ |0⟩⟨0|`, conjugates by `u`, keeps the ancilla outcomes
    /// `i ≥ 1` and traces out the ancilla.
    pub fn ancilla_composite(&self, u: &ComplexMatrix, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        let d = self.dim();
        let s = self.kraus.len() + 1;
        if u.rows() != d * s || rho.rows() != d {
            return Err(Error::DimensionMismatch {
                expected: d * s,
                found: u.rows(),
            });
        }
        let big = d * s;
        let mut embedded = ComplexMatrix::zeros(big, big);
        for h in 0..d {
            for g in 0..d {
                embedded[(h * s, g * s)] = rho[(h, g)];
            }
        }
        let evolved = embedded.conjugate_by(u);
        let mut out = ComplexMatrix::zeros(d, d);
        for h in 0..d {
            for g in 0..d {
                out[(h, g)] = (1..s).map(|a| evolved[(h * s + a, g * s + a)]).sum();
            }
        }
        Ok(out)
    }

    /// Draws `shots` outcomes by inverse-CDF sampling over the outcome
    /// probabilities, in label order with the no-outcome event last.
    pub fn sample_outcomes(&self, rho: &DensityMatrix, shots: u64, seed: u64) -> Result<Histogram> {
        if shots == 0 {
            return Err(Error::PreconditionFailed("shots must be at least 1".into()));
        }
        let probs = self.outcome_probabilities(rho)?;
        let mut labels: Vec<String> = probs.outcomes.iter().map(|(l, _)| l.clone()).collect();
        labels.push(NO_OUTCOME.into());
        let weights: Vec<f64> = probs.outcomes.iter().map(|(_, p)| *p).chain([probs.none]).collect();
        let total: f64 = weights.iter().sum();
        let mut cdf = Vec::with_capacity(weights.len());
        let mut acc = 0.0;
        for w in &weights {
            acc += w / total;
            cdf.push(acc);
        }
        let mut counts = vec![0u64; weights.len()];
        let mut rng = random::rng(seed);
        for _ in 0..shots {
            let u: f64 = rng.random();
            let idx = cdf.iter().position(|&c| u < c).unwrap_or_else(|| {
                weights.iter().rposition(|&w| w > 0.0).unwrap_or(weights.len() - 1)
            });
            counts[idx] += 1;
        }
        Ok(Histogram {
            labels,
            counts,
            shots,
            seed,
            algorithm: random::RNG_ALGORITHM,
        })
    }
}

/// `J(Q_i)` for every region of the partition, labelled as the partition.
pub fn build_channel(j: &JointObservable, p: &GridPartition) -> Result<MeasurementChannel> {
    let (n, m) = j.grid();
    p.validate(n, m)?;
    let kraus = p.regions.iter().map(|q| j.eval(q)).collect::<Result<Vec<_>>>()?;
    MeasurementChannel::new(kraus, p.labels.clone())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    /// Outcome labels followed by [`NO_OUTCOME`].
    pub labels: Vec<String>,
    pub counts: Vec<u64>,
    pub shots: u64,
    pub seed: u64,
    pub algorithm: &'static str,
}

impl Histogram {
    pub fn frequency(&self, label: &str) -> Option<f64> {
        let i = self.labels.iter().position(|l| l == label)?;
        Some(self.counts[i] as f64 / self.shots as f64)
    }

    /// `label,count,frequency` rows under a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("label,count,frequency\n");
        for (l, c) in self.labels.iter().zip(&self.counts) {
            let _ = writeln!(out, "{l},{c},{}", *c as f64 / self.shots as f64);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observable::Observable;

    fn pauli_pair() -> JointObservable {
        JointObservable::new(
            Observable::from_matrix(&ComplexMatrix::pauli_x()).unwrap(),
            Observable::from_matrix(&ComplexMatrix::pauli_y()).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn singleton_channel_annihilates() {
        let j = pauli_pair();
        let c = build_channel(&j, &GridPartition::singletons(2, 2)).unwrap();
        assert!(c.kraus().iter().all(Projector::is_zero));
        assert!(c.defect().matrix().approx_eq(&ComplexMatrix::identity(2), 1e-12));
        let mut rng = random::rng(1);
        let rho = random::density(&mut rng, 2);
        assert!(c.apply_unselected(&rho).unwrap().matrix().max_abs() < 1e-15);
        let p = c.outcome_probabilities(&rho).unwrap();
        assert!((p.none - 1.0).abs() < 1e-12);
        let h = c.sample_outcomes(&rho, 1000, 4).unwrap();
        assert_eq!(h.frequency(NO_OUTCOME), Some(1.0));
    }

    #[test]
    fn b_strip_channel() {
        let j = pauli_pair();
        let c = build_channel(&j, &GridPartition::cols(2, 2)).unwrap();
        assert!(c.is_trace_preserving());
        let qm = ComplexMatrix::pauli_form(0.5, [0.0, -0.5, 0.0]);
        let qp = ComplexMatrix::pauli_form(0.5, [0.0, 0.5, 0.0]);
        assert!(c.kraus()[0].matrix().approx_eq(&qm, 1e-9));
        assert!(c.kraus()[1].matrix().approx_eq(&qp, 1e-9));
        let p = c.outcome_probabilities(&DensityMatrix::maximally_mixed(2)).unwrap();
        for (_, x) in &p.outcomes {
            assert!((x - 0.5).abs() < 1e-12);
        }
        assert!(p.none.abs() < 1e-12);
    }

    #[test]
    fn full_partition_is_identity_channel() {
        let j = pauli_pair();
        let c = build_channel(&j, &GridPartition::full(2, 2)).unwrap();
        let mut rng = random::rng(2);
        let rho = random::density(&mut rng, 2);
        assert!(c.apply_unselected(&rho).unwrap().matrix().approx_eq(rho.matrix(), 1e-12));
        let u = c.realize_ancilla().unwrap();
        assert!(u.unitary_deviation() < 1e-12);
        assert!(c.ancilla_composite(&u, rho.matrix()).unwrap().approx_eq(rho.matrix(), 1e-12));
        let h = c.sample_outcomes(&rho, 100, 0).unwrap();
        assert_eq!(h.frequency("all"), Some(1.0));
    }

    #[test]
    fn state_in_kraus_range_is_unchanged() {
        let j = pauli_pair();
        let c = build_channel(&j, &GridPartition::rows(2, 2)).unwrap();
        let psi = c.kraus()[1].basis().remove(0);
        let rho = DensityMatrix::pure(&psi).unwrap();
        assert!(c.apply_unselected(&rho).unwrap().matrix().approx_eq(rho.matrix(), 1e-12));
    }

    #[test]
    fn dephasing_via_ancilla() {
        let z = Observable::from_matrix(&ComplexMatrix::pauli_z()).unwrap();
        let j = JointObservable::new(z.clone(), z).unwrap();
        let c = build_channel(&j, &GridPartition::singletons(2, 2)).unwrap();
        let u = c.realize_ancilla().unwrap();
        assert_eq!(u.rows(), 10);
        assert!(u.unitary_deviation() < 1e-12);
        let mut rng = random::rng(3);
        let rho = random::density(&mut rng, 2);
        let out = c.ancilla_composite(&u, rho.matrix()).unwrap();
        // dephasing keeps the diagonal and drops coherences
        let expect = ComplexMatrix::from_fn(2, 2, |i, k| if i == k { rho.matrix()[(i, i)] } else { Complex64::new(0.0, 0.0) });
        assert!(out.approx_eq(&expect, 1e-12));
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = Projector::new(ComplexMatrix::from_real_diagonal(&[1.0, 0.0])).unwrap();
        assert!(matches!(
            MeasurementChannel::new(vec![p.clone(), p.clone()], vec!["a".into(), "b".into()]),
            Err(Error::ChannelInvalid(_))
        ));
        assert!(DensityMatrix::new(ComplexMatrix::from_real_diagonal(&[1.0, 1.0])).is_err());
        assert!(DensityMatrix::new(ComplexMatrix::from_real_diagonal(&[1.5, -0.5])).is_err());
        let half = DensityMatrix::new(ComplexMatrix::from_real_diagonal(&[0.25, 0.25])).unwrap();
        let c = MeasurementChannel::new(vec![p], vec!["a".into()]).unwrap();
        assert!(matches!(c.outcome_probabilities(&half), Err(Error::NotNormalized { .. })));
        assert!(c.apply_unselected(&half).is_ok());
    }

    #[test]
    fn csv_layout_and_determinism() {
        let j = pauli_pair();
        let c = build_channel(&j, &GridPartition::cols(2, 2)).unwrap();
        let rho = DensityMatrix::maximally_mixed(2);
        let a = c.sample_outcomes(&rho, 500, 9).unwrap().to_csv();
        let b = c.sample_outcomes(&rho, 500, 9).unwrap().to_csv();
        assert_eq!(a, b);
        let lines: Vec<&str> = a.lines().collect();
        assert_eq!(lines[0], "label,count,frequency");
        assert!(lines[1].starts_with("b0,"));
        assert!(lines[3].starts_with("none,0,"));
    }
}
