//! The joint observable `J_AB` on grid regions and its verification surface.

mod biclique;
mod region;

use std::collections::HashMap;
use std::sync::RwLock;

use rand::Rng;

pub use biclique::{by_closure, by_row_subsets, common_cols, maximal_rectangles, rows_covering, SUBSET_ENUMERATION_LIMIT};
pub use region::{region_from_borel, GridPartition, GridRegion, Interval, RegionSpec, BOUNDARY_TOL, MAX_AXIS};

use crate::error::{Error, Result};
use crate::linalg::{join_all, meet, norm, orthonormalize, CVector, ComplexMatrix, Projector};
use crate::observable::{check_state, Observable, OutcomePartition, ValueSet};
use crate::random;
use crate::tolerance;

const CACHE_LIMIT: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    A,
    B,
}

/// The pair `(A, B)` with the evaluator `Q ↦ J_AB(Q)`.
///
/// Evaluations are memoized per region. The cache sits behind a lock, so
/// an instance can be shared across threads; every caller sees the same
/// projector for the same region.
#[derive(Debug)]
pub struct JointObservable {
    a: Observable,
    b: Observable,
    cache: RwLock<HashMap<Vec<u64>, Projector>>,
}

impl Clone for JointObservable {
    fn clone(&self) -> Self {
        Self {
            a: self.a.clone(),
            b: self.b.clone(),
            cache: RwLock::new(HashMap::new()),
        }
    }
}

fn bits(set: &ValueSet) -> u64 {
    set.indices().fold(0, |acc, i| acc | 1 << i)
}

impl JointObservable {
    pub fn new(a: Observable, b: Observable) -> Result<Self> {
        if a.dim() != b.dim() {
            return Err(Error::DimensionMismatch {
                expected: a.dim(),
                found: b.dim(),
            });
        }
        for o in [&a, &b] {
            if o.num_values() > MAX_AXIS {
                return Err(Error::GridTooLarge(o.num_values()));
            }
        }
        Ok(Self {
            a,
            b,
            cache: RwLock::new(HashMap::new()),
        })
    }

    pub fn a(&self) -> &Observable {
        &self.a
    }

    pub fn b(&self) -> &Observable {
        &self.b
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    pub fn grid(&self) -> (usize, usize) {
        (self.a.num_values(), self.b.num_values())
    }

    pub fn full_region(&self) -> GridRegion {
        let (n, m) = self.grid();
        GridRegion::full(n, m)
    }

    pub fn empty_region(&self) -> GridRegion {
        let (n, m) = self.grid();
        GridRegion::empty(n, m)
    }

    pub fn region(&self, spec: &RegionSpec) -> Result<GridRegion> {
        region_from_borel(self.a.eigenvalues(), self.b.eigenvalues(), spec)
    }

    fn check_grid(&self, q: &GridRegion) -> Result<()> {
        if q.shape() != self.grid() {
            return Err(Error::GridMismatch {
                expected: self.grid(),
                found: q.shape(),
            });
        }
        Ok(())
    }

    /// `A(S) ∧ B(C)` for row and column bitmasks.
    pub fn rectangle_meet(&self, rows: u64, cols: u64) -> Result<Projector> {
        let pa = self.a.evaluate(&ValueSet::from_bits(rows))?;
        let pb = self.b.evaluate(&ValueSet::from_bits(cols))?;
        meet(&pa, &pb)
    }

    /// `J_AB(Q)`: join of `A(S) ∧ B(C)` over the maximal rectangles `S × C ⊆ Q`.
    pub fn eval(&self, q: &GridRegion) -> Result<Projector> {
        self.check_grid(q)?;
        let n = self.dim();
        if q.is_empty() {
            return Ok(Projector::zero(n));
        }
        if q.is_full() {
            return Ok(Projector::identity(n));
        }
        if let Some(p) = self.cache.read().unwrap_or_else(|e| e.into_inner()).get(q.row_bits()) {
            return Ok(p.clone());
        }
        let meets = maximal_rectangles(q)
            .into_iter()
            .map(|(s, c)| self.rectangle_meet(s, c))
            .collect::<Result<Vec<_>>>()?;
        let p = join_all(n, &meets)?;
        let mut cache = self.cache.write().unwrap_or_else(|e| e.into_inner());
        if cache.len() < CACHE_LIMIT {
            cache.entry(q.row_bits().to_vec()).or_insert_with(|| p.clone());
        }
        Ok(p)
    }

    pub fn eval_cells(&self, cells: &[(usize, usize)]) -> Result<Projector> {
        let (n, m) = self.grid();
        self.eval(&GridRegion::from_points(n, m, cells)?)
    }

    /// `J(R × σ(B))` or `J(σ(A) × R)`.
    pub fn margin(&self, r: &ValueSet, axis: Axis) -> Result<Projector> {
        let (n, m) = self.grid();
        let len = match axis {
            Axis::A => n,
            Axis::B => m,
        };
        if let Some(max) = r.max_index().filter(|&i| i >= len) {
            return Err(Error::IndexOutOfRange { index: max, len });
        }
        let q = match axis {
            Axis::A => GridRegion::rectangle(n, m, bits(r), u64::MAX),
            Axis::B => GridRegion::rectangle(n, m, u64::MAX, bits(r)),
        };
        self.eval(&q)
    }

    /// Span of `A(S) ∧ B(C)` over every rectangle `S × C ⊆ Q`, maximal or not.
    pub fn minimality_oracle(&self, q: &GridRegion) -> Result<Projector> {
        self.check_grid(q)?;
        let (n, _) = self.grid();
        if n > 16 {
            return Err(Error::GridTooLarge(n));
        }
        let dim = self.dim();
        let mut pool: Vec<CVector> = Vec::new();
        for s in 1..(1u64 << n) {
            let companion = common_cols(q, s);
            // every non-empty subset of the companion columns
            let mut c = companion;
            while c != 0 {
                let p = self.rectangle_meet(s, c)?;
                pool.extend(p.basis());
                c = (c - 1) & companion;
            }
        }
        let basis = orthonormalize(&pool, tolerance::active().join_cutoff);
        Projector::snap(&projector_matrix(dim, &basis))
    }

    /// `I − Σ_i J(Q_i)`.
    pub fn defect(&self, p: &GridPartition) -> Result<Projector> {
        let (n, m) = self.grid();
        p.validate(n, m)?;
        let mut sum = ComplexMatrix::zeros(self.dim(), self.dim());
        for q in &p.regions {
            sum = &sum + self.eval(q)?.matrix();
        }
        Projector::snap(&(&ComplexMatrix::identity(self.dim()) - &sum))
    }

    /// Compares `l_A·l_B` against `2ΔAΔB` for the smallest closed intervals
    /// containing the possible outcomes of `psi`.
    pub fn uncertainty_check(&self, psi: &[crate::Complex64]) -> Result<UncertaintyRecord> {
        check_state(self.dim(), psi)?;
        let ma = self.a.possible_outcomes(psi)?;
        let mb = self.b.possible_outcomes(psi)?;
        let (n, m) = self.grid();
        let span = |set: &ValueSet, values: &[f64]| -> (f64, u64) {
            let lo = set.indices().next().expect("a unit vector has an outcome");
            let hi = set.max_index().expect("non-empty");
            let rows = (lo..=hi).fold(0u64, |acc, i| acc | 1 << i);
            (values[hi] - values[lo], rows)
        };
        let (l_a, rows) = span(&ma, self.a.eigenvalues());
        let (l_b, cols) = span(&mb, self.b.eigenvalues());
        let delta_a = spread(&self.a, psi);
        let delta_b = spread(&self.b, psi);
        let tol = tolerance::active().check;
        let fixed = self.eval(&GridRegion::rectangle(n, m, rows, cols))?.apply(psi);
        let confined = fixed.iter().zip(psi).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max) <= tol;
        Ok(UncertaintyRecord {
            l_a,
            l_b,
            delta_a,
            delta_b,
            holds: l_a * l_b >= 2.0 * delta_a * delta_b - tol,
            confined,
        })
    }
}

/// Samples families of disjoint atom sets and checks the gPVM axioms for
/// `eval`, a map from sets of atoms to projectors.
pub(crate) fn check_gpvm_axioms(
    dim: usize,
    atoms: usize,
    trials: usize,
    seed: u64,
    tol: f64,
    eval: impl Fn(&[usize]) -> Result<Projector>,
    describe: impl Fn(&[usize]) -> String,
) -> Result<GpvmReport> {
    let mut rng = random::rng(seed);
    let id = ComplexMatrix::identity(dim);
    let mut report = GpvmReport {
        trials,
        additive: true,
        ..Default::default()
    };
    let check = |report: &mut GpvmReport, name: &'static str, trial: usize, dev: f64, witness: &dyn Fn() -> String| {
        report.checks += 1;
        if dev.is_nan() || dev > tol {
            report.violations.push(Violation {
                check: name,
                trial,
                deviation: dev,
                witness: witness(),
            });
        }
    };

    let all: Vec<usize> = (0..atoms).collect();
    let empty = eval(&[])?;
    check(&mut report, "null", 0, empty.matrix().max_abs(), &|| "empty set".into());
    let full = eval(&all)?;
    check(&mut report, "unit", 0, full.matrix().max_diff(&id), &|| "everything".into());

    for trial in 0..trials {
        let k = rng.random_range(1..=4usize);
        let mut family = vec![Vec::new(); k];
        for a in 0..atoms {
            let label = rng.random_range(0..=k);
            if label > 0 {
                family[label - 1].push(a);
            }
        }
        let values = family.iter().map(|q| eval(q)).collect::<Result<Vec<_>>>()?;
        let mut union: Vec<usize> = family.concat();
        union.sort_unstable();
        let j_union = eval(&union)?;
        let sets = || family.iter().map(|q| describe(q)).collect::<Vec<_>>().join(" | ");
        let mut sum = ComplexMatrix::zeros(dim, dim);
        for (x, px) in values.iter().enumerate() {
            sum = &sum + px.matrix();
            for (y, py) in values.iter().enumerate().skip(x + 1) {
                let prod = (px.matrix() * py.matrix()).max_abs();
                check(&mut report, "orthogonality", trial, prod, &|| format!("sets {x},{y} of {}", sets()));
                let mut pair = [family[x].as_slice(), family[y].as_slice()].concat();
                pair.sort_unstable();
                let both = eval(&pair)?;
                let dev = (both.matrix() * px.matrix()).max_diff(px.matrix());
                check(&mut report, "monotonicity", trial, dev, &|| format!("set {x} ⊆ {x}∪{y} of {}", sets()));
            }
        }
        let sub = (j_union.matrix() * &sum).max_diff(&sum);
        check(&mut report, "sub-additivity", trial, sub, &sets);
        if sum.max_diff(j_union.matrix()) > tol {
            report.additive = false;
        }
    }
    Ok(report)
}

fn projector_matrix(dim: usize, basis: &[CVector]) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(dim, dim);
    for v in basis {
        m = &m + &ComplexMatrix::outer(v);
    }
    m
}

/// Standard deviation of `x` in the state `psi`.
fn spread(x: &Observable, psi: &[crate::Complex64]) -> f64 {
    let weights: Vec<f64> = x.projectors().iter().map(|p| norm(&p.apply(psi)).powi(2)).collect();
    let mean: f64 = x.eigenvalues().iter().zip(&weights).map(|(l, w)| l * w).sum();
    let var: f64 = x.eigenvalues().iter().zip(&weights).map(|(l, w)| w * (l - mean).powi(2)).sum();
    var.sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct UncertaintyRecord {
    pub l_a: f64,
    pub l_b: f64,
    pub delta_a: f64,
    pub delta_b: f64,
    /// `l_A·l_B ≥ 2ΔAΔB` up to the check tolerance.
    pub holds: bool,
    /// `J(L_A × L_B)ψ = ψ`.
    pub confined: bool,
}

/// One failed property with enough context to reproduce it.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub check: &'static str,
    pub trial: usize,
    pub deviation: f64,
    pub witness: String,
}

#[derive(Debug, Clone, Default)]
pub struct GpvmReport {
    pub trials: usize,
    pub checks: usize,
    /// Every sampled disjoint family was exactly additive.
    pub additive: bool,
    pub violations: Vec<Violation>,
}

impl GpvmReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

impl JointObservable {
    /// Samples disjoint region families and checks the gPVM axioms: null
    /// and unit values, orthogonality, monotonicity and sub-additivity.
    pub fn verify_gpvm(&self, trials: usize, seed: u64) -> Result<GpvmReport> {
        self.verify_gpvm_with(trials, seed, tolerance::active().check)
    }

    pub fn verify_gpvm_with(&self, trials: usize, seed: u64, tol: f64) -> Result<GpvmReport> {
        let (n, m) = self.grid();
        let region = |atoms: &[usize]| {
            let mut q = GridRegion::empty(n, m);
            for &a in atoms {
                q.insert(a / m, a % m);
            }
            q
        };
        check_gpvm_axioms(self.dim(), n * m, trials, seed, tol, |atoms| self.eval(&region(atoms)), |atoms| {
            format!("{:?}", region(atoms))
        })
    }

    /// Common eigenvectors of `A` and `B` are fixed by `J(Q)` when their
    /// eigenvalue pair lies in `Q` and annihilated otherwise. Returns the
    /// largest deviation over all common eigenvectors and the cells checked.
    pub fn eigenstate_law(&self, q: &GridRegion) -> Result<(f64, usize)> {
        let p = self.eval(q)?;
        let (n, m) = self.grid();
        let mut worst: f64 = 0.0;
        let mut vectors = 0;
        for i in 0..n {
            for k in 0..m {
                let common = self.rectangle_meet(1 << i, 1 << k)?;
                for psi in common.basis() {
                    vectors += 1;
                    let image = p.apply(&psi);
                    let dev = if q.contains(i, k) {
                        diff(&image, &psi)
                    } else {
                        norm(&image)
                    };
                    worst = worst.max(dev);
                }
            }
        }
        Ok((worst, vectors))
    }

    /// Exercises both conditions of the characterization of `J_AB`:
    /// a state fixed by some `A(R₁) ∧ B(R₂)` with `R₁×R₂ ⊆ Q` is fixed by
    /// `J(Q)`, and a state annihilated by every such meet is annihilated by
    /// `J(Q)`. Test states are drawn from the relevant subspaces.
    pub fn characterization_check<R: Rng + ?Sized>(&self, q: &GridRegion, rng: &mut R) -> Result<CharacterizationRecord> {
        let j = self.eval(q)?;
        let dim = self.dim();
        let (n, _) = self.grid();
        let mut rec = CharacterizationRecord::default();
        let mut meets = Vec::new();
        for s in 1..(1u64 << n) {
            let companion = common_cols(q, s);
            let mut c = companion;
            while c != 0 {
                meets.push(self.rectangle_meet(s, c)?);
                c = (c - 1) & companion;
            }
        }
        for p in meets.iter().filter(|p| !p.is_zero()) {
            let psi = random_state_in(p, rng);
            rec.fixing_cases += 1;
            rec.fixing_deviation = rec.fixing_deviation.max(diff(&j.apply(&psi), &psi));
        }
        let pooled: Vec<CVector> = meets.iter().flat_map(|p| p.basis()).collect();
        let span = orthonormalize(&pooled, tolerance::active().join_cutoff);
        if span.len() < dim {
            let outside = Projector::snap(&(&ComplexMatrix::identity(dim) - &projector_matrix(dim, &span)))?;
            for _ in 0..3 {
                let psi = random_state_in(&outside, rng);
                let hypothesis = meets.iter().map(|p| norm(&p.apply(&psi))).fold(0.0, f64::max);
                rec.annihilating_cases += 1;
                rec.hypothesis_deviation = rec.hypothesis_deviation.max(hypothesis);
                rec.annihilating_deviation = rec.annihilating_deviation.max(norm(&j.apply(&psi)));
            }
        }
        Ok(rec)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CharacterizationRecord {
    pub fixing_cases: usize,
    pub fixing_deviation: f64,
    pub annihilating_cases: usize,
    /// How far the sampled states are from satisfying the hypothesis of
    /// the second condition (should be round-off).
    pub hypothesis_deviation: f64,
    pub annihilating_deviation: f64,
}

impl CharacterizationRecord {
    pub fn holds(&self, tol: f64) -> bool {
        self.fixing_deviation <= tol && self.annihilating_deviation <= tol && self.hypothesis_deviation <= tol
    }
}

fn diff(a: &[crate::Complex64], b: &[crate::Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn random_state_in<R: Rng + ?Sized>(p: &Projector, rng: &mut R) -> CVector {
    let basis = p.basis();
    let coeffs = random::unit_vector(rng, basis.len());
    let mut psi = vec![crate::Complex64::new(0.0, 0.0); p.dim()];
    for (c, v) in coeffs.iter().zip(&basis) {
        for (x, y) in psi.iter_mut().zip(v) {
            *x += c * y;
        }
    }
    let r = norm(&psi);
    psi.into_iter().map(|z| z / r).collect()
}

/// The joint of two coarse-grained observables, checked against the
/// coarse-graining of the fine joint.
#[derive(Debug)]
pub struct CoarseJoint {
    pub joint: JointObservable,
    pub a_labels: Vec<String>,
    pub b_labels: Vec<String>,
    pub masks_checked: usize,
    pub max_deviation: f64,
    /// The product cells' values sum to the identity.
    pub product_complete: bool,
    /// When `product_complete`, whether the coarse joint is additive on
    /// every checked mask.
    pub additive: Option<bool>,
}

/// Coarse masks are checked exhaustively up to this many coarse cells.
pub const COARSE_EXHAUSTIVE_CELLS: usize = 12;
const COARSE_SAMPLE: usize = 512;

/// Builds `J_{ÃB̃}` and verifies `J_{ÃB̃}(Q̃) = J_AB(⋃Q̃)` on the coarse grid.
pub fn coarse_grain_joint(j: &JointObservable, pa: &OutcomePartition, pb: &OutcomePartition) -> Result<CoarseJoint> {
    let ca = j.a.coarse_grain(pa)?;
    let cb = j.b.coarse_grain(pb)?;
    let coarse = JointObservable::new(ca.observable, cb.observable)?;
    let (na, nb) = coarse.grid();
    let (n, m) = j.grid();
    let a_bits: Vec<u64> = pa.blocks.iter().map(bits).collect();
    let b_bits: Vec<u64> = pb.blocks.iter().map(bits).collect();
    let fine_of = |qt: &GridRegion| -> GridRegion {
        let mut fine = GridRegion::empty(n, m);
        for (x, y) in qt.cells() {
            fine = fine.union(&GridRegion::rectangle(n, m, a_bits[x], b_bits[y]));
        }
        fine
    };
    let dim = j.dim();
    let tol = tolerance::active().check;

    let mut cell_values = Vec::with_capacity(na * nb);
    let mut total = ComplexMatrix::zeros(dim, dim);
    for &ra in a_bits.iter().take(na) {
        for &rb in b_bits.iter().take(nb) {
            let v = j.eval(&GridRegion::rectangle(n, m, ra, rb))?;
            total = &total + v.matrix();
            cell_values.push(v);
        }
    }
    let product_complete = total.max_diff(&ComplexMatrix::identity(dim)) <= tol;

    let cells = na * nb;
    let masks: Vec<GridRegion> = if cells <= COARSE_EXHAUSTIVE_CELLS {
        (0..(1u128 << cells)).map(|b| GridRegion::from_cell_bits(na, nb, b)).collect()
    } else {
        let mut rng = random::rng(0x636f_6172_7365);
        (0..COARSE_SAMPLE)
            .map(|_| GridRegion::from_mask(na, nb, &random::mask(&mut rng, cells, 0.5)).expect("sized mask"))
            .collect()
    };
    let mut max_deviation: f64 = 0.0;
    let mut additive = true;
    for qt in &masks {
        let lhs = coarse.eval(qt)?;
        let rhs = j.eval(&fine_of(qt))?;
        let dev = lhs.matrix().max_diff(rhs.matrix());
        if dev > tol {
            return Err(Error::CoarseGrainingMismatch {
                deviation: dev,
                mask: qt.mask(),
            });
        }
        max_deviation = max_deviation.max(dev);
        if product_complete {
            let mut sum = ComplexMatrix::zeros(dim, dim);
            for (x, y) in qt.cells() {
                sum = &sum + cell_values[x * nb + y].matrix();
            }
            if sum.max_diff(lhs.matrix()) > tol {
                additive = false;
            }
        }
    }
    Ok(CoarseJoint {
        joint: coarse,
        a_labels: ca.labels,
        b_labels: cb.labels,
        masks_checked: masks.len(),
        max_deviation,
        product_complete,
        additive: product_complete.then_some(additive),
    })
}
