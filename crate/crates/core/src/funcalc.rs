//! Functional calculus for non-commuting pairs.
//!
//! For a real function `f` of two variables, `f(A,B) = J_AB ∘ f⁻¹` assigns a
//! projector to every set of values in `f(σ(A), σ(B))`. In general this is
//! only a gPVM. Fixing a total order on the finite value set (a generating
//! chain) and differencing the values of its prefixes turns it into an
//! ordinary observable `f_E(A,B)`. With `f = +` and `f = ×` under the
//! ascending order this gives `A∔B` and `A⋆×B`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::joint::{check_gpvm_axioms, GpvmReport, GridRegion, JointObservable};
use crate::linalg::{norm, ComplexMatrix, Projector};
use crate::observable::{spectral_leq, Observable, ValueSet};
use crate::random;
use crate::tolerance;

/// Bound used by the identity checks of this module.
pub const IDENTITY_TOL: f64 = 1e-8;

/// `f(λ_i, μ_k)` on the grid of spectral values, with the distinct values
/// merged into an ascending list.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueTable {
    raw: Vec<Vec<f64>>,
    values: Vec<f64>,
    index: Vec<Vec<usize>>,
}

impl ValueTable {
    pub fn build(a: &[f64], b: &[f64], f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        Self::try_build(a, b, |x, y| {
            let v = f(x, y);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::FunctionUndefined {
                    at: format!("x={x}, y={y}"),
                })
            }
        })
    }

    /// Like [`ValueTable::build`] for fallible functions such as parsed
    /// expressions.
    pub fn try_build(a: &[f64], b: &[f64], f: impl Fn(f64, f64) -> Result<f64>) -> Result<Self> {
        let mut raw = vec![vec![0.0; b.len()]; a.len()];
        let mut cells = Vec::with_capacity(a.len() * b.len());
        for (i, &x) in a.iter().enumerate() {
            for (k, &y) in b.iter().enumerate() {
                let v = f(x, y)?;
                if !v.is_finite() {
                    return Err(Error::FunctionUndefined {
                        at: format!("x={x}, y={y}"),
                    });
                }
                raw[i][k] = v;
                cells.push((v, i, k));
            }
        }
        cells.sort_by(|p, q| p.0.total_cmp(&q.0));
        let tol = tolerance::active();
        let mut values = Vec::new();
        let mut index = vec![vec![0; b.len()]; a.len()];
        let mut start = 0;
        while start < cells.len() {
            let mut end = start + 1;
            while end < cells.len() && tol.same_value(cells[end - 1].0, cells[end].0) {
                end += 1;
            }
            let group = &cells[start..end];
            let mean = if group.iter().all(|c| c.0 == group[0].0) {
                group[0].0
            } else {
                group.iter().map(|c| c.0).sum::<f64>() / group.len() as f64
            };
            for &(_, i, k) in group {
                index[i][k] = values.len();
            }
            values.push(mean);
            start = end;
        }
        Ok(Self { raw, values, index })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.raw.len(), self.raw.first().map_or(0, Vec::len))
    }

    /// The distinct values, strictly ascending.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `f(λ_i, μ_k)` before merging.
    pub fn raw(&self, i: usize, k: usize) -> f64 {
        self.raw[i][k]
    }

    pub fn value_index(&self, i: usize, k: usize) -> usize {
        self.index[i][k]
    }

    pub fn index_map(&self) -> &[Vec<usize>] {
        &self.index
    }

    /// Position of `v` in the value list, within the merge tolerance.
    pub fn position(&self, v: f64) -> Option<usize> {
        let tol = tolerance::active();
        self.values.iter().position(|&w| tol.same_value(w, v))
    }

    /// Same index map and values within `tol`.
    pub fn equivalent(&self, other: &ValueTable, tol: f64) -> bool {
        self.index == other.index
            && self.values.len() == other.values.len()
            && self.values.iter().zip(&other.values).all(|(x, y)| (x - y).abs() <= tol)
    }

    /// Grid cells whose value lies in `set`.
    pub fn preimage(&self, set: &ValueSet) -> Result<GridRegion> {
        if let Some(max) = set.max_index().filter(|&i| i >= self.values.len()) {
            return Err(Error::IndexOutOfRange {
                index: max,
                len: self.values.len(),
            });
        }
        let (n, m) = self.shape();
        let mut q = GridRegion::empty(n, m);
        for i in 0..n {
            for k in 0..m {
                if set.contains(self.index[i][k]) {
                    q.insert(i, k);
                }
            }
        }
        Ok(q)
    }
}

/// `f(A,B)`: the joint observable of `A`, `B` pulled back along `f`.
#[derive(Debug, Clone)]
pub struct GeneralizedObservable {
    joint: JointObservable,
    table: ValueTable,
}

impl GeneralizedObservable {
    pub fn new(a: &Observable, b: &Observable, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let joint = JointObservable::new(a.clone(), b.clone())?;
        let table = ValueTable::build(a.eigenvalues(), b.eigenvalues(), f)?;
        Ok(Self { joint, table })
    }

    pub fn try_new(a: &Observable, b: &Observable, f: impl Fn(f64, f64) -> Result<f64>) -> Result<Self> {
        let joint = JointObservable::new(a.clone(), b.clone())?;
        let table = ValueTable::try_build(a.eigenvalues(), b.eigenvalues(), f)?;
        Ok(Self { joint, table })
    }

    pub fn from_table(joint: JointObservable, table: ValueTable) -> Result<Self> {
        if table.shape() != joint.grid() {
            return Err(Error::GridMismatch {
                expected: joint.grid(),
                found: table.shape(),
            });
        }
        Ok(Self { joint, table })
    }

    pub fn joint(&self) -> &JointObservable {
        &self.joint
    }

    pub fn table(&self) -> &ValueTable {
        &self.table
    }

    pub fn values(&self) -> &[f64] {
        self.table.values()
    }

    pub fn dim(&self) -> usize {
        self.joint.dim()
    }

    /// `f(A,B)(S) = J_AB(f⁻¹(S))` for a set of value indices.
    pub fn eval(&self, set: &ValueSet) -> Result<Projector> {
        self.joint.eval(&self.table.preimage(set)?)
    }

    /// [`GeneralizedObservable::eval`] addressed by the values themselves.
    pub fn eval_values(&self, values: &[f64]) -> Result<Projector> {
        let indices = values
            .iter()
            .map(|&v| self.table.position(v).ok_or(Error::UnknownValue(v)))
            .collect::<Result<Vec<_>>>()?;
        self.eval(&ValueSet::new(indices))
    }

    /// True when the singleton values sum to the identity, i.e. `f(A,B)`
    /// is already a PVM.
    pub fn is_pvm(&self) -> Result<bool> {
        let dim = self.dim();
        let mut sum = ComplexMatrix::zeros(dim, dim);
        for j in 0..self.values().len() {
            sum = &sum + self.eval(&ValueSet::single(j))?.matrix();
        }
        Ok(sum.max_diff(&ComplexMatrix::identity(dim)) <= tolerance::active().check)
    }

    /// `f(UAU†, UBU†)`, reusing the value table.
    pub fn conjugate(&self, u: &ComplexMatrix) -> Result<Self> {
        let joint = JointObservable::new(self.joint.a().conjugate(u)?, self.joint.b().conjugate(u)?)?;
        Ok(Self {
            joint,
            table: self.table.clone(),
        })
    }

    /// gPVM axioms on random disjoint families of value sets.
    pub fn verify_gpvm(&self, trials: usize, seed: u64, tol: f64) -> Result<GpvmReport> {
        let values = self.values();
        check_gpvm_axioms(
            self.dim(),
            values.len(),
            trials,
            seed,
            tol,
            |atoms| self.eval(&ValueSet::new(atoms.iter().copied())),
            |atoms| format!("{:?}", atoms.iter().map(|&j| values[j]).collect::<Vec<_>>()),
        )
    }
}

/// A generating chain on a finite value set: a total order `v₁ ≺ … ≺ v_N`
/// of value indices. Prefix `k` is the chain element `{v₁, …, v_k}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainOrder(Vec<usize>);

impl ChainOrder {
    /// The chain of half-lines `(−∞, λ]`.
    pub fn ascending(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub fn from_permutation(order: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; order.len()];
        for &j in &order {
            match seen.get_mut(j) {
                Some(s) if !*s => *s = true,
                Some(_) => return Err(Error::InvalidChain(format!("index {j} appears twice"))),
                None => {
                    return Err(Error::InvalidChain(format!(
                        "index {j} out of range for {} values",
                        order.len()
                    )))
                }
            }
        }
        Ok(Self(order))
    }

    /// Order given by listing the values of `table` in chain order.
    pub fn from_values(table: &ValueTable, values: &[f64]) -> Result<Self> {
        let order = values
            .iter()
            .map(|&v| table.position(v).ok_or(Error::UnknownValue(v)))
            .collect::<Result<Vec<_>>>()?;
        if order.len() != table.values().len() {
            return Err(Error::InvalidChain(format!(
                "{} values listed, the value set has {}",
                order.len(),
                table.values().len()
            )));
        }
        Self::from_permutation(order)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_ascending(&self) -> bool {
        self.0.iter().enumerate().all(|(k, &j)| k == j)
    }

    pub fn prefix(&self, k: usize) -> ValueSet {
        ValueSet::new(self.0[..k].iter().copied())
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if self.0.len() != n {
            return Err(Error::InvalidChain(format!(
                "order has {} entries, the value set has {n}",
                self.0.len()
            )));
        }
        Ok(())
    }
}

fn order_or_ascending(order: Option<&ChainOrder>, n: usize) -> ChainOrder {
    order.cloned().unwrap_or_else(|| ChainOrder::ascending(n))
}

/// `f(A,B)` on every prefix of the chain, `E_1, …, E_N`.
pub fn chain_prefixes(g: &GeneralizedObservable, order: &ChainOrder) -> Result<Vec<Projector>> {
    order.check_len(g.values().len())?;
    (1..=order.len()).map(|k| g.eval(&order.prefix(k))).collect()
}

/// `f_E(A,B)`: value `v_k` carries the increment `E_k − E_{k−1}`; values
/// with a zero increment are dropped.
pub fn extract_pvm(g: &GeneralizedObservable, order: &ChainOrder) -> Result<Observable> {
    let tol = tolerance::active().check;
    let prefixes = chain_prefixes(g, order)?;
    let mut prev = Projector::zero(g.dim());
    let mut pieces: Vec<(f64, Projector)> = Vec::new();
    for (&j, e) in order.as_slice().iter().zip(prefixes) {
        if !prev.leq(&e, tol) {
            return Err(Error::PreconditionFailed(format!(
                "chain values are not nested at value {}",
                g.values()[j]
            )));
        }
        if e.rank() > prev.rank() {
            pieces.push((g.values()[j], Projector::snap(&(e.matrix() - prev.matrix()))?));
        }
        prev = e;
    }
    pieces.sort_by(|p, q| p.0.total_cmp(&q.0));
    let (values, projectors) = pieces.into_iter().unzip();
    Observable::from_spectral(values, projectors)
}

/// Largest deviation between `obs` and `f(A,B)` over the prefixes of the chain.
pub fn prefix_deviation(g: &GeneralizedObservable, order: &ChainOrder, obs: &Observable) -> Result<f64> {
    let prefixes = chain_prefixes(g, order)?;
    let mut worst: f64 = 0.0;
    for (k, e) in prefixes.iter().enumerate() {
        let members: Vec<f64> = order.as_slice()[..=k].iter().map(|&j| g.values()[j]).collect();
        let set = ValueSet::new((0..obs.num_values()).filter(|&i| members.contains(&obs.eigenvalues()[i])));
        worst = worst.max(obs.evaluate(&set)?.matrix().max_diff(e.matrix()));
    }
    Ok(worst)
}

/// `f_E(A,B)` for the given chain, ascending when `order` is `None`.
pub fn f_e(a: &Observable, b: &Observable, f: impl Fn(f64, f64) -> f64, order: Option<&ChainOrder>) -> Result<Observable> {
    let g = GeneralizedObservable::new(a, b, f)?;
    extract_pvm(&g, &order_or_ascending(order, g.values().len()))
}

/// `A∔B`.
pub fn dot_plus(a: &Observable, b: &Observable) -> Result<Observable> {
    f_e(a, b, |x, y| x + y, None)
}

pub fn dot_plus_in(a: &Observable, b: &Observable, order: &ChainOrder) -> Result<Observable> {
    f_e(a, b, |x, y| x + y, Some(order))
}

/// `A⋆×B`.
pub fn dot_times(a: &Observable, b: &Observable) -> Result<Observable> {
    f_e(a, b, |x, y| x * y, None)
}

pub fn dot_times_in(a: &Observable, b: &Observable, order: &ChainOrder) -> Result<Observable> {
    f_e(a, b, |x, y| x * y, Some(order))
}

/// Distance between `(g∘f)_E(A,B)` and `g(f_E(A,B))`.
///
/// `g` must be non-decreasing along the chain, so that `g⁻¹` maps the
/// ascending chain of `g∘f` onto prefixes of the chain of `f`.
pub fn composition_deviation(
    g: impl Fn(f64) -> f64,
    f: impl Fn(f64, f64) -> f64,
    a: &Observable,
    b: &Observable,
    order: Option<&ChainOrder>,
) -> Result<f64> {
    let inner = GeneralizedObservable::new(a, b, &f)?;
    let order = order_or_ascending(order, inner.values().len());
    order.check_len(inner.values().len())?;
    let tol = tolerance::active().value_merge;
    let along: Vec<f64> = order.as_slice().iter().map(|&j| g(inner.values()[j])).collect();
    if along.windows(2).any(|w| w[1] < w[0] - tol * (1.0 + w[0].abs())) {
        return Err(Error::NotMonotone);
    }
    let rhs = extract_pvm(&inner, &order)?.apply_scalar_function(&g)?;
    let lhs = f_e(a, b, |x, y| g(f(x, y)), None)?;
    Ok(lhs.distance(&rhs))
}

pub fn check_composition(
    g: impl Fn(f64) -> f64,
    f: impl Fn(f64, f64) -> f64,
    a: &Observable,
    b: &Observable,
    order: Option<&ChainOrder>,
) -> Result<bool> {
    Ok(composition_deviation(g, f, a, b, order)? <= IDENTITY_TOL)
}

/// Distance between `h_E(A,B)` for `h(x,y) = f(g₁(x), g₂(y))` and
/// `f_E(g₁(A), g₂(B))`. The order refers to the values of `h`; it is
/// carried over to the right-hand side by value.
pub fn right_composition_deviation(
    f: impl Fn(f64, f64) -> f64,
    g1: impl Fn(f64) -> f64,
    g2: impl Fn(f64) -> f64,
    a: &Observable,
    b: &Observable,
    order: Option<&ChainOrder>,
) -> Result<f64> {
    let lhs_g = GeneralizedObservable::new(a, b, |x, y| f(g1(x), g2(y)))?;
    let lhs_order = order_or_ascending(order, lhs_g.values().len());
    let lhs = extract_pvm(&lhs_g, &lhs_order)?;
    let ga = a.apply_scalar_function(&g1)?;
    let gb = b.apply_scalar_function(&g2)?;
    let rhs_g = GeneralizedObservable::new(&ga, &gb, &f)?;
    let listed: Vec<f64> = lhs_order.as_slice().iter().map(|&j| lhs_g.values()[j]).collect();
    let rhs_order = ChainOrder::from_values(rhs_g.table(), &listed)?;
    let rhs = extract_pvm(&rhs_g, &rhs_order)?;
    Ok(lhs.distance(&rhs))
}

pub fn check_right_composition(
    f: impl Fn(f64, f64) -> f64,
    g1: impl Fn(f64) -> f64,
    g2: impl Fn(f64) -> f64,
    a: &Observable,
    b: &Observable,
    order: Option<&ChainOrder>,
) -> Result<bool> {
    Ok(right_composition_deviation(f, g1, g2, a, b, order)? <= IDENTITY_TOL)
}

/// Whether `A ⊑ B` carries over to `A∔C ⊑ B∔C`.
pub fn check_spectral_monotonicity(a: &Observable, b: &Observable, c: &Observable) -> Result<bool> {
    if !spectral_leq(a, b)? {
        return Err(Error::PreconditionFailed("a is not below b in the spectral order".into()));
    }
    spectral_leq(&dot_plus(a, c)?, &dot_plus(b, c)?)
}

/// Deviations for the three structural properties of `f_E(A,B)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeReport {
    /// Distance of the farthest eigenvalue of `f_E(A,B)` from the raw grid values.
    pub spectrum_deviation: f64,
    /// `‖f_E(UAU†, UBU†) − U f_E(A,B) U†‖` for one random unitary.
    pub covariance_deviation: f64,
    /// `‖f_E(A,B)ψ − f(a,b)ψ‖` over the common eigenvectors.
    pub eigenstate_deviation: f64,
    pub eigenstates: usize,
}

impl FeReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.spectrum_deviation <= tol && self.covariance_deviation <= tol && self.eigenstate_deviation <= tol
    }
}

pub fn property_suite_fe<R: Rng + ?Sized>(
    a: &Observable,
    b: &Observable,
    f: impl Fn(f64, f64) -> f64,
    order: Option<&ChainOrder>,
    rng: &mut R,
) -> Result<FeReport> {
    let g = GeneralizedObservable::new(a, b, f)?;
    let table = g.table();
    let order = order_or_ascending(order, g.values().len());
    let obs = extract_pvm(&g, &order)?;
    let (n, m) = table.shape();

    let spectrum_deviation = obs
        .eigenvalues()
        .iter()
        .map(|&v| {
            (0..n)
                .flat_map(|i| (0..m).map(move |k| (i, k)))
                .map(|(i, k)| (table.raw(i, k) - v).abs())
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max);

    let u = random::unitary(rng, g.dim());
    let moved = extract_pvm(&g.conjugate(&u)?, &order)?;
    let covariance_deviation = moved.distance(&obs.conjugate(&u)?);

    let matrix = obs.matrix();
    let mut eigenstate_deviation: f64 = 0.0;
    let mut eigenstates = 0;
    for i in 0..n {
        for k in 0..m {
            let common = g.joint().rectangle_meet(1 << i, 1 << k)?;
            for psi in common.basis() {
                eigenstates += 1;
                let image = matrix.mul_vec(&psi);
                let target: Vec<_> = psi.iter().map(|z| z * table.raw(i, k)).collect();
                let d: Vec<_> = image.iter().zip(&target).map(|(x, y)| x - y).collect();
                eigenstate_deviation = eigenstate_deviation.max(norm(&d));
            }
        }
    }
    Ok(FeReport {
        spectrum_deviation,
        covariance_deviation,
        eigenstate_deviation,
        eigenstates,
    })
}

/// Spectra of `(A∔B)∔C` and `A∔(B∔C)` for traceless qubit observables
/// `|a| â·σ`, `|b| b̂·σ`, `|c| ĉ·σ`, next to the closed forms
/// `±(||a|−|b|| − |c|)` and `±(|a| − ||b|−|c||)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Nonassociativity {
    pub left: Vec<f64>,
    pub right: Vec<f64>,
    pub predicted_left: Vec<f64>,
    pub predicted_right: Vec<f64>,
}

impl Nonassociativity {
    /// Largest gap between computed and predicted spectra, infinite when
    /// the number of eigenvalues differs.
    pub fn deviation(&self) -> f64 {
        spectrum_gap(&self.left, &self.predicted_left).max(spectrum_gap(&self.right, &self.predicted_right))
    }
}

fn spectrum_gap(x: &[f64], y: &[f64]) -> f64 {
    if x.len() != y.len() {
        return f64::INFINITY;
    }
    x.iter().zip(y).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max)
}

fn plus_minus(x: f64) -> Vec<f64> {
    if x.abs() <= IDENTITY_TOL {
        vec![0.0]
    } else {
        vec![-x.abs(), x.abs()]
    }
}

/// Default axes: pairwise non-colinear.
pub const DEMO_AXES: [[f64; 3]; 3] = [
    [1.0, 0.0, 0.0],
    [0.0, 1.0, 0.0],
    [0.577_350_269_189_625_8, 0.577_350_269_189_625_8, 0.577_350_269_189_625_8],
];

pub fn nonassociativity_demo(a: f64, b: f64, c: f64) -> Result<Nonassociativity> {
    nonassociativity_with_axes([a, b, c], DEMO_AXES)
}

pub fn nonassociativity_with_axes(magnitudes: [f64; 3], axes: [[f64; 3]; 3]) -> Result<Nonassociativity> {
    let obs = |k: usize| {
        let v = axes[k].map(|x| x * magnitudes[k]);
        Observable::from_matrix(&ComplexMatrix::pauli_form(0.0, v))
    };
    let (a, b, c) = (obs(0)?, obs(1)?, obs(2)?);
    let left = dot_plus(&dot_plus(&a, &b)?, &c)?;
    let right = dot_plus(&a, &dot_plus(&b, &c)?)?;
    let [ma, mb, mc] = magnitudes.map(f64::abs);
    Ok(Nonassociativity {
        left: left.eigenvalues().to_vec(),
        right: right.eigenvalues().to_vec(),
        predicted_left: plus_minus((ma - mb).abs() - mc),
        predicted_right: plus_minus(ma - (mb - mc).abs()),
    })
}

#[cfg(test)]
mod tests;
