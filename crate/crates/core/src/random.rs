//! Random operators and states for property sweeps.
//!
//! Every sampler takes the generator explicitly; [`rng`] gives the seeded
//! generator used throughout the crate.

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::linalg::{norm, orthonormalize, CVector, ComplexMatrix, Projector};
use crate::measure::DensityMatrix;
use crate::observable::Observable;

/// Identifier of the generator behind [`rng`], reported in output metadata.
pub const RNG_ALGORITHM: &str = "chacha20";

pub type ChaCha = ChaCha20Rng;

pub fn rng(seed: u64) -> ChaCha {
    ChaCha20Rng::seed_from_u64(seed)
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |_, _| gaussian(rng))
}

pub fn unit_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CVector {
    loop {
        let v: CVector = (0..n).map(|_| gaussian(rng)).collect();
        let r = norm(&v);
        if r > 1e-6 {
            return v.into_iter().map(|z| z / r).collect();
        }
    }
}

/// Haar-distributed unitary (Gram-Schmidt of a Ginibre matrix).
pub fn unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    loop {
        let g = ginibre(rng, n);
        let q = orthonormalize(&g.columns(), 1e-6);
        if q.len() == n {
            return ComplexMatrix::from_columns(n, &q);
        }
    }
}

/// `(G + G†)/2` for Ginibre `G`: generic, non-degenerate spectrum.
pub fn hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    ginibre(rng, n).hermitian_part()
}

/// Orthonormal projector of the given rank in a random basis.
pub fn projector<R: Rng + ?Sized>(rng: &mut R, n: usize, rank: usize) -> Projector {
    let u = unitary(rng, n);
    let basis: Vec<CVector> = (0..rank).map(|j| u.column(j)).collect();
    Projector::from_orthonormal(n, &basis)
}

/// `k` strictly ascending values in `[-3, 3]` with pairwise gaps of at least 0.1.
pub fn spectrum<R: Rng + ?Sized>(rng: &mut R, k: usize) -> Vec<f64> {
    loop {
        let mut v: Vec<f64> = (0..k).map(|_| rng.random_range(-3.0..3.0)).collect();
        v.sort_by(f64::total_cmp);
        if v.windows(2).all(|w| w[1] - w[0] >= 0.1) {
            return v;
        }
    }
}

/// Multiplicities `≥ 1` summing to `dim`, one per value.
pub fn multiplicities<R: Rng + ?Sized>(rng: &mut R, dim: usize, k: usize) -> Vec<usize> {
    assert!(k >= 1 && k <= dim);
    let mut m = vec![1; k];
    for _ in k..dim {
        let i = rng.random_range(0..k);
        m[i] += 1;
    }
    m
}

/// Observable with `k` distinct values in a Haar-random eigenbasis.
pub fn observable<R: Rng + ?Sized>(rng: &mut R, dim: usize, k: usize) -> Observable {
    let u = unitary(rng, dim);
    observable_in_basis(rng, &u, k)
}

/// Observable diagonal in the columns of `u`, with a random grouping of
/// columns into `k` eigenspaces.
pub fn observable_in_basis<R: Rng + ?Sized>(rng: &mut R, u: &ComplexMatrix, k: usize) -> Observable {
    let dim = u.rows();
    let values = spectrum(rng, k);
    let mult = multiplicities(rng, dim, k);
    let mut cols: Vec<usize> = (0..dim).collect();
    cols.shuffle(rng);
    let mut projectors = Vec::with_capacity(k);
    let mut start = 0;
    for &m in &mult {
        let basis: Vec<CVector> = cols[start..start + m].iter().map(|&j| u.column(j)).collect();
        projectors.push(Projector::from_orthonormal(dim, &basis));
        start += m;
    }
    Observable::from_spectral(values, projectors).expect("orthonormal eigenbasis")
}

/// Observable diagonal in the standard basis.
pub fn diagonal_observable<R: Rng + ?Sized>(rng: &mut R, dim: usize, k: usize) -> Observable {
    observable_in_basis(rng, &ComplexMatrix::identity(dim), k)
}

/// Uniform point on the unit sphere in ℝ³.
pub fn axis<R: Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    loop {
        let v: [f64; 3] = [rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal)];
        let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if r > 1e-6 {
            return [v[0] / r, v[1] / r, v[2] / r];
        }
    }
}

/// Full-rank density matrix `GG†/Tr(GG†)`.
pub fn density<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DensityMatrix {
    let g = ginibre(rng, n);
    let m = &g * &g.adjoint();
    let t = m.trace().re;
    DensityMatrix::new(m.scale(1.0 / t).hermitian_part()).expect("positive by construction")
}

/// Random boolean mask with every cell set with probability `p`.
pub fn mask<R: Rng + ?Sized>(rng: &mut R, cells: usize, p: f64) -> Vec<bool> {
    (0..cells).map(|_| rng.random_bool(p)).collect()
}
