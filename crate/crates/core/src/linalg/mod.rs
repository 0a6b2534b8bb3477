//! Dense complex linear algebra and the projection lattice.

mod eigen;
mod lattice;
mod matrix;

pub use eigen::{eigh, matrix_exp_hermitian, EigenDecomposition};
pub use lattice::{complement, join, join_all, meet, orthonormalize, projector_from_basis, Projector};
pub use matrix::{inner, norm, CVector, ComplexMatrix};
pub use num_complex::Complex64;
