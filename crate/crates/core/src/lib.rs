//! Joint observables for non-commuting quantum observables on
//! finite-dimensional Hilbert spaces.
//!
//! For observables `A`, `B` the joint observable assigns to a region `Q` of
//! the outcome plane the join, over rectangles `R₁×R₂ ⊆ Q`, of the meets
//! `A(R₁) ∧ B(R₂)`. It coincides with the usual product PVM when `A` and `B`
//! commute and is only sub-additive otherwise. On top of it the crate builds
//! a functional calculus `f(A,B)`, chain extraction of ordinary observables
//! such as `A∔B`, and the quantum operation of an unselected joint
//! measurement together with its ancilla realization.
//!
//! ```
//! use gpvm::{dot_plus, ComplexMatrix, GridRegion, JointObservable, Observable};
//!
//! let sx = Observable::from_matrix(&ComplexMatrix::pauli_x())?;
//! let sy = Observable::from_matrix(&ComplexMatrix::pauli_y())?;
//!
//! let j = JointObservable::new(sx.clone(), sy.clone())?;
//! let point = GridRegion::from_points(2, 2, &[(1, 1)])?;
//! assert_eq!(j.eval(&point)?.rank(), 0);
//!
//! let three = GridRegion::from_points(2, 2, &[(0, 0), (0, 1), (1, 1)])?;
//! assert_eq!(j.eval(&three)?.rank(), 2);
//!
//! let sum = dot_plus(&sx, &sy)?;
//! assert_eq!(sum.eigenvalues(), &[0.0]);
//! # Ok::<(), gpvm::Error>(())
//! ```

pub mod error;
pub mod expr;
pub mod files;
pub mod funcalc;
pub mod joint;
pub mod linalg;
pub mod measure;
pub mod observable;
pub mod random;
pub mod tolerance;
pub mod verify;

pub use error::{Error, Result};
pub use funcalc::{dot_plus, dot_times, extract_pvm, ChainOrder, GeneralizedObservable, ValueTable};
pub use joint::{GridPartition, GridRegion, JointObservable};
pub use linalg::{Complex64, ComplexMatrix, Projector};
pub use observable::{spectral_leq, LabeledObservable, Observable, OutcomePartition, ValueSet};
pub use measure::{build_channel, DensityMatrix, MeasurementChannel};
