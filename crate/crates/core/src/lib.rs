//! Integer index of a pair of almost-commuting selfadjoint operators.
//!
//! A pair `(A, B)` with small `‖[A, B]‖` is substituted into the Bott
//! projection of the plane. The resulting operator `Q(A, B)` is close to a
//! projection, and the number of eigenvalues above 1/2 of its compression to
//! the first `N` basis vectors (of both copies), minus `N`, is the index
//! `ω(A, B)`. It vanishes for commuting pairs and equals 1 for position and
//! momentum of the harmonic oscillator.
//!
//! Modules:
//! - [`linalg`]: dense complex matrices, Hermitian eigensolver, norms.
//! - [`operators`]: operator pairs and reference constructions.
//! - [`index`]: `Q(A, B)`, corner spectra and the index itself.
//! - [`bounds`]: randomized checks of the operator inequalities behind it.
//! - [`cli`]: the `omega-index` command line.
//! - [`report`]: serialized report documents.

pub mod bounds;
pub mod cli;
pub mod calibration;
pub mod error;
pub mod index;
pub mod linalg;
pub mod matrix_io;
pub mod operators;
pub mod report;
pub mod sampling;

pub use error::{OmegaError, Result};
pub use index::{build_q, omega, scale_admissible, Orientation, OmegaResult, QBuild, SpectralReport};
pub use linalg::{ComplexMatrix, HermitianEigen};
pub use num_complex::Complex64;
pub use operators::{OperatorPair, PairSpec, Perturbation, PerturbationKind, Target};
