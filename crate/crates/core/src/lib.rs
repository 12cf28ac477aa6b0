//! Exact symbolic toolkit for symplectic field theory: graded super-commutative,
//! Poisson and Weyl algebras over the rationals, model Hamiltonians, homology of
//! truncated differential algebras, grading formulas and the Hamilton–Jacobi
//! recursion for rational Gromov–Witten potentials.

pub mod error;
pub mod grading;
pub mod gw_recursion;
pub mod homology;
pub mod linalg;
pub mod model_file;
pub mod models;
pub mod sft_algebras;
pub mod superpoly;

pub use error::{Result, SftError};
pub use superpoly::{
    int, normalize, rat, Monomial, Parity, Scalar, SuperElement, TruncationPolicy, VarId, VarKind, VariableSpec,
    VariableTable,
};
