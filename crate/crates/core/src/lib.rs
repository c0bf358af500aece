//! Best k-sparse least squares for overdetermined systems `Ax = y`.
//!
//! When the columns of `A` are mutually orthogonal the best k-sparse solution
//! has a closed form: rank the columns by the score `(AᵀA)⁻¹ (Aᵀy)²`, keep the
//! top `k` entries of the least-squares solution `A†y` and zero the rest. This
//! crate provides that fast solver ([`selector`]), an exhaustive oracle over
//! all k-subsets ([`oracle`]), and numeric checks of the structural facts that
//! make the fast solver exact ([`diagnostics`]).
//!
//! All indices are 0-based. Supports are always stored in ascending order.

pub mod campaign;
pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod io;
pub mod linalg;
pub mod oracle;
pub mod probgen;
pub mod selector;

pub use error::{Error, Result};
pub use linalg::{DenseMatrix, GramMatrix, SupportSet};
pub use selector::{ScoreSelection, SolveMethod, SparseSolution};
