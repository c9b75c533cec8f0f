//! Mixed-state swapping between two collectively coupled spin species.
//!
//! States live in the permutation-symmetric doubled basis ([`sector`]), the
//! coherent exchange reduces to tridiagonal chains ([`coherent`], [`pst`]) and
//! the open dynamics is a sparse superoperator ([`lindblad`]) integrated in
//! time ([`integrate`]). The [`oracle`] module checks all of this against a
//! brute-force simulation of a few spins.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coherent;
pub mod diagnostics;
pub mod eigen;
pub mod error;
pub mod integrate;
pub mod lindblad;
pub mod oracle;
pub mod pst;
pub mod sector;

pub use error::{Error, Result};
pub use sector::{DoubledIndex, Spin, SymmetricDensity};
