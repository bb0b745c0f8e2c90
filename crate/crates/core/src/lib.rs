//! Exact computations for the logarithmic monodromy pairing of a degenerating
//! Jacobian and its realizations, plus brute-force variegated extensions of
//! finite abelian groups.
//!
//! Curves come in as [`graph::TropicalCurve`]; everything downstream is exact
//! integer arithmetic.

pub mod cli;
pub mod extpan;
pub mod graph;
pub mod linalg;
pub mod pairing;
pub mod random;
pub mod realizations;
pub mod selftest;

pub use graph::{CycleBasis, MonoidVector, TropicalCurve};
pub use linalg::IntMatrix;
pub use pairing::{IntSymMatrix, PairingMatrix};
