//! Simulation and decoding of the triangular 6.6.6 color code with flagged
//! syndrome extraction.

pub mod blossom;
pub mod circuit;
pub mod decoder;
pub mod graph;
pub mod harness;
pub mod lattice;
pub mod matching;
pub mod pauli;
pub mod sim;

use num_traits::Float;

/// Real scalar used for edge weights and path lengths.
pub trait Weight: Float + std::fmt::Debug + Send + Sync + 'static {}

impl<T: Float + std::fmt::Debug + Send + Sync + 'static> Weight for T {}

/// Default real scalar.
pub type Real = f64;
/// Exact rational used for edge-weight polynomial coefficients.
pub type Rational = num_rational::Ratio<i64>;
