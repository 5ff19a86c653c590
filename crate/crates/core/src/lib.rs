//! Polynomials whose filled Julia sets approximate a finite union of Jordan domains.
//!
//! Pipeline: [`geometry`] describes the target `E`, [`equilibrium`] computes its
//! harmonic measure and Robin constant, [`sampler`] places equidistributed roots,
//! [`dynamics`] builds and iterates `P(z) = e^{n(γ-δ)} z ∏(ζ_i - z)`, and
//! [`metrics`] measures the Hausdorff distances between `E` and `K(P)`.
//! [`pipeline`] strings these together for the command-line tool.

pub mod dynamics;
pub mod equilibrium;
pub mod error;
pub mod geometry;
pub mod io;
pub mod metrics;
pub mod pipeline;
pub mod quadrature;
pub mod sampler;

pub use error::{Error, Result};
