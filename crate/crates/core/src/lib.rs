//! Numerical toolkit for cut norms of Schur-multiplier cuts.
//!
//! The library computes exact and heuristic matrix norms (cut norm, (∞,1)-norm,
//! operator norm), applies triangular and banded cuts to matrices and step
//! graphons, and runs the growth experiments that measure how much a triangular
//! cut can inflate the cut norm.

pub mod approx;
pub mod exact;
pub mod experiments;
pub mod graphon;
pub mod io;
pub mod matrix;
pub mod report;

pub use exact::{CutWitness, NormBracket, SignWitness, DEFAULT_ENUM_CAP};
pub use matrix::Matrix;
