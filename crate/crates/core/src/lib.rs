//! Solution paths of variational regularization: a family of energies
//! combining a power of a Hilbert-norm fidelity with a power of an absolutely
//! one-homogeneous regularizer, solved along the regularization parameter
//! treated as time. The library tracks paths, detects critical times, checks
//! eigenvector structure, and builds nonlinear spectral decompositions with
//! reconstruction and filtering.

pub mod aproj;
pub mod eigen;
pub mod error;
pub mod linops;
pub mod path;
pub mod regularizers;
pub mod signal;
pub mod solver;

pub use aproj::AProjection;
pub use error::{Error, Result};
pub use linops::Operator;
pub use regularizers::{Membership, QuadMatrix, Regularizer};
pub use signal::{Shape, Signal};
pub use solver::{
    check_optimality, energy, fidelity_prox, solve, OptimalityBranch, OptimalityReport,
    SolveOptions, SolveResult, WarmStart,
};
