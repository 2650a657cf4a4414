//! Truncated master equation: generator assembly, probability evolution and
//! exact trajectory sampling.

mod evolve;
mod generator;
mod ssa;

use thiserror::Error;

pub use evolve::{
    evolve, evolve_through, max_stable_dt, Evolution, ProbabilityDistribution, STABILITY_LIMIT,
};
pub use generator::{build_generator, GeneratorMatrix};
pub use ssa::{ssa_ensemble, ssa_on_grid, ssa_replicate, ssa_sample, Trajectory};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MasterError {
    #[error("lattice arity {got} does not match the {expected} species of the scheme")]
    Arity { expected: usize, got: usize },
    #[error("lattice too small to contain any interaction's step")]
    LatticeTooSmall,
    #[error("state {0:?} lies outside the lattice")]
    OutsideLattice(Vec<u64>),
    #[error("not a probability distribution: {0}")]
    NotADistribution(String),
    #[error("step {dt} violates the stability guard (largest admissible step {max_dt})")]
    Unstable { dt: f64, max_dt: f64 },
    #[error("time step must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("invalid time {0}")]
    InvalidTime(f64),
}
