//! Stochastic one-step (birth–death) processes from chemistry-style
//! interaction schemes.
//!
//! A scheme such as
//!
//! ```text
//! X -> 2X @ lambda ~ gamma
//! X -> 0 @ beta
//! ```
//!
//! is turned into
//!
//! * exact and polynomial transition propensities, jump moments and
//!   Fokker–Planck drift/diffusion ([`stochastization`]),
//! * a truncated master-equation generator with RK4 evolution and an exact
//!   Gillespie sampler ([`master_equation`]),
//! * a Langevin equation integrated by Euler–Maruyama ([`langevin`]),
//! * the normal-ordered creation/annihilation Liouville operator
//!   ([`fock`], [`liouville`]), whose generator is checked against the
//!   combinatorial one in exact rational arithmetic.
//!
//! The `onestep` binary exposes the same pipeline on the command line; see
//! [`cli`].

pub mod cli;
pub mod ensemble;
pub mod export;
pub mod fock;
pub mod langevin;
pub mod lattice;
pub mod liouville;
pub mod master_equation;
pub mod rng;
pub mod scalar;
pub mod scheme;
pub mod stochastization;

pub use lattice::TruncatedLattice;
pub use scheme::{parse_scheme, InteractionScheme};
pub use stochastization::{Convention, StateVector};
