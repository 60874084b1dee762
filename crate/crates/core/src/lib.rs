//! Capacity of random walk ranges on Z³: Green's function, capacities,
//! walk generators, Monte Carlo estimators, asymptotic normalizers and the
//! deterministic path constructions used by the experiment suites.

pub mod asymptotics;
pub mod capacity;
pub mod constructions;
pub mod error;
pub mod expcli;
pub mod estimator;
pub mod green;
pub mod lattice;
pub mod rng;
pub mod walk;

pub use error::{CapError, Result};
pub use lattice::LatticePoint;
