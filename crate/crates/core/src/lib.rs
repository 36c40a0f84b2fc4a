//! Ising model with three competing interactions (nearest-neighbour,
//! prolonged next-nearest-neighbour and same-level nearest-neighbour) on the
//! order-3 triangular chandelier lattice.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`] couplings, temperature and Boltzmann weights;
//! * [`lattice`] the leveled lattice with its three pair classes;
//! * [`exact`] brute-force finite-volume Gibbs distributions used as an oracle
//!   for the recursion, plus Kolmogorov consistency fixtures;
//! * [`recurrence`] the boundary-field recursion, the operator on the four
//!   independent field coordinates and the reduced scalar map;
//! * [`roots`] quartic fixed-point equation, root solver, Descartes bounds and
//!   stability classes;
//! * [`phase`] parameter sweeps and orbits;
//! * [`cli`] the `chandelier` executable.

pub mod cli;
pub mod error;
pub mod exact;
pub mod lattice;
pub mod model;
pub(crate) mod numeric;
pub mod phase;
pub mod recurrence;
pub mod roots;

pub use error::{Error, Result};
pub use model::{BoltzmannWeights, CouplingParams};
