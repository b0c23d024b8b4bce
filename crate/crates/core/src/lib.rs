//! Time-dependent Dyson series evaluated through divided differences of the
//! exponential.
//!
//! A Hamiltonian `H(t) = H0 + V(t)` is given in a basis where `H0` is diagonal
//! and `V(t)` is a sum of generalized permutation operators whose entries are
//! sums of exponentials in time. Every order-`q` term of the Dyson series then
//! collapses to a single divided difference of `exp(-i t x)` over `q + 1`
//! nodes, which [`dd::exp_dd`] evaluates stably even for nearly coincident
//! nodes.

pub mod config;
pub mod dd;
pub mod dyson;
pub mod error;
pub mod model;
pub mod models;
pub mod oracles;
pub mod state;

pub use num_complex::Complex64 as C64;

pub use dd::{exp_dd, exp_dd_table, exp_dd_with_stats, DdInputs, DdTable, KernelStats};
pub use dyson::{evolve, evolve_ti, expand, Execution, Expansion, Path, Picture};
pub use error::{Error, Result};
pub use model::{BasisIndex, ExpSumFactor, FreeSpectrum, HamiltonianModel, PermutationMap, Term};
pub use state::StateVector;
