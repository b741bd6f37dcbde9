//! Numerical core for master equations built from Janus-faced operator pairs
//! `[F, G†] = 1`.
//!
//! The density matrix is carried as a vector in the doubled (thermo field)
//! space `H ⊗ H*`, so the master equation
//!
//! ```text
//! dρ/dt = -iG(Fρ - ρF + F†ρ - ρF†) + κ/2 (2FρF† - F†Fρ - ρF†F)
//! ```
//!
//! becomes a linear ODE `d|ρ⟩/dt = L|ρ⟩` with a sparse generator `L`.
//!
//! Layout:
//! - [`fock`]: truncated Fock spaces, sparse complex operators, ladder operators.
//! - [`janus`]: the four concrete `(F, {G_i†})` realizations and contract checks.
//! - [`tfd`]: `|I⟩`, vectorization, the tilde map and Liouvillian assembly.
//! - [`evolution`]: adaptive Runge-Kutta propagation and a dense `expm` oracle.
//! - [`steady`]: charge sectors, null-space steady states, eigen-relation residuals.
//! - [`reference`]: analytic pair-coherent, squeezed and cat states, fidelity.
//!
//! The crate is `no_std` (it needs `alloc`); enable the `std` feature to get
//! `std::error::Error` on [`Error`].

#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

mod banded;
mod dense;
mod error;
mod math;

pub mod evolution;
pub mod fock;
pub mod janus;
pub mod reference;
pub mod steady;
pub mod tfd;

pub use error::{Error, Result};
pub use num_complex::Complex64;

pub use evolution::{
    evolve, evolve_with, expm_oracle, short_term_state, verify_g_eigenstate, EigenEstimate,
    EvolveOptions, GEigenReport, Observables, Trajectory,
};
pub use fock::{FockSpace, LadderKind, SparseOperator, StateVector};
pub use janus::{build_pair, commutator_residual, JanusConfig, JanusKind, JanusRealization};
pub use reference::{fidelity, ReferenceKind, ReferenceState};
pub use steady::{
    eigen_residuals, sector_basis, steady_state, EigenResiduals, NullSpaceMethod, Parity, Sector,
    SteadyStateResult,
};
pub use tfd::{
    build_liouvillian, identity_vector, DissipatorOrdering, Liouvillian, VectorizedState,
};
