//! Exact-diagonalization laboratory for closed-system quantum quenches.
//!
//! The crate builds spin-1/2 chain Hamiltonians (local, Haar-scrambled and
//! Gaussian-ensemble), diagonalizes them densely, and measures what a
//! quench from a product state does:
//!
//! - dephasing of expectation values and the relaxation times of fast,
//!   slow and local observables ([`dynamics`], [`observables`]);
//! - the occupied density of states and its Gaussian character, together
//!   with the energy width, Boltzmann time and Heisenberg time
//!   ([`spectral`]);
//! - entanglement growth across bipartitions, area-law versus volume-law
//!   scaling and the correlation light cone ([`entanglement`]).
//!
//! [`experiment`] wires the pieces into declarative, seeded, reproducible
//! pipelines that write CSV and JSON outputs. The `quenchlab` binary is a
//! thin front end over it.
//!
//! Conventions: ħ = k_B = 1, entropies in nats, site `j` is bit `j` of a
//! basis index (site 0 is the least significant bit), and the local basis
//! state `(1, 0)` is spin up (σ^z = +1).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod entanglement;
pub mod error;
pub mod experiment;
pub mod hamiltonian;
pub mod hilbert;
pub mod linalg;
pub mod observables;
pub mod seed;
pub mod spectral;

pub use error::{Error, Result};
pub use linalg::{CMat, C64};

/// Commonly used types and constructors.
pub mod prelude {
    pub use crate::dynamics::{
        diagonal_ensemble, evolve_spectral, expectation_series, krylov_evolve, TimeGrid, TimeSeries,
    };
    pub use crate::entanglement::{
        entropy, entropy_scan, growth_fit, light_cone, prefix_cuts, EntanglementProfile,
    };
    pub use crate::hamiltonian::{
        build_goe, build_local_chain, scramble, ChainParams, HermitianOperator, Locality,
    };
    pub use crate::hilbert::{
        apply, partial_trace, product_state, HilbertSpec, Operator, PureState, SiteRegion,
    };
    pub use crate::observables::{
        local_observable, relaxation_time, slow_observable, typical_observable, Axis,
        ObservableMatrix,
    };
    pub use crate::spectral::{
        diagonalize, dos_fit, occupied_spectrum, timescales, EigenSystem, SpectralData, Timescales,
    };
    pub use crate::{Error, Result, C64};
}
