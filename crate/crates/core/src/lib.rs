//! Simulation core for entangling lattice fermions into cluster states.
//!
//! The pipeline, in dependency order:
//!
//! 1. [`units`] — physical constants, recoil-energy scale, validated
//!    experiment configurations.
//! 2. [`bloch`] — plane-wave band structure of the base lattice and
//!    gauge-fixed localized (Wannier) orbitals.
//! 3. [`lattice_params`] — ab initio Hubbard parameters: onsite energies,
//!    hoppings, interactions, superlattice couplings, tilt; resonance
//!    root-finding and perturbative Ising diagnostics.
//! 4. [`fock`] — fermionic occupation bases blocked by (N↑, N↓) and sparse
//!    many-body operator assembly.
//! 5. [`dynamics`] — initial-state preparation and adaptive Krylov time
//!    evolution under piecewise-constant schedules, including the unit-cell
//!    shift.
//! 6. [`observables`] — qubit embedding, graph-state targets, raw /
//!    phase-optimized / post-selected fidelities, diagonal observables.
//!
//! All energies are in recoil units E_r, lengths in lattice constants a,
//! times in milliseconds.

pub mod bloch;
pub mod dynamics;
pub mod error;
pub mod fock;
pub mod lattice_params;
pub mod observables;
pub mod units;

pub use bloch::{build_wannier, solve_bands, BandStructure, WannierSet};
pub use dynamics::{
    evolve, evolve_with, prepare_plus_product, shift_unit_cells, KrylovOptions, ManyBodyState,
    Schedule, ScheduleSegment, ShiftKind,
};
pub use error::{Error, Result};
pub use fock::{
    assemble_diagonal_observable, assemble_hamiltonian, build_sector, AssemblyOptions,
    DiagonalKind, SectorBasis, SparseOperator,
};
pub use lattice_params::{
    ab_initio_params, bond_residual, compute_base_params, compute_superlattice_params,
    find_resonance, perturbative_ising, HubbardParams, PerturbativeDiagnostics, ResonanceKnob,
};
pub use observables::{
    build_target, computational_amplitudes, expectation, fidelity_optimized, fidelity_raw,
    post_selected_fidelity, rescale_per_cell, PostSelected, QubitRegister, TargetKind,
};
pub use units::{recoil_energy, PhysicalConfig, RecoilEnergy};
