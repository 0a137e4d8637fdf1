//! Resonance spectra of truncated and complex-scaled Floquet operators.

pub mod complex;
pub mod crossing;
pub mod eigen;
pub mod stabilize;
pub mod sweep;

pub use eigen::{
    decay_rates, dense_eigendecompose, dense_eigenvalues, dense_hash, eigendecompose, eigenvalues_only, gamma_of, quasienergy_of,
    spectrum_from_parts, FloquetSpectrum, Provenance,
    RESIDUAL_BOUND,
};
pub use stabilize::{
    continue_eigenpair, find_stabilized, island_overlap, mean_island_action, minimal_island_state, select_by_overlap,
    stabilize_from_seed, IslandWindow, StabilizeOptions, StabilizedState, DEFAULT_STABILIZATION_TOL,
    ISLAND_OVERLAP_MIN,
};
pub use crossing::{track_crossing, CrossingMarker, CrossingOptions, CrossingSlice, CrossingTrack, TrackedPoint};
pub use complex::{scan_rho, RhoScan, ScaledResonance, DEFAULT_RHO_GRID};
pub use sweep::{decay_point, island_states, resonance_states, sweep_decay, wavepacket_rate, Selection, SweepOptions, SweepSetup};
