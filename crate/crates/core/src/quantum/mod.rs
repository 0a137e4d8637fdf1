//! Quantised evolution operators, wavepackets and Husimi densities.

pub mod band;
pub mod bessel;
pub mod floquet;
pub mod husimi;
pub mod planck;
pub mod wavepacket;

pub use band::{inverse_iteration, BandLu, BandMatrix, InverseIteration};
pub use floquet::{
    build_circle_operator, build_complex_scaled, build_complex_scaled_periodic, build_one_step, build_truncated, scaled_kick_strengths, truncate,
    FloquetMatrix, OperatorKind, MAX_SCALED_ENTRY,
};
pub use husimi::{angle_grid, husimi, linspace, HusimiField};
pub use planck::{commensurate, commensurate_with_bound, PlanckSpec, DEFAULT_N_MAX, DEFAULT_SNAP_BOUND};
pub use wavepacket::{
    coherent_state, fit_exponential_tail, propagate, window_probability, MomentumGrid, Probe, PropagateOptions,
    Propagation, WavepacketState,
};
