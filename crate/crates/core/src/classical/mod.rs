//! Classical dynamics: the map, the Wannier-Stark pendulum, island
//! measurements and resonance-chain fits.

pub mod island;
pub mod map;
pub mod pendulum;
pub mod resonance;

pub use island::{
    find_chain_seeds, island_area, island_cells, measure_chain, normal_frame, rotation_number, ChainMeasurement, IslandCells,
    DEFAULT_ESCAPE_HORIZON,
};
pub use map::{
    find_fixed_point, find_periodic_orbit, fixed_points, iterate_map, monodromy, monodromy_trace,
    phase_portrait, torus_delta, wrap_angle, wrap_centered, Mat2, MapParams, MapSign, PhaseState,
};
pub use pendulum::{
    ws_action_of_energy, ws_energy, ws_energy_of_action, ws_fixed_points, ws_frequency_at_energy,
    ws_separatrix, ws_small_oscillation_frequency, ws_wkb_action, SeparatrixData, WSPendulum, DEFAULT_QUAD_TOL,
};
pub use resonance::{fit_resonance_params, forward_resonance_observables, ResonanceChain};
