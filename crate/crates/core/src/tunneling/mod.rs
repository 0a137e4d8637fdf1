//! Semiclassical decay theories: Wannier-Stark WKB and resonance-assisted
//! tunneling along a single ladder.

pub mod curves;
pub mod ladder;
pub mod wkb;

pub use ladder::{
    build_ladder, continuum_rate, degeneracy_points, geometric_gap, ladder_eigensolve, ladder_length, rat_rate,
    rate_from_xi0, semiclassical_diagonal, unperturbed_diagonal, xi0_explicit, DegeneracyPoint, LadderSpec,
    LadderSpectrum, N0Choice,
};
pub use wkb::{wkb_energy, wkb_rate, EnergyChoice};
pub use curves::{theory_curve, theory_point, TheoryInputs};
