//! Theory curves over a `1/hbar` grid, in the same row format as the numerics.

use serde::{Deserialize, Serialize};

use super::ladder::{
    build_ladder, continuum_rate, ladder_eigensolve, rat_rate, semiclassical_diagonal, unperturbed_diagonal, N0Choice,
};
use super::wkb::{wkb_rate, EnergyChoice};
use crate::classical::{MapParams, ResonanceChain, WSPendulum};
use crate::curve::{evaluate_grid, DecayCurve, Method, PointValue};
use crate::error::{Error, Result};
use crate::quantum::{commensurate_with_bound, PlanckSpec, DEFAULT_N_MAX, DEFAULT_SNAP_BOUND};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryInputs {
    pub params: MapParams,
    /// Needed by the ladder methods only.
    pub chain: Option<ResonanceChain>,
    pub island_area: f64,
    pub n0: N0Choice,
    pub n_max: u32,
    pub snap_bound: f64,
}

impl TheoryInputs {
    pub fn new(params: MapParams, chain: Option<ResonanceChain>, island_area: f64) -> Self {
        Self { params, chain, island_area, n0: N0Choice::Nearest, n_max: DEFAULT_N_MAX, snap_bound: DEFAULT_SNAP_BOUND }
    }
}

/// `(gamma, ladder length or NaN)` at the snapped Planck constant.
pub fn theory_point(inputs: &TheoryInputs, p: &PlanckSpec, method: Method) -> Result<(f64, f64)> {
    let hbar = p.hbar;
    let pendulum = WSPendulum::from_map(&inputs.params);
    match method {
        Method::WkbBottom => Ok((wkb_rate(&pendulum, hbar, EnergyChoice::WellBottom)?, f64::NAN)),
        Method::WkbGround => Ok((wkb_rate(&pendulum, hbar, EnergyChoice::HarmonicGround)?, f64::NAN)),
        Method::RatUnperturbed | Method::RatPerturbed | Method::RatSemiclassical | Method::RatContinuum => {
            let chain = inputs
                .chain
                .ok_or_else(|| Error::InvalidArgument("ladder methods need a resonance chain".into()))?;
            let spec = build_ladder(&chain, hbar, inputs.island_area, inputs.n0)?;
            let length = spec.length as f64;
            let gamma = match method {
                Method::RatContinuum => continuum_rate(&spec)?.1,
                Method::RatUnperturbed => rat_rate(&ladder_eigensolve(&unperturbed_diagonal(&spec), 0.0)?, &spec, 0)?,
                Method::RatPerturbed => {
                    rat_rate(&ladder_eigensolve(&unperturbed_diagonal(&spec), chain.coupling)?, &spec, 0)?
                }
                // energies read off the tori, used as they are
                _ => rat_rate(&ladder_eigensolve(&semiclassical_diagonal(&spec, &pendulum)?, 0.0)?, &spec, 0)?,
            };
            Ok((gamma, length))
        }
        _ => Err(Error::InvalidArgument(format!("{method} is not a theory method"))),
    }
}

/// Evaluates a theory method on every grid point; failing points are
/// recorded and the rest kept.
pub fn theory_curve(inputs: &TheoryInputs, inv_hbar_grid: &[f64], method: Method) -> DecayCurve {
    let snap = |x: f64| commensurate_with_bound(inputs.params.drift, 1.0 / x, inputs.n_max, inputs.snap_bound);
    evaluate_grid(inv_hbar_grid, snap, method, |p| {
        let (gamma, length) = theory_point(inputs, p, method)?;
        Ok(PointValue { gamma, w: f64::NAN, nu_or_rho: length, overlap: f64::NAN })
    })
}
