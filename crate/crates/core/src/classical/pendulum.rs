//! The Wannier-Stark pendulum `H = J^2/2 - a*theta + k*cos(theta)`.
//!
//! `a_eps` and `k_eps` already contain the small parameter, so `k_eps` equals
//! the map kick and `a_eps` the drift. The potential is multivalued on the
//! circle; all geometry below is done on the line, on the branch where the
//! stable point lies in `[0, 2pi)`.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::map::{wrap_angle, MapParams, PhaseState};
use crate::error::{Error, Result};
use crate::numerics::{brent, integrate_turning};

pub const DEFAULT_QUAD_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WSPendulum {
    pub a_eps: f64,
    pub k_eps: f64,
}

/// Separatrix geometry. Angles are given on the line (see module docs).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparatrixData {
    pub unstable_point: f64,
    pub stable_point: f64,
    pub enclosed_area: f64,
    /// Far wall of the well at separatrix energy, and the barrier top.
    pub loop_ends: (f64, f64),
    /// Well bottom `A` and exit point `B` of the forbidden path at bottom energy.
    pub turning_points: (f64, f64),
}

impl WSPendulum {
    pub fn new(a_eps: f64, k_eps: f64) -> Self {
        Self { a_eps, k_eps }
    }

    /// Pendulum attached to the period-1 island of `params`.
    pub fn from_map(params: &MapParams) -> Self {
        Self { a_eps: params.drift, k_eps: params.kick }
    }

    /// `eps * V(theta)` evaluated on the line.
    pub fn potential(&self, theta: f64) -> f64 {
        -self.a_eps * theta + self.k_eps * theta.cos()
    }

    #[cfg(test)]
    fn potential_slope(&self, theta: f64) -> f64 {
        -self.a_eps - self.k_eps * theta.sin()
    }

    fn has_island(&self) -> Result<()> {
        if self.a_eps.abs() < self.k_eps.abs() {
            Ok(())
        } else {
            Err(Error::NoIsland { a_eps: self.a_eps, k_eps: self.k_eps })
        }
    }

    /// Stable and barrier points on the line. The barrier is the lower of the
    /// two maxima adjacent to the well.
    fn line_points(&self) -> Result<(f64, f64)> {
        self.has_island()?;
        let k = self.k_eps.abs();
        let x = (self.a_eps / k).asin();
        let stable = PI + x;
        let barrier = if self.a_eps >= 0.0 { TAU - x } else { -x };
        if self.k_eps > 0.0 {
            Ok((stable, barrier))
        } else {
            // V with k < 0 is V with |k| shifted by pi
            Ok((stable - PI, barrier - PI))
        }
    }

    /// Direction from the well towards the barrier, +1 or -1.
    fn barrier_dir(&self) -> Result<f64> {
        let (s, b) = self.line_points()?;
        Ok((b - s).signum())
    }

    pub fn bottom_energy(&self) -> Result<f64> {
        Ok(self.potential(self.line_points()?.0))
    }

    pub fn separatrix_energy(&self) -> Result<f64> {
        Ok(self.potential(self.line_points()?.1))
    }

    /// Solves `V(theta) = energy` on the segment `[from, to]`, where
    /// `V - energy` changes sign (or vanishes at an end).
    fn solve_level(&self, energy: f64, from: f64, to: f64) -> Result<f64> {
        brent(|t| self.potential(t) - energy, from, to, 1e-15)
    }

    /// Turning points of the bounded motion at `energy`: (near wall, barrier-side wall).
    fn well_turning_points(&self, energy: f64) -> Result<(f64, f64)> {
        let (s, b) = self.line_points()?;
        let dir = self.barrier_dir()?;
        let e0 = self.potential(s);
        let esep = self.potential(b);
        if energy < e0 || energy > esep {
            return Err(Error::EnergyOutOfRange { energy, lo: e0, hi: esep });
        }
        let inner = self.solve_level(energy, s, b)?;
        let outer = self.solve_level(energy, b - dir * TAU, s)?;
        Ok((outer, inner))
    }
}

/// Energy `J^2/2 + eps*V(theta)` with `theta` taken in `[0, 2pi)`.
///
/// The potential is multivalued on the circle, so the value jumps by
/// `2*pi*a_eps` across `theta = 0`; only differences within one branch are
/// meaningful.
pub fn ws_energy(state: PhaseState, p: &WSPendulum) -> f64 {
    0.5 * state.action_j * state.action_j + p.potential(wrap_angle(state.theta))
}

/// Stable and unstable fixed points, as angles in `[0, 2pi)`.
pub fn ws_fixed_points(p: &WSPendulum) -> Result<(f64, f64)> {
    let (s, b) = p.line_points()?;
    Ok((wrap_angle(s), wrap_angle(b)))
}

/// Angular frequency of small oscillations, `(k^2 - a^2)^(1/4)`.
pub fn ws_small_oscillation_frequency(p: &WSPendulum) -> Result<f64> {
    p.has_island()?;
    Ok((p.k_eps * p.k_eps - p.a_eps * p.a_eps).powf(0.25))
}

pub fn ws_separatrix(p: &WSPendulum, quadrature_tol: f64) -> Result<SeparatrixData> {
    let (s, b) = p.line_points()?;
    let dir = p.barrier_dir()?;
    let esep = p.potential(b);
    let far = p.solve_level(esep, b - dir * TAU, s)?;
    let half = integrate_turning(
        |t| (2.0 * (esep - p.potential(t))).max(0.0).sqrt(),
        far.min(b),
        far.max(b),
        quadrature_tol,
    )?;
    let e0 = p.potential(s);
    let exit = p.solve_level(e0, b, s + dir * TAU)?;
    Ok(SeparatrixData {
        unstable_point: b,
        stable_point: s,
        enclosed_area: 2.0 * half,
        loop_ends: (far, b),
        turning_points: (s, exit),
    })
}

/// Imaginary action `S(A,B)` across the barrier at `energy`.
pub fn ws_wkb_action(p: &WSPendulum, energy: f64, quadrature_tol: f64) -> Result<f64> {
    let (s, b) = p.line_points()?;
    let dir = p.barrier_dir()?;
    let e0 = p.potential(s);
    let esep = p.potential(b);
    if energy < e0 || energy > esep {
        return Err(Error::EnergyOutOfRange { energy, lo: e0, hi: esep });
    }
    if energy == esep {
        return Ok(0.0);
    }
    let a = p.solve_level(energy, s, b)?;
    let bb = p.solve_level(energy, b, s + dir * TAU)?;
    integrate_turning(
        |t| (2.0 * (p.potential(t) - energy)).max(0.0).sqrt(),
        a.min(bb),
        a.max(bb),
        quadrature_tol,
    )
}

/// Action `(1/2pi) * closed integral of J dtheta` of the bounded orbit at `energy`.
pub fn ws_action_of_energy(p: &WSPendulum, energy: f64) -> Result<f64> {
    let (lo, hi) = p.well_turning_points(energy)?;
    let (lo, hi) = (lo.min(hi), lo.max(hi));
    if hi - lo == 0.0 {
        return Ok(0.0);
    }
    let half = integrate_turning(
        |t| (2.0 * (energy - p.potential(t))).max(0.0).sqrt(),
        lo,
        hi,
        DEFAULT_QUAD_TOL * 1e-2,
    )?;
    Ok(half / PI)
}

/// Angular frequency `dE/dI` of the bounded orbit at `energy`.
pub fn ws_frequency_at_energy(p: &WSPendulum, energy: f64) -> Result<f64> {
    let e0 = p.bottom_energy()?;
    if energy <= e0 {
        return ws_small_oscillation_frequency(p);
    }
    let (lo, hi) = p.well_turning_points(energy)?;
    let (lo, hi) = (lo.min(hi), lo.max(hi));
    // half period = integral of dtheta / |J|
    let half_period = integrate_turning(
        |t| 1.0 / (2.0 * (energy - p.potential(t))).max(1e-300).sqrt(),
        lo,
        hi,
        DEFAULT_QUAD_TOL,
    )?;
    Ok(PI / half_period)
}

/// Inverse of [`ws_action_of_energy`].
pub fn ws_energy_of_action(p: &WSPendulum, action: f64) -> Result<f64> {
    let e0 = p.bottom_energy()?;
    let esep = p.separatrix_energy()?;
    let imax = ws_action_of_energy(p, esep)?;
    if action < 0.0 || action > imax {
        return Err(Error::ActionOutsideIsland { action, max: imax });
    }
    if action == 0.0 {
        return Ok(e0);
    }
    brent(
        |e| ws_action_of_energy(p, e).map(|i| i - action).unwrap_or(f64::NAN),
        e0,
        esep,
        1e-14 * (esep - e0).abs().max(1e-300),
    )
}
