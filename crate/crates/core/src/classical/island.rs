//! Grid measurements of islands and resonance chains.
//!
//! A grid cell belongs to the island when the orbit of its centre stays in a
//! `J`-window of width `2pi` around the island centre for the whole escape
//! horizon. Cells are visited by flood fill from the centre, so only the
//! connected component of the island is measured.

use std::collections::{HashMap, HashSet};
use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::map::{find_periodic_orbit, monodromy_trace, wrap_centered, Mat2, MapParams, PhaseState};
use crate::error::{Error, Result};

pub const DEFAULT_ESCAPE_HORIZON: usize = 10_000;

/// Cells of a flood-filled island.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IslandCells {
    pub center: PhaseState,
    pub grid_step: f64,
    /// Integer offsets `(i, j)` of the cell centres from `center`.
    pub cells: Vec<(i64, i64)>,
    pub area: f64,
}

impl IslandCells {
    pub fn point(&self, cell: (i64, i64)) -> PhaseState {
        cell_point(self.center, self.grid_step, cell)
    }

    /// `(theta_min, theta_max, j_min, j_max)` of the cell centres, with
    /// angles measured relative to the centre (not wrapped).
    pub fn bounding_box(&self) -> (f64, f64, f64, f64) {
        let h = self.grid_step;
        let (mut a, mut b, mut c, mut d) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for &(i, j) in &self.cells {
            let t = self.center.theta + i as f64 * h;
            let y = self.center.action_j + j as f64 * h;
            a = a.min(t - 0.5 * h);
            b = b.max(t + 0.5 * h);
            c = c.min(y - 0.5 * h);
            d = d.max(y + 0.5 * h);
        }
        (a, b, c, d)
    }
}

fn cell_point(center: PhaseState, h: f64, (i, j): (i64, i64)) -> PhaseState {
    PhaseState::new(center.theta + i as f64 * h, center.action_j + j as f64 * h)
}

fn stays_bounded(params: &MapParams, start: PhaseState, center_j: f64, horizon: usize) -> bool {
    let mut s = start;
    for _ in 0..horizon {
        s = params.step(s);
        if (s.action_j - center_j).abs() >= PI {
            return false;
        }
    }
    true
}

/// Breadth-first flood fill from the origin cell. Each layer of the frontier
/// is classified in parallel; the visiting order is fixed so results do not
/// depend on how the work is split.
fn flood_fill<F>(max_radius: i64, accept: F) -> Vec<(i64, i64)>
where
    F: Fn((i64, i64)) -> bool + Sync,
{
    let mut seen: HashSet<(i64, i64)> = HashSet::new();
    let mut inside = Vec::new();
    let mut frontier = vec![(0i64, 0i64)];
    seen.insert((0, 0));
    while !frontier.is_empty() {
        let flags: Vec<bool> = frontier.par_iter().map(|&c| accept(c)).collect();
        let mut next = Vec::new();
        for (&c, ok) in frontier.iter().zip(flags) {
            if !ok {
                continue;
            }
            inside.push(c);
            for d in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
                let n = (c.0 + d.0, c.1 + d.1);
                if n.0.abs() > max_radius || n.1.abs() > max_radius {
                    continue;
                }
                if seen.insert(n) {
                    next.push(n);
                }
            }
        }
        next.sort_unstable();
        frontier = next;
    }
    inside.sort_unstable();
    inside
}

/// Flood-filled island around `center`.
pub fn island_cells(
    params: &MapParams,
    center: PhaseState,
    grid_step: f64,
    escape_horizon: usize,
) -> Result<IslandCells> {
    if !(grid_step > 0.0) {
        return Err(Error::InvalidArgument(format!("grid step {grid_step}")));
    }
    if !stays_bounded(params, center, center.action_j, escape_horizon) {
        return Err(Error::NotInIsland {
            theta: center.theta,
            j: center.action_j,
            steps: escape_horizon,
        });
    }
    let max_radius = (PI / grid_step).floor() as i64;
    let cells = flood_fill(max_radius, |c| {
        stays_bounded(params, cell_point(center, grid_step, c), center.action_j, escape_horizon)
    });
    let area = cells.len() as f64 * grid_step * grid_step;
    Ok(IslandCells { center, grid_step, cells, area })
}

/// Area of the island containing `center`.
pub fn island_area(
    params: &MapParams,
    center: PhaseState,
    grid_step: f64,
    escape_horizon: usize,
) -> Result<f64> {
    Ok(island_cells(params, center, grid_step, escape_horizon)?.area)
}

/// Linear map taking the tangent dynamics at an elliptic point to a rotation.
///
/// For symplectic `M = [[a, b], [c, d]]` with `|a + d| < 2` the quadratic form
/// `Q = [[c, (d - a)/2], [(d - a)/2, -b]]` (up to sign) is invariant; its
/// Cholesky factor gives coordinates in which orbits circle the point.
pub fn normal_frame(m: &Mat2) -> Option<Mat2> {
    let (a, b, c, d) = (m[0][0], m[0][1], m[1][0], m[1][1]);
    let sgn = if c > 0.0 { 1.0 } else { -1.0 };
    let q00 = sgn * c;
    let q01 = sgn * 0.5 * (d - a);
    let q11 = -sgn * b;
    if q00 <= 0.0 || q00 * q11 - q01 * q01 <= 0.0 {
        return None;
    }
    // Q = L L^T, y = L^T x
    let l00 = q00.sqrt();
    let l10 = q01 / l00;
    let l11 = (q11 - l10 * l10).sqrt();
    Some([[l00, l10], [0.0, l11]])
}

/// Mean rotation (turns per step) of the orbit of `start` around the elliptic
/// point `center`, or `None` when the orbit leaves the `J`-window.
pub fn rotation_number(
    params: &MapParams,
    center: PhaseState,
    start: PhaseState,
    steps: usize,
) -> Option<f64> {
    let frame = normal_frame(&params.tangent(center)).unwrap_or([[1.0, 0.0], [0.0, 1.0]]);
    let angle = |s: PhaseState| {
        let dx = wrap_centered(s.theta - center.theta);
        let dy = s.action_j - center.action_j;
        let y0 = frame[0][0] * dx + frame[0][1] * dy;
        let y1 = frame[1][0] * dx + frame[1][1] * dy;
        y1.atan2(y0)
    };
    let mut s = start;
    let mut prev = angle(s);
    let mut total = 0.0;
    for _ in 0..steps {
        s = params.step(s);
        if (s.action_j - center.action_j).abs() >= PI {
            return None;
        }
        let a = angle(s);
        total += wrap_centered(a - prev);
        prev = a;
    }
    Some(total.abs() / (TAU * steps as f64))
}

/// Areas inside and outside an `r:s` chain plus its stable periodic orbit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChainMeasurement {
    pub r: u32,
    pub s: u32,
    /// Area enclosed by the outer separatrix of the chain.
    pub s_plus: f64,
    /// Area enclosed by the inner separatrix of the chain.
    pub s_minus: f64,
    pub periodic_point: PhaseState,
    pub monodromy_trace: f64,
}

/// Measures the separatrix areas of an `r:s` chain around `center`.
///
/// `interior_seed` must lie on a torus between the centre and the chain,
/// `exterior_seed` on a torus outside it. Cells are classified by their
/// rotation number about the centre: the inner region rotates faster (or
/// slower) than `s/r`, cells locked to `s/r` belong to the chain.
pub fn measure_chain(
    params: &MapParams,
    center: PhaseState,
    r: u32,
    s: u32,
    interior_seed: PhaseState,
    exterior_seed: PhaseState,
    grid_step: f64,
    steps: usize,
) -> Result<ChainMeasurement> {
    if r == 0 || steps == 0 {
        return Err(Error::InvalidArgument("chain order and step count must be positive".into()));
    }
    let target = f64::from(s) / f64::from(r);
    let rot = |p: PhaseState| rotation_number(params, center, p, steps);
    let (rin, rout) = match (rot(interior_seed), rot(exterior_seed)) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::InconsistentInputs("a chain seed escapes the island".into())),
    };
    if (rin - target) * (rout - target) >= 0.0 {
        return Err(Error::InconsistentInputs(format!(
            "seeds do not bracket the {r}:{s} chain: rotation {rin} and {rout}"
        )));
    }
    let side = (rin - target).signum();
    let tol = 4.0 / steps as f64;

    let max_radius = (PI / grid_step).floor() as i64;
    let mut memo: HashMap<(i64, i64), Option<f64>> = HashMap::new();
    let mut classify = |cells: &[(i64, i64)]| -> Vec<Option<f64>> {
        let missing: Vec<(i64, i64)> = cells.iter().copied().filter(|c| !memo.contains_key(c)).collect();
        let vals: Vec<Option<f64>> = missing
            .par_iter()
            .map(|&c| rot(cell_point(center, grid_step, c)))
            .collect();
        for (c, v) in missing.into_iter().zip(vals) {
            memo.insert(c, v);
        }
        cells.iter().map(|c| memo[c]).collect()
    };

    // flood fill with memoised classification, layer by layer
    let mut fill = |accept: &dyn Fn(f64) -> bool| -> Vec<(i64, i64)> {
        let mut seen = HashSet::from([(0i64, 0i64)]);
        let mut frontier = vec![(0i64, 0i64)];
        let mut inside = Vec::new();
        while !frontier.is_empty() {
            let vals = classify(&frontier);
            let mut next = Vec::new();
            for (&c, v) in frontier.iter().zip(vals) {
                let ok = c == (0, 0) || v.is_some_and(&accept);
                if !ok {
                    continue;
                }
                inside.push(c);
                for d in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
                    let n = (c.0 + d.0, c.1 + d.1);
                    if n.0.abs() <= max_radius && n.1.abs() <= max_radius && seen.insert(n) {
                        next.push(n);
                    }
                }
            }
            next.sort_unstable();
            frontier = next;
        }
        inside.sort_unstable();
        inside
    };

    let inner = fill(&|x| side * (x - target) > tol);
    let outer = fill(&|x| side * (x - target) > -tol);
    let cell_area = grid_step * grid_step;
    let s_minus = inner.len() as f64 * cell_area;
    let s_plus = outer.len() as f64 * cell_area;

    // stable periodic orbit: Newton from the locked cells closest to closing
    let inner_set: HashSet<_> = inner.iter().copied().collect();
    let mut locked: Vec<(f64, PhaseState)> = outer
        .iter()
        .filter(|c| !inner_set.contains(c))
        .filter(|c| memo[*c].is_some_and(|x| (x - target).abs() <= tol))
        .map(|&c| {
            let p = cell_point(center, grid_step, c);
            let mut q = p;
            for _ in 0..r {
                q = params.step(q);
            }
            let (dt, dj) = super::map::torus_delta(p, q);
            (dt.hypot(dj), p)
        })
        .collect();
    locked.sort_by(|a, b| a.0.total_cmp(&b.0));
    for (_, seed) in locked.iter().take(40) {
        if let Ok(orbit) = find_periodic_orbit(params, *seed, r as usize, 1e-10) {
            if let Ok(trace) = monodromy_trace(params, orbit, r as usize) {
                let around = rotation_number(params, center, orbit, 64 * r as usize);
                if trace.abs() < 2.0 && around.is_some_and(|x| (x - target).abs() < 1e-3) {
                    return Ok(ChainMeasurement {
                        r,
                        s,
                        s_plus,
                        s_minus,
                        periodic_point: orbit,
                        monodromy_trace: trace,
                    });
                }
            }
        }
    }
    Err(Error::NotPeriodic { period: r as usize, residual: f64::NAN })
}

/// Seeds on either side of the `r:s` chain, found by scanning outwards from
/// `center` along the angle direction (both ways) in steps of `step`.
pub fn find_chain_seeds(
    params: &MapParams,
    center: PhaseState,
    r: u32,
    s: u32,
    step: f64,
    steps: usize,
) -> Result<(PhaseState, PhaseState)> {
    if r == 0 || !(step > 0.0) || steps == 0 {
        return Err(Error::InvalidArgument("chain seeds need r > 0, step > 0 and steps > 0".into()));
    }
    let target = f64::from(s) / f64::from(r);
    let tol = 4.0 / steps as f64;
    for dir in [1.0, -1.0] {
        let mut inner: Option<(PhaseState, f64)> = None;
        let mut k = 1;
        while f64::from(k) * step < PI {
            let p = PhaseState::new(center.theta + dir * f64::from(k) * step, center.action_j);
            let Some(rot) = rotation_number(params, center, p, steps) else { break };
            let d = rot - target;
            match inner {
                Some((seed, d0)) if d * d0 < 0.0 && d.abs() > tol => return Ok((seed, p)),
                _ if d.abs() > tol && inner.is_none_or(|(_, d0)| d * d0 > 0.0) => inner = Some((p, d)),
                _ => {}
            }
            k += 1;
        }
    }
    Err(Error::InconsistentInputs(format!("no {r}:{s} chain found around the island centre")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::map::{find_fixed_point, mat_mul, MapSign};

    #[test]
    fn normal_frame_conjugates_to_rotation() {
        let p = MapParams::new(2.5, 1.0, MapSign::Minus).unwrap();
        let (fp, trace, _) = find_fixed_point(&p).unwrap();
        let m = p.tangent(fp);
        let t = normal_frame(&m).unwrap();
        // T M T^-1 must be orthogonal
        let det = t[0][0] * t[1][1] - t[0][1] * t[1][0];
        let tinv = [[t[1][1] / det, -t[0][1] / det], [-t[1][0] / det, t[0][0] / det]];
        let r = mat_mul(&mat_mul(&t, &m), &tinv);
        let rtr = mat_mul(&[[r[0][0], r[1][0]], [r[0][1], r[1][1]]], &r);
        assert!((rtr[0][0] - 1.0).abs() < 1e-12 && rtr[0][1].abs() < 1e-12);
        assert!((r[0][0] + r[1][1] - trace).abs() < 1e-12);
    }

    #[test]
    fn rotation_near_centre_matches_trace() {
        let p = MapParams::new(2.5, 1.0, MapSign::Minus).unwrap();
        let (fp, trace, _) = find_fixed_point(&p).unwrap();
        let near = PhaseState::new(fp.theta + 1e-4, 0.0);
        let rho = rotation_number(&p, fp, near, 4000).unwrap();
        assert!((rho - (trace / 2.0).acos() / TAU).abs() < 1e-3);
    }

    #[test]
    fn no_island_below_drift() {
        let p = MapParams::new(0.69, 0.7, MapSign::Minus).unwrap();
        let r = island_area(&p, PhaseState::new(PI / 2.0, 0.0), 0.05, 2000);
        assert!(matches!(r, Err(Error::NotInIsland { .. })));
    }
}
