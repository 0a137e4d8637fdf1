//! Metastable states of truncated operators: eigenvalues that stay put as the
//! basis grows, their island overlap and selection against a probe state.
//!
//! The first basis size is diagonalised densely. Each candidate is then
//! continued to the larger bases by shift-invert iteration started from the
//! zero-padded eigenvector, which pairs it with the nearest eigenvalue of the
//! larger matrix.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::eigen::{eigendecompose, gamma_of, quasienergy_of, FloquetSpectrum};
use crate::classical::{wrap_centered, IslandCells, MapParams, Mat2, PhaseState};
use crate::error::{Error, Result};
use crate::quantum::{build_truncated, husimi, inverse_iteration, FloquetMatrix, PlanckSpec, WavepacketState};

pub const DEFAULT_STABILIZATION_TOL: f64 = 1e-6;
/// Minimum island overlap for the "minimal decay rate from the island".
pub const ISLAND_OVERLAP_MIN: f64 = 0.5;

/// Rectangle around an island: angles relative to the centre, actions absolute.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IslandWindow {
    pub center: PhaseState,
    pub dtheta: (f64, f64),
    pub j_range: (f64, f64),
}

impl IslandWindow {
    pub fn from_cells(cells: &IslandCells) -> Self {
        let (a, b, c, d) = cells.bounding_box();
        Self { center: cells.center, dtheta: (a - cells.center.theta, b - cells.center.theta), j_range: (c, d) }
    }

    pub fn contains(&self, theta: f64, j: f64) -> bool {
        let dt = wrap_centered(theta - self.center.theta);
        dt >= self.dtheta.0 && dt <= self.dtheta.1 && j >= self.j_range.0 && j <= self.j_range.1
    }
}

/// Fraction of the norm of `psi` whose Husimi density lies inside the window.
///
/// Translates of the island by `2 pi` in `J` belong to other quasimomentum
/// sectors and are not counted.
pub fn island_overlap(psi: &WavepacketState, window: &IslandWindow) -> f64 {
    const N: usize = 64;
    let norm = psi.norm_sqr();
    if norm == 0.0 {
        return 0.0;
    }
    let (t0, t1) = window.dtheta;
    let (j0, j1) = window.j_range;
    let dt = (t1 - t0) / N as f64;
    let dj = (j1 - j0) / N as f64;
    let thetas: Vec<f64> = (0..N).map(|i| window.center.theta + t0 + (i as f64 + 0.5) * dt).collect();
    let js: Vec<f64> = (0..N).map(|i| j0 + (i as f64 + 0.5) * dj).collect();
    let q = husimi(psi, &thetas, &js, 1.0);
    let mass: f64 = q.values.iter().flatten().sum::<f64>() * dt * dj;
    (mass / norm).min(1.0)
}

/// Husimi mean, over the window, of the harmonic action `|F x|^2 / (2 det F)`
/// about the island centre, with `F` the normal frame of the centre's tangent map.
///
/// For island states it grows with the excitation number, roughly by `hbar`
/// per quantum.
pub fn mean_island_action(psi: &WavepacketState, window: &IslandWindow, frame: &Mat2) -> f64 {
    const N: usize = 64;
    let (t0, t1) = window.dtheta;
    let (j0, j1) = window.j_range;
    let dt = (t1 - t0) / N as f64;
    let dj = (j1 - j0) / N as f64;
    let rel_t: Vec<f64> = (0..N).map(|i| t0 + (i as f64 + 0.5) * dt).collect();
    let thetas: Vec<f64> = rel_t.iter().map(|t| window.center.theta + t).collect();
    let js: Vec<f64> = (0..N).map(|i| j0 + (i as f64 + 0.5) * dj).collect();
    let q = husimi(psi, &thetas, &js, 1.0);
    let det = frame[0][0] * frame[1][1] - frame[0][1] * frame[1][0];
    let (mut acc, mut mass) = (0.0, 0.0);
    // q.values is indexed [j][theta]
    for (row, &j) in q.values.iter().zip(&js) {
        let x1 = j - window.center.action_j;
        for (&v, &x0) in row.iter().zip(&rel_t) {
            let y0 = frame[0][0] * x0 + frame[0][1] * x1;
            let y1 = frame[1][0] * x0 + frame[1][1] * x1;
            acc += v * (y0 * y0 + y1 * y1);
            mass += v;
        }
    }
    if mass == 0.0 {
        return f64::NAN;
    }
    acc / mass / (2.0 * det.abs())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StabilizedState {
    pub z: C64,
    pub gamma: f64,
    pub w: f64,
    pub vector: WavepacketState,
    /// Largest eigenvalue move over the basis sequence.
    pub drift_across_nu: f64,
    pub island_overlap: f64,
    pub nu: usize,
    pub steps_per_application: u32,
}

#[derive(Debug, Clone)]
pub struct StabilizeOptions {
    pub tol: f64,
    /// Only candidates whose seed eigenvector has at least this island
    /// overlap are continued (requires `window`).
    pub min_overlap: Option<f64>,
    pub window: Option<IslandWindow>,
}

impl Default for StabilizeOptions {
    fn default() -> Self {
        Self { tol: DEFAULT_STABILIZATION_TOL, min_overlap: None, window: None }
    }
}

fn pad(v: &[C64], from_nu: usize, to_nu: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); 2 * to_nu + 1];
    let off = to_nu - from_nu;
    out[off..off + v.len()].copy_from_slice(v);
    out
}

fn as_state(v: Vec<C64>, nu: usize, p: &PlanckSpec) -> WavepacketState {
    WavepacketState { hbar: p.hbar, beta: p.beta, offset: -(nu as i64), amplitudes: v }
}

/// Continues an eigenpair of a smaller truncation to `u`.
pub fn continue_eigenpair(u: &FloquetMatrix, z: C64, vector: &[C64], from_nu: usize) -> (C64, Vec<C64>, f64) {
    let start = pad(vector, from_nu, u.basis_size);
    let r = inverse_iteration(&u.band, z, &start, 1e-13, 60);
    (r.eigenvalue, r.vector, r.residual)
}

/// Stabilized subunitary eigenvalues over the increasing basis sizes.
pub fn find_stabilized(
    params: &MapParams,
    p: &PlanckSpec,
    nu_sequence: &[usize],
    opts: &StabilizeOptions,
) -> Result<Vec<StabilizedState>> {
    if nu_sequence.len() < 2 || nu_sequence.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("need at least two increasing basis sizes".into()));
    }
    let seed_nu = nu_sequence[0];
    let seed = eigendecompose(&build_truncated(params, p, seed_nu)?)?;
    stabilize_from_seed(params, p, &seed, &nu_sequence[1..], opts)
}

/// Same as [`find_stabilized`] with a precomputed seed spectrum.
pub fn stabilize_from_seed(
    params: &MapParams,
    p: &PlanckSpec,
    seed: &FloquetSpectrum,
    larger: &[usize],
    opts: &StabilizeOptions,
) -> Result<Vec<StabilizedState>> {
    let vecs = seed
        .eigenvectors
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("seed spectrum has no eigenvectors".into()))?;
    let seed_nu = seed.basis_size;
    let steps = seed.steps_per_application;
    let mut candidates: Vec<(C64, Vec<C64>, f64, usize, f64)> = seed
        .eigenvalues
        .par_iter()
        .zip(vecs.par_iter())
        .filter(|(z, _)| z.norm() < 1.0 - 1e-12)
        .filter_map(|(z, v)| {
            let overlap = opts.window.map(|w| island_overlap(&as_state(v.clone(), seed_nu, p), &w));
            match (opts.min_overlap, overlap) {
                (Some(min), Some(o)) if o < min => None,
                _ => Some((*z, v.clone(), 0.0, seed_nu, overlap.unwrap_or(f64::NAN))),
            }
        })
        .collect();
    for &nu in larger {
        let u = build_truncated(params, p, nu)?;
        candidates = candidates
            .into_par_iter()
            .filter_map(|(z, v, drift, from, ov)| {
                let (z2, v2, res) = continue_eigenpair(&u, z, &v, from);
                let d = (z2 - z).norm();
                (res < 1e-8 && d < opts.tol).then_some((z2, v2, drift.max(d), nu, ov))
            })
            .collect();
    }
    let mut out: Vec<StabilizedState> = candidates
        .into_par_iter()
        .filter(|(z, ..)| z.norm() < 1.0 - 1e-12)
        .map(|(z, v, drift, nu, ov)| {
            let vector = as_state(v, nu, p);
            let island_overlap = match opts.window {
                Some(w) => island_overlap(&vector, &w),
                None => ov,
            };
            StabilizedState {
                z,
                gamma: gamma_of(z, steps),
                w: quasienergy_of(z, steps),
                vector,
                drift_across_nu: drift,
                island_overlap,
                nu,
                steps_per_application: steps,
            }
        })
        .collect();
    // the same large-basis eigenvalue may be reached from two seeds
    out.sort_by(|a, b| b.z.norm().total_cmp(&a.z.norm()).then(a.z.arg().total_cmp(&b.z.arg())));
    out.dedup_by(|a, b| (a.z - b.z).norm() < 1e-12);
    Ok(out)
}

/// State with the largest `|<probe|vector>|^2`; ties go to the smaller rate.
pub fn select_by_overlap(states: &[StabilizedState], probe: &WavepacketState) -> Result<StabilizedState> {
    let score = |s: &StabilizedState| {
        let nv = s.vector.norm_sqr();
        let np = probe.norm_sqr();
        probe.overlap(&s.vector).norm_sqr() / (nv * np)
    };
    states
        .iter()
        .max_by(|a, b| score(a).total_cmp(&score(b)).then(b.gamma.total_cmp(&a.gamma)))
        .cloned()
        .ok_or(Error::EmptyCandidates)
}

/// Smallest rate among states with island overlap above the threshold.
pub fn minimal_island_state(states: &[StabilizedState], min_overlap: f64) -> Option<&StabilizedState> {
    states
        .iter()
        .filter(|s| s.island_overlap > min_overlap)
        .min_by(|a, b| a.gamma.total_cmp(&b.gamma))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::MapSign;
    use crate::quantum::commensurate;

    fn state(z: C64, amps: Vec<C64>) -> StabilizedState {
        StabilizedState {
            z,
            gamma: gamma_of(z, 1),
            w: 0.0,
            vector: WavepacketState { hbar: 0.25, beta: 0.0, offset: 0, amplitudes: amps },
            drift_across_nu: 0.0,
            island_overlap: 1.0,
            nu: 1,
            steps_per_application: 1,
        }
    }

    #[test]
    fn free_rotor_has_no_metastable_states() {
        let params = MapParams::new(0.0, 1.0, MapSign::Minus).unwrap();
        let p = commensurate(1.0, 0.25, 16).unwrap();
        let s = find_stabilized(&params, &p, &[40, 80], &StabilizeOptions::default()).unwrap();
        assert!(s.is_empty());
    }

    #[test]
    fn overlap_of_coherent_states() {
        let params = MapParams::new(2.5, 1.0, MapSign::Minus).unwrap();
        let (c, _, _) = crate::classical::find_fixed_point(&params).unwrap();
        let cells = crate::classical::island_cells(&params, c, 0.05, 500).unwrap();
        let win = IslandWindow::from_cells(&cells);
        let p = commensurate(1.0, 0.05, 16).unwrap();
        let grid = crate::quantum::MomentumGrid::around(0.0, p.hbar, 1024, 0.5);
        let inside = crate::quantum::coherent_state(c, &p, grid, 1.0).unwrap();
        assert!(island_overlap(&inside, &win) > 0.95);
        let shifted = PhaseState::new(c.theta, std::f64::consts::TAU);
        let copy = crate::quantum::coherent_state(shifted, &p, grid, 1.0).unwrap();
        assert!(island_overlap(&copy, &win) < 1e-6);
    }

    #[test]
    fn selection_by_overlap() {
        let a = state(C64::new(0.9, 0.0), vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        let b = state(C64::new(0.8, 0.0), vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)]);
        assert!(matches!(select_by_overlap(&[], &a.vector), Err(Error::EmptyCandidates)));
        assert_eq!(select_by_overlap(std::slice::from_ref(&a), &b.vector).unwrap().z, a.z);
        assert_eq!(select_by_overlap(&[a.clone(), b.clone()], &b.vector).unwrap().z, b.z);
        // equal overlaps: smaller rate wins
        let probe = WavepacketState { hbar: 0.25, beta: 0.0, offset: 0, amplitudes: vec![C64::new(1.0, 0.0); 2] };
        assert_eq!(select_by_overlap(&[b.clone(), a.clone()], &probe).unwrap().z, a.z);
    }
}
