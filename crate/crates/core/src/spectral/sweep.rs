//! Decay rates of one island state over a grid of `1/hbar`.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::complex::{scan_rho, ScaledResonance, DEFAULT_RHO_GRID};
use super::eigen::{dense_eigendecompose, eigendecompose};
use super::stabilize::{
    island_overlap, minimal_island_state, select_by_overlap, stabilize_from_seed, IslandWindow, StabilizeOptions,
    StabilizedState, DEFAULT_STABILIZATION_TOL, ISLAND_OVERLAP_MIN,
};
use crate::classical::{find_fixed_point, island_cells, MapParams, MapSign, PhaseState, DEFAULT_ESCAPE_HORIZON};
use crate::curve::{evaluate_grid, DecayCurve, Method, PointValue};
use crate::error::{Error, Result};
use crate::quantum::{
    build_complex_scaled_periodic, build_truncated, coherent_state, commensurate_with_bound, fit_exponential_tail,
    propagate, MomentumGrid, PlanckSpec, PropagateOptions, WavepacketState, DEFAULT_N_MAX, DEFAULT_SNAP_BOUND,
};

/// Which state of the island a sweep follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selection {
    /// Smallest rate among states with island overlap above one half.
    MinimalIsland,
    /// Largest overlap with a coherent state at the island centre.
    CenterProbe,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    /// Basis sizes for the truncated method; the first is diagonalised densely.
    pub nu_sequence: Vec<usize>,
    pub stabilization_tol: f64,
    pub rho_grid: Vec<f64>,
    /// Lattice half-size for complex scaling.
    pub rho_nu: usize,
    pub rho_tol: f64,
    pub wavepacket_log2: u32,
    pub wavepacket_steps: usize,
    pub squeeze: f64,
    pub n_max: u32,
    pub snap_bound: f64,
    /// Cell size of the classical island measurement.
    pub island_grid_step: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            nu_sequence: vec![256, 512],
            stabilization_tol: DEFAULT_STABILIZATION_TOL,
            rho_grid: DEFAULT_RHO_GRID.to_vec(),
            rho_nu: 256,
            rho_tol: 1e-6,
            wavepacket_log2: 14,
            wavepacket_steps: 2000,
            squeeze: 1.0,
            n_max: DEFAULT_N_MAX,
            snap_bound: DEFAULT_SNAP_BOUND,
            island_grid_step: 0.02,
        }
    }
}

/// Map parameters with the measured island around the stable fixed point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepSetup {
    pub params: MapParams,
    pub center: PhaseState,
    pub window: IslandWindow,
    pub island_area: f64,
    pub opts: SweepOptions,
}

impl SweepSetup {
    pub fn new(params: MapParams, opts: SweepOptions) -> Result<Self> {
        let (center, _, stable) = find_fixed_point(&params)?;
        if !stable {
            return Err(Error::NotInIsland { theta: center.theta, j: center.action_j, steps: 0 });
        }
        let cells = island_cells(&params, center, opts.island_grid_step, DEFAULT_ESCAPE_HORIZON)?;
        Ok(Self { params, center, window: IslandWindow::from_cells(&cells), island_area: cells.area, opts })
    }

    pub fn planck(&self, inv_hbar: f64) -> Result<PlanckSpec> {
        if !(inv_hbar > 0.0) {
            return Err(Error::InvalidArgument(format!("1/hbar = {inv_hbar}")));
        }
        commensurate_with_bound(self.params.drift, 1.0 / inv_hbar, self.opts.n_max, self.opts.snap_bound)
    }

    fn probe(&self, p: &PlanckSpec, nu: usize) -> Result<WavepacketState> {
        let grid = MomentumGrid { size: 2 * nu + 1, offset: -(nu as i64) };
        coherent_state(self.center, p, grid, self.opts.squeeze)
    }

    fn stabilize_options(&self, min_overlap: f64) -> StabilizeOptions {
        StabilizeOptions {
            tol: self.opts.stabilization_tol,
            min_overlap: Some(min_overlap),
            window: Some(self.window),
        }
    }
}

/// Stabilized truncated-basis states whose seed vectors overlap the island by
/// at least `min_overlap`.
pub fn island_states(setup: &SweepSetup, p: &PlanckSpec, min_overlap: f64) -> Result<Vec<StabilizedState>> {
    let nus = &setup.opts.nu_sequence;
    if nus.len() < 2 {
        return Err(Error::InvalidArgument("need at least two basis sizes".into()));
    }
    let seed = eigendecompose(&build_truncated(&setup.params, p, nus[0])?)?;
    stabilize_from_seed(&setup.params, p, &seed, &nus[1..], &setup.stabilize_options(min_overlap))
}

fn select(setup: &SweepSetup, p: &PlanckSpec, states: &[StabilizedState], selection: Selection) -> Result<StabilizedState> {
    match selection {
        Selection::MinimalIsland => {
            minimal_island_state(states, ISLAND_OVERLAP_MIN).cloned().ok_or(Error::EmptyCandidates)
        }
        Selection::CenterProbe => {
            let nu = states.first().ok_or(Error::EmptyCandidates)?.nu;
            select_by_overlap(states, &setup.probe(p, nu)?)
        }
    }
}

fn truncated_point(setup: &SweepSetup, p: &PlanckSpec, selection: Selection) -> Result<(f64, f64, f64, f64)> {
    let min_overlap = match selection {
        Selection::MinimalIsland => ISLAND_OVERLAP_MIN,
        Selection::CenterProbe => 0.05,
    };
    let states = island_states(setup, p, min_overlap)?;
    let s = select(setup, p, &states, selection)?;
    Ok((s.gamma, s.w, s.nu as f64, s.island_overlap))
}

/// Unscaled eigenvectors of the rho-stable resonances, taken at the largest
/// `rho` of each (the mildest scaling).
pub fn resonance_states(
    params: &MapParams,
    p: &PlanckSpec,
    resonances: &[ScaledResonance],
    nu: usize,
) -> Result<Vec<(ScaledResonance, WavepacketState)>> {
    let mut by_rho: BTreeMap<u64, Vec<&ScaledResonance>> = BTreeMap::new();
    for r in resonances {
        let rho = r.rhos.iter().copied().fold(f64::MIN, f64::max);
        by_rho.entry(rho.to_bits()).or_default().push(r);
    }
    let sigma = match params.sign {
        MapSign::Plus => 1,
        MapSign::Minus => -1,
    };
    let mut out = Vec::new();
    for (bits, group) in by_rho {
        let rho = f64::from_bits(bits);
        let m = build_complex_scaled_periodic(params, p, rho, nu)?;
        let (zs, vecs) = dense_eigendecompose(&m)?;
        for r in group {
            let k = (0..zs.len())
                .min_by(|&a, &b| (zs[a] - r.z).norm().total_cmp(&(zs[b] - r.z).norm()))
                .ok_or(Error::EmptyCandidates)?;
            let amps: Vec<C64> = vecs[k]
                .iter()
                .enumerate()
                .map(|(i, c)| c * rho.powi(-sigma * (i as i32 - nu as i32)))
                .collect();
            let mut psi = WavepacketState { hbar: p.hbar, beta: p.beta, offset: -(nu as i64), amplitudes: amps };
            psi.normalize();
            out.push((r.clone(), psi));
        }
    }
    Ok(out)
}

fn complex_scaling_point(setup: &SweepSetup, p: &PlanckSpec, selection: Selection) -> Result<(f64, f64, f64, f64)> {
    let nu = setup.opts.rho_nu;
    let scan = scan_rho(&setup.params, p, &setup.opts.rho_grid, nu, setup.opts.rho_tol)?;
    let states = resonance_states(&setup.params, p, &scan.resonances, nu)?;
    let chosen = match selection {
        Selection::MinimalIsland => states
            .iter()
            .map(|(r, v)| (r, island_overlap(v, &setup.window)))
            .filter(|(_, o)| *o > ISLAND_OVERLAP_MIN)
            .min_by(|a, b| a.0.gamma.total_cmp(&b.0.gamma)),
        Selection::CenterProbe => {
            let probe = setup.probe(p, nu)?;
            states
                .iter()
                .map(|(r, v)| (r, v, probe.overlap(v).norm_sqr()))
                .max_by(|a, b| a.2.total_cmp(&b.2).then(b.0.gamma.total_cmp(&a.0.gamma)))
                .map(|(r, v, _)| (r, island_overlap(v, &setup.window)))
        }
    };
    let (r, overlap) = chosen.ok_or(Error::EmptyCandidates)?;
    let rho = r.rhos.iter().copied().fold(f64::MAX, f64::min);
    Ok((r.gamma, r.w, rho, overlap))
}

/// Wavepacket estimate: a coherent state at the island centre is propagated
/// and the tail of the window probability fitted. The probability decays at
/// four times the per-kick rate.
pub fn wavepacket_rate(setup: &SweepSetup, p: &PlanckSpec) -> Result<(f64, f64)> {
    let size = 1usize << setup.opts.wavepacket_log2;
    let fraction = match setup.params.sign {
        MapSign::Minus => 0.875,
        MapSign::Plus => 0.125,
    };
    let grid = MomentumGrid::around(setup.center.action_j, p.hbar, size, fraction);
    let psi = coherent_state(setup.center, p, grid, setup.opts.squeeze)?;
    let steps = setup.opts.wavepacket_steps;
    let opts = PropagateOptions::new(setup.window.j_range, size);
    let run = propagate(&psi, &setup.params, p, steps, &opts)?;
    let series: Vec<(usize, f64)> = run.probes.iter().map(|pr| (pr.t, pr.window_prob)).collect();
    let (rate, rms) = fit_exponential_tail(&series, steps / 2)?;
    Ok((rate / 4.0, rms))
}

/// One numerical method at one Planck constant.
pub fn decay_point(setup: &SweepSetup, p: &PlanckSpec, method: Method, selection: Selection) -> Result<PointValue> {
    let v = |(gamma, w, nu_or_rho, overlap)| PointValue { gamma, w, nu_or_rho, overlap };
    match method {
        Method::Truncated => truncated_point(setup, p, selection).map(v),
        Method::ComplexScaling => complex_scaling_point(setup, p, selection).map(v),
        Method::Wavepacket => {
            let (g, _) = wavepacket_rate(setup, p)?;
            Ok(v((g, f64::NAN, (1u64 << setup.opts.wavepacket_log2) as f64, f64::NAN)))
        }
        other => Err(Error::InvalidArgument(format!("`{other}` is not a numerical method"))),
    }
}

/// Decay curve of one numerical method. Failures are recorded per point.
pub fn sweep_decay(setup: &SweepSetup, inv_hbar_grid: &[f64], method: Method, selection: Selection) -> DecayCurve {
    evaluate_grid(inv_hbar_grid, |x| setup.planck(x), method, |p| decay_point(setup, p, method, selection))
}
