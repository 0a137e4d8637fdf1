//! Wavepackets on a momentum grid and their split-step propagation.
//!
//! A state at fixed quasimomentum is a vector of amplitudes for momenta
//! `hbar (l + beta)`, `l = offset .. offset + len`. Each kick applies the
//! kinetic phase in momentum, the kick in angle (through an FFT) and the drift
//! as a shift of the grid contents plus a quasimomentum relabelling.

use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

use super::floquet::drift_shift;
use super::planck::PlanckSpec;
use crate::classical::{MapParams, PhaseState};
use crate::error::{Error, Result};
use crate::numerics::linear_fit;

/// Momentum grid: `size` points starting at integer momentum `offset`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentumGrid {
    pub size: usize,
    pub offset: i64,
}

impl MomentumGrid {
    /// Grid of `size` points with action `center_j` at the given fraction of
    /// the index range (0 = bottom, 1 = top).
    pub fn around(center_j: f64, hbar: f64, size: usize, fraction: f64) -> Self {
        let l = (center_j / hbar).round() as i64;
        Self { size, offset: l - (fraction * size as f64).round() as i64 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WavepacketState {
    pub hbar: f64,
    pub beta: f64,
    pub offset: i64,
    pub amplitudes: Vec<C64>,
}

impl WavepacketState {
    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn momentum(&self, i: usize) -> f64 {
        self.hbar * ((self.offset + i as i64) as f64 + self.beta)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) {
        let s = self.norm_sqr().sqrt();
        if s > 0.0 {
            self.amplitudes.iter_mut().for_each(|c| *c /= s);
        }
    }

    pub fn mean_momentum(&self) -> f64 {
        let w = self.norm_sqr();
        self.amplitudes.iter().enumerate().map(|(i, c)| c.norm_sqr() * self.momentum(i)).sum::<f64>() / w
    }

    /// `<self|other>` over the common momenta; zero if the quasimomenta differ.
    pub fn overlap(&self, other: &WavepacketState) -> C64 {
        if (self.beta - other.beta).abs() > 1e-9 {
            return C64::new(0.0, 0.0);
        }
        let lo = self.offset.max(other.offset);
        let hi = (self.offset + self.len() as i64).min(other.offset + other.len() as i64);
        (lo..hi)
            .map(|l| self.amplitudes[(l - self.offset) as usize].conj() * other.amplitudes[(l - other.offset) as usize])
            .sum()
    }
}

/// Momentum and angle widths of a coherent state with aspect ratio `squeeze`
/// (`sigma_j / sigma_theta = squeeze`, `sigma_j sigma_theta = hbar / 2`).
pub fn coherent_widths(hbar: f64, squeeze: f64) -> (f64, f64) {
    ((0.5 * hbar * squeeze).sqrt(), (0.5 * hbar / squeeze).sqrt())
}

/// Coherent-state amplitudes for momenta `l` in `range`, unnormalised.
pub(crate) fn coherent_amplitude(center: PhaseState, hbar: f64, beta: f64, sigma_j: f64, l: i64) -> C64 {
    let x = l as f64 + beta;
    let d = hbar * x - center.action_j;
    C64::from_polar((-d * d / (4.0 * sigma_j * sigma_j)).exp(), -center.theta * x)
}

/// Normalised coherent state centred on `center`.
pub fn coherent_state(center: PhaseState, p: &PlanckSpec, grid: MomentumGrid, squeeze: f64) -> Result<WavepacketState> {
    let idx = (center.action_j / p.hbar - p.beta).round() as i64 - grid.offset;
    if idx < 0 || idx >= grid.size as i64 {
        return Err(Error::OutOfGrid);
    }
    let (sigma_j, _) = coherent_widths(p.hbar, squeeze);
    let mut psi = WavepacketState {
        hbar: p.hbar,
        beta: p.beta,
        offset: grid.offset,
        amplitudes: (0..grid.size)
            .map(|i| coherent_amplitude(center, p.hbar, p.beta, sigma_j, grid.offset + i as i64))
            .collect(),
    };
    psi.normalize();
    Ok(psi)
}

/// Probability in the momentum window `[lo, hi]`.
pub fn window_probability(psi: &WavepacketState, j_window: (f64, f64)) -> f64 {
    psi.amplitudes
        .iter()
        .enumerate()
        .filter(|(i, _)| {
            let j = psi.momentum(*i);
            j >= j_window.0 && j <= j_window.1
        })
        .map(|(_, c)| c.norm_sqr())
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub t: usize,
    pub norm: f64,
    pub window_prob: f64,
}

#[derive(Debug, Clone)]
pub struct PropagateOptions {
    pub j_window: (f64, f64),
    /// Times at which the full state is kept.
    pub snapshots: Vec<usize>,
    /// Number of grid points at each end watched for overflow.
    pub boundary_points: usize,
    pub overflow_threshold: f64,
}

impl PropagateOptions {
    pub fn new(j_window: (f64, f64), grid_size: usize) -> Self {
        Self { j_window, snapshots: Vec::new(), boundary_points: (grid_size / 64).max(1), overflow_threshold: 1e-8 }
    }
}

#[derive(Debug, Clone)]
pub struct Propagation {
    pub probes: Vec<Probe>,
    pub snapshots: Vec<(usize, WavepacketState)>,
    pub final_state: WavepacketState,
}

struct SplitStep {
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    kick: Vec<C64>,
    scratch: Vec<C64>,
}

impl SplitStep {
    fn new(params: &MapParams, hbar: f64, n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let x = params.kick / hbar;
        let kick = (0..n)
            .map(|k| {
                let th = std::f64::consts::TAU * k as f64 / n as f64;
                C64::from_polar(1.0 / n as f64, -x * th.cos())
            })
            .collect();
        let scratch = vec![C64::new(0.0, 0.0); fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len())];
        Self { fwd, inv, kick, scratch }
    }

    fn step(&mut self, params: &MapParams, p: &PlanckSpec, psi: &mut WavepacketState) {
        let s = params.sign.as_f64();
        let (hbar, beta, offset) = (psi.hbar, psi.beta, psi.offset);
        for (i, c) in psi.amplitudes.iter_mut().enumerate() {
            let x = (offset + i as i64) as f64 + beta;
            *c *= C64::from_polar(1.0, -s * hbar * x * x / 2.0);
        }
        // amplitudes to angle samples: psi(theta_k) = sum_i c_i e^{i i theta_k}
        self.inv.process_with_scratch(&mut psi.amplitudes, &mut self.scratch);
        psi.amplitudes.iter_mut().zip(&self.kick).for_each(|(c, k)| *c *= k);
        self.fwd.process_with_scratch(&mut psi.amplitudes, &mut self.scratch);
        let (j, beta_out) = drift_shift(params, p, beta);
        let n = psi.amplitudes.len() as i64;
        psi.amplitudes.rotate_right(j.rem_euclid(n) as usize);
        psi.beta = beta_out;
    }
}

/// Propagates `psi` for `steps` kicks, recording a probe after every kick.
pub fn propagate(
    psi: &WavepacketState,
    params: &MapParams,
    p: &PlanckSpec,
    steps: usize,
    opts: &PropagateOptions,
) -> Result<Propagation> {
    let n = psi.len();
    let mut state = psi.clone();
    let mut stepper = SplitStep::new(params, p.hbar, n);
    let b = opts.boundary_points.min(n / 2);
    let mut probes = Vec::with_capacity(steps + 1);
    let mut snapshots = Vec::new();
    let probe = |t: usize, s: &WavepacketState| Probe {
        t,
        norm: s.norm_sqr(),
        window_prob: window_probability(s, opts.j_window),
    };
    probes.push(probe(0, &state));
    if opts.snapshots.contains(&0) {
        snapshots.push((0, state.clone()));
    }
    for t in 1..=steps {
        stepper.step(params, p, &mut state);
        let edge: f64 = state.amplitudes[..b].iter().chain(&state.amplitudes[n - b..]).map(|c| c.norm_sqr()).sum();
        if edge > opts.overflow_threshold {
            return Err(Error::GridOverflow { step: t, probability: edge });
        }
        probes.push(probe(t, &state));
        if opts.snapshots.contains(&t) {
            snapshots.push((t, state.clone()));
        }
    }
    Ok(Propagation { probes, snapshots, final_state: state })
}

/// Least-squares decay rate of `ln p_t` for `t >= t_min`.
/// Returns `(rate, rms residual of the log fit)`.
pub fn fit_exponential_tail(series: &[(usize, f64)], t_min: usize) -> Result<(f64, f64)> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &(t, v) in series.iter().filter(|(t, _)| *t >= t_min) {
        if !(v > 0.0) {
            return Err(Error::NonPositiveProbability { t, value: v });
        }
        xs.push(t as f64);
        ys.push(v.ln());
    }
    if xs.len() < 2 {
        return Err(Error::InvalidArgument(format!("fewer than two samples after t = {t_min}")));
    }
    let (slope, _, rms) = linear_fit(&xs, &ys);
    Ok((-slope, rms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::MapSign;
    use crate::quantum::planck::commensurate;

    fn packet(p: &PlanckSpec, j: f64) -> WavepacketState {
        coherent_state(PhaseState::new(1.0, j), p, MomentumGrid::around(j, p.hbar, 1024, 0.5), 1.0).unwrap()
    }

    #[test]
    fn coherent_state_moments() {
        let p = commensurate(1.0, 0.25, 16).unwrap();
        let psi = packet(&p, 3.0);
        assert!((psi.norm_sqr() - 1.0).abs() < 1e-12);
        assert!((psi.mean_momentum() - 3.0).abs() < p.hbar);
        let bad = coherent_state(PhaseState::new(0.0, 1e4), &p, MomentumGrid { size: 64, offset: 0 }, 1.0);
        assert_eq!(bad, Err(Error::OutOfGrid));
    }

    #[test]
    fn free_evolution_keeps_distribution() {
        let params = MapParams::new(0.0, 0.0, MapSign::Minus).unwrap();
        let p = PlanckSpec { hbar: 0.25, m: 0, n: 1, beta: 0.0 };
        let psi = packet(&p, 0.0);
        let out = propagate(&psi, &params, &p, 50, &PropagateOptions::new((-1.0, 1.0), psi.len())).unwrap();
        for (a, b) in psi.amplitudes.iter().zip(&out.final_state.amplitudes) {
            assert!((a.norm_sqr() - b.norm_sqr()).abs() < 1e-13);
        }
    }

    #[test]
    fn drift_translates_rigidly() {
        let params = MapParams::new(0.0, 0.6, MapSign::Plus).unwrap();
        let p = commensurate(0.6, 0.2, 16).unwrap();
        let psi = packet(&p, 0.0);
        let out = propagate(&psi, &params, &p, 7, &PropagateOptions::new((-1.0, 1.0), psi.len())).unwrap();
        let f = &out.final_state;
        assert!((f.mean_momentum() - psi.mean_momentum() - 7.0 * 0.6).abs() < 1e-10);
        // minus branch moves the other way
        let params = MapParams::new(0.0, 0.6, MapSign::Minus).unwrap();
        let out = propagate(&psi, &params, &p, 7, &PropagateOptions::new((-1.0, 1.0), psi.len())).unwrap();
        assert!((out.final_state.mean_momentum() - psi.mean_momentum() + 7.0 * 0.6).abs() < 1e-10);
    }

    #[test]
    fn fractional_drift_relabels_sector() {
        let params = MapParams::new(0.0, 1.0, MapSign::Plus).unwrap();
        let p = commensurate(1.0, 1.0 / 8.2, 16).unwrap();
        let psi = packet(&p, 0.0);
        let out = propagate(&psi, &params, &p, 5, &PropagateOptions::new((-1.0, 1.0), psi.len())).unwrap();
        assert!(out.final_state.beta.abs() < 1e-12);
        assert!((out.final_state.mean_momentum() - psi.mean_momentum() - 5.0).abs() < 1e-9);
    }

    #[test]
    fn kicked_norm_is_conserved() {
        let params = MapParams::new(2.5, 1.0, MapSign::Minus).unwrap();
        let p = commensurate(1.0, 0.25, 16).unwrap();
        let psi = coherent_state(PhaseState::new(0.41, 0.0), &p, MomentumGrid::around(0.0, 0.25, 4096, 0.875), 1.0).unwrap();
        let out = propagate(&psi, &params, &p, 300, &PropagateOptions::new((-1.0, 1.0), psi.len())).unwrap();
        assert!((out.probes.last().unwrap().norm - 1.0).abs() < 1e-12);
        let total = window_probability(&out.final_state, (-1e9, 1e9));
        assert!((total - 1.0).abs() < 1e-12);
        let lo = window_probability(&out.final_state, (-1e9, 0.3));
        let hi = window_probability(&out.final_state, (0.3 + 1e-9, 1e9));
        assert!((lo + hi - total).abs() < 1e-13);
    }

    #[test]
    fn overflow_is_reported() {
        let params = MapParams::new(0.0, 1.0, MapSign::Minus).unwrap();
        let p = commensurate(1.0, 0.25, 16).unwrap();
        let psi = packet(&p, 0.0);
        let r = propagate(&psi, &params, &p, 200, &PropagateOptions::new((-1.0, 1.0), psi.len()));
        assert!(matches!(r, Err(Error::GridOverflow { .. })));
    }

    #[test]
    fn tail_fits() {
        let s: Vec<(usize, f64)> = (0..200).map(|t| (t, (-0.01 * t as f64).exp())).collect();
        let (rate, res) = fit_exponential_tail(&s, 0).unwrap();
        assert!((rate - 0.01).abs() < 1e-12 && res < 1e-12);
        let s: Vec<(usize, f64)> = (0..2000)
            .map(|t| (t, 0.7 * (-0.2 * t as f64).exp() + 0.3 * (-0.002 * t as f64).exp()))
            .collect();
        let (rate, _) = fit_exponential_tail(&s, 200).unwrap();
        assert!((rate - 0.002).abs() < 0.01 * 0.002);
        let bad = [(0, 1.0), (1, 0.0)];
        assert!(matches!(fit_exponential_tail(&bad, 0), Err(Error::NonPositiveProbability { t: 1, .. })));
    }
}
