//! Husimi densities `Q(theta, J) = |<alpha|psi>|^2 / (2 pi hbar)`.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::wavepacket::{coherent_widths, WavepacketState};

/// Husimi values on a rectangular grid, `values[row][col]` with rows along
/// `j_grid` and columns along `theta_grid`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HusimiField {
    pub theta_grid: Vec<f64>,
    pub j_grid: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl HusimiField {
    /// Riemann sum of the field over uniform grids.
    pub fn integral(&self) -> f64 {
        let dt = spacing(&self.theta_grid);
        let dj = spacing(&self.j_grid);
        self.values.iter().flatten().sum::<f64>() * dt * dj
    }

    /// Grid point of the maximum, `(theta, J)`.
    pub fn argmax(&self) -> (f64, f64) {
        let mut best = (f64::MIN, 0, 0);
        for (r, row) in self.values.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                if v > best.0 {
                    best = (v, r, c);
                }
            }
        }
        (self.theta_grid[best.2], self.j_grid[best.1])
    }

    /// Pearson correlation of two fields on the same grid.
    pub fn correlation(&self, other: &HusimiField) -> f64 {
        let a: Vec<f64> = self.values.iter().flatten().copied().collect();
        let b: Vec<f64> = other.values.iter().flatten().copied().collect();
        let n = a.len() as f64;
        let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
        let cov: f64 = a.iter().zip(&b).map(|(x, y)| (x - ma) * (y - mb)).sum();
        let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
        let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
        cov / (va * vb).sqrt()
    }
}

fn spacing(g: &[f64]) -> f64 {
    if g.len() < 2 { 1.0 } else { (g[g.len() - 1] - g[0]) / (g.len() - 1) as f64 }
}

/// Uniform grid of `n` points from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

/// Uniform angle grid `[0, 2pi)` of `n` points.
pub fn angle_grid(n: usize) -> Vec<f64> {
    (0..n).map(|i| std::f64::consts::TAU * i as f64 / n as f64).collect()
}

/// Husimi density of `psi` with coherent states of aspect ratio `squeeze`.
pub fn husimi(psi: &WavepacketState, theta_grid: &[f64], j_grid: &[f64], squeeze: f64) -> HusimiField {
    let hbar = psi.hbar;
    let (sigma_j, _) = coherent_widths(hbar, squeeze);
    let reach = 9.0 * sigma_j / hbar;
    let values = j_grid
        .par_iter()
        .map(|&j0| {
            let centre = j0 / hbar - psi.beta;
            let l_lo = (centre - reach).floor() as i64;
            let l_hi = (centre + reach).ceil() as i64;
            // coherent-state norm over the full lattice
            let z: f64 = (l_lo..=l_hi)
                .map(|l| {
                    let d = hbar * (l as f64 + psi.beta) - j0;
                    (-d * d / (2.0 * sigma_j * sigma_j)).exp()
                })
                .sum();
            let terms: Vec<(f64, C64)> = (l_lo..=l_hi)
                .filter_map(|l| {
                    let i = l - psi.offset;
                    if i < 0 || i >= psi.len() as i64 {
                        return None;
                    }
                    let x = l as f64 + psi.beta;
                    let d = hbar * x - j0;
                    Some((x, psi.amplitudes[i as usize] * (-d * d / (4.0 * sigma_j * sigma_j)).exp()))
                })
                .collect();
            theta_grid
                .iter()
                .map(|&t0| {
                    let a: C64 = terms.iter().map(|(x, g)| g * C64::from_polar(1.0, t0 * x)).sum();
                    a.norm_sqr() / (z * std::f64::consts::TAU * hbar)
                })
                .collect()
        })
        .collect();
    HusimiField { theta_grid: theta_grid.to_vec(), j_grid: j_grid.to_vec(), values }
}
