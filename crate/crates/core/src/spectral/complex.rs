//! Complex scaling: eigenvalues of `S U S^-1` that do not move with `rho`.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::eigen::{dense_eigenvalues, dense_hash, gamma_of, quasienergy_of, spectrum_from_parts, FloquetSpectrum, Provenance};
use crate::classical::MapParams;
use crate::error::{Error, Result};
use crate::quantum::{build_complex_scaled_periodic, PlanckSpec, MAX_SCALED_ENTRY};

pub const DEFAULT_RHO_GRID: [f64; 5] = [0.90, 0.92, 0.94, 0.96, 0.98];

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScaledResonance {
    pub z: C64,
    pub gamma: f64,
    pub w: f64,
    /// Scaling parameters over which the eigenvalue stayed within tolerance.
    pub rhos: Vec<f64>,
    pub spread: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RhoScan {
    /// `None` where the matrix magnitude monitor rejected the scaling.
    pub spectra: Vec<(f64, Option<FloquetSpectrum>)>,
    pub resonances: Vec<ScaledResonance>,
}

fn nearest(zs: &[C64], z: C64) -> Option<(usize, f64)> {
    zs.iter()
        .enumerate()
        .map(|(i, w)| (i, (w - z).norm()))
        .min_by(|a, b| a.1.total_cmp(&b.1))
}

/// Diagonalises the scaled operator on the periodic lattice for every `rho`
/// and keeps eigenvalues that persist, within `tol`, over at least two
/// consecutive accepted values. Values of `rho` whose matrix has an entry
/// above [`MAX_SCALED_ENTRY`] are skipped.
pub fn scan_rho(params: &MapParams, p: &PlanckSpec, rho_list: &[f64], nu: usize, tol: f64) -> Result<RhoScan> {
    if p.reciprocal_integer().is_none() || p.n != 1 {
        return Err(Error::UnsupportedPlanck { hbar: p.hbar });
    }
    let spectra: Vec<(f64, Option<FloquetSpectrum>)> = rho_list
        .par_iter()
        .map(|&rho| {
            let m = build_complex_scaled_periodic(params, p, rho, nu)?;
            let peak = (0..m.ncols())
                .flat_map(|j| (0..m.nrows()).map(move |i| (i, j)))
                .map(|(i, j)| m[(i, j)].norm())
                .fold(0.0, f64::max);
            if peak >= MAX_SCALED_ENTRY {
                return Ok((rho, None));
            }
            let zs = dense_eigenvalues(&m)?;
            let provenance = Provenance { method: "complex_scaling".into(), nu_or_rho: rho, params_hash: dense_hash(&m) };
            Ok((rho, Some(spectrum_from_parts(zs, None, 1, nu, p.hbar, p.beta, provenance))))
        })
        .collect::<Result<_>>()?;

    let accepted: Vec<(f64, &[C64])> = spectra
        .iter()
        .filter_map(|(r, s)| s.as_ref().map(|s| (*r, s.eigenvalues.as_slice())))
        .collect();
    let mut resonances: Vec<ScaledResonance> = Vec::new();
    let mut claimed: Vec<Vec<bool>> = accepted.iter().map(|(_, z)| vec![false; z.len()]).collect();
    for start in 0..accepted.len().saturating_sub(1) {
        for i in 0..accepted[start].1.len() {
            if claimed[start][i] {
                continue;
            }
            let z0 = accepted[start].1[i];
            if z0.norm() >= 1.0 - 1e-12 {
                continue;
            }
            let mut rhos = vec![accepted[start].0];
            let mut spread: f64 = 0.0;
            let mut cur = z0;
            let mut path = vec![(start, i)];
            for (next, (rho, zs)) in accepted.iter().enumerate().skip(start + 1) {
                match nearest(zs, cur) {
                    Some((k, d)) if d < tol && !claimed[next][k] => {
                        spread = spread.max((zs[k] - z0).norm());
                        cur = zs[k];
                        rhos.push(*rho);
                        path.push((next, k));
                    }
                    _ => break,
                }
            }
            if rhos.len() >= 2 {
                for (a, b) in path {
                    claimed[a][b] = true;
                }
                resonances.push(ScaledResonance {
                    z: z0,
                    gamma: gamma_of(z0, 1),
                    w: quasienergy_of(z0, 1),
                    rhos,
                    spread,
                });
            }
        }
    }
    // degenerate pairs show up as two chains through the same points
    resonances.sort_by(|a, b| b.rhos.len().cmp(&a.rhos.len()));
    let mut unique: Vec<ScaledResonance> = Vec::new();
    for r in resonances {
        if !unique.iter().any(|u| (u.z - r.z).norm() < tol) {
            unique.push(r);
        }
    }
    let mut resonances = unique;
    resonances.sort_by(|a, b| a.gamma.total_cmp(&b.gamma).then(a.w.total_cmp(&b.w)));
    Ok(RhoScan { spectra, resonances })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::MapSign;
    use crate::quantum::commensurate;

    #[test]
    fn unit_rho_gives_unimodular_spectrum() {
        let params = MapParams::new(2.5, 1.0, MapSign::Minus).unwrap();
        let p = commensurate(1.0, 0.25, 16).unwrap();
        let s = scan_rho(&params, &p, &[1.0], 60, 1e-6).unwrap();
        let spec = s.spectra[0].1.as_ref().unwrap();
        assert!(spec.eigenvalues.iter().all(|z| (z.norm() - 1.0).abs() < 1e-10));
        assert!(s.resonances.is_empty());
    }

    #[test]
    fn resonances_match_truncated_basis() {
        let params = MapParams::new(2.5, 1.0, MapSign::Minus).unwrap();
        let p = commensurate(1.0, 0.25, 16).unwrap();
        let scan = scan_rho(&params, &p, &DEFAULT_RHO_GRID, 128, 1e-6).unwrap();
        let island = scan.resonances.iter().filter(|r| r.gamma < 1e-5).count();
        assert!(island > 0);
        let stab = crate::spectral::find_stabilized(&params, &p, &[128, 256], &Default::default()).unwrap();
        for r in scan.resonances.iter().filter(|r| r.gamma < 1e-5) {
            let d = stab.iter().map(|s| (s.z - r.z).norm()).fold(f64::INFINITY, f64::min);
            assert!(d < 1e-6, "{:?}: {d}", r.z);
        }
    }

    #[test]
    fn small_rho_trips_the_magnitude_monitor() {
        let params = MapParams::new(2.5, 1.0, MapSign::Minus).unwrap();
        let p = commensurate(1.0, 1.0 / 20.0, 16).unwrap();
        let scan = scan_rho(&params, &p, &[0.3, 0.98], 60, 1e-6).unwrap();
        assert!(scan.spectra[0].1.is_none());
        assert!(scan.spectra[1].1.is_some());
    }

    #[test]
    fn rejects_non_integer_inverse_planck() {
        let params = MapParams::new(0.8, 0.7, MapSign::Minus).unwrap();
        let p = commensurate(0.7, 1.0 / 6.0, 16).unwrap();
        assert!(matches!(scan_rho(&params, &p, &DEFAULT_RHO_GRID, 40, 1e-6), Err(Error::UnsupportedPlanck { .. })));
    }
}
