//! Dense eigendecomposition of Floquet matrices.

use faer::{c64, Mat};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::quantum::floquet::hex;
use crate::quantum::{FloquetMatrix, OperatorKind, WavepacketState};

/// Relative bound on `||U v - z v|| / ||U||` for returned eigenpairs.
pub const RESIDUAL_BOUND: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub method: String,
    pub nu_or_rho: f64,
    pub params_hash: String,
}

/// Eigenvalues (sorted by decreasing modulus, then increasing argument),
/// optional right eigenvectors and per-kick decay rates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FloquetSpectrum {
    pub eigenvalues: Vec<C64>,
    /// Column `k` is the eigenvector of `eigenvalues[k]`, indexed by momentum
    /// `l = -basis_size ..= basis_size`.
    pub eigenvectors: Option<Vec<Vec<C64>>>,
    pub gamma: Vec<f64>,
    /// Quasienergy per kick, `-arg(z) / steps`.
    pub quasienergy: Vec<f64>,
    pub steps_per_application: u32,
    pub basis_size: usize,
    pub hbar: f64,
    pub beta: f64,
    pub provenance: Provenance,
}

impl FloquetSpectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Eigenvector `k` as a momentum-space state.
    pub fn state(&self, k: usize) -> Option<WavepacketState> {
        let v = self.eigenvectors.as_ref()?.get(k)?;
        Some(WavepacketState {
            hbar: self.hbar,
            beta: self.beta,
            offset: -(self.basis_size as i64),
            amplitudes: v.clone(),
        })
    }
}

/// Decay rate per kick of an eigenvalue of an `steps`-kick operator.
pub fn gamma_of(z: C64, steps: u32) -> f64 {
    (1.0 / z.norm()).ln() / (2.0 * f64::from(steps))
}

/// Quasienergy per kick.
pub fn quasienergy_of(z: C64, steps: u32) -> f64 {
    -z.arg() / f64::from(steps)
}

/// `Gamma_j = ln(1/|z_j|) / (2 n)` for every eigenvalue.
pub fn decay_rates(spectrum: &FloquetSpectrum) -> Vec<f64> {
    spectrum.eigenvalues.iter().map(|&z| gamma_of(z, spectrum.steps_per_application)).collect()
}

fn canonical_order(zs: &[C64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..zs.len()).collect();
    idx.sort_by(|&a, &b| {
        zs[b].norm().total_cmp(&zs[a].norm()).then(zs[a].arg().total_cmp(&zs[b].arg()))
    });
    idx
}

fn method_name(kind: &OperatorKind) -> (&'static str, f64) {
    match *kind {
        OperatorKind::Unitary => ("unitary", 0.0),
        OperatorKind::Truncated => ("truncated", 0.0),
        OperatorKind::ComplexScaled { rho } => ("complex_scaling", rho),
    }
}

fn assemble(u: &FloquetMatrix, zs: Vec<C64>, vecs: Option<Vec<Vec<C64>>>) -> FloquetSpectrum {
    let (method, rho) = method_name(&u.kind);
    let nu_or_rho = if rho > 0.0 { rho } else { u.basis_size as f64 };
    let provenance = Provenance { method: method.into(), nu_or_rho, params_hash: u.content_hash() };
    spectrum_from_parts(zs, vecs, u.steps_per_application, u.basis_size, u.planck.hbar, u.beta_in, provenance)
}

/// Sorts eigenpairs canonically and fills in the derived rates.
pub fn spectrum_from_parts(
    zs: Vec<C64>,
    vecs: Option<Vec<Vec<C64>>>,
    steps: u32,
    basis_size: usize,
    hbar: f64,
    beta: f64,
    provenance: Provenance,
) -> FloquetSpectrum {
    let order = canonical_order(&zs);
    let eigenvalues: Vec<C64> = order.iter().map(|&k| zs[k]).collect();
    let eigenvectors = vecs.map(|v| order.iter().map(|&k| v[k].clone()).collect());
    FloquetSpectrum {
        gamma: eigenvalues.iter().map(|&z| gamma_of(z, steps)).collect(),
        quasienergy: eigenvalues.iter().map(|&z| quasienergy_of(z, steps)).collect(),
        eigenvalues,
        eigenvectors,
        steps_per_application: steps,
        basis_size,
        hbar,
        beta,
        provenance,
    }
}

/// SHA-256 of the entries of a dense matrix.
pub fn dense_hash(m: &Mat<c64>) -> String {
    let mut h = Sha256::new();
    h.update((m.nrows() as u64).to_le_bytes());
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            h.update(m[(i, j)].re.to_le_bytes());
            h.update(m[(i, j)].im.to_le_bytes());
        }
    }
    hex(&h.finalize())
}

/// Eigenvalues of a dense matrix in canonical order.
pub fn dense_eigenvalues(m: &Mat<c64>) -> Result<Vec<C64>> {
    let finite = (0..m.ncols()).all(|j| (0..m.nrows()).all(|i| m[(i, j)].re.is_finite() && m[(i, j)].im.is_finite()));
    if !finite {
        return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
    }
    let zs = m.eigenvalues().map_err(|_| Error::ConvergenceFailure { hash: dense_hash(m) })?;
    let zs: Vec<C64> = zs.into_iter().map(|z| C64::new(z.re, z.im)).collect();
    Ok(canonical_order(&zs).into_iter().map(|k| zs[k]).collect())
}

fn check_finite(u: &FloquetMatrix) -> Result<()> {
    let finite = (0..u.band.n).all(|i| u.band.row_cols(i).all(|j| {
        let v = u.band.get(i, j);
        v.re.is_finite() && v.im.is_finite()
    }));
    if finite {
        Ok(())
    } else {
        Err(Error::InvalidArgument("matrix has non-finite entries".into()))
    }
}

/// All eigenvalues, no vectors.
pub fn eigenvalues_only(u: &FloquetMatrix) -> Result<FloquetSpectrum> {
    check_finite(u)?;
    let dense = u.to_dense();
    let zs = dense
        .eigenvalues()
        .map_err(|_| Error::ConvergenceFailure { hash: u.content_hash() })?;
    let zs: Vec<C64> = zs.into_iter().map(|z| C64::new(z.re, z.im)).collect();
    Ok(assemble(u, zs, None))
}

/// All eigenpairs, with a residual check on every pair.
pub fn eigendecompose(u: &FloquetMatrix) -> Result<FloquetSpectrum> {
    check_finite(u)?;
    let dense: Mat<c64> = u.to_dense();
    let eig = dense.eigen().map_err(|_| Error::ConvergenceFailure { hash: u.content_hash() })?;
    let s = eig.S();
    let vecs = eig.U();
    let n = u.dim();
    let scale = u.band.norm_bound().max(1e-300);
    let mut zs = Vec::with_capacity(n);
    let mut cols = Vec::with_capacity(n);
    for k in 0..n {
        let z = s[k];
        let z = C64::new(z.re, z.im);
        let mut v: Vec<C64> = (0..n).map(|i| C64::new(vecs[(i, k)].re, vecs[(i, k)].im)).collect();
        let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        v.iter_mut().for_each(|c| *c /= norm);
        let uv = u.apply(&v);
        let res = uv.iter().zip(&v).map(|(a, b)| (a - z * b).norm_sqr()).sum::<f64>().sqrt();
        if !(res < RESIDUAL_BOUND * scale) {
            return Err(Error::ConvergenceFailure { hash: u.content_hash() });
        }
        zs.push(z);
        cols.push(v);
    }
    Ok(assemble(u, zs, Some(cols)))
}

/// Eigenvalues and unit-norm right eigenvectors of a dense matrix, unsorted.
pub fn dense_eigendecompose(m: &Mat<c64>) -> Result<(Vec<C64>, Vec<Vec<C64>>)> {
    let eig = m.eigen().map_err(|_| Error::ConvergenceFailure { hash: dense_hash(m) })?;
    let s = eig.S();
    let u = eig.U();
    let n = m.nrows();
    let zs = (0..n).map(|k| C64::new(s[k].re, s[k].im)).collect();
    let vecs = (0..n)
        .map(|k| {
            let mut v: Vec<C64> = (0..n).map(|i| C64::new(u[(i, k)].re, u[(i, k)].im)).collect();
            let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            v.iter_mut().for_each(|c| *c /= norm);
            v
        })
        .collect();
    Ok((zs, vecs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::{MapParams, MapSign};
    use crate::quantum::{build_truncated, commensurate, BandMatrix, PlanckSpec};

    fn wrap(band: BandMatrix, steps: u32) -> FloquetMatrix {
        FloquetMatrix {
            basis_size: (band.n - 1) / 2,
            band,
            steps_per_application: steps,
            kind: OperatorKind::Truncated,
            params: MapParams::new(0.0, 0.0, MapSign::Minus).unwrap(),
            planck: PlanckSpec { hbar: 1.0, m: 0, n: steps, beta: 0.0 },
            beta_in: 0.0,
            beta_out: 0.0,
        }
    }

    #[test]
    fn diagonal_unitary() {
        let mut b = BandMatrix::zeros(5, 0, 0);
        let phases = [0.3, -1.0, 2.0, 0.0, 1.5];
        for (i, p) in phases.iter().enumerate() {
            b.set(i, i, C64::from_polar(1.0, *p));
        }
        let s = eigendecompose(&wrap(b, 1)).unwrap();
        let mut args: Vec<f64> = s.eigenvalues.iter().map(|z| z.arg()).collect();
        let mut want = phases.to_vec();
        args.sort_by(f64::total_cmp);
        want.sort_by(f64::total_cmp);
        for (a, b) in args.iter().zip(&want) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(s.gamma.iter().all(|g| g.abs() < 1e-12));
    }

    #[test]
    fn two_by_two_closed_form() {
        // [[a, b], [0, d]] has eigenvalues a and d
        let mut b = BandMatrix::zeros(3, 0, 1);
        b.set(0, 0, C64::new(0.5, 0.1));
        b.set(0, 1, C64::new(0.3, 0.0));
        b.set(1, 1, C64::new(0.2, -0.4));
        b.set(2, 2, C64::new(0.9, 0.0));
        let s = eigendecompose(&wrap(b, 1)).unwrap();
        let want = [C64::new(0.9, 0.0), C64::new(0.5, 0.1), C64::new(0.2, -0.4)];
        for (z, w) in s.eigenvalues.iter().zip(want) {
            assert!((z - w).norm() < 1e-12);
        }
    }

    #[test]
    fn rates_per_kick() {
        let e = (-1.0f64).exp();
        assert!((gamma_of(C64::new(e, 0.0), 1) - 0.5).abs() < 1e-15);
        assert!((gamma_of(C64::new(e, 0.0), 5) - 0.1).abs() < 1e-15);
        assert_eq!(gamma_of(C64::new(0.0, 1.0), 1), 0.0);
    }

    #[test]
    fn truncated_spectrum_is_subunitary_and_sorted() {
        let params = MapParams::new(2.5, 1.0, MapSign::Minus).unwrap();
        let p = commensurate(1.0, 0.25, 16).unwrap();
        let u = build_truncated(&params, &p, 100).unwrap();
        let s = eigendecompose(&u).unwrap();
        assert!(s.eigenvalues.iter().all(|z| z.norm() <= 1.0 + 1e-8));
        assert!(decay_rates(&s).iter().all(|g| *g >= -1e-10));
        for w in s.eigenvalues.windows(2) {
            assert!(w[0].norm() >= w[1].norm());
        }
        let only = eigenvalues_only(&u).unwrap();
        for (a, b) in only.eigenvalues.iter().zip(&s.eigenvalues) {
            assert!((a - b).norm() < 1e-9);
        }
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(8))]
        #[test]
        fn truncated_rates_are_nonnegative(k in 0.3f64..3.0, d in 0.2f64..1.5, plus in proptest::bool::ANY, n in 4u32..12) {
            let sign = if plus { MapSign::Plus } else { MapSign::Minus };
            let p = commensurate(1.0, 1.0 / f64::from(n), 16).unwrap();
            let spec = eigenvalues_only(&build_truncated(&MapParams::new(k, d, sign).unwrap(), &p, 48).unwrap()).unwrap();
            proptest::prop_assert!(spec.gamma.iter().all(|g| *g >= -1e-12));
        }
    }
}
