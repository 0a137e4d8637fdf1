//! Quantum evolution operators in the momentum basis.
//!
//! One kick of branch `s` acts as `D K T`: the kinetic phase
//! `exp(-i s hbar (l + beta)^2 / 2)`, the kick with entries
//! `(-i)^{l - l'} J_{l - l'}(kick / hbar)` and the drift, which moves the
//! momentum by `s m / n` quanta. The integer part of that move shifts indices,
//! the fractional part relabels the quasimomentum sector.
//!
//! Basis index `i` corresponds to momentum `l = i - nu`.

use std::io::{Read, Write};

use faer::{c64, Mat};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::band::BandMatrix;
use super::bessel::{kick_band, KickBand};
use super::planck::PlanckSpec;
use crate::classical::{MapParams, MapSign};
use crate::error::{Error, Result};

/// Largest matrix entry tolerated for complex-scaled operators.
pub const MAX_SCALED_ENTRY: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OperatorKind {
    Unitary,
    Truncated,
    ComplexScaled { rho: f64 },
}

impl OperatorKind {
    fn code(&self) -> (u32, f64) {
        match *self {
            OperatorKind::Unitary => (0, 1.0),
            OperatorKind::Truncated => (1, 1.0),
            OperatorKind::ComplexScaled { rho } => (2, rho),
        }
    }
}

#[derive(Debug, Clone)]
pub struct FloquetMatrix {
    pub band: BandMatrix,
    pub basis_size: usize,
    pub steps_per_application: u32,
    pub kind: OperatorKind,
    pub params: MapParams,
    pub planck: PlanckSpec,
    /// Quasimomentum of the incoming and outgoing sectors.
    pub beta_in: f64,
    pub beta_out: f64,
}

impl FloquetMatrix {
    pub fn dim(&self) -> usize {
        2 * self.basis_size + 1
    }

    /// Entry between momenta `l` (row) and `l_in` (column).
    pub fn entry(&self, l: i64, l_in: i64) -> C64 {
        let nu = self.basis_size as i64;
        if l.abs() > nu || l_in.abs() > nu {
            return C64::new(0.0, 0.0);
        }
        self.band.get((l + nu) as usize, (l_in + nu) as usize)
    }

    pub fn to_dense(&self) -> faer::Mat<faer::c64> {
        self.band.to_dense()
    }

    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        self.band.matvec(x)
    }

    /// Hex SHA-256 of the parameters and the matrix entries.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.header_bytes());
        for i in 0..self.band.n {
            for j in self.band.row_cols(i) {
                let v = self.band.get(i, j);
                if v == C64::new(0.0, 0.0) {
                    continue;
                }
                h.update((i as u64).to_le_bytes());
                h.update((j as u64).to_le_bytes());
                h.update(v.re.to_le_bytes());
                h.update(v.im.to_le_bytes());
            }
        }
        hex(&h.finalize())
    }

    fn header_bytes(&self) -> Vec<u8> {
        let mut b = Vec::new();
        b.extend_from_slice(&(self.dim() as u64).to_le_bytes());
        let (code, rho) = self.kind.code();
        b.extend_from_slice(&code.to_le_bytes());
        b.extend_from_slice(&rho.to_le_bytes());
        b.extend_from_slice(&self.steps_per_application.to_le_bytes());
        for x in [
            self.params.kick,
            self.params.drift,
            self.params.sign.as_f64(),
            self.planck.hbar,
            self.planck.m as f64,
            f64::from(self.planck.n),
            self.beta_in,
            self.beta_out,
        ] {
            b.extend_from_slice(&x.to_le_bytes());
        }
        b
    }

    /// Binary layout: magic `QAMF`, the header (dimension u64, kind u32,
    /// rho f64, steps u32, then kick, drift, sign, hbar, m, n, beta_in,
    /// beta_out as f64), a 32-byte SHA-256 of the parameters, then the dense
    /// matrix as row-major `(re, im)` f64 pairs, all little-endian.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        let header = self.header_bytes();
        w.write_all(b"QAMF")?;
        w.write_all(&header)?;
        w.write_all(&Sha256::digest(&header))?;
        let n = self.dim();
        let mut row = Vec::with_capacity(16 * n);
        for i in 0..n {
            row.clear();
            for j in 0..n {
                let v = self.band.get(i, j);
                row.extend_from_slice(&v.re.to_le_bytes());
                row.extend_from_slice(&v.im.to_le_bytes());
            }
            w.write_all(&row)?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != b"QAMF" {
            return Err(Error::Io("not a Floquet matrix file".into()));
        }
        let mut header = vec![0u8; 8 + 4 + 8 + 4 + 8 * 8];
        r.read_exact(&mut header)?;
        let mut digest = [0u8; 32];
        r.read_exact(&mut digest)?;
        if Sha256::digest(&header).as_slice() != digest {
            return Err(Error::Io("header checksum mismatch".into()));
        }
        let u64_at = |o: usize| u64::from_le_bytes(header[o..o + 8].try_into().unwrap());
        let u32_at = |o: usize| u32::from_le_bytes(header[o..o + 4].try_into().unwrap());
        let f_at = |o: usize| f64::from_le_bytes(header[o..o + 8].try_into().unwrap());
        let n = u64_at(0) as usize;
        let kind = match u32_at(8) {
            0 => OperatorKind::Unitary,
            1 => OperatorKind::Truncated,
            _ => OperatorKind::ComplexScaled { rho: f_at(12) },
        };
        let steps = u32_at(20);
        let v: Vec<f64> = (0..8).map(|k| f_at(24 + 8 * k)).collect();
        let sign = if v[2] > 0.0 { MapSign::Plus } else { MapSign::Minus };
        let params = MapParams { kick: v[0], drift: v[1], sign };
        let planck = PlanckSpec { hbar: v[3], m: v[4] as i64, n: v[5] as u32, beta: v[6] };
        let mut dense = vec![C64::new(0.0, 0.0); n * n];
        let mut buf = vec![0u8; 16 * n];
        for i in 0..n {
            r.read_exact(&mut buf)?;
            for j in 0..n {
                let re = f64::from_le_bytes(buf[16 * j..16 * j + 8].try_into().unwrap());
                let im = f64::from_le_bytes(buf[16 * j + 8..16 * j + 16].try_into().unwrap());
                dense[i * n + j] = C64::new(re, im);
            }
        }
        let (mut lo, mut hi) = (i64::MAX, i64::MIN);
        for i in 0..n {
            for j in 0..n {
                if dense[i * n + j] != C64::new(0.0, 0.0) {
                    lo = lo.min(j as i64 - i as i64);
                    hi = hi.max(j as i64 - i as i64);
                }
            }
        }
        if lo > hi {
            (lo, hi) = (0, 0);
        }
        let mut band = BandMatrix::zeros(n, lo, hi);
        for i in 0..n {
            for j in band.row_cols(i) {
                band.set(i, j, dense[i * n + j]);
            }
        }
        Ok(Self {
            band,
            basis_size: (n - 1) / 2,
            steps_per_application: steps,
            kind,
            params,
            planck,
            beta_in: v[6],
            beta_out: v[7],
        })
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Integer index shift and outgoing quasimomentum of one drift step.
pub fn drift_shift(params: &MapParams, p: &PlanckSpec, beta_in: f64) -> (i64, f64) {
    let t = beta_in + params.sign.as_f64() * p.drift_quanta();
    let j = t.floor();
    let mut beta = t - j;
    if beta >= 1.0 - 1e-13 {
        beta = 0.0;
        return (j as i64 + 1, beta);
    }
    if beta < 1e-13 {
        beta = 0.0;
    }
    (j as i64, beta)
}

fn kinetic_phase(params: &MapParams, hbar: f64, l: i64, beta: f64) -> C64 {
    let x = l as f64 + beta;
    C64::from_polar(1.0, -params.sign.as_f64() * hbar * x * x / 2.0)
}

fn one_step_band(params: &MapParams, p: &PlanckSpec, beta_in: f64, nu: usize, kick: &KickBand) -> (BandMatrix, f64) {
    let (j, beta_out) = drift_shift(params, p, beta_in);
    let q = kick.q_max as i64;
    let dim = 2 * nu + 1;
    let nu_i = nu as i64;
    let mut band = BandMatrix::zeros(dim, -j - q, -j + q);
    for r in 0..dim {
        let l_out = r as i64 - nu_i;
        for c in band.row_cols(r) {
            let l_in = c as i64 - nu_i;
            let v = kick.get(l_out - j - l_in) * kinetic_phase(params, p.hbar, l_in, beta_in);
            band.set(r, c, v);
        }
    }
    (band, beta_out)
}

/// One kick from sector `beta_in`, restricted to momenta `-nu..=nu`.
pub fn build_one_step(params: &MapParams, p: &PlanckSpec, beta_in: f64, nu: usize) -> Result<FloquetMatrix> {
    if nu == 0 {
        return Err(Error::InvalidArgument("nu must be at least 1".into()));
    }
    let kick = kick_band(params.kick / p.hbar);
    let (band, beta_out) = one_step_band(params, p, beta_in, nu, &kick);
    Ok(FloquetMatrix {
        band,
        basis_size: nu,
        steps_per_application: 1,
        kind: OperatorKind::Unitary,
        params: *params,
        planck: *p,
        beta_in,
        beta_out,
    })
}

/// The `n`-kick operator that maps sector `p.beta` onto itself.
///
/// Factors are built on an enlarged basis so that the returned central block
/// equals the block of the exact operator.
pub fn build_circle_operator(params: &MapParams, p: &PlanckSpec, nu: usize) -> Result<FloquetMatrix> {
    if nu == 0 {
        return Err(Error::InvalidArgument("nu must be at least 1".into()));
    }
    let kick = kick_band(params.kick / p.hbar);
    let n = p.n as usize;
    if n == 1 {
        let (band, beta_out) = one_step_band(params, p, p.beta, nu, &kick);
        return Ok(FloquetMatrix {
            band,
            basis_size: nu,
            steps_per_application: 1,
            kind: OperatorKind::Unitary,
            params: *params,
            planck: *p,
            beta_in: p.beta,
            beta_out,
        });
    }
    let per_step = kick.q_max + (p.drift_quanta().abs().ceil() as usize) + 1;
    let margin = (n - 1) * per_step;
    let big = nu + margin;
    let mut beta = p.beta;
    let mut total: Option<BandMatrix> = None;
    for _ in 0..n {
        let (b, out) = one_step_band(params, p, beta, big, &kick);
        beta = out;
        total = Some(match total {
            None => b,
            Some(acc) => b.mul(&acc),
        });
    }
    let band = total.expect("n >= 1").sub_block(margin, 2 * nu + 1).trimmed(0.0);
    Ok(FloquetMatrix {
        band,
        basis_size: nu,
        steps_per_application: p.n,
        kind: OperatorKind::Unitary,
        params: *params,
        planck: *p,
        beta_in: p.beta,
        beta_out: beta,
    })
}

/// Central `(2 nu_new + 1)` block.
pub fn truncate(u: &FloquetMatrix, nu_new: usize) -> Result<FloquetMatrix> {
    if nu_new > u.basis_size || nu_new == 0 {
        return Err(Error::InvalidArgument(format!(
            "cannot truncate basis {} to {nu_new}",
            u.basis_size
        )));
    }
    let start = u.basis_size - nu_new;
    Ok(FloquetMatrix {
        band: u.band.sub_block(start, 2 * nu_new + 1),
        basis_size: nu_new,
        kind: match u.kind {
            OperatorKind::Unitary => OperatorKind::Truncated,
            k => k,
        },
        ..u.clone()
    })
}

/// Truncated circle operator, the matrix diagonalised by the basis
/// truncation method.
pub fn build_truncated(params: &MapParams, p: &PlanckSpec, nu: usize) -> Result<FloquetMatrix> {
    let mut u = build_circle_operator(params, p, nu)?;
    u.kind = OperatorKind::Truncated;
    Ok(u)
}

/// Effective kick strengths `(k+, k-) = (k/2) |rho +- 1/rho|` of the scaled kick.
pub fn scaled_kick_strengths(kick: f64, rho: f64) -> (f64, f64) {
    (0.5 * kick * (rho + 1.0 / rho).abs(), 0.5 * kick * (rho - 1.0 / rho).abs())
}

/// Direction of the scaling: escape runs toward `+J` on the plus branch and
/// toward `-J` on the minus branch.
pub fn scaling_direction(sign: MapSign) -> i32 {
    match sign {
        MapSign::Plus => 1,
        MapSign::Minus => -1,
    }
}

/// `S U S^-1` with `S = diag(rho^(sigma l))`, for `hbar = 1/N`.
///
/// Entries are those of the one-step operator times `rho^(sigma (l - l'))`;
/// in the angle representation the kick becomes
/// `exp(-i k+ cos(theta) / hbar) exp(+-k- sin(theta) / hbar)`.
pub fn build_complex_scaled(params: &MapParams, p: &PlanckSpec, rho: f64, nu: usize) -> Result<FloquetMatrix> {
    if p.reciprocal_integer().is_none() || p.n != 1 {
        return Err(Error::UnsupportedPlanck { hbar: p.hbar });
    }
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::InvalidArgument(format!("rho = {rho} outside (0, 1]")));
    }
    if nu == 0 {
        return Err(Error::InvalidArgument("nu must be at least 1".into()));
    }
    let sigma = scaling_direction(params.sign);
    let w = rho.powi(sigma);
    let kick = kick_band(params.kick / p.hbar).scaled(w);
    let (mut band, beta_out) = one_step_band(params, p, p.beta, nu, &kick);
    let (j, _) = drift_shift(params, p, p.beta);
    let factor = w.powi(j as i32);
    for r in 0..band.n {
        for c in band.row_cols(r) {
            let v = band.get(r, c) * factor;
            band.set(r, c, v);
        }
    }
    Ok(FloquetMatrix {
        band,
        basis_size: nu,
        steps_per_application: 1,
        kind: OperatorKind::ComplexScaled { rho },
        params: *params,
        planck: *p,
        beta_in: p.beta,
        beta_out,
    })
}

/// Dense matrix of the scaled one-step operator on the periodic lattice of
/// momenta `-nu..=nu`: momentum differences are taken modulo `2 nu + 1`.
///
/// At `rho = 1` the matrix is unitary. For `rho < 1` resonances are
/// eigenvalues that do not depend on `rho`, while the wrapped continuum moves
/// with it. Requires `hbar = 1/N`.
pub fn build_complex_scaled_periodic(params: &MapParams, p: &PlanckSpec, rho: f64, nu: usize) -> Result<Mat<c64>> {
    if p.reciprocal_integer().is_none() || p.n != 1 {
        return Err(Error::UnsupportedPlanck { hbar: p.hbar });
    }
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::InvalidArgument(format!("rho = {rho} outside (0, 1]")));
    }
    if nu == 0 {
        return Err(Error::InvalidArgument("nu must be at least 1".into()));
    }
    let w = rho.powi(scaling_direction(params.sign));
    let kick = kick_band(params.kick / p.hbar).scaled(w);
    let (j, _) = drift_shift(params, p, p.beta);
    let factor = w.powi(j as i32);
    let dim = 2 * nu + 1;
    let nu_i = nu as i64;
    let q = kick.q_max as i64;
    let mut m = Mat::<c64>::zeros(dim, dim);
    for r in 0..dim {
        let l_out = r as i64 - nu_i;
        for d in -q..=q {
            let c = (l_out - j - d + nu_i).rem_euclid(dim as i64) as usize;
            let l_in = c as i64 - nu_i;
            let v = kick.get(d) * kinetic_phase(params, p.hbar, l_in, p.beta) * factor;
            m[(r, c)] += c64::new(v.re, v.im);
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::bessel::kick_band_fft;
    use crate::quantum::planck::commensurate;

    fn fig5() -> (MapParams, PlanckSpec) {
        (MapParams::new(2.5, 1.0, MapSign::Minus).unwrap(), commensurate(1.0, 0.25, 16).unwrap())
    }

    #[test]
    fn zero_kick_is_shifted_diagonal() {
        let params = MapParams::new(0.0, 1.0, MapSign::Minus).unwrap();
        let p = commensurate(1.0, 0.25, 16).unwrap();
        let u = build_one_step(&params, &p, 0.0, 20).unwrap();
        for l in -20i64..=20 {
            for l_in in -20i64..=20 {
                let v = u.entry(l, l_in);
                if l == l_in - 4 {
                    let want = C64::from_polar(1.0, 0.25 * (l_in * l_in) as f64 / 2.0);
                    assert!((v - want).norm() < 1e-14);
                } else {
                    assert_eq!(v.norm(), 0.0);
                }
            }
        }
    }

    #[test]
    fn kick_entries_match_fourier_oracle() {
        let (params, p) = fig5();
        let nu = 64;
        let u = build_one_step(&params, &p, 0.0, nu).unwrap();
        let x = params.kick / p.hbar;
        let fft = kick_band_fft(x, 2 * nu, 4 * (2 * nu + 1) + 4);
        let mut err: f64 = 0.0;
        for l in -(nu as i64)..=nu as i64 {
            for l_in in -(nu as i64)..=nu as i64 {
                let t = kinetic_phase(&params, p.hbar, l_in, 0.0);
                let want = fft.get(l + 4 - l_in) * t;
                err = err.max((u.entry(l, l_in) - want).norm());
            }
        }
        assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn interior_columns_are_orthonormal() {
        let params = MapParams::new(2.5, 1.0, MapSign::Minus).unwrap();
        let p = PlanckSpec::from_ratio(1.0, 41, 5, 0.0).unwrap();
        let u = build_circle_operator(&params, &p, 400).unwrap();
        assert_eq!(u.steps_per_application, 5);
        assert!((u.beta_out - u.beta_in).abs() < 1e-12);
        let dense = u.to_dense();
        let n = u.dim();
        for a in n / 4..3 * n / 4 {
            let norm: f64 = (0..n).map(|i| dense[(i, a)].norm_sqr()).sum();
            assert!((norm - 1.0).abs() < 1e-8, "column {a}: {norm}");
        }
        for (a, b) in [(n / 2, n / 2 + 1), (n / 3, n / 2)] {
            let dot: C64 = (0..n)
                .map(|i| {
                    let x = dense[(i, a)];
                    let y = dense[(i, b)];
                    C64::new(x.re, -x.im) * C64::new(y.re, y.im)
                })
                .sum();
            assert!(dot.norm() < 1e-8);
        }
    }

    #[test]
    fn composite_block_is_exact() {
        // the central block must not depend on how large the factors were built
        let params = MapParams::new(1.0, 0.7, MapSign::Minus).unwrap();
        let p = commensurate(0.7, 1.0 / 6.0, 16).unwrap();
        let small = build_circle_operator(&params, &p, 30).unwrap();
        let large = truncate(&build_circle_operator(&params, &p, 90).unwrap(), 30).unwrap();
        for i in 0..small.dim() {
            for j in 0..small.dim() {
                assert!((small.band.get(i, j) - large.band.get(i, j)).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn single_sector_circle_equals_one_step() {
        let (params, p) = fig5();
        let a = build_circle_operator(&params, &p, 50).unwrap();
        let b = build_one_step(&params, &p, 0.0, 50).unwrap();
        assert_eq!(a.band, b.band);
    }

    #[test]
    fn truncation_is_subunitary() {
        let (params, p) = fig5();
        let u = build_truncated(&params, &p, 60).unwrap();
        let t = truncate(&u, 40).unwrap();
        assert_eq!(t.kind, OperatorKind::Truncated);
        let s = t.to_dense().singular_values().unwrap();
        assert!(s[0] <= 1.0 + 1e-10);
        let same = truncate(&u, 60).unwrap();
        assert_eq!(same.band, u.band);
    }

    #[test]
    fn scaled_operator_at_unit_rho() {
        let (params, p) = fig5();
        let a = build_complex_scaled(&params, &p, 1.0, 40).unwrap();
        let b = build_one_step(&params, &p, 0.0, 40).unwrap();
        for i in 0..a.dim() {
            for j in 0..a.dim() {
                assert!((a.band.get(i, j) - b.band.get(i, j)).norm() < 1e-12);
            }
        }
        let (kp, km) = scaled_kick_strengths(2.5, 0.9);
        assert!((kp - 2.513_888_888_888_889).abs() < 1e-12);
        assert!((km - 0.263_888_888_888_888_9).abs() < 1e-12);
    }

    #[test]
    fn scaled_operator_is_similarity_transform() {
        let (params, p) = fig5();
        let rho: f64 = 0.93;
        let a = build_complex_scaled(&params, &p, rho, 30).unwrap();
        let b = build_one_step(&params, &p, 0.0, 30).unwrap();
        for l in -30i64..=30 {
            for l_in in -30i64..=30 {
                let want = b.entry(l, l_in) * rho.powi(-((l - l_in) as i32));
                assert!((a.entry(l, l_in) - want).norm() < 1e-12 * want.norm().max(1.0));
            }
        }
    }

    #[test]
    fn scaled_needs_reciprocal_integer() {
        let params = MapParams::new(2.5, 1.0, MapSign::Minus).unwrap();
        let p = commensurate(1.0, 1.0 / 8.2, 16).unwrap();
        assert!(matches!(
            build_complex_scaled(&params, &p, 0.9, 10),
            Err(Error::UnsupportedPlanck { .. })
        ));
    }

    #[test]
    fn binary_round_trip() {
        let (params, p) = fig5();
        let u = build_truncated(&params, &p, 12).unwrap();
        let mut buf = Vec::new();
        u.write_binary(&mut buf).unwrap();
        let back = FloquetMatrix::read_binary(buf.as_slice()).unwrap();
        assert_eq!(back.band.to_dense(), u.band.to_dense());
        assert_eq!(back.kind, u.kind);
        assert_eq!(back.content_hash(), u.content_hash());
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(8))]
        #[test]
        fn unscaled_periodic_operator_is_unitary(k in 0.3f64..3.0, d in 0.2f64..1.5, plus in proptest::bool::ANY, n in 6u32..20) {
            let sign = if plus { MapSign::Plus } else { MapSign::Minus };
            let params = MapParams::new(k, d, sign).unwrap();
            let p = commensurate(1.0, 1.0 / f64::from(n), 16).unwrap();
            let u = build_complex_scaled_periodic(&params, &p, 1.0, 24).unwrap();
            let uu = u.adjoint() * &u;
            for i in 0..uu.nrows() {
                for j in 0..uu.ncols() {
                    let want = if i == j { 1.0 } else { 0.0 };
                    proptest::prop_assert!((uu[(i, j)] - faer::c64::new(want, 0.0)).norm() < 1e-10);
                }
            }
        }
    }
}
