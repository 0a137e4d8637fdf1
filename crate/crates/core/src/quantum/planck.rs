//! Effective Planck constant and its commensurability with the drift.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_N_MAX: u32 = 16;
pub const DEFAULT_SNAP_BOUND: f64 = 1e-3;

/// `hbar` with `drift = m * hbar / n`, `gcd(m, n) = 1`, and a quasimomentum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanckSpec {
    pub hbar: f64,
    pub m: i64,
    pub n: u32,
    pub beta: f64,
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 { a.abs() } else { gcd(b, a % b) }
}

impl PlanckSpec {
    /// Exact spec for `hbar = drift * n / m`.
    pub fn from_ratio(drift: f64, m: i64, n: u32, beta: f64) -> Result<Self> {
        if m <= 0 || n == 0 {
            return Err(Error::InvalidArgument(format!("ratio {m}/{n}")));
        }
        let g = gcd(m, i64::from(n));
        let (m, n) = (m / g, n / g as u32);
        Ok(Self { hbar: drift * f64::from(n) / m as f64, m, n, beta: beta.rem_euclid(1.0) })
    }

    pub fn inv_hbar(&self) -> f64 {
        1.0 / self.hbar
    }

    /// Drift measured in momentum quanta, `m / n`.
    pub fn drift_quanta(&self) -> f64 {
        self.m as f64 / f64::from(self.n)
    }

    /// Bloch period `hbar / drift` in kicks.
    pub fn bloch_period(&self) -> f64 {
        f64::from(self.n) / self.m as f64
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta.rem_euclid(1.0);
        self
    }

    /// `Some(N)` when `hbar = 1/N` to 1e-12.
    pub fn reciprocal_integer(&self) -> Option<u64> {
        let inv = 1.0 / self.hbar;
        let r = inv.round();
        ((inv - r).abs() < 1e-12 * inv.max(1.0) && r >= 1.0).then_some(r as u64)
    }
}

/// Snaps `hbar_target` so that `drift / hbar = m / n` with `n <= n_max`.
///
/// Among all admissible fractions the one moving `hbar` least is chosen,
/// ties going to the smaller `n`.
pub fn commensurate(drift: f64, hbar_target: f64, n_max: u32) -> Result<PlanckSpec> {
    commensurate_with_bound(drift, hbar_target, n_max, DEFAULT_SNAP_BOUND)
}

pub fn commensurate_with_bound(drift: f64, hbar_target: f64, n_max: u32, bound: f64) -> Result<PlanckSpec> {
    if !(drift > 0.0) || !(hbar_target > 0.0) || n_max == 0 {
        return Err(Error::InvalidArgument(format!(
            "commensurate needs drift > 0, hbar > 0, n_max > 0 (got {drift}, {hbar_target}, {n_max})"
        )));
    }
    let ratio = drift / hbar_target;
    let mut best: Option<(f64, i64, u32)> = None;
    for n in 1..=n_max {
        let m = (ratio * f64::from(n)).round() as i64;
        if m <= 0 || gcd(m, i64::from(n)) != 1 {
            continue;
        }
        let hbar = drift * f64::from(n) / m as f64;
        let shift = (hbar - hbar_target).abs() / hbar_target;
        if best.is_none_or(|b| shift < b.0 - 1e-15) {
            best = Some((shift, m, n));
        }
    }
    match best {
        Some((shift, m, n)) if shift <= bound => PlanckSpec::from_ratio(drift, m, n, 0.0),
        _ => Err(Error::NoCommensurateValue { drift, hbar: hbar_target, n_max }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quarter_is_exact() {
        let p = commensurate(1.0, 0.25, 16).unwrap();
        assert_eq!((p.m, p.n), (4, 1));
        assert_eq!(p.hbar, 0.25);
        assert_eq!(p.reciprocal_integer(), Some(4));
    }

    #[test]
    fn inverse_eight_point_two() {
        let p = commensurate(1.0, 1.0 / 8.2, 16).unwrap();
        assert_eq!((p.m, p.n), (41, 5));
        assert!((p.inv_hbar() - 8.2).abs() < 1e-12);
        assert!((1.0 - p.m as f64 * p.hbar / f64::from(p.n)).abs() < 1e-12);
        assert_eq!(p.reciprocal_integer(), None);
    }

    #[test]
    fn irrational_ratio_fails_at_tight_bound() {
        let hbar = 1.0 / std::f64::consts::PI;
        let r = commensurate_with_bound(1.0, hbar, 16, 1e-5);
        assert!(matches!(r, Err(Error::NoCommensurateValue { .. })));
        // 22/7 is within the default bound
        let p = commensurate(1.0, hbar, 16).unwrap();
        assert_eq!((p.m, p.n), (22, 7));
    }

    #[test]
    fn non_unit_drift() {
        let p = commensurate(0.7, 1.0 / 8.0, 16).unwrap();
        assert_eq!((p.m, p.n), (28, 5));
        assert!((0.7 - p.m as f64 * p.hbar / f64::from(p.n)).abs() < 1e-12);
    }
}
