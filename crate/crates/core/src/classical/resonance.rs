//! Parameters of an `r:s` resonance chain inferred from phase-space areas
//! and the monodromy trace of its stable periodic orbit.
//!
//! The chain is modelled by the pendulum `(I - I_rs)^2 / 2M + 2v cos(r phi)`.
//! Its separatrices enclose areas `S+ + S- = 4 pi I_rs` and
//! `S+ - S- = 16 sqrt(2 M v)`, and the stable orbit has monodromy trace
//! `2 cos(r^2 sqrt(2v/M))`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonanceChain {
    pub r: u32,
    pub s: u32,
    pub i_rs: f64,
    pub mass: f64,
    pub coupling: f64,
    pub s_plus: f64,
    pub s_minus: f64,
    pub monodromy_trace: f64,
}

impl ResonanceChain {
    /// Chain from known pendulum parameters; the observables are filled in
    /// from the forward formulas.
    pub fn from_params(r: u32, s: u32, i_rs: f64, mass: f64, coupling: f64) -> Self {
        let (s_plus, s_minus, monodromy_trace) = forward_resonance_observables(r, i_rs, mass, coupling);
        Self { r, s, i_rs, mass, coupling, s_plus, s_minus, monodromy_trace }
    }

    /// Small-oscillation frequency `r sqrt(2v/M)` of the chain pendulum.
    pub fn chain_freq(&self) -> f64 {
        if self.mass == 0.0 {
            return 0.0;
        }
        f64::from(self.r) * (2.0 * self.coupling / self.mass).sqrt()
    }

    /// Relative mismatch of the two area relations against the stored fields.
    pub fn consistency_residual(&self) -> f64 {
        let sum = (self.s_plus + self.s_minus - 4.0 * PI * self.i_rs).abs() / (4.0 * PI * self.i_rs);
        let diff_model = 16.0 * (2.0 * self.mass * self.coupling).sqrt();
        let diff = (self.s_plus - self.s_minus - diff_model).abs() / diff_model.max(1e-300);
        sum.max(if diff_model == 0.0 { 0.0 } else { diff })
    }
}

/// `(S+, S-, trace)` for a chain with the given pendulum parameters.
pub fn forward_resonance_observables(r: u32, i_rs: f64, mass: f64, coupling: f64) -> (f64, f64, f64) {
    let half_gap = 8.0 * (2.0 * mass * coupling).sqrt();
    let r2 = f64::from(r * r);
    let trace = 2.0 * (r2 * (2.0 * coupling / mass).sqrt()).cos();
    (2.0 * PI * i_rs + half_gap, 2.0 * PI * i_rs - half_gap, trace)
}

/// Solves the area and monodromy relations for `I_rs`, `M` and `v`.
///
/// Equal areas give a degenerate chain with `v = 0` and `M = 0`.
pub fn fit_resonance_params(
    s_plus: f64,
    s_minus: f64,
    monodromy_trace: f64,
    r: u32,
    s: u32,
) -> Result<ResonanceChain> {
    if r == 0 {
        return Err(Error::InconsistentInputs("r must be positive".into()));
    }
    if s_plus - s_minus < 0.0 || s_minus <= 0.0 {
        return Err(Error::InconsistentInputs(format!(
            "need S+ >= S- > 0, got S+ = {s_plus}, S- = {s_minus}"
        )));
    }
    let half = monodromy_trace / 2.0;
    if !(-1.0..=1.0).contains(&half) {
        return Err(Error::InconsistentInputs(format!(
            "monodromy trace {monodromy_trace} outside [-2, 2]"
        )));
    }
    let i_rs = (s_plus + s_minus) / (4.0 * PI);
    // p = sqrt(2 M v), q = sqrt(2 v / M)
    let p = (s_plus - s_minus) / 16.0;
    let q = half.acos() / f64::from(r * r);
    let (coupling, mass) = if p == 0.0 {
        (0.0, 0.0)
    } else if q == 0.0 {
        return Err(Error::InconsistentInputs("parabolic orbit: M would be infinite".into()));
    } else {
        (0.5 * p * q, p / q)
    };
    Ok(ResonanceChain { r, s, i_rs, mass, coupling, s_plus, s_minus, monodromy_trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn symmetric_areas_degenerate_chain() {
        let c = fit_resonance_params(2.0, 2.0, 1.5, 4, 1).unwrap();
        assert!((c.i_rs - 2.0 / (2.0 * PI)).abs() < 1e-15);
        assert_eq!(c.coupling, 0.0);
    }

    #[test]
    fn reference_chain_round_trip() {
        let (sp, sm, tr) = forward_resonance_observables(4, 0.43, 3.866, 7.275e-4);
        let c = fit_resonance_params(sp, sm, tr, 4, 1).unwrap();
        assert!((c.i_rs - 0.43).abs() < 1e-10);
        assert!((c.mass - 3.866).abs() < 1e-10 * 3.866);
        assert!((c.coupling - 7.275e-4).abs() < 1e-10 * 7.275e-4);
        assert!(c.consistency_residual() < 1e-12);
        // trace relation from the chain frequency
        assert!((tr - 2.0 * (4.0 * c.chain_freq()).cos()).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(fit_resonance_params(1.0, 2.0, 1.0, 4, 1).is_err());
        assert!(fit_resonance_params(3.0, 2.0, 2.5, 4, 1).is_err());
        assert!(fit_resonance_params(3.0, 2.0, -2.01, 4, 1).is_err());
    }

    #[test]
    fn json_is_flat() {
        let c = ResonanceChain::from_params(4, 1, 0.43, 3.866, 7.275e-4);
        let v: serde_json::Value = serde_json::to_value(c).unwrap();
        let keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        for k in ["r", "s", "i_rs", "mass", "coupling", "s_plus", "s_minus", "monodromy_trace"] {
            assert!(keys.contains(&k.to_string()));
        }
        assert!(v.as_object().unwrap().values().all(|x| x.is_number()));
    }

    proptest! {
        #[test]
        fn fit_inverts_forward(i_rs in 0.05f64..2.0, mass in 0.2f64..10.0, coupling in 1e-8f64..1e-2, r in 2u32..12) {
            // keep r^2 sqrt(2v/M) inside (0, pi) so arccos is single-valued
            let q = f64::from(r * r) * (2.0 * coupling / mass).sqrt();
            prop_assume!(q < 3.0);
            let (sp, sm, tr) = forward_resonance_observables(r, i_rs, mass, coupling);
            prop_assume!(sm > 0.0);
            let c = fit_resonance_params(sp, sm, tr, r, 1).unwrap();
            prop_assert!((c.i_rs - i_rs).abs() <= 1e-10 * i_rs.max(1.0));
            prop_assert!((c.mass - mass).abs() <= 1e-8 * mass);
            prop_assert!((c.coupling - coupling).abs() <= 1e-8 * coupling);
        }
    }
}
