//! Wannier-Stark WKB rates.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::classical::{ws_small_oscillation_frequency, ws_wkb_action, WSPendulum, DEFAULT_QUAD_TOL};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergyChoice {
    WellBottom,
    /// `hbar * omega0 / 2` above the bottom of the well.
    HarmonicGround,
}

/// Energy at which the barrier action is taken.
pub fn wkb_energy(p: &WSPendulum, hbar: f64, choice: EnergyChoice) -> Result<f64> {
    let e0 = p.bottom_energy()?;
    match choice {
        EnergyChoice::WellBottom => Ok(e0),
        EnergyChoice::HarmonicGround => {
            let e = e0 + 0.5 * hbar * ws_small_oscillation_frequency(p)?;
            let top = p.separatrix_energy()?;
            if e > top {
                return Err(Error::EnergyOutOfRange { energy: e, lo: e0, hi: top });
            }
            Ok(e)
        }
    }
}

/// `Gamma = (omega0 / 2 pi) exp(-2 S(E) / hbar)`, per kick.
pub fn wkb_rate(p: &WSPendulum, hbar: f64, choice: EnergyChoice) -> Result<f64> {
    if !(hbar > 0.0 && hbar.is_finite()) {
        return Err(Error::InvalidArgument(format!("hbar must be positive, got {hbar}")));
    }
    let omega0 = ws_small_oscillation_frequency(p)?;
    let s = ws_wkb_action(p, wkb_energy(p, hbar, choice)?, DEFAULT_QUAD_TOL)?;
    Ok(omega0 / (2.0 * PI) * (-2.0 * s / hbar).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bottom_slope_is_twice_the_action() {
        let p = WSPendulum::new(0.5, 0.7);
        let s = ws_wkb_action(&p, p.bottom_energy().unwrap(), DEFAULT_QUAD_TOL).unwrap();
        let g1 = wkb_rate(&p, 1.0 / 6.0, EnergyChoice::WellBottom).unwrap();
        let g2 = wkb_rate(&p, 1.0 / 11.0, EnergyChoice::WellBottom).unwrap();
        let slope = (g2.ln() - g1.ln()) / 5.0;
        assert!((slope + 2.0 * s).abs() < 1e-10 * s);
    }

    #[test]
    fn ground_rate_exceeds_bottom_rate() {
        let p = WSPendulum::new(0.7, 0.8);
        for inv in [6.0, 8.0, 16.0, 32.0] {
            let b = wkb_rate(&p, 1.0 / inv, EnergyChoice::WellBottom).unwrap();
            let g = wkb_rate(&p, 1.0 / inv, EnergyChoice::HarmonicGround).unwrap();
            assert!(g >= b);
        }
    }

    #[test]
    fn ground_energy_above_barrier_is_rejected() {
        let p = WSPendulum::new(0.7, 0.8);
        assert!(matches!(wkb_rate(&p, 5.0, EnergyChoice::HarmonicGround), Err(Error::EnergyOutOfRange { .. })));
        assert!(matches!(wkb_rate(&WSPendulum::new(1.0, 0.5), 0.1, EnergyChoice::WellBottom), Err(Error::NoIsland { .. })));
    }
}
