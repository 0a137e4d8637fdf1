//! Resonances that stay put as the scaling parameter changes, compared with
//! the truncated-basis island state.

use qam_decay::classical::{MapParams, MapSign};
use qam_decay::curve::Method;
use qam_decay::spectral::{decay_point, scan_rho, Selection, SweepOptions, SweepSetup, DEFAULT_RHO_GRID};

fn main() -> qam_decay::Result<()> {
    let params = MapParams::new(2.5, 1.0, MapSign::Minus)?;
    let setup = SweepSetup::new(params, SweepOptions::default())?;
    let p = setup.planck(4.0)?;
    let scan = scan_rho(&params, &p, &DEFAULT_RHO_GRID, 256, 1e-6)?;
    for (rho, s) in &scan.spectra {
        println!("rho {rho:.2}: {}", if s.is_some() { "accepted" } else { "rejected by the magnitude monitor" });
    }
    for r in scan.resonances.iter().take(6) {
        println!("gamma {:.4e}  w {:+.4}  seen at {} values of rho, spread {:.1e}", r.gamma, r.w, r.rhos.len(), r.spread);
    }
    let cs = decay_point(&setup, &p, Method::ComplexScaling, Selection::MinimalIsland)?;
    let tr = decay_point(&setup, &p, Method::Truncated, Selection::MinimalIsland)?;
    println!("island state: complex scaling {:.4e}, truncated {:.4e}", cs.gamma, tr.gamma);
    Ok(())
}
