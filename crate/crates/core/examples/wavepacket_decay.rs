//! Coherent state at the island centre, propagated with the split-step
//! scheme. The probability left in the island window decays exponentially.

use qam_decay::classical::{MapParams, MapSign};
use qam_decay::quantum::{coherent_state, fit_exponential_tail, propagate, MomentumGrid, PropagateOptions};
use qam_decay::spectral::{SweepOptions, SweepSetup};

fn main() -> qam_decay::Result<()> {
    let params = MapParams::new(2.5, 1.0, MapSign::Minus)?;
    let setup = SweepSetup::new(params, SweepOptions::default())?;
    let p = setup.planck(4.0)?;
    let size = 1 << 14;
    let grid = MomentumGrid::around(setup.center.action_j, p.hbar, size, 0.875);
    let psi = coherent_state(setup.center, &p, grid, 1.0)?;
    let steps = 2000;
    let run = propagate(&psi, &params, &p, steps, &PropagateOptions::new(setup.window.j_range, size))?;
    for pr in run.probes.iter().step_by(250) {
        println!("t = {:5}  P = {:.6}  norm = {:.3e}", pr.t, pr.window_prob, pr.norm);
    }
    let series: Vec<(usize, f64)> = run.probes.iter().map(|pr| (pr.t, pr.window_prob)).collect();
    let (rate, rms) = fit_exponential_tail(&series, steps / 2)?;
    println!("tail rate {rate:.4e} (per kick {:.4e}), rms {rms:.1e}", rate / 4.0);
    Ok(())
}
