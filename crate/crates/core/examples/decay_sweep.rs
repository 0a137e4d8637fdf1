//! Numerical and theoretical decay curves over a few values of 1/hbar, and
//! the ratio table between them.

use qam_decay::classical::{MapParams, MapSign};
use qam_decay::curve::Method;
use qam_decay::harness::compare_methods;
use qam_decay::spectral::{sweep_decay, Selection, SweepOptions, SweepSetup};
use qam_decay::tunneling::{theory_curve, TheoryInputs};

fn main() -> qam_decay::Result<()> {
    let params = MapParams::new(0.8, 0.7, MapSign::Minus)?;
    let setup = SweepSetup::new(params, SweepOptions::default())?;
    let grid = [9.0, 10.0, 11.0, 12.0];
    let numeric = sweep_decay(&setup, &grid, Method::Truncated, Selection::MinimalIsland);
    let inputs = TheoryInputs::new(params, None, setup.island_area);
    let wkb = theory_curve(&inputs, &grid, Method::WkbGround);
    for f in numeric.failures.iter().chain(&wkb.failures) {
        println!("{} failed at {}: {}", f.method, f.inv_hbar_requested, f.message);
    }
    print!("{}", numeric.to_csv_string()?);
    let cmp = compare_methods(&[numeric, wkb], 10.0)?;
    for r in &cmp.rows {
        println!("1/hbar {:.3}: spread {:.2}", r.inv_hbar, r.spread);
    }
    Ok(())
}
