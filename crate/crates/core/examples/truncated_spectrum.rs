//! Island resonances of the truncated Floquet operator at hbar = 1/4,
//! stabilized over growing bases and labelled by their mean action.

use qam_decay::classical::{MapParams, MapSign};
use qam_decay::harness::labelled_island_states;
use qam_decay::spectral::{SweepOptions, SweepSetup};

fn main() -> qam_decay::Result<()> {
    let params = MapParams::new(2.5, 1.0, MapSign::Minus)?;
    let setup = SweepSetup::new(params, SweepOptions { nu_sequence: vec![256, 512], ..Default::default() })?;
    let p = setup.planck(4.0)?;
    println!("hbar = {} (m/n = {}/{}), island area {:.3}", p.hbar, p.m, p.n, setup.island_area);
    println!("{:>6} {:>12} {:>9} {:>8}", "label", "gamma", "w", "overlap");
    for [gamma, w, label, overlap] in labelled_island_states(&setup, &p, 0.2)? {
        println!("{label:6.2} {gamma:12.4e} {w:9.4} {overlap:8.3}");
    }
    Ok(())
}
