//! Measures the 4:1 chain inside the k = 2.5 island and fits its pendulum
//! parameters. Pass the grid step as the first argument (default 0.02).

use qam_decay::classical::{
    find_chain_seeds, find_fixed_point, fit_resonance_params, forward_resonance_observables, measure_chain, MapParams,
    MapSign,
};

fn main() -> qam_decay::Result<()> {
    let step: f64 = std::env::args().nth(1).map_or(0.02, |s| s.parse().expect("grid step"));
    let params = MapParams::new(2.5, 1.0, MapSign::Minus)?;
    let (center, _, _) = find_fixed_point(&params)?;
    let (inner, outer) = find_chain_seeds(&params, center, 4, 1, 0.05, 2000)?;
    println!("seeds at dtheta {:.2} and {:.2}", inner.theta - center.theta, outer.theta - center.theta);
    let m = measure_chain(&params, center, 4, 1, inner, outer, step, 2000)?;
    println!("S+ = {:.4}  S- = {:.4}  trace = {:.5}", m.s_plus, m.s_minus, m.monodromy_trace);
    let chain = fit_resonance_params(m.s_plus, m.s_minus, m.monodromy_trace, 4, 1)?;
    println!("fit:    I = {:.4}  M = {:.4}  v = {:.4e}", chain.i_rs, chain.mass, chain.coupling);

    // what the quoted parameters would give
    let (sp, sm, tr) = forward_resonance_observables(4, 0.43, 3.866, 7.275e-4);
    println!("quoted: S+ = {sp:.4}  S- = {sm:.4}  trace = {tr:.5}");
    Ok(())
}
