//! Ladder of states coupled by the 4:1 chain: its length, spectrum and the
//! decay rate of the innermost state with and without the chain coupling.

use qam_decay::classical::ResonanceChain;
use qam_decay::tunneling::{
    build_ladder, continuum_rate, ladder_eigensolve, rat_rate, unperturbed_diagonal, xi0_explicit, N0Choice,
};

fn main() -> qam_decay::Result<()> {
    let chain = ResonanceChain::from_params(4, 1, 0.43, 3.866, 7.275e-4);
    let area = 5.757;
    for inv in [6.0, 8.1, 10.0, 14.0, 19.0] {
        let spec = build_ladder(&chain, 1.0 / inv, area, N0Choice::Innermost(1))?;
        if spec.length == 0 {
            println!("1/hbar {inv:5}: single rung, nothing to tunnel through");
            continue;
        }
        let d = unperturbed_diagonal(&spec);
        let flat = rat_rate(&ladder_eigensolve(&d, 0.0)?, &spec, 0)?;
        let coupled = ladder_eigensolve(&d, chain.coupling)?;
        let full = rat_rate(&coupled, &spec, 0)?;
        let (xi_c, cont) = continuum_rate(&spec)?;
        println!(
            "1/hbar {inv:5}: L = {}  unperturbed {flat:.3e}  perturbed {full:.3e}  continuum {cont:.3e}  xi {:.3} / {xi_c:.3}",
            spec.length,
            xi0_explicit(&spec)?
        );
        println!("    rung energies {:?}", coupled.eigenvalues.iter().map(|e| format!("{e:.4}")).collect::<Vec<_>>());
    }
    Ok(())
}
