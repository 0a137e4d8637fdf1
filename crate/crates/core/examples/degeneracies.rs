//! Where the unperturbed ladder becomes exactly degenerate, for every
//! innermost state of the 4:1 chain.

use qam_decay::classical::ResonanceChain;
use qam_decay::tunneling::degeneracy_points;

fn main() {
    let chain = ResonanceChain::from_params(4, 1, 0.43, 3.866, 7.275e-4);
    for n_i in 0..4 {
        let pts: Vec<String> = degeneracy_points(&chain, n_i, 3, 5.757)
            .iter()
            .map(|d| format!("{:.3}{}", d.inv_hbar, if d.valid { "" } else { " (ladder too short)" }))
            .collect();
        println!("n_i = {n_i}: {}", pts.join(", "));
    }
}
