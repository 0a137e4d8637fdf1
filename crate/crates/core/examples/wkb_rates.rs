//! Barrier-penetration estimates from the Wannier-Stark pendulum, at the well
//! bottom and at the harmonic ground-state energy.

use qam_decay::classical::{ws_separatrix, MapParams, MapSign, WSPendulum, DEFAULT_QUAD_TOL};
use qam_decay::tunneling::{wkb_rate, EnergyChoice};

fn main() -> qam_decay::Result<()> {
    let params = MapParams::new(0.8, 0.7, MapSign::Minus)?;
    let pend = WSPendulum::from_map(&params);
    let sep = ws_separatrix(&pend, DEFAULT_QUAD_TOL)?;
    println!("separatrix area {:.4}", sep.enclosed_area);
    for inv in [6.0, 8.0, 10.0, 12.0, 16.0] {
        let b = wkb_rate(&pend, 1.0 / inv, EnergyChoice::WellBottom)?;
        match wkb_rate(&pend, 1.0 / inv, EnergyChoice::HarmonicGround) {
            Ok(g) => println!("1/hbar {inv:4}: bottom {b:.3e}  ground {g:.3e}"),
            Err(e) => println!("1/hbar {inv:4}: bottom {b:.3e}  ground: {e}"),
        }
    }
    Ok(())
}
