//! Follows the first and fifth island states of the k = 2.5 map through
//! their avoided crossing near 1/hbar = 8.2.

use qam_decay::classical::{MapParams, MapSign};
use qam_decay::harness::{crossing_slices, track_pair, Cache};
use qam_decay::spectral::{SweepOptions, SweepSetup};

fn main() -> qam_decay::Result<()> {
    let params = MapParams::new(2.5, 1.0, MapSign::Minus)?;
    let setup = SweepSetup::new(params, SweepOptions::default())?;
    let grid: Vec<f64> = (0..7).map(|i| 7.6 + 0.2 * i as f64).collect();
    let (slices, failures) = crossing_slices(&setup, &Cache::disabled(), &grid, 0.2);
    for f in failures {
        println!("skipped {f}");
    }
    let track = track_pair(&slices, 1, 4)?;
    for (i, (p, _)) in slices.iter().enumerate() {
        let (a, b) = (track.branches[0][i], track.branches[1][i]);
        println!(
            "1/hbar {:.2}: gamma {:.3e} (label {:.2})  gamma {:.3e} (label {:.2})  distance {:.2}",
            p.inv_hbar(),
            a.gamma,
            a.w,
            b.gamma,
            b.w,
            track.distance[i]
        );
    }
    for m in &track.markers {
        println!("closest approach at 1/hbar = {:.3}", m.inv_hbar);
    }
    Ok(())
}
