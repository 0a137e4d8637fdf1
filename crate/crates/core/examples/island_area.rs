//! Area of the accelerator-mode island, by flood fill of non-escaping cells.

use qam_decay::classical::{find_fixed_point, island_cells, MapParams, MapSign, DEFAULT_ESCAPE_HORIZON};

fn main() -> qam_decay::Result<()> {
    for (k, d) in [(0.8, 0.7), (2.5, 1.0), (std::f64::consts::PI, 0.5)] {
        let params = MapParams::new(k, d, MapSign::Minus)?;
        let (c, _, _) = find_fixed_point(&params)?;
        for step in [0.04, 0.02] {
            let cells = island_cells(&params, c, step, DEFAULT_ESCAPE_HORIZON)?;
            let (t0, t1, j0, j1) = cells.bounding_box();
            println!("k={k:.4} d={d} step={step}: area {:.4}, box theta [{t0:.3}, {t1:.3}] J [{j0:.3}, {j1:.3}]", cells.area);
        }
    }
    Ok(())
}
