//! Fixed points of the map and a few orbits around the stable one.

use qam_decay::classical::{fixed_points, phase_portrait, MapParams, MapSign, PhaseState};

fn main() -> qam_decay::Result<()> {
    let params = MapParams::new(0.8, 0.7, MapSign::Minus)?;
    for (p, trace) in fixed_points(&params)? {
        println!("fixed point theta={:.6} J={:.1} trace={:.4} stable={}", p.theta, p.action_j, trace, trace.abs() < 2.0);
    }
    let center = fixed_points(&params)?.into_iter().find(|(_, t)| t.abs() < 2.0).unwrap().0;
    let seeds: Vec<PhaseState> = (1..=5).map(|i| PhaseState::new(center.theta + 0.15 * i as f64, 0.0)).collect();
    let pts = phase_portrait(&params, &seeds, 400)?;
    for s in 0..seeds.len() {
        let (lo, hi) = pts.iter().filter(|p| p.2 == s).fold((f64::MAX, f64::MIN), |(a, b), p| (a.min(p.1), b.max(p.1)));
        println!("orbit {s}: J in [{lo:.3}, {hi:.3}]");
    }
    Ok(())
}
