//! Continuation of two eigenvalue branches across a `1/hbar` sweep and
//! detection of their avoided crossings.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Candidate eigenvalues `(gamma, w)` at one sweep point. The second
/// coordinate is usually the quasienergy, defined modulo `w_period`, but any
/// smooth label such as the mean action works with an infinite period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossingSlice {
    pub inv_hbar: f64,
    pub w_period: f64,
    pub candidates: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossingOptions {
    /// Compare rates on a log scale.
    pub log_gamma: bool,
    /// Quasienergy differences are divided by this before entering the distance.
    pub w_scale: f64,
    /// A match is ambiguous when the runner-up is closer than this times the best.
    pub ambiguity_ratio: f64,
    /// A local minimum must undercut both neighbours by this fraction.
    pub min_dip: f64,
}

impl Default for CrossingOptions {
    fn default() -> Self {
        Self { log_gamma: true, w_scale: 1.0, ambiguity_ratio: 3.0, min_dip: 0.05 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackedPoint {
    pub inv_hbar: f64,
    pub gamma: f64,
    /// Quasienergy as given in the slice.
    pub w: f64,
    /// Quasienergy continued across the period ambiguity.
    pub w_unwrapped: f64,
    pub candidate: usize,
    pub ambiguous: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossingMarker {
    /// Parabolic estimate of the closest approach.
    pub inv_hbar: f64,
    pub index: usize,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossingTrack {
    pub branches: [Vec<TrackedPoint>; 2],
    /// Distance between the branches at every slice.
    pub distance: Vec<f64>,
    pub markers: Vec<CrossingMarker>,
}

fn wrap(x: f64, period: f64) -> f64 {
    if !(period > 0.0) || !period.is_finite() {
        return x;
    }
    x - period * (x / period).round()
}

fn g_coord(gamma: f64, opts: &CrossingOptions) -> f64 {
    if opts.log_gamma { gamma.max(1e-300).ln() } else { gamma }
}

fn dist(g: f64, w: f64, cand: (f64, f64), period: f64, opts: &CrossingOptions) -> f64 {
    let dg = g_coord(cand.0, opts) - g;
    let dw = wrap(cand.1 - w, period) / opts.w_scale;
    dg.hypot(dw)
}

/// Linear extrapolation of `(g, w_unwrapped)` from the last two points.
fn predict(branch: &[TrackedPoint], x: f64, opts: &CrossingOptions) -> (f64, f64) {
    let last = branch[branch.len() - 1];
    let (g1, w1) = (g_coord(last.gamma, opts), last.w_unwrapped);
    if branch.len() < 2 {
        return (g1, w1);
    }
    let prev = branch[branch.len() - 2];
    let t = (x - last.inv_hbar) / (last.inv_hbar - prev.inv_hbar);
    let g0 = g_coord(prev.gamma, opts);
    (g1 + t * (g1 - g0), w1 + t * (w1 - prev.w_unwrapped))
}

/// Follows the branches that start at candidates `start` of the first slice
/// and marks strict local minima of their separation.
pub fn track_crossing(slices: &[CrossingSlice], start: [usize; 2], opts: &CrossingOptions) -> Result<CrossingTrack> {
    if slices.len() < 3 {
        return Err(Error::InvalidArgument("crossing tracking needs at least three sweep points".into()));
    }
    if let Some(s) = slices.iter().find(|s| s.candidates.len() < 2) {
        return Err(Error::InvalidArgument(format!("fewer than two candidates at 1/hbar = {}", s.inv_hbar)));
    }
    let first = &slices[0];
    if start[0] == start[1] || start.iter().any(|&i| i >= first.candidates.len()) {
        return Err(Error::InvalidArgument(format!("invalid starting candidates {start:?}")));
    }
    let mut branches: [Vec<TrackedPoint>; 2] = start.map(|i| {
        let (gamma, w) = first.candidates[i];
        vec![TrackedPoint { inv_hbar: first.inv_hbar, gamma, w, w_unwrapped: w, candidate: i, ambiguous: false }]
    });
    for s in &slices[1..] {
        let preds = [predict(&branches[0], s.inv_hbar, opts), predict(&branches[1], s.inv_hbar, opts)];
        let d: Vec<Vec<f64>> = preds
            .iter()
            .map(|&(g, w)| s.candidates.iter().map(|&c| dist(g, w, c, s.w_period, opts)).collect())
            .collect();
        // best joint assignment of distinct candidates
        let n = s.candidates.len();
        let (mut a, mut b, mut best) = (0, 1, f64::INFINITY);
        for i in 0..n {
            for j in (0..n).filter(|&j| j != i) {
                let c = d[0][i] + d[1][j];
                if c < best {
                    (a, b, best) = (i, j, c);
                }
            }
        }
        for (k, idx) in [a, b].into_iter().enumerate() {
            let mut sorted = d[k].clone();
            sorted.sort_by(f64::total_cmp);
            let ambiguous = sorted[1] < opts.ambiguity_ratio * sorted[0];
            let (gamma, w) = s.candidates[idx];
            let w_unwrapped = preds[k].1 + wrap(w - preds[k].1, s.w_period);
            branches[k].push(TrackedPoint { inv_hbar: s.inv_hbar, gamma, w, w_unwrapped, candidate: idx, ambiguous });
        }
    }
    let distance: Vec<f64> = branches[0]
        .iter()
        .zip(&branches[1])
        .zip(slices)
        .map(|((p, q), s)| dist(g_coord(p.gamma, opts), p.w, (q.gamma, q.w), s.w_period, opts))
        .collect();
    let mut markers = Vec::new();
    for i in 1..distance.len() - 1 {
        let (l, c, r) = (distance[i - 1], distance[i], distance[i + 1]);
        if c < (1.0 - opts.min_dip) * l.min(r) {
            let xs = [slices[i - 1].inv_hbar, slices[i].inv_hbar, slices[i + 1].inv_hbar];
            markers.push(CrossingMarker { inv_hbar: parabola_vertex(xs, [l, c, r]), index: i, distance: c });
        }
    }
    Ok(CrossingTrack { branches, distance, markers })
}

/// Abscissa of the vertex of the parabola through three points, clamped to
/// the outer two.
fn parabola_vertex(x: [f64; 3], y: [f64; 3]) -> f64 {
    let d1 = (y[1] - y[0]) / (x[1] - x[0]);
    let d2 = (y[2] - y[1]) / (x[2] - x[1]);
    let curv = (d2 - d1) / (x[2] - x[0]);
    if !(curv > 0.0) {
        return x[1];
    }
    // y' = d1 + curv (2x - x0 - x1)
    (0.5 * (x[0] + x[1] - d1 / curv)).clamp(x[0], x[2])
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64 as C64;

    fn opts() -> CrossingOptions {
        CrossingOptions { log_gamma: false, ..Default::default() }
    }

    // eigenvalues of [[e, g], [g, -e]] with e = (x - x0)(1 + 0.2i), shifted so
    // that gamma = 1 - Im E stays positive
    fn two_level(x: f64, x0: f64, g: f64) -> [(f64, f64); 2] {
        let e = C64::new(x - x0, 0.0) * C64::new(1.0, 0.2);
        let root = (e * e + g * g).sqrt();
        [root, -root].map(|z| (1.0 - z.im, z.re + 0.3 * x))
    }

    #[test]
    fn two_level_closest_approach() {
        let x0 = 8.137;
        let slices: Vec<CrossingSlice> = (0..21)
            .map(|i| {
                let x = 7.0 + 0.1 * i as f64;
                let mut c = two_level(x, x0, 0.08).to_vec();
                c.push((5.0, 2.0));
                CrossingSlice { inv_hbar: x, w_period: f64::INFINITY, candidates: c }
            })
            .collect();
        let t = track_crossing(&slices, [0, 1], &opts()).unwrap();
        assert_eq!(t.markers.len(), 1);
        assert!((t.markers[0].inv_hbar - x0).abs() < 0.01, "{:?}", t.markers);
        // branches never swap onto each other or the distractor
        assert!(t.branches[0].iter().all(|p| p.candidate == 0));
        assert!(t.branches[1].iter().all(|p| p.candidate == 1));
    }

    #[test]
    fn separated_branches_have_no_marker() {
        let slices: Vec<CrossingSlice> = (0..15)
            .map(|i| {
                let x = i as f64;
                CrossingSlice { inv_hbar: x, w_period: f64::INFINITY, candidates: vec![(1.0, 0.1 * x), (2.0, 0.1 * x + 0.5)] }
            })
            .collect();
        let t = track_crossing(&slices, [0, 1], &opts()).unwrap();
        assert!(t.markers.is_empty());
        assert!(t.distance.iter().all(|d| (d - 0.5f64.hypot(1.0)).abs() < 1e-12));
    }

    #[test]
    fn quasienergy_is_continued_through_the_period() {
        let period = 1.0;
        let slices: Vec<CrossingSlice> = (0..12)
            .map(|i| {
                let x = i as f64;
                let wa = wrap(0.3 * x, period);
                let wb = wrap(0.3 * x + 0.5, period);
                CrossingSlice { inv_hbar: x, w_period: period, candidates: vec![(1e-5, wb), (1e-3, wa)] }
            })
            .collect();
        let t = track_crossing(&slices, [1, 0], &CrossingOptions::default()).unwrap();
        let last = t.branches[0].last().unwrap();
        assert!((last.w_unwrapped - 3.3).abs() < 1e-12);
        assert!(t.branches[0].iter().all(|p| p.gamma == 1e-3 && !p.ambiguous));
    }

    #[test]
    fn rejects_short_sweeps() {
        let s = CrossingSlice { inv_hbar: 1.0, w_period: 1.0, candidates: vec![(1.0, 0.0), (2.0, 0.0)] };
        assert!(track_crossing(&[s.clone(), s.clone()], [0, 1], &opts()).is_err());
        assert!(track_crossing(&[s.clone(), s.clone(), s], [0, 0], &opts()).is_err());
    }
}
