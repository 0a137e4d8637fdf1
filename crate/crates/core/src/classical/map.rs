//! The kicked, accelerated rotor map and its linearisation.
//!
//! One step with branch sign `s = ±1` is
//!
//! ```text
//! theta' = theta + s * J            (mod 2pi)
//! J'     = J + kick * sin(theta') + s * drift
//! ```
//!
//! The angle is updated first and the new angle enters the kick. The same
//! ordering is used by the tangent map, the quantum operators and every
//! orbit search in the crate.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which of the two branches of the map is iterated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MapSign {
    Plus,
    Minus,
}

impl MapSign {
    pub fn as_f64(self) -> f64 {
        match self {
            MapSign::Plus => 1.0,
            MapSign::Minus => -1.0,
        }
    }
}

impl std::str::FromStr for MapSign {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plus" | "+" => Ok(MapSign::Plus),
            "minus" | "-" => Ok(MapSign::Minus),
            other => Err(Error::InvalidArgument(format!("map sign `{other}`"))),
        }
    }
}

/// Kick strength, drift `2*pi*Omega` and branch of the map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapParams {
    pub kick: f64,
    pub drift: f64,
    pub sign: MapSign,
}

/// A point of phase space. `theta` lives in `[0, 2pi)`, `action_j` on the line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseState {
    pub theta: f64,
    pub action_j: f64,
}

/// Row-major 2x2 real matrix.
pub type Mat2 = [[f64; 2]; 2];

pub fn wrap_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// Wraps into `[-pi, pi)`.
pub fn wrap_centered(x: f64) -> f64 {
    (x + PI).rem_euclid(TAU) - PI
}

pub fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    [
        [
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
        ],
        [
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        ],
    ]
}

impl PhaseState {
    pub fn new(theta: f64, action_j: f64) -> Self {
        Self { theta: wrap_angle(theta), action_j }
    }
}

impl MapParams {
    pub fn new(kick: f64, drift: f64, sign: MapSign) -> Result<Self> {
        if !(kick >= 0.0) || !(drift >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "kick and drift must be non-negative, got {kick}, {drift}"
            )));
        }
        Ok(Self { kick, drift, sign })
    }

    pub fn step(&self, s: PhaseState) -> PhaseState {
        let sg = self.sign.as_f64();
        let theta = wrap_angle(s.theta + sg * s.action_j);
        let action_j = s.action_j + self.kick * theta.sin() + sg * self.drift;
        PhaseState { theta, action_j }
    }

    /// One step together with the Jacobian `d(theta', J') / d(theta, J)`.
    pub fn step_with_tangent(&self, s: PhaseState) -> (PhaseState, Mat2) {
        let sg = self.sign.as_f64();
        let next = self.step(s);
        let kc = self.kick * next.theta.cos();
        (next, [[1.0, sg], [kc, 1.0 + sg * kc]])
    }

    pub fn tangent(&self, s: PhaseState) -> Mat2 {
        self.step_with_tangent(s).1
    }
}

/// Iterates the map; the returned sequence starts with `state` and has
/// `steps + 1` entries.
pub fn iterate_map(state: PhaseState, params: &MapParams, steps: usize) -> Vec<PhaseState> {
    let mut out = Vec::with_capacity(steps + 1);
    let mut s = PhaseState::new(state.theta, state.action_j);
    out.push(s);
    for _ in 0..steps {
        s = params.step(s);
        out.push(s);
    }
    out
}

/// Period-1 fixed point on the torus with `J* = 0`.
///
/// Returns the stable solution of `kick * sin(theta) = -sign * drift` when one
/// exists, otherwise the solution with the smaller `|trace|`.
pub fn find_fixed_point(params: &MapParams) -> Result<(PhaseState, f64, bool)> {
    let mut best: Option<(PhaseState, f64)> = None;
    for (state, trace) in fixed_points(params)? {
        let better = match &best {
            None => true,
            Some((_, t)) => (trace.abs() < 2.0 && t.abs() >= 2.0) || trace.abs() < t.abs(),
        };
        if better {
            best = Some((state, trace));
        }
    }
    let (state, trace) = best.expect("two candidates");
    Ok((state, trace, trace.abs() < 2.0))
}

/// Both period-1 fixed points with `J* = 0` and their tangent-map traces.
pub fn fixed_points(params: &MapParams) -> Result<Vec<(PhaseState, f64)>> {
    if params.kick < params.drift || params.kick == 0.0 {
        return Err(Error::NoFixedPoint { kick: params.kick, drift: params.drift });
    }
    let sg = params.sign.as_f64();
    let ratio = (-sg * params.drift / params.kick).clamp(-1.0, 1.0);
    let t1 = ratio.asin();
    let mut roots = vec![wrap_angle(t1)];
    let t2 = wrap_angle(PI - t1);
    if (t2 - roots[0]).abs() > 1e-14 {
        roots.push(t2);
    }
    Ok(roots
        .into_iter()
        .map(|theta| {
            let st = PhaseState { theta, action_j: 0.0 };
            let m = params.tangent(st);
            (st, m[0][0] + m[1][1])
        })
        .collect())
}

/// Point cloud of the orbits of `seeds`, with `J` reduced into `[-pi, pi)`.
/// Each point is labelled by the index of its seed.
pub fn phase_portrait(
    params: &MapParams,
    seeds: &[PhaseState],
    steps: usize,
) -> Result<Vec<(f64, f64, usize)>> {
    if seeds.is_empty() {
        return Err(Error::InvalidArgument("phase portrait needs at least one seed".into()));
    }
    let mut pts = Vec::with_capacity(seeds.len() * (steps + 1));
    for (label, seed) in seeds.iter().enumerate() {
        for s in iterate_map(*seed, params, steps) {
            pts.push((s.theta, wrap_centered(s.action_j), label));
        }
    }
    Ok(pts)
}

/// Difference `b - a` on the torus, angle and action both reduced to `[-pi, pi)`.
pub fn torus_delta(a: PhaseState, b: PhaseState) -> (f64, f64) {
    (wrap_centered(b.theta - a.theta), wrap_centered(b.action_j - a.action_j))
}

/// Trace of the product of `r` tangent maps along the orbit of `orbit`.
pub fn monodromy_trace(params: &MapParams, orbit: PhaseState, r: usize) -> Result<f64> {
    let (end, m) = monodromy(params, orbit, r);
    let (dt, dj) = torus_delta(orbit, end);
    let residual = dt.hypot(dj);
    if residual > 1e-8 {
        return Err(Error::NotPeriodic { period: r, residual });
    }
    Ok(m[0][0] + m[1][1])
}

/// End point and tangent map of `r` steps from `start`.
pub fn monodromy(params: &MapParams, start: PhaseState, r: usize) -> (PhaseState, Mat2) {
    let mut m: Mat2 = [[1.0, 0.0], [0.0, 1.0]];
    let mut s = start;
    for _ in 0..r {
        let (next, t) = params.step_with_tangent(s);
        m = mat_mul(&t, &m);
        s = next;
    }
    (s, m)
}

/// Damped Newton search for a period-`r` point of the torus map near `seed`.
/// Converges when the closure residual drops below `tol`.
pub fn find_periodic_orbit(
    params: &MapParams,
    seed: PhaseState,
    r: usize,
    tol: f64,
) -> Result<PhaseState> {
    let mut x = seed;
    let resid = |x: PhaseState| {
        let (end, m) = monodromy(params, x, r);
        let (dt, dj) = torus_delta(x, end);
        (dt, dj, m)
    };
    let (mut dt, mut dj, mut m) = resid(x);
    for _ in 0..100 {
        let norm = dt.hypot(dj);
        if norm < tol {
            return Ok(x);
        }
        // solve (M - I) delta = -(F(x) - x)
        let a = m[0][0] - 1.0;
        let b = m[0][1];
        let c = m[1][0];
        let d = m[1][1] - 1.0;
        let det = a * d - b * c;
        if det.abs() < 1e-300 {
            break;
        }
        let sx = (-dt * d + b * dj) / det;
        let sy = (c * dt - a * dj) / det;
        let mut lambda = 1.0;
        loop {
            let trial = PhaseState::new(x.theta + lambda * sx, x.action_j + lambda * sy);
            let (tt, tj, tm) = resid(trial);
            if tt.hypot(tj) < norm || lambda < 1e-6 {
                x = trial;
                dt = tt;
                dj = tj;
                m = tm;
                break;
            }
            lambda *= 0.5;
        }
    }
    let residual = dt.hypot(dj);
    if residual < tol {
        Ok(x)
    } else {
        Err(Error::NotPeriodic { period: r, residual })
    }
}
