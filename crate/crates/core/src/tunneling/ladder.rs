//! Resonance-assisted tunneling along a ladder of nearly degenerate states
//! `n0 + N r` coupled to their neighbours by `v`.

use std::f64::consts::PI;

use faer::{Mat, Side};
use serde::{Deserialize, Serialize};

use crate::classical::{ws_action_of_energy, ws_energy_of_action, ResonanceChain, WSPendulum};
use crate::error::{Error, Result};

/// How the ladder offset `n0` is picked among the `r` integers closest to `n_rs`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum N0Choice {
    #[default]
    Nearest,
    /// Ladder whose innermost rung is state `n_i` (`n_i < r`).
    Innermost(u32),
    Fixed(i64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderSpec {
    pub chain: ResonanceChain,
    pub hbar: f64,
    pub island_area: f64,
    pub n0: i64,
    pub n_rs: f64,
    pub delta_n: f64,
    /// Innermost rung `N_*`.
    pub n_star_lo: i64,
    /// Gateway rung `N*`.
    pub n_star_hi: i64,
    pub length: i64,
}

impl LadderSpec {
    pub fn rungs(&self) -> impl Iterator<Item = i64> {
        self.n_star_lo..=self.n_star_hi
    }

    /// Quantum number `n0 + N r` of rung `N`.
    pub fn state_index(&self, rung: i64) -> i64 {
        self.n0 + rung * i64::from(self.chain.r)
    }

    /// Quantized action `(n + 1/2) hbar` of rung `N`.
    pub fn action(&self, rung: i64) -> f64 {
        (self.state_index(rung) as f64 + 0.5) * self.hbar
    }
}

/// `L = Int[(A / 2 pi hbar - 1) / r]`, negative when no state fits.
pub fn ladder_length(island_area: f64, hbar: f64, r: u32) -> i64 {
    ((island_area / (2.0 * PI * hbar) - 1.0) / f64::from(r)).floor() as i64
}

pub fn build_ladder(chain: &ResonanceChain, hbar: f64, island_area: f64, n0_choice: N0Choice) -> Result<LadderSpec> {
    if chain.r == 0 || !(hbar > 0.0) {
        return Err(Error::InvalidArgument(format!("ladder needs r > 0 and hbar > 0 (r = {}, hbar = {hbar})", chain.r)));
    }
    let length = ladder_length(island_area, hbar, chain.r);
    if length < 0 {
        return Err(Error::EmptyLadder { length });
    }
    let r = i64::from(chain.r);
    let n_rs = chain.i_rs / hbar - 0.5;
    let n0 = match n0_choice {
        N0Choice::Nearest => n_rs.round() as i64,
        N0Choice::Innermost(ni) => {
            let ni = i64::from(ni);
            if ni >= r {
                return Err(Error::InvalidArgument(format!("innermost state {ni} must be below r = {r}")));
            }
            // smallest n = ni (mod r) with n >= n_rs - r/2
            let lo = (n_rs - 0.5 * r as f64).ceil() as i64;
            lo + (ni - lo).rem_euclid(r)
        }
        N0Choice::Fixed(n0) => {
            if (n0 as f64 - n_rs).abs() > 0.5 * r as f64 {
                return Err(Error::InvalidArgument(format!("n0 = {n0} is not among the {r} integers closest to {n_rs}")));
            }
            n0
        }
    };
    let n_star_lo = -n0.div_euclid(r);
    Ok(LadderSpec {
        chain: *chain,
        hbar,
        island_area,
        n0,
        n_rs,
        delta_n: n0 as f64 - n_rs,
        n_star_lo,
        n_star_hi: n_star_lo + length,
        length,
    })
}

/// `W(N) = (hbar^2 / 2M) (r N + dn)^2` for `N = N_* ..= N*`.
pub fn unperturbed_diagonal(spec: &LadderSpec) -> Vec<f64> {
    let c = spec.hbar * spec.hbar / (2.0 * spec.chain.mass);
    let r = f64::from(spec.chain.r);
    spec.rungs().map(|n| c * (r * n as f64 + spec.delta_n).powi(2)).collect()
}

/// Diagonal from the pendulum tori: `e(I_N) - 2 pi hbar N s`, shifted so the
/// harmonic expansion about `I_rs` reproduces [`unperturbed_diagonal`].
pub fn semiclassical_diagonal(spec: &LadderSpec, pendulum: &WSPendulum) -> Result<Vec<f64>> {
    let (r, s) = (f64::from(spec.chain.r), f64::from(spec.chain.s));
    let offset = ws_energy_of_action(pendulum, spec.chain.i_rs)? + 2.0 * PI * spec.hbar * s / r * spec.delta_n;
    let imax = ws_action_of_energy(pendulum, pendulum.separatrix_energy()?)?;
    spec.rungs()
        .map(|n| {
            let action = spec.action(n);
            if action < 0.0 {
                return Err(Error::ActionOutsideIsland { action, max: imax });
            }
            let e = ws_energy_of_action(pendulum, action)?;
            Ok(e - 2.0 * PI * spec.hbar * n as f64 * s - offset)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderSpectrum {
    pub diagonal: Vec<f64>,
    pub coupling: f64,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// `eigenvectors[k][i]`: component of eigenvector `k` on rung `N_* + i`.
    pub eigenvectors: Vec<Vec<f64>>,
    /// Rung offset `N_m - N_*` where eigenvector `k` peaks.
    pub sites: Vec<usize>,
    /// `labels[m]` is the eigenvector index of state `m`, ordered from the
    /// innermost localization site outwards.
    pub labels: Vec<usize>,
}

impl LadderSpectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn energy(&self, m: usize) -> f64 {
        self.eigenvalues[self.labels[m]]
    }

    pub fn site(&self, m: usize) -> usize {
        self.sites[self.labels[m]]
    }
}

/// Eigenpairs of the symmetric tridiagonal matrix with the given diagonal
/// and constant off-diagonal `v`.
pub fn ladder_eigensolve(diagonal: &[f64], v: f64) -> Result<LadderSpectrum> {
    if !(v >= 0.0) || diagonal.is_empty() {
        return Err(Error::InvalidArgument(format!("ladder eigensolve needs v >= 0 and a diagonal (v = {v})")));
    }
    let n = diagonal.len();
    let h = Mat::<f64>::from_fn(n, n, |i, j| {
        if i == j {
            diagonal[i]
        } else if i.abs_diff(j) == 1 {
            v
        } else {
            0.0
        }
    });
    let eig = h
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::ConvergenceFailure { hash: format!("ladder of size {n}") })?;
    let s = eig.S().column_vector();
    let u = eig.U();
    let mut pairs: Vec<(f64, Vec<f64>)> = (0..n).map(|k| (s[k], (0..n).map(|i| u[(i, k)]).collect())).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (eigenvalues, eigenvectors): (Vec<f64>, Vec<Vec<f64>>) = pairs.into_iter().unzip();
    let sites: Vec<usize> = eigenvectors
        .iter()
        .map(|x| (0..n).max_by(|&a, &b| x[a].abs().total_cmp(&x[b].abs())).unwrap_or(0))
        .collect();
    let mut labels: Vec<usize> = (0..n).collect();
    labels.sort_by(|&a, &b| sites[a].cmp(&sites[b]).then(eigenvalues[a].total_cmp(&eigenvalues[b])));
    Ok(LadderSpectrum { diagonal: diagonal.to_vec(), coupling: v, eigenvalues, eigenvectors, sites, labels })
}

/// `D_m` with `ln D_m = (1/L) sum_{j != m} ln |E_j - E_m|`.
pub fn geometric_gap(spectrum: &LadderSpectrum, m: usize) -> Result<f64> {
    let n = spectrum.len();
    if n < 2 || m >= n {
        return Err(Error::InvalidArgument(format!("geometric gap of state {m} in a ladder of {n}")));
    }
    let scale = spectrum.eigenvalues.iter().map(|e| e.abs()).fold(0.0, f64::max);
    let em = spectrum.energy(m);
    let k = spectrum.labels[m];
    let mut acc = 0.0;
    for (j, e) in spectrum.eigenvalues.iter().enumerate() {
        if j == k {
            continue;
        }
        let gap = (e - em).abs();
        if gap <= 1e-14 * scale {
            return Err(Error::DegenerateSpectrum { index: j });
        }
        acc += gap.ln();
    }
    Ok((acc / (n - 1) as f64).exp())
}

/// `Gamma_m = (v^2 / hbar^2) (v / D_m)^(2 (N* - N_m))` with `v` the chain coupling.
pub fn rat_rate(spectrum: &LadderSpectrum, spec: &LadderSpec, m: usize) -> Result<f64> {
    if spectrum.len() as i64 != spec.length + 1 {
        return Err(Error::InvalidArgument(format!(
            "spectrum has {} states, ladder has {}",
            spectrum.len(),
            spec.length + 1
        )));
    }
    if m >= spectrum.len() {
        return Err(Error::InvalidArgument(format!("state {m} outside the ladder")));
    }
    let v = spec.chain.coupling;
    let hops = spec.length - spectrum.site(m) as i64;
    let base = 2.0 * (v.ln() - spec.hbar.ln());
    if hops == 0 {
        return Ok(base.exp());
    }
    let d = geometric_gap(spectrum, m)?;
    Ok((base + 2.0 * hops as f64 * (v.ln() - d.ln())).exp())
}

/// `xi_0 = ln(hbar^2 / 2Mv) + (1/L) sum_j ln|r^2 j^2 + 2 r j (n_* - n_rs)|`,
/// with `n_*` the innermost rung.
pub fn xi0_explicit(spec: &LadderSpec) -> Result<f64> {
    let c = &spec.chain;
    let head = (spec.hbar * spec.hbar / (2.0 * c.mass * c.coupling)).ln();
    if spec.length == 0 {
        return Ok(head);
    }
    let r = f64::from(c.r);
    let inner = r * spec.n_star_lo as f64 + spec.delta_n;
    let mut acc = 0.0;
    for j in 1..=spec.length {
        let rj = r * j as f64;
        let term = rj * rj + 2.0 * rj * inner;
        if term.abs() <= 1e-12 * rj * rj {
            return Err(Error::DegenerateUnperturbed { j });
        }
        acc += term.abs().ln();
    }
    Ok(head + acc / spec.length as f64)
}

/// `Gamma_0 = (v^2 / hbar^2) exp(-2 xi_0 L)`.
pub fn rate_from_xi0(spec: &LadderSpec, xi0: f64) -> f64 {
    let v = spec.chain.coupling;
    (2.0 * (v.ln() - spec.hbar.ln()) - 2.0 * xi0 * spec.length as f64).exp()
}

fn xlnx(x: f64) -> f64 {
    if x == 0.0 { 0.0 } else { x * x.abs().ln() }
}

/// Continuum limit of the ladder sum: `(xi_0, Gamma_0)`.
pub fn continuum_rate(spec: &LadderSpec) -> Result<(f64, f64)> {
    let a = spec.island_area;
    if !(a > 0.0) {
        return Err(Error::InvalidArgument(format!("island area must be positive, got {a}")));
    }
    let c = &spec.chain;
    let x = 2.0 * PI * c.i_rs / a;
    let xi = -(8.0 * PI * PI * c.mass * c.coupling / (a * a)).ln() - 2.0 + 2.0 * xlnx(2.0 * x) + xlnx(1.0 - 2.0 * x);
    let v = c.coupling;
    let gamma = (2.0 * (v.ln() - spec.hbar.ln()) - xi * a / (PI * f64::from(c.r) * spec.hbar)).exp();
    Ok((xi, gamma))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegeneracyPoint {
    pub l: u32,
    pub inv_hbar: f64,
    /// Whether the ladder is long enough, `L >= l`.
    pub valid: bool,
}

/// Values `1/hbar = (2 n_i + l r + 1) / (2 I_rs)` where the unperturbed
/// ladder with innermost state `n_i` is exactly degenerate.
pub fn degeneracy_points(chain: &ResonanceChain, n_i: u32, l_max: u32, area: f64) -> Vec<DegeneracyPoint> {
    (1..=l_max)
        .map(|l| {
            let inv_hbar = f64::from(2 * n_i + l * chain.r + 1) / (2.0 * chain.i_rs);
            let valid = ladder_length(area, 1.0 / inv_hbar, chain.r) >= i64::from(l);
            DegeneracyPoint { l, inv_hbar, valid }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    // 4:1 chain of the k = 2.5 island, with its measured area
    fn chain() -> ResonanceChain {
        ResonanceChain::from_params(4, 1, 0.43, 3.866, 7.275e-4)
    }
    const AREA: f64 = 5.757;

    fn ladder(inv: f64, n0: N0Choice) -> LadderSpec {
        build_ladder(&chain(), 1.0 / inv, AREA, n0).unwrap()
    }

    #[test]
    fn short_ladder_has_zero_length() {
        // A / 2 pi hbar - 1 < r
        let s = ladder(5.0, N0Choice::Nearest);
        assert!(AREA * 5.0 / (2.0 * PI) - 1.0 < 4.0);
        assert_eq!(s.length, 0);
        assert!(matches!(build_ladder(&chain(), 2.0, AREA, N0Choice::Nearest), Err(Error::EmptyLadder { .. })));
    }

    #[test]
    fn rungs_are_spaced_by_r_hbar() {
        let s = ladder(12.0, N0Choice::Nearest);
        assert_eq!((s.n0, s.n_star_lo, s.n_star_hi, s.length), (5, -1, 1, 2));
        let acts: Vec<f64> = s.rungs().map(|n| s.action(n)).collect();
        for w in acts.windows(2) {
            assert_relative_eq!(w[1] - w[0], 4.0 / 12.0, epsilon = 1e-14);
        }
        assert!(s.action(s.n_star_lo) > 0.0 && s.action(s.n_star_lo) < 4.0 / 12.0);
        assert!(2.0 * PI * s.action(s.n_star_hi) < AREA);
        assert!(s.delta_n.abs() <= 0.5);
    }

    #[test]
    fn innermost_choice_fixes_the_bottom_rung() {
        for inv in [7.0, 8.0, 8.5, 9.0] {
            let s = ladder(inv, N0Choice::Innermost(1));
            assert_eq!(s.state_index(s.n_star_lo), 1);
            assert!(s.delta_n.abs() <= 2.0);
        }
        assert!(build_ladder(&chain(), 0.1, AREA, N0Choice::Innermost(4)).is_err());
        assert!(build_ladder(&chain(), 0.1, AREA, N0Choice::Fixed(40)).is_err());
    }

    #[test]
    fn unperturbed_values() {
        let mut s = ladder(4.0, N0Choice::Nearest);
        s.chain.r = 4;
        s.delta_n = 0.0;
        s.n_star_lo = 0;
        s.n_star_hi = 1;
        s.length = 1;
        let w = unperturbed_diagonal(&s);
        assert_eq!(w[0], 0.0);
        assert_relative_eq!(w[1], 0.0625 / 7.732 * 16.0, max_relative = 1e-14);
        assert!((w[1] - 0.1293).abs() < 5e-5);
    }

    #[test]
    fn half_r_offset_pairs_rungs() {
        let mut s = ladder(12.0, N0Choice::Nearest);
        s.delta_n = 2.0;
        s.n_star_lo = -3;
        s.n_star_hi = 2;
        let w = unperturbed_diagonal(&s);
        // W(N) = W(-N-1)
        for (i, n) in s.rungs().enumerate() {
            let j = (-n - 1 - s.n_star_lo) as usize;
            assert_relative_eq!(w[i], w[j], max_relative = 1e-14);
        }
    }

    #[test]
    fn two_level_closed_form() {
        let (w, v) = (0.3, 0.07);
        let s = ladder_eigensolve(&[0.0, w], v).unwrap();
        let root = (w * w + 4.0 * v * v).sqrt();
        assert_relative_eq!(s.eigenvalues[0], (w - root) / 2.0, epsilon = 1e-15);
        assert_relative_eq!(s.eigenvalues[1], (w + root) / 2.0, epsilon = 1e-15);
        assert_eq!(s.site(0), 0);
        assert_eq!(s.site(1), 1);
    }

    #[test]
    fn zero_coupling_returns_sorted_diagonal() {
        let s = ladder_eigensolve(&[0.5, -0.1, 0.2], 0.0).unwrap();
        assert_eq!(s.eigenvalues, vec![-0.1, 0.2, 0.5]);
        assert_eq!(s.labels, vec![2, 0, 1]);
        assert_eq!(s.energy(0), 0.5);
    }

    #[test]
    fn geometric_gaps() {
        let s = ladder_eigensolve(&[-1.0, 0.0, 1.0], 0.0).unwrap();
        assert_relative_eq!(geometric_gap(&s, 1).unwrap(), 1.0, epsilon = 1e-15);
        let s = ladder_eigensolve(&[0.0, 2.0, 4.0], 0.0).unwrap();
        assert_relative_eq!(geometric_gap(&s, 0).unwrap(), 8f64.sqrt(), epsilon = 1e-14);
        let s = ladder_eigensolve(&[0.0, 2.0, 2.0], 0.0).unwrap();
        assert!(matches!(geometric_gap(&s, 1), Err(Error::DegenerateSpectrum { .. })));
    }

    #[test]
    fn gateway_state_rate() {
        let spec = ladder(12.0, N0Choice::Nearest);
        let sp = ladder_eigensolve(&unperturbed_diagonal(&spec), 0.0).unwrap();
        let v = spec.chain.coupling;
        assert_relative_eq!(rat_rate(&sp, &spec, 2).unwrap(), v * v * 144.0, max_relative = 1e-13);
    }

    #[test]
    fn explicit_xi_matches_ladder_rate() {
        for inv in [8.0, 10.0, 12.0, 15.0, 19.5] {
            let spec = ladder(inv, N0Choice::Nearest);
            let sp = ladder_eigensolve(&unperturbed_diagonal(&spec), 0.0).unwrap();
            let a = rat_rate(&sp, &spec, 0).unwrap();
            let b = rate_from_xi0(&spec, xi0_explicit(&spec).unwrap());
            assert_relative_eq!(a, b, max_relative = 1e-12);
        }
    }

    #[test]
    fn single_term_xi() {
        let spec = ladder(8.0, N0Choice::Nearest);
        assert_eq!(spec.length, 1);
        assert_eq!(spec.n_star_lo, 0);
        let c = &spec.chain;
        let want = (spec.hbar * spec.hbar / (2.0 * c.mass * c.coupling)).ln()
            + (16.0 + 8.0 * (spec.n0 as f64 - spec.n_rs)).abs().ln();
        assert_relative_eq!(xi0_explicit(&spec).unwrap(), want, max_relative = 1e-14);
    }

    #[test]
    fn degeneracy_values() {
        let pts = degeneracy_points(&chain(), 1, 3, AREA);
        let want = [8.14, 12.79, 17.44];
        for (p, w) in pts.iter().zip(want) {
            assert!((p.inv_hbar - w).abs() < 0.01, "{p:?}");
            assert!(p.valid);
        }
        let first = ladder(pts[0].inv_hbar, N0Choice::Innermost(1));
        assert!((first.delta_n.abs() - 2.0).abs() < 1e-9 || first.delta_n.abs() < 1e-9);
        assert!(matches!(xi0_explicit(&first), Err(Error::DegenerateUnperturbed { j: 1 })));
        let sp = ladder_eigensolve(&unperturbed_diagonal(&first), first.chain.coupling).unwrap();
        assert!(rat_rate(&sp, &first, 0).unwrap().is_finite());
    }

    #[test]
    fn continuum_at_half() {
        let mut spec = ladder(12.0, N0Choice::Nearest);
        spec.island_area = 4.0 * PI * spec.chain.i_rs;
        let (xi, _) = continuum_rate(&spec).unwrap();
        let c = &spec.chain;
        let a = spec.island_area;
        assert_relative_eq!(xi, -(8.0 * PI * PI * c.mass * c.coupling / (a * a)).ln() - 2.0, epsilon = 1e-14);
    }

    #[test]
    fn continuum_slope_is_linear() {
        let g: Vec<f64> = [10.0, 12.0, 14.0]
            .iter()
            .map(|&i| {
                let s = ladder(i, N0Choice::Nearest);
                continuum_rate(&s).unwrap().1.ln() - 2.0 * i.ln()
            })
            .collect();
        assert_relative_eq!(g[1] - g[0], g[2] - g[1], max_relative = 1e-12);
    }

    #[test]
    fn continuum_approaches_explicit() {
        let rel = |i: f64| {
            let s = ladder(i, N0Choice::Nearest);
            let e = xi0_explicit(&s).unwrap();
            ((continuum_rate(&s).unwrap().0 - e) / e).abs()
        };
        assert!(rel(20.0) < rel(8.0));
        assert!(rel(20.0) < 0.1);
    }

    proptest! {
        #[test]
        fn ladder_length_is_monotone(a in 6.0f64..40.0, da in 0.0f64..0.5) {
            prop_assert!(ladder_length(AREA, 1.0 / (a + da), 4) >= ladder_length(AREA, 1.0 / a, 4));
            prop_assert!(ladder_length(AREA, 1.0 / (a + 0.2), 4) - ladder_length(AREA, 1.0 / a, 4) <= 1);
        }

        #[test]
        fn ladder_eigenvalues_interlace_sanely(d in proptest::collection::vec(-1.0f64..1.0, 2..8), v in 0.0f64..0.3) {
            let s = ladder_eigensolve(&d, v).unwrap();
            prop_assert!(s.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
            let tr: f64 = d.iter().sum();
            prop_assert!((s.eigenvalues.iter().sum::<f64>() - tr).abs() < 1e-12);
            for a in &s.eigenvectors {
                for b in &s.eigenvectors {
                    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
                    let want = if std::ptr::eq(a, b) { 1.0 } else { 0.0 };
                    prop_assert!((dot - want).abs() < 1e-12);
                }
            }
            let mut labels = s.labels.clone();
            labels.sort();
            prop_assert_eq!(labels, (0..d.len()).collect::<Vec<_>>());
        }
    }
}
