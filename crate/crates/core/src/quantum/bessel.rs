//! Fourier coefficients of the kick `exp(-i x cos theta)`.
//!
//! The coefficient of `e^{i q theta}` is `(-i)^q J_q(x)`. Bessel values come
//! from Miller's backward recurrence; an FFT of the sampled kick provides an
//! independent evaluation.

use num_complex::Complex64 as C64;
use rustfft::FftPlanner;

/// Entries below this fraction of the largest coefficient are dropped.
pub const BAND_CUTOFF: f64 = 1e-18;

/// `J_0(x) .. J_{q_max}(x)` for `x >= 0`.
pub fn bessel_j_orders(x: f64, q_max: usize) -> Vec<f64> {
    let mut out = vec![0.0; q_max + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let top = (x.max(q_max as f64) + 30.0 + 6.0 * x.sqrt()).ceil() as usize;
    let start = top + (top % 2);
    let mut vals = vec![0.0; start + 2];
    let (mut jp, mut j) = (0.0f64, 1e-300f64);
    vals[start] = j;
    for k in (1..=start).rev() {
        let jm = 2.0 * k as f64 / x * j - jp;
        jp = j;
        j = jm;
        vals[k - 1] = j;
        if j.abs() > 1e250 {
            for v in vals[k - 1..].iter_mut() {
                *v *= 1e-250;
            }
            jp *= 1e-250;
            j *= 1e-250;
        }
    }
    // J_0 + 2 sum J_{2k} = 1
    let norm = vals[0] + 2.0 * vals.iter().skip(2).step_by(2).sum::<f64>();
    for (o, v) in out.iter_mut().zip(&vals) {
        *o = v / norm;
    }
    out
}

/// `(-i)^q` for integer `q`.
pub fn minus_i_pow(q: i64) -> C64 {
    match q.rem_euclid(4) {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, -1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, 1.0),
    }
}

/// Kick coefficients `c_q`, `q = -q_max..=q_max`, stored at index `q + q_max`.
#[derive(Debug, Clone)]
pub struct KickBand {
    pub q_max: usize,
    pub coeffs: Vec<C64>,
}

impl KickBand {
    pub fn get(&self, q: i64) -> C64 {
        if q.unsigned_abs() as usize > self.q_max {
            C64::new(0.0, 0.0)
        } else {
            self.coeffs[(q + self.q_max as i64) as usize]
        }
    }

    /// Multiplies `c_q` by `w^q` (complex scaling of the angle).
    pub fn scaled(&self, w: f64) -> KickBand {
        let coeffs = (-(self.q_max as i64)..=self.q_max as i64)
            .map(|q| self.get(q) * w.powi(q as i32))
            .collect();
        KickBand { q_max: self.q_max, coeffs }.trimmed()
    }

    fn trimmed(self) -> KickBand {
        let peak = self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let mut q_max = self.q_max;
        while q_max > 0 {
            let lo = self.get(-(q_max as i64)).norm();
            let hi = self.get(q_max as i64).norm();
            if lo.max(hi) > BAND_CUTOFF * peak {
                break;
            }
            q_max -= 1;
        }
        let coeffs = (-(q_max as i64)..=q_max as i64).map(|q| self.get(q)).collect();
        KickBand { q_max, coeffs }
    }
}

/// Bessel construction of the kick band for argument `x = kick / hbar`.
pub fn kick_band(x: f64) -> KickBand {
    let q_max = (x + 12.0 * x.cbrt() + 30.0).ceil() as usize;
    kick_band_bessel(x, q_max)
}

pub fn kick_band_bessel(x: f64, q_max: usize) -> KickBand {
    let j = bessel_j_orders(x.abs(), q_max);
    let sgn = if x < 0.0 { -1.0 } else { 1.0 };
    let coeffs = (-(q_max as i64)..=q_max as i64)
        .map(|q| {
            // J_{-q} = (-1)^q J_q and J_q(-x) = (-1)^q J_q(x)
            let a = q.unsigned_abs() as usize;
            let mut v = j[a];
            if q < 0 && a % 2 == 1 {
                v = -v;
            }
            if sgn < 0.0 && a % 2 == 1 {
                v = -v;
            }
            minus_i_pow(q) * v
        })
        .collect();
    KickBand { q_max, coeffs }.trimmed()
}

/// Same coefficients from an FFT of `exp(-i x cos theta)` on `points` samples.
pub fn kick_band_fft(x: f64, q_max: usize, points: usize) -> KickBand {
    assert!(points > 2 * q_max, "too few samples for the requested band");
    let mut buf: Vec<C64> = (0..points)
        .map(|j| {
            let th = std::f64::consts::TAU * j as f64 / points as f64;
            C64::from_polar(1.0, -x * th.cos())
        })
        .collect();
    FftPlanner::new().plan_fft_forward(points).process(&mut buf);
    let coeffs = (-(q_max as i64)..=q_max as i64)
        .map(|q| buf[q.rem_euclid(points as i64) as usize] / points as f64)
        .collect();
    KickBand { q_max, coeffs }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_bessel_values() {
        let j = bessel_j_orders(1.0, 3);
        assert!((j[0] - 0.765_197_686_557_966_6).abs() < 1e-15);
        assert!((j[1] - 0.440_050_585_744_933_5).abs() < 1e-15);
        let j = bessel_j_orders(10.0, 12);
        assert!((j[0] + 0.245_935_764_451_348_3).abs() < 1e-14);
        assert!((j[12] - 0.063_370_254_970_156_01).abs() < 1e-15);
    }

    #[test]
    fn large_argument_stays_normalised() {
        let x = 80.0;
        let b = kick_band(x);
        // unitarity of the kick: sum |c_q|^2 = 1
        let s: f64 = b.coeffs.iter().map(|c| c.norm_sqr()).sum();
        assert!((s - 1.0).abs() < 1e-13);
    }

    #[test]
    fn bessel_matches_fft() {
        for &x in &[0.5, 3.2, 10.0, 25.0, 64.0] {
            let b = kick_band(x);
            let f = kick_band_fft(x, b.q_max, 4 * (2 * b.q_max + 1));
            let err = b.coeffs.iter().zip(&f.coeffs).map(|(a, c)| (a - c).norm()).fold(0.0, f64::max);
            assert!(err < 1e-12, "x = {x}: {err}");
        }
    }

    #[test]
    fn scaled_band_is_the_shifted_kick() {
        // c_q w^q are the coefficients of exp(-i x cos(theta - i ln w))
        let (x, w) = (4.0, 1.0 / 0.9);
        let b = kick_band(x).scaled(w);
        let n = 512;
        let mut buf: Vec<C64> = (0..n)
            .map(|j| {
                let th = C64::new(std::f64::consts::TAU * j as f64 / n as f64, -w.ln());
                (C64::new(0.0, -x) * th.cos()).exp()
            })
            .collect();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        for q in -(b.q_max as i64)..=b.q_max as i64 {
            let f = buf[q.rem_euclid(n as i64) as usize] / n as f64;
            assert!((b.get(q) - f).norm() < 1e-12);
        }
    }

    proptest::proptest! {
        #[test]
        fn band_matches_fourier_assembly(x in 0.0f64..80.0) {
            let b = kick_band(x);
            let f = kick_band_fft(x, b.q_max, 4 * (2 * b.q_max + 1));
            let err = b.coeffs.iter().zip(&f.coeffs).map(|(a, c)| (a - c).norm()).fold(0.0, f64::max);
            proptest::prop_assert!(err < 1e-12);
        }
    }
}
