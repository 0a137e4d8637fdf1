//! Complex band matrices with an off-centre band.
//!
//! Row `i` stores columns `i + lo ..= i + hi`. A drift shift moves the whole
//! band away from the diagonal, so `lo` and `hi` may have the same sign.

use faer::Mat;
use num_complex::Complex64 as C64;

use faer::c64;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, PartialEq)]
pub struct BandMatrix {
    pub n: usize,
    pub lo: i64,
    pub hi: i64,
    data: Vec<C64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, lo: i64, hi: i64) -> Self {
        assert!(lo <= hi);
        let w = (hi - lo + 1) as usize;
        Self { n, lo, hi, data: vec![ZERO; n * w] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, 0, 0);
        for i in 0..n {
            m.data[i] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn width(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    /// Column range stored for row `i`, clipped to the matrix.
    pub fn row_cols(&self, i: usize) -> std::ops::Range<usize> {
        let a = (i as i64 + self.lo).max(0) as usize;
        let b = (i as i64 + self.hi + 1).clamp(0, self.n as i64) as usize;
        a..b.max(a)
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        let d = j as i64 - i as i64;
        if d < self.lo || d > self.hi || i >= self.n || j >= self.n {
            return ZERO;
        }
        self.data[i * self.width() + (d - self.lo) as usize]
    }

    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        let d = j as i64 - i as i64;
        assert!(d >= self.lo && d <= self.hi, "entry ({i}, {j}) outside the band");
        let w = self.width();
        self.data[i * w + (d - self.lo) as usize] = v;
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        (0..self.n)
            .map(|i| self.row_cols(i).map(|j| self.get(i, j) * x[j]).sum())
            .collect()
    }

    /// Product `self * other`.
    pub fn mul(&self, other: &BandMatrix) -> BandMatrix {
        assert_eq!(self.n, other.n);
        let mut out = BandMatrix::zeros(self.n, self.lo + other.lo, self.hi + other.hi);
        let w = out.width();
        let lo = out.lo;
        out.data
            .chunks_mut(w)
            .enumerate()
            .for_each(|(i, row)| {
                for k in self.row_cols(i) {
                    let a = self.get(i, k);
                    if a == ZERO {
                        continue;
                    }
                    for j in other.row_cols(k) {
                        row[(j as i64 - i as i64 - lo) as usize] += a * other.get(k, j);
                    }
                }
            });
        out
    }

    /// Square block of rows and columns `start .. start + size`.
    pub fn sub_block(&self, start: usize, size: usize) -> BandMatrix {
        assert!(start + size <= self.n);
        let mut out = BandMatrix::zeros(size, self.lo, self.hi);
        for i in 0..size {
            for j in out.row_cols(i) {
                out.set(i, j, self.get(start + i, start + j));
            }
        }
        out
    }

    /// Drops leading and trailing diagonals whose entries are all below `tol`.
    pub fn trimmed(&self, tol: f64) -> BandMatrix {
        let diag_max = |d: i64| {
            (0..self.n)
                .filter_map(|i| {
                    let j = i as i64 + d;
                    (j >= 0 && (j as usize) < self.n).then(|| self.get(i, j as usize).norm())
                })
                .fold(0.0, f64::max)
        };
        let (mut lo, mut hi) = (self.lo, self.hi);
        while lo < hi && diag_max(lo) <= tol {
            lo += 1;
        }
        while hi > lo && diag_max(hi) <= tol {
            hi -= 1;
        }
        let mut out = BandMatrix::zeros(self.n, lo, hi);
        for i in 0..self.n {
            for j in out.row_cols(i) {
                out.set(i, j, self.get(i, j));
            }
        }
        out
    }

    pub fn to_dense(&self) -> Mat<c64> {
        Mat::from_fn(self.n, self.n, |i, j| {
            let v = self.get(i, j);
            c64::new(v.re, v.im)
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Euclidean norms of all columns.
    pub fn column_norms(&self) -> Vec<f64> {
        let mut acc = vec![0.0; self.n];
        for i in 0..self.n {
            for j in self.row_cols(i) {
                acc[j] += self.get(i, j).norm_sqr();
            }
        }
        acc.into_iter().map(f64::sqrt).collect()
    }

    /// Upper bound on the operator norm: `sqrt(max row sum * max column sum)`.
    pub fn norm_bound(&self) -> f64 {
        let mut rows = vec![0.0f64; self.n];
        let mut cols = vec![0.0f64; self.n];
        for i in 0..self.n {
            for j in self.row_cols(i) {
                let a = self.get(i, j).norm();
                rows[i] += a;
                cols[j] += a;
            }
        }
        let r = rows.into_iter().fold(0.0, f64::max);
        let c = cols.into_iter().fold(0.0, f64::max);
        (r * c).sqrt()
    }
}

/// LU factorisation of `A - shift * I` with partial pivoting.
pub struct BandLu {
    n: usize,
    kl: usize,
    width: usize,
    rows: Vec<C64>,
    pivots: Vec<usize>,
    singular: bool,
}

impl BandLu {
    pub fn new(a: &BandMatrix, shift: C64) -> Self {
        let n = a.n;
        let kl = (-a.lo).max(0) as usize;
        let ku = a.hi.max(0) as usize;
        let width = 2 * kl + ku + 1;
        // row i holds columns i - kl ..= i + ku + kl
        let mut rows = vec![ZERO; n * width];
        let idx = |i: usize, j: usize| i * width + (j + kl - i);
        for i in 0..n {
            for j in a.row_cols(i) {
                rows[idx(i, j)] = a.get(i, j);
            }
            rows[idx(i, i)] -= shift;
        }
        let mut pivots = vec![0; n];
        let mut singular = false;
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let last_col = (k + ku + kl).min(n - 1);
            let mut p = k;
            let mut best = rows[idx(k, k)].norm();
            for i in k + 1..=last_row {
                let v = rows[idx(i, k)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            pivots[k] = p;
            if best == 0.0 {
                singular = true;
                continue;
            }
            if p != k {
                for j in k..=last_col {
                    rows.swap(idx(k, j), idx(p, j));
                }
            }
            let piv = rows[idx(k, k)];
            for i in k + 1..=last_row {
                let f = rows[idx(i, k)] / piv;
                if f == ZERO {
                    continue;
                }
                rows[idx(i, k)] = f;
                for j in k + 1..=last_col {
                    let u = rows[idx(k, j)];
                    rows[idx(i, j)] -= f * u;
                }
            }
        }
        Self { n, kl, width, rows, pivots, singular }
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    /// Solves `(A - shift I) x = b` in place.
    pub fn solve(&self, b: &mut [C64]) {
        let (n, kl, w) = (self.n, self.kl, self.width);
        let idx = |i: usize, j: usize| i * w + (j + kl - i);
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            for i in k + 1..=(k + kl).min(n - 1) {
                b[i] -= self.rows[idx(i, k)] * bk;
            }
        }
        let ku_kl = w - 1 - kl;
        for k in (0..n).rev() {
            let mut s = b[k];
            for j in k + 1..=(k + ku_kl).min(n - 1) {
                s -= self.rows[idx(k, j)] * b[j];
            }
            let d = self.rows[idx(k, k)];
            b[k] = if d == ZERO { s / 1e-300 } else { s / d };
        }
    }
}

/// Result of shift-invert iteration.
#[derive(Debug, Clone)]
pub struct InverseIteration {
    pub eigenvalue: C64,
    pub vector: Vec<C64>,
    pub residual: f64,
    pub iterations: usize,
}

/// Eigenpair of `a` nearest to `shift`, by inverse iteration from `start`.
pub fn inverse_iteration(
    a: &BandMatrix,
    shift: C64,
    start: &[C64],
    tol: f64,
    max_iter: usize,
) -> InverseIteration {
    let lu = BandLu::new(a, shift);
    let scale = a.norm_bound().max(1e-300);
    let normalise = |v: &mut Vec<C64>| {
        let s = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if s > 0.0 {
            v.iter_mut().for_each(|c| *c /= s);
        }
    };
    let mut x = start.to_vec();
    if x.iter().all(|c| *c == ZERO) {
        x = (0..a.n).map(|i| C64::new(1.0, (i as f64).sin())).collect();
    }
    normalise(&mut x);
    let mut lambda = shift;
    let mut residual = f64::INFINITY;
    let mut it = 0;
    while it < max_iter {
        it += 1;
        let mut y = x.clone();
        lu.solve(&mut y);
        normalise(&mut y);
        x = y;
        let ax = a.matvec(&x);
        lambda = x.iter().zip(&ax).map(|(u, v)| u.conj() * v).sum();
        residual = ax.iter().zip(&x).map(|(v, u)| (v - lambda * u).norm_sqr()).sum::<f64>().sqrt() / scale;
        if residual < tol {
            break;
        }
    }
    InverseIteration { eigenvalue: lambda, vector: x, residual, iterations: it }
}
