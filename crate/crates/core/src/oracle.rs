//! Exact double-precision references.
//!
//! [`dft`] is the plain O(N²) sum and is the ground truth for everything
//! else in the crate. [`fft_radix4`] is a recursive decimation-in-time
//! transform written independently of the spiking network's factorization.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::Signal;

/// Frequency-domain bins of an `n`-point transform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub bins: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(bins: Vec<Complex64>) -> Self {
        Self { bins }
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.bins.iter().map(|b| b.norm()).collect()
    }

    /// Index of the largest magnitude in `range`.
    pub fn argmax_in(&self, range: std::ops::Range<usize>) -> usize {
        let mut best = range.start;
        let mut best_mag = f64::NEG_INFINITY;
        for k in range {
            let m = self.bins[k].norm();
            if m > best_mag {
                best_mag = m;
                best = k;
            }
        }
        best
    }

    pub fn max_abs(&self) -> f64 {
        self.bins.iter().fold(0.0_f64, |m, b| m.max(b.norm()))
    }
}

/// Direct evaluation of `y_k = Σ x_n (cos(2πkn/N) − i sin(2πkn/N))`.
pub fn dft(x: &Signal) -> Spectrum {
    dft_slice(x.samples())
}

pub fn dft_slice(x: &[Complex64]) -> Spectrum {
    let n = x.len();
    let bins = (0..n)
        .map(|k| {
            x.iter().enumerate().fold(Complex64::new(0.0, 0.0), |acc, (j, &v)| {
                // reduce kj mod n before scaling to keep the angle small
                let angle = 2.0 * PI * ((k * j) % n) as f64 / n as f64;
                acc + v * Complex64::new(angle.cos(), -angle.sin())
            })
        })
        .collect();
    Spectrum { bins }
}

/// Radix-4 decimation-in-time FFT. `x.len()` must be a power of 4.
pub fn fft_radix4(x: &[Complex64]) -> Result<Spectrum> {
    if !is_power_of_four(x.len()) {
        return Err(Error::Size(format!("radix-4 FFT needs a power of 4, got {}", x.len())));
    }
    Ok(Spectrum { bins: fft4_rec(x) })
}

fn fft4_rec(x: &[Complex64]) -> Vec<Complex64> {
    let n = x.len();
    if n == 1 {
        return vec![x[0]];
    }
    let quarter = n / 4;
    let subs: Vec<Vec<Complex64>> = (0..4)
        .map(|r| fft4_rec(&x.iter().skip(r).step_by(4).copied().collect::<Vec<_>>()))
        .collect();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    let minus_i = Complex64::new(0.0, -1.0);
    for k in 0..quarter {
        let t: Vec<Complex64> = (0..4)
            .map(|r| {
                let angle = -2.0 * PI * (r * k) as f64 / n as f64;
                subs[r][k] * Complex64::new(angle.cos(), angle.sin())
            })
            .collect();
        for q in 0..4 {
            let mut acc = Complex64::new(0.0, 0.0);
            for (r, tr) in t.iter().enumerate() {
                acc += tr * minus_i.powu(((q * r) % 4) as u32);
            }
            out[k + q * quarter] = acc;
        }
    }
    out
}

pub fn is_power_of_four(n: usize) -> bool {
    n >= 1 && n.is_power_of_two() && n.trailing_zeros().is_multiple_of(2)
}

/// Dense row-major real matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        self.data.iter().zip(&other.data).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

pub fn matvec(w: &Matrix, x: &[f64]) -> Vec<f64> {
    assert_eq!(w.cols, x.len(), "matvec shape mismatch");
    (0..w.rows).map(|i| w.row(i).iter().zip(x).map(|(a, b)| a * b).sum()).collect()
}

pub fn matmul(a: &Matrix, b: &Matrix) -> Matrix {
    assert_eq!(a.cols, b.rows, "matmul shape mismatch");
    let mut out = Matrix::zeros(a.rows, b.cols);
    for i in 0..a.rows {
        for k in 0..a.cols {
            let aik = a[(i, k)];
            if aik == 0.0 {
                continue;
            }
            for j in 0..b.cols {
                out[(i, j)] += aik * b[(k, j)];
            }
        }
    }
    out
}

/// The `2n × 2n` block `[[Re W, −Im W], [Im W, Re W]]` of the DFT matrix.
pub fn real_dft_matrix(n: usize) -> Matrix {
    Matrix::from_fn(2 * n, 2 * n, |i, j| {
        let (k, kb) = (i % n, i / n);
        let (m, mb) = (j % n, j / n);
        let angle = 2.0 * PI * ((k * m) % n) as f64 / n as f64;
        let (re, im) = (angle.cos(), -angle.sin());
        match (kb, mb) {
            (0, 0) | (1, 1) => re,
            (0, 1) => -im,
            _ => im,
        }
    })
}

/// Stacks `[Re x; Im x]`.
pub fn to_real_block(x: &[Complex64]) -> Vec<f64> {
    x.iter().map(|c| c.re).chain(x.iter().map(|c| c.im)).collect()
}

pub fn from_real_block(v: &[f64]) -> Vec<Complex64> {
    let n = v.len() / 2;
    (0..n).map(|k| Complex64::new(v[k], v[n + k])).collect()
}
