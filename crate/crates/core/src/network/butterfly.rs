//! Radix-4 butterfly kernels and digit reversal.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::oracle::Matrix;

/// The 4-point DFT kernel `B`.
pub const B4: [[(i8, i8); 4]; 4] = [
    [(1, 0), (1, 0), (1, 0), (1, 0)],
    [(1, 0), (0, -1), (-1, 0), (0, 1)],
    [(1, 0), (-1, 0), (1, 0), (-1, 0)],
    [(1, 0), (0, 1), (-1, 0), (0, -1)],
];

/// `W_n^e = e^{−i 2π e / n}`, exact on quadrant multiples so that
/// untwiddled kernels keep exact zeros.
pub fn twiddle(e: usize, n: usize) -> Complex64 {
    let e = e % n;
    if (4 * e).is_multiple_of(n) {
        return match 4 * e / n {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, -1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, 1.0),
        };
    }
    let a = 2.0 * PI * e as f64 / n as f64;
    Complex64::new(a.cos(), -a.sin())
}

/// Complex coefficient from input `p` to output `q` of the twiddled
/// kernel `diag(W^0, W^k, W^2k, W^3k) · B`.
pub fn coefficient(k: usize, n: usize, q: usize, p: usize) -> Complex64 {
    let (re, im) = B4[q][p];
    twiddle(k * q, n) * Complex64::new(re as f64, im as f64)
}

/// Real 8×8 embedding of one twiddled radix-4 kernel.
///
/// Rows and columns are ordered `[Re 0..4, Im 0..4]`. In
/// decimation-in-frequency form the twiddles act on the kernel outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ButterflyBlock {
    pub k: usize,
    pub n: usize,
    pub entries: [[f64; 8]; 8],
}

impl ButterflyBlock {
    pub fn to_matrix(&self) -> Matrix {
        Matrix::from_fn(8, 8, |i, j| self.entries[i][j])
    }
}

/// Kernel for twiddle index `k` of an `n`-point stage, `0 ≤ k < n/4`.
pub fn butterfly_block(k: usize, n: usize) -> ButterflyBlock {
    debug_assert!(n >= 4 && k < n / 4);
    let mut entries = [[0.0; 8]; 8];
    for q in 0..4 {
        for p in 0..4 {
            let c = coefficient(k, n, q, p);
            entries[q][p] = c.re;
            entries[q][4 + p] = -c.im;
            entries[4 + q][p] = c.im;
            entries[4 + q][4 + p] = c.re;
        }
    }
    ButterflyBlock { k, n, entries }
}

/// Base-4 digit reversal of `i` over `digits` digits.
pub fn digit_reverse(mut i: usize, digits: u32) -> usize {
    let mut r = 0;
    for _ in 0..digits {
        r = (r << 2) | (i & 3);
        i >>= 2;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    fn approx(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn untwiddled_block_is_plus_minus_one() {
        let b = butterfly_block(0, 16);
        for (q, row) in B4.iter().enumerate() {
            for (p, &(re, im)) in row.iter().enumerate() {
                assert_eq!(b.entries[q][p], re as f64);
                assert_eq!(b.entries[q][4 + p], -(im as f64));
                assert_eq!(b.entries[4 + q][p], im as f64);
            }
        }
        assert!(b.entries.iter().flatten().all(|v| [-1.0, 0.0, 1.0].contains(v)));
    }

    #[test]
    fn matches_complex_product() {
        // block = real embedding of D·B, built here from a 4×4 complex product
        let (k, n) = (3, 64);
        let w = Complex64::from_polar(1.0, -2.0 * PI / n as f64);
        let b = butterfly_block(k, n);
        for q in 0..4 {
            for p in 0..4 {
                let base = Complex64::i().powi(-((p * q) as i32));
                let c = w.powi((k * q) as i32) * base;
                assert!(approx(b.entries[q][p], c.re) && approx(b.entries[4 + q][p], c.im));
                assert!(approx(b.entries[q][4 + p], -c.im) && approx(b.entries[4 + q][4 + p], c.re));
            }
        }
    }

    #[test]
    fn eighth_turn_twiddle_has_root_half() {
        let b = butterfly_block(2, 16);
        let h = 0.5_f64.sqrt();
        assert!(b.entries.iter().flatten().any(|v| approx(v.abs(), h)));
        // second output row follows the expanded form with s = −sin
        let (c, s) = ((2.0 * PI * 2.0 / 16.0).cos(), -(2.0 * PI * 2.0 / 16.0).sin());
        let expected = [c, s, -c, -s, -s, c, s, -c];
        for (a, e) in b.entries[1].iter().zip(expected) {
            assert!(approx(*a, e), "{:?}", b.entries[1]);
        }
    }

    #[test]
    fn digit_reversal_is_an_involution() {
        assert_eq!(digit_reverse(1, 2), 4);
        assert_eq!(digit_reverse(6, 2), 9);
        for i in 0..256 {
            assert_eq!(digit_reverse(digit_reverse(i, 4), 4), i);
        }
    }
}
