//! In-place radix-2 complex FFT for power-of-two lengths.
//!
//! Grid sizes are powers of two by construction, so a single iterative
//! decimation-in-time kernel covers every transform in the crate. Twiddle
//! factors are evaluated directly (not by recurrence) so the round trip
//! error stays at a few ulps even for the largest grids.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// A precomputed transform plan for one length.
#[derive(Debug, Clone)]
pub struct Fft {
    len: usize,
    bitrev: Vec<u32>,
    // Stage with half-width h keeps its h twiddles at offset h - 1.
    twiddles: Vec<Complex64>,
}

impl Fft {
    pub fn new(len: usize) -> Result<Self> {
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::GridSize {
                axis: "fft",
                size: len,
            });
        }
        let bits = len.trailing_zeros();
        let bitrev = (0..len as u32)
            .map(|i| i.reverse_bits() >> (32 - bits))
            .collect();

        let mut twiddles = Vec::with_capacity(len - 1);
        let mut half = 1;
        while half < len {
            for j in 0..half {
                let angle = -PI * j as f64 / half as f64;
                twiddles.push(cis(angle));
            }
            half <<= 1;
        }

        Ok(Self {
            len,
            bitrev,
            twiddles,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Unnormalised forward transform, `X_k = Σ_j x_j e^{-2πi jk/n}`.
    pub fn forward(&self, buf: &mut [Complex64]) {
        self.transform::<false>(buf);
    }

    /// Normalised inverse transform, so `inverse(forward(x)) == x`.
    pub fn inverse(&self, buf: &mut [Complex64]) {
        self.transform::<true>(buf);
        let scale = 1.0 / self.len as f64;
        for z in buf.iter_mut() {
            *z *= scale;
        }
    }

    fn transform<const INVERSE: bool>(&self, buf: &mut [Complex64]) {
        let n = self.len;
        assert_eq!(buf.len(), n, "buffer length does not match the plan");

        for (i, &j) in self.bitrev.iter().enumerate() {
            let j = j as usize;
            if i < j {
                buf.swap(i, j);
            }
        }

        // Width-2 butterflies need no multiplications.
        for pair in buf.chunks_exact_mut(2) {
            let (a, b) = (pair[0], pair[1]);
            pair[0] = a + b;
            pair[1] = a - b;
        }
        if n == 2 {
            return;
        }

        // Width-4: the only non-trivial twiddle is -i (or +i when inverting).
        for quad in buf.chunks_exact_mut(4) {
            let (a0, a1, b0, b1) = (quad[0], quad[1], quad[2], quad[3]);
            let b1 = if INVERSE {
                Complex64::new(-b1.im, b1.re)
            } else {
                Complex64::new(b1.im, -b1.re)
            };
            quad[0] = a0 + b0;
            quad[2] = a0 - b0;
            quad[1] = a1 + b1;
            quad[3] = a1 - b1;
        }

        let mut half = 4;
        while half < n {
            let tw = &self.twiddles[half - 1..2 * half - 1];
            for block in buf.chunks_exact_mut(2 * half) {
                let (lo, hi) = block.split_at_mut(half);
                for ((a, b), w) in lo.iter_mut().zip(hi.iter_mut()).zip(tw) {
                    let w = if INVERSE { w.conj() } else { *w };
                    let t = *b * w;
                    *b = *a - t;
                    *a += t;
                }
            }
            half <<= 1;
        }
    }
}

#[inline]
pub(crate) fn cis(angle: f64) -> Complex64 {
    let (s, c) = libm::sincos(angle);
    Complex64::new(c, s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn naive_dft(x: &[Complex64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                x.iter()
                    .enumerate()
                    .map(|(j, &v)| v * cis(-2.0 * PI * ((j * k) % n) as f64 / n as f64))
                    .sum()
            })
            .collect()
    }

    fn sample(n: usize) -> Vec<Complex64> {
        (0..n)
            .map(|j| {
                let t = j as f64;
                Complex64::new(libm::sin(0.37 * t) + 0.1 * t, libm::cos(1.3 * t * t))
            })
            .collect()
    }

    #[test]
    fn matches_naive_dft() {
        for n in [2, 4, 8, 16, 64, 128] {
            let x = sample(n);
            let mut y = x.clone();
            Fft::new(n).unwrap().forward(&mut y);
            let reference = naive_dft(&x);
            for (a, b) in y.iter().zip(&reference) {
                assert!((a - b).norm() < 1e-10 * n as f64, "n = {n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn round_trip() {
        let n = 1024;
        let x = sample(n);
        let mut y = x.clone();
        let fft = Fft::new(n).unwrap();
        fft.forward(&mut y);
        fft.inverse(&mut y);
        let err: f64 = x.iter().zip(&y).map(|(a, b)| (a - b).norm_sqr()).sum();
        let scale: f64 = x.iter().map(|a| a.norm_sqr()).sum();
        assert!((err / scale).sqrt() < 1e-14);
    }

    #[test]
    fn rejects_bad_lengths() {
        assert!(Fft::new(0).is_err());
        assert!(Fft::new(12).is_err());
        let mut one = vec![Complex64::new(1.0, 0.0); 2];
        Fft::new(2).unwrap().forward(&mut one);
        assert_eq!(one[0], Complex64::new(2.0, 0.0));
    }
}
