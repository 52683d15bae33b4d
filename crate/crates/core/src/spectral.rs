//! Per-line spectral filtering of real phase-space fields.
//!
//! Every substep of every engine is a multiplication in a mixed
//! representation: along x for drifts, along p (in the Moyal variable λ) for
//! potential kicks, diffusion and coarse-graining. Two real lines are packed
//! into one complex transform and separated again in Fourier space.
//!
//! Output fields are kept real by Hermitian projection of each filtered
//! spectrum, which is the same as taking the real part of the filtered line.
//! For multipliers that are conjugate-symmetric in k the projection only
//! touches the Nyquist entry.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::fft::Fft;
use crate::grid::{Axis, PhaseSpaceGrid};

/// Complex multipliers indexed by (line, wavenumber).
#[derive(Debug, Clone)]
pub(crate) struct MultiplierTable {
    n_k: usize,
    data: Vec<Complex64>,
}

impl MultiplierTable {
    pub(crate) fn from_fn(
        n_lines: usize,
        n_k: usize,
        mut f: impl FnMut(usize, usize) -> Complex64,
    ) -> Self {
        let mut data = Vec::with_capacity(n_lines * n_k);
        for line in 0..n_lines {
            for k in 0..n_k {
                data.push(f(line, k));
            }
        }
        Self { n_k, data }
    }

    pub(crate) fn line(&self, line: usize) -> &[Complex64] {
        &self.data[line * self.n_k..(line + 1) * self.n_k]
    }

    /// Multiplies every entry by a real factor `f(line, k)`.
    pub(crate) fn scale(&mut self, mut f: impl FnMut(usize, usize) -> f64) {
        for (idx, m) in self.data.iter_mut().enumerate() {
            *m *= f(idx / self.n_k, idx % self.n_k);
        }
    }

    pub(crate) fn get(&self, line: usize, k: usize) -> Complex64 {
        self.data[line * self.n_k + k]
    }

    pub(crate) fn apply(&self, line: usize, spectrum: &mut [Complex64]) {
        for (s, m) in spectrum.iter_mut().zip(self.line(line)) {
            *s *= m;
        }
    }
}

/// Line-by-line transform along one axis with reusable buffers.
#[derive(Debug, Clone)]
pub(crate) struct AxisTransform {
    axis: Axis,
    n_x: usize,
    n_p: usize,
    fft: Fft,
    z: Vec<Complex64>,
    a: Vec<Complex64>,
    b: Vec<Complex64>,
}

impl AxisTransform {
    pub(crate) fn new(grid: &PhaseSpaceGrid, axis: Axis) -> Self {
        let n = grid.size(axis);
        Self {
            axis,
            n_x: grid.n_x(),
            n_p: grid.n_p(),
            fft: Fft::new(n).expect("grid sizes are validated powers of two"),
            z: vec![Complex64::default(); n],
            a: vec![Complex64::default(); n],
            b: vec![Complex64::default(); n],
        }
    }

    fn len(&self) -> usize {
        self.fft.len()
    }

    fn n_lines(&self) -> usize {
        match self.axis {
            Axis::X => self.n_p,
            Axis::P => self.n_x,
        }
    }

    fn gather(&mut self, values: &[f64], line: usize) {
        match self.axis {
            Axis::P => {
                let n = self.n_p;
                let a = &values[line * n..(line + 1) * n];
                let b = &values[(line + 1) * n..(line + 2) * n];
                for ((z, &re), &im) in self.z.iter_mut().zip(a).zip(b) {
                    *z = Complex64::new(re, im);
                }
            }
            Axis::X => {
                let stride = self.n_p;
                for (i, z) in self.z.iter_mut().enumerate() {
                    let base = i * stride + line;
                    *z = Complex64::new(values[base], values[base + 1]);
                }
            }
        }
    }

    fn scatter(&self, values: &mut [f64], line: usize) {
        match self.axis {
            Axis::P => {
                let n = self.n_p;
                let (head, tail) = values.split_at_mut((line + 1) * n);
                let a = &mut head[line * n..];
                let b = &mut tail[..n];
                for ((z, ra), rb) in self.z.iter().zip(a).zip(b) {
                    *ra = z.re;
                    *rb = z.im;
                }
            }
            Axis::X => {
                let stride = self.n_p;
                for (i, z) in self.z.iter().enumerate() {
                    let base = i * stride + line;
                    values[base] = z.re;
                    values[base + 1] = z.im;
                }
            }
        }
    }

    /// Splits the packed spectrum `Z = FFT(a + ib)` into `A = FFT(a)` and
    /// `B = FFT(b)`.
    fn unpack(&mut self) {
        let n = self.len();
        for k in 0..n {
            let zk = self.z[k];
            let zc = self.z[(n - k) & (n - 1)].conj();
            self.a[k] = (zk + zc) * 0.5;
            // (zk - zc) / 2i
            let d = zk - zc;
            self.b[k] = Complex64::new(d.im * 0.5, -d.re * 0.5);
        }
    }

    /// Inverse of [`unpack`](Self::unpack) with Hermitian projection of
    /// both spectra.
    fn repack(&mut self) {
        let n = self.len();
        for k in 0..n {
            let kc = (n - k) & (n - 1);
            let ha = (self.a[k] + self.a[kc].conj()) * 0.5;
            let hb = (self.b[k] + self.b[kc].conj()) * 0.5;
            self.z[k] = Complex64::new(ha.re - hb.im, ha.im + hb.re);
        }
    }

    /// Replaces every line `f` by `Re IFFT(M_line · FFT(f))`, where `apply`
    /// performs the multiplication for a given line index.
    pub(crate) fn filter(
        &mut self,
        values: &mut [f64],
        mut apply: impl FnMut(usize, &mut [Complex64]),
    ) {
        debug_assert_eq!(values.len(), self.n_x * self.n_p);
        for line in (0..self.n_lines()).step_by(2) {
            self.gather(values, line);
            self.fft.forward(&mut self.z);
            self.unpack();
            apply(line, &mut self.a);
            apply(line + 1, &mut self.b);
            self.repack();
            self.fft.inverse(&mut self.z);
            self.scatter(values, line);
        }
    }

    /// Same line-independent multiplier on every line.
    pub(crate) fn filter_uniform(&mut self, values: &mut [f64], multiplier: &[Complex64]) {
        self.filter(values, |_, spectrum| {
            for (s, m) in spectrum.iter_mut().zip(multiplier) {
                *s *= m;
            }
        });
    }

    /// Calls `visit(line, FFT(line))` for every line without modifying the
    /// field.
    pub(crate) fn spectra(&mut self, values: &[f64], mut visit: impl FnMut(usize, &[Complex64])) {
        for line in (0..self.n_lines()).step_by(2) {
            self.gather(values, line);
            self.fft.forward(&mut self.z);
            self.unpack();
            visit(line, &self.a);
            visit(line + 1, &self.b);
        }
    }
}
