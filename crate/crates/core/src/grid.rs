use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};

/// One of the two phase-space axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    P,
}

/// Uniform periodic lattice over `[x_min, x_max) × [p_min, p_max)`.
///
/// Node `i` on the x axis sits at `x_min + i·dx`; the last node is one
/// spacing short of `x_max`, which is identified with `x_min`. The same
/// holds for p. Wavenumber tables use the usual FFT ordering: non-negative
/// frequencies first, then negative ones, with the Nyquist entry negative.
#[derive(Debug, Clone)]
pub struct PhaseSpaceGrid {
    x_min: f64,
    x_max: f64,
    n_x: usize,
    p_min: f64,
    p_max: f64,
    n_p: usize,
    dx: f64,
    dp: f64,
    k_x: Vec<f64>,
    k_p: Vec<f64>,
}

impl PartialEq for PhaseSpaceGrid {
    fn eq(&self, other: &Self) -> bool {
        self.x_min == other.x_min
            && self.x_max == other.x_max
            && self.n_x == other.n_x
            && self.p_min == other.p_min
            && self.p_max == other.p_max
            && self.n_p == other.n_p
    }
}

pub(crate) fn check_size(axis: &'static str, size: usize) -> Result<()> {
    if size < 8 || !size.is_power_of_two() {
        return Err(Error::GridSize { axis, size });
    }
    Ok(())
}

fn check_bounds(axis: &'static str, min: f64, max: f64) -> Result<()> {
    if !(min.is_finite() && max.is_finite() && max > min) {
        return Err(Error::InvertedBounds { axis, min, max });
    }
    Ok(())
}

/// Angular wavenumbers conjugate to a periodic axis of the given length.
pub(crate) fn wavenumbers(n: usize, length: f64) -> Vec<f64> {
    let base = 2.0 * PI / length;
    (0..n)
        .map(|j| {
            let j = j as isize;
            let signed = if j < n as isize / 2 { j } else { j - n as isize };
            signed as f64 * base
        })
        .collect()
}

impl PhaseSpaceGrid {
    pub fn new(x_min: f64, x_max: f64, n_x: usize, p_min: f64, p_max: f64, n_p: usize) -> Result<Self> {
        check_bounds("x", x_min, x_max)?;
        check_bounds("p", p_min, p_max)?;
        check_size("n_x", n_x)?;
        check_size("n_p", n_p)?;
        let dx = (x_max - x_min) / n_x as f64;
        let dp = (p_max - p_min) / n_p as f64;
        Ok(Self {
            x_min,
            x_max,
            n_x,
            p_min,
            p_max,
            n_p,
            dx,
            dp,
            k_x: wavenumbers(n_x, x_max - x_min),
            k_p: wavenumbers(n_p, p_max - p_min),
        })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }
    pub fn x_max(&self) -> f64 {
        self.x_max
    }
    pub fn p_min(&self) -> f64 {
        self.p_min
    }
    pub fn p_max(&self) -> f64 {
        self.p_max
    }
    pub fn n_x(&self) -> usize {
        self.n_x
    }
    pub fn n_p(&self) -> usize {
        self.n_p
    }
    pub fn dx(&self) -> f64 {
        self.dx
    }
    pub fn dp(&self) -> f64 {
        self.dp
    }

    /// Area of one lattice cell, `dx·dp`.
    pub fn cell_area(&self) -> f64 {
        self.dx * self.dp
    }

    /// Number of nodes, `n_x·n_p`.
    pub fn len(&self) -> usize {
        self.n_x * self.n_p
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx
    }

    pub fn p(&self, j: usize) -> f64 {
        self.p_min + j as f64 * self.dp
    }

    pub fn xs(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.n_x).map(|i| self.x(i))
    }

    pub fn ps(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.n_p).map(|j| self.p(j))
    }

    /// Row-major (x-major) offset of node `(i, j)`. Indices wrap.
    pub fn index(&self, i: isize, j: isize) -> usize {
        let i = i.rem_euclid(self.n_x as isize) as usize;
        let j = j.rem_euclid(self.n_p as isize) as usize;
        i * self.n_p + j
    }

    /// Wavenumbers conjugate to x.
    pub fn k_x(&self) -> &[f64] {
        &self.k_x
    }

    /// Wavenumbers conjugate to p (the Moyal variable λ).
    pub fn k_p(&self) -> &[f64] {
        &self.k_p
    }

    pub fn spacing(&self, axis: Axis) -> f64 {
        match axis {
            Axis::X => self.dx,
            Axis::P => self.dp,
        }
    }

    pub fn size(&self, axis: Axis) -> usize {
        match axis {
            Axis::X => self.n_x,
            Axis::P => self.n_p,
        }
    }

    pub fn width(&self, axis: Axis) -> f64 {
        match axis {
            Axis::X => self.x_max - self.x_min,
            Axis::P => self.p_max - self.p_min,
        }
    }

    pub(crate) fn ensure_same(&self, other: &Self) -> Result<()> {
        if self != other {
            return Err(Error::GridMismatch(format!(
                "[{}, {})x{} / [{}, {})x{} vs [{}, {})x{} / [{}, {})x{}",
                self.x_min,
                self.x_max,
                self.n_x,
                self.p_min,
                self.p_max,
                self.n_p,
                other.x_min,
                other.x_max,
                other.n_x,
                other.p_min,
                other.p_max,
                other.n_p
            )));
        }
        Ok(())
    }
}
