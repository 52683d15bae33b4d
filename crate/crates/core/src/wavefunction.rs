use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::fft::cis;
use crate::grid::PhaseSpaceGrid;

/// Tolerance on `∫|ψ|² dx = 1` accepted at construction.
const NORM_TOLERANCE: f64 = 1e-9;

/// Pure state `ψ(x)` sampled on the x-axis of a phase-space grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Wavefunction {
    x_min: f64,
    x_max: f64,
    values: Vec<Complex64>,
    time: f64,
}

impl Wavefunction {
    /// Takes samples that must already be normalised.
    pub fn new(grid: &PhaseSpaceGrid, values: Vec<Complex64>) -> Result<Self> {
        let psi = Self::unchecked(grid, values)?;
        let norm = psi.norm_sq();
        if libm::fabs(norm - 1.0) > NORM_TOLERANCE {
            return Err(invalid("wavefunction", format!("norm {norm} is not 1")));
        }
        Ok(psi)
    }

    /// Rescales the samples to unit norm.
    pub fn normalized(grid: &PhaseSpaceGrid, values: Vec<Complex64>) -> Result<Self> {
        let mut psi = Self::unchecked(grid, values)?;
        let norm = psi.norm_sq();
        if !(norm > 0.0) {
            return Err(invalid("wavefunction", "zero state cannot be normalised"));
        }
        let scale = 1.0 / libm::sqrt(norm);
        psi.values.iter_mut().for_each(|v| *v *= scale);
        Ok(psi)
    }

    /// Samples `f(x)` and normalises.
    pub fn from_fn(grid: &PhaseSpaceGrid, f: impl FnMut(f64) -> Complex64) -> Result<Self> {
        Self::normalized(grid, grid.xs().map(f).collect())
    }

    /// Gaussian packet `exp(-(x-x0)²/4σx² + i·p0·x/ħ)` with position spread
    /// `σx` (and momentum spread `ħ/2σx`).
    pub fn gaussian(grid: &PhaseSpaceGrid, x0: f64, p0: f64, sigma_x: f64, hbar: f64) -> Result<Self> {
        if !(sigma_x.is_finite() && sigma_x > 0.0) {
            return Err(invalid("sigma_x", "must be positive"));
        }
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(invalid("hbar", "must be positive"));
        }
        let a = 0.25 / (sigma_x * sigma_x);
        Self::from_fn(grid, |x| {
            let d = x - x0;
            cis(p0 * x / hbar) * libm::exp(-a * d * d)
        })
    }

    fn unchecked(grid: &PhaseSpaceGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.n_x() {
            return Err(Error::GridMismatch(format!(
                "{} samples for an x-axis of {} nodes",
                values.len(),
                grid.n_x()
            )));
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NumericalBlowup {
                context: "wavefunction",
                step: 0,
            });
        }
        Ok(Self {
            x_min: grid.x_min(),
            x_max: grid.x_max(),
            values,
            time: 0.0,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.values.len() as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub(crate) fn set_time(&mut self, time: f64) {
        self.time = time;
    }

    /// `∫|ψ|² dx` by the rectangle rule.
    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.dx()
    }

    /// `|ψ(x_i)|²`.
    pub fn density(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }

    /// `⟨self|other⟩`.
    pub fn overlap(&self, other: &Self) -> Result<Complex64> {
        self.ensure_same_axis(other)?;
        let sum: Complex64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(sum * self.dx())
    }

    /// Whether the samples live on `grid`'s x-axis.
    pub fn matches_grid(&self, grid: &PhaseSpaceGrid) -> bool {
        self.values.len() == grid.n_x() && self.x_min == grid.x_min() && self.x_max == grid.x_max()
    }

    fn ensure_same_axis(&self, other: &Self) -> Result<()> {
        if self.values.len() != other.values.len() || self.x_min != other.x_min || self.x_max != other.x_max {
            return Err(Error::GridMismatch("wavefunctions live on different axes".into()));
        }
        Ok(())
    }

    /// Position mean and variance.
    pub fn position_moments(&self) -> (f64, f64) {
        let norm = self.norm_sq();
        let dx = self.dx();
        let mean = (0..self.len())
            .map(|i| self.x(i) * self.values[i].norm_sqr())
            .sum::<f64>()
            * dx
            / norm;
        let var = (0..self.len())
            .map(|i| {
                let d = self.x(i) - mean;
                d * d * self.values[i].norm_sqr()
            })
            .sum::<f64>()
            * dx
            / norm;
        (mean, var)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn grid() -> PhaseSpaceGrid {
        PhaseSpaceGrid::new(-10.0, 10.0, 256, -8.0, 8.0, 64).unwrap()
    }

    #[test]
    fn gaussian_is_normalised_with_expected_spread() {
        let psi = Wavefunction::gaussian(&grid(), 1.0, 0.5, 0.7, 1.0).unwrap();
        assert!((psi.norm_sq() - 1.0).abs() < 1e-12);
        let (mean, var) = psi.position_moments();
        assert!((mean - 1.0).abs() < 1e-10);
        assert!((var - 0.49).abs() < 1e-10);
    }

    #[test]
    fn new_requires_unit_norm() {
        let g = grid();
        assert!(Wavefunction::new(&g, vec![Complex64::new(1.0, 0.0); 256]).is_err());
        assert!(Wavefunction::new(&g, vec![Complex64::new(1.0, 0.0); 8]).is_err());
        assert!(Wavefunction::normalized(&g, vec![Complex64::default(); 256]).is_err());
        let c = 1.0 / libm::sqrt(20.0);
        assert!(Wavefunction::new(&g, vec![Complex64::new(c, 0.0); 256]).is_ok());
    }

    #[test]
    fn self_overlap_is_one() {
        let psi = Wavefunction::gaussian(&grid(), -2.0, 1.0, 1.0, 0.5).unwrap();
        let o = psi.overlap(&psi).unwrap();
        assert!((o.re - 1.0).abs() < 1e-12 && o.im.abs() < 1e-12);
        assert!(psi.matches_grid(&grid()));
    }
}
