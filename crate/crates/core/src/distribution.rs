use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::grid::{Axis, PhaseSpaceGrid};

/// Real field `ρ(x, p)` on a phase-space grid: a classical density or a
/// Wigner function (which may be negative).
///
/// Values are stored x-major: `values[i * n_p + j] = ρ(x_i, p_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    grid: PhaseSpaceGrid,
    values: Vec<f64>,
    time: f64,
}

impl Distribution {
    pub fn zeros(grid: &PhaseSpaceGrid) -> Self {
        Self {
            values: vec![0.0; grid.len()],
            grid: grid.clone(),
            time: 0.0,
        }
    }

    /// Samples `f(x, p)` on every node.
    pub fn from_fn(grid: &PhaseSpaceGrid, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for x in grid.xs() {
            for p in grid.ps() {
                values.push(f(x, p));
            }
        }
        Self {
            grid: grid.clone(),
            values,
            time: 0.0,
        }
    }

    pub fn from_values(grid: &PhaseSpaceGrid, values: Vec<f64>, time: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        let dist = Self {
            grid: grid.clone(),
            values,
            time,
        };
        dist.check_finite("distribution", 0)?;
        Ok(dist)
    }

    pub fn grid(&self) -> &PhaseSpaceGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn set_time(&mut self, time: f64) {
        self.time = time;
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid.n_p() + j]
    }

    /// Row of constant `x_i`, indexed by p.
    pub fn row(&self, i: usize) -> &[f64] {
        let n_p = self.grid.n_p();
        &self.values[i * n_p..(i + 1) * n_p]
    }

    pub fn check_finite(&self, context: &'static str, step: u64) -> Result<()> {
        if self.values.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::NumericalBlowup { context, step })
        }
    }

    /// Rejects fields with values below `-tolerance`; classical densities
    /// must start nonnegative.
    pub fn check_nonnegative(&self, tolerance: f64) -> Result<()> {
        let min = self.values.iter().copied().fold(f64::INFINITY, f64::min);
        if min < -tolerance {
            return Err(invalid(
                "initial_state",
                format!("classical density has negative value {min:e}"),
            ));
        }
        Ok(())
    }

    /// Marginal density along `axis` (the other axis integrated out).
    pub fn marginal(&self, axis: Axis) -> Vec<f64> {
        let (n_x, n_p) = (self.grid.n_x(), self.grid.n_p());
        match axis {
            Axis::X => self
                .values
                .chunks_exact(n_p)
                .map(|row| row.iter().sum::<f64>() * self.grid.dp())
                .collect(),
            Axis::P => {
                let mut out = vec![0.0; n_p];
                for row in self.values.chunks_exact(n_p) {
                    for (o, v) in out.iter_mut().zip(row) {
                        *o += v;
                    }
                }
                let dx = self.grid.dx();
                debug_assert_eq!(self.values.len(), n_x * n_p);
                out.iter_mut().for_each(|o| *o *= dx);
                out
            }
        }
    }

    /// Mean and variance of the coordinate along `axis`, normalised by the
    /// field's own mass. Coordinates are taken at face value (no unwrapping
    /// of the periodic axis).
    pub fn moments(&self, axis: Axis) -> (f64, f64) {
        let marginal = self.marginal(axis);
        let h = self.grid.spacing(axis);
        let coord = |k: usize| match axis {
            Axis::X => self.grid.x(k),
            Axis::P => self.grid.p(k),
        };
        let mass: f64 = marginal.iter().sum::<f64>() * h;
        let mean = marginal
            .iter()
            .enumerate()
            .map(|(k, m)| coord(k) * m)
            .sum::<f64>()
            * h
            / mass;
        let var = marginal
            .iter()
            .enumerate()
            .map(|(k, m)| {
                let d = coord(k) - mean;
                d * d * m
            })
            .sum::<f64>()
            * h
            / mass;
        (mean, var)
    }

    /// Fraction of `∫|ρ|` sitting within the outer `band` fraction of either
    /// axis. Large values mean the state is feeling the periodic wrap.
    pub fn edge_mass(&self, band: f64) -> f64 {
        let (n_x, n_p) = (self.grid.n_x(), self.grid.n_p());
        let bx = (libm::ceil(n_x as f64 * band * 0.5) as usize).min(n_x / 2);
        let bp = (libm::ceil(n_p as f64 * band * 0.5) as usize).min(n_p / 2);
        let in_band = |i: usize, j: usize| i < bx || i >= n_x - bx || j < bp || j >= n_p - bp;
        let mut edge = 0.0;
        let mut total = 0.0;
        for i in 0..n_x {
            for j in 0..n_p {
                let v = libm::fabs(self.values[i * n_p + j]);
                total += v;
                if in_band(i, j) {
                    edge += v;
                }
            }
        }
        if total > 0.0 {
            edge / total
        } else {
            0.0
        }
    }
}

/// Normalised Gaussian `ρ ∝ exp(-(x-x0)²/2σx² - (p-p0)²/2σp²)`.
///
/// The discrete quadrature `Σρ·dx·dp` is exactly 1 up to rounding. Widths
/// must satisfy `4σ <= axis width` so that the tails are representable.
pub fn init_gaussian(
    grid: &PhaseSpaceGrid,
    x0: f64,
    p0: f64,
    sigma_x: f64,
    sigma_p: f64,
) -> Result<Distribution> {
    for (name, s) in [("sigma_x", sigma_x), ("sigma_p", sigma_p)] {
        if !(s.is_finite() && s > 0.0) {
            return Err(invalid(name, format!("must be positive, got {s}")));
        }
    }
    if !(x0.is_finite() && p0.is_finite()) {
        return Err(invalid("center", "must be finite"));
    }
    if 4.0 * sigma_x > grid.width(Axis::X) {
        return Err(Error::StateTooWide(format!(
            "4*sigma_x = {} exceeds the x width {}",
            4.0 * sigma_x,
            grid.width(Axis::X)
        )));
    }
    if 4.0 * sigma_p > grid.width(Axis::P) {
        return Err(Error::StateTooWide(format!(
            "4*sigma_p = {} exceeds the p width {}",
            4.0 * sigma_p,
            grid.width(Axis::P)
        )));
    }
    let ax = 0.5 / (sigma_x * sigma_x);
    let ap = 0.5 / (sigma_p * sigma_p);
    // Separable: evaluate the two 1-D factors once.
    let gx: Vec<f64> = grid.xs().map(|x| libm::exp(-ax * (x - x0) * (x - x0))).collect();
    let gp: Vec<f64> = grid.ps().map(|p| libm::exp(-ap * (p - p0) * (p - p0))).collect();
    let mut dist = Distribution::zeros(grid);
    let n_p = grid.n_p();
    for (row, fx) in dist.values.chunks_exact_mut(n_p).zip(&gx) {
        for (v, fp) in row.iter_mut().zip(&gp) {
            *v = fx * fp;
        }
    }
    let mass: f64 = dist.values.iter().sum::<f64>() * grid.cell_area();
    if !(mass > 0.0 && mass.is_finite()) {
        return Err(Error::StateTooWide(
            "Gaussian has no mass on the grid nodes".into(),
        ));
    }
    dist.values.iter_mut().for_each(|v| *v /= mass);
    Ok(dist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::norm;
    use proptest::prelude::*;

    fn grid() -> PhaseSpaceGrid {
        PhaseSpaceGrid::new(-8.0, 8.0, 128, -8.0, 8.0, 128).unwrap()
    }

    #[test]
    fn symmetric_about_origin() {
        let g = grid();
        let d = init_gaussian(&g, 0.0, 0.0, 1.0, 1.0).unwrap();
        let (n_x, n_p) = (g.n_x(), g.n_p());
        // node k sits at -8 + k/8; its mirror is index n - k (mod n)
        for i in 1..n_x {
            for j in 1..n_p {
                assert_eq!(d.at(i, j), d.at(n_x - i, n_p - j));
            }
        }
    }

    #[test]
    fn too_wide() {
        let g = grid();
        assert!(matches!(
            init_gaussian(&g, 0.0, 0.0, 4.5, 1.0),
            Err(Error::StateTooWide(_))
        ));
        assert!(init_gaussian(&g, 0.0, 0.0, 4.0, 4.0).is_ok());
        assert!(init_gaussian(&g, 0.0, 0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn moments_of_gaussian() {
        let g = grid();
        let d = init_gaussian(&g, 1.0, -0.5, 0.8, 0.6).unwrap();
        let (mx, vx) = d.moments(Axis::X);
        let (mp, vp) = d.moments(Axis::P);
        assert!((mx - 1.0).abs() < 1e-12);
        assert!((vx - 0.64).abs() < 1e-12);
        assert!((mp + 0.5).abs() < 1e-12);
        assert!((vp - 0.36).abs() < 1e-12);
        assert!(d.edge_mass(0.1) < 1e-8);
    }

    #[test]
    fn nonnegativity_check() {
        let g = grid();
        let mut d = init_gaussian(&g, 0.0, 0.0, 1.0, 1.0).unwrap();
        assert!(d.check_nonnegative(1e-12).is_ok());
        d.values_mut()[3] = -1e-3;
        assert!(d.check_nonnegative(1e-12).is_err());
        d.values_mut()[3] = f64::NAN;
        assert!(d.check_finite("test", 7).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn gaussian_is_normalised(
            x0 in -2.0..2.0f64, p0 in -2.0..2.0f64,
            sx in 0.2..4.0f64, sp in 0.2..4.0f64,
        ) {
            let d = init_gaussian(&grid(), x0, p0, sx, sp).unwrap();
            prop_assert!((norm(&d) - 1.0).abs() < 1e-10);
        }
    }
}
