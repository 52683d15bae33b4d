//! Scalar functionals of phase-space fields and time series.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::grid::Axis;
use crate::spectral::AxisTransform;
use crate::{Distribution, PhysicalParams};

/// Highest order accepted by [`derivative_norm`].
pub const MAX_DERIVATIVE_NORM_ORDER: usize = 8;

/// Named time series with strictly increasing times.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticSeries {
    name: String,
    times: Vec<f64>,
    values: Vec<f64>,
}

impl DiagnosticSeries {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            times: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn from_parts(name: impl Into<String>, times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(invalid(
                "series",
                format!("{} times but {} values", times.len(), values.len()),
            ));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("series", "times must be strictly increasing"));
        }
        Ok(Self {
            name: name.into(),
            times,
            values,
        })
    }

    pub fn push(&mut self, time: f64, value: f64) -> Result<()> {
        if let Some(&last) = self.times.last() {
            if !(time > last) {
                return Err(invalid(
                    "series",
                    format!("time {time} does not follow {last}"),
                ));
            }
        }
        self.times.push(time);
        self.values.push(value);
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// `∫ρ dx dp`.
pub fn norm(dist: &Distribution) -> f64 {
    dist.values().iter().sum::<f64>() * dist.grid().cell_area()
}

/// `2πħ ∫ρ² dx dp`; 1 for pure states.
pub fn purity(dist: &Distribution, params: &PhysicalParams) -> f64 {
    let sq: f64 = dist.values().iter().map(|v| v * v).sum();
    2.0 * core::f64::consts::PI * params.hbar * sq * dist.grid().cell_area()
}

/// `∫(|ρ| - ρ) dx dp`, twice the volume of the negative part.
pub fn negativity_volume(dist: &Distribution) -> f64 {
    // fold from +0.0: an empty float sum is -0.0
    let s = dist
        .values()
        .iter()
        .filter(|&&v| v < 0.0)
        .fold(0.0, |acc, v| acc - 2.0 * v);
    s * dist.grid().cell_area()
}

/// `√(∫(a-b)² dx dp)`.
pub fn l2_distance(a: &Distribution, b: &Distribution) -> Result<f64> {
    a.grid().ensure_same(b.grid())?;
    let s: f64 = a
        .values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    Ok(libm::sqrt(s * a.grid().cell_area()))
}

/// `‖∂ⁿρ/∂pⁿ‖₂`, with the derivative taken spectrally along p.
///
/// By Parseval each p-line contributes `(dp/n_p) Σ_k |ρ̂_k|² w_k` with
/// `w_k = λ_k^{2n}`. The Nyquist mode is real on the grid, so its
/// derivative is `Re((iλ)^n)` times itself: zero for odd orders.
pub fn derivative_norm(dist: &Distribution, order: usize) -> Result<f64> {
    if order > MAX_DERIVATIVE_NORM_ORDER {
        return Err(invalid(
            "order",
            format!("{order} exceeds {MAX_DERIVATIVE_NORM_ORDER}"),
        ));
    }
    let grid = dist.grid();
    let n_p = grid.n_p();
    let nyquist = n_p / 2;
    let weights: Vec<f64> = grid
        .k_p()
        .iter()
        .enumerate()
        .map(|(k, &lambda)| {
            if k == nyquist && order % 2 == 1 {
                0.0
            } else {
                libm::pow(lambda * lambda, order as f64)
            }
        })
        .collect();
    let mut transform = AxisTransform::new(grid, Axis::P);
    let mut total = 0.0;
    transform.spectra(dist.values(), |_, spectrum| {
        total += spectrum
            .iter()
            .zip(&weights)
            .map(|(s, w)| s.norm_sqr() * w)
            .sum::<f64>();
    });
    Ok(libm::sqrt(total * grid.cell_area() / n_p as f64))
}

/// First time the series reaches `threshold`, linearly interpolated
/// between the bracketing samples. Returns `+∞` if it never does, and the
/// first time if the series starts at or above the threshold.
pub fn break_time(series: &DiagnosticSeries, threshold: f64) -> f64 {
    let (t, v) = (series.times(), series.values());
    for i in 0..v.len() {
        if v[i] >= threshold {
            if i == 0 {
                return t[0];
            }
            let f = (threshold - v[i - 1]) / (v[i] - v[i - 1]);
            return t[i - 1] + f * (t[i] - t[i - 1]);
        }
    }
    f64::INFINITY
}

/// Least-squares line `y = slope·x + intercept` with its coefficient of
/// determination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    if x.len() != y.len() {
        return Err(invalid("fit", "x and y lengths differ"));
    }
    if x.len() < 2 {
        return Err(Error::Empty("fit needs at least two points"));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(invalid("fit", "non-finite sample"));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return Err(invalid("fit", "x values are all equal"));
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(LinearFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
    })
}
