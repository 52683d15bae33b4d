use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::cis;
use crate::{Distribution, PhaseSpaceGrid, PhysicalParams, Wavefunction};

/// Wigner function `W(x,p) = (1/πħ) ∫ ψ*(x+y) ψ(x-y) e^{2ipy/ħ} dy` of a
/// pure state, sampled on `grid`.
///
/// The y integral runs over the lattice `y = m·dx` and uses `ψ = 0`
/// outside the axis (no periodic wrap). Terms `±m` are conjugate, so the
/// sum is formed as `g_0 + 2 Re Σ_{m>=1} g_m e^{2ipm·dx/ħ}` and is real by
/// construction.
pub fn wigner_transform(psi: &Wavefunction, grid: &PhaseSpaceGrid, params: &PhysicalParams) -> Result<Distribution> {
    params.validate()?;
    if !psi.matches_grid(grid) {
        return Err(Error::GridMismatch(
            "wavefunction is not sampled on the grid's x-axis".into(),
        ));
    }
    let (n_x, n_p) = (grid.n_x(), grid.n_p());
    let dx = grid.dx();
    let hbar = params.hbar;
    let half = n_x / 2;

    // phases[k * half + (m - 1)] = e^{2 i p_k m dx / ħ}
    let mut phases = Vec::with_capacity(n_p * half);
    for p in grid.ps() {
        phases.extend((1..=half).map(|m| cis(2.0 * p * m as f64 * dx / hbar)));
    }

    let v = psi.values();
    let scale = dx / (core::f64::consts::PI * hbar);
    let mut out = Vec::with_capacity(n_x * n_p);
    let mut g: Vec<Complex64> = Vec::with_capacity(half);
    for j in 0..n_x {
        let reach = j.min(n_x - 1 - j);
        g.clear();
        g.extend((1..=reach).map(|m| v[j + m].conj() * v[j - m]));
        let g0 = v[j].norm_sqr();
        for k in 0..n_p {
            let row = &phases[k * half..k * half + reach];
            let s: f64 = g.iter().zip(row).map(|(a, b)| a.re * b.re - a.im * b.im).sum();
            out.push(scale * (g0 + 2.0 * s));
        }
    }
    let mut dist = Distribution::from_values(grid, out, 0.0)?;
    dist.set_time(psi.time());
    Ok(dist)
}
