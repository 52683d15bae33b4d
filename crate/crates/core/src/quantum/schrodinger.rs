use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::fft::{cis, Fft};
use crate::grid::wavenumbers;
use crate::split::steps_per_kick;
use crate::{PhysicalParams, Potential, Wavefunction};

/// Split-operator propagator for `iħ∂ψ/∂t = [-ħ²/2m ∂² + V(x)]ψ` on a
/// periodic x-axis: half potential phase, exact kinetic phase in k space,
/// half potential phase. Kicks multiply by `exp(-i V_kick(x)/ħ)` after the
/// step that lands on `t = jT`.
#[derive(Debug, Clone)]
pub struct SchrodingerEngine {
    x_min: f64,
    x_max: f64,
    dt: f64,
    fft: Fft,
    half_potential: Vec<Complex64>,
    kinetic: Vec<Complex64>,
    kick: Option<Vec<Complex64>>,
    kick_every: Option<u64>,
}

impl SchrodingerEngine {
    pub fn new(psi: &Wavefunction, pot: &Potential, params: &PhysicalParams, dt: f64) -> Result<Self> {
        params.validate()?;
        if !(dt.is_finite() && dt > 0.0) {
            return Err(invalid("dt", "must be positive"));
        }
        let n = psi.len();
        let hbar = params.hbar;
        let xs: Vec<f64> = (0..n).map(|i| psi.x(i)).collect();
        let k = wavenumbers(n, psi.x_max() - psi.x_min());
        Ok(Self {
            x_min: psi.x_min(),
            x_max: psi.x_max(),
            dt,
            fft: Fft::new(n)?,
            half_potential: xs.iter().map(|&x| cis(-pot.value(x) * dt / (2.0 * hbar))).collect(),
            kinetic: k.iter().map(|&k| cis(-hbar * k * k * dt / (2.0 * params.mass))).collect(),
            kick: pot.kick().map(|kick| xs.iter().map(|&x| cis(-kick.value(x) / hbar)).collect()),
            kick_every: pot.kick().map(|k| steps_per_kick(k, dt)).transpose()?,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn step(&mut self, psi: &mut Wavefunction) -> Result<()> {
        self.advance(psi, 1)
    }

    pub fn advance(&mut self, psi: &mut Wavefunction, n: u64) -> Result<()> {
        if psi.len() != self.fft.len() || psi.x_min() != self.x_min || psi.x_max() != self.x_max {
            return Err(Error::GridMismatch("wavefunction axis differs from the engine's".into()));
        }
        for _ in 0..n {
            let values = psi.values_mut();
            mul(values, &self.half_potential);
            self.fft.forward(values);
            mul(values, &self.kinetic);
            self.fft.inverse(values);
            mul(values, &self.half_potential);
            let time = psi.time() + self.dt;
            psi.set_time(time);
            let step = libm::round(time / self.dt) as u64;
            if let (Some(kick), Some(every)) = (&self.kick, self.kick_every) {
                if step % every == 0 {
                    mul(psi.values_mut(), kick);
                }
            }
            if psi.values().iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
                return Err(Error::NumericalBlowup {
                    context: "schrodinger",
                    step,
                });
            }
        }
        Ok(())
    }
}

fn mul(values: &mut [Complex64], by: &[Complex64]) {
    for (v, m) in values.iter_mut().zip(by) {
        *v *= m;
    }
}

/// One split-operator step.
pub fn schrodinger_step(psi: &Wavefunction, pot: &Potential, params: &PhysicalParams, dt: f64) -> Result<Wavefunction> {
    let mut engine = SchrodingerEngine::new(psi, pot, params, dt)?;
    let mut out = psi.clone();
    engine.step(&mut out)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::PhaseSpaceGrid;
    use core::f64::consts::PI;

    fn grid() -> PhaseSpaceGrid {
        PhaseSpaceGrid::new(-12.0, 12.0, 256, -8.0, 8.0, 64).unwrap()
    }

    fn unit() -> PhysicalParams {
        PhysicalParams::new(1.0, 1.0).unwrap()
    }

    #[test]
    fn norm_is_preserved() {
        let psi = Wavefunction::gaussian(&grid(), 1.0, 0.5, 0.8, 1.0).unwrap();
        let v = Potential::polynomial(&[0.0, 0.0, -0.5, 0.0, 0.25]).unwrap();
        let out = schrodinger_step(&psi, &v, &unit(), 0.01).unwrap();
        assert!((out.norm_sq() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coherent_state_returns_after_one_period() {
        // σx = 1/√2 is the harmonic ground-state width for ħ = m = ω = 1
        let psi0 = Wavefunction::gaussian(&grid(), 1.0, 0.0, libm::sqrt(0.5), 1.0).unwrap();
        let n = 4000;
        let dt = 2.0 * PI / n as f64;
        let mut engine = SchrodingerEngine::new(&psi0, &Potential::harmonic(1.0), &unit(), dt).unwrap();
        let mut psi = psi0.clone();
        engine.advance(&mut psi, n).unwrap();
        let fidelity = psi0.overlap(&psi).unwrap().norm_sqr();
        assert!(fidelity >= 1.0 - 1e-8, "{fidelity}");
    }

    #[test]
    fn free_packet_spreads() {
        let s0 = 0.8;
        let psi0 = Wavefunction::gaussian(&grid(), 0.0, 0.0, s0, 1.0).unwrap();
        let mut engine = SchrodingerEngine::new(&psi0, &Potential::free(), &unit(), 0.01).unwrap();
        let mut psi = psi0.clone();
        engine.advance(&mut psi, 200).unwrap();
        let t = psi.time();
        let (_, var) = psi.position_moments();
        let expected = s0 * s0 + (t / (2.0 * s0)) * (t / (2.0 * s0));
        assert!((var - expected).abs() < 1e-6, "{var} vs {expected}");
    }

    #[test]
    fn mismatched_axis_is_rejected() {
        let psi = Wavefunction::gaussian(&grid(), 0.0, 0.0, 1.0, 1.0).unwrap();
        let other = PhaseSpaceGrid::new(-12.0, 12.0, 128, -8.0, 8.0, 64).unwrap();
        let mut wrong = Wavefunction::gaussian(&other, 0.0, 0.0, 1.0, 1.0).unwrap();
        let mut engine = SchrodingerEngine::new(&psi, &Potential::free(), &unit(), 0.01).unwrap();
        assert!(engine.step(&mut wrong).is_err());
    }
}
