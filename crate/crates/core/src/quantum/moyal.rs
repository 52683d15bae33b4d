use num_complex::Complex64;

use crate::error::Result;
use crate::split::{Bracket, SplitStepper};
use crate::{Distribution, PhaseSpaceGrid, PhysicalParams, Potential};

/// How many ħ-correction terms of the Moyal series to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Truncation {
    /// Every term that can be non-zero, `n <= (degree - 1) / 2`; cosine
    /// kicks use the summed closed form.
    #[default]
    Exact,
    /// Terms `n = 0..=N`. `Order(0)` is the Poisson bracket.
    Order(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MoyalConfig {
    pub truncation: Truncation,
    /// Zero spectral content above 2/3 of the Nyquist wavenumber on both
    /// axes. Off by default: the mask is not norm preserving.
    pub antialias: bool,
}

/// Everything a propagator table depends on.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagatorStamp {
    pub grid: PhaseSpaceGrid,
    pub potential: Potential,
    pub params: PhysicalParams,
    pub config: MoyalConfig,
    pub dt: f64,
}

/// Precomputed multipliers of one Moyal step, valid for its stamp.
#[derive(Debug, Clone)]
pub struct SpectralPropagator {
    stamp: PropagatorStamp,
    stepper: SplitStepper,
}

impl SpectralPropagator {
    pub fn new(
        grid: &PhaseSpaceGrid,
        pot: &Potential,
        params: &PhysicalParams,
        cfg: MoyalConfig,
        dt: f64,
    ) -> Result<Self> {
        params.validate()?;
        params.check_resolvable(grid)?;
        let stepper = SplitStepper::new(grid, pot, params, Bracket::from_config(params, &cfg), cfg.antialias, dt, "quantum")?;
        Ok(Self {
            stamp: PropagatorStamp {
                grid: grid.clone(),
                potential: pot.clone(),
                params: *params,
                config: cfg,
                dt,
            },
            stepper,
        })
    }

    pub fn stamp(&self) -> &PropagatorStamp {
        &self.stamp
    }

    /// Whether the table was built for exactly these inputs.
    pub fn matches(&self, stamp: &PropagatorStamp) -> bool {
        self.stamp == *stamp
    }

    /// Potential-substep multiplier `M[x_i][λ_k]`.
    pub fn multiplier(&self, i: usize, k: usize) -> Complex64 {
        self.stepper.potential_multiplier(i, k)
    }

    pub(crate) fn into_stepper(self) -> SplitStepper {
        self.stepper
    }
}

/// Wigner function transport under the Moyal bracket.
#[derive(Debug, Clone)]
pub struct MoyalEngine {
    stamp: PropagatorStamp,
    stepper: SplitStepper,
}

impl MoyalEngine {
    pub fn new(
        grid: &PhaseSpaceGrid,
        pot: &Potential,
        params: &PhysicalParams,
        cfg: MoyalConfig,
        dt: f64,
    ) -> Result<Self> {
        Ok(Self::from_propagator(SpectralPropagator::new(grid, pot, params, cfg, dt)?))
    }

    pub fn from_propagator(prop: SpectralPropagator) -> Self {
        Self {
            stamp: prop.stamp.clone(),
            stepper: prop.into_stepper(),
        }
    }

    pub fn stamp(&self) -> &PropagatorStamp {
        &self.stamp
    }

    /// Rebuilds the tables if any stamped input changed.
    pub fn retarget(&mut self, pot: &Potential, params: &PhysicalParams, cfg: MoyalConfig, dt: f64) -> Result<()> {
        let stamp = PropagatorStamp {
            grid: self.stamp.grid.clone(),
            potential: pot.clone(),
            params: *params,
            config: cfg,
            dt,
        };
        if stamp != self.stamp {
            *self = Self::new(&stamp.grid, pot, params, cfg, dt)?;
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        self.stepper.dt()
    }

    pub fn grid(&self) -> &PhaseSpaceGrid {
        self.stepper.grid()
    }

    pub fn step(&mut self, dist: &mut Distribution) -> Result<()> {
        self.stepper.advance(dist, 1)
    }

    pub fn advance(&mut self, dist: &mut Distribution, n: u64) -> Result<()> {
        self.stepper.advance(dist, n)
    }

    pub(crate) fn into_stepper(self) -> SplitStepper {
        self.stepper
    }
}

/// One Strang step of Wigner–Moyal evolution.
pub fn moyal_step(
    dist: &Distribution,
    pot: &Potential,
    params: &PhysicalParams,
    cfg: MoyalConfig,
    dt: f64,
) -> Result<Distribution> {
    let mut engine = MoyalEngine::new(dist.grid(), pot, params, cfg, dt)?;
    let mut out = dist.clone();
    engine.step(&mut out)?;
    Ok(out)
}
