use crate::error::Result;
use crate::split::{Bracket, SplitStepper};
use crate::{Distribution, PhaseSpaceGrid, PhysicalParams, Potential};

/// Liouville transport `∂ρ/∂t = {H, ρ}` by exact spectral shifts.
///
/// The engine owns its multiplier tables, built once for a fixed
/// `(grid, potential, params, dt)`.
#[derive(Debug, Clone)]
pub struct LiouvilleEngine {
    stepper: SplitStepper,
}

impl LiouvilleEngine {
    pub fn new(grid: &PhaseSpaceGrid, pot: &Potential, params: &PhysicalParams, dt: f64) -> Result<Self> {
        let stepper = SplitStepper::new(grid, pot, params, Bracket::Poisson, false, dt, "classical")?;
        Ok(Self { stepper })
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

    /// `n` steps with adjacent half drifts fused.
    pub fn advance(&mut self, dist: &mut Distribution, n: u64) -> Result<()> {
        self.stepper.advance(dist, n)
    }
}

/// One Strang step of Liouville transport: half drift along x by `p/m`,
/// full momentum kick by `-V'(x)·dt`, half drift.
pub fn liouville_step(
    dist: &Distribution,
    pot: &Potential,
    params: &PhysicalParams,
    dt: f64,
) -> Result<Distribution> {
    let mut engine = LiouvilleEngine::new(dist.grid(), pot, params, dt)?;
    let mut out = dist.clone();
    engine.step(&mut out)?;
    Ok(out)
}
