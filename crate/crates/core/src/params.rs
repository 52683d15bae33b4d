use alloc::format;

use crate::error::{invalid, Error, Result};
use crate::grid::PhaseSpaceGrid;

/// Planck's constant and the particle mass, in model units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    pub hbar: f64,
    pub mass: f64,
}

impl PhysicalParams {
    pub fn new(hbar: f64, mass: f64) -> Result<Self> {
        let params = Self { hbar, mass };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.hbar.is_finite() && self.hbar > 0.0) {
            return Err(invalid("hbar", format!("must be positive, got {}", self.hbar)));
        }
        if !(self.mass.is_finite() && self.mass > 0.0) {
            return Err(invalid("mass", format!("must be positive, got {}", self.mass)));
        }
        Ok(())
    }

    /// The grid must resolve a quantum cell: `dx·dp <= ħ`.
    pub fn check_resolvable(&self, grid: &PhaseSpaceGrid) -> Result<()> {
        let cell = grid.cell_area();
        if cell > self.hbar {
            return Err(Error::Resolvability {
                cell,
                hbar: self.hbar,
            });
        }
        Ok(())
    }
}

impl Default for PhysicalParams {
    fn default() -> Self {
        Self {
            hbar: 1.0,
            mass: 1.0,
        }
    }
}
