//! Phase-space engines for comparing classical and quantum evolution of a
//! one-dimensional system with Hamiltonian `H = p²/2m + V(x, t)`.
//!
//! The crate is `no_std` (it needs `alloc`) and carries no IO. It provides
//!
//! * the shared vocabulary: [`PhaseSpaceGrid`], [`Distribution`],
//!   [`Potential`], [`Wavefunction`], [`PhysicalParams`];
//! * a classical Liouville engine, leapfrog trajectories with tangent
//!   vectors, a Benettin Lyapunov estimator and the standard map
//!   ([`classical`]);
//! * a Wigner–Moyal engine that is exact for polynomial potentials, plus a
//!   split-operator Schrödinger solver and Wigner transform used as an
//!   independent oracle ([`quantum`]);
//! * momentum diffusion and coarse-graining measurement models
//!   ([`decoherence`]);
//! * scalar functionals: norm, purity, negativity, distances, derivative
//!   norms and break times ([`diagnostics`]).
//!
//! All grids are periodic in both axes and every propagation substep is an
//! exact spectral multiplier, so the only time-discretisation error is the
//! Strang splitting error between kinetic and potential substeps.
#![no_std]
#![warn(rust_2018_idioms)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod classical;
pub mod decoherence;
pub mod diagnostics;
mod distribution;
mod error;
pub mod fft;
mod grid;
mod params;
mod potential;
pub mod quantum;
mod spectral;
mod split;
mod wavefunction;

pub use distribution::{init_gaussian, Distribution};
pub use error::{Error, Result};
pub use grid::{Axis, PhaseSpaceGrid};
pub use params::PhysicalParams;
pub use potential::{potential_derivative, Kick, KickShape, Potential, MAX_DEGREE, MAX_DERIVATIVE_ORDER};
pub use wavefunction::Wavefunction;

/// Two-component vector in the (x, p) tangent plane.
pub type Vec2 = [f64; 2];
