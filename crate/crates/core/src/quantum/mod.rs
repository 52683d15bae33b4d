//! Quantum phase-space dynamics: the Wigner–Moyal engine, and a pure-state
//! Schrödinger solver with a Wigner transform that serves as an
//! independent check of it.

mod moyal;
mod schrodinger;
mod wigner;

pub use moyal::{moyal_step, MoyalConfig, MoyalEngine, PropagatorStamp, SpectralPropagator, Truncation};
pub use schrodinger::{schrodinger_step, SchrodingerEngine};
pub use wigner::wigner_transform;
