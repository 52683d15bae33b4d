//! Classical dynamics: Liouville transport of phase-space densities,
//! point trajectories with tangent vectors, the largest Lyapunov exponent
//! and the Chirikov standard map.

mod liouville;
mod lyapunov;
mod standard_map;
mod trajectory;

pub use liouville::{liouville_step, LiouvilleEngine};
pub use lyapunov::{lyapunov_exponent, standard_map_lyapunov, LyapunovResult, LyapunovUnit};
pub use standard_map::{
    diffusion_coefficient, ensemble_diffusion, ensemble_momentum_spread, standard_map_step,
    DiffusionEstimate, MIN_ENSEMBLE,
};
pub use trajectory::{energy, integrate_trajectory, leapfrog_step, TrajectoryState};

pub(crate) fn wrap_angle(theta: f64) -> f64 {
    let period = 2.0 * core::f64::consts::PI;
    let r = theta % period;
    if r < 0.0 {
        r + period
    } else {
        r
    }
}
