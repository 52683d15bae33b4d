use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::trajectory::TrajectoryState;
use super::wrap_angle;
use crate::diagnostics::linear_fit;
use crate::error::{invalid, Error, Result};
use crate::Vec2;

/// Smallest ensemble accepted by the diffusion estimators.
pub const MIN_ENSEMBLE: usize = 1000;

/// One iteration of the Chirikov standard map
///
/// ```text
/// p'     = p + K sin θ
/// θ'     = (θ + p') mod 2π
/// (δθ', δp') = [[1 + K cos θ, 1], [K cos θ, 1]] (δθ, δp)
/// ```
///
/// The Jacobian has unit determinant for every K.
pub fn standard_map_step(theta: f64, p: f64, k: f64, tangent: Vec2) -> (f64, f64, Vec2) {
    let (s, c) = libm::sincos(theta);
    let kc = k * c;
    let p_new = p + k * s;
    let theta_new = wrap_angle(theta + p_new);
    let [dt, dp] = tangent;
    let dp_new = dp + kc * dt;
    (theta_new, p_new, [dt + dp_new, dp_new])
}

fn check_ensemble(states: &[TrajectoryState]) -> Result<()> {
    if states.is_empty() {
        return Err(Error::Empty("ensemble"));
    }
    if states.len() < MIN_ENSEMBLE {
        return Err(invalid(
            "ensemble",
            format!("{} members, need at least {MIN_ENSEMBLE}", states.len()),
        ));
    }
    Ok(())
}

/// Mean-square momentum displacement `⟨(p_t - p_0)²⟩` after each of
/// `n_steps` standard-map iterations (entry `t-1` holds step `t`). The
/// states' `x` is read as the angle θ.
pub fn ensemble_momentum_spread(states: &[TrajectoryState], k: f64, n_steps: usize) -> Result<Vec<f64>> {
    check_ensemble(states)?;
    Ok(spread(states, k, n_steps))
}

fn spread(states: &[TrajectoryState], k: f64, n_steps: usize) -> Vec<f64> {
    let mut theta: Vec<f64> = states.iter().map(|s| s.x).collect();
    let mut p: Vec<f64> = states.iter().map(|s| s.p).collect();
    let p0 = p.clone();
    let mut msd = vec![0.0; n_steps];
    for out in msd.iter_mut() {
        let mut sum = 0.0;
        for ((th, pi), pi0) in theta.iter_mut().zip(p.iter_mut()).zip(&p0) {
            *pi += k * libm::sin(*th);
            *th = wrap_angle(*th + *pi);
            let d = *pi - pi0;
            sum += d * d;
        }
        *out = sum / states.len() as f64;
    }
    msd
}

/// `D = slope / 2` of a least-squares line through the final half of a
/// mean-square-displacement series (entry `t-1` at time `t`).
pub fn diffusion_coefficient(msd: &[f64]) -> Result<f64> {
    if msd.len() < 4 {
        return Err(invalid("msd", "need at least 4 samples for a fit"));
    }
    let start = msd.len() / 2;
    let t: Vec<f64> = (start + 1..=msd.len()).map(|t| t as f64).collect();
    let fit = linear_fit(&t, &msd[start..])?;
    Ok(0.5 * fit.slope)
}

/// Classical momentum diffusion coefficient with a batch-means standard
/// error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionEstimate {
    pub coefficient: f64,
    pub standard_error: f64,
}

/// Estimates `D_cl` from the whole ensemble and its standard error from
/// `batches` equal contiguous sub-ensembles.
pub fn ensemble_diffusion(
    states: &[TrajectoryState],
    k: f64,
    n_steps: usize,
    batches: usize,
) -> Result<DiffusionEstimate> {
    check_ensemble(states)?;
    if batches < 2 || batches > states.len() {
        return Err(invalid("batches", "need between 2 and ensemble-size batches"));
    }
    let coefficient = diffusion_coefficient(&spread(states, k, n_steps))?;
    let size = states.len() / batches;
    let per_batch = states
        .chunks_exact(size)
        .take(batches)
        .map(|chunk| diffusion_coefficient(&spread(chunk, k, n_steps)))
        .collect::<Result<Vec<_>>>()?;
    let mean = per_batch.iter().sum::<f64>() / batches as f64;
    let var = per_batch.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / (batches - 1) as f64;
    Ok(DiffusionEstimate {
        coefficient,
        standard_error: libm::sqrt(var / batches as f64),
    })
}
