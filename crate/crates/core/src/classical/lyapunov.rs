use alloc::format;
use alloc::vec::Vec;

use super::standard_map::standard_map_step;
use super::trajectory::{kick_if_due, leapfrog_step, KickClock, TrajectoryState};
use crate::error::{invalid, Error, Result};
use crate::{PhysicalParams, Potential, Vec2};

/// Unit of a Lyapunov exponent: flows are reported per unit time, maps per
/// iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LyapunovUnit {
    PerUnitTime,
    PerStep,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovResult {
    /// Final estimate; equal to the last entry of `convergence_series`.
    pub lambda: f64,
    pub n_steps: u64,
    /// Running estimate after every renormalisation.
    pub convergence_series: Vec<f64>,
    pub unit: LyapunovUnit,
}

fn check_schedule(n_steps: u64, renorm_every: u64) -> Result<()> {
    if renorm_every == 0 {
        return Err(invalid("renorm_every", "must be at least 1"));
    }
    if n_steps < 10 * renorm_every {
        return Err(invalid(
            "n_steps",
            format!("need at least 10 renormalisations: {n_steps} < 10 * {renorm_every}"),
        ));
    }
    Ok(())
}

/// Benettin accumulator: stretch factors are summed in log space and the
/// tangent is rescaled to unit length.
struct Accumulator {
    log_sum: f64,
    series: Vec<f64>,
}

impl Accumulator {
    fn renormalise(&mut self, tangent: &mut Vec2, step: u64, elapsed: f64) -> Result<()> {
        let norm = libm::hypot(tangent[0], tangent[1]);
        if !(norm.is_finite() && norm > f64::MIN_POSITIVE) {
            return Err(Error::TangentRange { norm, step });
        }
        self.log_sum += libm::log(norm);
        tangent[0] /= norm;
        tangent[1] /= norm;
        self.series.push(self.log_sum / elapsed);
        Ok(())
    }
}

fn unit_tangent(tangent: Vec2) -> Result<Vec2> {
    let norm = libm::hypot(tangent[0], tangent[1]);
    if !(norm.is_finite() && norm > 0.0) {
        return Err(invalid("tangent", "initial tangent must be finite and non-zero"));
    }
    Ok([tangent[0] / norm, tangent[1] / norm])
}

/// Largest Lyapunov exponent of a (possibly kicked) flow,
/// `Λ = (1/t) ln(‖ε(t)‖ / ‖ε(0)‖)`, by the Benettin scheme: the tangent is
/// renormalised every `renorm_every` steps and the log stretch accumulated.
///
/// The initial tangent is normalised first, so the estimate does not depend
/// on its length.
pub fn lyapunov_exponent(
    state0: TrajectoryState,
    pot: &Potential,
    params: &PhysicalParams,
    dt: f64,
    n_steps: u64,
    renorm_every: u64,
) -> Result<LyapunovResult> {
    params.validate()?;
    check_schedule(n_steps, renorm_every)?;
    if !(dt.is_finite() && dt > 0.0) {
        return Err(invalid("dt", "must be positive"));
    }
    let clock = KickClock::new(pot, dt)?;
    let mut state = state0;
    state.tangent = unit_tangent(state.tangent)?;
    let mut acc = Accumulator {
        log_sum: 0.0,
        series: Vec::with_capacity((n_steps / renorm_every) as usize + 1),
    };
    for step in 1..=n_steps {
        leapfrog_step(&mut state, pot, params, dt);
        kick_if_due(&mut state, pot, &clock);
        if !(state.x.is_finite() && state.p.is_finite()) {
            return Err(Error::NumericalBlowup {
                context: "lyapunov",
                step,
            });
        }
        if step % renorm_every == 0 || step == n_steps {
            acc.renormalise(&mut state.tangent, step, step as f64 * dt)?;
        }
    }
    Ok(LyapunovResult {
        lambda: acc.log_sum / (n_steps as f64 * dt),
        n_steps,
        convergence_series: acc.series,
        unit: LyapunovUnit::PerUnitTime,
    })
}

/// Largest Lyapunov exponent of the standard map, per iteration.
pub fn standard_map_lyapunov(
    theta: f64,
    p: f64,
    k: f64,
    tangent: Vec2,
    n_steps: u64,
    renorm_every: u64,
) -> Result<LyapunovResult> {
    check_schedule(n_steps, renorm_every)?;
    let mut tangent = unit_tangent(tangent)?;
    let (mut theta, mut p) = (theta, p);
    let mut acc = Accumulator {
        log_sum: 0.0,
        series: Vec::with_capacity((n_steps / renorm_every) as usize + 1),
    };
    for step in 1..=n_steps {
        (theta, p, tangent) = standard_map_step(theta, p, k, tangent);
        if step % renorm_every == 0 || step == n_steps {
            acc.renormalise(&mut tangent, step, step as f64)?;
        }
    }
    Ok(LyapunovResult {
        lambda: acc.log_sum / n_steps as f64,
        n_steps,
        convergence_series: acc.series,
        unit: LyapunovUnit::PerStep,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> PhysicalParams {
        PhysicalParams::new(1.0, 1.0).unwrap()
    }

    #[test]
    fn harmonic_center_has_zero_exponent() {
        let r = lyapunov_exponent(TrajectoryState::new(1.0, 0.0), &Potential::harmonic(1.0), &unit(), 1e-3, 100_000, 10)
            .unwrap();
        assert!(r.lambda.abs() < 1e-3, "{}", r.lambda);
        assert_eq!(r.lambda, *r.convergence_series.last().unwrap());
        assert_eq!(r.unit, LyapunovUnit::PerUnitTime);
        assert_eq!(r.convergence_series.len(), 10_000);
    }

    #[test]
    fn inverted_oscillator_grows_at_unit_rate() {
        let s = TrajectoryState::new(0.0, 0.0)
            .with_tangent([1.0, 1.0])
            .unwrap();
        let r = lyapunov_exponent(s, &Potential::harmonic(-1.0), &unit(), 1e-3, 100_000, 10).unwrap();
        assert!((r.lambda - 1.0).abs() < 0.01, "{}", r.lambda);
    }

    #[test]
    fn rescaling_the_initial_tangent_changes_nothing() {
        let v = Potential::polynomial(&[0.0, 0.0, -0.5, 0.0, 0.25]).unwrap();
        let base = lyapunov_exponent(TrajectoryState::new(0.1, 0.3), &v, &unit(), 1e-2, 20_000, 10).unwrap();
        for c in [1e-6, 1e6] {
            let s = TrajectoryState::new(0.1, 0.3).with_tangent([c, 0.0]).unwrap();
            let r = lyapunov_exponent(s, &v, &unit(), 1e-2, 20_000, 10).unwrap();
            assert!((r.lambda - base.lambda).abs() < 1e-6);
        }
    }

    #[test]
    fn schedule_and_range_errors() {
        let v = Potential::harmonic(-1.0);
        let s = TrajectoryState::new(0.0, 0.0).with_tangent([1.0, 1.0]).unwrap();
        assert!(lyapunov_exponent(s, &v, &unit(), 1e-3, 50, 10).is_err());
        assert!(lyapunov_exponent(s, &v, &unit(), 1e-3, 50, 0).is_err());
        // e^{t} over 1000 time units between renormalisations overflows
        assert!(matches!(
            lyapunov_exponent(s, &v, &unit(), 0.1, 100_000, 10_000),
            Err(Error::TangentRange { .. })
        ));
    }

    #[test]
    fn map_exponent_per_step() {
        let r = standard_map_lyapunov(0.3, 0.1, 0.0, [0.0, 1.0], 1000, 10).unwrap();
        assert_eq!(r.unit, LyapunovUnit::PerStep);
        // K = 0 is a pure shear: linear growth, so Λ ~ ln(n)/n
        assert!(r.lambda > 0.0 && r.lambda < 0.01);
    }
}
