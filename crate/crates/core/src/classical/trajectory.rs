use crate::error::{invalid, Error, Result};
use crate::split::steps_per_kick;
use crate::{PhysicalParams, Potential, Vec2};

/// A phase-space point together with a tangent vector `ε = (δx, δp)`
/// evolved by the linearised equations of motion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryState {
    pub x: f64,
    pub p: f64,
    pub tangent: Vec2,
    /// Sum of `ln(‖ε‖)` over all renormalisations so far.
    pub log_stretch_accum: f64,
    pub time: f64,
}

impl TrajectoryState {
    /// Point at `(x, p)`, time zero, tangent along x.
    pub fn new(x: f64, p: f64) -> Self {
        Self {
            x,
            p,
            tangent: [1.0, 0.0],
            log_stretch_accum: 0.0,
            time: 0.0,
        }
    }

    pub fn with_tangent(mut self, tangent: Vec2) -> Result<Self> {
        if !(tangent[0].is_finite() && tangent[1].is_finite()) || tangent == [0.0, 0.0] {
            return Err(invalid("tangent", "must be finite and non-zero"));
        }
        self.tangent = tangent;
        Ok(self)
    }

    pub fn tangent_norm(&self) -> f64 {
        libm::hypot(self.tangent[0], self.tangent[1])
    }
}

/// Total energy including only the static potential.
pub fn energy(state: &TrajectoryState, pot: &Potential, params: &PhysicalParams) -> f64 {
    0.5 * state.p * state.p / params.mass + pot.value(state.x)
}

/// One kick-drift-kick leapfrog step of the point and its tangent vector.
///
/// The tangent is advanced by the exact Jacobian of the same leapfrog map,
/// so the discrete flow and its linearisation are consistent to rounding.
pub fn leapfrog_step(state: &mut TrajectoryState, pot: &Potential, params: &PhysicalParams, dt: f64) {
    let h = 0.5 * dt;
    let [mut dx, mut dp] = state.tangent;

    state.p -= h * pot.derivative(state.x, 1);
    dp -= h * pot.derivative(state.x, 2) * dx;

    state.x += dt * state.p / params.mass;
    dx += dt * dp / params.mass;

    state.p -= h * pot.derivative(state.x, 1);
    dp -= h * pot.derivative(state.x, 2) * dx;

    state.tangent = [dx, dp];
    state.time += dt;
}

fn apply_kick(state: &mut TrajectoryState, pot: &Potential) {
    if let Some(kick) = pot.kick() {
        let [dx, dp] = state.tangent;
        state.p -= kick.derivative(state.x, 1);
        state.tangent = [dx, dp - kick.derivative(state.x, 2) * dx];
    }
}

pub(crate) struct KickClock {
    every: Option<u64>,
    dt: f64,
}

impl KickClock {
    pub(crate) fn new(pot: &Potential, dt: f64) -> Result<Self> {
        Ok(Self {
            every: pot.kick().map(|k| steps_per_kick(k, dt)).transpose()?,
            dt,
        })
    }

    pub(crate) fn due(&self, time: f64) -> bool {
        match self.every {
            Some(every) => {
                let step = libm::round(time / self.dt) as u64;
                step > 0 && step % every == 0
            }
            None => false,
        }
    }
}

/// Advances a trajectory by `n_steps` leapfrog steps. Kicks are applied
/// instantaneously after the step that lands on `t = jT`.
pub fn integrate_trajectory(
    state: TrajectoryState,
    pot: &Potential,
    params: &PhysicalParams,
    dt: f64,
    n_steps: u64,
) -> Result<TrajectoryState> {
    params.validate()?;
    if !(dt.is_finite() && dt > 0.0) {
        return Err(invalid("dt", "must be positive"));
    }
    let clock = KickClock::new(pot, dt)?;
    let mut s = state;
    for step in 1..=n_steps {
        leapfrog_step(&mut s, pot, params, dt);
        if clock.due(s.time) {
            apply_kick(&mut s, pot);
        }
        if !(s.x.is_finite() && s.p.is_finite()) {
            return Err(Error::NumericalBlowup {
                context: "trajectory",
                step,
            });
        }
    }
    Ok(s)
}

pub(crate) fn kick_if_due(state: &mut TrajectoryState, pot: &Potential, clock: &KickClock) {
    if clock.due(state.time) {
        apply_kick(state, pot);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{Kick, KickShape};
    use core::f64::consts::PI;

    fn unit() -> PhysicalParams {
        PhysicalParams::new(1.0, 1.0).unwrap()
    }

    #[test]
    fn harmonic_period() {
        // dt within 0.01% of 1e-3, chosen so that a whole number of steps
        // spans the period
        let n = 6283;
        let dt = 2.0 * PI / n as f64;
        let end = integrate_trajectory(TrajectoryState::new(1.0, 0.0), &Potential::harmonic(1.0), &unit(), dt, n).unwrap();
        assert!((end.x - 1.0).abs() < 1e-4 && end.p.abs() < 1e-4, "{end:?}");
    }

    #[test]
    fn free_motion_is_exact() {
        let dt = 0.01;
        let end = integrate_trajectory(TrajectoryState::new(0.0, 0.7), &Potential::free(), &unit(), dt, 500).unwrap();
        assert_eq!(end.p, 0.7);
        assert!((end.x - 0.7 * dt * 500.0).abs() < 1e-12);
    }

    #[test]
    fn quartic_energy_drift() {
        let v = Potential::polynomial(&[0.0, 0.0, 0.0, 0.0, 0.25]).unwrap();
        let start = TrajectoryState::new(1.0, 0.5);
        let e0 = energy(&start, &v, &unit());
        let run = |dt: f64, n: u64| {
            let s = integrate_trajectory(start, &v, &unit(), dt, n).unwrap();
            libm::fabs(energy(&s, &v, &unit()) - e0) / libm::fabs(e0)
        };
        let drift = run(1e-3, 10_000);
        assert!(drift <= 1e-6, "relative drift {drift:e}");
        // Second-order method: the error constant shrinks ~4x when dt halves.
        let half = run(5e-4, 20_000);
        assert!(half < drift, "{half:e} vs {drift:e}");
        assert!(drift / half > 2.0 && drift / half < 8.0, "ratio {}", drift / half);
    }

    #[test]
    fn step_jacobian_is_symplectic() {
        let v = Potential::polynomial(&[0.0, 0.0, -0.5, 0.1, 0.25]).unwrap();
        let dt = 0.05;
        for (x, p) in [(0.3, -0.2), (1.7, 0.9), (-2.0, 0.0)] {
            let mut a = TrajectoryState::new(x, p);
            let mut b = TrajectoryState::new(x, p).with_tangent([0.0, 1.0]).unwrap();
            leapfrog_step(&mut a, &v, &unit(), dt);
            leapfrog_step(&mut b, &v, &unit(), dt);
            let det = a.tangent[0] * b.tangent[1] - a.tangent[1] * b.tangent[0];
            assert!((det - 1.0).abs() < 1e-10, "det = {det}");
        }
    }

    #[test]
    fn tangent_matches_finite_difference() {
        let v = Potential::polynomial(&[0.0, 0.0, -0.5, 0.0, 0.25])
            .unwrap()
            .with_kick(Kick::new(2.0, 1.0, KickShape::Cosine).unwrap());
        let dt = 0.01;
        let s0 = TrajectoryState::new(0.4, 0.1);
        let end = integrate_trajectory(s0, &v, &unit(), dt, 250).unwrap();
        let h = 1e-7;
        let plus = integrate_trajectory(TrajectoryState::new(0.4 + h, 0.1), &v, &unit(), dt, 250).unwrap();
        let minus = integrate_trajectory(TrajectoryState::new(0.4 - h, 0.1), &v, &unit(), dt, 250).unwrap();
        let fd = [(plus.x - minus.x) / (2.0 * h), (plus.p - minus.p) / (2.0 * h)];
        for k in 0..2 {
            assert!((fd[k] - end.tangent[k]).abs() < 1e-5 * (1.0 + fd[k].abs()), "{fd:?} vs {:?}", end.tangent);
        }
    }

    #[test]
    fn rejects_zero_tangent_and_bad_dt() {
        assert!(TrajectoryState::new(0.0, 0.0).with_tangent([0.0, 0.0]).is_err());
        assert!(integrate_trajectory(TrajectoryState::new(0.0, 0.0), &Potential::free(), &unit(), 0.0, 1).is_err());
    }
}
