//! Strang-split phase-space stepper shared by the classical and Moyal
//! engines.
//!
//! One step is `drift(dt/2) · potential(dt) · drift(dt/2)`. The drift shifts
//! every p-line along x by `p·dt/2m`; the potential substep multiplies every
//! x-line, in the λ representation (λ conjugate to p), by
//! `exp(i·dt·θ(x, λ))`. The Poisson bracket gives `θ = V'(x)·λ`; the Moyal
//! bracket adds the odd-derivative series
//!
//! ```text
//! θ(x, λ) = Σ_{n=0}^{N} c_n V^(2n+1)(x) (-1)^n λ^(2n+1),
//! c_n = ħ^(2n) (-1)^n / (2^(2n) (2n+1)!)
//! ```
//!
//! which is `c_n V^(2n+1) (iλ)^(2n+1)` with the common factor `i` pulled out.
//! The potential substep is exact in dt because its generator is diagonal in
//! (x, λ). Kicks are the same multiplier with the kick potential and unit
//! weight, applied after the step that lands on `t = jT`.
//!
//! Consecutive half drifts are fused when no kick or observation sits
//! between them.

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::fft::cis;
use crate::grid::{Axis, PhaseSpaceGrid};
use crate::potential::{Kick, KickShape, Potential};
use crate::quantum::{MoyalConfig, Truncation};
use crate::spectral::{AxisTransform, MultiplierTable};
use crate::{Distribution, PhysicalParams};

/// Which bracket generates the potential substep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Bracket {
    Poisson,
    Moyal { hbar: f64, truncation: Truncation },
}

impl Bracket {
    pub(crate) fn from_config(params: &PhysicalParams, cfg: &MoyalConfig) -> Self {
        Bracket::Moyal {
            hbar: params.hbar,
            truncation: cfg.truncation,
        }
    }
}

/// `c_n = ħ^(2n) (-1)^n / (2^(2n) (2n+1)!)`.
pub(crate) fn moyal_coefficient(hbar: f64, n: usize) -> f64 {
    let mut c = 1.0;
    for k in 1..=n {
        let (a, b) = ((2 * k) as f64, (2 * k + 1) as f64);
        c *= -(hbar * hbar) / (4.0 * a * b);
    }
    c
}

/// Truncated series phase for a field with derivatives `deriv(order)`.
fn series_phase(hbar: f64, terms: usize, lambda: f64, deriv: impl Fn(usize) -> f64) -> f64 {
    let mut theta = 0.0;
    let mut lambda_pow = lambda;
    for n in 0..=terms {
        let d = deriv(2 * n + 1);
        if d != 0.0 {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            theta += moyal_coefficient(hbar, n) * d * sign * lambda_pow;
        }
        lambda_pow *= lambda * lambda;
    }
    theta
}

/// Highest series index that can be non-zero for a polynomial of the given
/// degree.
pub(crate) fn exact_terms(degree: usize) -> usize {
    degree.saturating_sub(1) / 2
}

fn terms_for(truncation: Truncation, degree: usize) -> usize {
    match truncation {
        Truncation::Exact => exact_terms(degree),
        Truncation::Order(n) => n,
    }
}

/// Phase of the static potential substep per unit time.
pub(crate) fn potential_phase(pot: &Potential, bracket: Bracket, x: f64, lambda: f64) -> f64 {
    match bracket {
        Bracket::Poisson => series_phase(1.0, 0, lambda, |r| pot.derivative(x, r)),
        Bracket::Moyal { hbar, truncation } => {
            let terms = terms_for(truncation, pot.degree());
            series_phase(hbar, terms, lambda, |r| pot.derivative(x, r))
        }
    }
}

/// Phase of one unit-weight kick.
pub(crate) fn kick_phase(kick: &Kick, bracket: Bracket, x: f64, lambda: f64) -> f64 {
    match bracket {
        Bracket::Poisson => series_phase(1.0, 0, lambda, |r| kick.derivative(x, r)),
        Bracket::Moyal { hbar, truncation } => match (&kick.shape, truncation) {
            // Entire function: the summed series is the finite difference
            // [V(x + ħλ/2) - V(x - ħλ/2)] / ħ = -(2K/ħ) sin x sin(ħλ/2).
            (KickShape::Cosine, Truncation::Exact) => {
                -2.0 * kick.strength / hbar * libm::sin(x) * libm::sin(0.5 * hbar * lambda)
            }
            (KickShape::Cosine, Truncation::Order(n)) => {
                series_phase(hbar, n, lambda, |r| kick.derivative(x, r))
            }
            (KickShape::Polynomial(c), truncation) => {
                let degree = c.iter().rposition(|&v| v != 0.0).unwrap_or(0);
                let terms = terms_for(truncation, degree);
                series_phase(hbar, terms, lambda, |r| kick.derivative(x, r))
            }
        },
    }
}

/// Number of steps between kicks, requiring `T/dt` to be an integer.
pub(crate) fn steps_per_kick(kick: &Kick, dt: f64) -> Result<u64> {
    steps_per_period("kick", kick.period, dt)
}

/// Number of steps in `period`, requiring `period/dt` to be an integer.
pub(crate) fn steps_per_period(what: &str, period: f64, dt: f64) -> Result<u64> {
    let ratio = period / dt;
    let rounded = libm::round(ratio);
    if rounded < 1.0 || libm::fabs(ratio - rounded) > 1e-9 * rounded {
        return Err(invalid(
            "dt",
            format!("{what} period {period} must be an integer multiple of dt = {dt}"),
        ));
    }
    Ok(rounded as u64)
}

fn check_dt(dt: f64) -> Result<()> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(invalid("dt", format!("must be positive, got {dt}")));
    }
    Ok(())
}

/// Advection guards: a drift moves less than one x cell and a potential
/// substep less than one p cell per step. A potential with `V' ≡ 0` has no
/// splitting error, so its drift is exact for any dt and only the momentum
/// guard (trivially satisfied) applies.
pub(crate) fn check_courant(
    grid: &PhaseSpaceGrid,
    pot: &Potential,
    params: &PhysicalParams,
    dt: f64,
) -> Result<()> {
    let max_p = libm::fabs(grid.p_min()).max(libm::fabs(grid.p_max()));
    let max_slope = pot.max_slope(grid.xs());
    if max_slope > 0.0 {
        let courant = max_p * dt / (params.mass * grid.dx());
        if courant >= 1.0 {
            return Err(Error::Courant { axis: "x", courant });
        }
    }
    let courant = max_slope * dt / grid.dp();
    if courant >= 1.0 {
        return Err(Error::Courant { axis: "p", courant });
    }
    Ok(())
}

fn antialias_keep(k: f64, k_max: f64, enabled: bool) -> bool {
    !enabled || libm::fabs(k) <= 2.0 / 3.0 * k_max
}

/// A real field's Nyquist coefficient is real, so any phase other than ±1
/// on it is cut back to its real part by the inverse transform and L2 leaks
/// away. The advective substeps leave that one mode untouched instead.
fn is_nyquist(k: usize, n: usize) -> bool {
    n % 2 == 0 && k == n / 2
}

/// Smoothing terms that share the stepper's substeps: momentum and
/// position diffusion are diagonal in the same spectral variables as the
/// potential and drift substeps and are folded into those multipliers;
/// measurements are Gaussian coarse-grainings applied after every
/// `measure_every`-th step.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub(crate) struct Environment {
    pub(crate) diffusion_p: f64,
    pub(crate) diffusion_x: f64,
    pub(crate) measure_every: Option<u64>,
    pub(crate) sigma_x: Option<f64>,
    pub(crate) sigma_p: Option<f64>,
}

/// `exp(-σ²k²/2)`, the transform of a unit-mass Gaussian of width σ.
pub(crate) fn gaussian_multiplier(k: &[f64], sigma: f64) -> Vec<Complex64> {
    k.iter()
        .map(|k| Complex64::new(libm::exp(-0.5 * sigma * sigma * k * k), 0.0))
        .collect()
}

#[derive(Debug, Clone)]
pub(crate) struct SplitStepper {
    grid: PhaseSpaceGrid,
    dt: f64,
    context: &'static str,
    kick_every: Option<u64>,
    measure_every: Option<u64>,
    x_axis: AxisTransform,
    p_axis: AxisTransform,
    drift_half: MultiplierTable,
    drift_full: MultiplierTable,
    potential: Option<MultiplierTable>,
    kick: Option<MultiplierTable>,
    measure_x: Option<Vec<Complex64>>,
    measure_p: Option<Vec<Complex64>>,
}

impl SplitStepper {
    pub(crate) fn new(
        grid: &PhaseSpaceGrid,
        pot: &Potential,
        params: &PhysicalParams,
        bracket: Bracket,
        antialias: bool,
        dt: f64,
        context: &'static str,
    ) -> Result<Self> {
        params.validate()?;
        check_dt(dt)?;
        check_courant(grid, pot, params, dt)?;
        let kick_every = pot.kick().map(|k| steps_per_kick(k, dt)).transpose()?;

        let k_x = grid.k_x();
        let k_p = grid.k_p();
        let kx_max = libm::fabs(k_x[grid.n_x() / 2]);
        let kp_max = libm::fabs(k_p[grid.n_p() / 2]);

        let drift = |tau: f64| {
            MultiplierTable::from_fn(grid.n_p(), grid.n_x(), |j, k| {
                if is_nyquist(k, grid.n_x()) {
                    Complex64::new(if antialias { 0.0 } else { 1.0 }, 0.0)
                } else if antialias_keep(k_x[k], kx_max, antialias) {
                    cis(-k_x[k] * grid.p(j) * tau / params.mass)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
        };
        let potential = (pot.degree() >= 1).then(|| {
            MultiplierTable::from_fn(grid.n_x(), grid.n_p(), |i, k| {
                if is_nyquist(k, grid.n_p()) {
                    Complex64::new(if antialias { 0.0 } else { 1.0 }, 0.0)
                } else if antialias_keep(k_p[k], kp_max, antialias) {
                    cis(dt * potential_phase(pot, bracket, grid.x(i), k_p[k]))
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
        });
        let kick = pot.kick().map(|kick| {
            MultiplierTable::from_fn(grid.n_x(), grid.n_p(), |i, k| {
                if is_nyquist(k, grid.n_p()) {
                    Complex64::new(if antialias { 0.0 } else { 1.0 }, 0.0)
                } else if antialias_keep(k_p[k], kp_max, antialias) {
                    cis(kick_phase(kick, bracket, grid.x(i), k_p[k]))
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
        });

        Ok(Self {
            grid: grid.clone(),
            dt,
            context,
            kick_every,
            measure_every: None,
            x_axis: AxisTransform::new(grid, Axis::X),
            p_axis: AxisTransform::new(grid, Axis::P),
            drift_half: drift(0.5 * dt),
            drift_full: drift(dt),
            potential,
            kick,
            measure_x: None,
            measure_p: None,
        })
    }

    /// Folds diffusion into the substep tables and installs measurements.
    pub(crate) fn with_environment(mut self, env: &Environment) -> Self {
        let dt = self.dt;
        if env.diffusion_x > 0.0 {
            let k_x = self.grid.k_x().to_vec();
            let d = env.diffusion_x;
            self.drift_half
                .scale(|_, k| libm::exp(-d * k_x[k] * k_x[k] * 0.5 * dt));
            self.drift_full.scale(|_, k| libm::exp(-d * k_x[k] * k_x[k] * dt));
        }
        if env.diffusion_p > 0.0 {
            let k_p = self.grid.k_p().to_vec();
            let d = env.diffusion_p;
            let table = self.potential.get_or_insert_with(|| {
                MultiplierTable::from_fn(self.grid.n_x(), self.grid.n_p(), |_, _| Complex64::new(1.0, 0.0))
            });
            table.scale(|_, k| libm::exp(-d * k_p[k] * k_p[k] * dt));
        }
        self.measure_every = env.measure_every;
        self.measure_x = env.sigma_x.map(|s| gaussian_multiplier(self.grid.k_x(), s));
        self.measure_p = env.sigma_p.map(|s| gaussian_multiplier(self.grid.k_p(), s));
        self
    }

    pub(crate) fn dt(&self) -> f64 {
        self.dt
    }

    pub(crate) fn grid(&self) -> &PhaseSpaceGrid {
        &self.grid
    }

    pub(crate) fn check_grid(&self, dist: &Distribution) -> Result<()> {
        self.grid.ensure_same(dist.grid())
    }

    pub(crate) fn step_index(&self, time: f64) -> u64 {
        libm::round(time / self.dt).max(0.0) as u64
    }

    /// Potential-substep multiplier at `(x_i, λ_k)`, identity where the
    /// potential has no gradient.
    pub(crate) fn potential_multiplier(&self, i: usize, k: usize) -> Complex64 {
        match &self.potential {
            Some(t) => t.get(i, k),
            None => Complex64::new(1.0, 0.0),
        }
    }

    fn drift(&mut self, dist: &mut Distribution, full: bool) {
        let table = if full {
            &self.drift_full
        } else {
            &self.drift_half
        };
        self.x_axis
            .filter(dist.values_mut(), |line, spec| table.apply(line, spec));
    }

    fn potential(&mut self, dist: &mut Distribution) {
        if let Some(table) = &self.potential {
            self.p_axis
                .filter(dist.values_mut(), |line, spec| table.apply(line, spec));
        }
    }

    fn kick(&mut self, dist: &mut Distribution) {
        if let Some(table) = &self.kick {
            self.p_axis
                .filter(dist.values_mut(), |line, spec| table.apply(line, spec));
        }
    }

    fn measure(&mut self, dist: &mut Distribution) {
        if let Some(m) = &self.measure_x {
            self.x_axis.filter_uniform(dist.values_mut(), m);
        }
        if let Some(m) = &self.measure_p {
            self.p_axis.filter_uniform(dist.values_mut(), m);
        }
    }

    fn due(every: Option<u64>, step: u64) -> bool {
        matches!(every, Some(every) if step % every == 0)
    }

    /// Advances `n` steps, fusing adjacent half drifts. Kicks, then
    /// measurements, fire after the step that lands on their period. The
    /// field is checked for non-finite values after every step.
    pub(crate) fn advance(&mut self, dist: &mut Distribution, n: u64) -> Result<()> {
        self.check_grid(dist)?;
        let mut owed_half = false;
        for i in 0..n {
            self.drift(dist, owed_half);
            self.potential(dist);
            let time = dist.time() + self.dt;
            dist.set_time(time);
            let step = self.step_index(time);
            let kick_due = Self::due(self.kick_every, step);
            let measure_due = Self::due(self.measure_every, step);
            if i + 1 == n || kick_due || measure_due {
                self.drift(dist, false);
                owed_half = false;
                if kick_due {
                    self.kick(dist);
                }
                if measure_due {
                    self.measure(dist);
                }
            } else {
                owed_half = true;
            }
            dist.check_finite(self.context, step)?;
        }
        Ok(())
    }
}
