use alloc::format;
use alloc::vec::Vec;

use crate::error::{invalid, Result};

/// Highest supported polynomial degree for both the static potential and
/// polynomial kicks.
pub const MAX_DEGREE: usize = 8;

/// Highest derivative order accepted by [`Potential::derivative`].
pub const MAX_DERIVATIVE_ORDER: usize = 32;

/// Spatial profile of an impulsive kick.
#[derive(Debug, Clone, PartialEq)]
pub enum KickShape {
    /// `Σ_k s_k x^k`, degree at most [`MAX_DEGREE`].
    Polynomial(Vec<f64>),
    /// `cos(x)`; with strength `K` this is the kicked-rotor drive.
    Cosine,
}

/// Periodic impulsive drive: at every `t = jT` (j >= 1) the momentum jumps by
/// `-K·shape'(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Kick {
    pub strength: f64,
    pub period: f64,
    pub shape: KickShape,
}

impl Kick {
    pub fn new(strength: f64, period: f64, shape: KickShape) -> Result<Self> {
        if !strength.is_finite() {
            return Err(invalid("kick.strength", "must be finite"));
        }
        if !(period.is_finite() && period > 0.0) {
            return Err(invalid("kick.period", format!("must be positive, got {period}")));
        }
        if let KickShape::Polynomial(c) = &shape {
            check_coefficients("kick.shape", c)?;
        }
        Ok(Self {
            strength,
            period,
            shape,
        })
    }

    /// Kick potential `K·shape(x)`.
    pub fn value(&self, x: f64) -> f64 {
        self.derivative(x, 0)
    }

    /// Exact derivative of the kick potential of any order.
    pub fn derivative(&self, x: f64, order: usize) -> f64 {
        let shape = match &self.shape {
            KickShape::Polynomial(c) => poly_derivative(c, x, order),
            KickShape::Cosine => match order % 4 {
                0 => libm::cos(x),
                1 => -libm::sin(x),
                2 => -libm::cos(x),
                _ => libm::sin(x),
            },
        };
        self.strength * shape
    }

    /// Degree of the kick profile, `None` for the (entire) cosine.
    pub fn degree(&self) -> Option<usize> {
        match &self.shape {
            KickShape::Polynomial(c) => Some(degree_of(c)),
            KickShape::Cosine => None,
        }
    }
}

/// `V(x) = Σ c_k x^k` with an optional periodic kick.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    coeffs: Vec<f64>,
    kick: Option<Kick>,
}

fn check_coefficients(name: &'static str, c: &[f64]) -> Result<()> {
    if c.iter().any(|v| !v.is_finite()) {
        return Err(invalid(name, "coefficients must be finite"));
    }
    if degree_of(c) > MAX_DEGREE {
        return Err(invalid(
            name,
            format!("degree {} exceeds the maximum of {MAX_DEGREE}", degree_of(c)),
        ));
    }
    Ok(())
}

fn degree_of(c: &[f64]) -> usize {
    c.iter().rposition(|&v| v != 0.0).unwrap_or(0)
}

/// `d^r/dx^r Σ c_k x^k`, using `d^r x^k = k!/(k-r)! x^(k-r)`.
fn poly_derivative(c: &[f64], x: f64, order: usize) -> f64 {
    let degree = degree_of(c);
    if order > degree {
        return 0.0;
    }
    let mut acc = 0.0;
    for k in (order..=degree).rev() {
        let falling: f64 = ((k - order + 1)..=k).map(|f| f as f64).product();
        acc = acc * x + c[k] * falling;
    }
    acc
}

impl Potential {
    /// Polynomial potential from ascending coefficients `c_0, c_1, ...`.
    pub fn polynomial(coeffs: &[f64]) -> Result<Self> {
        check_coefficients("potential", coeffs)?;
        let mut coeffs = coeffs.to_vec();
        coeffs.truncate(degree_of(&coeffs) + 1);
        Ok(Self { coeffs, kick: None })
    }

    /// `V = 0`.
    pub fn free() -> Self {
        Self {
            coeffs: alloc::vec![0.0],
            kick: None,
        }
    }

    /// `V = ½ m ω² x²` with `m ω² = stiffness`.
    pub fn harmonic(stiffness: f64) -> Self {
        Self {
            coeffs: alloc::vec![0.0, 0.0, 0.5 * stiffness],
            kick: None,
        }
    }

    pub fn with_kick(mut self, kick: Kick) -> Self {
        self.kick = Some(kick);
        self
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn kick(&self) -> Option<&Kick> {
        self.kick.as_ref()
    }

    /// Degree of the static polynomial part.
    pub fn degree(&self) -> usize {
        degree_of(&self.coeffs)
    }

    pub fn value(&self, x: f64) -> f64 {
        poly_derivative(&self.coeffs, x, 0)
    }

    /// Exact derivative of the static part; zero above the degree. The kick
    /// is not included, engines apply it as a discrete impulse.
    pub fn derivative(&self, x: f64, order: usize) -> f64 {
        debug_assert!(order <= MAX_DERIVATIVE_ORDER);
        poly_derivative(&self.coeffs, x, order)
    }

    /// Force of the static part, `-V'(x)`.
    pub fn force(&self, x: f64) -> f64 {
        -self.derivative(x, 1)
    }

    /// Largest `|V'(x)|` over the given nodes.
    pub(crate) fn max_slope(&self, xs: impl Iterator<Item = f64>) -> f64 {
        xs.map(|x| libm::fabs(self.derivative(x, 1)))
            .fold(0.0, f64::max)
    }
}

/// `∂^order V / ∂x^order` at `x`. The time argument is accepted for
/// interface symmetry with driven potentials: kicks are impulses applied by
/// the engines, not part of the smooth potential.
pub fn potential_derivative(pot: &Potential, x: f64, order: usize, _t: f64) -> f64 {
    pot.derivative(x, order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    #[test]
    fn quartic_derivatives() {
        let v = Potential::polynomial(&[0.0, 0.0, 0.0, 0.0, 1.0]).unwrap();
        assert_eq!(potential_derivative(&v, 2.0, 0, 0.0), 16.0);
        assert_eq!(potential_derivative(&v, 2.0, 1, 0.0), 32.0);
        assert_eq!(potential_derivative(&v, 2.0, 3, 0.0), 48.0);
        assert_eq!(potential_derivative(&v, 2.0, 4, 0.0), 24.0);
        assert_eq!(potential_derivative(&v, 2.0, 5, 0.0), 0.0);
        assert_eq!(potential_derivative(&v, 2.0, 32, 0.0), 0.0);
    }

    #[test]
    fn harmonic_has_no_odd_corrections() {
        let v = Potential::harmonic(1.0);
        for x in [-3.0, 0.0, 0.7, 11.0] {
            assert_eq!(v.derivative(x, 3), 0.0);
        }
        assert_eq!(v.degree(), 2);
    }

    #[test]
    fn degree_cap() {
        assert!(Potential::polynomial(&[0.0; 9]).is_ok());
        assert!(Potential::polynomial(&[1.0; 10]).is_err());
        // trailing zeros do not count
        let v = Potential::polynomial(&[1.0, 2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(v.degree(), 1);
        assert!(Potential::polynomial(&[f64::NAN]).is_err());
    }

    #[test]
    fn kick_derivatives() {
        let k = Kick::new(2.0, 1.0, KickShape::Cosine).unwrap();
        let x = 0.3;
        assert!((k.derivative(x, 1) + 2.0 * libm::sin(x)).abs() < 1e-15);
        assert!((k.derivative(x, 4) - 2.0 * libm::cos(x)).abs() < 1e-15);
        let k = Kick::new(0.5, 1.0, KickShape::Polynomial(vec![0.0, 0.0, 1.0])).unwrap();
        assert_eq!(k.derivative(3.0, 1), 3.0);
        assert_eq!(k.degree(), Some(2));
        assert!(Kick::new(1.0, 0.0, KickShape::Cosine).is_err());
    }

    proptest! {
        #[test]
        fn quadratic_odd_derivatives_vanish(
            a in -10.0..10.0f64, b in -10.0..10.0f64, c in -10.0..10.0f64,
            x in -100.0..100.0f64, n in 1usize..15,
        ) {
            let v = Potential::polynomial(&[a, b, c]).unwrap();
            prop_assert_eq!(v.derivative(x, 2 * n + 1), 0.0);
        }

        #[test]
        fn derivative_matches_monomial_rule(k in 0usize..=8, r in 0usize..=10, x in -3.0..3.0f64) {
            let mut c = vec![0.0; k + 1];
            c[k] = 1.0;
            let v = Potential::polynomial(&c).unwrap();
            let expected = if r > k {
                0.0
            } else {
                let falling: f64 = ((k - r + 1)..=k).map(|f| f as f64).product();
                falling * libm::pow(x, (k - r) as f64)
            };
            let got = v.derivative(x, r);
            prop_assert!((got - expected).abs() <= 1e-9 * (1.0 + expected.abs()));
        }
    }
}
