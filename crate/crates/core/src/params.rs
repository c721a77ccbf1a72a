//! Parameter containers shared by every module.
//!
//! All quantities are nondimensional. Angles are stored in `(-pi, pi]`.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// External parameters of the perturbed system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub omega: f64,
    pub alpha: f64,
    pub beta: f64,
    pub epsilon: f64,
}

impl SystemParams {
    pub fn new(omega: f64, alpha: f64, beta: f64, epsilon: f64) -> Self {
        Self {
            omega,
            alpha,
            beta,
            epsilon,
        }
    }

    pub fn validate(self) -> Result<Self> {
        validate_system(self)
    }

    /// The weaker check needed to integrate the equations: finite values and
    /// `epsilon >= 0`, without the saddle condition.
    pub fn validate_dynamics(self) -> Result<Self> {
        if self.epsilon.is_nan() || self.epsilon < 0.0 {
            return Err(Error::NegativeEpsilon(self.epsilon));
        }
        for (name, value) in [
            ("omega", self.omega),
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("epsilon", self.epsilon),
        ] {
            if !value.is_finite() {
                return Err(Error::OutOfRange {
                    name,
                    value,
                    range: "finite",
                });
            }
        }
        Ok(self)
    }

    pub fn with_epsilon(self, epsilon: f64) -> Self {
        Self { epsilon, ..self }
    }

    /// `sqrt(2 beta^2 - alpha^2 omega^2)`, the discriminant shared by the
    /// fixed-point expansions near `I = omega^2 / 2`.
    pub fn saddle_discriminant(&self) -> f64 {
        (2.0 * self.beta * self.beta - (self.alpha * self.omega).powi(2))
            .max(0.0)
            .sqrt()
    }
}

/// Strict validation of [`SystemParams`].
pub fn validate_system(params: SystemParams) -> Result<SystemParams> {
    let SystemParams {
        omega,
        alpha,
        beta,
        epsilon,
    } = params;
    if !(omega > 1.0 && omega < 2.0) {
        return Err(Error::OutOfRange {
            name: "omega",
            value: omega,
            range: "1 < omega < 2",
        });
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::OutOfRange {
            name: "alpha",
            value: alpha,
            range: "alpha > 0",
        });
    }
    if !beta.is_finite() {
        return Err(Error::OutOfRange {
            name: "beta",
            value: beta,
            range: "finite",
        });
    }
    if epsilon.is_nan() || epsilon < 0.0 {
        return Err(Error::NegativeEpsilon(epsilon));
    }
    if !epsilon.is_finite() {
        return Err(Error::OutOfRange {
            name: "epsilon",
            value: epsilon,
            range: "finite",
        });
    }
    let lhs = alpha * omega;
    let rhs = SQRT_2 * beta.abs();
    if lhs >= rhs {
        return Err(Error::NoSaddle { lhs, rhs });
    }
    Ok(params)
}

/// Plane-wave amplitudes, phases and Backlund parameters of an unperturbed orbit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitParams {
    pub a: f64,
    pub b: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub rho: f64,
    pub theta_bd: f64,
}

impl OrbitParams {
    pub fn new(a: f64, b: f64, gamma1: f64, gamma2: f64, rho: f64, theta_bd: f64) -> Self {
        Self {
            a,
            b,
            gamma1: normalize_angle(gamma1),
            gamma2: normalize_angle(gamma2),
            rho,
            theta_bd: normalize_angle(theta_bd),
        }
    }

    /// The point used by the Melnikov evaluation: `a = b = omega / sqrt(2)`,
    /// equal phases, `rho = 0`, and the upper-sign even orbit.
    pub fn melnikov_point(omega: f64, gamma: f64) -> Self {
        let a = omega / SQRT_2;
        let sigma = (omega * omega - 1.0).max(0.0).sqrt();
        let theta0 = sigma.atan();
        Self::new(a, a, gamma, gamma, 0.0, PI / 2.0 - theta0)
    }

    pub fn amplitude_sq(&self) -> f64 {
        self.a * self.a + self.b * self.b
    }

    /// Checks `1 < a^2 + b^2 < 4` (one unstable mode) and non-negative amplitudes.
    pub fn validate(self) -> Result<Self> {
        if !(self.a >= 0.0 && self.b >= 0.0) {
            return Err(Error::OutOfRange {
                name: "a, b",
                value: self.a.min(self.b),
                range: "a, b >= 0",
            });
        }
        let s = self.amplitude_sq();
        if s <= 1.0 {
            return Err(Error::SubcriticalAmplitude(s));
        }
        if s >= 4.0 {
            return Err(Error::OutOfRange {
                name: "a^2 + b^2",
                value: s,
                range: "a^2 + b^2 < 4",
            });
        }
        Ok(self)
    }
}

/// Constants derived from `a^2 + b^2` at the spectral parameter `lambda = -i sigma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedConstants {
    pub sigma: f64,
    pub theta0: f64,
    /// Phase of the linear unstable eigenfunction, `arctan sigma`.
    pub phi: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub lambda: Complex64,
    pub kappa_plus: Complex64,
    pub kappa_minus: Complex64,
}

pub fn derive_constants(orbit: &OrbitParams) -> Result<DerivedConstants> {
    derive_from_amplitude_sq(orbit.amplitude_sq())
}

pub(crate) fn derive_from_amplitude_sq(s: f64) -> Result<DerivedConstants> {
    if !(s > 1.0) || !s.is_finite() {
        return Err(Error::SubcriticalAmplitude(s));
    }
    let sigma = (s - 1.0).sqrt();
    let theta0 = sigma.atan();
    let lambda = Complex64::new(0.0, -sigma);
    let (kappa_plus, kappa_minus) = wave_numbers(s, lambda);
    Ok(DerivedConstants {
        sigma,
        theta0,
        phi: theta0,
        sigma1: (Complex64::i() * lambda / 2.0).re,
        sigma2: -(7.0 * s + 2.0) / 12.0,
        lambda,
        kappa_plus,
        kappa_minus,
    })
}

/// `kappa_pm = -lambda/6 +- sqrt(s + lambda^2) / 2`.
pub fn wave_numbers(s: f64, lambda: Complex64) -> (Complex64, Complex64) {
    let root = (lambda * lambda + s).sqrt();
    (-lambda / 6.0 + root / 2.0, -lambda / 6.0 - root / 2.0)
}

/// Maps an angle into `(-pi, pi]`.
pub fn normalize_angle(theta: f64) -> f64 {
    if !theta.is_finite() {
        return theta;
    }
    let mut t = theta.rem_euclid(2.0 * PI);
    if t > PI {
        t -= 2.0 * PI;
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn validation_examples() {
        assert!(validate_system(SystemParams::new(1.5, 1.0, 2.0, 0.01)).is_ok());
        assert!(matches!(
            validate_system(SystemParams::new(1.5, 2.0, 1.0, 0.01)),
            Err(Error::NoSaddle { .. })
        ));
        assert!(matches!(
            validate_system(SystemParams::new(2.5, 1.0, 2.0, 0.01)),
            Err(Error::OutOfRange { name: "omega", .. })
        ));
        assert!(matches!(
            validate_system(SystemParams::new(1.5, 1.0, 2.0, -1e-3)),
            Err(Error::NegativeEpsilon(_))
        ));
        // negative beta is admissible as long as |beta| is large enough
        assert!(validate_system(SystemParams::new(1.5, 1.0, -2.0, 0.01)).is_ok());
    }

    #[test]
    fn unit_amplitudes() {
        let c = derive_constants(&OrbitParams::new(1.0, 1.0, 0.0, 0.0, 0.0, 0.0)).unwrap();
        assert_abs_diff_eq!(c.sigma, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c.theta0, PI / 4.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c.sigma1, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(c.sigma2, -4.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c.kappa_plus.re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(c.kappa_plus.im, 1.0 / 6.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c.kappa_minus.re, -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(c.kappa_minus.im, 1.0 / 6.0, epsilon = 1e-15);
    }

    #[test]
    fn subcritical_boundary() {
        let r = derive_constants(&OrbitParams::new(1.0, 0.0, 0.0, 0.0, 0.0, 0.0));
        assert_eq!(r, Err(Error::SubcriticalAmplitude(1.0)));
    }

    #[test]
    fn melnikov_point_lies_on_resonance_circle() {
        for &omega in &[1.05, 1.3, 1.5, 1.9] {
            let o = OrbitParams::melnikov_point(omega, 0.3);
            assert_abs_diff_eq!(o.amplitude_sq(), omega * omega, epsilon = 1e-14);
            let c = derive_constants(&o).unwrap();
            assert_abs_diff_eq!(c.sigma, (omega * omega - 1.0).sqrt(), epsilon = 1e-14);
        }
    }

    #[test]
    fn angle_normalization() {
        assert_abs_diff_eq!(normalize_angle(3.0 * PI), PI, epsilon = 1e-12);
        assert_abs_diff_eq!(normalize_angle(-PI), PI, epsilon = 1e-12);
        assert_abs_diff_eq!(normalize_angle(0.5), 0.5);
        assert_abs_diff_eq!(normalize_angle(-7.0), -7.0 + 2.0 * PI, epsilon = 1e-12);
    }

    proptest::proptest! {
        #[test]
        fn unit_radicand_at_chosen_lambda(a in 0.0f64..2.0, b in 0.0f64..2.0) {
            let s = a * a + b * b;
            proptest::prop_assume!(s > 1.0 + 1e-9);
            let c = derive_constants(&OrbitParams::new(a, b, 0.0, 0.0, 0.0, 0.0)).unwrap();
            let r = (c.lambda * c.lambda + s).sqrt();
            proptest::prop_assert!((r - 1.0).norm() < 1e-12);
            proptest::prop_assert!(c.sigma > 0.0);
            proptest::prop_assert!(c.theta0 > 0.0 && c.theta0 < PI / 2.0);
        }

        #[test]
        fn depends_only_on_amplitude_sq(a in 0.7f64..1.4, t in 0.0f64..1.5) {
            let s = 2.0 * a * a;
            proptest::prop_assume!(s > 1.0 + 1e-9);
            let r = s.sqrt();
            let c1 = derive_constants(&OrbitParams::new(a, a, 0.0, 0.0, 0.0, 0.0)).unwrap();
            let c2 = derive_constants(&OrbitParams::new(r * t.cos(), r * t.sin(), 1.0, -1.0, 0.0, 0.0)).unwrap();
            proptest::prop_assert!((c1.sigma - c2.sigma).abs() < 1e-12);
            proptest::prop_assert!((c1.theta0 - c2.theta0).abs() < 1e-12);
            proptest::prop_assert!((c1.sigma2 - c2.sigma2).abs() < 1e-12);
        }
    }
}
