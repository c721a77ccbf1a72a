use std::f64::consts::SQRT_2;

use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::SystemParams;

/// Smallest action admitted where `1 / sqrt(I)` appears.
pub(crate) const MIN_ACTION: f64 = 1e-14;

/// Polar state `(I1, theta1, I2, theta2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedState {
    pub i1: f64,
    pub theta1: f64,
    pub i2: f64,
    pub theta2: f64,
}

impl ReducedState {
    pub fn new(i1: f64, theta1: f64, i2: f64, theta2: f64) -> Self {
        Self { i1, theta1, i2, theta2 }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.i1, self.theta1, self.i2, self.theta2]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    /// Exchanges the two components.
    pub fn swapped(self) -> Self {
        Self::new(self.i2, self.theta2, self.i1, self.theta1)
    }

    /// `(J, theta)` coordinates with `I = omega^2/2 + sqrt(eps) j`.
    pub fn to_rescaled(self, omega: f64, epsilon: f64) -> RescaledState {
        let s = epsilon.sqrt();
        let half = 0.5 * omega * omega;
        RescaledState::new((self.i1 - half) / s, self.theta1, (self.i2 - half) / s, self.theta2)
    }
}

/// Rescaled state `(j1, theta1, j2, theta2)` with `I = omega^2/2 + sqrt(eps) j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RescaledState {
    pub j1: f64,
    pub theta1: f64,
    pub j2: f64,
    pub theta2: f64,
}

impl RescaledState {
    pub fn new(j1: f64, theta1: f64, j2: f64, theta2: f64) -> Self {
        Self { j1, theta1, j2, theta2 }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.j1, self.theta1, self.j2, self.theta2]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    pub fn to_polar(self, omega: f64, epsilon: f64) -> ReducedState {
        let s = epsilon.sqrt();
        let half = 0.5 * omega * omega;
        ReducedState::new(half + s * self.j1, self.theta1, half + s * self.j2, self.theta2)
    }
}

fn check_action(i: f64, epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && !(i >= MIN_ACTION) {
        return Err(Error::VanishingAction(i));
    }
    Ok(())
}

/// Perturbed polar system
///
/// ```text
/// I'     = eps [-2 alpha I - 2 beta sqrt(I) cos theta]
/// theta' = (I1 + I2 - omega^2)/2 + eps beta sin(theta) / sqrt(I)
/// ```
pub fn rhs_polar(s: &ReducedState, params: &SystemParams) -> Result<[f64; 4]> {
    let SystemParams {
        omega,
        alpha,
        beta,
        epsilon,
    } = *params;
    check_action(s.i1, epsilon)?;
    check_action(s.i2, epsilon)?;
    let detuning = 0.5 * (s.i1 + s.i2 - omega * omega);
    let component = |i: f64, th: f64| {
        if epsilon == 0.0 {
            return (0.0, detuning);
        }
        let r = i.sqrt();
        let (sin, cos) = th.sin_cos();
        (
            epsilon * (-2.0 * alpha * i - 2.0 * beta * r * cos),
            detuning + epsilon * beta * sin / r,
        )
    };
    let (i1, t1) = component(s.i1, s.theta1);
    let (i2, t2) = component(s.i2, s.theta2);
    Ok([i1, t1, i2, t2])
}

/// Analytic Jacobian of [`rhs_polar`] in the variable order `(I1, theta1, I2, theta2)`.
pub fn jacobian_polar(s: &ReducedState, params: &SystemParams) -> Result<Matrix4<f64>> {
    let SystemParams {
        alpha, beta, epsilon, ..
    } = *params;
    check_action(s.i1, epsilon)?;
    check_action(s.i2, epsilon)?;
    let mut jac = Matrix4::zeros();
    for (k, (i, th)) in [(s.i1, s.theta1), (s.i2, s.theta2)].into_iter().enumerate() {
        let (ri, rt) = (2 * k, 2 * k + 1);
        let r = i.sqrt();
        let (sin, cos) = th.sin_cos();
        if epsilon > 0.0 {
            jac[(ri, ri)] = epsilon * (-2.0 * alpha - beta * cos / r);
            jac[(ri, rt)] = epsilon * 2.0 * beta * r * sin;
            jac[(rt, rt)] = epsilon * beta * cos / r;
        }
        jac[(rt, 0)] = 0.5;
        jac[(rt, 2)] = 0.5;
        if epsilon > 0.0 {
            jac[(rt, ri)] += -0.5 * epsilon * beta * sin / (r * i);
        }
    }
    Ok(jac)
}

/// Leading-order system in the slow time `tau = sqrt(eps) t`:
/// `j' = -alpha omega^2 - sqrt 2 beta omega cos theta`, `theta' = (j1 + j2)/2`.
pub fn rhs_leading(s: &RescaledState, params: &SystemParams) -> [f64; 4] {
    let SystemParams { omega, alpha, beta, .. } = *params;
    let drive = |th: f64| -alpha * omega * omega - SQRT_2 * beta * omega * th.cos();
    let mean = 0.5 * (s.j1 + s.j2);
    [drive(s.theta1), mean, drive(s.theta2), mean]
}

/// Full rescaled system including the `sqrt(eps)` corrections.
pub fn rhs_rescaled(s: &RescaledState, params: &SystemParams) -> Result<[f64; 4]> {
    let SystemParams {
        omega,
        alpha,
        beta,
        epsilon,
    } = *params;
    let lead = rhs_leading(s, params);
    if epsilon == 0.0 {
        return Ok(lead);
    }
    let se = epsilon.sqrt();
    let half = 0.5 * omega * omega;
    let correction = |j: f64, th: f64| -> Result<(f64, f64)> {
        let i = half + se * j;
        check_action(i, epsilon)?;
        let r = i.sqrt();
        let (sin, cos) = th.sin_cos();
        Ok((
            -se * 2.0 * alpha * j - 2.0 * beta * (r - omega / SQRT_2) * cos,
            se * beta * sin / r,
        ))
    };
    let (a1, b1) = correction(s.j1, s.theta1)?;
    let (a2, b2) = correction(s.j2, s.theta2)?;
    Ok([lead[0] + a1, lead[1] + b1, lead[2] + a2, lead[3] + b2])
}

/// `H = (j1 + j2)^2 / 4 + alpha omega^2 (theta1 + theta2) + sqrt 2 beta omega (sin theta1 + sin theta2)`.
pub fn hamiltonian_reduced(s: &RescaledState, params: &SystemParams) -> f64 {
    let SystemParams { omega, alpha, beta, .. } = *params;
    0.25 * (s.j1 + s.j2).powi(2)
        + alpha * omega * omega * (s.theta1 + s.theta2)
        + SQRT_2 * beta * omega * (s.theta1.sin() + s.theta2.sin())
}

/// `K = theta1 - theta2`.
pub fn constant_k(s: &RescaledState) -> f64 {
    s.theta1 - s.theta2
}

/// `H` restricted to `theta1 - theta2 = delta`, with `j = j1 + j2` and
/// `theta = theta1 - delta/2`. Since `theta1 + theta2 = 2 theta` this equals the full `H`.
pub fn restricted_hamiltonian(j: f64, theta: f64, delta: f64, params: &SystemParams) -> f64 {
    let SystemParams { omega, alpha, beta, .. } = *params;
    0.25 * j * j + 2.0 * alpha * omega * omega * theta + 2.0 * SQRT_2 * beta * omega * (0.5 * delta).cos() * theta.sin()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn params() -> SystemParams {
        SystemParams::new(1.5, 0.7, 1.3, 0.01)
    }

    fn random_state(rng: &mut impl Rng) -> ReducedState {
        ReducedState::new(
            rng.gen_range(0.2..2.0),
            rng.gen_range(-3.0..3.0),
            rng.gen_range(0.2..2.0),
            rng.gen_range(-3.0..3.0),
        )
    }

    #[test]
    fn resonance_circle_is_at_rest_without_perturbation() {
        let p = params().with_epsilon(0.0);
        for (i1, th1, th2) in [(0.3, 0.1, 2.0), (1.0, -1.0, 0.5), (2.0, 3.0, -3.0)] {
            let s = ReducedState::new(i1, th1, 2.25 - i1, th2);
            assert_eq!(rhs_polar(&s, &p).unwrap(), [0.0; 4]);
        }
    }

    #[test]
    fn swap_symmetry() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        for _ in 0..20 {
            let s = random_state(&mut rng);
            let f = rhs_polar(&s, &params()).unwrap();
            let g = rhs_polar(&s.swapped(), &params()).unwrap();
            assert_eq!([f[2], f[3], f[0], f[1]], g);
        }
    }

    #[test]
    fn vanishing_action_is_reported() {
        let s = ReducedState::new(0.0, 0.0, 1.0, 0.0);
        assert!(matches!(rhs_polar(&s, &params()), Err(Error::VanishingAction(_))));
        assert!(rhs_polar(&s, &params().with_epsilon(0.0)).is_ok());
    }

    #[test]
    fn analytic_jacobian_matches_differences() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(8);
        for _ in 0..10 {
            let s = random_state(&mut rng);
            let jac = jacobian_polar(&s, &params()).unwrap();
            let x = s.to_array();
            for k in 0..4 {
                let h = 1e-6;
                let (mut xp, mut xm) = (x, x);
                xp[k] += h;
                xm[k] -= h;
                let fp = rhs_polar(&ReducedState::from_array(xp), &params()).unwrap();
                let fm = rhs_polar(&ReducedState::from_array(xm), &params()).unwrap();
                for r in 0..4 {
                    let fd = (fp[r] - fm[r]) / (2.0 * h);
                    assert!((fd - jac[(r, k)]).abs() < 1e-8, "entry ({r},{k})");
                }
            }
        }
    }

    #[test]
    fn leading_system_is_hamiltonian() {
        let p = params();
        let mut rng = rand::rngs::StdRng::seed_from_u64(5);
        for _ in 0..20 {
            let s = RescaledState::new(
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-3.0..3.0),
            );
            let x = s.to_array();
            let grad: Vec<f64> = (0..4)
                .map(|k| {
                    let h = 1e-5;
                    let (mut xp, mut xm) = (x, x);
                    xp[k] += h;
                    xm[k] -= h;
                    (hamiltonian_reduced(&RescaledState::from_array(xp), &p)
                        - hamiltonian_reduced(&RescaledState::from_array(xm), &p))
                        / (2.0 * h)
                })
                .collect();
            let f = rhs_leading(&s, &p);
            let want = [-grad[1], grad[0], -grad[3], grad[2]];
            for (a, b) in f.iter().zip(want) {
                assert!((a - b).abs() < 1e-8);
            }
            assert_eq!(f[1], f[3]);
        }
    }

    #[test]
    fn rescaled_reduces_to_leading_at_zero_epsilon() {
        let s = RescaledState::new(0.4, 1.0, -0.2, 2.0);
        let p = params().with_epsilon(0.0);
        assert_eq!(rhs_rescaled(&s, &p).unwrap(), rhs_leading(&s, &p));
    }

    #[test]
    fn rescaled_is_pushforward_of_polar() {
        let p = params();
        let (w, e) = (p.omega, p.epsilon);
        let mut rng = rand::rngs::StdRng::seed_from_u64(9);
        for _ in 0..20 {
            let r = RescaledState::new(
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..3.0),
            );
            let f = rhs_polar(&r.to_polar(w, e), &p).unwrap();
            let g = rhs_rescaled(&r, &p).unwrap();
            let pushed = [f[0] / e, f[1] / e.sqrt(), f[2] / e, f[3] / e.sqrt()];
            for (a, b) in pushed.iter().zip(g) {
                assert!((a - b).abs() < 1e-10 * (1.0 + b.abs()));
            }
        }
    }

    #[test]
    fn correction_scales_like_root_epsilon() {
        let states: Vec<RescaledState> = (0..5)
            .map(|k| RescaledState::new(-1.0 + 0.5 * k as f64, 0.3 * k as f64, 1.0, -0.7))
            .collect();
        let size = |e: f64| {
            let p = params().with_epsilon(e);
            states
                .iter()
                .map(|s| {
                    let a = rhs_rescaled(s, &p).unwrap();
                    let b = rhs_leading(s, &p);
                    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
                })
                .fold(0.0, f64::max)
        };
        let slope = (size(1e-4).ln() - size(1e-8).ln()) / (1e-4f64.ln() - 1e-8f64.ln());
        assert!((slope - 0.5).abs() < 0.02, "slope {slope}");
    }

    #[test]
    fn restricted_form_matches_full() {
        let p = params();
        let mut rng = rand::rngs::StdRng::seed_from_u64(12);
        for _ in 0..20 {
            let delta = rng.gen_range(-2.0..2.0);
            let theta = rng.gen_range(-3.0..3.0);
            let (j1, j2) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let s = RescaledState::new(j1, theta + 0.5 * delta, j2, theta - 0.5 * delta);
            let full = hamiltonian_reduced(&s, &p);
            let restricted = restricted_hamiltonian(j1 + j2, theta, delta, &p);
            assert!((full - restricted).abs() < 1e-12);
            assert!((constant_k(&s) - delta).abs() < 1e-15);
        }
    }
}
