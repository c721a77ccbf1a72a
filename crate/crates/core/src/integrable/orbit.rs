use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use super::Sign;
use crate::error::Result;
use crate::field::ComplexField;
use crate::params::{derive_constants, OrbitParams};

type C64 = Complex64;

/// Beyond this `|tau|` the profile equals its asymptotic limit to machine precision.
const TAU_SATURATION: f64 = 350.0;

/// Plane wave `p = a exp(i delta1)`, `q = b exp(i delta2)`.
pub fn plane_wave(t: f64, orbit: &OrbitParams, omega: f64) -> (C64, C64) {
    let nu = 0.5 * (orbit.amplitude_sq() - omega * omega);
    (
        C64::from_polar(orbit.a, nu * t + orbit.gamma1),
        C64::from_polar(orbit.b, nu * t + orbit.gamma2),
    )
}

/// Which closed form of the profile `h` to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrbitForm {
    /// Arbitrary Backlund phase `theta_bd`.
    General,
    /// Even in `x`; `Plus` is `theta_bd + theta0 - pi/2 = 0`, `Minus` is `= pi`.
    Even(Sign),
}

/// `h` and its derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileJet {
    pub h: C64,
    pub h_t: C64,
    pub h_x: C64,
    pub h_xx: C64,
}

/// Profile `h(tau, phase)` where `phase` is the argument of the cosine term.
pub(crate) fn profile_jet(theta0: f64, tau: f64, phase: f64) -> (C64, C64, C64, C64) {
    let c2 = (2.0 * theta0).cos();
    let s2 = (2.0 * theta0).sin();
    let s0 = theta0.sin();
    let zero = C64::new(0.0, 0.0);
    if tau.abs() > TAU_SATURATION {
        return (C64::new(c2, s2 * tau.signum()), zero, zero, zero);
    }
    let e = (2.0 * tau).exp();
    let sech = 2.0 / (e + 1.0 / e);
    let tanh = (2.0 * tau).tanh();
    let (sin_ph, cos_ph) = phase.sin_cos();
    let c_x = -sin_ph;

    let num = C64::new(c2 - s0 * sech * cos_ph, s2 * tanh);
    let den = 1.0 + s0 * sech * cos_ph;
    // num + den, independent of x
    let sum = C64::new(1.0 + c2, s2 * tanh);

    let h = num / den;
    let h_x = -s0 * sech * c_x * sum / (den * den);
    let h_xx = s0 * sech * sum * (cos_ph * den + 2.0 * s0 * sech * c_x * c_x) / den.powi(3);
    let num_tau = C64::new(2.0 * s0 * sech * tanh * cos_ph, 2.0 * s2 * sech * sech);
    let den_tau = -2.0 * s0 * sech * tanh * cos_ph;
    let h_tau = (num_tau * den - num * den_tau) / (den * den);
    (h, h_tau, h_x, h_xx)
}

fn cosine_phase(x: f64, orbit: &OrbitParams, theta0: f64, form: OrbitForm) -> f64 {
    match form {
        OrbitForm::General => x + orbit.theta_bd + theta0 - FRAC_PI_2,
        OrbitForm::Even(Sign::Plus) => x,
        OrbitForm::Even(Sign::Minus) => x + PI,
    }
}

/// `h` together with `h_t`, `h_x`, `h_xx`, all from the closed form.
pub fn eval_h_jet(t: f64, x: f64, orbit: &OrbitParams, form: OrbitForm) -> Result<ProfileJet> {
    let c = derive_constants(orbit)?;
    let tau = 0.5 * c.sigma * t + 0.5 * orbit.rho;
    let (h, h_tau, h_x, h_xx) = profile_jet(c.theta0, tau, cosine_phase(x, orbit, c.theta0, form));
    Ok(ProfileJet {
        h,
        h_t: h_tau * (0.5 * c.sigma),
        h_x,
        h_xx,
    })
}

/// The profile `h` with arbitrary Backlund parameters `(rho, theta_bd)`.
pub fn eval_h_general(t: f64, x: f64, orbit: &OrbitParams) -> Result<C64> {
    eval_h_jet(t, x, orbit, OrbitForm::General).map(|j| j.h)
}

/// The even-in-`x` profile, with `rho` supplied explicitly.
pub fn eval_h_even(t: f64, x: f64, sign: Sign, rho: f64, orbit: &OrbitParams) -> Result<C64> {
    let o = OrbitParams { rho, ..*orbit };
    eval_h_jet(t, x, &o, OrbitForm::Even(sign)).map(|j| j.h)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomoclinicSample {
    pub h: C64,
    pub p_hat: C64,
    pub q_hat: C64,
}

/// `p_hat = a exp(i delta1) h`, `q_hat = b exp(i delta2) h`.
pub fn homoclinic_orbit(t: f64, x: f64, orbit: &OrbitParams, omega: f64, form: OrbitForm) -> Result<HomoclinicSample> {
    let h = eval_h_jet(t, x, orbit, form)?.h;
    let (p, q) = plane_wave(t, orbit, omega);
    Ok(HomoclinicSample {
        h,
        p_hat: p * h,
        q_hat: q * h,
    })
}

/// Homoclinic fields with analytic time and second space derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomoclinicJet {
    pub p: C64,
    pub q: C64,
    pub p_t: C64,
    pub q_t: C64,
    pub p_xx: C64,
    pub q_xx: C64,
}

pub fn homoclinic_jet(t: f64, x: f64, orbit: &OrbitParams, omega: f64, form: OrbitForm) -> Result<HomoclinicJet> {
    let j = eval_h_jet(t, x, orbit, form)?;
    let (p0, q0) = plane_wave(t, orbit, omega);
    let nu = 0.5 * (orbit.amplitude_sq() - omega * omega);
    let ht = C64::i() * nu * j.h + j.h_t;
    Ok(HomoclinicJet {
        p: p0 * j.h,
        q: q0 * j.h,
        p_t: p0 * ht,
        q_t: q0 * ht,
        p_xx: p0 * j.h_xx,
        q_xx: q0 * j.h_xx,
    })
}

/// Samples the homoclinic orbit at time `t` on an `n`-point periodic grid.
pub fn homoclinic_field(t: f64, n: usize, orbit: &OrbitParams, omega: f64, form: OrbitForm) -> Result<ComplexField> {
    derive_constants(orbit)?;
    let mut p = Vec::with_capacity(n);
    let mut q = Vec::with_capacity(n);
    for x in ComplexField::grid(n) {
        let s = homoclinic_orbit(t, x, orbit, omega, form)?;
        p.push(s.p_hat);
        q.push(s.q_hat);
    }
    ComplexField::new(p, q)
}
