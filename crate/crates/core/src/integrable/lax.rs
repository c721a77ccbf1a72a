use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;

use super::orbit::plane_wave;
use super::Sign;
use crate::error::{Error, Result};
use crate::params::{derive_constants, wave_numbers, OrbitParams};

type C64 = Complex64;

/// Inputs of the Lax matrices at one point of space-time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaxPoint {
    pub lambda: C64,
    pub p: C64,
    pub q: C64,
    pub p_x: C64,
    pub q_x: C64,
}

/// A solution vector `(psi1, psi2, psi3)` of the Lax pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenfunctionValue {
    pub psi: Vector3<C64>,
}

impl EigenfunctionValue {
    pub fn norm_sqr(&self) -> f64 {
        self.psi.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn scale(&self, c: C64) -> Self {
        Self { psi: self.psi * c }
    }
}

impl std::ops::Add for EigenfunctionValue {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self {
            psi: self.psi + rhs.psi,
        }
    }
}

/// Assembles `U = lambda A0 + A1` and `V = lambda^2 A0 + lambda A1 + A2`.
pub fn lax_matrices(pt: &LaxPoint, omega: f64) -> (Matrix3<C64>, Matrix3<C64>) {
    let i = C64::i();
    let zero = C64::new(0.0, 0.0);
    let LaxPoint { lambda, p, q, p_x, q_x } = *pt;
    let a0 = Matrix3::from_diagonal(&Vector3::new(-2.0 / 3.0 * i, i / 3.0, i / 3.0));
    #[rustfmt::skip]
    let a1 = Matrix3::new(
        zero,            p / 2.0, q / 2.0,
        -p.conj() / 2.0, zero,    zero,
        -q.conj() / 2.0, zero,    zero,
    );
    let pp = p.norm_sqr();
    let qq = q.norm_sqr();
    let w2 = omega * omega;
    #[rustfmt::skip]
    let a2 = Matrix3::new(
        C64::from(-(pp + qq) + 4.0 * w2), -2.0 * p_x,           -2.0 * q_x,
        -2.0 * p_x.conj(),                C64::from(pp + 2.0 * w2), q * p.conj(),
        -2.0 * q_x.conj(),                q.conj() * p,         C64::from(qq + 2.0 * w2),
    ) * (-i / 4.0);
    let u = a0 * lambda + a1;
    let v = a0 * (lambda * lambda) + a1 * lambda + a2;
    (u, v)
}

/// Explicit eigenfunction `psi^{+-}` of the Lax pair along the plane wave,
/// at `lambda = -i sigma`.
///
/// The common factor `exp(+-sigma1 t + i sigma2 t) exp(i kappa^{+-} x)` is kept;
/// it cancels in [`bd_transform`].
pub fn eigenfunction(t: f64, x: f64, sign: Sign, orbit: &OrbitParams, omega: f64) -> Result<EigenfunctionValue> {
    let c = derive_constants(orbit)?;
    eigenfunction_at_lambda(t, x, sign, orbit, omega, c.lambda)
}

/// Same as [`eigenfunction`] for either root of `lambda^2 = 1 - a^2 - b^2`.
pub fn eigenfunction_at_lambda(
    t: f64,
    x: f64,
    sign: Sign,
    orbit: &OrbitParams,
    omega: f64,
    lambda: C64,
) -> Result<EigenfunctionValue> {
    let s = orbit.amplitude_sq();
    if s <= 1.0 {
        return Err(Error::SubcriticalAmplitude(s));
    }
    let i = C64::i();
    let sg = sign.value();
    let (kp, km) = wave_numbers(s, lambda);
    let kappa = match sign {
        Sign::Plus => kp,
        Sign::Minus => km,
    };
    let sigma1 = i * lambda / 2.0;
    let sigma2 = -(7.0 * s + 2.0) / 12.0;
    let nu = 0.5 * (s - omega * omega);
    let d1 = nu * t + orbit.gamma1;
    let d2 = nu * t + orbit.gamma2;
    let common = (sigma1 * sg * t + i * sigma2 * t + i * kappa * x).exp();
    let psi = Vector3::new(
        (i * lambda - i * sg) * C64::from_polar(1.0, d1 + d2),
        C64::from_polar(orbit.a, d2),
        C64::from_polar(orbit.b, d1),
    ) * common;
    Ok(EigenfunctionValue { psi })
}

/// Backlund-Darboux map `(p, q) -> (p_hat, q_hat)` driven by an eigenfunction at `lambda`.
pub fn bd_transform(lambda: C64, p: C64, q: C64, psi: &EigenfunctionValue) -> Result<(C64, C64)> {
    let n = psi.norm_sqr();
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::ZeroEigenfunction);
    }
    let k = 2.0 * C64::i() * (lambda.conj() - lambda) / n;
    let [p1, p2, p3] = [psi.psi[0], psi.psi[1], psi.psi[2]];
    Ok((p + k * p1 * p2.conj(), q + k * p1 * p3.conj()))
}

/// Homoclinic orbit produced by the Darboux map applied to
/// `psi = c+ psi+ + c- psi-` with `c+/c- = exp(rho + i theta_bd)`.
pub fn darboux_orbit(t: f64, x: f64, orbit: &OrbitParams, omega: f64, lambda: C64) -> Result<(C64, C64)> {
    let plus = eigenfunction_at_lambda(t, x, Sign::Plus, orbit, omega, lambda)?;
    let minus = eigenfunction_at_lambda(t, x, Sign::Minus, orbit, omega, lambda)?;
    let ratio = C64::new(orbit.rho, orbit.theta_bd).exp();
    let psi = plus.scale(ratio) + minus;
    let (p, q) = plane_wave(t, orbit, omega);
    bd_transform(lambda, p, q, &psi)
}

/// Time derivative of the eigenfunction from its closed form: row 1 carries
/// `exp(i(d1 + d2))`, rows 2 and 3 a single phase.
fn eigenfunction_dt(
    psi: &EigenfunctionValue,
    sign: Sign,
    orbit: &OrbitParams,
    omega: f64,
    lambda: C64,
) -> Vector3<C64> {
    let i = C64::i();
    let s = orbit.amplitude_sq();
    let nu = 0.5 * (s - omega * omega);
    let rate = i * lambda / 2.0 * sign.value() + i * (-(7.0 * s + 2.0) / 12.0);
    Vector3::new(
        psi.psi[0] * (2.0 * i * nu + rate),
        psi.psi[1] * (i * nu + rate),
        psi.psi[2] * (i * nu + rate),
    )
}

/// `max |psi_x - U psi|` and `max |psi_t - V psi|` for the plane-wave
/// eigenfunction, relative to `1 + max |psi|`.
pub fn lax_residuals(t: f64, x: f64, sign: Sign, orbit: &OrbitParams, omega: f64) -> Result<(f64, f64)> {
    let c = derive_constants(orbit)?;
    let e = eigenfunction_at_lambda(t, x, sign, orbit, omega, c.lambda)?;
    let (p, q) = plane_wave(t, orbit, omega);
    let zero = C64::new(0.0, 0.0);
    let (u, v) = lax_matrices(
        &LaxPoint {
            lambda: c.lambda,
            p,
            q,
            p_x: zero,
            q_x: zero,
        },
        omega,
    );
    let kappa = match sign {
        Sign::Plus => c.kappa_plus,
        Sign::Minus => c.kappa_minus,
    };
    let dx = e.psi * (C64::i() * kappa);
    let dt = eigenfunction_dt(&e, sign, orbit, omega, c.lambda);
    let max = |m: Vector3<C64>| m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let scale = 1.0 + max(e.psi);
    Ok((max(dx - u * e.psi) / scale, max(dt - v * e.psi) / scale))
}
