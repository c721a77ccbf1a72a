//! Melnikov integrals along the even homoclinic orbit and the persistence
//! surface `alpha = alpha(omega)`.
//!
//! Convention: `M1`, `M2`, `M3` are integrals in `d tau dx` with
//! `tau = sigma t / 2` (`rho = 0`). The factor `(sigma/2)^{-1}` converting
//! `d tau` to `dt` is applied exactly once, in [`melnikov_m`] and
//! [`melnikov_direct`]. The orbit is evaluated at `a = b = omega / sqrt 2`
//! with equal phases, which places the plane wave on the resonance circle.

use std::f64::consts::SQRT_2;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{ComplexField, SpectralGrid};
use crate::functionals::{inner, variational_gradient_g};
use crate::integrable::{homoclinic_field, homoclinic_jet, OrbitForm, Sign};
use crate::params::{derive_from_amplitude_sq, OrbitParams, SystemParams};
use crate::quadrature::QuadratureConfig;

type C64 = Complex64;

/// Relative change tolerated when both resolutions of [`QuadratureConfig`] are doubled.
pub const REFINEMENT_TOLERANCE: f64 = 1e-6;

/// `M1`, `M2`, `M3` at `omega = 1.5` from a brute-force 4096 x 8192 trapezoid
/// rule on `tau in [-20, 20]` (`scripts/melnikov_oracle.py`).
pub mod oracle {
    pub const OMEGA: f64 = 1.5;
    pub const M1: f64 = 26.179938779924267;
    pub const M2: f64 = -31.415926535909186;
    pub const M3: f64 = -6.981317007979836;
    pub const ALPHA: f64 = 1.203164333517343;
}

/// `(sigma, theta0)` at the evaluation point `a^2 + b^2 = omega^2`.
fn orbit_constants(omega: f64) -> Result<(f64, f64)> {
    check_omega(omega)?;
    let c = derive_from_amplitude_sq(omega * omega)?;
    Ok((c.sigma, c.theta0))
}

fn check_omega(omega: f64) -> Result<()> {
    if omega > 1.0 && omega < 2.0 {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name: "omega",
            value: omega,
            range: "1 < omega < 2",
        })
    }
}

fn integrands_from_profile(h: C64, h_xx: C64, omega: f64) -> (f64, f64, f64) {
    let w2 = omega * omega;
    let mod2 = h.norm_sqr();
    let cross = 2.0 * (h.conj() * h_xx).re;
    let i1 = 0.5 * w2 * (w2 * (1.0 - mod2) * cross - 4.0 * h_xx.norm_sqr());
    let i2 = w2 * (w2 * mod2 * (1.0 - mod2) - cross);
    let i3 = 0.5 * w2 * h.re * (1.0 - mod2) - h_xx.re;
    (i1, i2, i3)
}

/// Integrands of `M1`, `M2`, `M3` at `(tau, x)` on the `+` even orbit.
pub fn melnikov_integrands(tau: f64, x: f64, omega: f64) -> (f64, f64, f64) {
    melnikov_integrands_signed(tau, x, omega, Sign::Plus)
}

/// As [`melnikov_integrands`], with either sign of the even closed form.
pub fn melnikov_integrands_signed(tau: f64, x: f64, omega: f64, sign: Sign) -> (f64, f64, f64) {
    let theta0 = (omega * omega - 1.0).max(0.0).sqrt().atan();
    let phase = match sign {
        Sign::Plus => x,
        Sign::Minus => x + std::f64::consts::PI,
    };
    let (h, _, _, h_xx) = crate::integrable::orbit_profile(theta0, tau, phase);
    integrands_from_profile(h, h_xx, omega)
}

/// The three Melnikov integrals at one `omega`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MelnikovIntegrals {
    pub omega: f64,
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    /// Largest relative change of `M1..M3` when the resolution was doubled.
    pub refinement_change: f64,
    pub quadrature: QuadratureConfig,
}

impl MelnikovIntegrals {
    pub fn as_array(&self) -> [f64; 3] {
        [self.m1, self.m2, self.m3]
    }
}

/// Evaluates `M1..M3` with one fixed rule and no convergence check.
pub fn m123_single(omega: f64, cfg: &QuadratureConfig, sign: Sign) -> Result<[f64; 3]> {
    check_omega(omega)?;
    cfg.validate()?;
    let (nodes, weights) = cfg.tau_rule();
    let xs: Vec<f64> = ComplexField::grid(cfg.n_x).collect();
    let dx = 2.0 * std::f64::consts::PI / cfg.n_x as f64;
    let rows: Vec<[f64; 3]> = nodes
        .par_iter()
        .zip(&weights)
        .map(|(&tau, &w)| {
            let mut acc = [0.0; 3];
            for &x in &xs {
                let (a, b, c) = melnikov_integrands_signed(tau, x, omega, sign);
                acc[0] += a;
                acc[1] += b;
                acc[2] += c;
            }
            acc.map(|v| v * w * dx)
        })
        .collect();
    Ok(rows
        .iter()
        .fold([0.0; 3], |s, r| [s[0] + r[0], s[1] + r[1], s[2] + r[2]]))
}

fn max_relative_change(coarse: &[f64; 3], fine: &[f64; 3]) -> f64 {
    coarse
        .iter()
        .zip(fine)
        .map(|(c, f)| (c - f).abs() / f.abs().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max)
}

/// `M1`, `M2`, `M3` at the resolution `cfg`, checked against a run with
/// `n_x` and `n_tau` both doubled. Returns the refined values.
pub fn compute_m123(omega: f64, cfg: &QuadratureConfig) -> Result<MelnikovIntegrals> {
    let coarse = m123_single(omega, cfg, Sign::Plus)?;
    let fine_cfg = cfg.doubled();
    let fine = m123_single(omega, &fine_cfg, Sign::Plus)?;
    let change = max_relative_change(&coarse, &fine);
    if !(change <= REFINEMENT_TOLERANCE) {
        return Err(Error::QuadratureNotConverged {
            change,
            tolerance: REFINEMENT_TOLERANCE,
        });
    }
    Ok(MelnikovIntegrals {
        omega,
        m1: fine[0],
        m2: fine[1],
        m3: fine[2],
        refinement_change: change,
        quadrature: *cfg,
    })
}

/// `cos gamma1 = -sqrt 2 alpha omega theta0 / (beta sin 2 theta0)`.
pub fn cos_gamma1(omega: f64, alpha: f64, beta: f64) -> Result<f64> {
    let c = cos_gamma1_unchecked(omega, alpha, beta)?;
    if c.abs() > 1.0 {
        return Err(Error::Infeasible(c));
    }
    Ok(c)
}

/// [`cos_gamma1`] without the `|cos gamma1| <= 1` check.
pub fn cos_gamma1_unchecked(omega: f64, alpha: f64, beta: f64) -> Result<f64> {
    if beta == 0.0 || !beta.is_finite() {
        return Err(Error::OutOfRange {
            name: "beta",
            value: beta,
            range: "beta != 0",
        });
    }
    let (_, theta0) = orbit_constants(omega)?;
    Ok(-SQRT_2 * alpha * omega * theta0 / (beta * (2.0 * theta0).sin()))
}

/// `M = eps (sigma/2)^{-1} [M1 - alpha M2 - 2 sqrt 2 beta omega cos(gamma1) M3]`
/// from precomputed integrals.
pub fn melnikov_m_from(m: &MelnikovIntegrals, alpha: f64, beta: f64, gamma1: f64, epsilon: f64) -> f64 {
    let sigma = (m.omega * m.omega - 1.0).sqrt();
    let bracket = m.m1 - alpha * m.m2 - beta * 2.0 * SQRT_2 * m.omega * gamma1.cos() * m.m3;
    epsilon * bracket / (0.5 * sigma)
}

/// The Melnikov function from the closed-form integrals.
pub fn melnikov_m(params: &SystemParams, gamma1: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let m = compute_m123(params.omega, cfg)?;
    Ok(melnikov_m_from(&m, params.alpha, params.beta, gamma1, params.epsilon))
}

/// `M2 - (4 omega^2 theta0 / sin 2 theta0) M3`.
pub fn alpha_denominator(m: &MelnikovIntegrals) -> f64 {
    let (_, theta0) = orbit_constants(m.omega).expect("integrals exist only for valid omega");
    m.m2 - 4.0 * m.omega * m.omega * theta0 / (2.0 * theta0).sin() * m.m3
}

/// `alpha(omega) = M1 / [M2 - (4 omega^2 theta0 / sin 2 theta0) M3]` from precomputed integrals.
pub fn alpha_from(m: &MelnikovIntegrals) -> Result<f64> {
    let den = alpha_denominator(m);
    if den.abs() < 1e-10 * m.m1.abs() || den == 0.0 {
        return Err(Error::DenominatorNearZero {
            omega: m.omega,
            denominator: den,
        });
    }
    Ok(m.m1 / den)
}

pub fn alpha_of_omega(omega: f64, cfg: &QuadratureConfig) -> Result<f64> {
    alpha_from(&compute_m123(omega, cfg)?)
}

/// Melnikov data at one `omega` for a given forcing `beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MelnikovResult {
    pub omega: f64,
    pub beta: f64,
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    pub alpha_star: f64,
    /// `cos gamma1` at `alpha_star`; may lie outside `[-1, 1]`.
    pub cos_gamma1: f64,
    /// `M` at `(alpha_star, gamma1)`, per unit `epsilon`.
    pub m: f64,
    pub feasible: bool,
    pub refinement_change: f64,
    pub quadrature: QuadratureConfig,
}

pub fn melnikov_result(omega: f64, beta: f64, cfg: &QuadratureConfig) -> Result<MelnikovResult> {
    let ints = compute_m123(omega, cfg)?;
    let alpha = alpha_from(&ints)?;
    let cg = cos_gamma1_unchecked(omega, alpha, beta)?;
    let feasible = cg.abs() <= 1.0 && alpha * omega < SQRT_2 * beta.abs();
    let m = if feasible {
        melnikov_m_from(&ints, alpha, beta, cg.acos(), 1.0)
    } else {
        f64::NAN
    };
    Ok(MelnikovResult {
        omega,
        beta,
        m1: ints.m1,
        m2: ints.m2,
        m3: ints.m3,
        alpha_star: alpha,
        cos_gamma1: cg,
        m,
        feasible,
        refinement_change: ints.refinement_change,
        quadrature: *cfg,
    })
}

/// Contributions to `int dG/dt dt` along the orbit, computed from the fields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DirectMelnikov {
    /// Sum of the three perturbation contributions.
    pub total: f64,
    /// From `eps p_xx`.
    pub diffusion: f64,
    /// From `-eps alpha p`.
    pub damping: f64,
    /// From `-eps beta`.
    pub forcing: f64,
    /// `int 2 Re <dG/d(conj u), u_t>` with the unperturbed vector field; zero
    /// up to quadrature error because `G` is invariant.
    pub conservative: f64,
    /// The same with the analytic time derivative of the orbit.
    pub along_orbit: f64,
}

impl DirectMelnikov {
    /// Sum of the magnitudes of the perturbation contributions.
    pub fn scale(&self) -> f64 {
        self.diffusion.abs() + self.damping.abs() + self.forcing.abs()
    }
}

/// `M = int dG/dt dt` evaluated numerically from the orbit fields: spectral
/// derivatives in `x`, the variational gradient of `G`, and the perturbation
/// vector field `eps [u_xx - alpha u - beta]`.
pub fn melnikov_direct(params: &SystemParams, gamma1: f64, cfg: &QuadratureConfig) -> Result<DirectMelnikov> {
    let omega = params.omega;
    let (sigma, _) = orbit_constants(omega)?;
    cfg.validate()?;
    let SystemParams {
        alpha, beta, epsilon, ..
    } = *params;
    let orbit = OrbitParams::melnikov_point(omega, gamma1);
    let form = OrbitForm::Even(Sign::Plus);
    let grid = SpectralGrid::new(cfg.n_x)?;
    let (nodes, weights) = cfg.tau_rule();
    let dt_dtau = 2.0 / sigma;

    let rows: Vec<Result<[f64; 5]>> = nodes
        .par_iter()
        .map(|&tau| {
            let t = tau * dt_dtau;
            let u = homoclinic_field(t, cfg.n_x, &orbit, omega, form)?;
            let grad = variational_gradient_g(&u);
            let uxx = grid.derivative_field(&u, 2)?;
            let forcing_field = ComplexField::constant(cfg.n_x, C64::from(-beta), C64::from(-beta))?;
            let diffusion = 2.0 * epsilon * inner(&grad, &uxx).re;
            let damping = -2.0 * epsilon * alpha * inner(&grad, &u).re;
            let forcing = 2.0 * epsilon * inner(&grad, &forcing_field).re;

            let n = cfg.n_x;
            let mut vel = ComplexField {
                p: Vec::with_capacity(n),
                q: Vec::with_capacity(n),
            };
            let mut exact = ComplexField {
                p: Vec::with_capacity(n),
                q: Vec::with_capacity(n),
            };
            for (j, x) in ComplexField::grid(n).enumerate() {
                let m = u.p[j].norm_sqr() + u.q[j].norm_sqr();
                let c = 0.5 * (m - omega * omega);
                vel.p.push(C64::i() * (uxx.p[j] + c * u.p[j]));
                vel.q.push(C64::i() * (uxx.q[j] + c * u.q[j]));
                let jet = homoclinic_jet(t, x, &orbit, omega, form)?;
                exact.p.push(jet.p_t);
                exact.q.push(jet.q_t);
            }
            let conservative = 2.0 * inner(&grad, &vel).re;
            let along = 2.0 * inner(&grad, &exact).re;
            Ok([diffusion, damping, forcing, conservative, along])
        })
        .collect();

    let mut acc = [0.0; 5];
    for (row, w) in rows.into_iter().zip(&weights) {
        let row = row?;
        for (a, r) in acc.iter_mut().zip(row) {
            *a += r * w * dt_dtau;
        }
    }
    Ok(DirectMelnikov {
        total: acc[0] + acc[1] + acc[2],
        diffusion: acc[0],
        damping: acc[1],
        forcing: acc[2],
        conservative: acc[3],
        along_orbit: acc[4],
    })
}

/// Outcome of one `omega` in an `alpha(omega)` sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RowStatus {
    Ok,
    NotConverged,
    DenominatorNearZero,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub omega: f64,
    pub alpha: f64,
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    pub feasible: bool,
    pub cos_gamma1: f64,
    /// Denominator of `alpha(omega)`.
    pub denominator: f64,
    /// `M` at `(alpha(omega), gamma1)` per unit `epsilon`, `NaN` when infeasible.
    pub m_residual: f64,
    pub status: RowStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaCurve {
    pub rows: Vec<SweepRow>,
    /// `omega` intervals on which the denominator of `alpha(omega)` changes sign.
    pub denominator_brackets: Vec<(f64, f64)>,
    /// Jumps in `alpha` larger than ten times the typical slope.
    pub warnings: Vec<String>,
    pub quadrature: QuadratureConfig,
}

fn sweep_row(omega: f64, beta: f64, cfg: &QuadratureConfig) -> SweepRow {
    let nan = f64::NAN;
    let mut row = SweepRow {
        omega,
        alpha: nan,
        m1: nan,
        m2: nan,
        m3: nan,
        feasible: false,
        cos_gamma1: nan,
        denominator: nan,
        m_residual: nan,
        status: RowStatus::NotConverged,
    };
    let coarse = m123_single(omega, cfg, Sign::Plus);
    let fine = m123_single(omega, &cfg.doubled(), Sign::Plus);
    let (Ok(coarse), Ok(fine)) = (coarse, fine) else {
        return row;
    };
    [row.m1, row.m2, row.m3] = fine;
    let ints = MelnikovIntegrals {
        omega,
        m1: fine[0],
        m2: fine[1],
        m3: fine[2],
        refinement_change: max_relative_change(&coarse, &fine),
        quadrature: *cfg,
    };
    row.denominator = alpha_denominator(&ints);
    if !(ints.refinement_change <= REFINEMENT_TOLERANCE) {
        return row;
    }
    match alpha_from(&ints) {
        Ok(alpha) => {
            row.alpha = alpha;
            row.status = RowStatus::Ok;
            if let Ok(cg) = cos_gamma1_unchecked(omega, alpha, beta) {
                row.cos_gamma1 = cg;
                row.feasible = cg.abs() <= 1.0 && alpha * omega < SQRT_2 * beta.abs();
                if row.feasible {
                    row.m_residual = melnikov_m_from(&ints, alpha, beta, cg.acos(), 1.0);
                }
            }
        }
        Err(_) => row.status = RowStatus::DenominatorNearZero,
    }
    row
}

/// Tabulates `alpha(omega)` on `n_points` equispaced samples of
/// `[omega_min, omega_max]`. Rows run in parallel; output order follows `omega`.
/// Failed rows are flagged, never dropped.
pub fn alpha_curve_sweep(
    omega_min: f64,
    omega_max: f64,
    n_points: usize,
    beta: f64,
    cfg: &QuadratureConfig,
) -> Result<AlphaCurve> {
    check_omega(omega_min)?;
    check_omega(omega_max)?;
    if omega_min > omega_max || n_points == 0 {
        return Err(Error::InvalidConfig(format!(
            "empty sweep [{omega_min}, {omega_max}] with {n_points} points"
        )));
    }
    cfg.validate()?;
    let omegas: Vec<f64> = if n_points == 1 {
        vec![omega_min]
    } else {
        let h = (omega_max - omega_min) / (n_points - 1) as f64;
        (0..n_points).map(|k| omega_min + k as f64 * h).collect()
    };
    let rows: Vec<SweepRow> = omegas.par_iter().map(|&w| sweep_row(w, beta, cfg)).collect();

    let denominator_brackets = rows
        .windows(2)
        .filter(|w| w[0].denominator.is_finite() && w[1].denominator.is_finite())
        .filter(|w| w[0].denominator.signum() != w[1].denominator.signum())
        .map(|w| (w[0].omega, w[1].omega))
        .collect();

    Ok(AlphaCurve {
        warnings: smoothness_warnings(&rows),
        rows,
        denominator_brackets,
        quadrature: *cfg,
    })
}

fn smoothness_warnings(rows: &[SweepRow]) -> Vec<String> {
    let slopes: Vec<f64> = rows
        .windows(2)
        .filter(|w| w[0].status == RowStatus::Ok && w[1].status == RowStatus::Ok)
        .map(|w| ((w[1].alpha - w[0].alpha) / (w[1].omega - w[0].omega)).abs())
        .collect();
    if slopes.len() < 2 {
        return Vec::new();
    }
    let mut sorted = slopes.clone();
    sorted.sort_by(f64::total_cmp);
    let typical = sorted[sorted.len() / 2];
    rows.windows(2)
        .filter(|w| w[0].status == RowStatus::Ok && w[1].status == RowStatus::Ok)
        .filter_map(|w| {
            let jump = (w[1].alpha - w[0].alpha).abs();
            let bound = 10.0 * typical * (w[1].omega - w[0].omega);
            (jump > bound).then(|| {
                format!(
                    "alpha jumps by {jump:.3e} between omega = {} and {} (bound {bound:.3e})",
                    w[0].omega, w[1].omega
                )
            })
        })
        .collect()
}
