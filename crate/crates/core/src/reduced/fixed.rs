use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

use nalgebra::{Matrix4, Schur, Vector4};
use num_complex::Complex64;
use serde::Serialize;

use super::system::{jacobian_polar, rhs_polar, ReducedState, RescaledState, MIN_ACTION};
use crate::error::{Error, Result};
use crate::params::{normalize_angle, validate_system, SystemParams};

type C64 = Complex64;

/// Fixed points of the polar system and fixed lines of the leading-order system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FixedPointKind {
    /// Focus near the origin.
    OEps,
    /// Focus near `I = omega^2/2`, `beta sin theta < 0`.
    PEps,
    /// Saddle near `I = omega^2/2`, `beta sin theta > 0`.
    QEps,
    /// Line with `theta1 = theta2`, `beta sin theta > 0` (real `mu1,2`).
    LineU,
    /// Line with `theta1 = theta2`, `beta sin theta < 0` (imaginary `mu1,2`).
    LineC,
    /// Lines with `theta1 = -theta2` (`mu1,2 = 0`).
    LineZero,
}

impl FixedPointKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FixedPointKind::OEps => "O_eps",
            FixedPointKind::PEps => "P_eps",
            FixedPointKind::QEps => "Q_eps",
            FixedPointKind::LineU => "l_u",
            FixedPointKind::LineC => "l_c",
            FixedPointKind::LineZero => "l_0",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FixedPointRecord {
    pub state: ReducedState,
    pub kind: FixedPointKind,
    /// Eigenvalues of the finite-difference Jacobian, sorted by real part.
    pub eigenvalues: [C64; 4],
    /// Max-norm of the right-hand side at `state`.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedPointSearch {
    pub points: Vec<FixedPointRecord>,
    pub seeds: usize,
    /// Seeds whose Newton iteration did not converge.
    pub failed: usize,
}

impl FixedPointSearch {
    pub fn get(&self, kind: FixedPointKind) -> Option<&FixedPointRecord> {
        self.points.iter().find(|p| p.kind == kind)
    }
}

fn q0_p0_angles(params: &SystemParams) -> (f64, f64) {
    let SystemParams { omega, alpha, beta, .. } = *params;
    let r = (params.saddle_discriminant() / (alpha * omega)).atan();
    if beta > 0.0 {
        (PI - r, -PI + r)
    } else {
        (-r, r)
    }
}

/// Newton seeds: angles near the `Q0`, `P0` guesses and `+-pi/2`, actions near
/// `omega^2/2` and near the origin, combined independently per component.
pub fn default_seed_grid(params: &SystemParams) -> Vec<ReducedState> {
    let SystemParams {
        omega, beta, epsilon, ..
    } = *params;
    let (q0, p0) = q0_p0_angles(params);
    let thetas = [q0 - 0.2, q0, q0 + 0.2, p0 - 0.2, p0, p0 + 0.2, FRAC_PI_2, -FRAC_PI_2];
    let half = 0.5 * omega * omega;
    let small = (epsilon * beta / (omega * omega)).powi(2);
    let actions = [half * 0.9, half * 1.1, small * 0.5, small * 2.0];
    let mut pairs = Vec::new();
    for &t in &thetas {
        for &i in &actions {
            pairs.push((i, t));
        }
    }
    let mut seeds = Vec::with_capacity(pairs.len() * pairs.len());
    for &(i1, t1) in &pairs {
        for &(i2, t2) in &pairs {
            seeds.push(ReducedState::new(i1, t1, i2, t2));
        }
    }
    seeds
}

fn max_abs(v: &[f64; 4]) -> f64 {
    v.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

/// Damped Newton iteration on the polar right-hand side.
fn newton(seed: ReducedState, params: &SystemParams) -> Result<ReducedState> {
    let mut x = seed;
    let mut f = rhs_polar(&x, params)?;
    for _ in 0..200 {
        let jac = jacobian_polar(&x, params)?;
        let rhs = Vector4::from_column_slice(&f);
        let step = jac.lu().solve(&rhs).ok_or(Error::NoConvergence(max_abs(&f)))?;
        let mut lambda = 1.0;
        loop {
            let trial = ReducedState::from_array([
                x.i1 - lambda * step[0],
                x.theta1 - lambda * step[1],
                x.i2 - lambda * step[2],
                x.theta2 - lambda * step[3],
            ]);
            if trial.i1 > MIN_ACTION && trial.i2 > MIN_ACTION {
                if let Ok(ft) = rhs_polar(&trial, params) {
                    if max_abs(&ft) < max_abs(&f) || lambda < 1e-3 {
                        x = trial;
                        f = ft;
                        break;
                    }
                }
            }
            lambda *= 0.5;
            if lambda < 1e-10 {
                return Err(Error::NoConvergence(max_abs(&f)));
            }
        }
        let size = step
            .iter()
            .zip(x.to_array())
            .map(|(s, v)| (lambda * s).abs() / v.abs().max(1e-300));
        let rel_step = size.fold(0.0, f64::max);
        if max_abs(&f) < 1e-14 || rel_step < 1e-15 {
            if max_abs(&f) < 1e-12 {
                return Ok(x);
            }
            break;
        }
    }
    Err(Error::NoConvergence(max_abs(&f)))
}

fn classify(s: &ReducedState, params: &SystemParams) -> FixedPointKind {
    let upper = s.i1 > 0.25 * params.omega * params.omega;
    let saddle_side = params.beta * s.theta1.sin() > 0.0;
    match (upper, saddle_side) {
        (false, _) => FixedPointKind::OEps,
        (true, true) => FixedPointKind::QEps,
        (true, false) => FixedPointKind::PEps,
    }
}

/// Eigenvalues through a real Schur decomposition with a bounded iteration count.
/// A stalled iteration is retried on `m + s I`, which shifts the spectrum by `s`.
pub(crate) fn eigenvalues4(m: Matrix4<f64>) -> Result<[C64; 4]> {
    let scale = 1.0 + m.abs().max();
    for shift in [0.0, 0.37 * scale, -0.61 * scale] {
        let shifted = m + Matrix4::identity() * shift;
        if let Some(schur) = Schur::try_new(shifted, f64::EPSILON, 10_000) {
            let ev = schur.complex_eigenvalues().iter().map(|z| z - shift).collect();
            return Ok(sort_eigenvalues(ev));
        }
    }
    Err(Error::NoConvergence(f64::NAN))
}

fn sort_eigenvalues(mut ev: Vec<C64>) -> [C64; 4] {
    ev.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    [ev[0], ev[1], ev[2], ev[3]]
}

/// Eigenvalues of the central-difference Jacobian of [`rhs_polar`] at `state`.
pub fn fixed_point_eigenvalues(state: &ReducedState, params: &SystemParams) -> Result<[C64; 4]> {
    let x = state.to_array();
    let mut jac = Matrix4::<f64>::zeros();
    for k in 0..4 {
        let h = if k % 2 == 0 { 1e-5 * x[k].abs() } else { 1e-6 };
        let (mut xp, mut xm) = (x, x);
        xp[k] += h;
        xm[k] -= h;
        let fp = rhs_polar(&ReducedState::from_array(xp), params)?;
        let fm = rhs_polar(&ReducedState::from_array(xm), params)?;
        for r in 0..4 {
            jac[(r, k)] = (fp[r] - fm[r]) / (2.0 * h);
        }
    }
    eigenvalues4(jac)
}

/// Closed-form eigenvalues at a fixed point, as displayed for each kind.
pub fn closed_form_eigenvalues(kind: FixedPointKind, state: &ReducedState, params: &SystemParams) -> [C64; 4] {
    let SystemParams {
        alpha, beta, epsilon, ..
    } = *params;
    let r = state.i1.sqrt();
    let bs = beta * state.theta1.sin();
    let damp = C64::from(-epsilon * alpha);
    let rot = C64::new(0.0, epsilon * bs / r);
    let radial = match kind {
        FixedPointKind::OEps => C64::i() * C64::from((epsilon * bs / r).powi(2) - 2.0 * epsilon * bs * r).sqrt(),
        FixedPointKind::PEps => {
            C64::i() * epsilon.sqrt() * C64::from(-2.0 * bs * r + epsilon * (bs / r).powi(2)).sqrt()
        }
        _ => epsilon.sqrt() * C64::from(2.0 * bs * r - epsilon * (bs / r).powi(2)).sqrt(),
    };
    sort_eigenvalues(vec![damp + radial, damp - radial, damp + rot, damp - rot])
}

/// Leading-order action of each fixed point.
pub fn expected_action(kind: FixedPointKind, params: &SystemParams) -> Option<f64> {
    let SystemParams {
        omega, beta, epsilon, ..
    } = *params;
    let d = params.saddle_discriminant();
    match kind {
        FixedPointKind::OEps => Some(4.0 * (epsilon * beta).powi(2) / omega.powi(4)),
        FixedPointKind::PEps => Some(0.5 * omega * omega + epsilon * d / omega),
        FixedPointKind::QEps => Some(0.5 * omega * omega - epsilon * d / omega),
        _ => None,
    }
}

/// Newton search from `seeds`, deduplicated and classified.
pub fn find_fixed_points(params: &SystemParams, seeds: &[ReducedState]) -> Result<FixedPointSearch> {
    let params = validate_system(*params)?;
    if params.epsilon <= 0.0 {
        return Err(Error::InvalidConfig("fixed-point search needs epsilon > 0".into()));
    }
    let mut points: Vec<FixedPointRecord> = Vec::new();
    let mut failed = 0;
    for &seed in seeds {
        let Ok(root) = newton(seed, &params) else {
            failed += 1;
            continue;
        };
        let root = ReducedState::new(
            root.i1,
            normalize_angle(root.theta1),
            root.i2,
            normalize_angle(root.theta2),
        );
        let duplicate = points.iter().any(|p| {
            let d = [
                (p.state.i1 - root.i1) / root.i1,
                normalize_angle(p.state.theta1 - root.theta1),
                (p.state.i2 - root.i2) / root.i2,
                normalize_angle(p.state.theta2 - root.theta2),
            ];
            max_abs(&d) < 1e-8
        });
        if duplicate {
            continue;
        }
        let residual = max_abs(&rhs_polar(&root, &params)?);
        points.push(FixedPointRecord {
            state: root,
            kind: classify(&root, &params),
            eigenvalues: fixed_point_eigenvalues(&root, &params)?,
            residual,
        });
    }
    points.sort_by(|a, b| a.state.i1.total_cmp(&b.state.i1));
    Ok(FixedPointSearch {
        points,
        seeds: seeds.len(),
        failed,
    })
}

/// One of the four lines `j1 = -j2`, `theta1, theta2 = +-arccos(-alpha omega / (sqrt 2 beta))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FixedLine {
    pub kind: FixedPointKind,
    pub theta1: f64,
    pub theta2: f64,
    /// `mu1,2 = +-sqrt(beta omega (sin theta1 + sin theta2) / sqrt 2)`, `mu3,4 = 0`.
    pub eigenvalues: [C64; 4],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedLines {
    pub lines: Vec<FixedLine>,
    /// Point of `l_u` with `j1 = j2 = 0`.
    pub q0: RescaledState,
    /// Point of `l_c` with `j1 = j2 = 0`.
    pub p0: RescaledState,
}

impl FixedLines {
    pub fn get(&self, kind: FixedPointKind) -> Option<&FixedLine> {
        self.lines.iter().find(|l| l.kind == kind)
    }
}

pub fn fixed_lines(params: &SystemParams) -> Result<FixedLines> {
    let SystemParams { omega, alpha, beta, .. } = *params;
    let lhs = alpha * omega;
    let rhs = SQRT_2 * beta.abs();
    if !(lhs < rhs) {
        return Err(Error::NoSaddle { lhs, rhs });
    }
    let star = (-alpha * omega / (SQRT_2 * beta)).acos();
    let mu = |t1: f64, t2: f64| {
        let m = C64::from(beta * omega * (t1.sin() + t2.sin()) / SQRT_2).sqrt();
        [m, -m, C64::from(0.0), C64::from(0.0)]
    };
    let mut lines = Vec::with_capacity(4);
    for (t1, t2) in [(star, star), (-star, -star), (star, -star), (-star, star)] {
        let kind = if t1 != t2 {
            FixedPointKind::LineZero
        } else if beta * t1.sin() > 0.0 {
            FixedPointKind::LineU
        } else {
            FixedPointKind::LineC
        };
        lines.push(FixedLine {
            kind,
            theta1: t1,
            theta2: t2,
            eigenvalues: mu(t1, t2),
        });
    }
    let (q, p) = q0_p0_angles(params);
    Ok(FixedLines {
        lines,
        q0: RescaledState::new(0.0, q, 0.0, q),
        p0: RescaledState::new(0.0, p, 0.0, p),
    })
}
