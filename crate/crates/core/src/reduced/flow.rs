use serde::{Deserialize, Serialize};

use super::system::{rhs_leading, rhs_polar, rhs_rescaled, ReducedState, RescaledState};
use crate::error::{Error, Result};
use crate::params::SystemParams;

/// Which vector field to integrate. `Polar` states are `(I1, theta1, I2, theta2)`
/// in time `t`; the others are `(j1, theta1, j2, theta2)` in `tau = sqrt(eps) t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FlowKind {
    Polar,
    Rescaled,
    Leading,
}

impl FlowKind {
    pub fn eval(self, y: &[f64; 4], params: &SystemParams) -> Result<[f64; 4]> {
        match self {
            FlowKind::Polar => rhs_polar(&ReducedState::from_array(*y), params),
            FlowKind::Rescaled => rhs_rescaled(&RescaledState::from_array(*y), params),
            FlowKind::Leading => Ok(rhs_leading(&RescaledState::from_array(*y), params)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
}

impl Tolerance {
    pub fn new(rtol: f64, atol: f64) -> Self {
        Self { rtol, atol }
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self::new(1e-10, 1e-12)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<[f64; 4]>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

fn combine(y: &[f64; 4], h: f64, k: &[[f64; 4]; 7], coef: &[f64], upto: usize) -> [f64; 4] {
    let mut out = *y;
    for (s, c) in coef.iter().enumerate().take(upto) {
        if *c != 0.0 {
            for i in 0..4 {
                out[i] += h * c * k[s][i];
            }
        }
    }
    out
}

/// Adaptive Dormand–Prince 5(4) integration with fourth-order dense output.
///
/// With an empty `outputs` every accepted step is recorded; otherwise the
/// solution is interpolated at each requested time inside the span.
pub fn integrate_flow(
    kind: FlowKind,
    params: &SystemParams,
    y0: [f64; 4],
    t_span: (f64, f64),
    tol: Tolerance,
    outputs: &[f64],
) -> Result<Trajectory> {
    let (t0, t1) = t_span;
    if !(t1 > t0) {
        return Err(Error::InvalidConfig(format!("empty time span [{t0}, {t1}]")));
    }
    let f = |y: &[f64; 4]| kind.eval(y, params);
    let dense = !outputs.is_empty();
    let mut traj = Trajectory {
        times: Vec::new(),
        states: Vec::new(),
        accepted_steps: 0,
        rejected_steps: 0,
    };
    let mut next_out = 0;
    let mut emit_until = |traj: &mut Trajectory, t: f64, h: f64, interp: &dyn Fn(f64) -> [f64; 4]| {
        while next_out < outputs.len() && outputs[next_out] <= t {
            let s = outputs[next_out];
            if s >= t0 {
                traj.times.push(s);
                traj.states.push(interp(if h > 0.0 { (s - (t - h)) / h } else { 1.0 }));
            }
            next_out += 1;
        }
    };

    let mut t = t0;
    let mut y = y0;
    let mut k = [[0.0; 4]; 7];
    k[0] = f(&y)?;
    if dense {
        emit_until(&mut traj, t, 0.0, &|_| y0);
    } else {
        traj.times.push(t);
        traj.states.push(y);
    }
    let scale0 = y.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1.0);
    let fnorm = k[0].iter().map(|v| v.abs()).fold(0.0, f64::max);
    let mut h = if fnorm > 0.0 {
        (0.01 * scale0 / fnorm).min(t1 - t0)
    } else {
        (t1 - t0) * 1e-3
    };
    while t < t1 {
        let last = t + h >= t1;
        if last {
            h = t1 - t;
        }
        let h_min = 1e-14 * t.abs().max(1.0);
        if h < h_min {
            return Err(Error::StepFailure(t));
        }
        let mut stage_err = None;
        for s in 1..7 {
            let ys = combine(&y, h, &k, &A[s], s);
            match f(&ys) {
                Ok(v) => k[s] = v,
                Err(e) => {
                    stage_err = Some(e);
                    break;
                }
            }
        }
        if stage_err.is_some() {
            // leave the domain of the vector field: retry with a smaller step
            traj.rejected_steps += 1;
            h *= 0.25;
            continue;
        }
        let y_new = combine(&y, h, &k, &A[6], 6);
        let err_vec = combine(&[0.0; 4], h, &k, &E, 7);
        let err = ((0..4)
            .map(|i| {
                let sc = tol.atol + tol.rtol * y[i].abs().max(y_new[i].abs());
                (err_vec[i] / sc).powi(2)
            })
            .sum::<f64>()
            / 4.0)
            .sqrt();
        if !err.is_finite() {
            traj.rejected_steps += 1;
            h *= 0.25;
            continue;
        }
        if err <= 1.0 {
            let t_new = if last { t1 } else { t + h };
            if dense {
                let rc2: Vec<f64> = (0..4).map(|i| y_new[i] - y[i]).collect();
                let rc3: Vec<f64> = (0..4).map(|i| h * k[0][i] - rc2[i]).collect();
                let rc4: Vec<f64> = (0..4).map(|i| rc2[i] - h * k[6][i] - rc3[i]).collect();
                let rc5: Vec<f64> = (0..4)
                    .map(|i| h * (0..7).map(|s| D[s] * k[s][i]).sum::<f64>())
                    .collect();
                let y_old = y;
                let interp = move |th: f64| {
                    let th1 = 1.0 - th;
                    let mut out = [0.0; 4];
                    for i in 0..4 {
                        out[i] = y_old[i] + th * (rc2[i] + th1 * (rc3[i] + th * (rc4[i] + th1 * rc5[i])));
                    }
                    out
                };
                emit_until(&mut traj, t_new, h, &interp);
            } else {
                traj.times.push(t_new);
                traj.states.push(y_new);
            }
            t = t_new;
            y = y_new;
            k[0] = k[6];
            traj.accepted_steps += 1;
        } else {
            traj.rejected_steps += 1;
        }
        let factor = if err == 0.0 { 5.0 } else { 0.9 * err.powf(-0.2) };
        h *= factor.clamp(0.2, 5.0);
    }
    Ok(traj)
}

/// Classical fourth-order Runge–Kutta with a fixed step; returns the states at
/// every step including the initial one.
pub fn rk4_fixed(
    kind: FlowKind,
    params: &SystemParams,
    y0: [f64; 4],
    t0: f64,
    dt: f64,
    steps: usize,
) -> Result<Trajectory> {
    let f = |y: &[f64; 4]| kind.eval(y, params);
    let add = |y: &[f64; 4], h: f64, k: &[f64; 4]| -> [f64; 4] { std::array::from_fn(|i| y[i] + h * k[i]) };
    let mut traj = Trajectory {
        times: Vec::with_capacity(steps + 1),
        states: Vec::with_capacity(steps + 1),
        accepted_steps: steps,
        rejected_steps: 0,
    };
    let mut y = y0;
    traj.times.push(t0);
    traj.states.push(y);
    for n in 0..steps {
        let k1 = f(&y)?;
        let k2 = f(&add(&y, 0.5 * dt, &k1))?;
        let k3 = f(&add(&y, 0.5 * dt, &k2))?;
        let k4 = f(&add(&y, dt, &k3))?;
        y = std::array::from_fn(|i| y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
        traj.times.push(t0 + (n + 1) as f64 * dt);
        traj.states.push(y);
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reduced::{constant_k, fixed_lines, hamiltonian_reduced, FixedPointKind};
    use std::f64::consts::SQRT_2;

    fn params() -> SystemParams {
        SystemParams::new(1.5, 0.5, 1.5, 0.0)
    }

    #[test]
    fn dense_output_is_accurate() {
        // theta' = j-mean is linear in time when cos theta is frozen near l_c
        let p = params();
        let y0 = [0.3, 0.2, -0.1, 0.2];
        let outs: Vec<f64> = (0..=40).map(|k| 0.25 * k as f64).collect();
        let dense = integrate_flow(
            FlowKind::Leading,
            &p,
            y0,
            (0.0, 10.0),
            Tolerance::new(1e-12, 1e-14),
            &outs,
        )
        .unwrap();
        let fine = rk4_fixed(FlowKind::Leading, &p, y0, 0.0, 1e-3, 10_000).unwrap();
        assert_eq!(dense.times.len(), outs.len());
        for (t, s) in dense.times.iter().zip(&dense.states) {
            let idx = (t / 1e-3).round() as usize;
            for (a, b) in s.iter().zip(&fine.states[idx]) {
                assert!((a - b).abs() < 1e-9, "t={t}");
            }
        }
    }

    #[test]
    fn zero_field_gives_constant_trajectory() {
        let p = params();
        let y0 = [1.0, 0.3, 1.25, -2.0];
        let tr = integrate_flow(FlowKind::Polar, &p, y0, (0.0, 5.0), Tolerance::default(), &[]).unwrap();
        assert!(tr.states.iter().all(|s| *s == y0));
    }

    #[test]
    fn rk4_is_fourth_order() {
        let p = params();
        let y0 = [0.4, 1.0, 0.0, 1.2];
        let reference = rk4_fixed(FlowKind::Leading, &p, y0, 0.0, 1e-4, 20_000).unwrap();
        let end = reference.states.last().unwrap();
        let err = |n: usize| {
            let tr = rk4_fixed(FlowKind::Leading, &p, y0, 0.0, 2.0 / n as f64, n).unwrap();
            let s = tr.states.last().unwrap();
            s.iter().zip(end).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
        };
        let ratio = err(50) / err(100);
        assert!((ratio - 16.0).abs() < 2.0, "ratio {ratio}");
    }

    #[test]
    fn leading_flow_conserves_h_and_k() {
        let p = params();
        let lines = fixed_lines(&p).unwrap();
        let th = lines.p0.theta1;
        let y0 = [0.2, th + 0.3, 0.1, th + 0.1];
        let tr = rk4_fixed(FlowKind::Leading, &p, y0, 0.0, 1e-3, 50_000).unwrap();
        let h = |s: &[f64; 4]| hamiltonian_reduced(&RescaledState::from_array(*s), &p);
        let k = |s: &[f64; 4]| constant_k(&RescaledState::from_array(*s));
        let (h0, k0) = (h(&y0), k(&y0));
        for s in &tr.states {
            assert!((h(s) - h0).abs() < 1e-8);
            assert!((k(s) - k0).abs() < 1e-12);
        }
    }

    #[test]
    fn perturbation_breaks_k() {
        let p = SystemParams::new(1.5, 0.5, 1.5, 1e-2);
        let y0 = [0.2, 0.5, -0.3, 0.1];
        let tr = integrate_flow(FlowKind::Rescaled, &p, y0, (0.0, 5.0), Tolerance::default(), &[]).unwrap();
        let last = RescaledState::from_array(*tr.states.last().unwrap());
        assert!((constant_k(&last) - 0.4).abs() > 1e-6);
    }

    #[test]
    fn separatrix_returns_to_the_saddle_line() {
        let p = params();
        let lines = fixed_lines(&p).unwrap();
        let lu = lines.get(FixedPointKind::LineU).unwrap();
        let mu = (SQRT_2 * p.beta * p.omega * lu.theta1.sin()).sqrt();
        let nudge = 1e-7;
        let y0 = [nudge * mu, lu.theta1 + nudge, nudge * mu, lu.theta2 + nudge];
        let h0 = hamiltonian_reduced(&RescaledState::from_array(y0), &p);
        let tr = integrate_flow(
            FlowKind::Leading,
            &p,
            y0,
            (0.0, 60.0),
            Tolerance::new(1e-13, 1e-15),
            &[],
        )
        .unwrap();
        let mut far = false;
        let mut closest_after = f64::INFINITY;
        for s in &tr.states {
            let h = hamiltonian_reduced(&RescaledState::from_array(*s), &p);
            assert!((h - h0).abs() < 1e-8);
            let d = (s[1] - lu.theta1).abs() + (s[0] + s[2]).abs();
            if d > 1.0 {
                far = true;
            } else if far {
                closest_after = closest_after.min(d);
            }
        }
        assert!(far);
        assert!(closest_after < 1e-3, "closest return {closest_after}");
    }

    #[test]
    fn vanishing_action_is_an_error() {
        let p = SystemParams::new(1.5, 0.5, 1.5, 0.5);
        let r = integrate_flow(
            FlowKind::Polar,
            &p,
            [1e-16, 3.0, 1.0, 3.0],
            (0.0, 1.0),
            Tolerance::default(),
            &[],
        );
        assert!(matches!(r, Err(Error::VanishingAction(_))));
    }
}
