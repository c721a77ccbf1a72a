use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use super::system::restricted_hamiltonian;
use crate::error::{Error, Result};
use crate::params::SystemParams;

/// Sampling window in `theta = theta1 - delta/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparatrixGrid {
    pub theta_min: f64,
    pub theta_max: f64,
    pub n: usize,
}

impl SeparatrixGrid {
    /// A window of width `4 pi` centred on the saddle.
    pub fn around(theta: f64, n: usize) -> Self {
        Self {
            theta_min: theta - 2.0 * std::f64::consts::PI,
            theta_max: theta + 2.0 * std::f64::consts::PI,
            n,
        }
    }
}

/// The singular level set `{H_delta(j, theta) = H_delta(0, theta_s)}` on `Pi_delta`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Separatrix {
    pub delta: f64,
    /// Saddle angle (the `l_u` value for `delta = 0`).
    pub theta_saddle: f64,
    pub level: f64,
    /// Polylines of `(theta, j)`, split at the saddle; the upper and lower
    /// halves of each `theta`-interval are separate branches.
    pub branches: Vec<Vec<(f64, f64)>>,
}

/// Traces the level set through the saddle of the restricted Hamiltonian
/// `j^2/4 + V(theta)`. Because `H` is quadratic in `j` the contour is explicit:
/// `j = +-2 sqrt(L - V(theta))` wherever `V <= L`.
pub fn separatrix_levelset(params: &SystemParams, delta: f64, grid: Option<SeparatrixGrid>) -> Result<Separatrix> {
    let SystemParams { omega, alpha, beta, .. } = *params;
    let coupling = beta * (0.5 * delta).cos();
    let lhs = alpha * omega;
    let rhs = SQRT_2 * coupling.abs();
    if !(lhs < rhs) {
        return Err(Error::NoSaddle { lhs, rhs });
    }
    // V'(theta) = 0 with V'' < 0, i.e. coupling * sin(theta) > 0
    let star = (-alpha * omega / (SQRT_2 * coupling)).acos();
    let theta_saddle = if coupling > 0.0 { star } else { -star };
    let level = restricted_hamiltonian(0.0, theta_saddle, delta, params);
    let grid = grid.unwrap_or_else(|| SeparatrixGrid::around(theta_saddle, 4001));
    if grid.n < 2 || !(grid.theta_max > grid.theta_min) {
        return Err(Error::InvalidConfig(
            "separatrix grid needs n >= 2 and a positive width".into(),
        ));
    }

    let mut thetas: Vec<f64> = (0..grid.n)
        .map(|k| grid.theta_min + (grid.theta_max - grid.theta_min) * k as f64 / (grid.n - 1) as f64)
        .collect();
    if theta_saddle > grid.theta_min && theta_saddle < grid.theta_max {
        thetas.push(theta_saddle);
        thetas.sort_by(f64::total_cmp);
        thetas.dedup();
    }

    let mut branches = Vec::new();
    let mut upper: Vec<(f64, f64)> = Vec::new();
    let mut lower: Vec<(f64, f64)> = Vec::new();
    let mut flush = |upper: &mut Vec<(f64, f64)>, lower: &mut Vec<(f64, f64)>| {
        if !upper.is_empty() {
            branches.push(std::mem::take(upper));
            branches.push(std::mem::take(lower));
        }
    };
    let gap_at = |th: f64| level - restricted_hamiltonian(0.0, th, delta, params);
    // closes a branch exactly on the turning point between `a` (inside) and `b` (outside)
    let turning = |mut a: f64, mut b: f64| {
        for _ in 0..60 {
            let m = 0.5 * (a + b);
            if gap_at(m) >= 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
        a
    };
    let mut prev: Option<(f64, bool)> = None;
    for &th in &thetas {
        let gap = if th == theta_saddle { 0.0 } else { gap_at(th) };
        let inside = gap >= 0.0;
        if let Some((pt, was_inside)) = prev {
            if inside && !was_inside {
                let t = turning(th, pt);
                upper.push((t, 0.0));
                lower.push((t, -0.0));
            } else if !inside && was_inside {
                let t = turning(pt, th);
                upper.push((t, 0.0));
                lower.push((t, -0.0));
            }
        }
        prev = Some((th, inside));
        if inside {
            let j = 2.0 * gap.sqrt();
            upper.push((th, j));
            lower.push((th, -j));
            if th == theta_saddle {
                // split at the saddle so the loop and the arms are separate branches
                flush(&mut upper, &mut lower);
                upper.push((th, 0.0));
                lower.push((th, -0.0));
            }
        } else {
            flush(&mut upper, &mut lower);
        }
    }
    flush(&mut upper, &mut lower);
    Ok(Separatrix {
        delta,
        theta_saddle,
        level,
        branches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reduced::{fixed_lines, FixedPointKind};

    fn params() -> SystemParams {
        SystemParams::new(1.5, 0.5, 1.5, 0.0)
    }

    #[test]
    fn passes_through_the_saddle_line() {
        let p = params();
        let sep = separatrix_levelset(&p, 0.0, None).unwrap();
        let lu = fixed_lines(&p).unwrap();
        let lu = lu.get(FixedPointKind::LineU).unwrap();
        assert!((sep.theta_saddle - lu.theta1).abs() < 1e-14);
        let hits = sep
            .branches
            .iter()
            .flatten()
            .filter(|(th, j)| (th - lu.theta1).abs() < 1e-12 && j.abs() < 1e-12)
            .count();
        assert!(hits >= 1);
    }

    #[test]
    fn symmetric_in_j_and_on_level() {
        let p = params();
        for delta in [0.0, 0.4] {
            let sep = separatrix_levelset(&p, delta, None).unwrap();
            for pair in sep.branches.chunks(2) {
                for (a, b) in pair[0].iter().zip(&pair[1]) {
                    assert_eq!(a.0, b.0);
                    assert_eq!(a.1, -b.1);
                }
            }
            for &(th, j) in sep.branches.iter().flatten() {
                assert!((restricted_hamiltonian(j, th, delta, &p) - sep.level).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn homoclinic_loop_is_bounded() {
        let p = params();
        let sep = separatrix_levelset(&p, 0.0, None).unwrap();
        let loop_branch = sep
            .branches
            .iter()
            .find(|b| b.first().unwrap().0 == sep.theta_saddle)
            .unwrap();
        assert_eq!(loop_branch.last().unwrap().1, 0.0);
        let first = loop_branch.first().unwrap().0;
        let last = loop_branch.last().unwrap().0;
        assert!(last - first < 2.0 * std::f64::consts::PI);
    }

    #[test]
    fn no_saddle_is_an_error() {
        let p = SystemParams::new(1.5, 2.0, 1.0, 0.0);
        assert!(matches!(
            separatrix_levelset(&p, 0.0, None),
            Err(Error::NoSaddle { .. })
        ));
        // large delta weakens the coupling until the saddle disappears
        let p = params();
        assert!(separatrix_levelset(&p, 3.0, None).is_err());
    }
}
