//! Gauss–Legendre rules and the quadrature configuration used by the Melnikov
//! integrals.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::check_grid_size;

/// Nodes per composite panel.
pub const PANEL_ORDER: usize = 16;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, by Newton iteration on the
/// three-term recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for k in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * k + 1) as f64 * z * p1 - k as f64 * p2) / (k + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Composite rule on `[a, b]` with `panels` equal panels of `order` nodes each.
pub fn composite_gauss_legendre(a: f64, b: f64, panels: usize, order: usize) -> (Vec<f64>, Vec<f64>) {
    let (z, w) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut nodes = Vec::with_capacity(panels * order);
    let mut weights = Vec::with_capacity(panels * order);
    for k in 0..panels {
        let mid = a + (k as f64 + 0.5) * h;
        for (zi, wi) in z.iter().zip(&w) {
            nodes.push(mid + 0.5 * h * zi);
            weights.push(0.5 * h * wi);
        }
    }
    (nodes, weights)
}

/// Resolution of the `(tau, x)` integrals.
///
/// `x` uses the trapezoid rule on `n_x` points; `tau` uses a composite
/// 16-point Gauss–Legendre rule on `[-tau_cut, tau_cut]` with `n_tau` nodes in total.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureConfig {
    pub n_x: usize,
    pub tau_cut: f64,
    pub n_tau: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            n_x: 256,
            tau_cut: 14.0,
            n_tau: 512,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(self) -> Result<Self> {
        check_grid_size(self.n_x)?;
        if self.n_x < 64 {
            return Err(Error::InvalidConfig(format!("n_x = {} is below 64", self.n_x)));
        }
        if !(self.tau_cut >= 14.0 && self.tau_cut.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "tau_cut = {} must be at least 14",
                self.tau_cut
            )));
        }
        if self.n_tau == 0 || !self.n_tau.is_multiple_of(PANEL_ORDER) {
            return Err(Error::InvalidConfig(format!(
                "n_tau = {} must be a positive multiple of {PANEL_ORDER}",
                self.n_tau
            )));
        }
        Ok(self)
    }

    pub fn doubled(self) -> Self {
        Self {
            n_x: self.n_x * 2,
            n_tau: self.n_tau * 2,
            ..self
        }
    }

    /// Composite rule for the `tau` window.
    pub fn tau_rule(&self) -> (Vec<f64>, Vec<f64>) {
        composite_gauss_legendre(-self.tau_cut, self.tau_cut, self.n_tau / PANEL_ORDER, PANEL_ORDER)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        for n in [2, 5, 16, 31] {
            let (z, w) = gauss_legendre(n);
            for deg in 0..2 * n {
                let got: f64 = z.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let want = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((got - want).abs() < 1e-13, "n={n} deg={deg}");
            }
        }
    }

    #[test]
    fn composite_integrates_sech_squared() {
        let (x, w) = composite_gauss_legendre(-14.0, 14.0, 32, 16);
        let got: f64 = x.iter().zip(&w).map(|(x, w)| w / x.cosh().powi(2)).sum();
        assert!((got - 2.0 * 14f64.tanh()).abs() < 1e-13);
    }

    #[test]
    fn config_validation() {
        assert!(QuadratureConfig::default().validate().is_ok());
        let bad = [
            QuadratureConfig {
                n_x: 32,
                ..Default::default()
            },
            QuadratureConfig {
                n_x: 100,
                ..Default::default()
            },
            QuadratureConfig {
                tau_cut: 5.0,
                ..Default::default()
            },
            QuadratureConfig {
                n_tau: 100,
                ..Default::default()
            },
        ];
        for cfg in bad {
            assert!(cfg.validate().is_err(), "{cfg:?}");
        }
    }
}
