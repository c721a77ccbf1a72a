//! Pseudospectral time integration of the perturbed vector system on the
//! periodic grid, plus probes of its invariant subspaces.

mod probes;
mod stepper;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{check_grid_size, ComplexField, SpectralGrid};
use crate::functionals::{functional_g, hamiltonian, l2_norms};
use crate::params::SystemParams;

pub use probes::{
    diagonal_growth_probe, fit_exponential, pi_invariance_probe, q_eps_field, sigma_invariance_probe, transverse_run,
    transverse_stability_probe, ExpFit, FitWindow, PiProbe, ProbeRun,
};
pub use stepper::Simulator;

type C64 = num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Strang splitting around an exact Fourier-space linear flow.
    #[default]
    Splitting,
    /// Fourth-order exponential time differencing (ETDRK4).
    Etd,
}

impl Scheme {
    /// Upper bound on `dt * n^2`.
    pub fn stability_bound(self) -> f64 {
        match self {
            Scheme::Splitting => 40.0,
            Scheme::Etd => 400.0,
        }
    }
}

/// Switches for the right-hand side, used to build reference problems.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelHooks {
    pub nonlinear: bool,
    pub forcing: bool,
    /// Constant added to `p_t` only; breaks the `p <-> q` symmetry.
    pub asymmetry: f64,
}

impl Default for ModelHooks {
    fn default() -> Self {
        Self {
            nonlinear: true,
            forcing: true,
            asymmetry: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    pub n: usize,
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    pub record_every: usize,
    pub blowup_bound: f64,
    /// Project onto cosine modes after every step.
    pub enforce_even: bool,
    #[serde(skip)]
    pub hooks: ModelHooks,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            n: 128,
            dt: 1e-4,
            t_end: 1.0,
            scheme: Scheme::Splitting,
            record_every: 100,
            blowup_bound: 1e6,
            enforce_even: false,
            hooks: ModelHooks::default(),
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        check_grid_size(self.n)?;
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidConfig(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "t_end must be non-negative, got {}",
                self.t_end
            )));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidConfig("record_every must be at least 1".into()));
        }
        if !(self.blowup_bound > 0.0) {
            return Err(Error::InvalidConfig("blowup_bound must be positive".into()));
        }
        let stiffness = self.dt * (self.n * self.n) as f64;
        let bound = self.scheme.stability_bound();
        if stiffness > bound {
            return Err(Error::InvalidConfig(format!(
                "dt * n^2 = {stiffness} exceeds {bound} for the {:?} scheme",
                self.scheme
            )));
        }
        Ok(())
    }

    /// Number of steps, rounding `t_end / dt` to the nearest integer.
    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }
}

/// Conserved quantities of the unperturbed flow and the diagonal defect.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Diagnostics {
    pub e1: f64,
    pub e2: f64,
    pub g: f64,
    pub h: f64,
    pub defect: f64,
}

impl Diagnostics {
    pub fn of(field: &ComplexField, omega: f64) -> Self {
        let (e1, e2) = l2_norms(field);
        Self {
            e1,
            e2,
            g: functional_g(field),
            h: hamiltonian(field, omega),
            defect: field.diagonal_defect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum RunStatus {
    Completed,
    BlowUp { time: f64, amplitude: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub fields: Vec<ComplexField>,
    pub diagnostics: Vec<Diagnostics>,
    pub status: RunStatus,
}

impl TrajectoryRecord {
    pub fn last_field(&self) -> &ComplexField {
        self.fields.last().expect("a record holds at least the initial state")
    }

    /// Largest relative change of `E1`, `E2` and `G` from their initial values.
    /// `G` vanishes on plane waves on the resonance circle, so its change is
    /// measured against `max(|G|, (E1 + E2)^2 / 8 pi)`, the size of the terms
    /// that cancel there.
    pub fn max_relative_drift(&self) -> [f64; 3] {
        let d0 = self.diagnostics[0];
        let rel = |a: f64, b: f64, scale: f64| (a - b).abs() / scale.max(f64::MIN_POSITIVE);
        let g_scale = d0.g.abs().max((d0.e1 + d0.e2).powi(2) / (8.0 * std::f64::consts::PI));
        let mut out = [0.0f64; 3];
        for d in &self.diagnostics {
            out[0] = out[0].max(rel(d.e1, d0.e1, d0.e1.abs()));
            out[1] = out[1].max(rel(d.e2, d0.e2, d0.e2.abs()));
            out[2] = out[2].max(rel(d.g, d0.g, g_scale));
        }
        out
    }

    /// Turns an aborted run into its error.
    pub fn into_result(self) -> Result<Self> {
        match self.status {
            RunStatus::Completed => Ok(self),
            RunStatus::BlowUp { time, amplitude } => Err(Error::BlowUp { time, amplitude }),
        }
    }
}

/// Time derivative of `(p, q)` under the perturbed system.
pub fn pvnls_rhs(field: &ComplexField, params: &SystemParams) -> Result<ComplexField> {
    let params = params.validate_dynamics()?;
    let grid = SpectralGrid::new(field.len())?;
    Ok(rhs_with(field, &params, &ModelHooks::default(), &grid))
}

pub(crate) fn rhs_with(
    field: &ComplexField,
    params: &SystemParams,
    hooks: &ModelHooks,
    grid: &SpectralGrid,
) -> ComplexField {
    let SystemParams {
        omega,
        alpha,
        beta,
        epsilon,
    } = *params;
    let dxx = grid.derivative_field(field, 2).expect("order 2 is supported");
    let i = C64::i();
    let forcing = if hooks.forcing { epsilon * beta } else { 0.0 };
    let mut out = field.clone();
    for j in 0..field.len() {
        let (p, q) = (field.p[j], field.q[j]);
        let rot = if hooks.nonlinear {
            0.5 * (p.norm_sqr() + q.norm_sqr() - omega * omega)
        } else {
            -0.5 * omega * omega
        };
        out.p[j] = i * (dxx.p[j] + rot * p) + epsilon * (dxx.p[j] - alpha * p) - forcing + hooks.asymmetry;
        out.q[j] = i * (dxx.q[j] + rot * q) + epsilon * (dxx.q[j] - alpha * q) - forcing;
    }
    out
}

/// Advances `field` by one step of `cfg.dt`.
pub fn step(field: &ComplexField, params: &SystemParams, cfg: &SimulationConfig) -> Result<ComplexField> {
    let mut sim = Simulator::new(*params, cfg.clone())?;
    let mut out = field.clone();
    sim.step(&mut out)?;
    Ok(out)
}

/// Integrates to `cfg.t_end`, recording every `cfg.record_every` steps. A
/// blow-up ends the run early with the snapshots gathered so far.
pub fn simulate(field0: &ComplexField, params: &SystemParams, cfg: &SimulationConfig) -> Result<TrajectoryRecord> {
    let mut sim = Simulator::new(*params, cfg.clone())?;
    sim.run(field0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrable::{homoclinic_field, OrbitForm, Sign};
    use crate::params::OrbitParams;
    use std::f64::consts::SQRT_2;

    fn sample(n: usize) -> ComplexField {
        ComplexField::from_fn(n, |x| {
            (
                C64::new(1.0 + 0.2 * x.cos(), 0.1 * (2.0 * x).sin()),
                C64::new(0.7, -0.3 * x.sin()),
            )
        })
        .unwrap()
    }

    #[test]
    fn diagonal_restriction_is_scalar_equation() {
        let p = SystemParams::new(1.5, 0.7, 0.4, 0.03);
        let f = sample(64);
        let diag = ComplexField::new(f.p.clone(), f.p.clone()).unwrap();
        let rhs = pvnls_rhs(&diag, &p).unwrap();
        let dxx = spectral(&f.p);
        for j in 0..64 {
            let u = f.p[j];
            let scalar = C64::i() * (dxx[j] + (u.norm_sqr() - 0.5 * p.omega * p.omega) * u)
                + p.epsilon * (dxx[j] - p.alpha * u - p.beta);
            assert!((rhs.p[j] - scalar).norm() < 1e-12);
            assert_eq!(rhs.p[j], rhs.q[j]);
        }
    }

    fn spectral(u: &[C64]) -> Vec<C64> {
        SpectralGrid::new(u.len()).unwrap().derivative(u, 2).unwrap()
    }

    #[test]
    fn constant_fields_follow_the_reduced_equations() {
        let p = SystemParams::new(1.5, 0.7, 0.4, 0.03);
        let (a, b) = (C64::from_polar(1.1, 0.3), C64::from_polar(0.8, -1.2));
        let rhs = pvnls_rhs(&ComplexField::constant(32, a, b).unwrap(), &p).unwrap();
        let m = a.norm_sqr() + b.norm_sqr();
        for (u, got) in [(a, rhs.p[5]), (b, rhs.q[5])] {
            let want = C64::i() * 0.5 * (m - p.omega * p.omega) * u - p.epsilon * (p.alpha * u + p.beta);
            assert!((got - want).norm() < 1e-14);
        }
    }

    #[test]
    fn resonance_circle_is_an_equilibrium() {
        let p = SystemParams::new(1.5, 0.7, 0.4, 0.0);
        let a = C64::from_polar(1.5 / SQRT_2, 0.9);
        let rhs = pvnls_rhs(&ComplexField::constant(32, a, a * C64::i()).unwrap(), &p).unwrap();
        assert!(rhs.max_abs() < 1e-14);
    }

    #[test]
    fn config_rejects_stiff_steps() {
        let cfg = SimulationConfig {
            n: 256,
            dt: 1e-2,
            ..Default::default()
        };
        assert!(matches!(cfg.validate(), Err(Error::InvalidConfig(_))));
        assert!(SimulationConfig::default().validate().is_ok());
        let bad = SimulationConfig {
            n: 100,
            ..Default::default()
        };
        assert!(matches!(bad.validate(), Err(Error::InvalidGrid(_))));
    }

    #[test]
    fn linear_step_is_exact() {
        let params = SystemParams::new(1.5, 0.7, 0.4, 0.05);
        let hooks = ModelHooks {
            nonlinear: false,
            forcing: false,
            asymmetry: 0.0,
        };
        let f = sample(32);
        let grid = SpectralGrid::new(32).unwrap();
        for scheme in [Scheme::Splitting, Scheme::Etd] {
            let cfg = SimulationConfig {
                n: 32,
                dt: 0.01,
                scheme,
                hooks,
                ..Default::default()
            };
            let got = step(&f, &params, &cfg).unwrap();
            for (u, v) in [(&f.p, &got.p), (&f.q, &got.q)] {
                let want = grid.apply_multiplier(u, |_, k| {
                    let l = -(C64::i() + params.epsilon) * k * k
                        - params.epsilon * params.alpha
                        - C64::i() * 0.5 * params.omega * params.omega;
                    (l * cfg.dt).exp()
                });
                for (a, b) in want.iter().zip(v) {
                    assert!((a - b).norm() < 1e-12, "{scheme:?}");
                }
            }
        }
    }

    fn orbit_field(t: f64, n: usize) -> (OrbitParams, ComplexField) {
        let orbit = OrbitParams::melnikov_point(1.5, 0.4);
        (
            orbit,
            homoclinic_field(t, n, &orbit, 1.5, OrbitForm::Even(Sign::Plus)).unwrap(),
        )
    }

    fn endpoint(cfg: &SimulationConfig, f0: &ComplexField, params: &SystemParams) -> ComplexField {
        simulate(f0, params, cfg).unwrap().last_field().clone()
    }

    fn distance(a: &ComplexField, b: &ComplexField) -> f64 {
        a.axpy(-1.0, b).max_abs()
    }

    #[test]
    fn splitting_is_second_order() {
        let params = SystemParams::new(1.5, 0.0, 0.0, 0.0);
        let (_, f0) = orbit_field(-2.0, 32);
        let run = |dt: f64| {
            let cfg = SimulationConfig {
                n: 32,
                dt,
                t_end: 1.0,
                record_every: 1_000_000,
                ..Default::default()
            };
            endpoint(&cfg, &f0, &params)
        };
        let (a, b, c) = (run(0.02), run(0.01), run(0.005));
        let ratio = distance(&a, &b) / distance(&b, &c);
        assert!((ratio - 4.0).abs() < 0.4, "ratio {ratio}");
    }

    #[test]
    fn etd_is_fourth_order() {
        let params = SystemParams::new(1.5, 0.0, 0.0, 0.0);
        let (_, f0) = orbit_field(-2.0, 32);
        let run = |dt: f64| {
            let cfg = SimulationConfig {
                n: 32,
                dt,
                t_end: 1.0,
                scheme: Scheme::Etd,
                record_every: 1_000_000,
                ..Default::default()
            };
            endpoint(&cfg, &f0, &params)
        };
        let (a, b, c) = (run(0.04), run(0.02), run(0.01));
        let ratio = distance(&a, &b) / distance(&b, &c);
        assert!(ratio > 13.0 && ratio < 19.0, "ratio {ratio}");
    }

    #[test]
    fn shadows_the_analytic_orbit() {
        let params = SystemParams::new(1.5, 0.0, 0.0, 0.0);
        let (orbit, f0) = orbit_field(0.0, 64);
        let cfg = SimulationConfig {
            n: 64,
            dt: 1e-3,
            t_end: 2.0,
            record_every: 500,
            ..Default::default()
        };
        let rec = simulate(&f0, &params, &cfg).unwrap();
        for (t, f) in rec.times.iter().zip(&rec.fields) {
            let exact = homoclinic_field(*t, 64, &orbit, 1.5, OrbitForm::Even(Sign::Plus)).unwrap();
            assert!(distance(f, &exact) < 1e-4, "t = {t}");
        }
    }

    #[test]
    fn record_layout() {
        let params = SystemParams::new(1.5, 1.0, 2.0, 0.01);
        let (_, f0) = orbit_field(0.0, 32);
        let cfg = SimulationConfig {
            n: 32,
            dt: 1e-3,
            t_end: 0.1,
            record_every: 30,
            ..Default::default()
        };
        let rec = simulate(&f0, &params, &cfg).unwrap();
        assert_eq!(rec.times.len(), rec.fields.len());
        assert_eq!(rec.times.len(), rec.diagnostics.len());
        // 0, 30, 60, 90 and the final step 100
        assert_eq!(rec.times.len(), 5);
        assert!(rec.times.windows(2).all(|w| w[1] > w[0]));
        assert!((rec.times[4] - 0.1).abs() < 1e-12);
        assert_eq!(rec.status, RunStatus::Completed);
    }

    #[test]
    fn blow_up_keeps_partial_record() {
        let params = SystemParams::new(1.5, 1.0, 2.0, 0.0);
        let (_, f0) = orbit_field(0.0, 32);
        let cfg = SimulationConfig {
            n: 32,
            dt: 1e-3,
            t_end: 1.0,
            record_every: 10,
            blowup_bound: 1.5,
            ..Default::default()
        };
        let rec = simulate(&f0, &params, &cfg).unwrap();
        assert!(matches!(rec.status, RunStatus::BlowUp { .. }));
        assert!(!rec.times.is_empty());
        assert!(rec.times.last().unwrap() < &1.0);
        assert!(matches!(rec.into_result(), Err(Error::BlowUp { .. })));
        assert!(matches!(step(&f0, &params, &cfg), Err(Error::BlowUp { .. })));
    }

    #[test]
    fn conservation_without_perturbation() {
        let params = SystemParams::new(1.5, 0.0, 0.0, 0.0);
        let (_, f0) = orbit_field(-1.0, 64);
        let cfg = SimulationConfig {
            n: 64,
            dt: 1e-3,
            t_end: 5.0,
            scheme: Scheme::Etd,
            record_every: 250,
            ..Default::default()
        };
        let drift = simulate(&f0, &params, &cfg).unwrap().max_relative_drift();
        assert!(drift.iter().all(|d| *d < 1e-8), "{drift:?}");
    }

    #[test]
    fn even_projection_keeps_cosine_fields() {
        let params = SystemParams::new(1.5, 1.0, 2.0, 0.01);
        let (_, f0) = orbit_field(0.0, 32);
        let cfg = SimulationConfig {
            n: 32,
            dt: 1e-3,
            t_end: 0.2,
            enforce_even: true,
            record_every: 1000,
            ..Default::default()
        };
        let f = endpoint(&cfg, &f0, &params);
        for j in 1..32 {
            assert!((f.p[j] - f.p[32 - j]).norm() < 1e-14);
        }
    }
}
