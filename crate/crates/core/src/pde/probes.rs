use num_complex::Complex64;
use serde::Serialize;

use super::{simulate, SimulationConfig};
use crate::error::{Error, Result};
use crate::field::{ComplexField, SpectralGrid};
use crate::params::SystemParams;
use crate::reduced::{default_seed_grid, find_fixed_points, FixedPointKind};

type C64 = Complex64;

/// Time window `[t_start, t_end]` of samples used by an exponential fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct FitWindow {
    pub t_start: f64,
    pub t_end: f64,
    /// Allowed relative step against the fitted trend.
    pub monotone_tol: f64,
}

impl FitWindow {
    pub fn new(t_start: f64, t_end: f64) -> Self {
        Self {
            t_start,
            t_end,
            monotone_tol: 1e-3,
        }
    }
}

/// Least-squares fit of `ln v = ln a + rate * t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpFit {
    pub rate: f64,
    pub log_amplitude: f64,
    pub max_log_residual: f64,
    pub samples: usize,
}

/// Fits an exponential to the samples inside `window`. Fails on non-positive
/// values, fewer than three samples, or a step against the fitted trend larger
/// than `window.monotone_tol` in relative size.
pub fn fit_exponential(times: &[f64], values: &[f64], window: FitWindow) -> Result<ExpFit> {
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(values)
        .filter(|(t, _)| **t >= window.t_start && **t <= window.t_end)
        .map(|(t, v)| (*t, *v))
        .collect();
    if pts.len() < 3 {
        return Err(Error::FitFailure(format!("{} samples in the fit window", pts.len())));
    }
    if let Some((t, v)) = pts.iter().find(|(_, v)| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::FitFailure(format!("sample {v} at t = {t} is not positive")));
    }
    let n = pts.len() as f64;
    let (st, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (t, v)| (a + t, b + v.ln()));
    let (mt, my) = (st / n, sy / n);
    let (sxx, sxy) = pts.iter().fold((0.0, 0.0), |(a, b), (t, v)| {
        (a + (t - mt).powi(2), b + (t - mt) * (v.ln() - my))
    });
    let rate = sxy / sxx;
    let log_amplitude = my - rate * mt;
    let max_log_residual = pts
        .iter()
        .map(|(t, v)| (v.ln() - log_amplitude - rate * t).abs())
        .fold(0.0, f64::max);
    let against = pts
        .windows(2)
        .map(|w| -rate.signum() * (w[1].1.ln() - w[0].1.ln()))
        .fold(f64::NEG_INFINITY, f64::max);
    if against > window.monotone_tol {
        return Err(Error::FitFailure(format!(
            "signal moves against the fitted rate {rate:.3e} by {against:.3e} in log scale"
        )));
    }
    Ok(ExpFit {
        rate,
        log_amplitude,
        max_log_residual,
        samples: pts.len(),
    })
}

/// Largest `max |p - q|` along a run started on the diagonal.
pub fn sigma_invariance_probe(params: &SystemParams, cfg: &SimulationConfig, ic: &ComplexField) -> Result<f64> {
    if ic.diagonal_defect() != 0.0 {
        return Err(Error::InvalidConfig("initial data must satisfy p = q".into()));
    }
    let rec = simulate(ic, params, cfg)?.into_result()?;
    Ok(rec.diagnostics.iter().map(|d| d.defect).fold(0.0, f64::max))
}

/// Departure from `x`-independence along a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PiProbe {
    /// Largest deviation of a sample from the spatial mean.
    pub max_x_dependence: f64,
    /// Largest fraction of `L2` energy outside the zero mode.
    pub max_nonzero_mode_energy: f64,
}

pub fn pi_invariance_probe(params: &SystemParams, cfg: &SimulationConfig, ic: &ComplexField) -> Result<PiProbe> {
    if ic.x_dependence() > 1e-14 * ic.max_abs().max(1.0) {
        return Err(Error::InvalidConfig("initial data must be x-independent".into()));
    }
    let rec = simulate(ic, params, cfg)?.into_result()?;
    let grid = SpectralGrid::new(cfg.n)?;
    let nonzero = |u: &[C64]| {
        let mut c = u.to_vec();
        grid.forward(&mut c);
        let total: f64 = c.iter().map(|z| z.norm_sqr()).sum();
        if total == 0.0 {
            0.0
        } else {
            (total - c[0].norm_sqr()) / total
        }
    };
    let mut out = PiProbe {
        max_x_dependence: 0.0,
        max_nonzero_mode_energy: 0.0,
    };
    for f in &rec.fields {
        out.max_x_dependence = out.max_x_dependence.max(f.x_dependence());
        out.max_nonzero_mode_energy = out.max_nonzero_mode_energy.max(nonzero(&f.p)).max(nonzero(&f.q));
    }
    Ok(out)
}

/// The `x`-independent saddle `Q_eps` sampled on `n` points. Both components
/// are set to their average, so the state lies exactly on the diagonal.
pub fn q_eps_field(params: &SystemParams, n: usize) -> Result<ComplexField> {
    let search = find_fixed_points(params, &default_seed_grid(params))?;
    let q = search
        .get(FixedPointKind::QEps)
        .ok_or(Error::NoConvergence(f64::NAN))?
        .state;
    let u1 = C64::from_polar(q.i1.sqrt(), q.theta1);
    let u2 = C64::from_polar(q.i2.sqrt(), q.theta2);
    let u = 0.5 * (u1 + u2);
    ComplexField::constant(n, u, u)
}

/// Sampled norm of a perturbation along a probe run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeRun {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

fn perturbed_run(
    params: &SystemParams,
    cfg: &SimulationConfig,
    amplitude: f64,
    sign: f64,
    measure: impl Fn(&ComplexField) -> f64,
) -> Result<ProbeRun> {
    let base = q_eps_field(params, cfg.n)?;
    let mut ic = base.clone();
    for (j, x) in ComplexField::grid(cfg.n).enumerate() {
        let d = amplitude * x.cos();
        ic.p[j] += d;
        ic.q[j] += sign * d;
    }
    let rec = simulate(&ic, params, cfg)?.into_result()?;
    Ok(ProbeRun {
        values: rec.fields.iter().map(measure).collect(),
        times: rec.times,
    })
}

/// `max |p - q|` along the run from `Q_eps + amplitude cos x (1, -1)`.
pub fn transverse_run(params: &SystemParams, cfg: &SimulationConfig, amplitude: f64) -> Result<ProbeRun> {
    perturbed_run(params, cfg, amplitude, -1.0, ComplexField::diagonal_defect)
}

/// Fitted rate of `max |p - q|` from `Q_eps + amplitude cos x (1, -1)`; negative
/// when directions transverse to the diagonal decay.
pub fn transverse_stability_probe(
    params: &SystemParams,
    cfg: &SimulationConfig,
    amplitude: f64,
    window: FitWindow,
) -> Result<ExpFit> {
    let run = transverse_run(params, cfg, amplitude)?;
    fit_exponential(&run.times, &run.values, window)
}

/// Fitted growth rate of the `x`-dependent part from `Q_eps + amplitude cos x (1, 1)`.
pub fn diagonal_growth_probe(
    params: &SystemParams,
    cfg: &SimulationConfig,
    amplitude: f64,
    window: FitWindow,
) -> Result<ExpFit> {
    let run = perturbed_run(params, cfg, amplitude, 1.0, ComplexField::x_dependence)?;
    fit_exponential(&run.times, &run.values, window)
}
