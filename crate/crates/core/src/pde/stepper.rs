use std::f64::consts::PI;

use num_complex::Complex64;

use super::{Diagnostics, ModelHooks, RunStatus, Scheme, SimulationConfig, TrajectoryRecord};
use crate::error::{Error, Result};
use crate::field::{ComplexField, SpectralGrid};
use crate::params::SystemParams;

type C64 = Complex64;

/// Contour points for the ETDRK4 coefficients.
const CONTOUR_POINTS: usize = 32;

struct EtdCoefficients {
    e: Vec<C64>,
    e2: Vec<C64>,
    q: Vec<C64>,
    f1: Vec<C64>,
    f2: Vec<C64>,
    f3: Vec<C64>,
}

impl EtdCoefficients {
    /// Kassam-Trefethen: phi-functions averaged over a circle around `h L`.
    fn new(lin: &[C64], h: f64) -> Self {
        let roots: Vec<C64> = (0..CONTOUR_POINTS)
            .map(|j| C64::from_polar(1.0, PI * (j as f64 + 0.5) / CONTOUR_POINTS as f64))
            .collect();
        let mean = |l: C64, f: &dyn Fn(C64) -> C64| {
            // conjugate pairs r, conj(r) cover the full circle
            let s: C64 = roots.iter().map(|r| f(l * h + r) + f(l * h + r.conj())).sum();
            s / (2 * CONTOUR_POINTS) as f64
        };
        let mut out = Self {
            e: Vec::with_capacity(lin.len()),
            e2: Vec::with_capacity(lin.len()),
            q: Vec::with_capacity(lin.len()),
            f1: Vec::with_capacity(lin.len()),
            f2: Vec::with_capacity(lin.len()),
            f3: Vec::with_capacity(lin.len()),
        };
        for &l in lin {
            out.e.push((l * h).exp());
            out.e2.push((l * h * 0.5).exp());
            out.q.push(mean(l, &|z| ((z * 0.5).exp() - 1.0) / z) * h);
            out.f1
                .push(mean(l, &|z| (-4.0 - z + z.exp() * (4.0 - 3.0 * z + z * z)) / (z * z * z)) * h);
            out.f2
                .push(mean(l, &|z| (2.0 + z + z.exp() * (z - 2.0)) / (z * z * z)) * h);
            out.f3
                .push(mean(l, &|z| (-4.0 - 3.0 * z - z * z + z.exp() * (4.0 - z)) / (z * z * z)) * h);
        }
        out
    }
}

/// Single-writer time stepper with cached FFT plans and propagators.
pub struct Simulator {
    params: SystemParams,
    cfg: SimulationConfig,
    grid: SpectralGrid,
    half_linear: Vec<C64>,
    etd: Option<EtdCoefficients>,
    time: f64,
}

impl Simulator {
    pub fn new(params: SystemParams, cfg: SimulationConfig) -> Result<Self> {
        let params = params.validate_dynamics()?;
        cfg.validate()?;
        let grid = SpectralGrid::new(cfg.n)?;
        let w2 = params.omega * params.omega;
        // (i + eps) d_xx - eps alpha - i omega^2 / 2
        let lin: Vec<C64> = grid
            .wavenumbers()
            .iter()
            .map(|&k| -(C64::i() + params.epsilon) * k * k - params.epsilon * params.alpha - C64::i() * 0.5 * w2)
            .collect();
        let half_linear = lin.iter().map(|l| (l * 0.5 * cfg.dt).exp()).collect();
        let etd = (cfg.scheme == Scheme::Etd).then(|| EtdCoefficients::new(&lin, cfg.dt));
        Ok(Self {
            params,
            cfg,
            grid,
            half_linear,
            etd,
            time: 0.0,
        })
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn config(&self) -> &SimulationConfig {
        &self.cfg
    }

    fn check_field(&self, field: &ComplexField) -> Result<()> {
        if field.len() != self.cfg.n {
            return Err(Error::InvalidGrid(format!(
                "field has {} points, configuration expects {}",
                field.len(),
                self.cfg.n
            )));
        }
        Ok(())
    }

    /// One step in place; errors with `BlowUp` once `max |field|` exceeds the bound.
    pub fn step(&mut self, field: &mut ComplexField) -> Result<()> {
        self.check_field(field)?;
        match self.cfg.scheme {
            Scheme::Splitting => self.strang(field),
            Scheme::Etd => self.etdrk4(field),
        }
        if self.cfg.enforce_even {
            self.project_even(&mut field.p);
            self.project_even(&mut field.q);
        }
        self.time += self.cfg.dt;
        let amplitude = field.max_abs();
        if !(amplitude <= self.cfg.blowup_bound) {
            return Err(Error::BlowUp {
                time: self.time,
                amplitude,
            });
        }
        Ok(())
    }

    fn linear_half(&self, u: &mut [C64]) {
        self.grid.forward(u);
        for (z, m) in u.iter_mut().zip(&self.half_linear) {
            *z *= m;
        }
        self.grid.inverse(u);
    }

    fn rotate_half(&self, field: &mut ComplexField) {
        if !self.cfg.hooks.nonlinear {
            return;
        }
        let h = 0.5 * self.cfg.dt;
        for (p, q) in field.p.iter_mut().zip(field.q.iter_mut()) {
            // |p|^2 + |q|^2 is constant under the rotation, so this is exact
            let phase = C64::from_polar(1.0, 0.5 * (p.norm_sqr() + q.norm_sqr()) * h);
            *p *= phase;
            *q *= phase;
        }
    }

    fn strang(&self, field: &mut ComplexField) {
        self.linear_half(&mut field.p);
        self.linear_half(&mut field.q);
        self.rotate_half(field);
        let ModelHooks { forcing, asymmetry, .. } = self.cfg.hooks;
        let shift = if forcing {
            self.params.epsilon * self.params.beta * self.cfg.dt
        } else {
            0.0
        };
        for z in field.p.iter_mut() {
            *z += asymmetry * self.cfg.dt - shift;
        }
        for z in field.q.iter_mut() {
            *z -= shift;
        }
        self.rotate_half(field);
        self.linear_half(&mut field.p);
        self.linear_half(&mut field.q);
    }

    /// Fourier transform of the non-stiff part `i |u|^2 u / 2 - eps beta`.
    fn nonlinear_hat(&self, p_hat: &[C64], q_hat: &[C64]) -> (Vec<C64>, Vec<C64>) {
        let (mut p, mut q) = (p_hat.to_vec(), q_hat.to_vec());
        self.grid.inverse(&mut p);
        self.grid.inverse(&mut q);
        let hooks = self.cfg.hooks;
        let forcing = if hooks.forcing {
            self.params.epsilon * self.params.beta
        } else {
            0.0
        };
        for (a, b) in p.iter_mut().zip(q.iter_mut()) {
            let rot = if hooks.nonlinear {
                C64::i() * 0.5 * (a.norm_sqr() + b.norm_sqr())
            } else {
                C64::new(0.0, 0.0)
            };
            *a = rot * *a - forcing + hooks.asymmetry;
            *b = rot * *b - forcing;
        }
        self.grid.forward(&mut p);
        self.grid.forward(&mut q);
        (p, q)
    }

    fn etdrk4(&self, field: &mut ComplexField) {
        let c = self
            .etd
            .as_ref()
            .expect("ETD coefficients are built for the ETD scheme");
        let (mut vp, mut vq) = (field.p.clone(), field.q.clone());
        self.grid.forward(&mut vp);
        self.grid.forward(&mut vq);
        let n = vp.len();
        let combine = |base: &[C64], scale: &[C64], nl: &[C64]| -> Vec<C64> {
            (0..n).map(|k| scale[k] * base[k] + c.q[k] * nl[k]).collect()
        };
        let (nvp, nvq) = self.nonlinear_hat(&vp, &vq);
        let (ap, aq) = (combine(&vp, &c.e2, &nvp), combine(&vq, &c.e2, &nvq));
        let (nap, naq) = self.nonlinear_hat(&ap, &aq);
        let (bp, bq) = (combine(&vp, &c.e2, &nap), combine(&vq, &c.e2, &naq));
        let (nbp, nbq) = self.nonlinear_hat(&bp, &bq);
        let twice = |nb: &[C64], nv: &[C64]| -> Vec<C64> { (0..n).map(|k| nb[k] * 2.0 - nv[k]).collect() };
        let (cp, cq) = (
            combine(&ap, &c.e2, &twice(&nbp, &nvp)),
            combine(&aq, &c.e2, &twice(&nbq, &nvq)),
        );
        let (ncp, ncq) = self.nonlinear_hat(&cp, &cq);
        let update = |v: &mut [C64], nv: &[C64], na: &[C64], nb: &[C64], nc: &[C64]| {
            for k in 0..n {
                v[k] = c.e[k] * v[k] + c.f1[k] * nv[k] + c.f2[k] * (na[k] + nb[k]) * 2.0 + c.f3[k] * nc[k];
            }
        };
        update(&mut vp, &nvp, &nap, &nbp, &ncp);
        update(&mut vq, &nvq, &naq, &nbq, &ncq);
        self.grid.inverse(&mut vp);
        self.grid.inverse(&mut vq);
        field.p = vp;
        field.q = vq;
    }

    fn project_even(&self, u: &mut [C64]) {
        self.grid.forward(u);
        let n = u.len();
        for k in 1..n / 2 {
            let avg = 0.5 * (u[k] + u[n - k]);
            u[k] = avg;
            u[n - k] = avg;
        }
        self.grid.inverse(u);
    }

    /// Steps from `field0` to `t_end`, recording the initial state, every
    /// `record_every`-th step and the final step.
    pub fn run(&mut self, field0: &ComplexField) -> Result<TrajectoryRecord> {
        self.check_field(field0)?;
        let omega = self.params.omega;
        let steps = self.cfg.steps();
        let t0 = self.time;
        let mut field = field0.clone();
        let mut rec = TrajectoryRecord {
            times: vec![t0],
            fields: vec![field.clone()],
            diagnostics: vec![Diagnostics::of(&field, omega)],
            status: RunStatus::Completed,
        };
        for k in 1..=steps {
            match self.step(&mut field) {
                Ok(()) => {}
                Err(Error::BlowUp { time, amplitude }) => {
                    rec.status = RunStatus::BlowUp { time, amplitude };
                    return Ok(rec);
                }
                Err(e) => return Err(e),
            }
            if k % self.cfg.record_every == 0 || k == steps {
                // t0 + k dt avoids accumulating rounding in the recorded times
                rec.times.push(t0 + k as f64 * self.cfg.dt);
                rec.diagnostics.push(Diagnostics::of(&field, omega));
                rec.fields.push(field.clone());
            }
        }
        Ok(rec)
    }
}
