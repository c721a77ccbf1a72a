use num_complex::Complex64 as C64;
use pvnls_core::integrable::{dispersion, homoclinic_orbit, plane_wave};
use pvnls_core::melnikov::{alpha_curve_sweep, alpha_from, compute_m123, cos_gamma1, melnikov_m_from, RowStatus};
use pvnls_core::pde::{q_eps_field, RunStatus, Simulator};
use pvnls_core::reduced::{
    closed_form_eigenvalues, constant_k, default_seed_grid, expected_action, find_fixed_points, fixed_lines,
    hamiltonian_reduced, integrate_flow, separatrix_levelset, FlowKind, ReducedState, RescaledState, SeparatrixGrid,
    Tolerance,
};
use pvnls_core::{derive_constants, validate_system, ComplexField, Error, SystemParams};

use crate::config::{InitialKind, PerturbationMode, RunConfig};
use crate::error::{invalid, CliError};
use crate::output::{Table, Value};
use crate::verify;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Subcommand {
    /// Sample the homoclinic orbit on a (t, x) grid
    Orbit,
    /// Linearized growth rates about the plane wave
    Dispersion,
    /// M1, M2, M3 and M at one parameter point
    Melnikov,
    /// Tabulate alpha(omega)
    AlphaCurve,
    /// Fixed points of the reduced system and their eigenvalues
    FixedPoints,
    /// Trajectory of the reduced system
    Flow,
    /// Separatrix of the restricted Hamiltonian
    Separatrix,
    /// Pseudospectral simulation of the perturbed system
    Simulate,
    /// Run the invariant suite
    Verify,
}

/// Table for the output sink, messages for stderr, and an error to report
/// after the table is written.
#[derive(Debug)]
pub struct Report {
    pub table: Table,
    pub notes: Vec<String>,
    pub failure: Option<CliError>,
}

impl From<Table> for Report {
    fn from(table: Table) -> Self {
        Self {
            table,
            notes: Vec::new(),
            failure: None,
        }
    }
}

pub fn dispatch(cmd: Subcommand, cfg: &RunConfig) -> Result<Report, CliError> {
    match cmd {
        Subcommand::Orbit => orbit(cfg).map(Report::from),
        Subcommand::Dispersion => dispersion_table(cfg).map(Report::from),
        Subcommand::Melnikov => melnikov(cfg).map(Report::from),
        Subcommand::AlphaCurve => alpha_curve(cfg),
        Subcommand::FixedPoints => fixed_points(cfg),
        Subcommand::Flow => flow(cfg),
        Subcommand::Separatrix => separatrix(cfg).map(Report::from),
        Subcommand::Simulate => simulate(cfg),
        Subcommand::Verify => verify::run(cfg),
    }
}

fn with_saddle(cfg: &RunConfig) -> Result<SystemParams, CliError> {
    validate_system(cfg.system).map_err(invalid("system"))
}

fn linspace(a: f64, b: f64, n: usize) -> impl Iterator<Item = f64> {
    let h = if n > 1 { (b - a) / (n - 1) as f64 } else { 0.0 };
    (0..n).map(move |k| a + k as f64 * h)
}

fn quad_meta(cfg: &RunConfig) -> [Value; 3] {
    let q = cfg.quadrature;
    [q.n_x.into(), q.tau_cut.into(), q.n_tau.into()]
}

fn orbit(cfg: &RunConfig) -> Result<Table, CliError> {
    let omega = cfg.system.omega;
    let orbit = cfg.orbit_or_default();
    derive_constants(&orbit).map_err(invalid("orbit"))?;
    let g = cfg.grid;
    let mut t = Table::new([
        "t", "x", "p_re", "p_im", "q_re", "q_im", "h_re", "h_im", "omega", "n_t", "n_x",
    ]);
    for time in linspace(g.t_min, g.t_max, g.n_t) {
        for x in ComplexField::grid(g.n_x) {
            let s = homoclinic_orbit(time, x, &orbit, omega, g.form.into())?;
            t.push(vec![
                time.into(),
                x.into(),
                s.p_hat.re.into(),
                s.p_hat.im.into(),
                s.q_hat.re.into(),
                s.q_hat.im.into(),
                s.h.re.into(),
                s.h.im.into(),
                omega.into(),
                g.n_t.into(),
                g.n_x.into(),
            ]);
        }
    }
    Ok(t)
}

fn dispersion_table(cfg: &RunConfig) -> Result<Table, CliError> {
    let orbit = cfg.orbit_or_default();
    let k_max = cfg.dispersion.k_max;
    let mut columns = vec!["k".to_string()];
    for j in 1..=4 {
        columns.push(format!("Omega{j}_re"));
        columns.push(format!("Omega{j}_im"));
    }
    columns.extend(["growth", "unstable", "a", "b", "k_max"].map(String::from));
    let mut t = Table::new(columns);
    for k in 0..=k_max as i64 {
        let rates = dispersion(k, orbit.a, orbit.b);
        let mut row: Vec<Value> = vec![k.into()];
        for z in rates {
            row.push(z.re.into());
            row.push(z.im.into());
        }
        let growth = rates.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        row.extend([
            growth.into(),
            (growth > 0.0).into(),
            orbit.a.into(),
            orbit.b.into(),
            k_max.into(),
        ]);
        t.push(row);
    }
    Ok(t)
}

fn melnikov(cfg: &RunConfig) -> Result<Table, CliError> {
    let p = with_saddle(cfg)?;
    let ints = compute_m123(p.omega, &cfg.quadrature)?;
    let alpha_star = alpha_from(&ints)?;
    let cg = cos_gamma1(p.omega, p.alpha, p.beta).map_err(invalid("system"))?;
    let gamma1 = cg.acos();
    let m = melnikov_m_from(&ints, p.alpha, p.beta, gamma1, p.epsilon);
    let mut t = Table::new([
        "omega",
        "alpha",
        "beta",
        "epsilon",
        "M1",
        "M2",
        "M3",
        "M",
        "gamma1",
        "alpha_star",
        "refinement_change",
        "n_x",
        "tau_cut",
        "n_tau",
    ]);
    let mut row: Vec<Value> = vec![
        p.omega.into(),
        p.alpha.into(),
        p.beta.into(),
        p.epsilon.into(),
        ints.m1.into(),
        ints.m2.into(),
        ints.m3.into(),
        m.into(),
        gamma1.into(),
        alpha_star.into(),
        ints.refinement_change.into(),
    ];
    row.extend(quad_meta(cfg));
    t.push(row);
    Ok(t)
}

fn status_str(s: RowStatus) -> &'static str {
    match s {
        RowStatus::Ok => "ok",
        RowStatus::NotConverged => "not_converged",
        RowStatus::DenominatorNearZero => "denominator_near_zero",
    }
}

fn alpha_curve(cfg: &RunConfig) -> Result<Report, CliError> {
    let s = cfg.sweep;
    let beta = cfg.system.beta;
    let curve = alpha_curve_sweep(s.omega_min, s.omega_max, s.n, beta, &cfg.quadrature).map_err(invalid("sweep"))?;
    let mut t = Table::new([
        "omega",
        "alpha",
        "M1",
        "M2",
        "M3",
        "feasible",
        "cos_gamma1",
        "denominator",
        "M_residual",
        "status",
        "beta",
        "n_x",
        "tau_cut",
        "n_tau",
    ]);
    for r in &curve.rows {
        let mut row: Vec<Value> = vec![
            r.omega.into(),
            r.alpha.into(),
            r.m1.into(),
            r.m2.into(),
            r.m3.into(),
            r.feasible.into(),
            r.cos_gamma1.into(),
            r.denominator.into(),
            r.m_residual.into(),
            status_str(r.status).into(),
            beta.into(),
        ];
        row.extend(quad_meta(cfg));
        t.push(row);
    }
    let mut notes: Vec<String> = curve.warnings.iter().map(|w| format!("warning: {w}")).collect();
    for (a, b) in &curve.denominator_brackets {
        notes.push(format!(
            "warning: denominator of alpha(omega) changes sign in [{a}, {b}]"
        ));
    }
    Ok(Report {
        table: t,
        notes,
        failure: None,
    })
}

fn fixed_points(cfg: &RunConfig) -> Result<Report, CliError> {
    let p = with_saddle(cfg)?;
    let search = find_fixed_points(&p, &default_seed_grid(&p)).map_err(invalid("system"))?;
    let mut columns: Vec<String> = ["kind", "time", "i1", "theta1", "i2", "theta2", "residual", "expected_i"]
        .map(String::from)
        .to_vec();
    for j in 1..=4 {
        columns.push(format!("mu{j}_re"));
        columns.push(format!("mu{j}_im"));
    }
    columns.extend(["closed_form_error", "epsilon"].map(String::from));
    let mut t = Table::new(columns);
    let push = |t: &mut Table, head: Vec<Value>, mu: &[C64; 4], closed: f64| {
        let mut row = head;
        for z in mu {
            row.push(z.re.into());
            row.push(z.im.into());
        }
        row.extend([closed.into(), p.epsilon.into()]);
        t.push(row);
    };
    for r in &search.points {
        let want = closed_form_eigenvalues(r.kind, &r.state, &p);
        let closed = want
            .iter()
            .map(|w| {
                r.eigenvalues
                    .iter()
                    .map(|g| (g - w).norm())
                    .fold(f64::INFINITY, f64::min)
                    / w.norm()
            })
            .fold(0.0, f64::max);
        let s = r.state;
        let head = vec![
            r.kind.as_str().into(),
            "t".into(),
            s.i1.into(),
            s.theta1.into(),
            s.i2.into(),
            s.theta2.into(),
            r.residual.into(),
            expected_action(r.kind, &p).unwrap_or(f64::NAN).into(),
        ];
        push(&mut t, head, &r.eigenvalues, closed);
    }
    let half = 0.5 * p.omega * p.omega;
    for l in fixed_lines(&p)?.lines {
        // the point j1 = j2 = 0 of each line, eigenvalues in tau = sqrt(eps) t
        let head = vec![
            l.kind.as_str().into(),
            "tau".into(),
            half.into(),
            l.theta1.into(),
            half.into(),
            l.theta2.into(),
            f64::NAN.into(),
            f64::NAN.into(),
        ];
        push(&mut t, head, &l.eigenvalues, f64::NAN);
    }
    let notes = vec![format!(
        "{} fixed points from {} seeds ({} did not converge)",
        search.points.len(),
        search.seeds,
        search.failed
    )];
    Ok(Report {
        table: t,
        notes,
        failure: None,
    })
}

fn flow(cfg: &RunConfig) -> Result<Report, CliError> {
    let p = cfg.system;
    let f = cfg.flow;
    let y0 = match f.initial {
        Some(y) => y,
        None => {
            let th = fixed_lines(&with_saddle(cfg)?)?.p0.theta1;
            let y = [0.2, th + 0.3, 0.1, th + 0.1];
            match f.kind {
                FlowKind::Polar => RescaledState::from_array(y).to_polar(p.omega, p.epsilon).to_array(),
                _ => y,
            }
        }
    };
    let outputs: Vec<f64> = linspace(0.0, f.t_end, f.n_out).collect();
    let tr = integrate_flow(f.kind, &p, y0, (0.0, f.t_end), Tolerance::new(f.rtol, f.atol), &outputs)?;
    let (time, action) = match f.kind {
        FlowKind::Polar => ("t", ["i1", "i2"]),
        _ => ("tau", ["j1", "j2"]),
    };
    let mut t = Table::new([
        time, action[0], "theta1", action[1], "theta2", "H", "K", "kind", "rtol", "atol", "epsilon",
    ]);
    let kind = match f.kind {
        FlowKind::Polar => "polar",
        FlowKind::Rescaled => "rescaled",
        FlowKind::Leading => "leading",
    };
    for (time, y) in tr.times.iter().zip(&tr.states) {
        let r = match f.kind {
            FlowKind::Polar => ReducedState::from_array(*y).to_rescaled(p.omega, p.epsilon),
            _ => RescaledState::from_array(*y),
        };
        t.push(vec![
            (*time).into(),
            y[0].into(),
            y[1].into(),
            y[2].into(),
            y[3].into(),
            hamiltonian_reduced(&r, &p).into(),
            constant_k(&r).into(),
            kind.into(),
            f.rtol.into(),
            f.atol.into(),
            p.epsilon.into(),
        ]);
    }
    Ok(Report {
        table: t,
        notes: vec![format!(
            "{} accepted and {} rejected steps",
            tr.accepted_steps, tr.rejected_steps
        )],
        failure: None,
    })
}

fn separatrix(cfg: &RunConfig) -> Result<Table, CliError> {
    let p = cfg.system;
    let s = cfg.separatrix;
    let probe = separatrix_levelset(&p, s.delta, None).map_err(invalid("separatrix"))?;
    let sep = separatrix_levelset(&p, s.delta, Some(SeparatrixGrid::around(probe.theta_saddle, s.n)))?;
    let mut t = Table::new(["branch", "theta", "j", "delta", "level", "theta_saddle", "n"]);
    for (b, branch) in sep.branches.iter().enumerate() {
        for &(theta, j) in branch {
            t.push(vec![
                b.into(),
                theta.into(),
                j.into(),
                s.delta.into(),
                sep.level.into(),
                sep.theta_saddle.into(),
                s.n.into(),
            ]);
        }
    }
    Ok(t)
}

fn initial_field(cfg: &RunConfig, params: &SystemParams) -> Result<ComplexField, CliError> {
    let n = cfg.simulation.n;
    let init = cfg.initial;
    let orbit = cfg.orbit_or_default();
    let mut field = match init.kind {
        InitialKind::Homoclinic => {
            pvnls_core::integrable::homoclinic_field(init.t0, n, &orbit, params.omega, init.form.into())?
        }
        InitialKind::PlaneWave => {
            let (p, q) = plane_wave(init.t0, &orbit, params.omega);
            ComplexField::constant(n, p, q)?
        }
        InitialKind::QEps => q_eps_field(&with_saddle(cfg)?, n)?,
    };
    let sign = match init.mode {
        PerturbationMode::Diagonal => 1.0,
        PerturbationMode::Transverse => -1.0,
    };
    for (j, x) in ComplexField::grid(n).enumerate() {
        let d = init.perturbation * x.cos();
        field.p[j] += d;
        field.q[j] += sign * d;
    }
    Ok(field)
}

fn simulate(cfg: &RunConfig) -> Result<Report, CliError> {
    let params = cfg.system.validate_dynamics().map_err(invalid("system"))?;
    let field = initial_field(cfg, &params)?;
    let sim = &cfg.simulation;
    let rec = Simulator::new(params, sim.clone())?.run(&field)?;
    let scheme = match sim.scheme {
        pvnls_core::pde::Scheme::Splitting => "splitting",
        pvnls_core::pde::Scheme::Etd => "etd",
    };
    let meta = || -> [Value; 3] { [sim.n.into(), sim.dt.into(), scheme.into()] };
    let table = if cfg.output.snapshots {
        let mut t = Table::new(["t", "x", "p_re", "p_im", "q_re", "q_im", "n", "dt", "scheme"]);
        for (time, f) in rec.times.iter().zip(&rec.fields) {
            for (j, x) in ComplexField::grid(sim.n).enumerate() {
                let mut row: Vec<Value> = vec![
                    (*time).into(),
                    x.into(),
                    f.p[j].re.into(),
                    f.p[j].im.into(),
                    f.q[j].re.into(),
                    f.q[j].im.into(),
                ];
                row.extend(meta());
                t.push(row);
            }
        }
        t
    } else {
        let mut t = Table::new(["t", "E1", "E2", "G", "H", "defect", "max_abs", "n", "dt", "scheme"]);
        for ((time, d), f) in rec.times.iter().zip(&rec.diagnostics).zip(&rec.fields) {
            let mut row: Vec<Value> = vec![
                (*time).into(),
                d.e1.into(),
                d.e2.into(),
                d.g.into(),
                d.h.into(),
                d.defect.into(),
                f.max_abs().into(),
            ];
            row.extend(meta());
            t.push(row);
        }
        t
    };
    let failure = match rec.status {
        RunStatus::Completed => None,
        RunStatus::BlowUp { time, amplitude } => Some(CliError::Core(Error::BlowUp { time, amplitude })),
    };
    Ok(Report {
        table,
        notes: Vec::new(),
        failure,
    })
}
