//! The invariant suite behind `pvnls verify`. Each check reports a measured
//! value against a threshold; errors inside a check turn into FAIL lines.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use pvnls_core::functionals::{functional_g, inner, variational_gradient_g};
use pvnls_core::integrable::{
    darboux_orbit, eval_h_jet, homoclinic_field, homoclinic_orbit, lax_residuals, unstable_mode_count, OrbitForm, Sign,
};
use pvnls_core::melnikov::{
    alpha_from, compute_m123, cos_gamma1, cos_gamma1_unchecked, melnikov_direct, melnikov_m_from, oracle,
};
use pvnls_core::pde::{
    diagonal_growth_probe, pi_invariance_probe, sigma_invariance_probe, simulate, transverse_stability_probe,
    FitWindow, Scheme, SimulationConfig,
};
use pvnls_core::reduced::{
    closed_form_eigenvalues, constant_k, default_seed_grid, find_fixed_points, fixed_lines, hamiltonian_reduced,
    rk4_fixed, FixedPointKind, FlowKind, RescaledState,
};
use pvnls_core::{derive_constants, validate_system, ComplexField, Error, OrbitParams, SystemParams};

use crate::commands::Report;
use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::Table;

struct Check {
    name: &'static str,
    value: f64,
    threshold: f64,
    pass: bool,
    detail: String,
}

fn below(name: &'static str, value: f64, threshold: f64, detail: impl Into<String>) -> Check {
    Check {
        name,
        value,
        threshold,
        pass: value < threshold,
        detail: detail.into(),
    }
}

type Suite = Result<Vec<Check>, Error>;
type CheckFn = fn(&RunConfig) -> Suite;

fn general_orbit(cfg: &RunConfig) -> OrbitParams {
    cfg.orbit.unwrap_or(OrbitParams::new(0.9, 0.8, 0.3, -0.5, 0.4, 1.1))
}

fn lax(cfg: &RunConfig) -> Suite {
    let orbit = general_orbit(cfg);
    let mut worst = 0.0f64;
    for i in 0..7 {
        for j in 0..7 {
            let (t, x) = (-3.0 + i as f64, 2.0 * PI * j as f64 / 7.0);
            for sign in [Sign::Plus, Sign::Minus] {
                let (rx, rt) = lax_residuals(t, x, sign, &orbit, cfg.system.omega)?;
                worst = worst.max(rx).max(rt);
            }
        }
    }
    Ok(vec![below(
        "lax_pair",
        worst,
        1e-8,
        "psi_x = U psi and psi_t = V psi at 98 points",
    )])
}

fn darboux(cfg: &RunConfig) -> Suite {
    let omega = cfg.system.omega;
    let orbit = general_orbit(cfg);
    let lambda = derive_constants(&orbit)?.lambda;
    let mut worst = 0.0f64;
    for i in 0..11 {
        for j in 0..8 {
            let (t, x) = (-5.0 + i as f64, 2.0 * PI * j as f64 / 8.0);
            let (p, q) = darboux_orbit(t, x, &orbit, omega, lambda)?;
            let s = homoclinic_orbit(t, x, &orbit, omega, OrbitForm::General)?;
            worst = worst.max((p - s.p_hat).norm()).max((q - s.q_hat).norm());
        }
    }
    Ok(vec![below(
        "darboux_closed_form",
        worst,
        1e-12,
        "Darboux transform vs closed-form orbit",
    )])
}

fn asymptotic_phase(cfg: &RunConfig) -> Suite {
    let orbit = OrbitParams::melnikov_point(cfg.system.omega, 0.0);
    let c = derive_constants(&orbit)?;
    let limit = C64::from_polar(1.0, 2.0 * c.theta0);
    let mut worst = 0.0f64;
    for x in [0.0, 1.0, 2.0, PI] {
        let plus = eval_h_jet(20.0 / c.sigma, x, &orbit, OrbitForm::General)?.h;
        let minus = eval_h_jet(-20.0 / c.sigma, x, &orbit, OrbitForm::General)?.h;
        worst = worst.max((plus - limit).norm()).max((minus - limit.conj()).norm());
    }
    Ok(vec![below(
        "asymptotic_phase",
        worst,
        1e-8,
        "|h(tau = +-10) - exp(+-2i theta0)|",
    )])
}

fn dispersion(cfg: &RunConfig) -> Suite {
    let orbit = OrbitParams::melnikov_point(cfg.system.omega, 0.0);
    let count = unstable_mode_count(orbit.a, orbit.b, 16);
    Ok(vec![Check {
        name: "unstable_modes",
        value: count as f64,
        threshold: 1.0,
        pass: count == 1,
        detail: "growing modes of the resonant plane wave, k <= 16".into(),
    }])
}

fn melnikov(cfg: &RunConfig) -> Suite {
    let quad = &cfg.quadrature;
    let mut out = Vec::new();

    let m = compute_m123(oracle::OMEGA, quad)?;
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
    let dev = rel(m.m1, oracle::M1)
        .max(rel(m.m2, oracle::M2))
        .max(rel(m.m3, oracle::M3))
        .max(rel(alpha_from(&m)?, oracle::ALPHA));
    out.push(below(
        "melnikov_oracle",
        dev,
        1e-6,
        "M1, M2, M3, alpha at omega = 1.5 vs trapezoid oracle",
    ));

    let SystemParams { omega, beta, .. } = cfg.system;
    let ints = compute_m123(omega, quad)?;
    out.push(below(
        "melnikov_refinement",
        ints.refinement_change,
        1e-6,
        "relative change of M1..M3 under doubled resolution",
    ));

    let alpha = alpha_from(&ints)?;
    let gamma1 = cos_gamma1(omega, alpha, beta).map(f64::acos).unwrap_or(0.0);
    let direct = melnikov_direct(&SystemParams::new(omega, alpha, beta, 1.0), gamma1, quad)?;
    let formula = melnikov_m_from(&ints, alpha, beta, gamma1, 1.0);
    out.push(below(
        "melnikov_two_route",
        (direct.total - formula).abs() / direct.scale(),
        1e-4,
        format!("integral of dG/dt vs closed form at gamma1 = {gamma1}"),
    ));

    // raise |beta| until the phase condition has a real solution
    let cg = cos_gamma1_unchecked(omega, alpha, beta)?;
    let beta_f = beta.abs().max(1e-3) * (cg.abs() / 0.8).max(1.0);
    let cg_f = cos_gamma1_unchecked(omega, alpha, beta_f)?;
    let zero = melnikov_m_from(&ints, alpha, beta_f, cg_f.acos(), 1.0);
    out.push(below(
        "alpha_zero",
        zero.abs(),
        1e-8,
        format!("M(alpha(omega)) per unit eps at beta = {beta_f}"),
    ));
    Ok(out)
}

fn fixed_points(cfg: &RunConfig) -> Suite {
    let base = validate_system(cfg.system)?;
    let eps = if base.epsilon > 0.0 { base.epsilon } else { 1e-3 };
    let p = base.with_epsilon(eps);
    let search = find_fixed_points(&p, &default_seed_grid(&p))?;
    let diagonal = search
        .points
        .iter()
        .map(|r| {
            (r.state.i1 - r.state.i2)
                .abs()
                .max((r.state.theta1 - r.state.theta2).abs())
        })
        .fold(0.0, f64::max);
    let unstable = search
        .get(FixedPointKind::QEps)
        .map(|r| r.eigenvalues.iter().filter(|z| z.re > 0.0).count())
        .unwrap_or(0);
    let mut out = vec![
        below(
            "diagonal_roots",
            diagonal,
            1e-10,
            format!("I1 = I2, theta1 = theta2 on {} roots", search.points.len()),
        ),
        Check {
            name: "q_eps_saddle",
            value: unstable as f64,
            threshold: 1.0,
            pass: unstable == 1,
            detail: format!("eigenvalues of Q_eps with positive real part at eps = {eps}"),
        },
    ];

    let small = base.with_epsilon(1e-4);
    let search = find_fixed_points(&small, &default_seed_grid(&small))?;
    let mut worst = 0.0f64;
    for kind in [FixedPointKind::OEps, FixedPointKind::PEps, FixedPointKind::QEps] {
        let Some(r) = search.get(kind) else {
            worst = f64::INFINITY;
            continue;
        };
        for w in closed_form_eigenvalues(kind, &r.state, &small) {
            let d = r
                .eigenvalues
                .iter()
                .map(|g| (g - w).norm())
                .fold(f64::INFINITY, f64::min);
            worst = worst.max(d / w.norm());
        }
    }
    out.push(below(
        "eigenvalue_expansions",
        worst,
        1e-3,
        "O_eps, P_eps, Q_eps at eps = 1e-4",
    ));
    Ok(out)
}

fn flow_conservation(cfg: &RunConfig) -> Suite {
    let p = validate_system(cfg.system)?.with_epsilon(0.0);
    let th = fixed_lines(&p)?.p0.theta1;
    let y0 = [0.2, th + 0.3, 0.1, th + 0.1];
    let tr = rk4_fixed(FlowKind::Leading, &p, y0, 0.0, 1e-3, 50_000)?;
    let h = |s: &[f64; 4]| hamiltonian_reduced(&RescaledState::from_array(*s), &p);
    let k = |s: &[f64; 4]| constant_k(&RescaledState::from_array(*s));
    let (dh, dk) = tr.states.iter().fold((0.0f64, 0.0f64), |(a, b), s| {
        (a.max((h(s) - h(&y0)).abs()), b.max((k(s) - k(&y0)).abs()))
    });
    Ok(vec![
        below("flow_h_drift", dh, 1e-8, "leading-order flow, RK4 over tau in [0, 50]"),
        below("flow_k_drift", dk, 1e-12, "leading-order flow, RK4 over tau in [0, 50]"),
    ])
}

fn pde(cfg: &RunConfig) -> Suite {
    let omega = cfg.system.omega;
    let params = cfg.system.validate_dynamics()?;
    let sim = SimulationConfig {
        t_end: 1.0,
        record_every: 1000,
        ..cfg.simulation.clone()
    };
    let n = sim.n;
    let orbit = OrbitParams::melnikov_point(omega, 0.4);
    let diag = homoclinic_field(-2.0, n, &orbit, omega, OrbitForm::Even(Sign::Plus))?;
    let sigma = sigma_invariance_probe(&params, &sim, &diag)?;
    let constant = ComplexField::constant(n, C64::new(0.9, 0.4), C64::new(0.2, -1.1))?;
    let pi = pi_invariance_probe(&params, &sim, &constant)?;

    let free = SystemParams::new(omega, 0.0, 0.0, 0.0);
    let general = OrbitParams::new(0.9, 0.8, 0.2, -0.3, 0.5, 1.2);
    let f0 = homoclinic_field(-2.0, n, &general, omega, OrbitForm::General)?;
    let etd = SimulationConfig {
        scheme: Scheme::Etd,
        ..sim.clone()
    };
    let drift = simulate(&f0, &free, &etd)?.into_result()?.max_relative_drift();

    let shadow_cfg = SimulationConfig {
        n: 64,
        dt: 1e-4,
        t_end: 1.0,
        record_every: 2500,
        ..Default::default()
    };
    let form = OrbitForm::Even(Sign::Plus);
    let start = homoclinic_field(0.0, 64, &orbit, omega, form)?;
    let rec = simulate(&start, &free, &shadow_cfg)?.into_result()?;
    let mut shadow = 0.0f64;
    for (t, f) in rec.times.iter().zip(&rec.fields) {
        shadow = shadow.max(f.axpy(-1.0, &homoclinic_field(*t, 64, &orbit, omega, form)?).max_abs());
    }

    Ok(vec![
        below(
            "sigma_invariance",
            sigma,
            1e-12,
            "max |p - q| from p = q data, t in [0, 1]",
        ),
        below(
            "pi_invariance",
            pi.max_x_dependence,
            1e-12,
            "x-dependence from constant data, t in [0, 1]",
        ),
        below(
            "pde_conservation",
            drift.iter().copied().fold(0.0, f64::max),
            1e-8,
            format!(
                "eps = 0, ETDRK4: E1 {:e}, E2 {:e}, G {:e}",
                drift[0], drift[1], drift[2]
            ),
        ),
        below(
            "homoclinic_shadowing",
            shadow,
            1e-4,
            "eps = 0 run vs analytic orbit, n = 64, t in [0, 1]",
        ),
    ])
}

fn probes(cfg: &RunConfig) -> Suite {
    let params = validate_system(cfg.system)?.with_epsilon(1e-3);
    let sigma = (params.omega * params.omega - 1.0).sqrt();
    let run = |t_end: f64| SimulationConfig {
        n: 32,
        dt: 1e-3,
        t_end,
        record_every: 250,
        ..Default::default()
    };
    let transverse = transverse_stability_probe(&params, &run(20.0), 1e-6, FitWindow::new(0.0, 20.0))?;
    // stop while the growing mode is still linear
    let t_end = (11.5 / sigma).min(20.0);
    let diagonal = diagonal_growth_probe(&params, &run(t_end), 1e-8, FitWindow::new(0.3 * t_end, t_end))?;
    let rel = (diagonal.rate - sigma).abs() / sigma;
    Ok(vec![
        Check {
            name: "transverse_decay",
            value: transverse.rate,
            threshold: 0.0,
            pass: transverse.rate < 0.0,
            detail: "fitted rate of |p - q| near Q_eps at eps = 1e-3".into(),
        },
        below(
            "diagonal_growth",
            rel,
            0.05,
            format!("fitted rate {} vs sigma {sigma}", diagonal.rate),
        ),
    ])
}

fn gradient(_: &RunConfig) -> Suite {
    let u = ComplexField::from_fn(64, |x| {
        (
            C64::new(1.0 + 0.3 * x.cos(), 0.2 * (2.0 * x).sin()),
            C64::new(0.6 - 0.1 * (3.0 * x).cos(), 0.4 * x.sin()),
        )
    })?;
    let v = ComplexField::from_fn(64, |x| {
        (
            C64::new(0.5 * (2.0 * x).cos(), 0.3 * x.cos()),
            C64::new(-0.2 * x.sin(), 0.1),
        )
    })?;
    let analytic = 2.0 * inner(&variational_gradient_g(&u), &v).re;
    let fd = |h: f64| (functional_g(&u.axpy(h, &v)) - functional_g(&u.axpy(-h, &v))) / (2.0 * h);
    let err = |h: f64| (fd(h) - analytic).abs() / analytic.abs();
    let (e1, e2) = (err(1e-3), err(5e-4));
    let ratio = e1 / e2;
    Ok(vec![
        below(
            "gradient_g",
            e2,
            1e-6,
            "variational gradient vs central difference, h = 5e-4",
        ),
        Check {
            name: "gradient_order",
            value: ratio,
            threshold: 4.0,
            pass: (ratio - 4.0).abs() < 0.4,
            detail: "error ratio under step halving".into(),
        },
    ])
}

const SUITE: [(&str, CheckFn); 10] = [
    ("lax_pair", lax),
    ("darboux_closed_form", darboux),
    ("asymptotic_phase", asymptotic_phase),
    ("unstable_modes", dispersion),
    ("melnikov", melnikov),
    ("fixed_points", fixed_points),
    ("flow", flow_conservation),
    ("pde", pde),
    ("probes", probes),
    ("gradient", gradient),
];

pub fn run(cfg: &RunConfig) -> Result<Report, CliError> {
    let mut checks = Vec::new();
    for (group, check) in SUITE {
        match check(cfg) {
            Ok(c) => checks.extend(c),
            Err(e) => checks.push(Check {
                name: group,
                value: f64::NAN,
                threshold: f64::NAN,
                pass: false,
                detail: e.to_string(),
            }),
        }
    }
    let q = cfg.quadrature;
    let s = &cfg.simulation;
    let mut table = Table::new([
        "check",
        "status",
        "value",
        "threshold",
        "detail",
        "n_x",
        "tau_cut",
        "n_tau",
        "n",
        "dt",
    ]);
    for c in &checks {
        table.push(vec![
            c.name.into(),
            if c.pass { "PASS" } else { "FAIL" }.into(),
            c.value.into(),
            c.threshold.into(),
            c.detail.clone().into(),
            q.n_x.into(),
            q.tau_cut.into(),
            q.n_tau.into(),
            s.n.into(),
            s.dt.into(),
        ]);
    }
    let failed = checks.iter().filter(|c| !c.pass).count();
    let total = checks.len();
    Ok(Report {
        table,
        notes: vec![format!("verify: {} of {total} checks passed", total - failed)],
        failure: (failed > 0).then_some(CliError::VerifyFailed { failed, total }),
    })
}
