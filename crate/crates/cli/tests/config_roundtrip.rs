use proptest::prelude::*;
use pvnls_cli::config::{FormChoice, InitialKind};
use pvnls_cli::{emit_config, parse_config, Format, RunConfig};
use pvnls_core::pde::Scheme;
use pvnls_core::{OrbitParams, SystemParams};

proptest! {
    #[test]
    fn emit_then_parse_is_identity(
        omega in 1.01f64..1.99,
        alpha in 1e-3f64..5.0,
        beta in -10.0f64..10.0,
        epsilon in 0.0f64..0.5,
        orbit in proptest::option::of((0.5f64..1.2, 0.5f64..1.2, -3.0f64..3.0, -3.0f64..3.0, -2.0f64..2.0, -3.0f64..3.0)),
        dt in 1e-6f64..1e-3,
        etd in any::<bool>(),
        jsonl in any::<bool>(),
        t0 in -10.0f64..10.0,
    ) {
        let mut cfg = RunConfig {
            system: SystemParams::new(omega, alpha, beta, epsilon),
            orbit: orbit.map(|(a, b, g1, g2, r, th)| OrbitParams::new(a, b, g1, g2, r, th)),
            ..Default::default()
        };
        prop_assume!(cfg.orbit.is_none_or(|o| o.validate().is_ok()));
        cfg.simulation.dt = dt;
        cfg.simulation.scheme = if etd { Scheme::Etd } else { Scheme::Splitting };
        cfg.output.format = if jsonl { Format::Jsonl } else { Format::Csv };
        cfg.initial.t0 = t0;
        cfg.initial.kind = InitialKind::PlaneWave;
        cfg.grid.form = FormChoice::General;
        let back = parse_config(&emit_config(&cfg)).unwrap();
        prop_assert_eq!(back, cfg);
    }
}
