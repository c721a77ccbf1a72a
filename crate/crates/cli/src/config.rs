//! Run configuration: a sectioned TOML document. Every section is optional
//! and falls back to the defaults printed by `pvnls --help`.

use std::path::PathBuf;

use pvnls_core::integrable::{OrbitForm, Sign};
use pvnls_core::pde::SimulationConfig;
use pvnls_core::reduced::{FlowKind, Tolerance};
use pvnls_core::{validate_system, Error, OrbitParams, QuadratureConfig, SystemParams};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, CliError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Jsonl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormChoice {
    General,
    #[default]
    EvenPlus,
    EvenMinus,
}

impl From<FormChoice> for OrbitForm {
    fn from(f: FormChoice) -> Self {
        match f {
            FormChoice::General => OrbitForm::General,
            FormChoice::EvenPlus => OrbitForm::Even(Sign::Plus),
            FormChoice::EvenMinus => OrbitForm::Even(Sign::Minus),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    pub format: Format,
    /// `simulate` emits field samples instead of diagnostics.
    pub snapshots: bool,
}

/// `(t, x)` sampling for `orbit`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub t_min: f64,
    pub t_max: f64,
    pub n_t: usize,
    pub n_x: usize,
    pub form: FormChoice,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            t_min: -5.0,
            t_max: 5.0,
            n_t: 21,
            n_x: 64,
            form: FormChoice::EvenPlus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DispersionConfig {
    pub k_max: u32,
}

impl Default for DispersionConfig {
    fn default() -> Self {
        Self { k_max: 8 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub omega_min: f64,
    pub omega_max: f64,
    pub n: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            omega_min: 1.05,
            omega_max: 1.95,
            n: 19,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowConfig {
    pub kind: FlowKind,
    /// Initial state; defaults to a point near the `l_c` line.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial: Option<[f64; 4]>,
    pub t_end: f64,
    pub n_out: usize,
    pub rtol: f64,
    pub atol: f64,
}

impl Default for FlowConfig {
    fn default() -> Self {
        let tol = Tolerance::default();
        Self {
            kind: FlowKind::Leading,
            initial: None,
            t_end: 50.0,
            n_out: 501,
            rtol: tol.rtol,
            atol: tol.atol,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeparatrixConfig {
    pub delta: f64,
    pub n: usize,
}

impl Default for SeparatrixConfig {
    fn default() -> Self {
        Self { delta: 0.0, n: 4001 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialKind {
    #[default]
    Homoclinic,
    PlaneWave,
    QEps,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PerturbationMode {
    #[default]
    Diagonal,
    Transverse,
}

/// Initial data for `simulate`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialConfig {
    pub kind: InitialKind,
    /// Orbit time at which the homoclinic or plane-wave state is sampled.
    pub t0: f64,
    pub form: FormChoice,
    /// Amplitude of the added `cos x` mode.
    pub perturbation: f64,
    pub mode: PerturbationMode,
}

impl Default for InitialConfig {
    fn default() -> Self {
        Self {
            kind: InitialKind::Homoclinic,
            t0: -3.0,
            form: FormChoice::EvenPlus,
            perturbation: 0.0,
            mode: PerturbationMode::Diagonal,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemParams,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub orbit: Option<OrbitParams>,
    pub quadrature: QuadratureConfig,
    pub simulation: SimulationConfig,
    pub output: OutputConfig,
    pub grid: GridConfig,
    pub dispersion: DispersionConfig,
    pub sweep: SweepConfig,
    pub flow: FlowConfig,
    pub separatrix: SeparatrixConfig,
    pub initial: InitialConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            system: SystemParams::new(1.5, 1.0, 2.0, 0.01),
            orbit: None,
            quadrature: QuadratureConfig::default(),
            simulation: SimulationConfig::default(),
            output: OutputConfig::default(),
            grid: GridConfig::default(),
            dispersion: DispersionConfig::default(),
            sweep: SweepConfig::default(),
            flow: FlowConfig::default(),
            separatrix: SeparatrixConfig::default(),
            initial: InitialConfig::default(),
        }
    }
}

impl RunConfig {
    /// The configured orbit, or the even orbit through `a = b = omega / sqrt 2`.
    pub fn orbit_or_default(&self) -> OrbitParams {
        self.orbit
            .unwrap_or_else(|| OrbitParams::melnikov_point(self.system.omega, 0.0))
    }

    /// Checks every section. The saddle condition is left to the subcommands
    /// that need it, so `orbit` and `simulate` run outside that region.
    pub fn validate(&self) -> Result<(), CliError> {
        match validate_system(self.system) {
            Ok(_) | Err(Error::NoSaddle { .. }) => {}
            Err(e) => return Err(invalid("system")(e)),
        }
        if let Some(orbit) = self.orbit {
            orbit.validate().map_err(invalid("orbit"))?;
        }
        self.quadrature.validate().map_err(invalid("quadrature"))?;
        self.simulation.validate().map_err(invalid("simulation"))?;
        let g = &self.grid;
        if !(g.t_max >= g.t_min && g.n_t >= 1 && g.n_x >= 1) {
            return Err(config_error("grid", "need t_max >= t_min, n_t >= 1 and n_x >= 1"));
        }
        if self.sweep.n == 0 {
            return Err(config_error("sweep", "n must be at least 1"));
        }
        let f = &self.flow;
        if !(f.t_end > 0.0 && f.n_out >= 2 && f.rtol > 0.0 && f.atol > 0.0) {
            return Err(config_error(
                "flow",
                "need t_end > 0, n_out >= 2 and positive tolerances",
            ));
        }
        if self.separatrix.n < 3 {
            return Err(config_error("separatrix", "n must be at least 3"));
        }
        if !self.initial.t0.is_finite() || !self.initial.perturbation.is_finite() {
            return Err(config_error("initial", "t0 and perturbation must be finite"));
        }
        Ok(())
    }
}

fn config_error(section: &'static str, msg: &str) -> CliError {
    CliError::Validation {
        section,
        source: Error::InvalidConfig(msg.into()),
    }
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| {
        let line = e.span().map(|s| text[..s.start].matches('\n').count() + 1).unwrap_or(0);
        let field = e
            .span()
            .and_then(|s| {
                let start = text[..s.start].rfind('\n').map_or(0, |i| i + 1);
                text[start..].lines().next()
            })
            .and_then(|l| l.split_once('='))
            .map(|(k, _)| k.trim().to_string())
            .filter(|k| !k.is_empty() && !k.starts_with('['));
        CliError::Parse {
            line,
            field,
            message: e.message().to_string(),
        }
    })?;
    cfg.validate()?;
    Ok(cfg)
}

/// Serializes a configuration; `parse_config(&emit_config(c))` returns `c`.
pub fn emit_config(cfg: &RunConfig) -> String {
    toml::to_string(cfg).expect("run configuration serializes to TOML")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_fills_defaults() {
        let cfg = parse_config("[system]\nomega = 1.3\nalpha = 0.5\nbeta = 1.0\nepsilon = 0.001\n").unwrap();
        assert_eq!(cfg.system, SystemParams::new(1.3, 0.5, 1.0, 0.001));
        assert_eq!(cfg.quadrature.n_x, 256);
        assert_eq!(cfg.quadrature.tau_cut, 14.0);
        assert_eq!(cfg.simulation.n, 128);
        assert_eq!(cfg.simulation.dt, 1e-4);
        assert_eq!(cfg.output.format, Format::Csv);
    }

    #[test]
    fn empty_document_is_the_default() {
        assert_eq!(parse_config("").unwrap(), RunConfig::default());
    }

    #[test]
    fn omega_out_of_range_is_rejected() {
        let err = parse_config("[system]\nomega = 2.5\nalpha = 1.0\nbeta = 2.0\nepsilon = 0.01\n").unwrap_err();
        assert!(matches!(
            err,
            CliError::Validation {
                source: Error::OutOfRange { name: "omega", .. },
                ..
            }
        ));
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn syntax_errors_carry_line_and_field() {
        let err = parse_config("[system]\nomega = 1.5\nalpha = \"one\"\nbeta = 2.0\nepsilon = 0.01\n").unwrap_err();
        match err {
            CliError::Parse { line, field, .. } => {
                assert_eq!(line, 3);
                assert_eq!(field.as_deref(), Some("alpha"));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_config("[simulation]\nsteps = 3\n"),
            Err(CliError::Parse { .. })
        ));
    }

    #[test]
    fn emit_round_trips() {
        let mut cfg = RunConfig {
            orbit: Some(OrbitParams::new(0.9, 0.8, 0.3, -0.5, 0.4, 1.1)),
            ..Default::default()
        };
        cfg.system.epsilon = 1.0 / 3.0;
        cfg.flow.initial = Some([0.1, 0.2, 0.3, 0.4]);
        cfg.output.path = Some("out/run.csv".into());
        cfg.output.format = Format::Jsonl;
        cfg.simulation.scheme = pvnls_core::pde::Scheme::Etd;
        cfg.initial.kind = InitialKind::QEps;
        assert_eq!(parse_config(&emit_config(&cfg)).unwrap(), cfg);
        let d = RunConfig::default();
        assert_eq!(parse_config(&emit_config(&d)).unwrap(), d);
    }
}
