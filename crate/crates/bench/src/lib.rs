//! Shared inputs for the benchmarks.

use pvnls_core::integrable::{homoclinic_field, OrbitForm, Sign};
use pvnls_core::{ComplexField, OrbitParams, SystemParams};

pub const OMEGA: f64 = 1.5;

pub fn params() -> SystemParams {
    SystemParams::new(OMEGA, 1.0, 2.0, 0.01)
}

pub fn orbit() -> OrbitParams {
    OrbitParams::melnikov_point(OMEGA, 0.4)
}

/// The even homoclinic orbit at `t = -2` on `n` points.
pub fn orbit_field(n: usize) -> ComplexField {
    homoclinic_field(-2.0, n, &orbit(), OMEGA, OrbitForm::Even(Sign::Plus)).expect("valid orbit")
}
