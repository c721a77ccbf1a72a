//! Dynamics of `x`-independent fields `p = sqrt(I1) e^{i theta1}`,
//! `q = sqrt(I2) e^{i theta2}`: the perturbed polar system, its rescaling near
//! the resonance circle `I1 + I2 = omega^2`, the leading-order Hamiltonian
//! system, fixed points and their eigenvalues, and integrators.

mod fixed;
mod flow;
mod separatrix;
mod system;

pub use fixed::{
    closed_form_eigenvalues, default_seed_grid, expected_action, find_fixed_points, fixed_lines,
    fixed_point_eigenvalues, FixedLine, FixedLines, FixedPointKind, FixedPointRecord, FixedPointSearch,
};
pub use flow::{integrate_flow, rk4_fixed, FlowKind, Tolerance, Trajectory};
pub use separatrix::{separatrix_levelset, Separatrix, SeparatrixGrid};
pub use system::{
    constant_k, hamiltonian_reduced, jacobian_polar, restricted_hamiltonian, rhs_leading, rhs_polar, rhs_rescaled,
    ReducedState, RescaledState,
};
