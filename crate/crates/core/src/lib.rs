//! Homoclinic structures of the perturbed vector nonlinear Schrodinger system
//!
//! ```text
//! p_t = i{p_xx + 1/2[(|p|^2 + |q|^2) - omega^2] p} + eps[p_xx - alpha p - beta]
//! q_t = i{q_xx + 1/2[(|p|^2 + |q|^2) - omega^2] q} + eps[q_xx - alpha q - beta]
//! ```
//!
//! on `x in [0, 2 pi)`: explicit homoclinic orbits of the integrable limit,
//! Melnikov integrals and the persistence curve `alpha(omega)`, the reduced
//! four-dimensional dynamics of `x`-independent fields, and a pseudospectral
//! simulator for the full system.

pub mod error;
pub mod field;
pub mod functionals;
pub mod integrable;
pub mod melnikov;
pub mod params;
pub mod pde;
pub mod quadrature;
pub mod reduced;

pub use error::{Error, ErrorCategory, Result};
pub use field::{spectral_derivative, ComplexField, SpectralGrid};
pub use params::{derive_constants, validate_system, DerivedConstants, OrbitParams, SystemParams};
pub use quadrature::QuadratureConfig;
