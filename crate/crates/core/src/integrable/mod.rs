//! Exact objects of the integrable vector NLS: plane waves, the Lax pair and
//! its explicit eigenfunctions, the Backlund-Darboux transformation, the
//! resulting homoclinic orbits, and the linear stability of plane waves.

mod lax;
mod linear;
mod orbit;

pub use lax::{
    bd_transform, darboux_orbit, eigenfunction, eigenfunction_at_lambda, lax_matrices, lax_residuals,
    EigenfunctionValue, LaxPoint,
};
pub use linear::{dispersion, unstable_eigenfunction, unstable_mode_count};
pub(crate) use orbit::profile_jet as orbit_profile;
pub use orbit::{
    eval_h_even, eval_h_general, eval_h_jet, homoclinic_field, homoclinic_jet, homoclinic_orbit, plane_wave,
    HomoclinicJet, HomoclinicSample, OrbitForm, ProfileJet,
};

/// Selects one of the two branches `+` / `-` appearing in the closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}
