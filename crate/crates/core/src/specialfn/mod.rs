//! `ψₙ`, its zeros, and real spherical harmonics.

pub mod harmonics;
pub mod psi;
pub mod zeros;

pub use harmonics::{
    azimuthal, harmonic_index, sph_harm, sph_harm_h, tri_index, HarmonicSet, NormalizedLegendre,
};
pub use psi::{psi, psi_pair, psi_second_derivative, PsiConfig, PsiEval};
pub use zeros::{find_zeros, ZeroEntry, ZeroKind, ZeroRequest, ZeroTable};
