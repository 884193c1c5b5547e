//! Dense matrix functions for the small per-direction factors.

mod expm;
mod gll;
mod phiquad;

pub use expm::expm;
pub use gll::{GllRule, DEFAULT_GLL_NODES};
pub use phiquad::{phi_square_step, phiquad, phiquad_scaled, scaling_exponent, PhiTable};

pub(crate) use phiquad::factorial;
