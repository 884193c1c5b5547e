//! φ-function actions for operators with Kronecker-sum structure.
//!
//! A linear operator `K = A_d ⊕ … ⊕ A_1` acting on a `d`-way tensor is never
//! assembled. Instead `φ_ℓ(τK)` is replaced by a Tucker operator with small
//! per-direction factors `φ_ℓ(τA_μ)`, which is exact for `ℓ = 0` and second
//! order accurate otherwise. Exponential integrators built on top of that
//! keep their classical order up to two.
//!
//! Modes are numbered from 0: mode `μ` of a tensor with dimensions
//! `[n_0, …, n_{d-1}]` has length `n_μ` and index 0 runs fastest in memory.

pub mod error;
pub mod harness;
pub mod integrators;
pub mod linalg;
pub mod matfun;
pub mod matrix;
pub mod oracle;
pub mod problems;
pub mod scalar;
pub mod selftest;
pub mod split;
pub mod tensor;
pub mod testing;

pub use error::{Error, Result};
pub use matfun::{expm, phiquad, GllRule, PhiTable};
pub use matrix::{kron, Matrix};
pub use scalar::Scalar;
pub use split::{apply_split_phi, build_split_phi, SplitPhi};
pub use tensor::{kronsum_action, mode_product, tucker, KroneckerSum, Tensor};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/tensors.md")]
    mod tensors {}
    #[doc = include_str!("../../../book/src/phi_functions.md")]
    mod phi_functions {}
    #[doc = include_str!("../../../book/src/splitting.md")]
    mod splitting {}
    #[doc = include_str!("../../../book/src/integrators.md")]
    mod integrators {}
    #[doc = include_str!("../../../book/src/problems.md")]
    mod problems {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
}
