//! Computational workbench for invariants of classifiable C*-algebras.
//!
//! - [`intlinalg`]: Smith normal form, kernels and cokernels over `Z`.
//! - [`ktheory`]: six-term exact sequence solver and the standard examples.
//! - [`walk`]: reflecting/absorbing random walks on `N_0` with exact oracles.
//! - [`simplex`]: random towers of finite-dimensional simplices.
//! - [`sampler`]: random strongly K-contractible algebra descriptors.
//! - [`transport`]: optimal matching, unitary orbit and `W_∞` distances.
//! - [`cuntz`]: Cuntz semigroup models for one-dimensional NCCW complexes.

pub mod cuntz;
pub mod intlinalg;
pub mod ktheory;
pub mod rng;
pub mod sampler;
pub mod stats;
pub mod simplex;
pub mod transport;
pub mod walk;
