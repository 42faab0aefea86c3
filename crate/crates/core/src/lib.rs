//! Detection of equivariant bifurcation instants in one-parameter families
//! of critical points of group-invariant variational problems.

// Range checks are written `!(x > 0.0)` so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod berger;
pub mod clifford;
pub mod counterexamples;
pub mod equivariant;
pub mod ode;
pub mod report;
pub mod rotsym;
pub mod sandbox;
pub mod spectral;
