//! Finite-dimensional slice machinery and the two equivariant bifurcation
//! criteria (Morse index jump, negative isotropy representation jump).

pub mod continuation;
pub mod criterion;
pub mod degree;
pub mod fingerprint;
pub mod group;
pub mod projector;
pub mod slice;

use thiserror::Error;

use crate::spectral::SpectralError;

pub use continuation::{continuation_branch_search, BranchPoint, BranchSearch, ContinuationOptions, SeedFailure};
pub use criterion::{
    apply_derivative_gate, evaluate_criterion, family_signature, localize_instant, negative_eigenspace, Bracket,
    CriterionVerdict, EndpointData, FamilySignature, Fired, GateFailure, NegativeEigendata,
};
pub use degree::{brouwer_degree, intersection_degree, intersection_degree_check};
pub use fingerprint::{
    fingerprint, fingerprints_equivalent, Fingerprint, FingerprintEntry, FingerprintKind, IrrepLabel,
};
pub use group::{nice_group, CircleAction, DiscretePart, FiniteGroup, GroupAction, NiceDescriptor, Niceness};
pub use projector::{haar_project, invariant_complement};
pub use slice::{build_slice_chart, ExpMap, SliceChart};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EquivariantError {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("generator {index} is not orthogonal (defect {defect:e})")]
    NotOrthogonal { index: usize, defect: f64 },
    #[error("group generated by the given matrices exceeds {limit} elements")]
    GroupTooLarge { limit: usize },
    #[error("matrix is not a projector (defect {defect:e})")]
    NotIdempotent { defect: f64 },
    #[error("projector image is not invariant (defect {defect:e})")]
    ImageNotInvariant { defect: f64 },
    #[error("subspace is not invariant (defect {defect:e})")]
    SubspaceNotInvariant { defect: f64 },
    #[error("basis is rank deficient")]
    RankDeficient,
    #[error("character inner product {value} is not an integer")]
    NonIntegerMultiplicity { value: f64 },
    #[error("fingerprints come from different action types")]
    ActionMismatch,
    #[error("isotropy does not preserve the orbit tangent space (defect {defect:e})")]
    OrbitBasisNotInvariant { defect: f64 },
    #[error("no {dim}-dimensional subspace linearizes the map (condition {condition:e})")]
    DegenerateLinearization { dim: usize, condition: f64 },
    #[error("a second zero lies inside the ball (degree {outer} on the sphere, {inner} on the half sphere)")]
    RadiusNotIsolating { outer: i64, inner: i64 },
    #[error("map vanishes on the sampled sphere")]
    ZeroOnSphere,
    #[error("degree computation supports codimension 1 to 3, got {0}")]
    UnsupportedCodimension(usize),
    #[error("base point is off the slice (distance {distance:e})")]
    NotOnSlice { distance: f64 },
    #[error("family data agrees at both ends and at every sample")]
    NoChangeDetected,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// Orthonormal basis of the column span of `a`, dropping directions whose
/// singular value is below `rel_tol` times the largest.
pub(crate) fn orthonormal_span(a: &nalgebra::DMatrix<f64>, rel_tol: f64) -> nalgebra::DMatrix<f64> {
    let n = a.nrows();
    if a.ncols() == 0 || n == 0 {
        return nalgebra::DMatrix::zeros(n, 0);
    }
    let svd = a.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return nalgebra::DMatrix::zeros(n, 0);
    }
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let keep: Vec<usize> = order
        .into_iter()
        .filter(|&i| svd.singular_values[i] > rel_tol * smax)
        .collect();
    let mut out = nalgebra::DMatrix::zeros(n, keep.len());
    for (c, &i) in keep.iter().enumerate() {
        out.set_column(c, &u.column(i));
    }
    out
}

/// Orthonormal basis of the orthogonal complement of the column span of an
/// orthonormal `basis`.
pub(crate) fn orthogonal_complement(basis: &nalgebra::DMatrix<f64>) -> nalgebra::DMatrix<f64> {
    let n = basis.nrows();
    let proj = nalgebra::DMatrix::identity(n, n) - basis * basis.transpose();
    orthonormal_span(&proj, 0.5)
}
