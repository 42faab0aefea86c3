//! Haar averaging of projectors and invariant complements.

use nalgebra::DMatrix;

use super::group::{max_abs, GroupAction};
use super::{orthonormal_span, EquivariantError};

pub const IDEMPOTENCE_TOLERANCE: f64 = 1e-10;
pub const INVARIANCE_TOLERANCE: f64 = 1e-8;

/// Averages `g P g^{-1}` over the group. The result is a projector with the
/// same image as `P` that commutes with the action, so its kernel is an
/// invariant complement of the image.
pub fn haar_project(p: &DMatrix<f64>, action: &GroupAction) -> Result<DMatrix<f64>, EquivariantError> {
    let d = action.dim();
    if p.nrows() != d || p.ncols() != d {
        return Err(EquivariantError::DimensionMismatch {
            expected: d,
            actual: p.nrows().max(p.ncols()),
        });
    }
    let scale = max_abs(p).max(1.0);
    let defect = max_abs(&(p * p - p));
    if defect > IDEMPOTENCE_TOLERANCE * scale * scale {
        return Err(EquivariantError::NotIdempotent { defect });
    }
    let id = DMatrix::<f64>::identity(d, d);
    for g in action.test_elements() {
        let defect = max_abs(&((&id - p) * &g * p));
        if defect > INVARIANCE_TOLERANCE * scale {
            return Err(EquivariantError::ImageNotInvariant { defect });
        }
    }
    let mut out = DMatrix::zeros(d, d);
    for (w, g) in action.quadrature() {
        out += w * (&g * p * g.transpose());
    }
    Ok(out)
}

/// Orthonormal basis of an invariant complement of the span of `basis`.
pub fn invariant_complement(basis: &DMatrix<f64>, action: &GroupAction) -> Result<DMatrix<f64>, EquivariantError> {
    let d = action.dim();
    if basis.nrows() != d {
        return Err(EquivariantError::DimensionMismatch {
            expected: d,
            actual: basis.nrows(),
        });
    }
    let q = orthonormal_span(basis, 1e-10);
    if q.ncols() < basis.ncols() {
        return Err(EquivariantError::RankDeficient);
    }
    if q.ncols() == 0 {
        return Ok(DMatrix::identity(d, d));
    }
    let averaged = haar_project(&(&q * q.transpose()), action)?;
    let kernel = DMatrix::identity(d, d) - averaged;
    // The kernel of a projector is the range of I - P, whose nonzero
    // singular values are at least one.
    let out = orthonormal_span(&kernel, 0.5);
    debug_assert_eq!(out.ncols() + q.ncols(), d);
    Ok(out)
}
