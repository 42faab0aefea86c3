//! Slice charts: an isotropy-invariant complement of the orbit tangent
//! space, parametrized through an exponential map.

use nalgebra::{DMatrix, DVector};

use super::group::{max_abs, GroupAction};
use super::projector::{invariant_complement, INVARIANCE_TOLERANCE};
use super::{orthogonal_complement, orthonormal_span, EquivariantError};

/// Exponential map `(base, tangent) -> point`.
pub type ExpMap = fn(&DVector<f64>, &DVector<f64>) -> DVector<f64>;

/// Coordinates below this are treated as zero when computing isotropy.
pub const ISOTROPY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct SliceChart {
    pub base: DVector<f64>,
    /// Orthonormal basis of the slice tangent space.
    pub basis: DMatrix<f64>,
    pub orbit_tangent: DMatrix<f64>,
    pub radius: f64,
    pub isotropy: GroupAction,
    pub exp: Option<ExpMap>,
}

impl SliceChart {
    /// Straight chart through `base` along an arbitrary basis, for callers
    /// that already know their slice.
    pub fn affine(base: DVector<f64>, basis: &DMatrix<f64>, radius: f64) -> Self {
        let d = base.len();
        Self {
            basis: orthonormal_span(basis, 1e-10),
            orbit_tangent: DMatrix::zeros(d, 0),
            isotropy: GroupAction::trivial(d),
            base,
            radius,
            exp: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.base.len()
    }

    pub fn point(&self, coords: &[f64]) -> DVector<f64> {
        let v = &self.basis * DVector::from_column_slice(coords);
        match self.exp {
            Some(exp) => exp(&self.base, &v),
            None => &self.base + v,
        }
    }

    /// Orthonormal basis of the normal space of the slice at its base.
    pub fn normal_basis(&self) -> DMatrix<f64> {
        orthogonal_complement(&self.basis)
    }

    /// Components of `y - base` normal to the slice; they vanish exactly on
    /// a straight slice.
    pub fn normal_coordinates(&self, y: &DVector<f64>) -> DVector<f64> {
        self.normal_basis().transpose() * (y - &self.base)
    }
}

/// Builds a slice through `x` as the isotropy-invariant complement of the
/// given orbit tangent space. The chart map is `v -> exp_x(v)`, straight
/// translation by default.
pub fn build_slice_chart(
    x: &DVector<f64>,
    orbit_tangent_basis: &DMatrix<f64>,
    action: &GroupAction,
    radius: f64,
    exp: Option<ExpMap>,
) -> Result<SliceChart, EquivariantError> {
    let d = action.dim();
    if x.len() != d {
        return Err(EquivariantError::DimensionMismatch {
            expected: d,
            actual: x.len(),
        });
    }
    if !(radius.is_finite() && radius > 0.0) {
        return Err(EquivariantError::InvalidInput(format!(
            "slice radius {radius} must be positive"
        )));
    }
    let isotropy = action.isotropy(x, ISOTROPY_TOLERANCE);
    let tangent = orthonormal_span(orbit_tangent_basis, 1e-10);
    if tangent.ncols() < orbit_tangent_basis.ncols() {
        return Err(EquivariantError::RankDeficient);
    }
    let id = DMatrix::<f64>::identity(d, d);
    let outside = &id - &tangent * tangent.transpose();
    for h in isotropy.test_elements() {
        let defect = max_abs(&(&outside * &h * &tangent));
        if defect > INVARIANCE_TOLERANCE {
            return Err(EquivariantError::OrbitBasisNotInvariant { defect });
        }
    }
    let basis = invariant_complement(&tangent, &isotropy)?;
    Ok(SliceChart {
        base: x.clone(),
        basis,
        orbit_tangent: tangent,
        radius,
        isotropy,
        exp,
    })
}
