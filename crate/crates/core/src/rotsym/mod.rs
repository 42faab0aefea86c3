//! Rotationally symmetric CMC surfaces in R^3 bounded by two coaxial
//! circles: profile generation, Fourier-mode Jacobi problems and
//! symmetry-breaking detection.

pub mod detect;
pub mod modes;
pub mod profile;

use thiserror::Error;

use crate::spectral::SpectralError;

pub use detect::{
    conjugate_scan, fingerprint_from_table, rotsym_detect, rotsym_fingerprint, rotsym_verdict, scan_conjugate_family,
    ConjugateInstant, RotsymSweep,
};
pub use modes::{mode_problem, rotsym_morse_index, ModeRow, ModeTable};
pub use profile::{shoot_profile, BoundaryConfig, DelaunayProfile, ProfileCertificate, ShootingOptions};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RotsymError {
    #[error("invalid boundary: {0}")]
    InvalidBoundary(String),
    #[error("invalid sweep: {0}")]
    InvalidSweep(String),
    #[error("no mean curvature joins the boundary circles at r = {r}")]
    NoSolution { r: f64 },
    #[error("generating curve reached the axis at r = {r}")]
    AxisCollision { r: f64 },
    #[error("profile failed certification: {0:?}")]
    ProfileNotCertified(ProfileCertificate),
    #[error("mode cutoff {n_max} too small: lowest eigenvalue there is {lowest}")]
    CutoffTooSmall { n_max: u32, lowest: f64 },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}
