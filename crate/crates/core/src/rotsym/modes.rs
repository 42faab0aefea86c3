//! Fourier-mode decomposition of the Jacobi operator of a surface of
//! revolution.
//!
//! A normal variation `S(s) cos(n theta)` or `S(s) sin(n theta)` reduces the
//! index form to the Dirichlet problem
//!
//! ```text
//! -(x S')' + (n^2 / x - x |A|^2) S = lambda x S   on [0, L].
//! ```

use serde::{Deserialize, Serialize};

use super::profile::DelaunayProfile;
use super::RotsymError;
use crate::spectral::{conjugate_value, SpectralError, SturmLiouvilleProblem};

/// Relative zero threshold for eigenvalues, as a fraction of
/// [`SturmLiouvilleProblem::operator_scale`].
pub const ZERO_RELATIVE: f64 = 1e-7;

pub fn mode_problem(profile: &DelaunayProfile, n: u32) -> Result<SturmLiouvilleProblem, RotsymError> {
    if !profile.certificate.certified {
        return Err(RotsymError::ProfileNotCertified(profile.certificate));
    }
    let min_x = profile.min_x();
    if min_x <= 1e-8 {
        return Err(RotsymError::AxisCollision { r: profile.r });
    }
    let n2 = f64::from(n * n);
    let q = profile
        .x
        .iter()
        .zip(&profile.a2)
        .map(|(&x, &a2)| n2 / x - x * a2)
        .collect();
    Ok(SturmLiouvilleProblem::new(
        profile.x.clone(),
        q,
        profile.x.clone(),
        profile.length,
    )?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeRow {
    pub n: u32,
    /// Eigenvalues below `-zero_tolerance`.
    pub negative_count: usize,
    /// Eigenvalues within `zero_tolerance` of zero.
    pub zero_count: usize,
    pub zero_tolerance: f64,
    pub lowest_eigenvalue: f64,
    pub conjugate_value: f64,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeTable {
    pub rows: Vec<ModeRow>,
}

impl ModeTable {
    /// Morse index: mode 0 counts once, every other mode twice (cosine and
    /// sine).
    pub fn index(&self) -> usize {
        self.rows
            .iter()
            .map(|r| {
                if r.n == 0 {
                    r.negative_count
                } else {
                    2 * r.negative_count
                }
            })
            .sum()
    }

    /// Dimension of the kernel, weighted as in [`ModeTable::index`].
    pub fn nullity(&self) -> usize {
        self.rows
            .iter()
            .map(|r| if r.n == 0 { r.zero_count } else { 2 * r.zero_count })
            .sum()
    }

    pub fn row(&self, n: u32) -> Option<&ModeRow> {
        self.rows.iter().find(|r| r.n == n)
    }
}

pub fn mode_row(profile: &DelaunayProfile, n: u32) -> Result<ModeRow, RotsymError> {
    let prob = mode_problem(profile, n)?;
    let tol = ZERO_RELATIVE * prob.operator_scale();
    let below = prob.fd_count_below(-tol);
    let below_or_zero = prob.fd_count_below(tol);
    let lowest = crate::spectral::sl_eigen(&prob, 1)?.eigenvalues[0];
    let conj = match conjugate_value(&prob) {
        Ok(v) => v,
        Err(SpectralError::BlowUp { .. }) => f64::INFINITY,
        Err(e) => return Err(e.into()),
    };
    Ok(ModeRow {
        n,
        negative_count: below,
        zero_count: below_or_zero - below,
        zero_tolerance: tol,
        lowest_eigenvalue: lowest,
        conjugate_value: conj,
        degenerate: below_or_zero > below,
    })
}

/// Morse index over modes `0..=n_max` with its per-mode table. The cutoff is
/// certified by a positive lowest eigenvalue at `n_max`.
pub fn rotsym_morse_index(profile: &DelaunayProfile, n_max: u32) -> Result<(usize, ModeTable), RotsymError> {
    let rows = (0..=n_max)
        .map(|n| mode_row(profile, n))
        .collect::<Result<Vec<_>, _>>()?;
    let last = rows.last().expect("at least mode 0");
    if last.lowest_eigenvalue <= last.zero_tolerance {
        return Err(RotsymError::CutoffTooSmall {
            n_max,
            lowest: last.lowest_eigenvalue,
        });
    }
    let table = ModeTable { rows };
    Ok((table.index(), table))
}
