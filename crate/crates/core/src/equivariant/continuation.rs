//! Newton search for nontrivial zeros of a gradient near a detected
//! instant, deduplicated modulo the residual isotropy.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::group::GroupAction;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuationOptions {
    /// Minimum distance from the trivial branch, and between orbits.
    pub separation: f64,
    /// Residual norm accepted as a zero.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Central-difference step for the Jacobian.
    pub fd_step: f64,
    /// Largest accepted distance from the seed.
    pub max_travel: f64,
}

impl Default for ContinuationOptions {
    fn default() -> Self {
        Self {
            separation: 1e-4,
            tolerance: 1e-12,
            max_iterations: 100,
            fd_step: 1e-6,
            max_travel: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchPoint {
    pub coords: Vec<f64>,
    pub residual: f64,
    pub distance_from_trivial: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedFailure {
    pub seed: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchSearch {
    pub zeros: Vec<BranchPoint>,
    /// Seeds whose Newton iteration diverged; these are not fatal.
    pub divergences: Vec<SeedFailure>,
}

/// Runs Newton's method from every seed on `gradient(., lambda)` in chart
/// coordinates. The Jacobian is inverted in the least-squares sense, so the
/// iteration tolerates the singular directions along group orbits. Zeros
/// closer than `separation` to the trivial point, or to the orbit of an
/// earlier zero, are dropped.
pub fn continuation_branch_search<F>(
    gradient: F,
    lambda: f64,
    seeds: &[Vec<f64>],
    trivial: &[f64],
    residual_isotropy: &GroupAction,
    opts: &ContinuationOptions,
) -> BranchSearch
where
    F: Fn(&[f64], f64) -> Vec<f64>,
{
    let trivial = DVector::from_column_slice(trivial);
    let mut zeros: Vec<BranchPoint> = Vec::new();
    let mut divergences = Vec::new();
    for (index, seed) in seeds.iter().enumerate() {
        match newton(&gradient, lambda, seed, opts) {
            Ok((x, residual)) => {
                let distance_from_trivial = residual_isotropy.orbit_distance(&x, &trivial);
                if distance_from_trivial < opts.separation {
                    continue;
                }
                let duplicate = zeros.iter().any(|z| {
                    residual_isotropy.orbit_distance(&x, &DVector::from_column_slice(&z.coords)) < opts.separation
                });
                if !duplicate {
                    zeros.push(BranchPoint {
                        coords: x.iter().copied().collect(),
                        residual,
                        distance_from_trivial,
                    });
                }
            }
            Err(reason) => divergences.push(SeedFailure { seed: index, reason }),
        }
    }
    BranchSearch { zeros, divergences }
}

fn newton<F>(gradient: &F, lambda: f64, seed: &[f64], opts: &ContinuationOptions) -> Result<(DVector<f64>, f64), String>
where
    F: Fn(&[f64], f64) -> Vec<f64>,
{
    let start = DVector::from_column_slice(seed);
    let mut x = start.clone();
    let eval = |x: &DVector<f64>| DVector::from_vec(gradient(x.as_slice(), lambda));
    let mut g = eval(&x);
    for _ in 0..opts.max_iterations {
        let residual = g.norm();
        if !residual.is_finite() {
            return Err("non-finite residual".into());
        }
        if residual <= opts.tolerance {
            return Ok((x, residual));
        }
        let n = x.len();
        let mut jac = DMatrix::zeros(g.len(), n);
        for k in 0..n {
            let mut plus = x.clone();
            let mut minus = x.clone();
            plus[k] += opts.fd_step;
            minus[k] -= opts.fd_step;
            jac.set_column(k, &((eval(&plus) - eval(&minus)) / (2.0 * opts.fd_step)));
        }
        let svd = jac.svd(true, true);
        let cutoff = 1e-10 * svd.singular_values.max();
        let step = svd
            .solve(&g, cutoff)
            .map_err(|e| format!("least-squares solve failed: {e}"))?;
        if step.norm() == 0.0 {
            return Err(format!("singular Jacobian with residual {residual:e}"));
        }
        x -= &step;
        if (&x - &start).norm() > opts.max_travel {
            return Err("left the search region".into());
        }
        let next = eval(&x);
        if step.norm() <= 1e-15 * x.norm().max(1.0) {
            let r = next.norm();
            return if r <= 1e3 * opts.tolerance {
                Ok((x, r))
            } else {
                Err(format!("stalled with residual {r:e}"))
            };
        }
        g = next;
    }
    Err(format!(
        "no convergence in {} iterations (residual {:e})",
        opts.max_iterations,
        g.norm()
    ))
}
