//! Dirichlet Sturm-Liouville problems `-(p S')' + q S = lambda w S` on
//! `[0, L]` with coefficients sampled on a uniform grid.
//!
//! Three independent routes share one problem type:
//! - [`sl_eigen`]: second-order finite differences, symmetric tridiagonal
//!   reduction, bisection on Sturm counts;
//! - [`eigencount_below`]: Prüfer phase of the initial value problem;
//! - [`conjugate_value`]: the `lambda = 0` initial value problem itself.
//!
//! Between grid nodes the IVP routes interpolate coefficients linearly.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::tridiagonal::SymTridiagonal;
use super::SpectralError;
use crate::ode::{DormandPrince, OdeError};

/// Minimum number of interior grid nodes.
pub const MIN_INTERIOR_NODES: usize = 16;
/// Interior grid size used by production scans.
pub const DEFAULT_INTERIOR_NODES: usize = 512;
/// Minimum number of grid intervals per computed mode.
const INTERVALS_PER_MODE: usize = 8;
const OVERFLOW_GUARD: f64 = 1e100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SturmLiouvilleProblem {
    p: Vec<f64>,
    q: Vec<f64>,
    w: Vec<f64>,
    length: f64,
}

impl SturmLiouvilleProblem {
    /// Coefficients sampled at `N + 2` equally spaced nodes, endpoints
    /// included.
    pub fn new(p: Vec<f64>, q: Vec<f64>, w: Vec<f64>, length: f64) -> Result<Self, SpectralError> {
        let invalid = |msg: String| Err(SpectralError::InvalidProblem(msg));
        if !(length.is_finite() && length > 0.0) {
            return invalid(format!("interval length {length} must be positive"));
        }
        if p.len() != q.len() || p.len() != w.len() {
            return invalid(format!(
                "coefficient lengths differ: p {}, q {}, w {}",
                p.len(),
                q.len(),
                w.len()
            ));
        }
        if p.len() < MIN_INTERIOR_NODES + 2 {
            return invalid(format!(
                "{} interior nodes, at least {MIN_INTERIOR_NODES} required",
                p.len().saturating_sub(2)
            ));
        }
        if let Some(i) = p.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
            return invalid(format!("p must be positive, p[{i}] = {}", p[i]));
        }
        if let Some(i) = w.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
            return invalid(format!("w must be positive, w[{i}] = {}", w[i]));
        }
        if let Some(i) = q.iter().position(|v| !v.is_finite()) {
            return invalid(format!("q must be finite, q[{i}] = {}", q[i]));
        }
        Ok(Self { p, q, w, length })
    }

    /// Samples closures at `interior + 2` nodes.
    pub fn from_fns(
        p: impl Fn(f64) -> f64,
        q: impl Fn(f64) -> f64,
        w: impl Fn(f64) -> f64,
        length: f64,
        interior: usize,
    ) -> Result<Self, SpectralError> {
        let h = length / (interior as f64 + 1.0);
        let nodes: Vec<f64> = (0..interior + 2).map(|i| i as f64 * h).collect();
        Self::new(
            nodes.iter().map(|&s| p(s)).collect(),
            nodes.iter().map(|&s| q(s)).collect(),
            nodes.iter().map(|&s| w(s)).collect(),
            length,
        )
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn w(&self) -> &[f64] {
        &self.w
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn interior_nodes(&self) -> usize {
        self.p.len() - 2
    }

    pub fn spacing(&self) -> f64 {
        self.length / (self.p.len() - 1) as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.p.len()).map(|i| i as f64 * h).collect()
    }

    /// Symmetric form `W^{-1/2} A W^{-1/2}` of the finite-difference operator.
    fn tridiagonal(&self) -> SymTridiagonal {
        let n = self.interior_nodes();
        let h2 = self.spacing().powi(2);
        let half = |i: usize| 0.5 * (self.p[i] + self.p[i + 1]);
        let diag = (1..=n)
            .map(|i| ((half(i - 1) + half(i)) / h2 + self.q[i]) / self.w[i])
            .collect();
        let off = (1..n)
            .map(|i| -half(i) / h2 / (self.w[i] * self.w[i + 1]).sqrt())
            .collect();
        SymTridiagonal::new(diag, off)
    }

    /// Number of finite-difference eigenvalues strictly below `lambda`.
    pub fn fd_count_below(&self, lambda: f64) -> usize {
        self.tridiagonal().count_below(lambda)
    }

    /// Gershgorin bound on the spectral radius of the finite-difference
    /// operator.
    pub fn fd_spectral_radius(&self) -> f64 {
        self.tridiagonal().norm_bound()
    }

    /// Size of the continuous operator at the scale of the interval,
    /// `max(p / w) (pi / L)^2 + max |q / w|`. Unlike the finite-difference
    /// radius it does not grow with refinement, so it is the reference for
    /// relative zero thresholds.
    pub fn operator_scale(&self) -> f64 {
        let ratio = |v: &[f64]| {
            v.iter()
                .zip(&self.w)
                .map(|(a, w)| (a / w).abs())
                .fold(0.0_f64, f64::max)
        };
        ratio(&self.p) * (PI / self.length).powi(2) + ratio(&self.q)
    }

    /// Coefficients `(p, q, w)` at `s`, linear between nodes.
    fn coefficients_at(&self, s: f64) -> (f64, f64, f64) {
        let h = self.spacing();
        let last = self.p.len() - 1;
        let x = (s / h).clamp(0.0, last as f64);
        let i = (x.floor() as usize).min(last - 1);
        let t = x - i as f64;
        let lerp = |v: &[f64]| v[i] + t * (v[i + 1] - v[i]);
        (lerp(&self.p), lerp(&self.q), lerp(&self.w))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenResult {
    pub eigenvalues: Vec<f64>,
    /// Samples at every grid node, endpoints included, normalized so that
    /// the trapezoidal `w`-norm is one.
    pub eigenfunctions: Vec<Vec<f64>>,
    pub h: f64,
}

/// Number of strict sign changes, ignoring entries below `1e-10` of the
/// largest magnitude.
pub fn sign_changes(v: &[f64]) -> usize {
    let scale = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let floor = 1e-10 * scale;
    let mut last = 0.0_f64;
    let mut count = 0;
    for &x in v {
        if x.abs() <= floor {
            continue;
        }
        if last != 0.0 && x.signum() != last.signum() {
            count += 1;
        }
        last = x;
    }
    count
}

/// Lowest `count` eigenpairs of the finite-difference discretization.
pub fn sl_eigen(prob: &SturmLiouvilleProblem, count: usize) -> Result<EigenResult, SpectralError> {
    if count == 0 {
        return Err(SpectralError::InvalidProblem("mode count must be at least 1".into()));
    }
    let interior = prob.interior_nodes();
    if count * INTERVALS_PER_MODE > interior + 1 {
        return Err(SpectralError::GridTooCoarse { mode: count, interior });
    }
    let t = prob.tridiagonal();
    let eigenvalues = t.lowest_eigenvalues(count);
    let vectors = t.eigenvectors(&eigenvalues);
    let h = prob.spacing();
    let mut eigenfunctions = Vec::with_capacity(count);
    for (k, y) in vectors.into_iter().enumerate() {
        let mut f = Vec::with_capacity(interior + 2);
        f.push(0.0);
        f.extend(y.iter().enumerate().map(|(i, v)| v / prob.w[i + 1].sqrt()));
        f.push(0.0);
        let norm: f64 = f.iter().zip(&prob.w).map(|(s, w)| w * s * s).sum::<f64>() * h;
        let first = f.iter().copied().find(|v| v.abs() > 1e-12).unwrap_or(1.0);
        let scale = first.signum() / norm.sqrt();
        f.iter_mut().for_each(|v| *v *= scale);
        if sign_changes(&f) != k {
            return Err(SpectralError::GridTooCoarse { mode: k + 1, interior });
        }
        eigenfunctions.push(f);
    }
    Ok(EigenResult {
        eigenvalues,
        eigenfunctions,
        h,
    })
}

fn map_ode(e: OdeError) -> SpectralError {
    match e {
        OdeError::StepUnderflow { t } | OdeError::MaxSteps { t } => SpectralError::StiffIntegration { at: t },
        OdeError::NonFinite { t } => SpectralError::BlowUp { at: t },
    }
}

/// Prüfer phase `theta(L)` of the solution with `S(0) = 0`, where
/// `S = R sin(theta)` and `p S' = R cos(theta)`.
pub fn prufer_phase(prob: &SturmLiouvilleProblem, lambda: f64) -> Result<f64, SpectralError> {
    let rhs = |s: f64, y: &[f64; 1]| {
        let (p, q, w) = prob.coefficients_at(s);
        let (sin, cos) = y[0].sin_cos();
        [cos * cos / p + (lambda * w - q) * sin * sin]
    };
    let solver = DormandPrince {
        rtol: 1e-10,
        atol: 1e-11,
        ..DormandPrince::default()
    };
    let h = prob.spacing();
    let mut y = [0.0];
    for i in 0..prob.p.len() - 1 {
        let a = i as f64 * h;
        y = solver.integrate(&rhs, a, a + h, y).map_err(map_ode)?;
    }
    Ok(y[0])
}

/// Number of eigenvalues strictly below `lambda0`, by Prüfer phase
/// counting.
pub fn eigencount_below(prob: &SturmLiouvilleProblem, lambda0: f64) -> Result<usize, SpectralError> {
    let theta = prufer_phase(prob, lambda0)?;
    let count = (theta / PI).ceil() - 1.0;
    Ok(count.max(0.0) as usize)
}

/// `S(L)` for `-(p S')' + (q - lambda w) S = 0`, `S(0) = 0`, `S'(0) = 1`.
pub fn shooting_value(prob: &SturmLiouvilleProblem, lambda: f64) -> Result<f64, SpectralError> {
    let rhs = |s: f64, y: &[f64; 2]| {
        let (p, q, w) = prob.coefficients_at(s);
        [y[1] / p, (q - lambda * w) * y[0]]
    };
    let solver = DormandPrince {
        rtol: 1e-11,
        atol: 1e-13,
        ..DormandPrince::default()
    };
    let h = prob.spacing();
    let mut y = [0.0, prob.p[0]];
    for i in 0..prob.p.len() - 1 {
        let a = i as f64 * h;
        y = solver.integrate(&rhs, a, a + h, y).map_err(map_ode)?;
        if y[0].abs() > OVERFLOW_GUARD || y[1].abs() > OVERFLOW_GUARD {
            return Err(SpectralError::BlowUp { at: a + h });
        }
    }
    Ok(y[0])
}

/// `S(L)` of the `lambda = 0` initial value problem; its zeros along a
/// family are the conjugate instants.
pub fn conjugate_value(prob: &SturmLiouvilleProblem) -> Result<f64, SpectralError> {
    shooting_value(prob, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant(q: f64, length: f64, interior: usize) -> SturmLiouvilleProblem {
        SturmLiouvilleProblem::from_fns(|_| 1.0, |_| q, |_| 1.0, length, interior).unwrap()
    }

    #[test]
    fn classic_spectrum() {
        let r = sl_eigen(&constant(0.0, PI, 400), 3).unwrap();
        for (k, lam) in r.eigenvalues.iter().enumerate() {
            let exact = ((k + 1) * (k + 1)) as f64;
            assert!((lam - exact).abs() < 1e-3 * exact, "{lam}");
        }
    }

    #[test]
    fn shifted_and_rescaled_problems() {
        let r = sl_eigen(&constant(-1.0, PI, 400), 1).unwrap();
        assert!(r.eigenvalues[0].abs() < 1e-4);
        let r = sl_eigen(&constant(0.0, 2.0 * PI, 400), 1).unwrap();
        assert!((r.eigenvalues[0] - 0.25).abs() < 1e-5);
    }

    #[test]
    fn prufer_counts() {
        let prob = constant(0.0, PI, 64);
        assert_eq!(eigencount_below(&prob, 5.0).unwrap(), 2);
        assert_eq!(eigencount_below(&prob, 0.5).unwrap(), 0);
        assert_eq!(eigencount_below(&constant(-1.0, PI, 64), 0.5).unwrap(), 1);
    }

    #[test]
    fn conjugate_values() {
        assert!(conjugate_value(&constant(-1.0, PI, 64)).unwrap().abs() < 1e-8);
        assert!((conjugate_value(&constant(0.0, 1.0, 64)).unwrap() - 1.0).abs() < 1e-10);
        assert!(conjugate_value(&constant(-4.0, PI / 2.0, 64)).unwrap().abs() < 1e-8);
    }

    #[test]
    fn rejects_coarse_grids_and_bad_coefficients() {
        assert!(matches!(
            sl_eigen(&constant(0.0, PI, 16), 3),
            Err(SpectralError::GridTooCoarse { .. })
        ));
        let bad = SturmLiouvilleProblem::from_fns(|s| s - 1.0, |_| 0.0, |_| 1.0, 2.0, 32);
        assert!(matches!(bad, Err(SpectralError::InvalidProblem(_))));
    }
}
