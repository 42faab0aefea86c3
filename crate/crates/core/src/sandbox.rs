//! Circle-symmetric pitchfork `f(x) = |x|^4 - lambda |x|^2` on `R^2`, whose
//! trivial branch `x = 0` bifurcates at `lambda = 0` into the orbit of
//! radius `sqrt(lambda / 2)`.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::equivariant::{
    continuation_branch_search, evaluate_criterion, localize_instant, ContinuationOptions, EndpointData,
    EquivariantError, GroupAction,
};
use crate::report::{BifurcationReport, InstantReport, SweepSample};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SandboxConfig {
    pub lambda_interval: [f64; 2],
    /// Parameter at which the branch is searched.
    pub branch_lambda: f64,
    pub seeds: usize,
    pub seed_radius: f64,
    pub tolerance: f64,
    pub samples: usize,
}

impl Default for SandboxConfig {
    fn default() -> Self {
        Self {
            lambda_interval: [-0.1, 0.1],
            branch_lambda: 0.02,
            seeds: 8,
            seed_radius: 0.15,
            tolerance: 1e-8,
            samples: 16,
        }
    }
}

pub fn energy(x: &[f64], lambda: f64) -> f64 {
    let r2 = x[0] * x[0] + x[1] * x[1];
    r2 * r2 - lambda * r2
}

pub fn gradient(x: &[f64], lambda: f64) -> Vec<f64> {
    let r2 = x[0] * x[0] + x[1] * x[1];
    let c = 4.0 * r2 - 2.0 * lambda;
    vec![c * x[0], c * x[1]]
}

/// Hessian on the trivial branch.
pub fn trivial_hessian(lambda: f64) -> DMatrix<f64> {
    DMatrix::identity(2, 2) * (-2.0 * lambda)
}

pub fn branch_radius(lambda: f64) -> f64 {
    (lambda / 2.0).max(0.0).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandboxOutcome {
    pub report: BifurcationReport,
    /// Radii of the nontrivial zeros found at `branch_lambda`.
    pub branch_radii: Vec<f64>,
}

pub fn sandbox_detect(config: &SandboxConfig) -> Result<SandboxOutcome, EquivariantError> {
    let [a, b] = config.lambda_interval;
    let circle = GroupAction::circle(vec![1], false);
    let endpoint = |lambda: f64| EndpointData {
        hessian: trivial_hessian(lambda),
        isotropy: circle.clone(),
        orbit_tangent_dim: 0,
    };
    let mut report = BifurcationReport::new("sandbox", "lambda", config.lambda_interval);
    let n = config.samples.max(1);
    for i in 0..=n {
        let lambda = a + (b - a) * i as f64 / n as f64;
        let sig = crate::equivariant::family_signature(&trivial_hessian(lambda), &circle, 0.0)?;
        report.samples.push(SweepSample {
            parameter: lambda,
            mean_curvature: None,
            mean_curvature_derivative: None,
            morse_index: Some(sig.index),
            modes: Vec::new(),
        });
    }
    let brackets = match localize_instant(
        |l| crate::spectral::dense::count_below(&trivial_hessian(l), 0.0).unwrap_or(usize::MAX),
        a,
        b,
        config.tolerance,
        n,
    ) {
        Ok(v) => v,
        Err(EquivariantError::NoChangeDetected) => Vec::new(),
        Err(e) => return Err(e),
    };
    for br in brackets {
        // A bracket edge may sit exactly on the instant, so the endpoints are
        // pushed out by one tolerance.
        let pad = config.tolerance.max(br.width());
        let verdict = evaluate_criterion(&endpoint(br.lo - pad), &endpoint(br.hi + pad), 0.0)?;
        report.instants.push(InstantReport {
            parameter: br.midpoint(),
            bracket: [br.lo, br.hi],
            source: "trivial branch".into(),
            verdict,
            mean_curvature_derivative: None,
            isolated: Some(true),
            symmetry_breaking: Some(true),
        });
    }
    let seeds: Vec<Vec<f64>> = (0..config.seeds)
        .map(|k| {
            let t = TAU * k as f64 / config.seeds as f64;
            vec![config.seed_radius * t.cos(), config.seed_radius * t.sin()]
        })
        .collect();
    let search = continuation_branch_search(
        gradient,
        config.branch_lambda,
        &seeds,
        &[0.0, 0.0],
        &circle,
        &ContinuationOptions::default(),
    );
    let branch_radii = search
        .zeros
        .iter()
        .map(|z| z.coords.iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    Ok(SandboxOutcome { report, branch_radii })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equivariant::Fired;

    #[test]
    fn pitchfork_fires_and_finds_orbit() {
        let out = sandbox_detect(&SandboxConfig::default()).unwrap();
        assert_eq!(out.report.instants.len(), 1);
        let inst = &out.report.instants[0];
        assert!(inst.parameter.abs() <= 1e-8);
        assert_eq!(inst.verdict.fired, Fired::MorseJump, "{:?}", inst.verdict);
        assert_eq!(out.branch_radii.len(), 1);
        assert!((out.branch_radii[0] - branch_radius(0.02)).abs() < 1e-8);
    }

    #[test]
    fn gradient_matches_energy() {
        let x = [0.3, -0.2];
        let h = 1e-6;
        let g = gradient(&x, 0.1);
        for k in 0..2 {
            let mut p = x;
            let mut m = x;
            p[k] += h;
            m[k] -= h;
            let fd = (energy(&p, 0.1) - energy(&m, 0.1)) / (2.0 * h);
            assert!((fd - g[k]).abs() < 1e-8);
        }
    }
}
