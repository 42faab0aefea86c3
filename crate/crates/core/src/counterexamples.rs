//! Two families with a degenerate instant and a Morse index jump but no
//! bifurcation. In both the parameter derivative vanishes at the instant,
//! and the detector must refuse to fire.
//!
//! * Planar: critical points in `y` of `f(x, y) = 4y^3 + 6xy^2 + 3xy - 3x^2 y`
//!   with `x` as the parameter. They form one curve tangent to the `y` axis
//!   at the origin, on which `x` is not locally injective.
//! * Caps: the part above the `xy`-plane of the sphere of radius
//!   `sqrt(1 + r^2)` centered at `(0, 0, r)`, all bounded by the unit circle.
//!   `H = 1 / sqrt(1 + r^2)` peaks at the half-sphere `r = 0`, which carries
//!   the Jacobi field `cos(theta) = <e_z, N>`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::equivariant::{
    apply_derivative_gate, evaluate_criterion, CriterionVerdict, EndpointData, EquivariantError, GroupAction,
};
use crate::report::{BifurcationReport, InstantReport, ModeSample, SweepSample};
use crate::spectral::SymTridiagonal;

/// Derivative threshold of both gate tests.
pub const DERIVATIVE_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CounterexampleError {
    #[error("{what} = {value} lies outside {domain}")]
    OutOfDomain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },
    #[error("grid needs at least {min} cells, got {got}")]
    GridTooSmall { min: usize, got: usize },
    #[error(transparent)]
    Equivariant(#[from] EquivariantError),
}

pub fn planar_f(x: f64, y: f64) -> f64 {
    4.0 * y.powi(3) + 6.0 * x * y * y + 3.0 * x * y - 3.0 * x * x * y
}

pub fn planar_fy(x: f64, y: f64) -> f64 {
    12.0 * y * y + 12.0 * x * y - 3.0 * x + 3.0 * x * x
}

pub fn planar_fyy(x: f64, y: f64) -> f64 {
    24.0 * y + 12.0 * x
}

/// The branch of `{f_y = 0}` through the origin, `x = (1 - 4y - sqrt(1 - 8y)) / 2`.
pub fn planar_critical_curve(y: f64) -> Result<f64, CounterexampleError> {
    if !(y <= 0.125) {
        return Err(CounterexampleError::OutOfDomain {
            what: "y",
            value: y,
            domain: "y <= 1/8",
        });
    }
    Ok(0.5 * (1.0 - 4.0 * y - (1.0 - 8.0 * y).sqrt()))
}

/// `dx/dy` along the curve; it vanishes at the origin.
pub fn planar_curve_slope(y: f64) -> f64 {
    -2.0 + 2.0 / (1.0 - 8.0 * y).sqrt()
}

/// Roots in `y` of `f_y(x, .)` found by sign changes on a uniform grid of
/// `[-1, 1]`, independent of the closed-form curve.
pub fn planar_roots(x: f64, cells: usize) -> Vec<f64> {
    let h = 2.0 / cells as f64;
    let mut roots = Vec::new();
    let mut prev = planar_fy(x, -1.0);
    for i in 1..=cells {
        let y = -1.0 + h * i as f64;
        let cur = planar_fy(x, y);
        if prev == 0.0 {
            roots.push(y - h);
        } else if prev.signum() != cur.signum() && cur != 0.0 {
            let (mut lo, mut hi) = (y - h, y);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if planar_fy(x, mid).signum() == planar_fy(x, lo).signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        prev = cur;
    }
    roots
}

/// Point of the curve at signed arc length `t` from the origin.
pub fn planar_point(t: f64) -> (f64, f64) {
    let speed = |y: f64| (1.0 + planar_curve_slope(y).powi(2)).sqrt();
    // Gauss-Legendre with 5 nodes on [0, y].
    const NODES: [f64; 5] = [
        0.0,
        -0.538_469_310_105_683,
        0.538_469_310_105_683,
        -0.906_179_845_938_664,
        0.906_179_845_938_664,
    ];
    const WEIGHTS: [f64; 5] = [
        0.568_888_888_888_889,
        0.478_628_670_499_366,
        0.478_628_670_499_366,
        0.236_926_885_056_189,
        0.236_926_885_056_189,
    ];
    let arc = |y: f64| {
        let steps = 16;
        let h = y / steps as f64;
        (0..steps)
            .map(|i| {
                let mid = h * (i as f64 + 0.5);
                NODES
                    .iter()
                    .zip(WEIGHTS)
                    .map(|(n, w)| w * speed(mid + 0.5 * h * n))
                    .sum::<f64>()
                    * 0.5
                    * h
            })
            .sum::<f64>()
    };
    // Arc length exceeds |y|, so the root lies between 0 and t.
    let (mut lo, mut hi) = if t >= 0.0 { (0.0, t) } else { (t, 0.0) };
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if arc(mid) < t {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let y = 0.5 * (lo + hi);
    (planar_critical_curve(y).expect("|t| small keeps y below 1/8"), y)
}

/// `dx/dt` along the unit-speed curve.
pub fn planar_parameter_derivative(t: f64) -> f64 {
    let (_, y) = planar_point(t);
    let s = planar_curve_slope(y);
    s / (1.0 + s * s).sqrt()
}

/// Half-width of the arc-length window of the planar gate test.
pub const PLANAR_WINDOW: f64 = 0.05;

fn planar_endpoint(t: f64) -> EndpointData {
    let (x, y) = planar_point(t);
    EndpointData {
        hessian: nalgebra::DMatrix::from_element(1, 1, planar_fyy(x, y)),
        isotropy: GroupAction::trivial(1),
        orbit_tangent_dim: 0,
    }
}

/// Runs the criterion on the planar family with the trivial group. The
/// Hessian `f_yy` changes sign at the origin, so the index drops from 1 to
/// 0, but `dx/dt = 0` there and the derivative gate blocks the verdict.
pub fn planar_gate_test() -> Result<BifurcationReport, CounterexampleError> {
    let (a, b) = (-PLANAR_WINDOW, PLANAR_WINDOW);
    let mut report = BifurcationReport::new("planar", "t", [a, b]);
    let samples = 20;
    for i in 0..=samples {
        let t = a + (b - a) * i as f64 / samples as f64;
        let (x, y) = planar_point(t);
        let negative = usize::from(planar_fyy(x, y) < 0.0);
        report.samples.push(SweepSample {
            parameter: t,
            mean_curvature: None,
            mean_curvature_derivative: Some(planar_parameter_derivative(t)),
            morse_index: Some(negative),
            modes: vec![ModeSample {
                mode: "y".into(),
                negative_count: negative,
                conjugate_value: None,
            }],
        });
    }
    // f_yy along the curve is 24 y + 12 x(y), increasing in t.
    let hess = |t: f64| {
        let (x, y) = planar_point(t);
        planar_fyy(x, y)
    };
    let (mut lo, mut hi) = (a, b);
    for _ in 0..200 {
        if hi - lo <= 1e-14 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if hess(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let instant = 0.5 * (lo + hi);
    let mut verdict = evaluate_criterion(&planar_endpoint(a), &planar_endpoint(b), 0.0)?;
    let derivative = planar_parameter_derivative(instant);
    apply_derivative_gate(&mut verdict, derivative, DERIVATIVE_THRESHOLD);
    verdict
        .notes
        .push("x is not locally injective along the critical curve".into());
    report.instants.push(InstantReport {
        parameter: instant,
        bracket: [a, b],
        source: "f_yy".into(),
        verdict,
        mean_curvature_derivative: Some(derivative),
        isolated: Some(true),
        symmetry_breaking: None,
    });
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapCurvature {
    pub h: f64,
    pub dh: f64,
}

pub fn cap_mean_curvature(r: f64) -> Result<CapCurvature, CounterexampleError> {
    if !(-1.0..=1.0).contains(&r) {
        return Err(CounterexampleError::OutOfDomain {
            what: "r",
            value: r,
            domain: "[-1, 1]",
        });
    }
    let q = 1.0 + r * r;
    Ok(CapCurvature {
        h: 1.0 / q.sqrt(),
        dh: -r / (q * q.sqrt()),
    })
}

/// Polar angle of the cap boundary, measured from the top of the sphere.
pub fn cap_opening(r: f64) -> f64 {
    (-r / (1.0 + r * r).sqrt()).acos()
}

/// Rotationally invariant part of `-Delta` on the unit-sphere cap
/// `theta < opening`, by finite volumes on nodes `theta_i = i h`,
/// `i = 0..cells - 1`, Dirichlet at `theta = opening`. Returns the stiffness
/// matrix as (diagonal, off-diagonal) and the cell areas.
fn cap_stiffness(opening: f64, cells: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let h = opening / cells as f64;
    let flux = |i: usize| (h * (i as f64 + 0.5)).sin() / h;
    let mut diag = vec![0.0; cells];
    let mut off = vec![0.0; cells - 1];
    let mut area = vec![0.0; cells];
    for i in 0..cells {
        let left = if i == 0 { 0.0 } else { flux(i - 1) };
        let right = flux(i);
        diag[i] = left + right;
        if i + 1 < cells {
            off[i] = -right;
        }
        let a = if i == 0 { 0.0 } else { h * (i as f64 - 0.5) };
        area[i] = (a.cos() - (h * (i as f64 + 0.5)).cos()).max(0.0);
    }
    (diag, off, area)
}

/// `M^{-1/2} K M^{-1/2}` for stiffness `K` and areas `M`.
fn cap_operator(opening: f64, cells: usize) -> SymTridiagonal {
    let (diag, off, area) = cap_stiffness(opening, cells);
    let d = diag.iter().zip(&area).map(|(k, m)| k / m).collect();
    let o = off
        .iter()
        .enumerate()
        .map(|(i, k)| k / (area[i] * area[i + 1]).sqrt())
        .collect();
    SymTridiagonal::new(d, o)
}

/// Lowest eigenvalue of the Jacobi operator `-Delta - |A|^2` on the cap of
/// parameter `r`, restricted to rotationally invariant functions. The
/// sphere has radius `R = sqrt(1 + r^2)` and `|A|^2 = 2 / R^2`.
pub fn cap_lowest_jacobi_eigenvalue(r: f64, cells: usize) -> f64 {
    let op = cap_operator(cap_opening(r), cells);
    (op.lowest_eigenvalues(1)[0] - 2.0) / (1.0 + r * r)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapResidual {
    pub cells: usize,
    /// Largest `|(Delta + 2) cos(theta)|` over the nodes.
    pub residual: f64,
    /// `|cos(theta)|` at the boundary node.
    pub boundary_value: f64,
}

/// Applies the discrete `Delta + 2` on the half-sphere to `cos(theta)`.
pub fn cap_degeneracy_check(cells: usize) -> Result<CapResidual, CounterexampleError> {
    if cells < 4 {
        return Err(CounterexampleError::GridTooSmall { min: 4, got: cells });
    }
    let opening = std::f64::consts::FRAC_PI_2;
    let h = opening / cells as f64;
    let (diag, off, area) = cap_stiffness(opening, cells);
    let f: Vec<f64> = (0..=cells).map(|i| (h * i as f64).cos()).collect();
    let residual = (0..cells)
        .map(|i| {
            let mut kf = diag[i] * f[i];
            if i > 0 {
                kf += off[i - 1] * f[i - 1];
            }
            // The boundary node carries f = cos(pi/2) through the last flux.
            kf += if i + 1 < cells {
                off[i] * f[i + 1]
            } else {
                -(h * (i as f64 + 0.5)).sin() / h * f[cells]
            };
            (kf / area[i] - 2.0 * f[i]).abs()
        })
        .fold(0.0, f64::max);
    Ok(CapResidual {
        cells,
        residual,
        boundary_value: f[cells].abs(),
    })
}

/// Cells of the cap grid used by the gate test.
pub const CAP_CELLS: usize = 4000;

/// Runs the detector on the caps `r` in `[a, b]`: the index of the
/// rotationally invariant Jacobi spectrum jumps where the lowest eigenvalue
/// crosses zero, but `H'` vanishes there.
pub fn cap_gate_test(interval: [f64; 2], samples: usize) -> Result<BifurcationReport, CounterexampleError> {
    let [a, b] = interval;
    for r in [a, b] {
        cap_mean_curvature(r)?;
    }
    if !(a < b) || samples == 0 {
        return Err(CounterexampleError::OutOfDomain {
            what: "interval start",
            value: a,
            domain: "an increasing interval with at least one sample",
        });
    }
    let mut report = BifurcationReport::new("caps", "r", interval);
    let index = |r: f64| usize::from(cap_lowest_jacobi_eigenvalue(r, CAP_CELLS) < 0.0);
    for i in 0..=samples {
        let r = a + (b - a) * i as f64 / samples as f64;
        let c = cap_mean_curvature(r)?;
        report.samples.push(SweepSample {
            parameter: r,
            mean_curvature: Some(c.h),
            mean_curvature_derivative: Some(c.dh),
            morse_index: Some(index(r)),
            modes: vec![ModeSample {
                mode: "0".into(),
                negative_count: index(r),
                conjugate_value: None,
            }],
        });
    }
    let (ia, ib) = (index(a), index(b));
    if ia == ib {
        return Ok(report);
    }
    let (mut lo, mut hi) = (a, b);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if index(mid) == ia {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let instant = 0.5 * (lo + hi);
    let summary = |r: f64| {
        let hessian = nalgebra::DMatrix::from_element(1, 1, cap_lowest_jacobi_eigenvalue(r, CAP_CELLS));
        crate::equivariant::family_signature(&hessian, &GroupAction::trivial(1), 0.0)
    };
    let mut verdict = CriterionVerdict::from_endpoint_summaries(Vec::new(), summary(a)?, summary(b)?);
    let derivative = cap_mean_curvature(instant)?.dh;
    apply_derivative_gate(&mut verdict, derivative, DERIVATIVE_THRESHOLD);
    report.instants.push(InstantReport {
        parameter: instant,
        bracket: [a, b],
        source: "mode 0".into(),
        verdict,
        mean_curvature_derivative: Some(derivative),
        isolated: Some(true),
        symmetry_breaking: None,
    });
    Ok(report)
}
