//! Generating curves of rotationally symmetric CMC surfaces spanning two
//! coaxial circles.
//!
//! The curve `(x(s), z(s))` is parametrized by arc length with inclination
//! `phi`:
//!
//! ```text
//! x' = cos(phi),  z' = sin(phi),  phi' = 2H - sin(phi) / x
//! ```
//!
//! The orientation makes the unit cylinder `x = 1` have `H = 1/2`. Along any
//! solution `x sin(phi) - H x^2` is constant.

use serde::{Deserialize, Serialize};

use super::RotsymError;
use crate::ode::rk4_step;

/// Closest approach to the rotation axis tolerated during integration.
pub const AXIS_GUARD: f64 = 1e-8;
/// Tolerance on boundary interpolation and on unit speed.
pub const BOUNDARY_TOLERANCE: f64 = 1e-8;
/// Tolerance on the pointwise mean curvature.
pub const CURVATURE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryConfig {
    pub rho_low: f64,
    pub rho_high: f64,
    pub h: f64,
}

impl BoundaryConfig {
    pub fn new(rho_low: f64, rho_high: f64, h: f64) -> Result<Self, RotsymError> {
        for (name, v) in [("rho_low", rho_low), ("rho_high", rho_high), ("h", h)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(RotsymError::InvalidBoundary(format!("{name} = {v} must be positive")));
            }
        }
        Ok(Self { rho_low, rho_high, h })
    }
}

/// Numerical settings for [`shoot_profile`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShootingOptions {
    /// Admissible mean curvature window for the bisection.
    pub h_window: (f64, f64),
    /// Start of the bracket search; defaults to the window midpoint.
    pub h_guess: Option<f64>,
    /// Initial spacing of the bracket search around the guess.
    pub h_probe: f64,
    /// RK4 step length used while shooting.
    pub step: f64,
    /// Arc-length budget before the shot is declared a miss.
    pub max_length: f64,
    /// Interior nodes of the returned arc-length grid.
    pub interior: usize,
    /// The curve ends at this crossing of the upper plane, counted from 1.
    pub crossing: u32,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        Self {
            h_window: (-4.0, 4.0),
            h_guess: None,
            h_probe: 1e-3,
            step: 1e-3,
            max_length: 60.0,
            interior: crate::spectral::sturm_liouville::DEFAULT_INTERIOR_NODES,
            crossing: 1,
        }
    }
}

/// Certificate attached to every returned profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileCertificate {
    pub unit_speed_error: f64,
    pub boundary_error: f64,
    pub mean_curvature_error: f64,
    pub certified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelaunayProfile {
    pub boundary: BoundaryConfig,
    /// Sweep coordinate: the inclination at the lower circle.
    pub r: f64,
    pub mean_curvature: f64,
    pub length: f64,
    pub s: Vec<f64>,
    pub x: Vec<f64>,
    pub z: Vec<f64>,
    pub phi: Vec<f64>,
    /// Squared norm of the second fundamental form at each node.
    pub a2: Vec<f64>,
    pub certificate: ProfileCertificate,
}

impl DelaunayProfile {
    pub fn min_x(&self) -> f64 {
        self.x.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_x(&self) -> f64 {
        self.x.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// The same surface with the opposite unit normal: the curve is
    /// traversed backwards, which negates `H` and maps `phi` to `phi + pi`.
    pub fn reversed_orientation(&self) -> Self {
        let mut out = self.clone();
        out.mean_curvature = -self.mean_curvature;
        out.phi = self.phi.iter().map(|p| p + std::f64::consts::PI).collect();
        out
    }
}

fn rhs(h_mean: f64) -> impl Fn(f64, &[f64; 3]) -> [f64; 3] {
    move |_s, y| {
        let (sin, cos) = y[2].sin_cos();
        [cos, sin, 2.0 * h_mean - sin / y[0]]
    }
}

/// Outcome of a single shot with fixed mean curvature.
#[derive(Debug, Clone, Copy)]
struct Shot {
    length: f64,
    end: [f64; 3],
}

#[derive(Debug, Clone, Copy)]
enum Miss {
    Axis,
    NoHit,
}

/// Integrates from the lower circle until the curve reaches the upper plane
/// for the configured number of times.
fn shoot(boundary: &BoundaryConfig, r: f64, h_mean: f64, opts: &ShootingOptions) -> Result<Shot, Miss> {
    let f = rhs(h_mean);
    let dt = opts.step;
    let mut s = 0.0;
    let mut y = [boundary.rho_low, 0.0, r];
    let mut crossings = 0;
    while s < opts.max_length {
        let next = rk4_step(&f, s, &y, dt);
        if next[0] <= AXIS_GUARD || !next.iter().all(|v| v.is_finite()) {
            return Err(Miss::Axis);
        }
        let above = y[1] >= boundary.h;
        if (next[1] >= boundary.h) != above {
            crossings += 1;
            if crossings == opts.crossing.max(1) {
                // Refine the crossing within this step by bisection on the
                // partial step length.
                let (mut lo, mut hi) = (0.0, dt);
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if (rk4_step(&f, s, &y, mid)[1] >= boundary.h) == above {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let t = 0.5 * (lo + hi);
                return Ok(Shot {
                    length: s + t,
                    end: rk4_step(&f, s, &y, t),
                });
            }
        }
        y = next;
        s += dt;
    }
    Err(Miss::NoHit)
}

fn mismatch(boundary: &BoundaryConfig, r: f64, h_mean: f64, opts: &ShootingOptions) -> Option<f64> {
    shoot(boundary, r, h_mean, opts)
        .ok()
        .map(|shot| shot.end[0] - boundary.rho_high)
}

/// Solves for the mean curvature that joins the two circles from initial
/// inclination `r`, and samples the resulting curve.
pub fn shoot_profile(
    boundary: &BoundaryConfig,
    r: f64,
    opts: &ShootingOptions,
) -> Result<DelaunayProfile, RotsymError> {
    let h_mean = solve_mean_curvature(boundary, r, opts)?;
    let profile = sample_profile(boundary, r, h_mean, opts)?;
    if !profile.certificate.certified {
        return Err(RotsymError::ProfileNotCertified(profile.certificate));
    }
    Ok(profile)
}

/// Mean curvature for which the curve from inclination `r` ends on the upper
/// circle, nearest to the configured guess.
pub fn solve_mean_curvature(boundary: &BoundaryConfig, r: f64, opts: &ShootingOptions) -> Result<f64, RotsymError> {
    let (lo_w, hi_w) = opts.h_window;
    let guess = opts.h_guess.unwrap_or(0.5 * (lo_w + hi_w)).clamp(lo_w, hi_w);
    let no_solution = || RotsymError::NoSolution { r };
    // Expanding search outward from the guess for the nearest sign change.
    let g0 = mismatch(boundary, r, guess, opts);
    if g0 == Some(0.0) {
        return Ok(guess);
    }
    let mut step = opts.h_probe;
    let mut left = (guess, g0);
    let mut right = (guess, g0);
    loop {
        let mut progressed = false;
        for dir in [1.0, -1.0] {
            let (prev_h, prev_g) = if dir > 0.0 { right } else { left };
            let h = (prev_h + dir * step).clamp(lo_w, hi_w);
            if h == prev_h {
                continue;
            }
            progressed = true;
            let g = mismatch(boundary, r, h, opts);
            if let (Some(a), Some(b)) = (prev_g, g) {
                if a.signum() != b.signum() || b == 0.0 {
                    if let Some(root) = bisect_mean_curvature(boundary, r, opts, prev_h, a, h, b) {
                        return Ok(root);
                    }
                }
            }
            if dir > 0.0 {
                right = (h, g);
            } else {
                left = (h, g);
            }
        }
        if !progressed {
            return Err(no_solution());
        }
        step *= 1.5;
    }
}

/// Bisection on a sign-changing bracket; rejects brackets that straddle a
/// jump of the first-hit map rather than a root.
fn bisect_mean_curvature(
    boundary: &BoundaryConfig,
    r: f64,
    opts: &ShootingOptions,
    mut a: f64,
    mut ga: f64,
    mut b: f64,
    gb: f64,
) -> Option<f64> {
    if gb == 0.0 {
        return Some(b);
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid == a || mid == b {
            break;
        }
        let gm = mismatch(boundary, r, mid, opts)?;
        if gm == 0.0 {
            return Some(mid);
        }
        if gm.signum() == ga.signum() {
            a = mid;
            ga = gm;
        } else {
            b = mid;
        }
    }
    let root = 0.5 * (a + b);
    let residual = mismatch(boundary, r, root, opts)?;
    (residual.abs() <= 0.1 * BOUNDARY_TOLERANCE).then_some(root)
}

/// Samples the curve for a known mean curvature on a uniform arc-length
/// grid and attaches its certificate, which the caller must check.
pub fn sample_profile(
    boundary: &BoundaryConfig,
    r: f64,
    h_mean: f64,
    opts: &ShootingOptions,
) -> Result<DelaunayProfile, RotsymError> {
    let shot = shoot(boundary, r, h_mean, opts).map_err(|m| match m {
        Miss::Axis => RotsymError::AxisCollision { r },
        Miss::NoHit => RotsymError::NoSolution { r },
    })?;
    let length = shot.length;
    let intervals = opts.interior + 1;
    let cell = length / intervals as f64;
    let sub = (cell / opts.step).ceil().max(1.0) as usize;
    let dt = cell / sub as f64;
    let f = rhs(h_mean);
    let mut y = [boundary.rho_low, 0.0, r];
    let mut samples = Vec::with_capacity(intervals + 1);
    samples.push(y);
    for i in 0..intervals {
        for k in 0..sub {
            y = rk4_step(&f, (i * sub + k) as f64 * dt, &y, dt);
        }
        if y[0] <= AXIS_GUARD {
            return Err(RotsymError::AxisCollision { r });
        }
        samples.push(y);
    }
    let s: Vec<f64> = (0..=intervals).map(|i| i as f64 * cell).collect();
    let x: Vec<f64> = samples.iter().map(|v| v[0]).collect();
    let z: Vec<f64> = samples.iter().map(|v| v[1]).collect();
    let phi: Vec<f64> = samples.iter().map(|v| v[2]).collect();
    let a2 = x
        .iter()
        .zip(&phi)
        .map(|(&x, &p)| {
            let k2 = p.sin() / x;
            let k1 = 2.0 * h_mean - k2;
            k1 * k1 + k2 * k2
        })
        .collect();
    let mut profile = DelaunayProfile {
        boundary: *boundary,
        r,
        mean_curvature: h_mean,
        length,
        s,
        x,
        z,
        phi,
        a2,
        certificate: ProfileCertificate {
            unit_speed_error: f64::NAN,
            boundary_error: f64::NAN,
            mean_curvature_error: f64::NAN,
            certified: false,
        },
    };
    profile.certificate = certify(&profile);
    Ok(profile)
}

/// Unit speed and pointwise mean curvature from sixth-order finite
/// differences of the sampled coordinates, plus boundary interpolation.
pub fn certify(profile: &DelaunayProfile) -> ProfileCertificate {
    let n = profile.s.len();
    let h = profile.s[1] - profile.s[0];
    let mut unit_speed_error = 0.0_f64;
    let mut mean_curvature_error = 0.0_f64;
    for i in 0..n {
        let (start, weights1, weights2) = stencil(i, n, h);
        let d = |v: &[f64], w: &[f64]| w.iter().enumerate().map(|(k, c)| c * v[start + k]).sum::<f64>();
        let (xd, zd) = (d(&profile.x, &weights1), d(&profile.z, &weights1));
        let (xdd, zdd) = (d(&profile.x, &weights2), d(&profile.z, &weights2));
        let speed2 = xd * xd + zd * zd;
        unit_speed_error = unit_speed_error.max((speed2 - 1.0).abs());
        let k1 = (xd * zdd - xdd * zd) / speed2.powf(1.5);
        let k2 = zd / speed2.sqrt() / profile.x[i];
        let pointwise = 0.5 * (k1 + k2);
        mean_curvature_error = mean_curvature_error.max((pointwise - profile.mean_curvature).abs());
    }
    let b = profile.boundary;
    let last = n - 1;
    let boundary_error = [
        (profile.x[0] - b.rho_low).abs(),
        profile.z[0].abs(),
        (profile.x[last] - b.rho_high).abs(),
        (profile.z[last] - profile.z[0] - b.h).abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    ProfileCertificate {
        unit_speed_error,
        boundary_error,
        mean_curvature_error,
        certified: unit_speed_error <= BOUNDARY_TOLERANCE
            && boundary_error <= BOUNDARY_TOLERANCE
            && mean_curvature_error <= CURVATURE_TOLERANCE,
    }
}

/// Seven-point first- and second-derivative weights at node `i`, shifted
/// inward near the ends.
fn stencil(i: usize, n: usize, h: f64) -> (usize, Vec<f64>, Vec<f64>) {
    let start = i.saturating_sub(3).min(n - 7);
    let offsets: Vec<f64> = (0..7).map(|k| (start + k) as f64 - i as f64).collect();
    let w = fornberg(0.0, &offsets, 2);
    let w1 = w[1].iter().map(|c| c / h).collect();
    let w2 = w[2].iter().map(|c| c / (h * h)).collect();
    (start, w1, w2)
}

/// Finite-difference weights for derivatives `0..=order` at `x0` on the
/// nodes `xs` (Fornberg's recursion).
pub fn fornberg(x0: f64, xs: &[f64], order: usize) -> Vec<Vec<f64>> {
    let n = xs.len();
    let mut c = vec![vec![0.0; n]; order + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}
