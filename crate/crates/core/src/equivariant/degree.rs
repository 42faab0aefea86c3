//! Brouwer degree of maps `R^d -> R^d` on small spheres, `d <= 3`, and the
//! nonempty-intersection test built on it.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector, Vector3};

use super::slice::SliceChart;
use super::EquivariantError;

/// Largest condition number accepted for the linearization.
pub const MAX_CONDITION: f64 = 1e8;
const LOOP_SAMPLES: usize = 256;
const MAX_ANGLE_STEP: f64 = PI / 8.0;
const MAX_LOOP_DEPTH: u32 = 40;

/// Degree of `f` on the sphere of the given radius around `center`: sign
/// change for `d = 1`, winding number for `d = 2`, total solid angle over a
/// triangulated sphere for `d = 3`.
pub fn brouwer_degree<F>(f: F, center: &[f64], radius: f64) -> Result<i64, EquivariantError>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let d = center.len();
    let eval = |u: &[f64]| -> Result<Vec<f64>, EquivariantError> {
        let p: Vec<f64> = center.iter().zip(u).map(|(c, v)| c + radius * v).collect();
        let y = f(&p);
        if y.len() != d {
            return Err(EquivariantError::DimensionMismatch {
                expected: d,
                actual: y.len(),
            });
        }
        if y.iter().all(|v| *v == 0.0) || y.iter().any(|v| !v.is_finite()) {
            return Err(EquivariantError::ZeroOnSphere);
        }
        Ok(y)
    };
    match d {
        1 => {
            let lo = eval(&[-1.0])?[0];
            let hi = eval(&[1.0])?[0];
            Ok(((hi.signum() - lo.signum()) / 2.0).round() as i64)
        }
        2 => {
            let angle = |t: f64| -> Result<f64, EquivariantError> {
                let y = eval(&[t.cos(), t.sin()])?;
                Ok(y[1].atan2(y[0]))
            };
            let mut total = 0.0;
            let h = TAU / LOOP_SAMPLES as f64;
            let mut prev = angle(0.0)?;
            for i in 0..LOOP_SAMPLES {
                let (t0, t1) = (i as f64 * h, (i + 1) as f64 * h);
                let next = angle(t1)?;
                total += winding_increment(&angle, t0, prev, t1, next, 0)?;
                prev = next;
            }
            let turns = total / TAU;
            round_degree(turns)
        }
        3 => {
            let mut last = f64::NAN;
            for level in 3..=6 {
                let (verts, tris) = icosphere(level);
                let images = verts
                    .iter()
                    .map(|v| eval(v.as_slice()).map(|y| Vector3::new(y[0], y[1], y[2]).normalize()))
                    .collect::<Result<Vec<_>, _>>()?;
                let total: f64 = tris
                    .iter()
                    .map(|&[a, b, c]| solid_angle(&images[a], &images[b], &images[c]))
                    .sum();
                let turns = total / (4.0 * PI);
                if (turns - turns.round()).abs() < 0.05 && (turns - last).abs() < 0.05 {
                    return Ok(turns.round() as i64);
                }
                last = turns;
            }
            round_degree(last)
        }
        other => Err(EquivariantError::UnsupportedCodimension(other)),
    }
}

fn round_degree(turns: f64) -> Result<i64, EquivariantError> {
    if (turns - turns.round()).abs() < 0.05 {
        Ok(turns.round() as i64)
    } else {
        Err(EquivariantError::ZeroOnSphere)
    }
}

/// Angle swept between two loop samples, bisecting until every step is
/// small enough to unwrap unambiguously.
fn winding_increment(
    angle: &dyn Fn(f64) -> Result<f64, EquivariantError>,
    t0: f64,
    a0: f64,
    t1: f64,
    a1: f64,
    depth: u32,
) -> Result<f64, EquivariantError> {
    let step = wrap(a1 - a0);
    if step.abs() <= MAX_ANGLE_STEP {
        return Ok(step);
    }
    if depth >= MAX_LOOP_DEPTH {
        return Err(EquivariantError::ZeroOnSphere);
    }
    let tm = 0.5 * (t0 + t1);
    let am = angle(tm)?;
    Ok(winding_increment(angle, t0, a0, tm, am, depth + 1)? + winding_increment(angle, tm, am, t1, a1, depth + 1)?)
}

fn wrap(a: f64) -> f64 {
    let mut a = a % TAU;
    if a > PI {
        a -= TAU;
    } else if a <= -PI {
        a += TAU;
    }
    a
}

/// Signed solid angle of a spherical triangle (Van Oosterom-Strackee).
fn solid_angle(a: &Vector3<f64>, b: &Vector3<f64>, c: &Vector3<f64>) -> f64 {
    let num = a.dot(&b.cross(c));
    let den = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
    2.0 * num.atan2(den)
}

/// Subdivided icosahedron with outward-oriented faces.
fn icosphere(level: u32) -> (Vec<Vector3<f64>>, Vec<[usize; 3]>) {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<Vector3<f64>> = [
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ]
    .iter()
    .map(|v| Vector3::new(v[0], v[1], v[2]).normalize())
    .collect();
    let mut tris: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..level {
        let mut cache = std::collections::HashMap::new();
        let mut midpoint = |i: usize, j: usize, verts: &mut Vec<Vector3<f64>>| -> usize {
            let key = (i.min(j), i.max(j));
            *cache.entry(key).or_insert_with(|| {
                verts.push((verts[i] + verts[j]).normalize());
                verts.len() - 1
            })
        };
        let mut next = Vec::with_capacity(tris.len() * 4);
        for &[a, b, c] in &tris {
            let ab = midpoint(a, b, &mut verts);
            let bc = midpoint(b, c, &mut verts);
            let ca = midpoint(c, a, &mut verts);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        tris = next;
    }
    (verts.to_vec(), tris)
}

/// Degree of `m -> N^T (chi(a0, m) - base)` around `m0`, where `N` spans the
/// normal space of the slice. When `m` has more coordinates than the slice
/// codimension, the map is restricted to the best-conditioned subspace of
/// its linearization.
pub fn intersection_degree<F>(
    chi: F,
    slice: &SliceChart,
    a0: &[f64],
    m0: &[f64],
    radius: f64,
) -> Result<i64, EquivariantError>
where
    F: Fn(&[f64], &[f64]) -> Vec<f64>,
{
    let normal = slice.normal_basis();
    let d = normal.ncols();
    if !(1..=3).contains(&d) {
        return Err(EquivariantError::UnsupportedCodimension(d));
    }
    let s = m0.len();
    if s < d {
        return Err(EquivariantError::DimensionMismatch { expected: d, actual: s });
    }
    let project = |m: &[f64]| -> DVector<f64> {
        let y = DVector::from_vec(chi(a0, m));
        normal.transpose() * (y - &slice.base)
    };
    let g0 = project(m0);
    let scale = slice.base.norm().max(1.0);
    if g0.norm() > 1e-8 * scale {
        return Err(EquivariantError::NotOnSlice { distance: g0.norm() });
    }
    let directions = if s == d {
        DMatrix::identity(s, s)
    } else {
        let step = 1e-6 * radius.max(1e-3);
        let mut jac = DMatrix::zeros(d, s);
        for k in 0..s {
            let mut plus = m0.to_vec();
            let mut minus = m0.to_vec();
            plus[k] += step;
            minus[k] -= step;
            jac.set_column(k, &((project(&plus) - project(&minus)) / (2.0 * step)));
        }
        let svd = jac.svd(false, true);
        let vt = svd.v_t.expect("right singular vectors requested");
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
        let smax = svd.singular_values[order[0]];
        let smin = svd.singular_values[order[d - 1]];
        // Measured against unit scale so that a uniformly tiny Jacobian
        // counts as degenerate.
        let condition = if smin > 0.0 {
            smax.max(1.0) / smin
        } else {
            f64::INFINITY
        };
        if !(condition <= MAX_CONDITION) {
            return Err(EquivariantError::DegenerateLinearization { dim: d, condition });
        }
        let mut dirs = DMatrix::zeros(s, d);
        for (c, &i) in order.iter().take(d).enumerate() {
            dirs.set_column(c, &vt.row(i).transpose());
        }
        dirs
    };
    let restricted = |u: &[f64]| -> Vec<f64> {
        let shift = &directions * DVector::from_column_slice(u);
        let m: Vec<f64> = m0.iter().zip(shift.iter()).map(|(a, b)| a + b).collect();
        project(&m).iter().copied().collect()
    };
    let origin = vec![0.0; d];
    let outer = brouwer_degree(restricted, &origin, radius)?;
    let inner = brouwer_degree(restricted, &origin, 0.5 * radius)?;
    if outer != inner {
        return Err(EquivariantError::RadiusNotIsolating { outer, inner });
    }
    Ok(outer)
}

/// True when the intersection degree is nonzero, which certifies that
/// `chi(a, M)` meets the slice for every `a` near `a0`.
pub fn intersection_degree_check<F>(
    chi: F,
    slice: &SliceChart,
    a0: &[f64],
    m0: &[f64],
    radius: f64,
) -> Result<bool, EquivariantError>
where
    F: Fn(&[f64], &[f64]) -> Vec<f64>,
{
    Ok(intersection_degree(chi, slice, a0, m0, radius)? != 0)
}
