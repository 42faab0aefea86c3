//! CMC Clifford tori `x_r(x, y) = (r x, sqrt(1 - r^2) y)` of `S^n x S^m` in
//! the round sphere `S^{n+m+1}`.
//!
//! With `s = sqrt(1 - r^2)` the principal curvatures are `s / r` (multiplicity
//! `n`) and `-r / s` (multiplicity `m`), the induced metric is the product
//! `r^2 g_n + s^2 g_m`, and the index form is
//! `Q(f) = int |grad f|^2 - (|A|^2 + n + m) f^2`. Its eigenvalue on the
//! bidegree-`(j, k)` harmonics is
//!
//! ```text
//! mu_j / r^2 + nu_k / s^2 - |A|^2 - (n + m),
//! mu_j = j (j + n - 1),  nu_k = k (k + m - 1),
//! ```
//!
//! which in `u = r^2` equals `((mu_j - n)(1 - u) + (nu_k - m) u) / (u (1 - u))`.
//! Hence only the `(1, 1)` modes vanish identically (they come from the
//! rotations mixing the factors), and every other mode changes sign at most
//! once, at a root linear in `u`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::equivariant::{
    apply_derivative_gate, CriterionVerdict, FamilySignature, Fingerprint, FingerprintEntry, FingerprintKind,
    GateFailure, IrrepLabel,
};
use crate::report::{BifurcationReport, InstantReport, ModeSample, SweepSample};

/// Relative zero threshold for Jacobi eigenvalues, as a fraction of
/// `|A|^2 + n + m`.
pub const ZERO_RELATIVE: f64 = 1e-9;
/// Instants closer than this are merged.
pub const MERGE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CliffordError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("mode cutoff {cutoff} too small: eigenvalue {eigenvalue} beyond it is not positive")]
    CutoffTooSmall { cutoff: u32, eigenvalue: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CliffordParams {
    pub n: u32,
    pub m: u32,
    pub r: f64,
}

impl CliffordParams {
    pub fn new(n: u32, m: u32, r: f64) -> Result<Self, CliffordError> {
        check_dims(n, m)?;
        if !(r > 0.0 && r < 1.0) {
            return Err(CliffordError::InvalidParams(format!("r = {r} must lie in (0, 1)")));
        }
        Ok(Self { n, m, r })
    }

    pub fn s(&self) -> f64 {
        (1.0 - self.r * self.r).sqrt()
    }

    /// The same torus with the factors exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            n: self.m,
            m: self.n,
            r: self.s(),
        }
    }
}

fn check_dims(n: u32, m: u32) -> Result<(), CliffordError> {
    if n == 0 || m == 0 {
        return Err(CliffordError::InvalidParams(format!(
            "factor dimensions must be positive, got n = {n}, m = {m}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CliffordGeometry {
    /// Principal curvature along the `S^n` factor, multiplicity `n`.
    pub kappa1: f64,
    /// Principal curvature along the `S^m` factor, multiplicity `m`.
    pub kappa2: f64,
    pub mean_curvature: f64,
    pub a2: f64,
    /// `Ric(N, N)` summed over the hypersurface dimension; `n + m` for the
    /// unit sphere.
    pub ricci_term: f64,
}

pub fn clifford_geometry(p: &CliffordParams) -> CliffordGeometry {
    let (r, s) = (p.r, p.s());
    let (n, m) = (f64::from(p.n), f64::from(p.m));
    let kappa1 = s / r;
    let kappa2 = -r / s;
    CliffordGeometry {
        kappa1,
        kappa2,
        mean_curvature: (n * kappa1 + m * kappa2) / (n + m),
        a2: n * kappa1 * kappa1 + m * kappa2 * kappa2,
        ricci_term: n + m,
    }
}

/// `dH/dr`, negative on the whole family.
pub fn mean_curvature_derivative(p: &CliffordParams) -> f64 {
    let (r, s) = (p.r, p.s());
    let (n, m) = (f64::from(p.n), f64::from(p.m));
    (-n / (s * r * r) - m / (s * s * s)) / (n + m)
}

/// Eigenvalue `j (j + n - 1)` of the Laplacian of the unit `S^n`.
pub fn sphere_eigenvalue(n: u32, j: u32) -> f64 {
    f64::from(j) * f64::from(j + n - 1)
}

/// Dimension of the degree-`j` spherical harmonics on `S^n`,
/// `C(n + j, j) - C(n + j - 2, j - 2)`.
pub fn harmonic_dim(n: u32, j: u32) -> u64 {
    let all = binomial(u64::from(n + j), u64::from(j));
    if j < 2 {
        all
    } else {
        all - binomial(u64::from(n + j - 2), u64::from(j - 2))
    }
}

fn binomial(a: u64, b: u64) -> u64 {
    let b = b.min(a - b);
    (0..b).fold(1, |acc, i| acc * (a - i) / (i + 1))
}

pub fn jacobi_eigenvalue(p: &CliffordParams, j: u32, k: u32) -> f64 {
    let g = clifford_geometry(p);
    let (r2, s2) = (p.r * p.r, 1.0 - p.r * p.r);
    sphere_eigenvalue(p.n, j) / r2 + sphere_eigenvalue(p.m, k) / s2 - g.a2 - g.ricci_term
}

/// Modes whose eigenvalue vanishes for every `r`.
pub fn is_killing_mode(j: u32, k: u32) -> bool {
    j == 1 && k == 1
}

fn zero_tolerance(p: &CliffordParams) -> f64 {
    let g = clifford_geometry(p);
    ZERO_RELATIVE * (g.a2 + g.ricci_term)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CliffordInstant {
    pub r: f64,
    /// Bidegree that degenerates.
    pub mode: (u32, u32),
    /// Dimension of the degenerating eigenspace.
    pub dim: u64,
}

/// Root in `r` of the mode-`(j, k)` eigenvalue, if it lies in `(0, 1)`.
pub fn mode_root(n: u32, m: u32, j: u32, k: u32) -> Option<f64> {
    if is_killing_mode(j, k) {
        return None;
    }
    let a = sphere_eigenvalue(n, j) - f64::from(n);
    let b = sphere_eigenvalue(m, k) - f64::from(m);
    if a * b >= 0.0 {
        return None;
    }
    let u = a / (a - b);
    (u > 0.0 && u < 1.0).then(|| u.sqrt())
}

/// First `count` instants of each sequence: the `(0, k)` roots accumulating
/// at 0 and the `(j, 0)` roots accumulating at 1, each sorted ascending.
pub fn degeneracy_instants(
    n: u32,
    m: u32,
    count: usize,
) -> Result<(Vec<CliffordInstant>, Vec<CliffordInstant>), CliffordError> {
    check_dims(n, m)?;
    if count == 0 {
        return Err(CliffordError::InvalidParams("count must be at least 1".into()));
    }
    let last = 2 + count as u32;
    let toward_zero = (2..last)
        .rev()
        .map(|k| CliffordInstant {
            r: mode_root(n, m, 0, k).expect("(0, k) roots exist for k >= 2"),
            mode: (0, k),
            dim: harmonic_dim(m, k),
        })
        .collect();
    let toward_one = (2..last)
        .map(|j| CliffordInstant {
            r: mode_root(n, m, j, 0).expect("(j, 0) roots exist for j >= 2"),
            mode: (j, 0),
            dim: harmonic_dim(n, j),
        })
        .collect();
    Ok((toward_zero, toward_one))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CliffordModeRow {
    pub j: u32,
    pub k: u32,
    pub eigenvalue: f64,
    pub dim: u64,
}

/// Morse index and its negative modes, over bidegrees up to `cutoff` in each
/// factor. Only bidegrees with `j = 0` or `k = 0` can be negative, and those
/// increase beyond the cutoff, so positivity at `cutoff + 1` certifies it.
pub fn morse_index(p: &CliffordParams, cutoff: u32) -> Result<(usize, Vec<CliffordModeRow>), CliffordError> {
    for (j, k) in [(0, cutoff + 1), (cutoff + 1, 0)] {
        let eigenvalue = jacobi_eigenvalue(p, j, k);
        if eigenvalue <= zero_tolerance(p) {
            return Err(CliffordError::CutoffTooSmall { cutoff, eigenvalue });
        }
    }
    let rows: Vec<CliffordModeRow> = modes(cutoff)
        .map(|(j, k)| CliffordModeRow {
            j,
            k,
            eigenvalue: jacobi_eigenvalue(p, j, k),
            dim: harmonic_dim(p.n, j) * harmonic_dim(p.m, k),
        })
        .filter(|row| row.eigenvalue < -zero_tolerance(p))
        .collect();
    let index = rows.iter().map(|row| row.dim as usize).sum();
    Ok((index, rows))
}

fn modes(cutoff: u32) -> impl Iterator<Item = (u32, u32)> {
    (0..=cutoff).flat_map(move |j| (0..=cutoff).map(move |k| (j, k)))
}

/// Dimension of the kernel outside the Killing modes.
pub fn non_killing_nullity(p: &CliffordParams, cutoff: u32) -> u64 {
    let tol = zero_tolerance(p);
    modes(cutoff)
        .filter(|&(j, k)| !is_killing_mode(j, k) && jacobi_eigenvalue(p, j, k).abs() <= tol)
        .map(|(j, k)| harmonic_dim(p.n, j) * harmonic_dim(p.m, k))
        .sum()
}

/// Each negative bidegree is one irreducible of `SO(n+1) x SO(m+1)`.
pub fn fingerprint_from_rows(rows: &[CliffordModeRow]) -> Fingerprint {
    Fingerprint::from_entries(
        FingerprintKind::Bidegree,
        rows.iter().map(|row| FingerprintEntry {
            label: IrrepLabel::Bidegree(row.j, row.k),
            multiplicity: 1,
            irrep_dim: row.dim as usize,
        }),
    )
}

pub fn clifford_fingerprint(p: &CliffordParams, cutoff: u32) -> Result<Fingerprint, CliffordError> {
    let (_, rows) = morse_index(p, cutoff)?;
    Ok(fingerprint_from_rows(&rows))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CliffordScan {
    pub n: u32,
    pub m: u32,
    pub interval: [f64; 2],
    pub cutoff: u32,
    /// Number of staircase intervals in the report.
    pub samples: usize,
    pub derivative_threshold: f64,
}

impl Default for CliffordScan {
    fn default() -> Self {
        Self {
            n: 1,
            m: 1,
            interval: [0.4, 0.6],
            cutoff: 20,
            samples: 20,
            derivative_threshold: 1e-6,
        }
    }
}

impl CliffordScan {
    pub fn validate(&self) -> Result<(), CliffordError> {
        check_dims(self.n, self.m)?;
        let [a, b] = self.interval;
        if !(a > 0.0 && b < 1.0 && a < b) {
            return Err(CliffordError::InvalidParams(format!(
                "interval [{a}, {b}] must be increasing inside (0, 1)"
            )));
        }
        if self.samples == 0 {
            return Err(CliffordError::InvalidParams("samples must be at least 1".into()));
        }
        Ok(())
    }
}

fn signature(p: &CliffordParams, cutoff: u32) -> Result<FamilySignature, CliffordError> {
    let (index, rows) = morse_index(p, cutoff)?;
    Ok(FamilySignature {
        index,
        fingerprint: fingerprint_from_rows(&rows),
    })
}

fn sample(scan: &CliffordScan, r: f64) -> Result<SweepSample, CliffordError> {
    let p = CliffordParams::new(scan.n, scan.m, r)?;
    let tol = zero_tolerance(&p);
    let (index, _) = morse_index(&p, scan.cutoff)?;
    let modes = modes(scan.cutoff)
        .filter(|&(j, k)| j == 0 || k == 0)
        .map(|(j, k)| {
            let negative = jacobi_eigenvalue(&p, j, k) < -tol;
            ModeSample {
                mode: format!("({j},{k})"),
                negative_count: if negative {
                    (harmonic_dim(p.n, j) * harmonic_dim(p.m, k)) as usize
                } else {
                    0
                },
                conjugate_value: None,
            }
        })
        .collect();
    Ok(SweepSample {
        parameter: r,
        mean_curvature: Some(clifford_geometry(&p).mean_curvature),
        mean_curvature_derivative: Some(mean_curvature_derivative(&p)),
        morse_index: Some(index),
        modes,
    })
}

/// Every instant with bidegree up to the cutoff in the closed interval,
/// judged between the midpoints to its neighbours (or the interval ends).
/// The isotropy `SO(n+1) x SO(m+1)` is the same along the family and
/// connected, so only nondegeneracy and `H'` can block a verdict.
pub fn clifford_detect(scan: &CliffordScan) -> Result<BifurcationReport, CliffordError> {
    scan.validate()?;
    let [a, b] = scan.interval;
    let mut report = BifurcationReport::new("clifford", "r", scan.interval);
    for i in 0..=scan.samples {
        let r = a + (b - a) * i as f64 / scan.samples as f64;
        report.samples.push(sample(scan, r)?);
    }

    let mut instants: Vec<CliffordInstant> = modes(scan.cutoff)
        .filter_map(|(j, k)| {
            mode_root(scan.n, scan.m, j, k).map(|r| CliffordInstant {
                r,
                mode: (j, k),
                dim: harmonic_dim(scan.n, j) * harmonic_dim(scan.m, k),
            })
        })
        .filter(|inst| inst.r >= a && inst.r <= b)
        .collect();
    instants.sort_by(|x, y| x.r.total_cmp(&y.r));
    let mut groups: Vec<Vec<CliffordInstant>> = Vec::new();
    for inst in instants {
        match groups.last_mut() {
            Some(g) if (inst.r - g[0].r).abs() <= MERGE_TOLERANCE => g.push(inst),
            _ => groups.push(vec![inst]),
        }
    }
    let centers: Vec<f64> = groups.iter().map(|g| g[0].r).collect();
    for (i, group) in groups.iter().enumerate() {
        let lo = if i == 0 { a } else { 0.5 * (centers[i - 1] + centers[i]) };
        let hi = if i + 1 == centers.len() {
            b
        } else {
            0.5 * (centers[i] + centers[i + 1])
        };
        let pa = CliffordParams::new(scan.n, scan.m, lo)?;
        let pb = CliffordParams::new(scan.n, scan.m, hi)?;
        let mut gates = Vec::new();
        if non_killing_nullity(&pa, scan.cutoff) > 0 || non_killing_nullity(&pb, scan.cutoff) > 0 {
            gates.push(GateFailure::EndpointDegenerate);
        }
        let mut verdict = CriterionVerdict::from_endpoint_summaries(
            gates,
            signature(&pa, scan.cutoff)?,
            signature(&pb, scan.cutoff)?,
        );
        let center = CliffordParams::new(scan.n, scan.m, centers[i])?;
        let derivative = mean_curvature_derivative(&center);
        apply_derivative_gate(&mut verdict, derivative, scan.derivative_threshold);
        let source = group
            .iter()
            .map(|inst| format!("mode ({},{})", inst.mode.0, inst.mode.1))
            .collect::<Vec<_>>()
            .join(" + ");
        report.instants.push(InstantReport {
            parameter: centers[i],
            bracket: [lo, hi],
            source,
            verdict,
            mean_curvature_derivative: Some(derivative),
            isolated: Some(group.len() == 1),
            symmetry_breaking: None,
        });
    }
    Ok(report)
}
