//! Clifford tori `x_{r,tau}(t1, t2) = (r e^{i t1}, s e^{i t2})`,
//! `s = sqrt(1 - r^2)`, in the Berger sphere with metric
//! `g_tau = g + (tau^2 - 1) sigma (x) sigma`, where `sigma` is dual to the
//! unit Hopf field `xi(p) = i p`.
//!
//! The induced metric is flat with Gram matrix
//! `diag(r^2, s^2) + (tau^2 - 1) v v^T`, `v = (r^2, s^2)`, whose inverse is
//! `diag(1/r^2, 1/s^2) - (1 - 1/tau^2) 1 1^T`. The unit normal
//! `(s e^{i t1}, -r e^{i t2})` is horizontal, so `Ric(N, N) = 4 - 2 tau^2`,
//! and `|A|^2 + Ric(N, N) = 1 / (r^2 s^2)` for every `tau`. On the Fourier
//! mode `e^{i (j t1 + k t2)}` the index form therefore has eigenvalue
//!
//! ```text
//! j^2 / r^2 + k^2 / s^2 - (1 - 1/tau^2) (j + k)^2 - 1 / (r^2 s^2).
//! ```

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::equivariant::{
    apply_derivative_gate, CriterionVerdict, FamilySignature, Fingerprint, FingerprintEntry, FingerprintKind,
    GateFailure, IrrepLabel,
};
use crate::report::{BifurcationReport, InstantReport, ModeSample, SweepSample};

/// Relative zero threshold, as a fraction of the Jacobi constant.
pub const ZERO_RELATIVE: f64 = 1e-9;
/// Roots closer than this are reported once.
pub const DEDUP_TOLERANCE: f64 = 1e-10;
/// Bisection stops at this bracket width (absolute in `r`, relative in `tau`).
pub const ROOT_TOLERANCE: f64 = 1e-14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BergerError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("mode cutoff {cutoff} too small: eigenvalue {eigenvalue} beyond it is not positive")]
    CutoffTooSmall { cutoff: u32, eigenvalue: f64 },
}

/// How the configured `tau` maps to the fiber scale of the metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TauConvention {
    /// Hopf fibers have length `2 pi tau`.
    #[default]
    FiberScale,
    /// Hopf fibers have length `2 pi / tau`.
    InverseFiberScale,
}

impl TauConvention {
    pub fn fiber_scale(self, tau: f64) -> f64 {
        match self {
            TauConvention::FiberScale => tau,
            TauConvention::InverseFiberScale => 1.0 / tau,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BergerParams {
    pub r: f64,
    /// Fiber scale; 1 is the round sphere.
    pub tau: f64,
}

impl BergerParams {
    pub fn new(r: f64, tau: f64) -> Result<Self, BergerError> {
        if !(r > 0.0 && r < 1.0) {
            return Err(BergerError::InvalidParams(format!("r = {r} must lie in (0, 1)")));
        }
        check_tau(tau)?;
        Ok(Self { r, tau })
    }

    pub fn s(&self) -> f64 {
        (1.0 - self.r * self.r).sqrt()
    }

    pub fn is_round(&self) -> bool {
        self.tau == 1.0
    }
}

fn check_tau(tau: f64) -> Result<(), BergerError> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(BergerError::InvalidParams(format!("tau = {tau} must be positive")));
    }
    Ok(())
}

fn check_cutoff(cutoff: u32) -> Result<(), BergerError> {
    if cutoff < 2 {
        return Err(BergerError::InvalidParams(format!(
            "mode cutoff {cutoff} must be at least 2"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlatTorusSpectrum {
    pub params: BergerParams,
    /// Induced metric in the `(t1, t2)` chart.
    pub gram: [[f64; 2]; 2],
    /// Its inverse, the dual metric on lattice frequencies.
    pub dual: [[f64; 2]; 2],
    pub mean_curvature: f64,
    pub a2: f64,
    pub ricci_term: f64,
    /// `|A|^2 + Ric(N, N)`.
    pub jacobi_constant: f64,
}

impl FlatTorusSpectrum {
    /// Laplacian eigenvalue of `e^{i (j t1 + k t2)}`.
    pub fn laplace_eigenvalue(&self, j: i64, k: i64) -> f64 {
        let (j, k) = (j as f64, k as f64);
        self.dual[0][0] * j * j + 2.0 * self.dual[0][1] * j * k + self.dual[1][1] * k * k
    }

    pub fn eigenvalue(&self, j: i64, k: i64) -> f64 {
        self.laplace_eigenvalue(j, k) - self.jacobi_constant
    }

    pub fn zero_tolerance(&self) -> f64 {
        ZERO_RELATIVE * self.jacobi_constant
    }
}

pub fn berger_induced(p: &BergerParams) -> FlatTorusSpectrum {
    let (r, s, tau) = (p.r, p.s(), p.tau);
    let (r2, s2) = (r * r, s * s);
    let c = tau * tau - 1.0;
    let gram = [[r2 + c * r2 * r2, c * r2 * s2], [c * r2 * s2, s2 + c * s2 * s2]];
    let alpha = 1.0 - 1.0 / (tau * tau);
    let dual = [[1.0 / r2 - alpha, -alpha], [-alpha, 1.0 / s2 - alpha]];
    // Second fundamental form in the chart, sign chosen so that the round
    // case has principal curvatures s / r and -r / s.
    let a = [
        [r * s + 2.0 * c * r2 * r * s, -c * r * s * (r2 - s2)],
        [-c * r * s * (r2 - s2), -r * s - 2.0 * c * r * s2 * s],
    ];
    // Shape operator dual * a.
    let mut shape = [[0.0; 2]; 2];
    for (i, row) in shape.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = dual[i][0] * a[0][j] + dual[i][1] * a[1][j];
        }
    }
    let mean_curvature = 0.5 * (shape[0][0] + shape[1][1]);
    let a2 = shape[0][0] * shape[0][0] + 2.0 * shape[0][1] * shape[1][0] + shape[1][1] * shape[1][1];
    let ricci_term = 4.0 - 2.0 * tau * tau;
    FlatTorusSpectrum {
        params: *p,
        gram,
        dual,
        mean_curvature,
        a2,
        ricci_term,
        jacobi_constant: a2 + ricci_term,
    }
}

/// `dH/dr`; the mean curvature `(s^2 - r^2) / (2 r s)` does not depend on
/// `tau`.
pub fn mean_curvature_derivative_r(r: f64) -> f64 {
    let s = (1.0 - r * r).sqrt();
    -0.5 * (1.0 / (s * r * r) + 1.0 / (s * s * s))
}

/// Dimension of the space of Killing-Jacobi fields, 4 on the round sphere
/// and 3 otherwise.
pub fn killing_jacobi_dim(tau: f64) -> Result<usize, BergerError> {
    check_tau(tau)?;
    Ok(if tau == 1.0 { 4 } else { 3 })
}

/// Lattice modes whose eigenvalue vanishes for every `r`: `+-(1, -1)`, and
/// also `+-(1, 1)` on the round sphere.
pub fn is_killing_mode(j: i64, k: i64, tau: f64) -> bool {
    let (a, b) = (j.abs(), k.abs());
    a == 1 && b == 1 && (j == -k || tau == 1.0)
}

/// One lattice point per `+-` pair with `max(|j|, |k|) <= cutoff`.
pub fn lattice_representatives(cutoff: u32) -> impl Iterator<Item = (i64, i64)> {
    let c = i64::from(cutoff);
    (0..=c)
        .flat_map(move |j| (-c..=c).map(move |k| (j, k)))
        .filter(|&(j, k)| j > 0 || k >= 0)
}

fn representative(j: i64, k: i64) -> (i64, i64) {
    if j > 0 || (j == 0 && k >= 0) {
        (j, k)
    } else {
        (-j, -k)
    }
}

/// Zero modes of the spectrum up to the cutoff, counted with sign pairs.
pub fn zero_mode_count(p: &BergerParams, cutoff: u32) -> usize {
    let spec = berger_induced(p);
    let tol = spec.zero_tolerance();
    lattice_representatives(cutoff)
        .filter(|&(j, k)| spec.eigenvalue(j, k).abs() <= tol)
        .map(|(j, k)| if (j, k) == (0, 0) { 1 } else { 2 })
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BergerInstant {
    /// Root in `r` or in `tau`, depending on the set.
    pub value: f64,
    /// Lattice representatives degenerating there.
    pub modes: Vec<(i64, i64)>,
}

/// `r^2 s^2` times the mode eigenvalue, a quadratic in `u = r^2`.
fn scaled_mode(j: i64, k: i64, alpha: f64, u: f64) -> f64 {
    let (j2, k2) = ((j * j) as f64, (k * k) as f64);
    let b = alpha * ((j + k) * (j + k)) as f64;
    (j2 - 1.0) + (k2 - j2 - b) * u + b * u * u
}

fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, width: impl Fn(f64, f64) -> bool) -> f64 {
    let flo = f(lo);
    while !width(lo, hi) {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Roots in `r` of one mode: the quadratic in `u` is split at its vertex
/// into monotone pieces, and each piece with a sign change is bisected in
/// `r`.
fn mode_roots_r(j: i64, k: i64, tau: f64) -> Vec<f64> {
    let alpha = 1.0 - 1.0 / (tau * tau);
    let g = |r: f64| scaled_mode(j, k, alpha, r * r);
    let b = alpha * ((j + k) * (j + k)) as f64;
    let mut cuts = vec![0.0, 1.0];
    if b != 0.0 {
        let vertex = -((k * k - j * j) as f64 - b) / (2.0 * b);
        if vertex > 0.0 && vertex < 1.0 {
            cuts.insert(1, vertex.sqrt());
        }
    }
    let mut roots = Vec::new();
    if cuts.len() == 3 {
        // A root at the vertex touches zero without a sign change.
        let scale = ((j * j) as f64).max((k * k) as f64).max(b.abs());
        if g(cuts[1]).abs() <= 1e-12 * scale {
            return vec![cuts[1]];
        }
    }
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        // Exact values at u = 0 and u = 1, where round-off would hide a zero.
        let exact = |r: f64| match r {
            0.0 => (j * j - 1) as f64,
            1.0 => (k * k - 1) as f64,
            _ => g(r),
        };
        let (glo, ghi) = (exact(lo), exact(hi));
        if glo == 0.0 || ghi == 0.0 || glo.signum() == ghi.signum() {
            continue;
        }
        let root = bisect(g, lo, hi, |a, b| b - a <= ROOT_TOLERANCE);
        if root > 0.0 && root < 1.0 {
            roots.push(root);
        }
    }
    roots
}

/// Root in `tau` of one mode at fixed `r`. The eigenvalue decreases in
/// `tau` from `+inf`, so there is at most one root, bisected in `log tau`.
fn mode_root_tau(j: i64, k: i64, r: f64) -> Option<f64> {
    if j + k == 0 {
        return None;
    }
    let e = |tau: f64| berger_induced(&BergerParams { r, tau }).eigenvalue(j, k);
    let b = ((j + k) * (j + k)) as f64;
    let at_infinity = e(1.0) - b;
    if at_infinity >= 0.0 {
        return None;
    }
    let mut lo = 1.0;
    while e(lo) <= 0.0 {
        lo *= 0.5;
    }
    let mut hi = 1.0;
    while e(hi) >= 0.0 {
        hi *= 2.0;
    }
    let t = bisect(|x| e(x.exp()), lo.ln(), hi.ln(), |a, b| b - a <= ROOT_TOLERANCE).exp();
    ((t - 1.0).abs() > DEDUP_TOLERANCE).then_some(t)
}

fn collect_sorted(mut raw: Vec<(f64, (i64, i64))>) -> Vec<BergerInstant> {
    raw.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut out: Vec<BergerInstant> = Vec::new();
    for (value, mode) in raw {
        match out.last_mut() {
            Some(last) if (value - last.value).abs() <= DEDUP_TOLERANCE => last.modes.push(mode),
            _ => out.push(BergerInstant {
                value,
                modes: vec![mode],
            }),
        }
    }
    out
}

/// Degeneracy instants in `r` for fixed `tau`, over lattice modes up to the
/// cutoff, Killing modes excluded.
pub fn berger_degeneracy_sets(tau: f64, cutoff: u32) -> Result<Vec<BergerInstant>, BergerError> {
    check_tau(tau)?;
    check_cutoff(cutoff)?;
    let raw = lattice_representatives(cutoff)
        .filter(|&(j, k)| !is_killing_mode(j, k, tau))
        .flat_map(|(j, k)| mode_roots_r(j, k, tau).into_iter().map(move |r| (r, (j, k))))
        .collect();
    Ok(collect_sorted(raw))
}

/// Degeneracy instants in `tau` for fixed `r`; `tau = 1` is excluded.
pub fn berger_degeneracy_sets_r(r: f64, cutoff: u32) -> Result<Vec<BergerInstant>, BergerError> {
    BergerParams::new(r, 1.0)?;
    check_cutoff(cutoff)?;
    let raw = lattice_representatives(cutoff)
        .filter(|&(j, k)| !is_killing_mode(j, k, 1.0))
        .filter_map(|(j, k)| mode_root_tau(j, k, r).map(|t| (t, (j, k))))
        .collect();
    Ok(collect_sorted(raw))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeRow {
    pub j: i64,
    pub k: i64,
    pub eigenvalue: f64,
    /// 1 for `(0, 0)`, 2 for a `+-` pair.
    pub dim: usize,
}

/// Morse index over lattice modes with `max(|j|, |k|) <= cutoff`. The dual
/// metric is positive definite, so positivity on the ring at `cutoff + 1`
/// certifies the cutoff.
pub fn berger_morse_index(p: &BergerParams, cutoff: u32) -> Result<(usize, Vec<LatticeRow>), BergerError> {
    let spec = berger_induced(p);
    let tol = spec.zero_tolerance();
    let c = i64::from(cutoff) + 1;
    let ring = (-c..=c).flat_map(|t| [(c, t), (t, c)]);
    for (j, k) in ring {
        let eigenvalue = spec.eigenvalue(j, k);
        if eigenvalue <= tol {
            return Err(BergerError::CutoffTooSmall { cutoff, eigenvalue });
        }
    }
    let rows: Vec<LatticeRow> = lattice_representatives(cutoff)
        .map(|(j, k)| LatticeRow {
            j,
            k,
            eigenvalue: spec.eigenvalue(j, k),
            dim: if (j, k) == (0, 0) { 1 } else { 2 },
        })
        .filter(|row| row.eigenvalue < -tol)
        .collect();
    Ok((rows.iter().map(|row| row.dim).sum(), rows))
}

/// Dimension of the kernel outside the Killing modes.
pub fn non_killing_nullity(p: &BergerParams, cutoff: u32) -> usize {
    let spec = berger_induced(p);
    let tol = spec.zero_tolerance();
    lattice_representatives(cutoff)
        .filter(|&(j, k)| !is_killing_mode(j, k, p.tau) && spec.eigenvalue(j, k).abs() <= tol)
        .map(|(j, k)| if (j, k) == (0, 0) { 1 } else { 2 })
        .sum()
}

/// The isotropy torus acts on `e^{i (j t1 + k t2)}` with weight `(j, k)`;
/// each `+-` pair is one real irreducible.
pub fn fingerprint_from_rows(rows: &[LatticeRow]) -> Fingerprint {
    Fingerprint::from_entries(
        FingerprintKind::Lattice,
        rows.iter().map(|row| {
            let (j, k) = representative(row.j, row.k);
            FingerprintEntry {
                label: IrrepLabel::Lattice(j, k),
                multiplicity: 1,
                irrep_dim: row.dim,
            }
        }),
    )
}

pub fn berger_fingerprint(p: &BergerParams, cutoff: u32) -> Result<Fingerprint, BergerError> {
    let (_, rows) = berger_morse_index(p, cutoff)?;
    Ok(fingerprint_from_rows(&rows))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "vary", rename_all = "snake_case")]
pub enum BergerSweep {
    /// Fixed `tau`, sweep `r`.
    Radius { tau: f64 },
    /// Fixed `r`, sweep `tau`.
    Tau { r: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BergerScan {
    pub sweep: BergerSweep,
    pub interval: [f64; 2],
    pub cutoff: u32,
    pub samples: usize,
    pub derivative_threshold: f64,
}

impl Default for BergerScan {
    fn default() -> Self {
        Self {
            sweep: BergerSweep::Radius { tau: 1.0 },
            interval: [0.4, 0.6],
            cutoff: 20,
            samples: 20,
            derivative_threshold: 1e-6,
        }
    }
}

impl BergerScan {
    pub fn validate(&self) -> Result<(), BergerError> {
        check_cutoff(self.cutoff)?;
        let [a, b] = self.interval;
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(BergerError::InvalidParams(format!(
                "interval [{a}, {b}] must be finite and increasing"
            )));
        }
        match self.sweep {
            BergerSweep::Radius { tau } => {
                check_tau(tau)?;
                BergerParams::new(a, tau)?;
                BergerParams::new(b, tau)?;
            }
            BergerSweep::Tau { r } => {
                BergerParams::new(r, a)?;
                BergerParams::new(r, b)?;
            }
        }
        if self.samples == 0 {
            return Err(BergerError::InvalidParams("samples must be at least 1".into()));
        }
        Ok(())
    }

    fn params(&self, t: f64) -> Result<BergerParams, BergerError> {
        match self.sweep {
            BergerSweep::Radius { tau } => BergerParams::new(t, tau),
            BergerSweep::Tau { r } => BergerParams::new(r, t),
        }
    }
}

fn signature(p: &BergerParams, cutoff: u32) -> Result<FamilySignature, BergerError> {
    let (index, rows) = berger_morse_index(p, cutoff)?;
    Ok(FamilySignature {
        index,
        fingerprint: fingerprint_from_rows(&rows),
    })
}

/// Instants of the configured sweep in the closed interval, each judged
/// between the midpoints to its neighbours (or the interval ends). In a
/// `tau` sweep the mean curvature is constant and the family moves through
/// the ambient metric instead, so the mean-curvature gate is not applied
/// there.
pub fn berger_detect(scan: &BergerScan) -> Result<BifurcationReport, BergerError> {
    scan.validate()?;
    let [a, b] = scan.interval;
    let parameter = match scan.sweep {
        BergerSweep::Radius { .. } => "r",
        BergerSweep::Tau { .. } => "tau",
    };
    let mut report = BifurcationReport::new("berger", parameter, scan.interval);

    let grid: Vec<f64> = (0..=scan.samples)
        .map(|i| a + (b - a) * i as f64 / scan.samples as f64)
        .collect();
    let mut tables = Vec::with_capacity(grid.len());
    let mut labels = BTreeSet::new();
    for &t in &grid {
        let p = scan.params(t)?;
        let (index, rows) = berger_morse_index(&p, scan.cutoff)?;
        labels.extend(rows.iter().map(|row| representative(row.j, row.k)));
        tables.push((p, index, rows));
    }
    for (t, (p, index, rows)) in grid.iter().zip(&tables) {
        let modes = labels
            .iter()
            .map(|&(j, k)| ModeSample {
                mode: format!("({j},{k})"),
                negative_count: rows
                    .iter()
                    .find(|row| representative(row.j, row.k) == (j, k))
                    .map_or(0, |row| row.dim),
                conjugate_value: None,
            })
            .collect();
        let derivative = match scan.sweep {
            BergerSweep::Radius { .. } => mean_curvature_derivative_r(p.r),
            BergerSweep::Tau { .. } => 0.0,
        };
        report.samples.push(SweepSample {
            parameter: *t,
            mean_curvature: Some(berger_induced(p).mean_curvature),
            mean_curvature_derivative: Some(derivative),
            morse_index: Some(*index),
            modes,
        });
    }

    let instants: Vec<BergerInstant> = match scan.sweep {
        BergerSweep::Radius { tau } => berger_degeneracy_sets(tau, scan.cutoff)?,
        BergerSweep::Tau { r } => berger_degeneracy_sets_r(r, scan.cutoff)?,
    }
    .into_iter()
    .filter(|inst| inst.value >= a && inst.value <= b)
    .collect();
    let centers: Vec<f64> = instants.iter().map(|inst| inst.value).collect();
    for (i, inst) in instants.iter().enumerate() {
        let lo = if i == 0 { a } else { 0.5 * (centers[i - 1] + centers[i]) };
        let hi = if i + 1 == centers.len() {
            b
        } else {
            0.5 * (centers[i] + centers[i + 1])
        };
        let (pa, pb) = (scan.params(lo)?, scan.params(hi)?);
        let mut gates = Vec::new();
        if non_killing_nullity(&pa, scan.cutoff) > 0 || non_killing_nullity(&pb, scan.cutoff) > 0 {
            gates.push(GateFailure::EndpointDegenerate);
        }
        let mut verdict = CriterionVerdict::from_endpoint_summaries(
            gates,
            signature(&pa, scan.cutoff)?,
            signature(&pb, scan.cutoff)?,
        );
        let derivative = match scan.sweep {
            BergerSweep::Radius { .. } => {
                let d = mean_curvature_derivative_r(inst.value);
                apply_derivative_gate(&mut verdict, d, scan.derivative_threshold);
                d
            }
            BergerSweep::Tau { .. } => {
                verdict
                    .notes
                    .push("mean curvature is constant in tau; the metric carries the family".into());
                0.0
            }
        };
        let source = inst
            .modes
            .iter()
            .map(|(j, k)| format!("mode ({j},{k})"))
            .collect::<Vec<_>>()
            .join(" + ");
        report.instants.push(InstantReport {
            parameter: inst.value,
            bracket: [lo, hi],
            source,
            verdict,
            mean_curvature_derivative: Some(derivative),
            isolated: Some(inst.modes.len() == 1),
            symmetry_breaking: None,
        });
    }
    Ok(report)
}
