//! Conjugate-instant scans along a sweep of profiles and the
//! symmetry-breaking detector built on them.

use serde::{Deserialize, Serialize};

use super::modes::{mode_problem, mode_row, rotsym_morse_index, ModeTable};
use super::profile::{shoot_profile, solve_mean_curvature, BoundaryConfig, DelaunayProfile, ShootingOptions};
use super::RotsymError;
use crate::equivariant::{
    apply_derivative_gate, CriterionVerdict, FamilySignature, Fingerprint, FingerprintEntry, FingerprintKind, Fired,
    GateFailure, IrrepLabel,
};
use crate::report::{BifurcationReport, InstantReport, ModeSample, SweepSample};
use crate::spectral::{conjugate_value, SturmLiouvilleProblem};

/// Largest accepted gap between the two locations of one instant.
pub const AGREEMENT_TOLERANCE: f64 = 1e-4;
/// Isolation window, in multiples of the bisection tolerance.
pub const ISOLATION_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RotsymSweep {
    pub boundary: BoundaryConfig,
    pub interval: [f64; 2],
    /// Number of grid intervals.
    pub samples: usize,
    /// Highest Fourier mode; its lowest eigenvalue must be positive.
    pub n_max: u32,
    /// `h_guess` seeds the continuation at the start of the interval.
    pub shooting: ShootingOptions,
    pub bisection_tolerance: f64,
    pub derivative_step: f64,
    pub derivative_threshold: f64,
}

impl Default for RotsymSweep {
    /// A certified sweep on which mode 2 becomes conjugate near `r = -2.668`
    /// while modes 0 and 1 stay nondegenerate.
    fn default() -> Self {
        Self {
            boundary: BoundaryConfig {
                rho_low: 1.0,
                rho_high: 1.7,
                h: 0.35,
            },
            interval: [-2.95, -2.45],
            samples: 10,
            n_max: 3,
            shooting: ShootingOptions {
                h_guess: Some(1.0),
                h_probe: 1e-4,
                ..ShootingOptions::default()
            },
            bisection_tolerance: 1e-6,
            derivative_step: 1e-4,
            derivative_threshold: 1e-6,
        }
    }
}

impl RotsymSweep {
    pub fn validate(&self) -> Result<(), RotsymError> {
        let [a, b] = self.interval;
        let bad = |msg: String| Err(RotsymError::InvalidSweep(msg));
        if !(a.is_finite() && b.is_finite() && a < b) {
            return bad(format!("interval [{a}, {b}] must be finite and increasing"));
        }
        if self.samples == 0 {
            return bad("at least one grid interval is required".into());
        }
        for (name, v) in [
            ("bisection_tolerance", self.bisection_tolerance),
            ("derivative_step", self.derivative_step),
            ("derivative_threshold", self.derivative_threshold),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} = {v} must be positive"));
            }
        }
        BoundaryConfig::new(self.boundary.rho_low, self.boundary.rho_high, self.boundary.h)?;
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        let [a, b] = self.interval;
        (0..=self.samples)
            .map(|i| a + (b - a) * i as f64 / self.samples as f64)
            .collect()
    }

    fn shoot(&self, r: f64, guess: f64) -> Result<DelaunayProfile, RotsymError> {
        let opts = ShootingOptions {
            h_guess: Some(guess),
            ..self.shooting
        };
        shoot_profile(&self.boundary, r, &opts)
    }

    /// Centered difference of the mean curvature along the sweep.
    fn mean_curvature_derivative(&self, r: f64, guess: f64) -> Result<f64, RotsymError> {
        let opts = ShootingOptions {
            h_guess: Some(guess),
            ..self.shooting
        };
        let step = self.derivative_step;
        let plus = solve_mean_curvature(&self.boundary, r + step, &opts)?;
        let minus = solve_mean_curvature(&self.boundary, r - step, &opts)?;
        Ok((plus - minus) / (2.0 * step))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConjugateInstant {
    /// Zero of the conjugate value.
    pub parameter: f64,
    pub bracket: [f64; 2],
    /// Where the finite-difference eigenvalue count changes, if it does
    /// within [`AGREEMENT_TOLERANCE`] of `parameter`.
    pub eigenvalue_crossing: Option<f64>,
}

impl ConjugateInstant {
    pub fn discrepancy(&self) -> Option<f64> {
        self.eigenvalue_crossing.map(|c| (c - self.parameter).abs())
    }

    pub fn cross_validated(&self) -> bool {
        self.discrepancy().is_some_and(|d| d <= AGREEMENT_TOLERANCE)
    }
}

/// Conjugate instants of a one-parameter family of Dirichlet problems:
/// sign changes of the conjugate value between consecutive grid points,
/// bisected to `tol`, each checked against a change in the number of
/// negative eigenvalues. Parameters where `family` yields nothing, or the
/// conjugate value is not finite, break the scan into pieces.
pub fn scan_conjugate_family<F>(mut family: F, grid: &[f64], tol: f64) -> Vec<ConjugateInstant>
where
    F: FnMut(f64) -> Option<SturmLiouvilleProblem>,
{
    let mut value = |t: f64, family: &mut F| {
        family(t)
            .and_then(|p| conjugate_value(&p).ok())
            .filter(|v| v.is_finite())
    };
    let mut out = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for &t in grid {
        let current = value(t, &mut family).map(|v| (t, v));
        if let (Some((t0, v0)), Some((t1, v1))) = (prev, current) {
            if v0 == 0.0 || v0.signum() != v1.signum() {
                if let Some(inst) = refine_conjugate(&mut family, &mut value, (t0, v0), (t1, v1), tol) {
                    out.push(inst);
                }
            }
        }
        prev = current;
    }
    out
}

fn refine_conjugate<F, V>(
    family: &mut F,
    value: &mut V,
    (mut a, mut va): (f64, f64),
    (mut b, _): (f64, f64),
    tol: f64,
) -> Option<ConjugateInstant>
where
    F: FnMut(f64) -> Option<SturmLiouvilleProblem>,
    V: FnMut(f64, &mut F) -> Option<f64>,
{
    if va == 0.0 {
        b = a;
    }
    while (b - a).abs() > tol {
        let mid = 0.5 * (a + b);
        let vm = value(mid, family)?;
        if vm == 0.0 {
            a = mid;
            b = mid;
            break;
        }
        if vm.signum() == va.signum() {
            a = mid;
            va = vm;
        } else {
            b = mid;
        }
    }
    let parameter = 0.5 * (a + b);
    let mut count = |t: f64| family(t).map(|p| p.fd_count_below(0.0));
    let eigenvalue_crossing = (|| {
        let (mut lo, mut hi) = (parameter - AGREEMENT_TOLERANCE, parameter + AGREEMENT_TOLERANCE);
        let c_lo = count(lo)?;
        if count(hi)? == c_lo {
            return None;
        }
        while hi - lo > 0.1 * tol {
            let mid = 0.5 * (lo + hi);
            if count(mid)? == c_lo {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(0.5 * (lo + hi))
    })();
    Some(ConjugateInstant {
        parameter,
        bracket: [a.min(b), a.max(b)],
        eigenvalue_crossing,
    })
}

/// Profiles along a sweep with the mean curvature continued from one
/// parameter to the next; a failed shot keeps the previous guess.
struct Continuation<'a> {
    sweep: &'a RotsymSweep,
    guess: f64,
}

impl<'a> Continuation<'a> {
    fn new(sweep: &'a RotsymSweep) -> Self {
        let (lo, hi) = sweep.shooting.h_window;
        Self {
            sweep,
            guess: sweep.shooting.h_guess.unwrap_or(0.5 * (lo + hi)),
        }
    }

    fn profile(&mut self, r: f64) -> Result<DelaunayProfile, RotsymError> {
        let p = self.sweep.shoot(r, self.guess)?;
        self.guess = p.mean_curvature;
        Ok(p)
    }
}

/// Conjugate instants of mode `n` along the given grid of initial
/// inclinations.
pub fn conjugate_scan(sweep: &RotsymSweep, grid: &[f64], n: u32) -> Vec<ConjugateInstant> {
    let mut cont = Continuation::new(sweep);
    scan_conjugate_family(
        |r| cont.profile(r).ok().and_then(|p| mode_problem(&p, n).ok()),
        grid,
        sweep.bisection_tolerance,
    )
}

/// Circle fingerprint of a mode table: weight `n` once per negative
/// eigenvalue of mode `n`. Weights `n >= 1` are two-dimensional real
/// irreducibles (cosine and sine), weight 0 is the trivial one.
pub fn fingerprint_from_table(table: &ModeTable) -> Fingerprint {
    Fingerprint::from_entries(
        FingerprintKind::Circle,
        table
            .rows
            .iter()
            .filter(|r| r.negative_count > 0)
            .map(|r| FingerprintEntry {
                label: IrrepLabel::Weight(r.n),
                multiplicity: r.negative_count,
                irrep_dim: if r.n == 0 { 1 } else { 2 },
            }),
    )
}

pub fn rotsym_fingerprint(profile: &DelaunayProfile, n_max: u32) -> Result<Fingerprint, RotsymError> {
    let (_, table) = rotsym_morse_index(profile, n_max)?;
    Ok(fingerprint_from_table(&table))
}

/// Verdict at a mode-`n` instant. A change in the weight-`n` part of the
/// fingerprint fires a representation jump whether or not the index moves;
/// otherwise an index change fires a Morse jump.
pub fn rotsym_verdict(gates: Vec<GateFailure>, a: FamilySignature, b: FamilySignature, n: u32) -> CriterionVerdict {
    let label = IrrepLabel::Weight(n);
    let weight_changed = a.fingerprint.multiplicity(&label) != b.fingerprint.multiplicity(&label);
    let mut verdict = CriterionVerdict::from_endpoint_summaries(gates, a, b);
    if verdict.gate_failures.is_empty() && weight_changed {
        verdict.fired = Fired::RepresentationJump;
        if verdict.index_a != verdict.index_b {
            verdict.notes.push(format!(
                "Morse index also changes, {} -> {}",
                verdict.index_a, verdict.index_b
            ));
        }
    }
    verdict
}

struct GridPoint {
    r: f64,
    mean_curvature: f64,
    derivative: Option<f64>,
    table: Option<ModeTable>,
    /// Whether the lowest eigenvalue of the top mode is positive.
    cutoff_certified: bool,
}

/// Mode rows for `0..=n_max` without the cutoff check.
fn mode_table(profile: &DelaunayProfile, n_max: u32) -> Result<ModeTable, RotsymError> {
    Ok(ModeTable {
        rows: (0..=n_max).map(|n| mode_row(profile, n)).collect::<Result<_, _>>()?,
    })
}

fn sample_row(point: &GridPoint) -> SweepSample {
    let modes = point
        .table
        .iter()
        .flat_map(|t| &t.rows)
        .map(|row| ModeSample {
            mode: row.n.to_string(),
            negative_count: row.negative_count,
            conjugate_value: row.conjugate_value.is_finite().then_some(row.conjugate_value),
        })
        .collect();
    SweepSample {
        parameter: point.r,
        mean_curvature: Some(point.mean_curvature),
        mean_curvature_derivative: point.derivative,
        morse_index: point
            .table
            .as_ref()
            .filter(|_| point.cutoff_certified)
            .map(ModeTable::index),
        modes,
    }
}

/// Sweeps the family, locates the first conjugate instant of every mode
/// `n = 1..=n_max`, and evaluates the gates and the verdict there.
///
/// Endpoint data are taken at `r_n -/+ w` with `w` the isolation window.
/// The instant is isolated when no other mode's conjugate value changes
/// sign across that window. The bifurcating branch is reported as symmetry
/// breaking when mode 0 is nondegenerate at `r_n`; when mode 0 is
/// degenerate too the flag is `false` and a note says it is undetermined.
pub fn rotsym_detect(sweep: &RotsymSweep) -> Result<BifurcationReport, RotsymError> {
    sweep.validate()?;
    let mut report = BifurcationReport::new("rotsym", "r", sweep.interval);
    let mut cont = Continuation::new(sweep);
    let mut points = Vec::new();
    for r in sweep.grid() {
        match cont.profile(r) {
            Ok(profile) => {
                let derivative = sweep.mean_curvature_derivative(r, profile.mean_curvature).ok();
                let table = match mode_table(&profile, sweep.n_max) {
                    Ok(t) => Some(t),
                    Err(e) => {
                        report.notes.push(format!("r = {r}: {e}"));
                        None
                    }
                };
                let cutoff_certified = table
                    .as_ref()
                    .and_then(|t| t.rows.last())
                    .is_some_and(|row| row.lowest_eigenvalue > row.zero_tolerance);
                if table.is_some() && !cutoff_certified {
                    report
                        .notes
                        .push(format!("r = {r}: mode cutoff {} too small", sweep.n_max));
                }
                points.push(GridPoint {
                    r,
                    mean_curvature: profile.mean_curvature,
                    derivative,
                    table,
                    cutoff_certified,
                });
            }
            Err(e) => report.notes.push(format!("r = {r}: {e}")),
        }
    }
    if points.is_empty() {
        return Err(RotsymError::NoSolution { r: sweep.interval[0] });
    }
    report.samples = points.iter().map(sample_row).collect();

    let window = ISOLATION_FACTOR * sweep.bisection_tolerance;
    for n in 1..=sweep.n_max {
        let Some((inst, guess)) = first_instant(sweep, &points, n) else {
            continue;
        };
        match evaluate_instant(sweep, &inst, guess, n, window) {
            Ok(entry) => report.instants.push(entry),
            Err(e) => report
                .notes
                .push(format!("mode {n} instant near r = {}: {e}", inst.parameter)),
        }
    }
    report.sort_instants();
    Ok(report)
}

/// First sign change of the mode-`n` conjugate value between consecutive
/// sampled profiles, refined with the mean curvature continued from the
/// left end of the bracket. Also returns that mean curvature as a guess
/// for later shots near the instant.
fn first_instant(sweep: &RotsymSweep, points: &[GridPoint], n: u32) -> Option<(ConjugateInstant, f64)> {
    points.windows(2).find_map(|pair| {
        let guess = pair[0].mean_curvature;
        let mut cont = Continuation::new(sweep);
        cont.guess = guess;
        scan_conjugate_family(
            |r| cont.profile(r).ok().and_then(|p| mode_problem(&p, n).ok()),
            &[pair[0].r, pair[1].r],
            sweep.bisection_tolerance,
        )
        .into_iter()
        .next()
        .map(|inst| (inst, guess))
    })
}

fn evaluate_instant(
    sweep: &RotsymSweep,
    inst: &ConjugateInstant,
    guess: f64,
    n: u32,
    window: f64,
) -> Result<InstantReport, RotsymError> {
    let center = sweep.shoot(inst.parameter, guess)?;
    let before = sweep.shoot(inst.parameter - window, guess)?;
    let after = sweep.shoot(inst.parameter + window, guess)?;
    let (index_a, table_a) = rotsym_morse_index(&before, sweep.n_max)?;
    let (index_b, table_b) = rotsym_morse_index(&after, sweep.n_max)?;
    let center_table = mode_table(&center, sweep.n_max)?;

    let mut notes = Vec::new();
    let isolated = table_a.rows.iter().zip(&table_b.rows).all(|(ra, rb)| {
        ra.n == n || {
            let same = ra.conjugate_value.signum() == rb.conjugate_value.signum()
                && ra.conjugate_value != 0.0
                && rb.conjugate_value != 0.0;
            if !same {
                notes.push(format!("mode {} also changes conjugacy within the window", ra.n));
            }
            same
        }
    });

    let mut gates = Vec::new();
    if table_a.nullity() > 0 || table_b.nullity() > 0 {
        gates.push(GateFailure::EndpointDegenerate);
    }
    let a = FamilySignature {
        index: index_a,
        fingerprint: fingerprint_from_table(&table_a),
    };
    let b = FamilySignature {
        index: index_b,
        fingerprint: fingerprint_from_table(&table_b),
    };
    let mut verdict = rotsym_verdict(gates, a, b, n);
    let derivative = sweep.mean_curvature_derivative(inst.parameter, center.mean_curvature)?;
    apply_derivative_gate(&mut verdict, derivative, sweep.derivative_threshold);
    if !inst.cross_validated() {
        notes.push(format!(
            "eigenvalue crossing does not confirm the instant within {AGREEMENT_TOLERANCE:e}"
        ));
    }
    if !isolated && verdict.fired != Fired::None {
        notes.push("instant is not isolated".into());
    }
    let mode0 = center_table.row(0).expect("mode 0 is always tabulated");
    let symmetry_breaking = !mode0.degenerate;
    if !symmetry_breaking {
        notes.push("mode 0 is degenerate at the instant; symmetry breaking undetermined".into());
    }
    verdict.notes.extend(notes);
    Ok(InstantReport {
        parameter: inst.parameter,
        bracket: inst.bracket,
        source: format!("mode {n}"),
        verdict,
        mean_curvature_derivative: Some(derivative),
        isolated: Some(isolated),
        symmetry_breaking: Some(symmetry_breaking),
    })
}
