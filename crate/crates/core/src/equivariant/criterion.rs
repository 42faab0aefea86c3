//! Endpoint comparison for equivariant bifurcation: precondition gates,
//! Morse index jump, and negative isotropy representation jump.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::fingerprint::{fingerprint, fingerprints_equivalent, Fingerprint};
use super::group::{nice_group, GroupAction, Niceness};
use super::EquivariantError;
use crate::spectral::dense::{check_symmetric, eigenpairs_up_to, inertia, max_abs};

/// Relative zero threshold for eigenvalues (fraction of the spectral radius).
pub const ZERO_RELATIVE: f64 = 1e-7;

/// Eigenpairs with eigenvalue `<= epsilon`.
#[derive(Debug, Clone, PartialEq)]
pub struct NegativeEigendata {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<f64>,
    pub epsilon: f64,
}

impl NegativeEigendata {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }
}

/// Generalized negative eigenspace: all eigenpairs with eigenvalue at most
/// `epsilon` (closed condition).
pub fn negative_eigenspace(a: &DMatrix<f64>, epsilon: f64) -> Result<NegativeEigendata, EquivariantError> {
    let pairs = eigenpairs_up_to(a, epsilon)?;
    Ok(NegativeEigendata {
        eigenvalues: pairs.values,
        eigenvectors: pairs.vectors,
        epsilon,
    })
}

/// Zero threshold for a symmetric matrix: `ZERO_RELATIVE` times a bound on
/// its spectral radius.
pub fn zero_tolerance(a: &DMatrix<f64>) -> f64 {
    let radius = a
        .row_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let radius = radius.max(max_abs(a));
    ZERO_RELATIVE * if radius > 0.0 { radius } else { 1.0 }
}

#[derive(Debug, Clone)]
pub struct EndpointData {
    /// Second derivative of the functional on the slice (or the full space,
    /// with the orbit directions in its kernel).
    pub hessian: DMatrix<f64>,
    pub isotropy: GroupAction,
    pub orbit_tangent_dim: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fired {
    MorseJump,
    RepresentationJump,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateFailure {
    IsotropyNotConstant,
    IsotropyNotNiceUnknown,
    EndpointDegenerate,
    ParameterDerivativeZero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionVerdict {
    pub fired: Fired,
    pub gate_failures: Vec<GateFailure>,
    pub index_a: usize,
    pub index_b: usize,
    pub fingerprint_a: Option<Fingerprint>,
    pub fingerprint_b: Option<Fingerprint>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl CriterionVerdict {
    /// Verdict from data computed elsewhere (closed forms or mode tables):
    /// gates first, then Morse jump, then representation jump.
    pub fn from_endpoint_summaries(gate_failures: Vec<GateFailure>, a: FamilySignature, b: FamilySignature) -> Self {
        let fired = if !gate_failures.is_empty() {
            Fired::None
        } else if a.index != b.index {
            Fired::MorseJump
        } else if a.fingerprint.entries != b.fingerprint.entries {
            Fired::RepresentationJump
        } else {
            Fired::None
        };
        Self {
            fired,
            gate_failures,
            index_a: a.index,
            index_b: b.index,
            fingerprint_a: Some(a.fingerprint),
            fingerprint_b: Some(b.fingerprint),
            notes: Vec::new(),
        }
    }

    /// Whether the negative isotropy representations differ, independently
    /// of which criterion fired first.
    pub fn representation_changed(&self) -> bool {
        match (&self.fingerprint_a, &self.fingerprint_b) {
            (Some(a), Some(b)) => a.entries != b.entries,
            _ => false,
        }
    }
}

/// Index and negative isotropy representation at one parameter value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilySignature {
    pub index: usize,
    pub fingerprint: Fingerprint,
}

/// Index and fingerprint of the eigenspace of eigenvalues `<= epsilon`,
/// leaving out the zero cluster `|mu| <= tol`, which holds the orbit
/// directions rather than slice directions.
pub fn family_signature(
    hessian: &DMatrix<f64>,
    isotropy: &GroupAction,
    epsilon: f64,
) -> Result<FamilySignature, EquivariantError> {
    let tol = zero_tolerance(hessian);
    let data = negative_eigenspace(hessian, epsilon)?;
    let keep: Vec<usize> = (0..data.dim()).filter(|&i| data.eigenvalues[i].abs() > tol).collect();
    let mut basis = DMatrix::zeros(hessian.nrows(), keep.len());
    for (c, &i) in keep.iter().enumerate() {
        basis.set_column(c, &data.eigenvectors.column(i));
    }
    let index = keep.len();
    let fingerprint = fingerprint(isotropy, &basis)?;
    Ok(FamilySignature { index, fingerprint })
}

/// Evaluates the bifurcation criterion between two nondegenerate endpoints.
/// Gates are checked in order (constant isotropy, niceness, kernel equal to
/// the orbit tangent space); then a Morse jump fires if the negative
/// eigenspace dimensions differ, else a representation jump fires if their
/// fingerprints are inequivalent.
pub fn evaluate_criterion(
    a: &EndpointData,
    b: &EndpointData,
    epsilon: f64,
) -> Result<CriterionVerdict, EquivariantError> {
    for e in [a, b] {
        check_symmetric(&e.hessian)?;
        if e.hessian.nrows() != e.isotropy.dim() {
            return Err(EquivariantError::DimensionMismatch {
                expected: e.isotropy.dim(),
                actual: e.hessian.nrows(),
            });
        }
    }
    let mut gates = Vec::new();
    if !a.isotropy.same_group(&b.isotropy) {
        gates.push(GateFailure::IsotropyNotConstant);
    }
    if nice_group(&a.isotropy.nice_descriptor()) == Niceness::Unknown {
        gates.push(GateFailure::IsotropyNotNiceUnknown);
    }
    let degenerate = [a, b].iter().any(|e| {
        let tol = zero_tolerance(&e.hessian);
        let kernel = inertia(&e.hessian, 0.0, tol).map(|i| i.zero).unwrap_or(usize::MAX);
        kernel != e.orbit_tangent_dim
    });
    if degenerate {
        gates.push(GateFailure::EndpointDegenerate);
    }
    let mut notes = Vec::new();
    let mut signature = |e: &EndpointData| match family_signature(&e.hessian, &e.isotropy, epsilon) {
        Ok(s) => (s.index, Some(s.fingerprint)),
        Err(err) => {
            notes.push(format!("fingerprint unavailable: {err}"));
            let tol = zero_tolerance(&e.hessian);
            let index = inertia(&e.hessian, 0.0, tol).map(|i| i.negative).unwrap_or(0);
            (index, None)
        }
    };
    let (index_a, fingerprint_a) = signature(a);
    let (index_b, fingerprint_b) = signature(b);
    let fired = if !gates.is_empty() {
        Fired::None
    } else if index_a != index_b {
        Fired::MorseJump
    } else {
        match (&fingerprint_a, &fingerprint_b) {
            (Some(fa), Some(fb)) if !fingerprints_equivalent(fa, fb)? => Fired::RepresentationJump,
            _ => Fired::None,
        }
    };
    Ok(CriterionVerdict {
        fired,
        gate_failures: gates,
        index_a,
        index_b,
        fingerprint_a,
        fingerprint_b,
        notes,
    })
}

/// Records a vanishing parameter derivative (of the mean curvature, or of
/// whatever plays the role of the parameter) as a gate failure.
pub fn apply_derivative_gate(verdict: &mut CriterionVerdict, derivative: f64, threshold: f64) {
    if !(derivative.abs() > threshold) {
        if !verdict.gate_failures.contains(&GateFailure::ParameterDerivativeZero) {
            verdict.gate_failures.push(GateFailure::ParameterDerivativeZero);
        }
        verdict.fired = Fired::None;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
}

impl Bracket {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Brackets every parameter in `[a, b]` where the sampled family data
/// changes, each to width at most `tol`. The interval is first cut into
/// `samples` pieces so that changes which cancel between the endpoints are
/// still found.
pub fn localize_instant<T, F>(
    mut family: F,
    a: f64,
    b: f64,
    tol: f64,
    samples: usize,
) -> Result<Vec<Bracket>, EquivariantError>
where
    T: PartialEq,
    F: FnMut(f64) -> T,
{
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(EquivariantError::InvalidInput(format!(
            "interval [{a}, {b}] is not a finite interval"
        )));
    }
    if !(tol > 0.0) {
        return Err(EquivariantError::InvalidInput(format!(
            "tolerance {tol} must be positive"
        )));
    }
    let n = samples.max(1);
    let mut out = Vec::new();
    let mut lo = a;
    let mut f_lo = family(lo);
    for i in 1..=n {
        let hi = if i == n { b } else { a + (b - a) * i as f64 / n as f64 };
        let f_hi = family(hi);
        if f_hi != f_lo {
            refine(&mut family, lo, &f_lo, hi, &f_hi, tol, &mut out);
        }
        lo = hi;
        f_lo = f_hi;
    }
    if out.is_empty() {
        return Err(EquivariantError::NoChangeDetected);
    }
    Ok(out)
}

fn refine<T: PartialEq, F: FnMut(f64) -> T>(
    family: &mut F,
    lo: f64,
    f_lo: &T,
    hi: f64,
    f_hi: &T,
    tol: f64,
    out: &mut Vec<Bracket>,
) {
    let mid = 0.5 * (lo + hi);
    if hi - lo <= tol || mid <= lo || mid >= hi {
        out.push(Bracket { lo, hi });
        return;
    }
    let f_mid = family(mid);
    if f_mid != *f_lo {
        refine(family, lo, f_lo, mid, &f_mid, tol, out);
    }
    if f_mid != *f_hi {
        refine(family, mid, &f_mid, hi, f_hi, tol, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equivariant::fingerprint::IrrepLabel;

    fn diag(v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(v))
    }

    #[test]
    fn negative_eigenspace_examples() {
        let n = negative_eigenspace(&diag(&[-2.0, -1.0, 3.0]), 0.0).unwrap();
        assert_eq!(n.eigenvalues.len(), 2);
        assert!((n.eigenvalues[0] + 2.0).abs() < 1e-12 && (n.eigenvalues[1] + 1.0).abs() < 1e-12);
        assert!(n.eigenvectors[(2, 0)].abs() < 1e-12 && n.eigenvectors[(2, 1)].abs() < 1e-12);
        assert_eq!(negative_eigenspace(&DMatrix::identity(3, 3), 0.0).unwrap().dim(), 0);
        let inclusive = negative_eigenspace(&diag(&[-1.0, 0.5, 2.0]), 0.5).unwrap();
        assert_eq!(inclusive.dim(), 2);
    }

    #[test]
    fn morse_jump_with_trivial_group() {
        let ep = |h| EndpointData {
            hessian: h,
            isotropy: GroupAction::trivial(3),
            orbit_tangent_dim: 0,
        };
        let v = evaluate_criterion(&ep(diag(&[-1.0, -1.0, 1.0])), &ep(DMatrix::identity(3, 3)), 0.0).unwrap();
        assert_eq!(v.fired, Fired::MorseJump);
        assert_eq!((v.index_a, v.index_b), (2, 0));
        assert!(v.gate_failures.is_empty());
        let same = evaluate_criterion(&ep(DMatrix::identity(3, 3)), &ep(DMatrix::identity(3, 3)), 0.0).unwrap();
        assert_eq!(same.fired, Fired::None);
    }

    #[test]
    fn representation_jump_with_circle_weights() {
        let iso = GroupAction::circle(vec![1, 2], false);
        let ep = |h| EndpointData {
            hessian: h,
            isotropy: iso.clone(),
            orbit_tangent_dim: 0,
        };
        let a = ep(diag(&[-1.0, -1.0, 1.0, 1.0]));
        let b = ep(diag(&[1.0, 1.0, -1.0, -1.0]));
        let v = evaluate_criterion(&a, &b, 0.0).unwrap();
        assert_eq!(v.fired, Fired::RepresentationJump);
        assert_eq!(v.index_a, v.index_b);
        assert_eq!(v.fingerprint_a.unwrap().multiplicity(&IrrepLabel::Weight(1)), 1);
        assert_eq!(v.fingerprint_b.unwrap().multiplicity(&IrrepLabel::Weight(2)), 1);
    }

    #[test]
    fn gates_block_firing() {
        let ep = |h, iso| EndpointData {
            hessian: h,
            isotropy: iso,
            orbit_tangent_dim: 0,
        };
        let degenerate = evaluate_criterion(
            &ep(diag(&[0.0, -1.0]), GroupAction::trivial(2)),
            &ep(diag(&[1.0, 1.0]), GroupAction::trivial(2)),
            0.0,
        )
        .unwrap();
        assert_eq!(degenerate.fired, Fired::None);
        assert_eq!(degenerate.gate_failures, vec![GateFailure::EndpointDegenerate]);

        let flip = GroupAction::finite(2, vec![diag(&[1.0, -1.0])]).unwrap();
        let changing = evaluate_criterion(
            &ep(diag(&[-1.0, 1.0]), GroupAction::trivial(2)),
            &ep(diag(&[1.0, 1.0]), flip),
            0.0,
        )
        .unwrap();
        assert_eq!(changing.gate_failures, vec![GateFailure::IsotropyNotConstant]);

        let mut v = evaluate_criterion(
            &ep(diag(&[-1.0, 1.0]), GroupAction::trivial(2)),
            &ep(diag(&[1.0, 1.0]), GroupAction::trivial(2)),
            0.0,
        )
        .unwrap();
        assert_eq!(v.fired, Fired::MorseJump);
        apply_derivative_gate(&mut v, 0.0, 1e-6);
        assert_eq!(v.fired, Fired::None);
        assert_eq!(v.gate_failures, vec![GateFailure::ParameterDerivativeZero]);
    }

    #[test]
    fn localize_examples() {
        let index = |m: DMatrix<f64>| negative_eigenspace(&m, 0.0).unwrap().dim();
        let found = localize_instant(|l| index(diag(&[l, 1.0])), -1.0, 1.0, 1e-8, 1).unwrap();
        assert_eq!(found.len(), 1);
        assert!(found[0].midpoint().abs() < 1e-8 && found[0].width() <= 1e-8);

        assert!(matches!(
            localize_instant(|_| 3usize, -1.0, 1.0, 1e-8, 8),
            Err(EquivariantError::NoChangeDetected)
        ));

        let two = localize_instant(|l| index(diag(&[l - 0.25, l + 0.5])), -1.0, 1.0, 1e-8, 1).unwrap();
        assert_eq!(two.len(), 2);
        assert!((two[0].midpoint() + 0.5).abs() < 1e-8);
        assert!((two[1].midpoint() - 0.25).abs() < 1e-8);
    }
}
