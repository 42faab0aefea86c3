use std::f64::consts::{FRAC_PI_2, PI};

use equibif_core::equivariant::{Fired, IrrepLabel};
use equibif_core::rotsym::modes::mode_row;
use equibif_core::rotsym::profile::{BOUNDARY_TOLERANCE, CURVATURE_TOLERANCE};
use equibif_core::rotsym::*;
use equibif_core::spectral::dense::count_below;
use nalgebra::DMatrix;
use proptest::prelude::*;

fn cylinder(length: f64) -> DelaunayProfile {
    let b = BoundaryConfig::new(1.0, 1.0, length).unwrap();
    let opts = ShootingOptions {
        h_guess: Some(0.4),
        ..Default::default()
    };
    shoot_profile(&b, FRAC_PI_2, &opts).unwrap()
}

fn swept(r: f64, interior: usize) -> DelaunayProfile {
    let sweep = RotsymSweep::default();
    let opts = ShootingOptions {
        interior,
        ..sweep.shooting
    };
    shoot_profile(&sweep.boundary, r, &opts).unwrap()
}

#[test]
fn cylinder_is_recovered() {
    let p = cylinder(2.5);
    assert!((p.mean_curvature - 0.5).abs() < 1e-8);
    assert!(p.x.iter().all(|x| (x - 1.0).abs() < 1e-8));
    assert!(p.a2.iter().all(|a| (a - 1.0).abs() < 1e-8));
}

#[test]
fn cylinder_mode_coefficients() {
    let p = cylinder(2.5);
    let m0 = mode_problem(&p, 0).unwrap();
    assert!(m0.q().iter().all(|q| (q + 1.0).abs() < 1e-8));
    assert!(m0.p().iter().chain(m0.w()).all(|v| (v - 1.0).abs() < 1e-8));
    let m1 = mode_problem(&p, 1).unwrap();
    assert!(m1.q().iter().all(|q| q.abs() < 1e-8));
    assert_eq!(mode_row(&p, 1).unwrap().negative_count, 0);
}

#[test]
fn short_cylinder_is_stable_and_long_one_has_index_one() {
    let (index, _) = rotsym_morse_index(&cylinder(2.5), 1).unwrap();
    assert_eq!(index, 0);
    let long = cylinder(4.0);
    let (index, table) = rotsym_morse_index(&long, 1).unwrap();
    assert_eq!(index, 1);
    assert_eq!(table.row(0).unwrap().negative_count, 1);
    // (pi / L)^2 - 1 for the lowest mode-0 eigenvalue.
    let expected = (PI / 4.0).powi(2) - 1.0;
    assert!((table.row(0).unwrap().lowest_eigenvalue - expected).abs() < 1e-4);
    let fp = rotsym_fingerprint(&long, 1).unwrap();
    assert_eq!(fp.multiplicity(&IrrepLabel::Weight(0)), 1);
    assert_eq!(fp.entries.len(), 1);
    assert_eq!(fp.total_dim, 1);
}

#[test]
fn cutoff_must_be_certified() {
    // Mode 0 of the long cylinder is negative, so it cannot close the table.
    assert!(matches!(
        rotsym_morse_index(&cylinder(4.0), 0),
        Err(RotsymError::CutoffTooSmall { n_max: 0, .. })
    ));
}

#[test]
fn sphere_band_matches_circular_arc() {
    // Band of the unit sphere between latitudes -0.5 and 0.7.
    let (lo, hi) = (0.5_f64, 0.7_f64);
    let b = BoundaryConfig::new(lo.cos(), hi.cos(), hi.sin() + lo.sin()).unwrap();
    let opts = ShootingOptions {
        h_guess: Some(0.9),
        ..Default::default()
    };
    let p = shoot_profile(&b, FRAC_PI_2 - lo, &opts).unwrap();
    assert!((p.mean_curvature - 1.0).abs() < 1e-6);
    assert!((p.length - (lo + hi)).abs() < 1e-6);
    for ((s, x), z) in p.s.iter().zip(&p.x).zip(&p.z) {
        let lat = s - lo;
        assert!((x - lat.cos()).abs() < 1e-6);
        assert!((z - lat.sin() - lo.sin()).abs() < 1e-6);
    }
}

#[test]
fn unreachable_circle_has_no_solution() {
    let b = BoundaryConfig::new(1.0, 1.0, 1.0).unwrap();
    let opts = ShootingOptions {
        h_window: (0.45, 0.55),
        h_guess: Some(0.5),
        ..Default::default()
    };
    assert!(matches!(
        shoot_profile(&b, -FRAC_PI_2, &opts),
        Err(RotsymError::NoSolution { .. } | RotsymError::AxisCollision { .. })
    ));
}

#[test]
fn invalid_boundary_is_rejected() {
    assert!(BoundaryConfig::new(0.0, 1.0, 1.0).is_err());
    assert!(BoundaryConfig::new(1.0, 1.0, f64::NAN).is_err());
}

/// Negative count of the Jacobi operator on an `(s, theta)` grid: second
/// differences in `s` with Dirichlet ends, Fourier differentiation in
/// `theta`. The operator is multiplied by the positive weight `x`, which
/// keeps it symmetric without changing its inertia.
fn grid_oracle_index(profile: &DelaunayProfile, stride: usize, nt: usize) -> usize {
    let ns = (profile.x.len() - 1) / stride - 1;
    let hs = profile.length / (ns + 1) as f64;
    let xs: Vec<f64> = (0..ns + 2).map(|i| profile.x[i * stride]).collect();
    let a2: Vec<f64> = (0..ns + 2).map(|i| profile.a2[i * stride]).collect();
    let ht = 2.0 * PI / nt as f64;
    let d2 = DMatrix::from_fn(nt, nt, |j, k| {
        if j == k {
            -PI * PI / (3.0 * ht * ht) - 1.0 / 6.0
        } else {
            let d = j as f64 - k as f64;
            let sign = if (j + k) % 2 == 0 { 1.0 } else { -1.0 };
            -sign / (2.0 * (0.5 * d * ht).sin().powi(2))
        }
    });
    let n = ns * nt;
    let mut a = DMatrix::zeros(n, n);
    for i in 0..ns {
        let node = i + 1;
        let pl = 0.5 * (xs[node - 1] + xs[node]);
        let pr = 0.5 * (xs[node] + xs[node + 1]);
        for j in 0..nt {
            let row = i * nt + j;
            a[(row, row)] += (pl + pr) / (hs * hs) - xs[node] * a2[node];
            if i > 0 {
                a[(row, row - nt)] -= pl / (hs * hs);
            }
            if i + 1 < ns {
                a[(row, row + nt)] -= pr / (hs * hs);
            }
            for k in 0..nt {
                a[(row, i * nt + k)] -= d2[(j, k)] / xs[node];
            }
        }
    }
    count_below(&a, 0.0).unwrap()
}

#[test]
fn mode_index_matches_two_dimensional_oracle() {
    // 489 interior nodes subsample to 48 interior nodes with stride 10.
    for r in [-2.95, -2.8, -2.45] {
        let (index, _) = rotsym_morse_index(&swept(r, 511), 3).unwrap();
        let oracle = grid_oracle_index(&swept(r, 489), 10, 48);
        assert_eq!(index, oracle, "r = {r}");
    }
}

#[test]
fn swept_profiles_are_certified() {
    let sweep = RotsymSweep::default();
    let mut guess = sweep.shooting.h_guess.unwrap();
    for r in sweep.grid() {
        let opts = ShootingOptions {
            h_guess: Some(guess),
            ..sweep.shooting
        };
        let p = shoot_profile(&sweep.boundary, r, &opts).unwrap();
        let c = p.certificate;
        assert!(c.certified);
        assert!(c.unit_speed_error <= BOUNDARY_TOLERANCE);
        assert!(c.boundary_error <= BOUNDARY_TOLERANCE);
        assert!(c.mean_curvature_error <= CURVATURE_TOLERANCE);
        guess = p.mean_curvature;
    }
}

#[test]
fn orientation_flip_leaves_spectra_unchanged() {
    let p = swept(-2.7, 512);
    let q = p.reversed_orientation();
    assert_eq!(q.mean_curvature, -p.mean_curvature);
    for n in 0..=3 {
        let (a, b) = (mode_row(&p, n).unwrap(), mode_row(&q, n).unwrap());
        assert_eq!(a.negative_count, b.negative_count);
        assert!((a.lowest_eigenvalue - b.lowest_eigenvalue).abs() <= 1e-12 * a.lowest_eigenvalue.abs().max(1.0));
        assert!((a.conjugate_value - b.conjugate_value).abs() <= 1e-12 * a.conjugate_value.abs().max(1.0));
    }
}

#[test]
fn only_mode_two_becomes_conjugate_on_the_sweep() {
    let sweep = RotsymSweep::default();
    let grid = sweep.grid();
    for n in [0, 1, 3] {
        assert!(conjugate_scan(&sweep, &grid, n).is_empty(), "mode {n}");
    }
    let found = conjugate_scan(&sweep, &grid, 2);
    assert_eq!(found.len(), 1);
    let inst = &found[0];
    assert!(inst.bracket[1] - inst.bracket[0] <= sweep.bisection_tolerance);
    assert!(inst.cross_validated(), "{inst:?}");
}

#[test]
fn detector_fires_representation_jump_at_mode_two() {
    let sweep = RotsymSweep::default();
    let report = rotsym_detect(&sweep).unwrap();
    assert_eq!(report.instants.len(), 1);
    let inst = &report.instants[0];
    assert_eq!(inst.source, "mode 2");
    assert_eq!(inst.verdict.fired, Fired::RepresentationJump);
    assert!(inst.verdict.gate_failures.is_empty());
    assert_eq!(inst.isolated, Some(true));
    assert_eq!(inst.symmetry_breaking, Some(true));
    assert!(inst.mean_curvature_derivative.unwrap().abs() > sweep.derivative_threshold);
    let before = inst.fingerprint_before().unwrap();
    let after = inst.fingerprint_after().unwrap();
    let gained = after.gained_over(before);
    assert_eq!(gained.len(), 1);
    assert_eq!(gained[0].label, IrrepLabel::Weight(2));
    assert_eq!(gained[0].isotypic_dim(), 2);
    assert_eq!(after.total_dim, inst.verdict.index_b);
    // The index staircase agrees with the instant.
    for s in &report.samples {
        let expected = if s.parameter < inst.parameter { 3 } else { 5 };
        assert_eq!(s.morse_index, Some(expected), "r = {}", s.parameter);
    }
}

#[test]
fn fingerprint_dimension_is_the_index() {
    for r in [-2.9, -2.5] {
        let p = swept(r, 512);
        let (index, _) = rotsym_morse_index(&p, 3).unwrap();
        assert_eq!(rotsym_fingerprint(&p, 3).unwrap().total_dim, index);
    }
}

#[test]
fn invalid_sweeps_are_rejected() {
    let mut s = RotsymSweep::default();
    s.interval = [1.0, 0.0];
    assert!(matches!(rotsym_detect(&s), Err(RotsymError::InvalidSweep(_))));
    let mut s = RotsymSweep::default();
    s.samples = 0;
    assert!(matches!(rotsym_detect(&s), Err(RotsymError::InvalidSweep(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn modes_increase_with_n(r in -2.95f64..-2.45) {
        let p = swept(r, 512);
        let rows: Vec<_> = (0..=3).map(|n| mode_row(&p, n).unwrap()).collect();
        for pair in rows.windows(2) {
            prop_assert!(pair[1].lowest_eigenvalue > pair[0].lowest_eigenvalue);
            prop_assert!(pair[1].negative_count <= pair[0].negative_count);
        }
    }
}
