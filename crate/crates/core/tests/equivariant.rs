use equibif_core::equivariant::*;
use equibif_core::sandbox::{branch_radius, sandbox_detect, SandboxConfig};
use equibif_core::spectral::SymTridiagonal;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const WEIGHTS: [i64; 3] = [1, 2, 3];

fn circle() -> GroupAction {
    GroupAction::circle(WEIGHTS.to_vec(), true)
}

/// Permutations of three coordinates.
fn s3() -> GroupAction {
    let swap = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
    let cycle = DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
    GroupAction::finite(3, vec![swap, cycle]).unwrap()
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
}

fn random_orthogonal(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    random_matrix(rng, n, n).qr().q()
}

/// Coordinate basis of the circle planes in `planes` (index 3 is the fixed
/// axis), mixed by a random orthogonal matrix.
fn plane_basis(rng: &mut ChaCha8Rng, planes: &[usize]) -> DMatrix<f64> {
    let cols: Vec<usize> = planes
        .iter()
        .flat_map(|&p| if p == 3 { vec![6] } else { vec![2 * p, 2 * p + 1] })
        .collect();
    let raw = DMatrix::from_fn(7, cols.len(), |i, j| f64::from(u8::from(i == cols[j])));
    raw * random_orthogonal(rng, cols.len())
}

/// Oblique projector with image spanned by `basis`.
fn oblique_projector(rng: &mut ChaCha8Rng, basis: &DMatrix<f64>) -> DMatrix<f64> {
    let c = basis + random_matrix(rng, basis.nrows(), basis.ncols()) * 0.3;
    let inner = (c.transpose() * basis).try_inverse().unwrap();
    basis * inner * c.transpose()
}

fn max_abs(a: &DMatrix<f64>) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn subset(mask: u8, n: usize) -> Vec<usize> {
    (0..n).filter(|i| mask & (1 << i) != 0).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn haar_projector_is_an_equivariant_projector(seed in any::<u64>(), mask in 1u8..15, use_s3 in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (action, basis) = if use_s3 {
            let diagonal = DMatrix::from_element(3, 1, 1.0 / 3f64.sqrt());
            let basis = if mask % 2 == 0 {
                diagonal
            } else {
                let id = DMatrix::<f64>::identity(3, 3);
                (id - &diagonal * diagonal.transpose()).columns(0, 2).qr().q()
            };
            (s3(), basis)
        } else {
            (circle(), plane_basis(&mut rng, &subset(mask, 4)))
        };
        let p = oblique_projector(&mut rng, &basis);
        let q = haar_project(&p, &action).unwrap();
        prop_assert!(max_abs(&(&q * &q - &q)) < 1e-9);
        prop_assert!(max_abs(&(&q * &p - &p)) < 1e-9);
        for g in action.test_elements() {
            prop_assert!(max_abs(&(&g * &q - &q * &g)) < 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn fingerprints_add_over_direct_sums(seed in any::<u64>(), mask in 1u8..15, split in 1u8..15) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let planes = subset(mask, 4);
        let (left, right): (Vec<usize>, Vec<usize>) = planes.iter().partition(|&&p| split & (1 << p) != 0);
        prop_assume!(!left.is_empty() && !right.is_empty());
        let action = circle();
        let (bv, bw) = (plane_basis(&mut rng, &left), plane_basis(&mut rng, &right));
        let mut both = DMatrix::zeros(7, bv.ncols() + bw.ncols());
        both.columns_mut(0, bv.ncols()).copy_from(&bv);
        both.columns_mut(bv.ncols(), bw.ncols()).copy_from(&bw);
        let sum = fingerprint(&action, &both).unwrap();
        let parts = fingerprint(&action, &bv).unwrap().direct_sum(&fingerprint(&action, &bw).unwrap()).unwrap();
        prop_assert_eq!(&sum, &parts);
        prop_assert_eq!(sum.total_dim, both.ncols());
    }

    #[test]
    fn criterion_is_invariant_under_equivariant_conjugation(seed in any::<u64>(), scale_a in 0.1f64..10.0, scale_b in 0.1f64..10.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let action = circle();
        // Invariant Hessians are scalar on each isotypic block.
        let mut invariant = || {
            let mut diag = Vec::new();
            for _ in 0..3 {
                let mut v: f64 = rng.random_range(0.2..2.0);
                if rng.random_bool(0.5) {
                    v = -v;
                }
                diag.extend([v, v]);
            }
            diag.push(rng.random_range(0.2..2.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 });
            DMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag))
        };
        let (ha, hb) = (invariant(), invariant());
        // Rotations within each plane and a sign on the axis commute with the action.
        let mut q = DMatrix::<f64>::identity(7, 7);
        for p in 0..3 {
            let (s, c) = rng.random_range(0.0..std::f64::consts::TAU).sin_cos();
            q[(2 * p, 2 * p)] = c;
            q[(2 * p, 2 * p + 1)] = -s;
            q[(2 * p + 1, 2 * p)] = s;
            q[(2 * p + 1, 2 * p + 1)] = c;
        }
        q[(6, 6)] = -1.0;
        let endpoint = |h: DMatrix<f64>| EndpointData { hessian: h, isotropy: action.clone(), orbit_tangent_dim: 0 };
        let base = evaluate_criterion(&endpoint(ha.clone()), &endpoint(hb.clone()), 0.0).unwrap();
        let conj = |h: &DMatrix<f64>, s: f64| {
            let m = &q * h * q.transpose() * s;
            0.5 * (&m + m.transpose())
        };
        let moved = evaluate_criterion(&endpoint(conj(&ha, scale_a)), &endpoint(conj(&hb, scale_b)), 0.0).unwrap();
        prop_assert_eq!(base.fired, moved.fired);
        prop_assert_eq!(base.index_a, moved.index_a);
        prop_assert_eq!(base.index_b, moved.index_b);
        prop_assert_eq!(&base.fingerprint_a, &moved.fingerprint_a);
        prop_assert_eq!(&base.fingerprint_b, &moved.fingerprint_b);
    }

    #[test]
    fn criterion_is_invariant_under_orthogonal_conjugation_without_symmetry(seed in any::<u64>(), scale in 0.1f64..10.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 5;
        let mut sym = || {
            let m = random_matrix(&mut rng, n, n);
            &m + m.transpose()
        };
        let (ha, hb) = (sym(), sym());
        let q = random_orthogonal(&mut rng, n);
        let endpoint = |h: DMatrix<f64>| EndpointData { hessian: h, isotropy: GroupAction::trivial(n), orbit_tangent_dim: 0 };
        let base = evaluate_criterion(&endpoint(ha.clone()), &endpoint(hb.clone()), 0.0).unwrap();
        let conj = |h: &DMatrix<f64>| {
            let m = &q * h * q.transpose() * scale;
            0.5 * (&m + m.transpose())
        };
        let moved = evaluate_criterion(&endpoint(conj(&ha)), &endpoint(conj(&hb)), 0.0).unwrap();
        prop_assert_eq!(base.fired, moved.fired);
        prop_assert_eq!((base.index_a, base.index_b), (moved.index_a, moved.index_b));
    }

    #[test]
    fn degree_of_a_linear_map_is_the_sign_of_its_determinant(seed in any::<u64>(), d in 1usize..=3, radius in 0.01f64..2.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_orthogonal(&mut rng, d) * DMatrix::from_diagonal(&nalgebra::DVector::from_fn(d, |_, _| rng.random_range(0.5..2.0)))
            * random_orthogonal(&mut rng, d);
        let sign = a.determinant().signum() as i64;
        let center: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let c = center.clone();
        let f = |x: &[f64]| {
            let v = nalgebra::DVector::from_iterator(d, x.iter().zip(&c).map(|(x, c)| x - c));
            (&a * v).iter().copied().collect::<Vec<_>>()
        };
        prop_assert_eq!(brouwer_degree(f, &center, radius).unwrap(), sign);
    }

    #[test]
    fn negative_eigenspace_matches_sturm_count(seed in any::<u64>(), n in 2usize..40) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let diag: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let off: Vec<f64> = (0..n - 1).map(|_| rng.random_range(-1.0..1.0)).collect();
        let t = SymTridiagonal::new(diag.clone(), off.clone());
        let dense = DMatrix::from_fn(n, n, |i, j| {
            if i == j { diag[i] } else if i + 1 == j { off[i] } else if j + 1 == i { off[j] } else { 0.0 }
        });
        let data = negative_eigenspace(&dense, 0.0).unwrap();
        prop_assert_eq!(data.dim(), t.count_below(0.0));
    }
}

#[test]
fn sandbox_pitchfork_fires_and_finds_the_orbit() {
    let out = sandbox_detect(&SandboxConfig::default()).unwrap();
    let fired: Vec<_> = out
        .report
        .instants
        .iter()
        .filter(|i| i.verdict.fired != Fired::None)
        .collect();
    assert_eq!(fired.len(), 1);
    assert!(fired[0].parameter.abs() < 1e-6);
    assert!(!out.branch_radii.is_empty());
    let expected = branch_radius(0.02);
    assert!((expected - 0.1).abs() < 1e-15);
    for r in &out.branch_radii {
        assert!((r - expected).abs() < 1e-8, "{r}");
    }
}
