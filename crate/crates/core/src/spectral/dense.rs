//! Dense symmetric kernels: Householder tridiagonalization, inertia
//! counting, and shift-inverted block iteration for the low end of large
//! spectra.

use nalgebra::DMatrix;

use super::tridiagonal::SymTridiagonal;
use super::SpectralError;

/// Relative asymmetry tolerated by every dense entry point.
pub const SYMMETRY_TOLERANCE: f64 = 1e-10;

/// Eigenpairs sorted by eigenvalue; `vectors` holds unit eigenvectors as
/// columns.
#[derive(Debug, Clone)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

/// Counts of negative, zero and positive eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Inertia {
    pub negative: usize,
    pub zero: usize,
    pub positive: usize,
}

pub fn max_abs(a: &DMatrix<f64>) -> f64 {
    a.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

pub fn check_symmetric(a: &DMatrix<f64>) -> Result<(), SpectralError> {
    if !a.is_square() {
        return Err(SpectralError::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    let n = a.nrows();
    let scale = max_abs(a);
    let mut worst = 0.0_f64;
    for j in 0..n {
        for i in (j + 1)..n {
            worst = worst.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    if worst > SYMMETRY_TOLERANCE * scale.max(f64::MIN_POSITIVE) {
        return Err(SpectralError::NotSymmetric { asymmetry: worst });
    }
    Ok(())
}

/// Householder reduction `A = Q T Q^T`.
pub fn tridiagonalize(a: &DMatrix<f64>) -> (SymTridiagonal, DMatrix<f64>) {
    let n = a.nrows();
    let mut work = a.clone();
    let mut q = DMatrix::<f64>::identity(n, n);
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    for k in 0..n.saturating_sub(2) {
        let m = n - k - 1;
        let alpha_norm = (0..m).map(|i| work[(k + 1 + i, k)].powi(2)).sum::<f64>().sqrt();
        if alpha_norm == 0.0 {
            continue;
        }
        let x0 = work[(k + 1, k)];
        let alpha = -alpha_norm.copysign(x0);
        for i in 0..m {
            v[i] = work[(k + 1 + i, k)];
        }
        v[0] -= alpha;
        let vnorm2: f64 = v[..m].iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        let beta = 2.0 / vnorm2;
        // p = beta * A22 v
        for i in 0..m {
            p[i] = 0.0;
        }
        for j in 0..m {
            let vj = v[j];
            if vj == 0.0 {
                continue;
            }
            let col = work.column(k + 1 + j);
            for i in 0..m {
                p[i] += col[k + 1 + i] * vj;
            }
        }
        for pi in p[..m].iter_mut() {
            *pi *= beta;
        }
        let pv: f64 = p[..m].iter().zip(&v[..m]).map(|(a, b)| a * b).sum();
        let c = 0.5 * beta * pv;
        // w = p - c v ; A22 -= v w^T + w v^T
        for i in 0..m {
            p[i] -= c * v[i];
        }
        for j in 0..m {
            let (vj, wj) = (v[j], p[j]);
            let mut col = work.column_mut(k + 1 + j);
            for i in 0..m {
                col[k + 1 + i] -= v[i] * wj + p[i] * vj;
            }
        }
        work[(k + 1, k)] = alpha;
        work[(k, k + 1)] = alpha;
        for i in 1..m {
            work[(k + 1 + i, k)] = 0.0;
            work[(k, k + 1 + i)] = 0.0;
        }
        // Q <- Q H, H = I - beta v v^T acting on indices k+1..n
        for r in 0..n {
            let mut s = 0.0;
            for i in 0..m {
                s += q[(r, k + 1 + i)] * v[i];
            }
            s *= beta;
            if s != 0.0 {
                for i in 0..m {
                    q[(r, k + 1 + i)] -= s * v[i];
                }
            }
        }
    }
    let diag = (0..n).map(|i| work[(i, i)]).collect();
    let off = (0..n.saturating_sub(1)).map(|i| work[(i + 1, i)]).collect();
    (SymTridiagonal::new(diag, off), q)
}

/// Lowest `count` eigenpairs of a dense symmetric matrix.
pub fn dense_symmetric_eigen(a: &DMatrix<f64>, count: usize) -> Result<EigenPairs, SpectralError> {
    check_symmetric(a)?;
    let n = a.nrows();
    let count = count.min(n);
    let (t, q) = tridiagonalize(a);
    let values = t.lowest_eigenvalues(count);
    let small = t.eigenvectors(&values);
    let mut vectors = DMatrix::<f64>::zeros(n, count);
    for (c, y) in small.iter().enumerate() {
        let y = nalgebra::DVector::from_column_slice(y);
        let x = &q * y;
        vectors.set_column(c, &x);
    }
    Ok(EigenPairs { values, vectors })
}

/// All eigenvalues `<= threshold` (closed), with their eigenvectors.
pub fn eigenpairs_up_to(a: &DMatrix<f64>, threshold: f64) -> Result<EigenPairs, SpectralError> {
    check_symmetric(a)?;
    let n = a.nrows();
    let (t, q) = tridiagonalize(a);
    let slack = 16.0 * f64::EPSILON * t.scale();
    let count = t.count_below(threshold + slack);
    let values = t.lowest_eigenvalues(count);
    let small = t.eigenvectors(&values);
    let mut vectors = DMatrix::<f64>::zeros(n, count);
    for (c, y) in small.iter().enumerate() {
        let x = &q * nalgebra::DVector::from_column_slice(y);
        vectors.set_column(c, &x);
    }
    Ok(EigenPairs { values, vectors })
}

/// Inertia of `A` by an unpivoted LDL^T factorization of `A - shift I`,
/// reading signs of the pivots (Sylvester's law).
///
/// Eigenvalues within `zero_tol` of `shift` are reported as zero by
/// factoring at `shift - zero_tol` and `shift + zero_tol`.
pub fn inertia(a: &DMatrix<f64>, shift: f64, zero_tol: f64) -> Result<Inertia, SpectralError> {
    check_symmetric(a)?;
    let n = a.nrows();
    let below = count_below(a, shift - zero_tol)?;
    let below_or_zero = if zero_tol > 0.0 {
        count_below(a, shift + zero_tol)?
    } else {
        below
    };
    Ok(Inertia {
        negative: below,
        zero: below_or_zero - below,
        positive: n - below_or_zero,
    })
}

/// Number of eigenvalues strictly below `x`, from the pivots of the
/// LDL^T factorization of `A - x I`.
pub fn count_below(a: &DMatrix<f64>, x: f64) -> Result<usize, SpectralError> {
    let n = a.nrows();
    let mut work = a.clone();
    for i in 0..n {
        work[(i, i)] -= x;
    }
    let scale = max_abs(a).max(x.abs()).max(f64::MIN_POSITIVE);
    let guard = 1e-14 * scale;
    let mut negatives = 0;
    let data = work.as_mut_slice();
    for k in 0..n {
        let mut d = data[k * n + k];
        if d.abs() < guard {
            d = guard.copysign(if d == 0.0 { 1.0 } else { d });
        }
        if d < 0.0 {
            negatives += 1;
        }
        // Column k below the pivot holds the multiplier numerators.
        let (head, tail) = data.split_at_mut((k + 1) * n);
        let col_k = &head[k * n..(k + 1) * n];
        for j in (k + 1)..n {
            let f = col_k[j] / d;
            if f == 0.0 {
                continue;
            }
            let col_j = &mut tail[(j - k - 1) * n..(j - k) * n];
            for (cj, ck) in col_j[j..].iter_mut().zip(&col_k[j..]) {
                *cj -= f * ck;
            }
        }
    }
    Ok(negatives)
}

/// Lowest `count` eigenvalues of a large dense symmetric matrix by block
/// inverse iteration on `(A - sigma I)^{-1}`, with `sigma` below the
/// spectrum so that the shifted matrix is positive definite.
pub fn lowest_eigenvalues_shift_invert(
    a: &DMatrix<f64>,
    count: usize,
    sigma: f64,
    rel_tol: f64,
) -> Result<Vec<f64>, SpectralError> {
    check_symmetric(a)?;
    let n = a.nrows();
    let block = (count + 8).min(n);
    let mut chol = a.clone();
    for i in 0..n {
        chol[(i, i)] -= sigma;
    }
    cholesky_in_place(&mut chol)?;
    let mut x = DMatrix::<f64>::from_fn(n, block, |i, j| {
        let t = (i as f64 + 1.0) * (0.7548776662466927 + 0.0123 * j as f64);
        (t * 43758.5453).sin()
    });
    let mut previous: Option<Vec<f64>> = None;
    for _ in 0..500 {
        orthonormalize_columns(&mut x);
        let y = cholesky_solve(&chol, &x);
        // Rayleigh-Ritz for (A - sigma)^{-1} on span(y).
        let mut yq = y.clone();
        orthonormalize_columns(&mut yq);
        let ay = a * &yq;
        let small = yq.transpose() * &ay;
        let small = 0.5 * (&small + small.transpose());
        let eig = nalgebra::SymmetricEigen::new(small);
        let mut order: Vec<usize> = (0..block).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let mut rotated = DMatrix::<f64>::zeros(n, block);
        for (c, &i) in order.iter().enumerate() {
            rotated.set_column(c, &(&yq * eig.eigenvectors.column(i)));
        }
        x = rotated;
        let head: Vec<f64> = values[..count].to_vec();
        if let Some(prev) = &previous {
            let converged = head
                .iter()
                .zip(prev)
                .all(|(v, p)| (v - p).abs() <= rel_tol * v.abs().max(1.0));
            if converged {
                return Ok(head);
            }
        }
        previous = Some(head);
    }
    Err(SpectralError::NoConvergence)
}

fn orthonormalize_columns(x: &mut DMatrix<f64>) {
    let cols = x.ncols();
    for j in 0..cols {
        for _ in 0..2 {
            for i in 0..j {
                let c = x.column(i).dot(&x.column(j));
                let ci = x.column(i).clone_owned();
                x.column_mut(j).axpy(-c, &ci, 1.0);
            }
        }
        let norm = x.column(j).norm();
        if norm > 0.0 {
            x.column_mut(j).scale_mut(1.0 / norm);
        }
    }
}

/// Lower Cholesky factor stored in the lower triangle.
fn cholesky_in_place(a: &mut DMatrix<f64>) -> Result<(), SpectralError> {
    let n = a.nrows();
    let data = a.as_mut_slice();
    for k in 0..n {
        let d = data[k * n + k];
        if d <= 0.0 {
            return Err(SpectralError::NotPositiveDefinite);
        }
        let d = d.sqrt();
        data[k * n + k] = d;
        for i in (k + 1)..n {
            data[k * n + i] /= d;
        }
        let (head, tail) = data.split_at_mut((k + 1) * n);
        let col_k = &head[k * n..(k + 1) * n];
        for j in (k + 1)..n {
            let f = col_k[j];
            if f == 0.0 {
                continue;
            }
            let col_j = &mut tail[(j - k - 1) * n..(j - k) * n];
            for (cj, ck) in col_j[j..].iter_mut().zip(&col_k[j..]) {
                *cj -= f * ck;
            }
        }
    }
    Ok(())
}

fn cholesky_solve(l: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let n = l.nrows();
    let mut x = b.clone();
    let ld = l.as_slice();
    for c in 0..x.ncols() {
        let mut col = x.column_mut(c);
        // L y = b (column-oriented)
        for k in 0..n {
            let yk = col[k] / ld[k * n + k];
            col[k] = yk;
            for i in (k + 1)..n {
                col[i] -= ld[k * n + i] * yk;
            }
        }
        // L^T x = y
        for k in (0..n).rev() {
            let mut s = col[k];
            for i in (k + 1)..n {
                s -= ld[k * n + i] * col[i];
            }
            col[k] = s / ld[k * n + k];
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx_eq::close;

    mod approx_eq {
        pub fn close(a: f64, b: f64, tol: f64) -> bool {
            (a - b).abs() <= tol
        }
    }

    #[test]
    fn diagonal_matrix_lowest_two() {
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, 1.0, 2.0]));
        let e = dense_symmetric_eigen(&a, 2).unwrap();
        assert!(close(e.values[0], 1.0, 1e-12) && close(e.values[1], 2.0, 1e-12));
    }

    #[test]
    fn swap_matrix_spectrum() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let e = dense_symmetric_eigen(&a, 2).unwrap();
        assert!(close(e.values[0], -1.0, 1e-12) && close(e.values[1], 1.0, 1e-12));
    }

    #[test]
    fn discrete_laplacian_first_eigenvalue() {
        // 99 interior points on [0, pi]: 4/h^2 sin^2(h/2) is within 1e-3 of 1.
        let n = 99;
        let h = std::f64::consts::PI / (n as f64 + 1.0);
        let a = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                2.0 / (h * h)
            } else if i.abs_diff(j) == 1 {
                -1.0 / (h * h)
            } else {
                0.0
            }
        });
        let e = dense_symmetric_eigen(&a, 1).unwrap();
        let exact_fd = 4.0 / (h * h) * (h / 2.0).sin().powi(2);
        assert!(close(e.values[0], exact_fd, 1e-9));
        assert!((e.values[0] - 1.0).abs() < 1e-3);
    }

    #[test]
    fn rejects_asymmetric_input() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        assert!(matches!(
            dense_symmetric_eigen(&a, 1),
            Err(SpectralError::NotSymmetric { .. })
        ));
    }

    #[test]
    fn inertia_and_residuals_on_random_matrix() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let n = 30;
        let b = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let a = &b + b.transpose();
        let e = dense_symmetric_eigen(&a, n).unwrap();
        let norm = max_abs(&a) * n as f64;
        for (c, lam) in e.values.iter().enumerate() {
            let v = e.vectors.column(c);
            let r = (&a * v - v * *lam).norm();
            assert!(r <= 1e-8 * norm, "residual {r}");
        }
        let neg = e.values.iter().filter(|v| **v < 0.0).count();
        assert_eq!(count_below(&a, 0.0).unwrap(), neg);
        let ortho = e.vectors.transpose() * &e.vectors;
        assert!((ortho - DMatrix::<f64>::identity(n, n)).amax() < 1e-9);
    }

    #[test]
    fn shift_invert_matches_dense_route() {
        let n = 60;
        let a = DMatrix::from_fn(n, n, |i, j| {
            let (i, j) = (i as f64, j as f64);
            if i == j {
                i * 0.5 - 3.0
            } else {
                0.3 / (1.0 + (i - j).abs())
            }
        });
        let lowest = lowest_eigenvalues_shift_invert(&a, 5, -20.0, 1e-12).unwrap();
        let dense = dense_symmetric_eigen(&a, 5).unwrap();
        for (x, y) in lowest.iter().zip(&dense.values) {
            assert!(close(*x, *y, 1e-8), "{x} vs {y}");
        }
    }
}
