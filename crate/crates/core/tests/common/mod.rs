//! Independent reference computations shared by the integration suites.
#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Matrix2};

/// Periodic Fourier first derivative on `n` equispaced points of `[0, 2 pi)`,
/// `n` even.
pub fn fourier_d1(n: usize) -> DMatrix<f64> {
    let h = 2.0 * PI / n as f64;
    DMatrix::from_fn(n, n, |j, k| {
        if j == k {
            0.0
        } else {
            let d = j as f64 - k as f64;
            let sign = if (j + k) % 2 == 0 { 1.0 } else { -1.0 };
            0.5 * sign / (0.5 * d * h).tan()
        }
    })
}

/// Periodic Fourier second derivative on `n` equispaced points, `n` even.
pub fn fourier_d2(n: usize) -> DMatrix<f64> {
    let h = 2.0 * PI / n as f64;
    DMatrix::from_fn(n, n, |j, k| {
        if j == k {
            -PI * PI / (3.0 * h * h) - 1.0 / 6.0
        } else {
            let d = j as f64 - k as f64;
            let sign = if (j + k) % 2 == 0 { 1.0 } else { -1.0 };
            -sign / (2.0 * (0.5 * d * h).sin().powi(2))
        }
    })
}

fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    DMatrix::from_fn(ra * rb, ca * cb, |i, j| a[(i / rb, j / cb)] * b[(i % rb, j % cb)])
}

/// `-(g^{11} D_1^2 + 2 g^{12} D_1 D_2 + g^{22} D_2^2) - c` on an `n x n`
/// periodic grid of the flat torus with constant dual metric `dual`.
pub fn flat_torus_operator(dual: Matrix2<f64>, c: f64, n: usize) -> DMatrix<f64> {
    let (d1, d2) = (fourier_d1(n), fourier_d2(n));
    let id = DMatrix::identity(n, n);
    let lap = kron(&d2, &id) * dual[(0, 0)] + kron(&d1, &d1) * (2.0 * dual[(0, 1)]) + kron(&id, &d2) * dual[(1, 1)];
    let mut a = -lap;
    for i in 0..n * n {
        a[(i, i)] -= c;
    }
    0.5 * (&a + a.transpose())
}

/// Laplacian eigenvalues of the unit `S^1` from a 64-point Fourier grid,
/// keeping those resolved exactly (frequencies below the Nyquist one).
pub fn circle_spectrum() -> Vec<f64> {
    let n = 64;
    let eig = nalgebra::SymmetricEigen::new(-fourier_d2(n));
    let mut v: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v.truncate(n - 1);
    v
}

/// Chebyshev points `cos(pi i / n)` and differentiation matrix.
fn chebyshev(n: usize) -> (Vec<f64>, DMatrix<f64>) {
    let x: Vec<f64> = (0..=n).map(|i| (PI * i as f64 / n as f64).cos()).collect();
    let c = |i: usize| (if i == 0 || i == n { 2.0 } else { 1.0 }) * if i % 2 == 0 { 1.0 } else { -1.0 };
    let mut d = DMatrix::from_fn(
        n + 1,
        n + 1,
        |i, j| {
            if i == j {
                0.0
            } else {
                c(i) / c(j) / (x[i] - x[j])
            }
        },
    );
    for i in 0..=n {
        let s: f64 = d.row(i).sum();
        d[(i, i)] = -s;
    }
    (x, d)
}

/// Laplacian eigenvalues of the unit `S^2` with multiplicity, up to degree
/// `max_degree`. Each azimuthal order `q` reduces to
/// `-(1 - x^2) v'' + 2 (q + 1) x v' + q (q + 1) v = lambda v` on
/// polynomials, which Chebyshev collocation resolves without boundary
/// conditions.
pub fn two_sphere_spectrum(max_degree: usize) -> Vec<f64> {
    let n = max_degree;
    let (x, d) = chebyshev(n);
    let d2 = &d * &d;
    let mut out = Vec::new();
    for q in 0..=max_degree {
        let qf = q as f64;
        let op = DMatrix::from_fn(n + 1, n + 1, |i, j| {
            let diag = if i == j { qf * (qf + 1.0) } else { 0.0 };
            -(1.0 - x[i] * x[i]) * d2[(i, j)] + 2.0 * (qf + 1.0) * x[i] * d[(i, j)] + diag
        });
        let mut values: Vec<f64> = op.complex_eigenvalues().iter().map(|z| z.re).collect();
        values.sort_by(f64::total_cmp);
        // Degrees q..=max_degree only.
        for v in values.into_iter().take(max_degree + 1 - q) {
            out.push(v);
            if q > 0 {
                out.push(v);
            }
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

/// Largest eigenvalue below which [`two_sphere_spectrum`] is complete.
pub fn two_sphere_complete_below(max_degree: usize) -> f64 {
    let l = max_degree as f64;
    l * (l + 1.0)
}

/// Dimension of the harmonic polynomials of degree `j` in `d` variables,
/// as the kernel of the Laplacian from degree `j` to degree `j - 2`.
pub fn harmonic_kernel_dim(d: usize, j: usize) -> usize {
    let monomials = |deg: usize| -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut cur = vec![0; d];
        fn rec(i: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if i + 1 == cur.len() {
                cur[i] = left;
                out.push(cur.clone());
                return;
            }
            for e in 0..=left {
                cur[i] = e;
                rec(i + 1, left - e, cur, out);
            }
        }
        rec(0, deg, &mut cur, &mut out);
        out
    };
    let src = monomials(j);
    if j < 2 {
        return src.len();
    }
    let dst = monomials(j - 2);
    let mut lap = DMatrix::<f64>::zeros(dst.len(), src.len());
    for (c, alpha) in src.iter().enumerate() {
        for i in 0..d {
            if alpha[i] >= 2 {
                let mut beta = alpha.clone();
                beta[i] -= 2;
                let row = dst.iter().position(|m| *m == beta).unwrap();
                lap[(row, c)] += (alpha[i] * (alpha[i] - 1)) as f64;
            }
        }
    }
    src.len() - lap.svd(false, false).rank(1e-9)
}

/// Unit sphere `S^n` in `R^{n+1}`, `n` in `{1, 2}`, in angle coordinates.
fn sphere_point(n: usize, angles: &[f64]) -> Vec<f64> {
    match n {
        1 => vec![angles[0].cos(), angles[0].sin()],
        2 => vec![
            angles[1].sin() * angles[0].cos(),
            angles[1].sin() * angles[0].sin(),
            angles[1].cos(),
        ],
        _ => panic!("sphere_point supports n = 1, 2"),
    }
}

/// Embedding `(r p, s q)` of `S^n(r) x S^m(s)` in `R^{n+m+2}`.
pub fn product_embedding(n: usize, m: usize, r: f64, t: &[f64]) -> DVector<f64> {
    let s = (1.0 - r * r).sqrt();
    let p = sphere_point(n, &t[..n]);
    let q = sphere_point(m, &t[n..]);
    DVector::from_iterator(n + m + 2, p.iter().map(|v| r * v).chain(q.iter().map(|v| s * v)))
}

pub struct EmbeddedGeometry {
    pub gram: DMatrix<f64>,
    /// Second fundamental form in the chart.
    pub second: DMatrix<f64>,
}

impl EmbeddedGeometry {
    pub fn shape(&self) -> DMatrix<f64> {
        self.gram.clone().try_inverse().unwrap() * &self.second
    }

    pub fn principal_curvatures(&self) -> Vec<f64> {
        let mut k: Vec<f64> = self.shape().complex_eigenvalues().iter().map(|z| z.re).collect();
        k.sort_by(f64::total_cmp);
        k
    }

    pub fn mean_curvature(&self) -> f64 {
        self.shape().trace() / self.gram.nrows() as f64
    }

    pub fn norm_squared(&self) -> f64 {
        let s = self.shape();
        (&s * &s).trace()
    }
}

/// Chart derivatives of `f` at `t` by central differences with step `h`:
/// the first derivatives and the Hessian.
fn chart_derivatives<F>(f: F, t: &[f64], h: f64) -> (Vec<DVector<f64>>, Vec<Vec<DVector<f64>>>)
where
    F: Fn(&[f64]) -> DVector<f64>,
{
    let d = t.len();
    let shifted = |moves: &[(usize, f64)]| {
        let mut u = t.to_vec();
        for &(i, dv) in moves {
            u[i] += dv;
        }
        f(&u)
    };
    let first: Vec<_> = (0..d)
        .map(|i| (shifted(&[(i, h)]) - shifted(&[(i, -h)])) / (2.0 * h))
        .collect();
    let center = f(t);
    let second = (0..d)
        .map(|i| {
            (0..d)
                .map(|j| {
                    if i == j {
                        (shifted(&[(i, h)]) - &center * 2.0 + shifted(&[(i, -h)])) / (h * h)
                    } else {
                        (shifted(&[(i, h), (j, h)]) - shifted(&[(i, h), (j, -h)]) - shifted(&[(i, -h), (j, h)])
                            + shifted(&[(i, -h), (j, -h)]))
                            / (4.0 * h * h)
                    }
                })
                .collect()
        })
        .collect();
    (first, second)
}

/// Geometry of a hypersurface of the unit sphere from finite differences of
/// its embedding. The unit normal is tangent to the sphere and oriented
/// toward the first `n + 1` coordinates, and `A = -<X_ij, N>`.
pub fn product_geometry(n: usize, m: usize, r: f64, t: &[f64]) -> EmbeddedGeometry {
    let f = |u: &[f64]| product_embedding(n, m, r, u);
    let (first, second) = chart_derivatives(f, t, 1e-4);
    let x = product_embedding(n, m, r, t);
    let d = n + m;
    let dim = d + 2;
    let mut rows = DMatrix::<f64>::zeros(d + 1, dim);
    rows.set_row(0, &x.transpose());
    for (i, v) in first.iter().enumerate() {
        rows.set_row(i + 1, &v.transpose());
    }
    let normal = null_vector(&rows);
    let outward: f64 = (0..=n).map(|i| normal[i] * x[i]).sum();
    let normal = if outward < 0.0 { -normal } else { normal };
    EmbeddedGeometry {
        gram: DMatrix::from_fn(d, d, |i, j| first[i].dot(&first[j])),
        second: DMatrix::from_fn(d, d, |i, j| -second[i][j].dot(&normal)),
    }
}

/// Unit vector spanning the kernel of a full-rank `(k - 1) x k` matrix.
fn null_vector(rows: &DMatrix<f64>) -> DVector<f64> {
    let k = rows.ncols();
    let mut square = DMatrix::<f64>::zeros(k, k);
    square.view_mut((0, 0), (rows.nrows(), k)).copy_from(rows);
    let svd = square.svd(false, true);
    let v_t = svd.v_t.unwrap();
    let (idx, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .unwrap();
    v_t.row(idx).transpose()
}

/// `i p` for `p` in `C^2 = R^4`.
fn hopf(p: &DVector<f64>) -> DVector<f64> {
    DVector::from_vec(vec![-p[1], p[0], -p[3], p[2]])
}

/// The Berger metric `I + (tau^2 - 1) (i p)(i p)^T` extended to `R^4`.
pub fn berger_ambient(p: &DVector<f64>, tau: f64) -> DMatrix<f64> {
    let v = hopf(p);
    DMatrix::identity(4, 4) + (&v * v.transpose()) * (tau * tau - 1.0)
}

/// Induced metric and second fundamental form of the Clifford torus of
/// radius `r` in the Berger sphere. The Levi-Civita connection of the
/// extended metric enters through the Koszul formula
/// `G(nabla_X Y, N) = G(Y_X, N) + (D_X G(Y, N) + D_Y G(X, N) - D_N G(X, Y)) / 2`.
pub fn berger_torus_geometry(r: f64, tau: f64, t: [f64; 2]) -> EmbeddedGeometry {
    let c = tau * tau - 1.0;
    let emb = |u: &[f64]| product_embedding(1, 1, r, u);
    let (first, second) = chart_derivatives(emb, &t, 1e-4);
    let p = emb(&t);
    let g = berger_ambient(&p, tau);
    let mut rows = DMatrix::<f64>::zeros(3, 4);
    rows.set_row(0, &p.transpose());
    for (i, v) in first.iter().enumerate() {
        rows.set_row(i + 1, &(&g * v).transpose());
    }
    let raw = null_vector(&rows);
    let raw = raw.clone() / (raw.dot(&(&g * &raw))).sqrt();
    let outward = raw[0] * p[0] + raw[1] * p[1];
    let normal = if outward < 0.0 { -raw } else { raw };
    let ip = hopf(&p);
    // D_v G = c ((i v)(i p)^T + (i p)(i v)^T).
    let dg = |v: &DVector<f64>, a: &DVector<f64>, b: &DVector<f64>| {
        let iv = hopf(v);
        c * (iv.dot(a) * ip.dot(b) + ip.dot(a) * iv.dot(b))
    };
    let koszul = |i: usize, j: usize| {
        let (xi, xj) = (&first[i], &first[j]);
        second[i][j].dot(&(&g * &normal)) + 0.5 * (dg(xi, xj, &normal) + dg(xj, xi, &normal) - dg(&normal, xi, xj))
    };
    EmbeddedGeometry {
        gram: DMatrix::from_fn(2, 2, |i, j| first[i].dot(&(&g * &first[j]))),
        second: DMatrix::from_fn(2, 2, |i, j| -koszul(i, j)),
    }
}
