//! Symmetric tridiagonal eigenvalues by Sturm-sequence bisection, with
//! eigenvectors by inverse iteration.

/// A real symmetric tridiagonal matrix stored by its diagonal and
/// sub-diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert!(
            diag.is_empty() && off.is_empty() || off.len() + 1 == diag.len(),
            "off-diagonal must have one entry fewer than the diagonal"
        );
        Self { diag, off }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Number of eigenvalues strictly below `x`.
    ///
    /// Counts negative pivots of the LDL^T factorization of `T - x I`.
    pub fn count_below(&self, x: f64) -> usize {
        let n = self.diag.len();
        if n == 0 {
            return 0;
        }
        let guard = f64::MIN_POSITIVE.sqrt() * (1.0 + self.norm_bound());
        let mut count = 0;
        let mut q = self.diag[0] - x;
        for i in 0..n {
            if i > 0 {
                let prev = if q.abs() < guard { guard.copysign(q) } else { q };
                q = (self.diag[i] - x) - self.off[i - 1] * self.off[i - 1] / prev;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Gershgorin enclosure of the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.diag.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut radius = 0.0;
            if i > 0 {
                radius += self.off[i - 1].abs();
            }
            if i + 1 < n {
                radius += self.off[i].abs();
            }
            lo = lo.min(self.diag[i] - radius);
            hi = hi.max(self.diag[i] + radius);
        }
        (lo, hi)
    }

    pub fn norm_bound(&self) -> f64 {
        let (lo, hi) = self.gershgorin();
        lo.abs().max(hi.abs())
    }

    /// Reference magnitude for relative tolerances; one for the zero matrix.
    pub fn scale(&self) -> f64 {
        let b = self.norm_bound();
        if b > 0.0 {
            b
        } else {
            1.0
        }
    }

    /// The `k`-th smallest eigenvalue (0-based).
    pub fn eigenvalue(&self, k: usize) -> f64 {
        assert!(k < self.dim());
        let (mut lo, mut hi) = self.gershgorin();
        let scale = self.scale();
        lo -= 1e-12 * scale;
        hi += 1e-12 * scale;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 4.0 * f64::EPSILON * scale {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    pub fn lowest_eigenvalues(&self, count: usize) -> Vec<f64> {
        (0..count.min(self.dim())).map(|k| self.eigenvalue(k)).collect()
    }

    /// Unit eigenvectors for the given (sorted) eigenvalues.
    ///
    /// Vectors belonging to numerically coincident eigenvalues are
    /// orthogonalized against each other.
    pub fn eigenvectors(&self, eigenvalues: &[f64]) -> Vec<Vec<f64>> {
        let scale = self.scale();
        let cluster_gap = 1e-9 * scale;
        let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(eigenvalues.len());
        let mut cluster_start = 0;
        for (i, &lambda) in eigenvalues.iter().enumerate() {
            if i > 0 && (lambda - eigenvalues[i - 1]).abs() > cluster_gap {
                cluster_start = i;
            }
            let v = self.inverse_iteration(lambda, i, &vectors[cluster_start..i]);
            vectors.push(v);
        }
        vectors
    }

    fn inverse_iteration(&self, lambda: f64, seed: usize, against: &[Vec<f64>]) -> Vec<f64> {
        let n = self.dim();
        let scale = self.scale();
        let shift = lambda + 8.0 * f64::EPSILON * scale;
        let mut x: Vec<f64> = (0..n)
            .map(|i| {
                let t = (i as f64 + 1.0) * (0.618_033_988_749_895 + 0.1 * seed as f64);
                0.5 + (t * 12.9898).sin().abs()
            })
            .collect();
        normalize(&mut x);
        let lu = TridiagonalLu::factor(self, shift);
        for _ in 0..4 {
            let mut y = lu.solve(&x);
            for u in against {
                let c = dot(&y, u);
                for (yi, ui) in y.iter_mut().zip(u) {
                    *yi -= c * ui;
                }
            }
            let norm = normalize(&mut y);
            x = y;
            if norm > 1e14 {
                break;
            }
        }
        for u in against {
            let c = dot(&x, u);
            for (xi, ui) in x.iter_mut().zip(u) {
                *xi -= c * ui;
            }
        }
        normalize(&mut x);
        x
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn normalize(v: &mut [f64]) -> f64 {
    let norm = dot(v, v).sqrt();
    if norm > 0.0 {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
    norm
}

/// LU factorization with partial pivoting of `T - shift I` (LAPACK `gttrf`
/// layout: two super-diagonals after pivoting).
struct TridiagonalLu {
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    dl: Vec<f64>,
    swapped: Vec<bool>,
}

impl TridiagonalLu {
    fn factor(t: &SymTridiagonal, shift: f64) -> Self {
        let n = t.dim();
        let mut d: Vec<f64> = t.diag.iter().map(|x| x - shift).collect();
        let mut du = t.off.clone();
        let mut dl = t.off.clone();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        let tiny = f64::EPSILON * t.scale();
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i].abs() < tiny {
                    d[i] = tiny;
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -fact;
                }
                swapped[i] = true;
            }
        }
        if n > 0 && d[n - 1].abs() < tiny {
            d[n - 1] = tiny;
        }
        Self {
            d,
            du,
            du2,
            dl,
            swapped,
        }
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.d.len();
        let mut x = b.to_vec();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                x.swap(i, i + 1);
            }
            x[i + 1] -= self.dl[i] * x[i];
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            if i + 1 < n {
                s -= self.du[i] * x[i + 1];
            }
            if i + 2 < n {
                s -= self.du2[i] * x[i + 2];
            }
            x[i] = s / self.d[i];
        }
        x
    }
}
