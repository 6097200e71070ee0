//! General complex eigendecomposition: Householder reduction to Hessenberg
//! form, single-shift complex QR to Schur form, triangular back-substitution
//! for eigenvectors, and a pivoted inverse for the left vectors.

use num_complex::Complex;

use super::matrix::{inner, vec_norm, ComplexMatrix};
use super::NumericsError;
use crate::scalar::{abs1, lit, phase, to_f64, Real};

/// Default relative residual tolerance.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Eigenvector-matrix condition number above which a matrix counts as near-defective.
pub const DEFECT_THRESHOLD: f64 = 1e7;
/// Relative eigenvalue separation below which two levels form a cluster.
pub const CLUSTER_TOL: f64 = 1e-8;

/// Eigenvalues with right and left eigenvectors; `⟨L_n|R_m⟩ = δ_nm`.
#[derive(Clone, Debug)]
pub struct EigenSystem<T: Real> {
    pub eigenvalues: Vec<Complex<T>>,
    /// Unit-norm right eigenvectors.
    pub right: Vec<Vec<Complex<T>>>,
    /// Left eigenvectors, normalized so that `⟨L_n|R_n⟩ = 1`.
    pub left: Vec<Vec<Complex<T>>>,
    /// `max |⟨L_n|R_m⟩ − δ_nm|`.
    pub biortho_residual: T,
    /// 1-norm condition estimate of the right-vector matrix.
    pub condition: T,
    /// Frobenius norm of the decomposed matrix.
    pub matrix_norm: T,
    pub tol: T,
}

impl<T: Real> EigenSystem<T> {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `⟨L_n|R_m⟩`.
    pub fn overlap(&self, n: usize, m: usize) -> Complex<T> {
        inner(&self.left[n], &self.right[m])
    }

    /// Matrix whose columns are the right eigenvectors.
    pub fn right_matrix(&self) -> ComplexMatrix<T> {
        ComplexMatrix::from_fn(self.dim(), |i, j| self.right[j][i])
    }

    /// `Σ_n λ_n |R_n⟩⟨L_n|`.
    pub fn reconstruct(&self) -> ComplexMatrix<T> {
        let n = self.dim();
        let mut m = ComplexMatrix::zeros(n);
        for k in 0..n {
            let (lam, r, l) = (self.eigenvalues[k], &self.right[k], &self.left[k]);
            for i in 0..n {
                let ri = lam * r[i];
                for j in 0..n {
                    m[(i, j)] = m[(i, j)] + ri * l[j].conj();
                }
            }
        }
        m
    }

    /// `max_n ‖M R_n − λ_n R_n‖ / ‖R_n‖`.
    pub fn right_residual(&self, m: &ComplexMatrix<T>) -> T {
        (0..self.dim())
            .map(|k| {
                let mr = m.mul_vec(&self.right[k]);
                let res: Vec<_> = mr
                    .iter()
                    .zip(&self.right[k])
                    .map(|(&a, &b)| a - self.eigenvalues[k] * b)
                    .collect();
                vec_norm(&res) / vec_norm(&self.right[k])
            })
            .fold(T::zero(), T::max)
    }

    /// `max_n ‖L_n† M − λ_n L_n†‖ / ‖L_n‖`.
    pub fn left_residual(&self, m: &ComplexMatrix<T>) -> T {
        (0..self.dim())
            .map(|k| {
                let ldag: Vec<_> = self.left[k].iter().map(|z| z.conj()).collect();
                let lm = m.vec_mul(&ldag);
                let res: Vec<_> = lm
                    .iter()
                    .zip(&ldag)
                    .map(|(&a, &b)| a - self.eigenvalues[k] * b)
                    .collect();
                vec_norm(&res) / vec_norm(&ldag)
            })
            .fold(T::zero(), T::max)
    }

    fn measure_biortho(&mut self) {
        let n = self.dim();
        let mut worst = T::zero();
        for a in 0..n {
            for b in 0..n {
                let target = if a == b { T::one() } else { T::zero() };
                let d = (self.overlap(a, b) - Complex::new(target, T::zero())).norm();
                worst = worst.max(d);
            }
        }
        self.biortho_residual = worst;
    }

    /// Index groups of eigenvalues closer than `rel_tol · matrix_norm`,
    /// singletons omitted; eigenvalues are sorted so clusters are contiguous
    /// in the real part.
    pub fn clusters(&self, rel_tol: T) -> Vec<Vec<usize>> {
        let thr = rel_tol * self.matrix_norm.max(T::min_positive_value());
        let n = self.dim();
        let mut parent: Vec<usize> = (0..n).collect();
        fn root(p: &mut [usize], mut i: usize) -> usize {
            while p[i] != i {
                p[i] = p[p[i]];
                i = p[i];
            }
            i
        }
        for a in 0..n {
            for b in a + 1..n {
                if (self.eigenvalues[a] - self.eigenvalues[b]).norm() <= thr {
                    let (ra, rb) = (root(&mut parent, a), root(&mut parent, b));
                    if ra != rb {
                        parent[ra.max(rb)] = ra.min(rb);
                    }
                }
            }
        }
        let mut groups: Vec<Vec<usize>> = vec![Vec::new(); n];
        for i in 0..n {
            let r = root(&mut parent, i);
            groups[r].push(i);
        }
        groups.into_iter().filter(|g| g.len() > 1).collect()
    }
}

/// Eigendecomposition with a defectiveness check.
///
/// Returns `NearDefective` when the right-vector condition estimate exceeds
/// [`DEFECT_THRESHOLD`].
pub fn eig_general<T: Real>(m: &ComplexMatrix<T>, tol: T) -> Result<EigenSystem<T>, NumericsError> {
    eig_general_with(m, tol, lit(DEFECT_THRESHOLD))
}

pub fn eig_general_with<T: Real>(
    m: &ComplexMatrix<T>,
    tol: T,
    defect_threshold: T,
) -> Result<EigenSystem<T>, NumericsError> {
    let sys = decompose(m, tol)?;
    if !(sys.condition <= defect_threshold) {
        return Err(NumericsError::NearDefective {
            condition: to_f64(sys.condition),
        });
    }
    Ok(sys)
}

/// Eigendecomposition that reports, rather than rejects, poor conditioning.
///
/// Fails only on non-finite input, QR non-convergence, or an exactly
/// singular eigenvector matrix.
pub fn decompose<T: Real>(m: &ComplexMatrix<T>, tol: T) -> Result<EigenSystem<T>, NumericsError> {
    if !m.is_finite() {
        return Err(NumericsError::NonFinite);
    }
    let n = m.dim();
    let norm = m.frobenius_norm();
    let hermitian = m.is_hermitian(lit::<T>(16.0) * T::epsilon() * norm);

    let mut h = m.clone();
    let mut z = ComplexMatrix::identity(n);
    hessenberg(&mut h, &mut z);
    schur_qr(&mut h, &mut z)?;

    let mut values: Vec<Complex<T>> = (0..n).map(|i| h[(i, i)]).collect();
    let mut vectors: Vec<Vec<Complex<T>>> = if hermitian {
        for v in values.iter_mut() {
            v.im = T::zero();
        }
        (0..n).map(|j| z.column(j)).collect()
    } else {
        triangular_eigenvectors(&h, &z)
    };
    for v in vectors.iter_mut() {
        let nv = vec_norm(v);
        if nv > T::zero() {
            for x in v.iter_mut() {
                *x = *x / nv;
            }
        }
    }

    let order = sorted_order(&values, lit::<T>(1e-12) * norm.max(T::one()));
    values = order.iter().map(|&i| values[i]).collect();
    vectors = order.iter().map(|&i| vectors[i].clone()).collect();

    let (left, condition) = if hermitian {
        (vectors.clone(), T::one())
    } else {
        let r = ComplexMatrix::from_fn(n, |i, j| vectors[j][i]);
        let rinv = invert(&r).map_err(|_| NumericsError::NearDefective { condition: f64::INFINITY })?;
        let cond = r.norm_1() * rinv.norm_1();
        // L_n = conj(row n of R⁻¹) so that L_n† R_m = δ_nm.
        let left = (0..n).map(|k| rinv.row(k).iter().map(|z| z.conj()).collect()).collect();
        (left, cond)
    };

    let mut sys = EigenSystem {
        eigenvalues: values,
        right: vectors,
        left,
        biortho_residual: T::zero(),
        condition,
        matrix_norm: norm,
        tol,
    };
    sys.measure_biortho();
    Ok(sys)
}

/// Rescales left vectors so that `⟨L_n|R_m⟩ = δ_nm` and right vectors have
/// unit norm. Rejects eigenvalues closer than `tol · ‖M‖`.
pub fn biorthonormalize<T: Real>(sys: &EigenSystem<T>, tol: T) -> Result<EigenSystem<T>, NumericsError> {
    if let Some(cluster) = sys.clusters(tol).into_iter().next() {
        return Err(NumericsError::DegenerateCluster { levels: cluster });
    }
    let n = sys.dim();
    let mut right = sys.right.clone();
    let mut left = sys.left.clone();
    for k in 0..n {
        let nr = vec_norm(&right[k]);
        if nr == T::zero() {
            return Err(NumericsError::Argument(format!("right vector {k} is zero")));
        }
        for x in right[k].iter_mut() {
            *x = *x / nr;
        }
        for x in left[k].iter_mut() {
            *x = *x * nr;
        }
    }
    // S = L† R; replacing L† by S⁻¹ L† restores exact biorthogonality.
    let s = ComplexMatrix::from_fn(n, |a, b| inner(&left[a], &right[b]));
    let sinv = invert(&s)?;
    let ldag = ComplexMatrix::from_fn(n, |a, i| left[a][i].conj());
    let new_ldag = sinv.matmul(&ldag);
    left = (0..n).map(|a| new_ldag.row(a).iter().map(|z| z.conj()).collect()).collect();

    let mut out = EigenSystem {
        eigenvalues: sys.eigenvalues.clone(),
        right,
        left,
        biortho_residual: T::zero(),
        condition: sys.condition,
        matrix_norm: sys.matrix_norm,
        tol: sys.tol,
    };
    out.measure_biortho();
    if out.biortho_residual > tol.max(lit::<T>(1e2) * T::epsilon() * out.condition) {
        return Err(NumericsError::NearDefective {
            condition: to_f64(out.condition),
        });
    }
    Ok(out)
}

/// Sort by real part, then by imaginary part inside runs whose real parts
/// agree within `re_tol`.
fn sorted_order<T: Real>(values: &[Complex<T>], re_tol: T) -> Vec<usize> {
    let key = |x: T| to_f64(x);
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| {
        key(values[a].re)
            .total_cmp(&key(values[b].re))
            .then(key(values[a].im).total_cmp(&key(values[b].im)))
    });
    let mut out = Vec::with_capacity(idx.len());
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && values[idx[end]].re - values[idx[end - 1]].re <= re_tol {
            end += 1;
        }
        let mut run = idx[start..end].to_vec();
        run.sort_by(|&a, &b| key(values[a].im).total_cmp(&key(values[b].im)).then(a.cmp(&b)));
        out.extend(run);
        start = end;
    }
    out
}

/// In-place Householder reduction to upper Hessenberg form; accumulates `Z ← Z Q`.
fn hessenberg<T: Real>(a: &mut ComplexMatrix<T>, z: &mut ComplexMatrix<T>) {
    let n = a.dim();
    let zero = Complex::new(T::zero(), T::zero());
    let two = lit::<T>(2.0);
    for k in 0..n.saturating_sub(2) {
        let x: Vec<Complex<T>> = (k + 1..n).map(|i| a[(i, k)]).collect();
        let xnorm = vec_norm(&x);
        if xnorm == T::zero() {
            continue;
        }
        let alpha = -phase(x[0]) * xnorm;
        let mut v = x.clone();
        v[0] = v[0] - alpha;
        let vn = vec_norm(&v);
        if vn == T::zero() {
            continue;
        }
        for e in v.iter_mut() {
            *e = *e / vn;
        }
        // A ← (I − 2vv†) A on rows k+1.. .
        for j in k..n {
            let s = v
                .iter()
                .enumerate()
                .fold(zero, |acc, (i, vi)| acc + vi.conj() * a[(k + 1 + i, j)]);
            for (i, vi) in v.iter().enumerate() {
                a[(k + 1 + i, j)] = a[(k + 1 + i, j)] - *vi * s * two;
            }
        }
        // A ← A (I − 2vv†) and Z ← Z (I − 2vv†) on columns k+1.. .
        for mat in [&mut *a, &mut *z] {
            for i in 0..n {
                let s = v
                    .iter()
                    .enumerate()
                    .fold(zero, |acc, (l, vl)| acc + mat[(i, k + 1 + l)] * *vl);
                for (l, vl) in v.iter().enumerate() {
                    mat[(i, k + 1 + l)] = mat[(i, k + 1 + l)] - s * vl.conj() * two;
                }
            }
        }
        a[(k + 1, k)] = alpha;
        for i in k + 2..n {
            a[(i, k)] = zero;
        }
    }
}

/// Rotation `G = [[c, s], [−s̄, c]]` with real `c` mapping `(x, y)` to `(r, 0)`.
fn givens<T: Real>(x: Complex<T>, y: Complex<T>) -> (T, Complex<T>) {
    let ax = x.norm();
    let ay = y.norm();
    if ay == T::zero() {
        return (T::one(), Complex::new(T::zero(), T::zero()));
    }
    if ax == T::zero() {
        return (T::zero(), y.conj() / ay);
    }
    let r = ax.hypot(ay);
    (ax / r, (x / ax) * y.conj() / r)
}

/// Single-shift complex QR iteration on a Hessenberg matrix; leaves the
/// complex Schur form in `h` and accumulates `Z`.
fn schur_qr<T: Real>(h: &mut ComplexMatrix<T>, z: &mut ComplexMatrix<T>) -> Result<(), NumericsError> {
    let n = h.dim();
    let eps = T::epsilon();
    let hnorm = h.frobenius_norm().max(T::min_positive_value());
    let max_iter = 30 * n.max(10);
    let zero = Complex::new(T::zero(), T::zero());
    let mut hi = n - 1;
    let mut iter = 0usize;
    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let mut s = abs1(h[(l - 1, l - 1)]) + abs1(h[(l, l)]);
            if s == T::zero() {
                s = hnorm;
            }
            if abs1(h[(l, l - 1)]) <= eps * s {
                h[(l, l - 1)] = zero;
                break;
            }
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        if iter > max_iter {
            return Err(NumericsError::NoConvergence { iterations: iter });
        }
        let mu = if iter % 10 == 0 {
            h[(hi, hi)] + Complex::new(lit::<T>(0.75) * abs1(h[(hi, hi - 1)]), T::zero())
        } else {
            let (a, b, c, d) = (h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)]);
            let half = lit::<T>(0.5);
            let tr = (a + d) * half;
            let disc = ((a - d) * half * ((a - d) * half) + b * c).sqrt();
            let (m1, m2) = (tr + disc, tr - disc);
            if (m1 - d).norm() <= (m2 - d).norm() {
                m1
            } else {
                m2
            }
        };
        for k in l..hi {
            let (x, y) = if k == l {
                (h[(l, l)] - mu, h[(l + 1, l)])
            } else {
                (h[(k, k - 1)], h[(k + 1, k - 1)])
            };
            let (c, s) = givens(x, y);
            let cc = Complex::new(c, T::zero());
            let col0 = if k == l { l } else { k - 1 };
            for j in col0..n {
                let (a, b) = (h[(k, j)], h[(k + 1, j)]);
                h[(k, j)] = cc * a + s * b;
                h[(k + 1, j)] = -s.conj() * a + cc * b;
            }
            if k > l {
                h[(k + 1, k - 1)] = zero;
            }
            let row_end = (k + 2).min(hi);
            for i in 0..=row_end {
                let (a, b) = (h[(i, k)], h[(i, k + 1)]);
                h[(i, k)] = a * cc + b * s.conj();
                h[(i, k + 1)] = -a * s + b * cc;
            }
            for i in 0..n {
                let (a, b) = (z[(i, k)], z[(i, k + 1)]);
                z[(i, k)] = a * cc + b * s.conj();
                z[(i, k + 1)] = -a * s + b * cc;
            }
        }
    }
    for i in 1..n {
        for j in 0..i {
            h[(i, j)] = zero;
        }
    }
    Ok(())
}

/// Eigenvectors of the upper-triangular `t`, mapped back through `z`.
fn triangular_eigenvectors<T: Real>(t: &ComplexMatrix<T>, z: &ComplexMatrix<T>) -> Vec<Vec<Complex<T>>> {
    let n = t.dim();
    let zero = Complex::new(T::zero(), T::zero());
    let smin = (T::epsilon() * t.frobenius_norm()).max(T::min_positive_value());
    let big = lit::<T>(1e100).min(T::max_value().sqrt());
    (0..n)
        .map(|k| {
            let lam = t[(k, k)];
            let mut x = vec![zero; n];
            x[k] = Complex::new(T::one(), T::zero());
            for i in (0..k).rev() {
                let mut s = zero;
                for j in i + 1..=k {
                    s = s + t[(i, j)] * x[j];
                }
                let mut d = t[(i, i)] - lam;
                if d.norm() < smin {
                    d = Complex::new(smin, T::zero());
                }
                x[i] = -s / d;
                if x[i].norm() > big {
                    let f = x[i].norm();
                    for e in x.iter_mut().take(k + 1) {
                        *e = *e / f;
                    }
                }
            }
            (0..n)
                .map(|r| (0..=k).fold(zero, |acc, j| acc + z[(r, j)] * x[j]))
                .collect()
        })
        .collect()
}

/// Inverse by Gauss-Jordan elimination with partial pivoting.
pub fn invert<T: Real>(m: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>, NumericsError> {
    let n = m.dim();
    let mut a = m.clone();
    let mut inv = ComplexMatrix::identity(n);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| to_f64(a[(i, col)].norm()).total_cmp(&to_f64(a[(j, col)].norm())))
            .expect("nonempty pivot range");
        let p = a[(pivot, col)];
        if p.norm() == T::zero() || !p.norm().is_finite() {
            return Err(NumericsError::Singular);
        }
        if pivot != col {
            for j in 0..n {
                let (x, y) = (a[(col, j)], a[(pivot, j)]);
                a[(col, j)] = y;
                a[(pivot, j)] = x;
                let (x, y) = (inv[(col, j)], inv[(pivot, j)]);
                inv[(col, j)] = y;
                inv[(pivot, j)] = x;
            }
        }
        let pinv = Complex::new(T::one(), T::zero()) / a[(col, col)];
        for j in 0..n {
            a[(col, j)] = a[(col, j)] * pinv;
            inv[(col, j)] = inv[(col, j)] * pinv;
        }
        for i in 0..n {
            if i == col {
                continue;
            }
            let f = a[(i, col)];
            if f.norm() == T::zero() {
                continue;
            }
            for j in 0..n {
                a[(i, j)] = a[(i, j)] - f * a[(col, j)];
                inv[(i, j)] = inv[(i, j)] - f * inv[(col, j)];
            }
        }
    }
    if !inv.is_finite() {
        return Err(NumericsError::Singular);
    }
    Ok(inv)
}
