//! Dense real-symmetric linear algebra: Cholesky, cyclic Jacobi
//! eigendecomposition, and the symmetric-definite generalized pencil solved
//! by spectral reduction of the mass matrix. Everything is generic over the
//! working scalar and deterministic (fixed sweep order, no data races).
//!
//! Matrices here are small (a few hundred rows), so the Jacobi solver's
//! robustness is worth more than QR speed.

use crate::error::{Error, Result};
use crate::parallel;
use crate::scalar::Scalar;

/// Dense row-major matrix.
#[derive(Clone, Debug)]
pub struct Mat<T> {
    pub n_rows: usize,
    pub n_cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Mat<T> {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Mat {
            n_rows,
            n_cols,
            data: vec![T::zero(); n_rows * n_cols],
        }
    }

    pub fn from_fn(n_rows: usize, n_cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for i in 0..n_rows {
            for j in 0..n_cols {
                data.push(f(i, j));
            }
        }
        Mat {
            n_rows,
            n_cols,
            data,
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn col(&self, j: usize) -> Vec<T> {
        (0..self.n_rows).map(|i| self[(i, j)]).collect()
    }

    /// A * B, rows computed in parallel.
    pub fn mul(&self, other: &Mat<T>) -> Mat<T> {
        assert_eq!(self.n_cols, other.n_rows, "matmul shape mismatch");
        let (r, inner, c) = (self.n_rows, self.n_cols, other.n_cols);
        let mut out = Mat::zeros(r, c);
        parallel::par_fill_rows(&mut out.data, c, |start_row, rows| {
            for (di, chunk) in rows.chunks_mut(c).enumerate() {
                let a_row = self.row(start_row + di);
                for (kk, &a) in a_row.iter().enumerate().take(inner) {
                    let b_row = other.row(kk);
                    for (j, slot) in chunk.iter_mut().enumerate() {
                        *slot += a * b_row[j];
                    }
                }
            }
        });
        out
    }

    /// Aᵀ * B without materializing the transpose.
    pub fn tr_mul(&self, other: &Mat<T>) -> Mat<T> {
        assert_eq!(self.n_rows, other.n_rows, "tr_mul shape mismatch");
        let (r, c) = (self.n_cols, other.n_cols);
        let mut out = Mat::zeros(r, c);
        parallel::par_fill_rows(&mut out.data, c, |start_row, rows| {
            for (di, chunk) in rows.chunks_mut(c).enumerate() {
                let i = start_row + di;
                for kk in 0..self.n_rows {
                    let a = self[(kk, i)];
                    let b_row = other.row(kk);
                    for (j, slot) in chunk.iter_mut().enumerate() {
                        *slot += a * b_row[j];
                    }
                }
            }
        });
        out
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.n_cols, v.len());
        (0..self.n_rows)
            .map(|i| self.row(i).iter().zip(v).map(|(&a, &x)| a * x).sum())
            .collect()
    }

    /// Scales row i by s[i] in place.
    pub fn scale_rows(&mut self, s: &[T]) {
        assert_eq!(self.n_rows, s.len());
        for i in 0..self.n_rows {
            let f = s[i];
            for v in self.row_mut(i) {
                *v *= f;
            }
        }
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &v| m.max(v.abs()))
    }
}

impl<T> std::ops::Index<(usize, usize)> for Mat<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.n_cols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Mat<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.n_cols + j]
    }
}

/// Symmetric matrix in full storage. Construction symmetrizes by averaging
/// and records how asymmetric the input was.
#[derive(Clone, Debug)]
pub struct SymMatrix<T> {
    pub n: usize,
    pub mat: Mat<T>,
    pub asymmetry: T,
}

impl<T: Scalar> SymMatrix<T> {
    pub fn from_mat(m: Mat<T>) -> Result<Self> {
        if m.n_rows != m.n_cols {
            return Err(Error::Dimension("matrix is not square".into()));
        }
        if m.data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter("matrix has non-finite entries".into()));
        }
        let n = m.n_rows;
        let mut mat = m;
        let mut asym = T::zero();
        for i in 0..n {
            for j in (i + 1)..n {
                let a = mat[(i, j)];
                let b = mat[(j, i)];
                asym = asym.max((a - b).abs());
                let avg = (a + b) / T::of(2.0);
                mat[(i, j)] = avg;
                mat[(j, i)] = avg;
            }
        }
        Ok(SymMatrix {
            n,
            mat,
            asymmetry: asym,
        })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension("row lengths differ from order".into()));
        }
        Self::from_mat(Mat::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn identity(n: usize) -> Self {
        SymMatrix {
            n,
            mat: Mat::identity(n),
            asymmetry: T::zero(),
        }
    }

    pub fn at(&self, i: usize, j: usize) -> T {
        self.mat[(i, j)]
    }

    /// Max-abs entry scaled by the order; all relative tolerances in this
    /// module are against this norm.
    pub fn scaled_norm(&self) -> T {
        self.mat.max_abs() * T::of(self.n as f64)
    }
}

/// Lower-triangular Cholesky factor.
#[derive(Clone, Debug)]
pub struct CholeskyFactor<T> {
    pub l: Mat<T>,
}

impl<T: Scalar> CholeskyFactor<T> {
    /// Solves L Lᵀ x = b.
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.l.n_rows;
        assert_eq!(b.len(), n);
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for j in 0..i {
                s = s - self.l[(i, j)] * y[j];
            }
            y[i] = s / self.l[(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for j in (i + 1)..n {
                s = s - self.l[(j, i)] * y[j];
            }
            y[i] = s / self.l[(i, i)];
        }
        y
    }

    pub fn reconstruct(&self) -> Mat<T> {
        let n = self.l.n_rows;
        Mat::from_fn(n, n, |i, j| {
            let mut s = T::zero();
            for kk in 0..=i.min(j) {
                s += self.l[(i, kk)] * self.l[(j, kk)];
            }
            s
        })
    }
}

/// L with L Lᵀ = A. A non-positive pivot reports its 1-based index.
pub fn cholesky<T: Scalar>(a: &SymMatrix<T>) -> Result<CholeskyFactor<T>> {
    let n = a.n;
    let mut l = Mat::zeros(n, n);
    for j in 0..n {
        let mut d = a.at(j, j);
        for kk in 0..j {
            d = d - l[(j, kk)] * l[(j, kk)];
        }
        if !(d > T::zero()) || !d.is_finite() {
            return Err(Error::NotPositiveDefinite { pivot: j + 1 });
        }
        let dj = d.sqrt();
        l[(j, j)] = dj;
        for i in (j + 1)..n {
            let mut s = a.at(i, j);
            for kk in 0..j {
                s = s - l[(i, kk)] * l[(j, kk)];
            }
            l[(i, j)] = s / dj;
        }
    }
    Ok(CholeskyFactor { l })
}

const JACOBI_MAX_SWEEPS: usize = 40;

fn off_diag_norm<T: Scalar>(a: &Mat<T>) -> T {
    let n = a.n_rows;
    let mut s = T::zero();
    for i in 0..n {
        for j in (i + 1)..n {
            s += a[(i, j)] * a[(i, j)];
        }
    }
    (s + s).sqrt()
}

/// Eigenvalues ascending with orthonormal eigenvectors as columns, by
/// cyclic Jacobi. Deterministic sweep order.
pub fn sym_eigen<T: Scalar>(a: &SymMatrix<T>) -> Result<(Vec<T>, Mat<T>)> {
    let n = a.n;
    let mut m = a.mat.clone();
    let mut v = Mat::identity(n);
    if n == 0 {
        return Ok((vec![], v));
    }
    let norm = a.scaled_norm();
    if norm == T::zero() {
        return Ok((vec![T::zero(); n], v));
    }
    // 45 eps is just under the 1e-14 gate in double precision and scales
    // down automatically for wider scalars
    let tol = T::epsilon() * T::of(45.0) * norm;

    let mut converged = false;
    for _ in 0..JACOBI_MAX_SWEEPS {
        if off_diag_norm(&m) <= tol {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                // skip rotations that cannot move the off norm
                if apq.abs() <= tol / T::of((n * n) as f64) {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (T::of(2.0) * apq);
                let t = {
                    let s = theta.abs() + (theta * theta + T::one()).sqrt();
                    if theta >= T::zero() {
                        s.recip()
                    } else {
                        -s.recip()
                    }
                };
                let c = (t * t + T::one()).sqrt().recip();
                let s = t * c;
                let tau = s / (T::one() + c);
                let app = m[(p, p)];
                let aqq = m[(q, q)];
                m[(p, p)] = app - t * apq;
                m[(q, q)] = aqq + t * apq;
                m[(p, q)] = T::zero();
                m[(q, p)] = T::zero();
                for i in 0..n {
                    if i != p && i != q {
                        let aip = m[(i, p)];
                        let aiq = m[(i, q)];
                        let nip = aip - s * (aiq + tau * aip);
                        let niq = aiq + s * (aip - tau * aiq);
                        m[(i, p)] = nip;
                        m[(p, i)] = nip;
                        m[(i, q)] = niq;
                        m[(q, i)] = niq;
                    }
                }
                for i in 0..n {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = vip - s * (viq + tau * vip);
                    v[(i, q)] = viq + s * (vip - tau * viq);
                }
            }
        }
    }
    if !converged && off_diag_norm(&m) > tol {
        return Err(Error::NoConvergence(JACOBI_MAX_SWEEPS));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].partial_cmp(&m[(j, j)]).unwrap());
    let eigenvalues: Vec<T> = order.iter().map(|&i| m[(i, i)]).collect();
    let vectors = Mat::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok((eigenvalues, vectors))
}

/// Result of the symmetric-definite pencil A v = lambda B v restricted to
/// the numerical range of B. Vectors are B-orthonormal columns.
#[derive(Clone, Debug)]
pub struct GeneralizedEigen<T> {
    pub eigenvalues: Vec<T>,
    pub vectors: Mat<T>,
    pub effective_rank: usize,
}

/// Spectral reduction: eigendecompose B, drop directions at or below
/// rank_tol times its largest eigenvalue, solve the projected ordinary
/// problem on what remains.
pub fn generalized_sym_eigen<T: Scalar>(
    a: &SymMatrix<T>,
    b: &SymMatrix<T>,
    rank_tol: f64,
) -> Result<GeneralizedEigen<T>> {
    if a.n != b.n {
        return Err(Error::Dimension("pencil matrices differ in order".into()));
    }
    let n = a.n;
    let (mu, u) = sym_eigen(b)?;
    let b_norm = b.scaled_norm();
    let tol_t = T::of(rank_tol);
    if let Some(&min_mu) = mu.first() {
        if min_mu < -tol_t * b_norm {
            return Err(Error::MassNotPsd {
                min_eigenvalue: min_mu.as_f64(),
                tol: (tol_t * b_norm).as_f64(),
            });
        }
    }
    let max_mu = mu.last().copied().unwrap_or(T::zero());
    let keep: Vec<usize> = (0..n)
        .filter(|&i| mu[i] > tol_t * max_mu && mu[i] > T::zero())
        .collect();
    let r = keep.len();
    if r == 0 {
        return Ok(GeneralizedEigen {
            eigenvalues: vec![],
            vectors: Mat::zeros(n, 0),
            effective_rank: 0,
        });
    }
    // W = U_keep * diag(mu^{-1/2}); columns span the mass range, WᵀBW = I
    let w = Mat::from_fn(n, r, |i, j| u[(i, keep[j])] / mu[keep[j]].sqrt());
    let aw = a.mat.mul(&w);
    let proj = SymMatrix::from_mat(w.tr_mul(&aw))?;
    let (lam, q) = sym_eigen(&proj)?;
    let vectors = w.mul(&q);
    Ok(GeneralizedEigen {
        eigenvalues: lam,
        vectors,
        effective_rank: r,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dd::Dd;
    use num_complex::Complex64;
    use num_traits::Float;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn mat_f64(rows: &[&[f64]]) -> SymMatrix<f64> {
        let v: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
        SymMatrix::from_rows(&v).unwrap()
    }

    #[test]
    fn cholesky_hand_cases() {
        let id = SymMatrix::<f64>::identity(3);
        let f = cholesky(&id).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert_eq!(f.l[(i, j)], want);
            }
        }

        let a = mat_f64(&[&[4.0, 2.0], &[2.0, 3.0]]);
        let f = cholesky(&a).unwrap();
        assert!((f.l[(0, 0)] - 2.0).abs() < 1e-15);
        assert!((f.l[(1, 0)] - 1.0).abs() < 1e-15);
        assert!((f.l[(1, 1)] - 2f64.sqrt()).abs() < 1e-15);

        let indef = mat_f64(&[&[1.0, 2.0], &[2.0, 1.0]]);
        match cholesky(&indef) {
            Err(Error::NotPositiveDefinite { pivot }) => assert_eq!(pivot, 2),
            other => panic!("expected pivot error, got {other:?}"),
        }
    }

    #[test]
    fn cholesky_round_trip_random_spd() {
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        for &n in &[5usize, 32, 128] {
            let g = Mat::from_fn(n, n, |_, _| rng.random::<f64>() - 0.5);
            // G Gᵀ + n I is SPD with modest conditioning
            let mut a = Mat::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    let mut s = 0.0;
                    for kk in 0..n {
                        s += g[(i, kk)] * g[(j, kk)];
                    }
                    a[(i, j)] = s + if i == j { n as f64 } else { 0.0 };
                }
            }
            let sym = SymMatrix::from_mat(a).unwrap();
            let f = cholesky(&sym).unwrap();
            let back = f.reconstruct();
            let norm = sym.scaled_norm();
            for i in 0..n {
                for j in 0..n {
                    assert!(
                        (back[(i, j)] - sym.at(i, j)).abs() <= 1e-12 * norm,
                        "n={n} at ({i},{j})"
                    );
                }
            }
            // solve check
            let x0: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
            let b = sym.mat.mul_vec(&x0);
            let x = f.solve(&b);
            for i in 0..n {
                assert!((x[i] - x0[i]).abs() < 1e-10, "solve n={n} i={i}");
            }
        }
    }

    #[test]
    fn jacobi_small_cases() {
        let (vals, vecs) = sym_eigen(&mat_f64(&[
            &[3.0, 0.0, 0.0],
            &[0.0, 1.0, 0.0],
            &[0.0, 0.0, 2.0],
        ]))
        .unwrap();
        assert_eq!(vals, vec![1.0, 2.0, 3.0]);
        // permutation eigenvectors
        for j in 0..3 {
            let col = vecs.col(j);
            let ones: Vec<f64> = col.iter().map(|v| v.abs()).collect();
            assert!((ones.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }

        let (vals, _) = sym_eigen(&mat_f64(&[&[2.0, 1.0], &[1.0, 2.0]])).unwrap();
        assert!((vals[0] - 1.0).abs() < 1e-14);
        assert!((vals[1] - 3.0).abs() < 1e-14);
    }

    /// Characteristic polynomial coefficients by Leverrier-Faddeev, roots by
    /// Durand-Kerner; an eigensolver-independent oracle.
    fn charpoly_roots(a: &SymMatrix<f64>) -> Vec<f64> {
        let n = a.n;
        // c[0] = 1 leading; p(x) = sum c[i] x^{n-i}
        let mut c = vec![1.0f64];
        let mut m = Mat::<f64>::zeros(n, n);
        for kk in 1..=n {
            // M <- A (M + c_{k-1} I)
            let mut shifted = m.clone();
            for i in 0..n {
                shifted[(i, i)] += *c.last().unwrap();
            }
            m = a.mat.mul(&shifted);
            let trace: f64 = (0..n).map(|i| m[(i, i)]).sum();
            c.push(-trace / kk as f64);
        }
        let deg = n;
        let eval = |z: Complex64| -> Complex64 {
            let mut acc = Complex64::new(0.0, 0.0);
            for &ci in &c {
                acc = acc * z + Complex64::new(ci, 0.0);
            }
            acc
        };
        let mut roots: Vec<Complex64> = (0..deg)
            .map(|i| {
                Complex64::from_polar(
                    1.0 + a.scaled_norm(),
                    2.0 * std::f64::consts::PI * (i as f64 + 0.25) / deg as f64,
                )
            })
            .collect();
        for _ in 0..200 {
            let mut delta = 0.0f64;
            for i in 0..deg {
                let mut denom = Complex64::new(1.0, 0.0);
                for j in 0..deg {
                    if i != j {
                        denom *= roots[i] - roots[j];
                    }
                }
                let step = eval(roots[i]) / denom;
                roots[i] -= step;
                delta = delta.max(step.norm());
            }
            if delta < 1e-13 {
                break;
            }
        }
        let mut out: Vec<f64> = roots.iter().map(|z| z.re).collect();
        out.sort_by(|x, y| x.partial_cmp(y).unwrap());
        out
    }

    #[test]
    fn jacobi_matches_charpoly_oracle() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let n = 6;
        let raw = Mat::from_fn(n, n, |_, _| 2.0 * rng.random::<f64>() - 1.0);
        let a = SymMatrix::from_mat(raw).unwrap();
        let (vals, vecs) = sym_eigen(&a).unwrap();
        let oracle = charpoly_roots(&a);
        for i in 0..n {
            assert!(
                (vals[i] - oracle[i]).abs() < 1e-9,
                "eigenvalue {i}: {} vs oracle {}",
                vals[i],
                oracle[i]
            );
        }
        // residual ||AV - VL|| <= 1e-10 ||A||
        let av = a.mat.mul(&vecs);
        let norm = a.scaled_norm();
        for j in 0..n {
            for i in 0..n {
                let r: f64 = av[(i, j)] - vecs[(i, j)] * vals[j];
                assert!(r.abs() <= 1e-10 * norm);
            }
        }
    }

    #[test]
    fn jacobi_residual_and_orthogonality_large() {
        let mut rng = ChaCha20Rng::seed_from_u64(17);
        let n = 96;
        let raw = Mat::from_fn(n, n, |_, _| 2.0 * rng.random::<f64>() - 1.0);
        let a = SymMatrix::from_mat(raw).unwrap();
        let (vals, vecs) = sym_eigen(&a).unwrap();
        let av = a.mat.mul(&vecs);
        let norm = a.scaled_norm();
        for j in 0..n {
            for i in 0..n {
                let r: f64 = av[(i, j)] - vecs[(i, j)] * vals[j];
                assert!(r.abs() <= 1e-10 * norm, "residual at ({i},{j})");
            }
        }
        let vtv = vecs.tr_mul(&vecs);
        for i in 0..n {
            for j in 0..n {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((vtv[(i, j)] - want).abs() < 1e-12);
            }
        }
        for w in vals.windows(2) {
            assert!(w[0] <= w[1]);
        }
    }

    #[test]
    fn jacobi_rejects_non_finite() {
        let m = Mat::from_fn(2, 2, |i, j| if i == j { f64::NAN } else { 0.0 });
        assert!(SymMatrix::from_mat(m).is_err());
    }

    #[test]
    fn pencil_identity_mass_reduces_to_sym_eigen() {
        let a = mat_f64(&[&[2.0, 1.0, 0.0], &[1.0, 2.0, 1.0], &[0.0, 1.0, 2.0]]);
        let b = SymMatrix::<f64>::identity(3);
        let g = generalized_sym_eigen(&a, &b, 1e-12).unwrap();
        let (plain, _) = sym_eigen(&a).unwrap();
        assert_eq!(g.effective_rank, 3);
        for (x, y) in g.eigenvalues.iter().zip(&plain) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn pencil_decoupled_and_rank_deficient() {
        let a = mat_f64(&[&[2.0, 0.0], &[0.0, 8.0]]);
        let b = mat_f64(&[&[1.0, 0.0], &[0.0, 4.0]]);
        let g = generalized_sym_eigen(&a, &b, 1e-12).unwrap();
        assert_eq!(g.effective_rank, 2);
        assert!((g.eigenvalues[0] - 2.0).abs() < 1e-12);
        assert!((g.eigenvalues[1] - 2.0).abs() < 1e-12);

        let a = SymMatrix::<f64>::identity(2);
        let b = mat_f64(&[&[1.0, 0.0], &[0.0, 0.0]]);
        let g = generalized_sym_eigen(&a, &b, 1e-10).unwrap();
        assert_eq!(g.effective_rank, 1);
        assert_eq!(g.eigenvalues.len(), 1);
        assert!((g.eigenvalues[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pencil_rejects_indefinite_mass() {
        let a = SymMatrix::<f64>::identity(2);
        let b = mat_f64(&[&[1.0, 0.0], &[0.0, -0.5]]);
        assert!(matches!(
            generalized_sym_eigen(&a, &b, 1e-12),
            Err(Error::MassNotPsd { .. })
        ));
    }

    #[test]
    fn pencil_residual_random_psd() {
        let mut rng = ChaCha20Rng::seed_from_u64(23);
        for &n in &[8usize, 64, 256] {
            let ga = Mat::from_fn(n, n, |_, _| rng.random::<f64>() - 0.5);
            let a = SymMatrix::from_mat(ga.tr_mul(&ga)).unwrap();
            let gb = Mat::from_fn(n, n, |_, _| rng.random::<f64>() - 0.5);
            let mut bb = gb.tr_mul(&gb);
            for i in 0..n {
                bb[(i, i)] += 0.1;
            }
            let b = SymMatrix::from_mat(bb).unwrap();
            let g = generalized_sym_eigen(&a, &b, 1e-12).unwrap();
            assert_eq!(g.effective_rank, n);
            let av = a.mat.mul(&g.vectors);
            let bv = b.mat.mul(&g.vectors);
            for j in 0..n {
                let lam = g.eigenvalues[j];
                let gate = 1e-8 * (a.scaled_norm() + lam.abs() * b.scaled_norm());
                for i in 0..n {
                    let r: f64 = av[(i, j)] - lam * bv[(i, j)];
                    assert!(r.abs() <= gate, "n={n} residual at ({i},{j}): {r:.3e}");
                }
            }
        }
    }

    #[test]
    fn pencil_congruence_invariance() {
        let mut rng = ChaCha20Rng::seed_from_u64(31);
        let n = 12;
        let ga = Mat::from_fn(n, n, |_, _| rng.random::<f64>() - 0.5);
        let a = SymMatrix::from_mat(ga.tr_mul(&ga)).unwrap();
        let gb = Mat::from_fn(n, n, |_, _| rng.random::<f64>() - 0.5);
        let mut bb = gb.tr_mul(&gb);
        for i in 0..n {
            bb[(i, i)] += 0.5;
        }
        let b = SymMatrix::from_mat(bb).unwrap();
        // well-conditioned congruence C = I + 0.3 R
        let c = Mat::from_fn(n, n, |i, j| {
            let r: f64 = rng.random::<f64>() - 0.5;
            if i == j {
                1.0 + 0.3 * r
            } else {
                0.3 * r
            }
        });
        let ac = SymMatrix::from_mat(c.tr_mul(&a.mat.mul(&c))).unwrap();
        let bc = SymMatrix::from_mat(c.tr_mul(&b.mat.mul(&c))).unwrap();
        let g1 = generalized_sym_eigen(&a, &b, 1e-12).unwrap();
        let g2 = generalized_sym_eigen(&ac, &bc, 1e-12).unwrap();
        assert_eq!(g1.eigenvalues.len(), g2.eigenvalues.len());
        for (x, y) in g1.eigenvalues.iter().zip(&g2.eigenvalues) {
            assert!((x - y).abs() <= 1e-9 * (1.0 + x.abs()), "{x} vs {y}");
        }
    }

    #[test]
    fn dd_eigen_reaches_dd_accuracy() {
        // a matrix whose eigenvalues are known exactly: circulant-like
        // 2x2 blocks assembled symmetrically
        let a = SymMatrix::<Dd>::from_rows(&[
            vec![Dd::of(2.0), Dd::of(1.0)],
            vec![Dd::of(1.0), Dd::of(2.0)],
        ])
        .unwrap();
        let (vals, _) = sym_eigen(&a).unwrap();
        assert!((vals[0] - Dd::of(1.0)).abs() < Dd::of(1e-30));
        assert!((vals[1] - Dd::of(3.0)).abs() < Dd::of(1e-30));
    }
}
