//! Dense row-major matrices and symmetric eigensolvers.
//!
//! Two eigenvalue routines are provided with the same contract (all
//! eigenvalues, ascending; eigenvalue sum equals the trace to relative
//! 1e-8): Householder tridiagonalization followed by implicit-shift QL,
//! which is the default, and cyclic Jacobi, which also returns eigenvectors
//! and serves as the cross-check implementation.

use crate::error::{Error, Result};

#[derive(Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl std::fmt::Debug for Mat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Mat({}x{})", self.rows, self.cols)
    }
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Config(format!(
                "matrix data length {} does not match {rows}x{cols}",
                data.len()
            )));
        }
        Ok(Mat { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        t
    }

    /// self * other, ikj loop order so the inner loop runs over contiguous
    /// rows of the output and of `other`.
    pub fn matmul(&self, other: &Mat) -> Result<Mat> {
        if self.cols != other.rows {
            return Err(Error::Config(format!(
                "matmul shape mismatch: {}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let arow = &self.data[i * self.cols..(i + 1) * self.cols];
            let orow = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, &aik) in arow.iter().enumerate() {
                if aik == 0.0 {
                    continue;
                }
                let brow = &other.data[k * other.cols..(k + 1) * other.cols];
                for (o, &b) in orow.iter_mut().zip(brow.iter()) {
                    *o += aik * b;
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            *o = row.iter().zip(x.iter()).map(|(a, b)| a * b).sum();
        }
    }

    pub fn scale(&mut self, s: f64) {
        for v in &mut self.data {
            *v *= s;
        }
    }

    pub fn add_assign_scaled(&mut self, other: &Mat, s: f64) {
        debug_assert_eq!(self.rows, other.rows);
        debug_assert_eq!(self.cols, other.cols);
        for (a, b) in self.data.iter_mut().zip(other.data.iter()) {
            *a += s * b;
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    /// Sum of squared entries; `trace(M M^T)`.
    pub fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Largest |a_ij - a_ji|.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols.min(self.rows) {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// (M + M^T)/2 in place; square only.
    pub fn symmetrize(&mut self) {
        debug_assert!(self.is_square());
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                let avg = 0.5 * (self.get(i, j) + self.get(j, i));
                self.set(i, j, avg);
                self.set(j, i, avg);
            }
        }
    }
}

fn check_symmetric(m: &Mat) -> Result<()> {
    if !m.is_square() {
        return Err(Error::Domain(format!(
            "eigensolver needs a square matrix, got {}x{}",
            m.rows, m.cols
        )));
    }
    let scale = m.max_abs().max(1e-300);
    let dev = m.asymmetry();
    if dev > 1e-8 * scale {
        return Err(Error::Domain(format!(
            "matrix is not symmetric: |a_ij - a_ji| up to {dev:.3e} vs scale {scale:.3e}"
        )));
    }
    Ok(())
}

/// All eigenvalues of a symmetric matrix, ascending. Householder
/// tridiagonalization + implicit-shift QL.
pub fn symmetric_eigenvalues(m: &Mat) -> Result<Vec<f64>> {
    check_symmetric(m)?;
    let n = m.rows;
    if n == 0 {
        return Err(Error::Domain("empty matrix".into()));
    }
    let mut a = m.clone();
    let (mut d, mut e) = tridiagonalize(&mut a);
    ql_implicit(&mut d, &mut e)?;
    d.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(d)
}

/// Householder reduction of a symmetric matrix to tridiagonal form,
/// eigenvalues only (no transformation accumulation). Returns (diagonal,
/// subdiagonal with e[0] = 0).
fn tridiagonalize(a: &mut Mat) -> (Vec<f64>, Vec<f64>) {
    let n = a.rows;
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = 0.0;
        if l > 0 {
            let scale: f64 = (0..=l).map(|k| a.get(i, k).abs()).sum();
            if scale == 0.0 {
                e[i] = a.get(i, l);
            } else {
                for k in 0..=l {
                    let v = a.get(i, k) / scale;
                    a.set(i, k, v);
                    h += v * v;
                }
                let f = a.get(i, l);
                let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                a.set(i, l, f - g);
                let mut f_acc = 0.0;
                for j in 0..=l {
                    let mut g_acc = 0.0;
                    for k in 0..=j {
                        g_acc += a.get(j, k) * a.get(i, k);
                    }
                    for k in (j + 1)..=l {
                        g_acc += a.get(k, j) * a.get(i, k);
                    }
                    e[j] = g_acc / h;
                    f_acc += e[j] * a.get(i, j);
                }
                let hh = f_acc / (h + h);
                for j in 0..=l {
                    let f = a.get(i, j);
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        let v = a.get(j, k) - f * e[k] - g * a.get(i, k);
                        a.set(j, k, v);
                    }
                }
            }
        } else {
            e[i] = a.get(i, l);
        }
        d[i] = h;
    }
    for i in 0..n {
        d[i] = a.get(i, i);
    }
    e[0] = 0.0;
    (d, e)
}

/// Implicit-shift QL on a symmetric tridiagonal matrix; eigenvalues land in
/// `d` (unsorted).
fn ql_implicit(d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    if n == 1 {
        return Ok(());
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 64 {
                return Err(Error::Domain(
                    "QL iteration failed to converge in 64 steps".into(),
                ));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c) = (1.0, 1.0);
            let mut p = 0.0;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if i == l {
                    d[l] -= p;
                    e[l] = g;
                    e[m] = 0.0;
                }
            }
        }
    }
    Ok(())
}

/// Solves A x = b for symmetric positive definite A by Cholesky
/// factorization, with a tiny relative ridge retry when the factorization
/// stalls on a semidefinite system.
pub fn solve_spd(a: &Mat, b: &[f64]) -> Result<Vec<f64>> {
    if !a.is_square() || a.rows() != b.len() {
        return Err(Error::Config("solve_spd shape mismatch".into()));
    }
    let n = a.rows();
    let scale = a.trace().abs().max(1e-300) / n as f64;
    for ridge in [0.0, 1e-10 * scale, 1e-6 * scale] {
        if let Some(x) = try_cholesky_solve(a, b, ridge) {
            return Ok(x);
        }
    }
    Err(Error::Singular(
        "normal equations not positive definite even with ridge".into(),
    ))
}

fn try_cholesky_solve(a: &Mat, b: &[f64], ridge: f64) -> Option<Vec<f64>> {
    let n = a.rows();
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a.get(i, j) + if i == j { ridge } else { 0.0 };
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if s <= 0.0 {
                    return None;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    // forward then backward substitution
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * n + k] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l[k * n + i] * x[k];
        }
        x[i] = s / l[i * n + i];
    }
    Some(x)
}

/// Cyclic Jacobi eigensolver; returns (eigenvalues ascending, eigenvectors as
/// columns when requested, in the matching order).
pub fn symmetric_eigen_jacobi(m: &Mat, want_vectors: bool) -> Result<(Vec<f64>, Option<Mat>)> {
    check_symmetric(m)?;
    let n = m.rows;
    if n == 0 {
        return Err(Error::Domain("empty matrix".into()));
    }
    let mut a = m.clone();
    a.symmetrize();
    let mut v = if want_vectors {
        Some(Mat::identity(n))
    } else {
        None
    };
    let scale = a.max_abs().max(1e-300);
    let tol = 1e-14 * scale;
    for _sweep in 0..60 {
        let mut off: f64 = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off = off.max(a.get(i, j).abs());
            }
        }
        if off <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                if apq.abs() <= tol * 1e-2 {
                    continue;
                }
                let app = a.get(p, p);
                let aqq = a.get(q, q);
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // rotate rows/cols p and q
                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, c * akp - s * akq);
                    a.set(k, q, s * akp + c * akq);
                }
                for k in 0..n {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, c * apk - s * aqk);
                    a.set(q, k, s * apk + c * aqk);
                }
                if let Some(vm) = v.as_mut() {
                    for k in 0..n {
                        let vkp = vm.get(k, p);
                        let vkq = vm.get(k, q);
                        vm.set(k, p, c * vkp - s * vkq);
                        vm.set(k, q, s * vkp + c * vkq);
                    }
                }
            }
        }
    }
    let mut idx: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a.get(i, i)).collect();
    idx.sort_by(|&x, &y| diag[x].partial_cmp(&diag[y]).unwrap());
    let vals: Vec<f64> = idx.iter().map(|&i| diag[i]).collect();
    let vecs = v.map(|vm| {
        let mut out = Mat::zeros(n, n);
        for (newc, &oldc) in idx.iter().enumerate() {
            for r in 0..n {
                out.set(r, newc, vm.get(r, oldc));
            }
        }
        out
    });
    Ok((vals, vecs))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b.iter()) {
            assert!((x - y).abs() <= tol, "{x} vs {y} (tol {tol})");
        }
    }

    #[test]
    fn identity_and_diag() {
        let m = Mat::identity(7);
        let vals = symmetric_eigenvalues(&m).unwrap();
        assert_close(&vals, &vec![1.0; 7], 1e-12);

        let mut d = Mat::zeros(5, 5);
        for i in 0..5 {
            d.set(i, i, (i + 1) as f64);
        }
        let vals = symmetric_eigenvalues(&d).unwrap();
        assert_close(&vals, &[1.0, 2.0, 3.0, 4.0, 5.0], 1e-12);
    }

    #[test]
    fn two_by_two_closed_form() {
        let mut m = Mat::zeros(2, 2);
        m.set(0, 0, 2.0);
        m.set(1, 1, 3.0);
        m.set(0, 1, 1.0);
        m.set(1, 0, 1.0);
        // eigenvalues (5 +- sqrt(5))/2
        let want = [(5.0 - 5f64.sqrt()) / 2.0, (5.0 + 5f64.sqrt()) / 2.0];
        let vals = symmetric_eigenvalues(&m).unwrap();
        assert_close(&vals, &want, 1e-12);
    }

    fn random_symmetric(n: usize, seed: u64) -> Mat {
        // small deterministic LCG; adequate for test matrices
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
        let mut next = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let v = next();
                m.set(i, j, v);
                m.set(j, i, v);
            }
        }
        m
    }

    #[test]
    fn ql_and_jacobi_agree_with_trace() {
        for n in [3usize, 10, 40] {
            let m = random_symmetric(n, 42 + n as u64);
            let ql = symmetric_eigenvalues(&m).unwrap();
            let (jac, _) = symmetric_eigen_jacobi(&m, false).unwrap();
            let scale = m.max_abs();
            assert_close(&ql, &jac, 1e-9 * scale * n as f64);
            let tr = m.trace();
            let sum: f64 = ql.iter().sum();
            assert!((tr - sum).abs() <= 1e-8 * tr.abs().max(1.0));
        }
    }

    #[test]
    fn jacobi_residuals() {
        let n = 25;
        let m = random_symmetric(n, 7);
        let (vals, vecs) = symmetric_eigen_jacobi(&m, true).unwrap();
        let v = vecs.unwrap();
        let scale = m.max_abs();
        for k in [0usize, n / 2, n - 1] {
            let col: Vec<f64> = (0..n).map(|r| v.get(r, k)).collect();
            let mut mv = vec![0.0; n];
            m.matvec(&col, &mut mv);
            let mut worst = 0.0f64;
            for i in 0..n {
                worst = worst.max((mv[i] - vals[k] * col[i]).abs());
            }
            assert!(worst <= 1e-8 * scale, "residual {worst:.3e}");
        }
    }

    #[test]
    fn gram_matrix_psd_and_trace_consistency() {
        let x = random_symmetric(30, 99);
        let g = x.matmul(&x.transpose()).unwrap();
        let vals = symmetric_eigenvalues(&g).unwrap();
        assert!(vals.iter().all(|&v| v >= -1e-9 * g.max_abs()));
        let sum: f64 = vals.iter().sum();
        assert!((sum - g.trace()).abs() <= 1e-8 * g.trace().abs().max(1.0));
        assert!((g.trace() - x.frobenius_sq()).abs() <= 1e-9 * g.trace().abs());
    }

    #[test]
    fn rejects_asymmetric() {
        let mut m = Mat::zeros(3, 3);
        m.set(0, 1, 1.0);
        assert!(matches!(symmetric_eigenvalues(&m), Err(Error::Domain(_))));
        assert!(matches!(
            symmetric_eigenvalues(&Mat::zeros(2, 3)),
            Err(Error::Domain(_))
        ));
    }
}
