//! Small dense linear algebra sized for the multiplier matrices.
//!
//! Multiplier matrices are `m × n` with `m` (the number of conserved
//! quantities) at most a handful, so everything here is written for clarity
//! over blocking or vectorization: a row-major [`DenseMatrix`], a symmetric
//! solver (Cholesky with an LU fallback), a one-sided Jacobi SVD and the
//! right pseudoinverse built on either of them.

use std::fmt;
use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Relative pivot threshold below which a symmetric system is reported
/// singular.
pub const SINGULAR_PIVOT_RTOL: f64 = 1e-14;

/// Relative singular-value threshold for the SVD pseudoinverse backend.
pub const SINGULAR_VALUE_RTOL: f64 = 1e-14;

/// Sweep cap for the Jacobi SVD.
pub const MAX_JACOBI_SWEEPS: usize = 60;

/// Row-major dense matrix of `f64`.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    /// Builds a matrix from row-major entries, rejecting wrong lengths and
    /// non-finite entries.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(k) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: k / cols.max(1), col: k % cols.max(1) });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Self::new(r, c, rows.concat())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Row-major entries.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, values: &[f64]) {
        for (i, &v) in values.iter().enumerate() {
            self[(i, j)] = v;
        }
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    /// `A·v`.
    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    /// `Aᵀ·v`.
    pub fn tmatvec(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (i, &vi) in v.iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o += a * vi;
            }
        }
        out
    }

    /// `A·B`.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    /// Gram matrix `A·Aᵀ` of the rows.
    pub fn gram_rows(&self) -> Self {
        let mut b = Self::zeros(self.rows, self.rows);
        for i in 0..self.rows {
            for j in 0..=i {
                let v = dot(self.row(i), self.row(j));
                b[(i, j)] = v;
                b[(j, i)] = v;
            }
        }
        b
    }

    /// Largest absolute entry (`‖A‖_max`).
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// `‖A − B‖_max`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).fold(0.0_f64, |acc, (a, b)| acc.max((a - b).abs()))
    }

    pub fn is_symmetric(&self, rtol: f64) -> bool {
        if self.rows != self.cols {
            return false;
        }
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        (0..self.rows).all(|i| {
            (0..i).all(|j| (self[(i, j)] - self[(j, i)]).abs() <= rtol * scale)
        })
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm2(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

#[inline]
pub fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// Thin SVD `A = U·diag(σ)·Vᵀ` of an `m × n` matrix with `m ≤ n`.
#[derive(Debug, Clone)]
pub struct SvdFactors {
    /// `m × m` orthogonal.
    pub u: DenseMatrix,
    /// Singular values, descending.
    pub sigma: Vec<f64>,
    /// `n × m` with orthonormal columns.
    pub v: DenseMatrix,
}

impl SvdFactors {
    /// `U·diag(σ)·Vᵀ`.
    pub fn reconstruct(&self) -> DenseMatrix {
        let m = self.sigma.len();
        let mut us = self.u.clone();
        for i in 0..m {
            for (k, &s) in self.sigma.iter().enumerate() {
                us[(i, k)] *= s;
            }
        }
        us.matmul(&self.v.transpose())
    }

    /// `σ_max / σ_min`, or `+∞` once `σ_min < 1e-300`.
    pub fn condition_number(&self) -> f64 {
        match (self.sigma.first(), self.sigma.last()) {
            (Some(&hi), Some(&lo)) if lo >= 1e-300 => hi / lo,
            (Some(_), Some(_)) => f64::INFINITY,
            _ => 1.0,
        }
    }
}

/// Solves `B·g = r` for symmetric `B`.
///
/// Cholesky (LDLᵀ form) is attempted first since `B` is a Gram matrix; a nonpositive
/// pivot switches to LU with partial pivoting. Either route reports
/// [`Error::SingularMatrix`] when a pivot magnitude drops below
/// `1e-14·‖B‖_max`.
pub fn solve_sym(b: &DenseMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    let m = b.rows();
    if m == 0 || b.cols() != m || rhs.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "solve_sym: {}x{} matrix with rhs of length {}",
            b.rows(),
            b.cols(),
            rhs.len()
        )));
    }
    if !b.is_symmetric(1e-12) {
        return Err(Error::InvalidParams("solve_sym: matrix is not symmetric".into()));
    }
    let threshold = SINGULAR_PIVOT_RTOL * b.max_abs();
    match cholesky_solve(b, rhs, threshold)? {
        Some(g) => Ok(g),
        None => lu_solve(b, rhs, threshold),
    }
}

/// Root-free Cholesky (`B = L·D·Lᵀ` with unit lower `L`). Returns
/// `Ok(None)` when a nonpositive pivot is met.
fn cholesky_solve(b: &DenseMatrix, rhs: &[f64], threshold: f64) -> Result<Option<Vec<f64>>> {
    let m = b.rows();
    let mut l = DenseMatrix::identity(m);
    let mut d = vec![0.0; m];
    for j in 0..m {
        let mut dj = b[(j, j)];
        for k in 0..j {
            dj -= l[(j, k)] * l[(j, k)] * d[k];
        }
        if dj <= 0.0 {
            return Ok(None);
        }
        if dj < threshold {
            return Err(Error::SingularMatrix { pivot: dj, threshold });
        }
        d[j] = dj;
        for i in j + 1..m {
            let mut s = b[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)] * d[k];
            }
            l[(i, j)] = s / dj;
        }
    }
    let mut y = rhs.to_vec();
    for i in 0..m {
        for k in 0..i {
            y[i] -= l[(i, k)] * y[k];
        }
    }
    for i in 0..m {
        y[i] /= d[i];
    }
    for i in (0..m).rev() {
        for k in i + 1..m {
            y[i] -= l[(k, i)] * y[k];
        }
    }
    Ok(Some(y))
}

fn lu_solve(b: &DenseMatrix, rhs: &[f64], threshold: f64) -> Result<Vec<f64>> {
    let m = b.rows();
    let mut a = b.clone();
    let mut x = rhs.to_vec();
    for k in 0..m {
        let p = (k..m)
            .max_by(|&i, &j| a[(i, k)].abs().total_cmp(&a[(j, k)].abs()))
            .unwrap_or(k);
        let pivot = a[(p, k)];
        if !(pivot.abs() >= threshold) {
            return Err(Error::SingularMatrix { pivot: pivot.abs(), threshold });
        }
        if p != k {
            for j in 0..m {
                let tmp = a[(k, j)];
                a[(k, j)] = a[(p, j)];
                a[(p, j)] = tmp;
            }
            x.swap(k, p);
        }
        for i in k + 1..m {
            let factor = a[(i, k)] / pivot;
            if factor == 0.0 {
                continue;
            }
            for j in k..m {
                a[(i, j)] -= factor * a[(k, j)];
            }
            x[i] -= factor * x[k];
        }
    }
    for i in (0..m).rev() {
        for j in i + 1..m {
            x[i] -= a[(i, j)] * x[j];
        }
        x[i] /= a[(i, i)];
    }
    Ok(x)
}

/// Inverse of a symmetric matrix, column by column through [`solve_sym`].
pub fn inverse_sym(b: &DenseMatrix) -> Result<DenseMatrix> {
    let m = b.rows();
    let mut inv = DenseMatrix::zeros(m, m);
    let mut e = vec![0.0; m];
    for j in 0..m {
        e.iter_mut().for_each(|v| *v = 0.0);
        e[j] = 1.0;
        let col = solve_sym(b, &e)?;
        inv.set_column(j, &col);
    }
    Ok(inv)
}

/// Thin SVD of an `m × n` matrix (`m ≤ n`) by one-sided Jacobi rotations
/// applied to the rows.
///
/// Rows are rotated pairwise until mutually orthogonal; the rotations
/// accumulate into `U`, the row norms are the singular values and the
/// normalized rows are the columns of `V`.
pub fn svd_thin(a: &DenseMatrix) -> Result<SvdFactors> {
    let m = a.rows();
    let n = a.cols();
    if m > n {
        return Err(Error::DimensionMismatch(format!("svd_thin needs rows <= cols, got {m}x{n}")));
    }
    let mut w = a.clone();
    let mut u = DenseMatrix::identity(m);
    let tol = f64::EPSILON;

    let mut converged = m < 2;
    for _sweep in 0..MAX_JACOBI_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        for p in 0..m {
            for q in p + 1..m {
                let alpha = dot(w.row(p), w.row(p));
                let beta = dot(w.row(q), w.row(q));
                let gamma = dot(w.row(p), w.row(q));
                if !(gamma.abs() > tol * (alpha * beta).sqrt()) {
                    if gamma.is_nan() || alpha.is_nan() || beta.is_nan() {
                        rotated = true;
                    }
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_rows(&mut w, p, q, c, s);
                rotate_cols(&mut u, p, q, c, s);
            }
        }
        converged = !rotated;
    }
    if !converged {
        return Err(Error::NoConvergence { sweeps: MAX_JACOBI_SWEEPS });
    }

    let norms: Vec<f64> = (0..m).map(|i| norm2(w.row(i))).collect();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));

    let scale = norms.iter().cloned().fold(0.0_f64, f64::max);
    let mut sigma = Vec::with_capacity(m);
    let mut u_sorted = DenseMatrix::zeros(m, m);
    let mut v = DenseMatrix::zeros(n, m);
    let mut deficient = Vec::new();
    for (k, &src) in order.iter().enumerate() {
        let s = norms[src];
        sigma.push(s);
        u_sorted.set_column(k, &u.column(src));
        if s > 0.0 && s > scale * 1e-300 {
            let col: Vec<f64> = w.row(src).iter().map(|x| x / s).collect();
            v.set_column(k, &col);
        } else {
            deficient.push(k);
        }
    }
    // Zero singular values leave V columns undetermined; complete them to an
    // orthonormal set.
    for k in deficient {
        let col = orthonormal_complement(&v, k);
        v.set_column(k, &col);
    }
    Ok(SvdFactors { u: u_sorted, sigma, v })
}

fn rotate_rows(w: &mut DenseMatrix, p: usize, q: usize, c: f64, s: f64) {
    let cols = w.cols();
    for j in 0..cols {
        let a = w[(p, j)];
        let b = w[(q, j)];
        w[(p, j)] = c * a - s * b;
        w[(q, j)] = s * a + c * b;
    }
}

fn rotate_cols(u: &mut DenseMatrix, p: usize, q: usize, c: f64, s: f64) {
    for i in 0..u.rows() {
        let a = u[(i, p)];
        let b = u[(i, q)];
        u[(i, p)] = c * a - s * b;
        u[(i, q)] = s * a + c * b;
    }
}

/// A unit vector orthogonal to every column of `v` except `skip` (and any
/// still-zero column), found by Gram-Schmidt on the standard basis.
fn orthonormal_complement(v: &DenseMatrix, skip: usize) -> Vec<f64> {
    let n = v.rows();
    let basis: Vec<Vec<f64>> = (0..v.cols())
        .filter(|&k| k != skip)
        .map(|k| v.column(k))
        .filter(|c| norm2(c) > 0.5)
        .collect();
    let mut best = vec![0.0; n];
    let mut best_norm = -1.0;
    for e in 0..n {
        let mut cand = vec![0.0; n];
        cand[e] = 1.0;
        for _ in 0..2 {
            for b in &basis {
                let proj = dot(&cand, b);
                cand.iter_mut().zip(b).for_each(|(c, bi)| *c -= proj * bi);
            }
        }
        let nrm = norm2(&cand);
        if nrm > best_norm {
            best_norm = nrm;
            best = cand;
        }
        if nrm > 0.5 {
            break;
        }
    }
    best.iter().map(|x| x / best_norm).collect()
}

/// Which factorization backs the pseudoinverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PinvBackend {
    /// `Aᵀ(AAᵀ)⁻¹v` through [`solve_sym`].
    NormalEq,
    /// `VΣ⁻¹Uᵀv` through [`svd_thin`].
    Svd,
}

/// Applies the right Moore-Penrose pseudoinverse of a full-row-rank `A` to
/// `v`, i.e. the minimal-norm `w` with `A·w = v`.
pub fn apply_pinv(a: &DenseMatrix, v: &[f64], backend: PinvBackend) -> Result<Vec<f64>> {
    if v.len() != a.rows() {
        return Err(Error::DimensionMismatch(format!(
            "apply_pinv: {} rows, vector of length {}",
            a.rows(),
            v.len()
        )));
    }
    match backend {
        PinvBackend::NormalEq => {
            let g = solve_sym(&a.gram_rows(), v)?;
            Ok(a.tmatvec(&g))
        }
        PinvBackend::Svd => {
            let f = svd_thin(a)?;
            svd_pinv_apply(&f, v)
        }
    }
}

/// `V·Σ⁻¹·Uᵀ·v` for precomputed factors.
pub fn svd_pinv_apply(f: &SvdFactors, v: &[f64]) -> Result<Vec<f64>> {
    let smax = f.sigma.first().copied().unwrap_or(0.0);
    let threshold = SINGULAR_VALUE_RTOL * smax;
    let proj = f.u.tmatvec(v);
    let mut scaled = Vec::with_capacity(proj.len());
    for (a, &s) in proj.iter().zip(&f.sigma) {
        if !(s > threshold) || s == 0.0 {
            return Err(Error::SingularMatrix { pivot: s, threshold });
        }
        scaled.push(a / s);
    }
    Ok(f.v.matvec(&scaled))
}

/// 2-norm condition number `σ_max/σ_min`, `+∞` when `σ_min < 1e-300` or
/// the SVD fails.
pub fn cond_2(a: &DenseMatrix) -> f64 {
    if a.rows() == 0 || a.cols() == 0 {
        return 1.0;
    }
    let res = if a.rows() <= a.cols() { svd_thin(a) } else { svd_thin(&a.transpose()) };
    res.map_or(f64::INFINITY, |f| f.condition_number())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut ChaCha8Rng, m: usize, n: usize) -> DenseMatrix {
        let data = (0..m * n).map(|_| rng.random_range(-1.0..1.0)).collect();
        DenseMatrix::new(m, n, data).unwrap()
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert!(matches!(DenseMatrix::new(2, 2, vec![1.0; 3]), Err(Error::DimensionMismatch(_))));
        assert!(matches!(
            DenseMatrix::new(2, 2, vec![1.0, f64::NAN, 0.0, 1.0]),
            Err(Error::NonFinite { row: 0, col: 1 })
        ));
    }

    #[test]
    fn solve_sym_diagonal_and_identity() {
        let g = solve_sym(&DenseMatrix::diag(&[2.0, 4.0]), &[2.0, 8.0]).unwrap();
        assert_eq!(g, vec![1.0, 2.0]);
        let r = [0.3, -1.7, 5.0];
        let g = solve_sym(&DenseMatrix::identity(3), &r).unwrap();
        assert_eq!(g, r.to_vec());
    }

    #[test]
    fn solve_sym_two_by_two_matches_explicit_inverse() {
        let b = DenseMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let g = solve_sym(&b, &[3.0, 3.0]).unwrap();
        // inverse of [[2,1],[1,2]] is [[2,-1],[-1,2]]/3
        let expected = [(2.0 * 3.0 - 3.0) / 3.0, (-3.0 + 2.0 * 3.0) / 3.0];
        for (a, e) in g.iter().zip(expected) {
            assert!((a - e).abs() < 1e-15);
            assert!((a - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn solve_sym_indefinite_falls_back_to_lu() {
        let b = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        let g = solve_sym(&b, &[3.0, 3.0]).unwrap();
        assert!((g[0] - 1.0).abs() < 1e-14 && (g[1] - 1.0).abs() < 1e-14);
        let minkowski = DenseMatrix::diag(&[1.0, -1.0, -1.0, -1.0]);
        let g = solve_sym(&minkowski, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(g, vec![1.0, -2.0, -3.0, -4.0]);
    }

    #[test]
    fn solve_sym_reports_singular() {
        let b = DenseMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert!(matches!(solve_sym(&b, &[1.0, 1.0]), Err(Error::SingularMatrix { .. })));
        let b = DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1e-15]]).unwrap();
        assert!(matches!(solve_sym(&b, &[1.0, 1.0]), Err(Error::SingularMatrix { .. })));
    }

    #[test]
    fn solve_sym_random_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let m = rng.random_range(1..=8);
            let n = m + rng.random_range(1..=10);
            let a = random_matrix(&mut rng, m, n);
            let b = a.gram_rows();
            let r: Vec<f64> = (0..m).map(|_| rng.random_range(-3.0..3.0)).collect();
            let g = solve_sym(&b, &r).unwrap();
            let bg = b.matvec(&g);
            let res: Vec<f64> = bg.iter().zip(&r).map(|(x, y)| x - y).collect();
            assert!(norm2(&res) <= 1e-10 * norm2(&r).max(1.0));
        }
    }

    #[test]
    fn svd_of_single_row() {
        let f = svd_thin(&DenseMatrix::from_rows(&[vec![2.5, 0.0, 0.0]]).unwrap()).unwrap();
        assert_eq!(f.sigma, vec![2.5]);
        assert!((f.v[(0, 0)].abs() - 1.0).abs() < 1e-15);
        assert_eq!(f.v[(1, 0)], 0.0);
    }

    #[test]
    fn svd_of_padded_identity() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 0.0, 0.0, 0.0], vec![0.0, 1.0, 0.0, 0.0]])
            .unwrap();
        let f = svd_thin(&a).unwrap();
        assert_eq!(f.sigma, vec![1.0, 1.0]);
    }

    fn check_factors(a: &DenseMatrix, f: &SvdFactors) {
        let m = a.rows();
        assert!(f.sigma.windows(2).all(|w| w[0] >= w[1]));
        assert!(f.sigma.iter().all(|&s| s >= 0.0));
        let utu = f.u.transpose().matmul(&f.u);
        assert!(utu.max_abs_diff(&DenseMatrix::identity(m)) <= 1e-12);
        let vtv = f.v.transpose().matmul(&f.v);
        assert!(vtv.max_abs_diff(&DenseMatrix::identity(m)) <= 1e-12, "{vtv:?}");
        assert!(f.reconstruct().max_abs_diff(a) <= 1e-12 * a.max_abs().max(1.0));
    }

    #[test]
    fn svd_reconstructs_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_matrix(&mut rng, 3, 6);
        check_factors(&a, &svd_thin(&a).unwrap());
        for _ in 0..300 {
            let m = rng.random_range(1..=8);
            let n = rng.random_range(m..=64);
            let a = random_matrix(&mut rng, m, n);
            check_factors(&a, &svd_thin(&a).unwrap());
        }
    }

    #[test]
    fn svd_handles_rank_deficiency() {
        let a = DenseMatrix::from_rows(&[
            vec![1.0, 2.0, 3.0, 4.0],
            vec![2.0, 4.0, 6.0, 8.0],
            vec![0.0, 1.0, 0.0, 1.0],
        ])
        .unwrap();
        let f = svd_thin(&a).unwrap();
        check_factors(&a, &f);
        assert!(f.sigma[2] < 1e-14);
        let z = DenseMatrix::zeros(2, 3);
        let f = svd_thin(&z).unwrap();
        check_factors(&z, &f);
    }

    #[test]
    fn svd_rejects_tall_and_nonfinite() {
        assert!(matches!(svd_thin(&DenseMatrix::zeros(3, 2)), Err(Error::DimensionMismatch(_))));
        let mut a = DenseMatrix::identity(2);
        a[(0, 1)] = f64::NAN;
        assert!(matches!(svd_thin(&a), Err(Error::NoConvergence { .. })));
    }

    #[test]
    fn pinv_of_row_vector() {
        let a = DenseMatrix::from_rows(&[vec![3.0, 4.0]]).unwrap();
        for backend in [PinvBackend::NormalEq, PinvBackend::Svd] {
            let w = apply_pinv(&a, &[25.0], backend).unwrap();
            assert!((w[0] - 3.0).abs() < 1e-14 && (w[1] - 4.0).abs() < 1e-14, "{w:?}");
        }
    }

    #[test]
    fn pinv_of_padded_identity_is_minimal_norm() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 0.0, 0.0, 0.0], vec![0.0, 1.0, 0.0, 0.0]])
            .unwrap();
        for backend in [PinvBackend::NormalEq, PinvBackend::Svd] {
            let w = apply_pinv(&a, &[0.7, -2.0], backend).unwrap();
            assert_eq!(w, vec![0.7, -2.0, 0.0, 0.0]);
        }
    }

    /// Rows `m..n` of the full right factor span ker(A); build that basis by
    /// completing the thin V with Gram-Schmidt.
    fn kernel_basis(a: &DenseMatrix) -> Vec<Vec<f64>> {
        let f = svd_thin(a).unwrap();
        let n = a.cols();
        let mut basis: Vec<Vec<f64>> = (0..f.v.cols()).map(|k| f.v.column(k)).collect();
        let mut kernel = Vec::new();
        for e in 0..n {
            let mut c = vec![0.0; n];
            c[e] = 1.0;
            for _ in 0..2 {
                for b in &basis {
                    let p = dot(&c, b);
                    c.iter_mut().zip(b).for_each(|(x, y)| *x -= p * y);
                }
            }
            let nrm = norm2(&c);
            if nrm > 1e-6 {
                let c: Vec<f64> = c.iter().map(|x| x / nrm).collect();
                basis.push(c.clone());
                kernel.push(c);
            }
        }
        assert_eq!(kernel.len(), n - a.rows());
        kernel
    }

    #[test]
    fn pinv_random_solves_and_is_orthogonal_to_kernel() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let a = random_matrix(&mut rng, 2, 5);
            let v = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            let kernel = kernel_basis(&a);
            for backend in [PinvBackend::NormalEq, PinvBackend::Svd] {
                let w = apply_pinv(&a, &v, backend).unwrap();
                let aw = a.matvec(&w);
                for (x, y) in aw.iter().zip(&v) {
                    assert!((x - y).abs() <= 1e-10 * norm2(&v).max(1.0));
                }
                for k in &kernel {
                    assert!(dot(k, &w).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn backends_agree_on_well_conditioned_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut checked = 0;
        while checked < 1000 {
            let m = rng.random_range(1..=6);
            let n = m + rng.random_range(1..=12);
            let a = random_matrix(&mut rng, m, n);
            if cond_2(&a) > 1e4 {
                continue;
            }
            let v: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
            let w1 = apply_pinv(&a, &v, PinvBackend::NormalEq).unwrap();
            let w2 = apply_pinv(&a, &v, PinvBackend::Svd).unwrap();
            let diff: Vec<f64> = w1.iter().zip(&w2).map(|(x, y)| x - y).collect();
            assert!(norm2(&diff) <= 1e-9 * norm2(&w2).max(f64::MIN_POSITIVE));
            checked += 1;
        }
    }

    #[test]
    fn right_inverse_and_projection_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..100 {
            let m = rng.random_range(1..=5);
            let n = m + rng.random_range(1..=8);
            let a = random_matrix(&mut rng, m, n);
            // Pseudoinverse column by column.
            let mut pinv = DenseMatrix::zeros(n, m);
            for j in 0..m {
                let mut e = vec![0.0; m];
                e[j] = 1.0;
                pinv.set_column(j, &apply_pinv(&a, &e, PinvBackend::Svd).unwrap());
            }
            let right = a.matmul(&pinv);
            assert!(right.max_abs_diff(&DenseMatrix::identity(m)) <= 1e-10);
            let mut p = DenseMatrix::identity(n);
            let pa = pinv.matmul(&a);
            for i in 0..n {
                for j in 0..n {
                    p[(i, j)] -= pa[(i, j)];
                }
            }
            assert!(p.matmul(&p).max_abs_diff(&p) <= 1e-10);
            assert!(a.matmul(&p).max_abs() <= 1e-10 * a.max_abs());
        }
    }

    #[test]
    fn condition_numbers() {
        assert_eq!(cond_2(&DenseMatrix::identity(4)), 1.0);
        assert!((cond_2(&DenseMatrix::diag(&[10.0, 1.0])) - 10.0).abs() < 1e-14);
        let row = DenseMatrix::from_rows(&[vec![0.3, -2.0, 7.0]]).unwrap();
        assert_eq!(cond_2(&row), 1.0);
        assert_eq!(cond_2(&DenseMatrix::diag(&[1.0, 0.0])), f64::INFINITY);
        // Gram matrix squares the condition number.
        let a = DenseMatrix::from_rows(&[vec![1.0, 0.0, 0.0], vec![0.0, 1e-3, 0.0]]).unwrap();
        let ka = cond_2(&a);
        let kb = cond_2(&a.gram_rows());
        assert!((kb / (ka * ka) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn inverse_sym_matches_identity() {
        let b = DenseMatrix::from_rows(&[vec![4.0, 1.0, 0.5], vec![1.0, 3.0, 0.2], vec![0.5, 0.2, 2.0]])
            .unwrap();
        let inv = inverse_sym(&b).unwrap();
        assert!(b.matmul(&inv).max_abs_diff(&DenseMatrix::identity(3)) < 1e-14);
    }
}
