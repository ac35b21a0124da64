//! Dense matrix primitives.
//!
//! [`DenseMatrix`] is a row-major `f64` matrix used for every weight, data
//! and noise matrix in the crate. Products, SVD and QR are delegated to
//! `faer`; the rank-raising perturbation ([`rank_bump`]) and the matrix
//! cosine are built on top of the thin SVD.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use faer::linalg::matmul::matmul;
use faer::{Accum, MatMut, MatRef, Par};

use crate::error::{Error, Result};

/// Row-major dense matrix of finite `f64` entries.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows.min(8) {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            let shown: Vec<String> = row.iter().take(8).map(|x| format!("{x:.6}")).collect();
            let tail = if self.cols > 8 { ", ..." } else { "" };
            writeln!(f, "  [{}{}]", shown.join(", "), tail)?;
        }
        if self.rows > 8 {
            writeln!(f, "  ...")?;
        }
        write!(f, "]")
    }
}

impl DenseMatrix {
    /// Builds a matrix from row-major storage, rejecting empty shapes and
    /// non-finite entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid(format!("empty shape {rows}x{cols}")));
        }
        if data.len() != rows * cols {
            return Err(Error::invalid(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("non-finite matrix entry"));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from a slice of equally long rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        if rows.iter().any(|r| r.as_ref().len() != cols) {
            return Err(Error::invalid("ragged rows"));
        }
        let data = rows
            .iter()
            .flat_map(|r| r.as_ref().iter().copied())
            .collect();
        Self::from_vec(rows.len(), cols, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "empty shape {rows}x{cols}");
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diag(n, n, &vec![1.0; n])
    }

    /// Rectangular matrix with `diag` on its main diagonal.
    pub fn from_diag(rows: usize, cols: usize, diag: &[f64]) -> Self {
        assert!(diag.len() <= rows.min(cols));
        let mut m = Self::zeros(rows, cols);
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * cols + i] = d;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(rows > 0 && cols > 0, "empty shape {rows}x{cols}");
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j] = value;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0.0)
    }

    pub fn transpose(&self) -> Self {
        let mut out = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                out.push(self.data[i * self.cols + j]);
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            data: out,
        }
    }

    /// Matrix product `self · rhs`. Panics on an inner-dimension mismatch.
    pub fn matmul(&self, rhs: &DenseMatrix) -> DenseMatrix {
        assert_eq!(
            self.cols, rhs.rows,
            "matmul shape mismatch: {}x{} · {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        let mut out = vec![0.0; self.rows * rhs.cols];
        {
            let dst = MatMut::from_row_major_slice_mut(&mut out, self.rows, rhs.cols);
            matmul(dst, Accum::Replace, self.view(), rhs.view(), 1.0, Par::Seq);
        }
        DenseMatrix {
            rows: self.rows,
            cols: rhs.cols,
            data: out,
        }
    }

    /// `selfᵀ · rhs` without materialising the transpose.
    pub fn t_matmul(&self, rhs: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.rows, rhs.rows, "t_matmul shape mismatch");
        let mut out = vec![0.0; self.cols * rhs.cols];
        {
            let dst = MatMut::from_row_major_slice_mut(&mut out, self.cols, rhs.cols);
            matmul(
                dst,
                Accum::Replace,
                self.view().transpose(),
                rhs.view(),
                1.0,
                Par::Seq,
            );
        }
        DenseMatrix {
            rows: self.cols,
            cols: rhs.cols,
            data: out,
        }
    }

    /// `self · rhsᵀ` without materialising the transpose.
    pub fn matmul_t(&self, rhs: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, rhs.cols, "matmul_t shape mismatch");
        let mut out = vec![0.0; self.rows * rhs.rows];
        {
            let dst = MatMut::from_row_major_slice_mut(&mut out, self.rows, rhs.rows);
            matmul(
                dst,
                Accum::Replace,
                self.view(),
                rhs.view().transpose(),
                1.0,
                Par::Seq,
            );
        }
        DenseMatrix {
            rows: self.rows,
            cols: rhs.rows,
            data: out,
        }
    }

    pub fn hadamard(&self, rhs: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.shape(), rhs.shape(), "hadamard shape mismatch");
        self.zip_map(rhs, |a, b| a * b)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> DenseMatrix {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn zip_map(&self, rhs: &DenseMatrix, f: impl Fn(f64, f64) -> f64) -> DenseMatrix {
        assert_eq!(self.shape(), rhs.shape());
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// `self += alpha · rhs`
    pub fn axpy(&mut self, alpha: f64, rhs: &DenseMatrix) {
        assert_eq!(self.shape(), rhs.shape(), "axpy shape mismatch");
        for (a, &b) in self.data.iter_mut().zip(&rhs.data) {
            *a += alpha * b;
        }
    }

    pub fn scale(&self, alpha: f64) -> DenseMatrix {
        self.map(|x| alpha * x)
    }

    /// `trace(selfᵀ · rhs)`, the Frobenius inner product.
    pub fn inner(&self, rhs: &DenseMatrix) -> f64 {
        assert_eq!(self.shape(), rhs.shape(), "inner shape mismatch");
        self.data.iter().zip(&rhs.data).map(|(a, b)| a * b).sum()
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.frobenius_norm_sq().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Largest singular value.
    pub fn spectral_norm(&self) -> Result<f64> {
        Ok(singular_values(self)?.first().copied().unwrap_or(0.0))
    }

    /// Keeps the listed columns, in order.
    pub fn select_columns(&self, cols: &[usize]) -> DenseMatrix {
        assert!(!cols.is_empty());
        DenseMatrix::from_fn(self.rows, cols.len(), |i, j| self.get(i, cols[j]))
    }

    pub(crate) fn view(&self) -> MatRef<'_, f64> {
        MatRef::from_row_major_slice(&self.data, self.rows, self.cols)
    }

    pub(crate) fn from_faer(m: MatRef<'_, f64>) -> DenseMatrix {
        DenseMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }
}

impl Add for &DenseMatrix {
    type Output = DenseMatrix;
    fn add(self, rhs: &DenseMatrix) -> DenseMatrix {
        self.zip_map(rhs, |a, b| a + b)
    }
}

impl Sub for &DenseMatrix {
    type Output = DenseMatrix;
    fn sub(self, rhs: &DenseMatrix) -> DenseMatrix {
        self.zip_map(rhs, |a, b| a - b)
    }
}

impl Mul for &DenseMatrix {
    type Output = DenseMatrix;
    fn mul(self, rhs: &DenseMatrix) -> DenseMatrix {
        self.matmul(rhs)
    }
}

/// Relative threshold used to turn a spectrum into an integer rank.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RankTolerance(f64);

impl RankTolerance {
    pub const DEFAULT: RankTolerance = RankTolerance(1e-9);

    pub fn new(relative_threshold: f64) -> Result<Self> {
        if relative_threshold > 0.0 && relative_threshold < 1.0 {
            Ok(Self(relative_threshold))
        } else {
            Err(Error::invalid(format!(
                "rank tolerance must lie in (0, 1), got {relative_threshold}"
            )))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl Default for RankTolerance {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// Thin SVD `A = U·diag(σ)·Vᵀ` with `U: m×p`, `V: n×p`, `p = min(m, n)`.
#[derive(Clone, Debug)]
pub struct SvdFactors {
    pub u: DenseMatrix,
    pub singular_values: Vec<f64>,
    pub v: DenseMatrix,
}

impl SvdFactors {
    /// `U·diag(s)·Vᵀ` for an arbitrary replacement spectrum `s`.
    pub fn compose(&self, s: &[f64]) -> DenseMatrix {
        assert_eq!(s.len(), self.singular_values.len());
        let p = s.len();
        let mut us = self.u.clone();
        for i in 0..us.rows() {
            for (k, &sk) in s.iter().enumerate().take(p) {
                let x = us.get(i, k);
                us.set(i, k, x * sk);
            }
        }
        us.matmul_t(&self.v)
    }

    pub fn reconstruct(&self) -> DenseMatrix {
        self.compose(&self.singular_values)
    }
}

fn ensure_finite(a: &DenseMatrix) -> Result<()> {
    if a.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid("non-finite matrix entry"))
    }
}

pub fn svd(a: &DenseMatrix) -> Result<SvdFactors> {
    ensure_finite(a)?;
    let dec = a.view().thin_svd().map_err(|_| Error::SvdFailed)?;
    let s = dec.S().column_vector();
    let singular_values = (0..s.nrows()).map(|i| s[i].max(0.0)).collect();
    Ok(SvdFactors {
        u: DenseMatrix::from_faer(dec.U()),
        singular_values,
        v: DenseMatrix::from_faer(dec.V()),
    })
}

/// Singular values only, descending.
pub fn singular_values(a: &DenseMatrix) -> Result<Vec<f64>> {
    ensure_finite(a)?;
    let mut s = a.view().singular_values().map_err(|_| Error::SvdFailed)?;
    for x in &mut s {
        *x = x.max(0.0);
    }
    Ok(s)
}

/// Number of singular values strictly above `tol · σ₁`.
pub fn rank_from_spectrum(sigma: &[f64], tol: RankTolerance) -> usize {
    match sigma.first() {
        Some(&s1) if s1 > 0.0 => {
            let cut = tol.value() * s1;
            sigma.iter().filter(|&&s| s > cut).count()
        }
        _ => 0,
    }
}

pub fn numerical_rank(a: &DenseMatrix, tol: RankTolerance) -> Result<usize> {
    Ok(rank_from_spectrum(&singular_values(a)?, tol))
}

/// Raises the rank of a rank-deficient matrix by exactly one.
///
/// With `A = U·Σ·Vᵀ` of numerical rank `r`, returns `U·Σ'·Vᵀ` where
/// `Σ' = diag(σ₁, …, σ_r, eps, 0, …, 0)`. The spectral distance to `A` is
/// `eps`. `eps` must sit below `σ_r` so the new spectrum stays sorted; for
/// the zero matrix it becomes the leading singular value.
pub fn rank_bump(a: &DenseMatrix, eps: f64) -> Result<DenseMatrix> {
    if eps.is_nan() || eps <= 0.0 || eps.is_infinite() {
        return Err(Error::invalid(format!("eps must be positive, got {eps}")));
    }
    let factors = svd(a)?;
    let sigma = &factors.singular_values;
    let r = rank_from_spectrum(sigma, RankTolerance::DEFAULT);
    if r == sigma.len() {
        return Err(Error::FullRank { rank: r });
    }
    if r > 0 && eps >= sigma[r - 1] {
        return Err(Error::PerturbationTooLarge {
            eps,
            sigma_r: sigma[r - 1],
        });
    }
    let mut bumped = vec![0.0; sigma.len()];
    bumped[..r].copy_from_slice(&sigma[..r]);
    bumped[r] = eps;
    Ok(factors.compose(&bumped))
}

/// `trace(AᵀB) / (‖A‖_F ‖B‖_F)`.
pub fn matrix_cosine(a: &DenseMatrix, b: &DenseMatrix) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::invalid(format!(
            "cosine of {:?} and {:?} matrices",
            a.shape(),
            b.shape()
        )));
    }
    let (na, nb) = (a.frobenius_norm(), b.frobenius_norm());
    if na == 0.0 || nb == 0.0 {
        return Err(Error::DegenerateInput("cosine with a zero matrix".into()));
    }
    Ok((a.inner(b) / (na * nb)).clamp(-1.0, 1.0))
}

/// Cosine between a matrix with retained spectrum `sigma` and its rank bump
/// by `eps`: `√(Σσ² / (Σσ² + ε²))`.
pub fn rank_bump_cosine(sigma: &[f64], eps: f64) -> f64 {
    let energy: f64 = sigma.iter().map(|s| s * s).sum();
    (energy / (energy + eps * eps)).sqrt()
}

/// `‖a − b‖_F / max(‖a‖_F, ‖b‖_F)`, zero when both are zero.
pub fn relative_error(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    let scale = a.frobenius_norm().max(b.frobenius_norm());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).frobenius_norm() / scale
    }
}

/// Orthonormal basis (as columns) of the row space of a full-row-rank
/// matrix `X` (`d×m`, `d ≤ m`), from the thin QR of `Xᵀ`.
pub fn row_space_basis(x: &DenseMatrix) -> Result<DenseMatrix> {
    ensure_finite(x)?;
    if x.rows() > x.cols() {
        return Err(Error::invalid("row space basis needs rows <= cols"));
    }
    let q = x.view().transpose().qr().compute_thin_Q();
    Ok(DenseMatrix::from_faer(q.as_ref()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
        DenseMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
    }

    fn low_rank(n: usize, m: usize, r: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
        let mut a = DenseMatrix::zeros(n, m);
        for _ in 0..r {
            let u = random(n, 1, rng);
            let v = random(1, m, rng);
            a.axpy(1.0, &u.matmul(&v));
        }
        a
    }

    #[test]
    fn svd_identity_and_diagonal() {
        let s = svd(&DenseMatrix::identity(3)).unwrap();
        assert_eq!(s.singular_values, vec![1.0, 1.0, 1.0]);
        let d = DenseMatrix::from_rows(&[[3.0, 0.0], [0.0, 0.0]]).unwrap();
        let s = svd(&d).unwrap();
        assert!((s.singular_values[0] - 3.0).abs() < 1e-15);
        assert_eq!(s.singular_values[1], 0.0);
    }

    #[test]
    fn svd_reconstructs_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random(5, 4, &mut rng);
        let f = svd(&a).unwrap();
        let err = (&f.reconstruct() - &a).frobenius_norm() / a.frobenius_norm();
        assert!(err < 1e-8, "{err}");
        let utu = f.u.t_matmul(&f.u);
        assert!((&utu - &DenseMatrix::identity(4)).frobenius_norm() < 1e-10);
        let vtv = f.v.t_matmul(&f.v);
        assert!((&vtv - &DenseMatrix::identity(4)).frobenius_norm() < 1e-10);
        assert!(f.singular_values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn svd_rejects_non_finite() {
        let mut a = DenseMatrix::identity(2);
        a.set(0, 1, f64::NAN);
        assert!(matches!(svd(&a), Err(Error::InvalidInput(_))));
        assert!(matches!(
            numerical_rank(&a, RankTolerance::DEFAULT),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn numerical_rank_examples() {
        let tol = RankTolerance::default();
        assert_eq!(numerical_rank(&DenseMatrix::identity(3), tol).unwrap(), 3);
        let tiny = DenseMatrix::from_rows(&[[1.0, 0.0], [0.0, 1e-16]]).unwrap();
        assert_eq!(numerical_rank(&tiny, tol).unwrap(), 1);
        let d = DenseMatrix::from_rows(&[[3.0, 0.0], [0.0, 0.5]]).unwrap();
        assert_eq!(numerical_rank(&d, tol).unwrap(), 2);
        assert_eq!(numerical_rank(&DenseMatrix::zeros(3, 2), tol).unwrap(), 0);
    }

    #[test]
    fn tolerance_bounds() {
        assert!(RankTolerance::new(0.0).is_err());
        assert!(RankTolerance::new(1.0).is_err());
        assert_eq!(RankTolerance::new(1e-6).unwrap().value(), 1e-6);
    }

    #[test]
    fn rank_bump_diagonal() {
        let a = DenseMatrix::from_rows(&[[3.0, 0.0], [0.0, 0.0]]).unwrap();
        let b = rank_bump(&a, 0.5).unwrap();
        let s = singular_values(&b).unwrap();
        assert!((s[0] - 3.0).abs() < 1e-14 && (s[1] - 0.5).abs() < 1e-14);
        assert!(((&a - &b).spectral_norm().unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rank_bump_zero_matrix() {
        let b = rank_bump(&DenseMatrix::zeros(2, 3), 1.0).unwrap();
        let s = singular_values(&b).unwrap();
        assert!((s[0] - 1.0).abs() < 1e-14 && s[1].abs() < 1e-14);
        assert_eq!(numerical_rank(&b, RankTolerance::DEFAULT).unwrap(), 1);
    }

    #[test]
    fn rank_bump_random_rank_two() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = low_rank(4, 4, 2, &mut rng);
        assert_eq!(numerical_rank(&a, RankTolerance::DEFAULT).unwrap(), 2);
        let b = rank_bump(&a, 1e-3).unwrap();
        assert_eq!(numerical_rank(&b, RankTolerance::DEFAULT).unwrap(), 3);
        let dist = (&a - &b).spectral_norm().unwrap();
        assert!((dist - 1e-3).abs() < 1e-10, "{dist}");
    }

    #[test]
    fn rank_bump_errors() {
        let id = DenseMatrix::identity(3);
        assert!(matches!(
            rank_bump(&id, 0.1),
            Err(Error::FullRank { rank: 3 })
        ));
        let a = DenseMatrix::from_rows(&[[3.0, 0.0], [0.0, 0.0]]).unwrap();
        assert!(matches!(rank_bump(&a, 0.0), Err(Error::InvalidInput(_))));
        assert!(matches!(rank_bump(&a, -1.0), Err(Error::InvalidInput(_))));
        assert!(matches!(
            rank_bump(&a, 3.0),
            Err(Error::PerturbationTooLarge { .. })
        ));
    }

    #[test]
    fn cosine_examples() {
        let id = DenseMatrix::identity(2);
        assert!((matrix_cosine(&id, &id).unwrap() - 1.0).abs() < 1e-15);
        let a = DenseMatrix::from_rows(&[[1.0, 0.0], [0.0, 0.0]]).unwrap();
        let b = DenseMatrix::from_rows(&[[0.0, 0.0], [0.0, 1.0]]).unwrap();
        assert_eq!(matrix_cosine(&a, &b).unwrap(), 0.0);

        let a = DenseMatrix::from_rows(&[[3.0, 0.0], [0.0, 0.0]]).unwrap();
        let bumped = rank_bump(&a, 0.5).unwrap();
        let via_trace = matrix_cosine(&a, &bumped).unwrap();
        let closed = rank_bump_cosine(&[3.0], 0.5);
        let expected = 9.0 / (3.0 * 9.25f64.sqrt());
        assert!((via_trace - closed).abs() < 1e-12);
        assert!((closed - expected).abs() < 1e-15);
        assert!((expected - 0.986_394).abs() < 1e-6);
    }

    #[test]
    fn cosine_errors() {
        let z = DenseMatrix::zeros(2, 2);
        let id = DenseMatrix::identity(2);
        assert!(matches!(
            matrix_cosine(&z, &id),
            Err(Error::DegenerateInput(_))
        ));
        assert!(matches!(
            matrix_cosine(&id, &DenseMatrix::identity(3)),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn products_agree_with_transposed_forms() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random(4, 3, &mut rng);
        let b = random(4, 5, &mut rng);
        let c = random(6, 3, &mut rng);
        let tm = a.t_matmul(&b);
        assert!((&tm - &a.transpose().matmul(&b)).max_abs() < 1e-14);
        let mt = a.matmul_t(&c);
        assert!((&mt - &a.matmul(&c.transpose())).max_abs() < 1e-14);
    }

    #[test]
    fn from_vec_validation() {
        assert!(DenseMatrix::from_vec(0, 2, vec![]).is_err());
        assert!(DenseMatrix::from_vec(2, 2, vec![1.0; 3]).is_err());
        assert!(DenseMatrix::from_vec(1, 2, vec![1.0, f64::INFINITY]).is_err());
        assert!(DenseMatrix::from_rows(&[vec![1.0], vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn row_space_basis_projects() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x = random(3, 7, &mut rng);
        let q = row_space_basis(&x).unwrap();
        assert_eq!(q.shape(), (7, 3));
        // X projected onto its own row space is unchanged.
        let proj = x.matmul(&q).matmul_t(&q);
        assert!((&proj - &x).max_abs() < 1e-13);
    }
}
