//! Small dense complex linear algebra: vectors, matrices, and the SLₙ(ℂ) wrapper.

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const DET_TOL: f64 = 1e-9;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn is_finite(z: C64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

#[derive(Clone, Debug, PartialEq)]
pub struct CVector(Vec<C64>);

impl CVector {
    pub fn new(entries: Vec<C64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::DimensionMismatch("vector of dimension 0".into()));
        }
        if !entries.iter().all(|z| is_finite(*z)) {
            return Err(Error::NonFinite("vector"));
        }
        Ok(CVector(entries))
    }

    pub fn from_reals(xs: &[f64]) -> Result<Self> {
        CVector::new(xs.iter().map(|&x| c(x, 0.0)).collect())
    }

    pub fn zeros(n: usize) -> Self {
        CVector(vec![C64::new(0.0, 0.0); n])
    }

    pub fn basis(n: usize, i: usize) -> Self {
        let mut v = CVector::zeros(n);
        v.0[i] = c(1.0, 0.0);
        v
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[C64] {
        &self.0
    }

    pub fn into_entries(self) -> Vec<C64> {
        self.0
    }

    pub fn get(&self, i: usize) -> C64 {
        self.0[i]
    }

    pub fn norm(&self) -> f64 {
        norm2(&self.0)
    }

    pub fn max_norm(&self) -> f64 {
        self.0.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// Hermitian inner product ⟨self, other⟩ = Σ conj(selfᵢ)·otherᵢ.
    pub fn hdot(&self, other: &CVector) -> C64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a.conj() * b).sum()
    }

    /// Bilinear pairing Σ selfᵢ·otherᵢ (used for separating scalars).
    pub fn dot(&self, other: &CVector) -> C64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn sub(&self, other: &CVector) -> CVector {
        CVector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn add(&self, other: &CVector) -> CVector {
        CVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn scale(&self, s: C64) -> CVector {
        CVector(self.0.iter().map(|a| a * s).collect())
    }

    pub fn max_dist(&self, other: &CVector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }
}

pub(crate) fn norm2(xs: &[C64]) -> f64 {
    let scale = xs.iter().fold(0.0f64, |m, z| m.max(z.re.abs()).max(z.im.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    let s: f64 = xs
        .iter()
        .map(|z| {
            let (a, b) = (z.re / scale, z.im / scale);
            a * a + b * b
        })
        .sum();
    scale * s.sqrt()
}

/// Dense row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix { rows, cols, data: vec![c(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = c(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let r = rows.len();
        if r == 0 {
            return Err(Error::DimensionMismatch("matrix with no rows".into()));
        }
        let cols = rows[0].len();
        if cols == 0 || rows.iter().any(|row| row.len() != cols) {
            return Err(Error::DimensionMismatch("ragged matrix rows".into()));
        }
        let data: Vec<C64> = rows.iter().flatten().copied().collect();
        if !data.iter().all(|z| is_finite(*z)) {
            return Err(Error::NonFinite("matrix"));
        }
        Ok(CMatrix { rows: r, cols, data })
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols || rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {}x{} matrix",
                data.len(),
                rows,
                cols
            )));
        }
        if !data.iter().all(|z| is_finite(*z)) {
            return Err(Error::NonFinite("matrix"));
        }
        Ok(CMatrix { rows, cols, data })
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<C64>> = rows.iter().map(|r| r.iter().map(|&x| c(x, 0.0)).collect()).collect();
        CMatrix::from_rows(&rows)
    }

    pub fn diag(entries: &[C64]) -> Self {
        let n = entries.len();
        let mut m = CMatrix::zeros(n, n);
        for (i, &z) in entries.iter().enumerate() {
            m.data[i * n + i] = z;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, z: C64) {
        self.data[i * self.cols + j] = z;
    }

    pub fn column(&self, j: usize) -> CVector {
        CVector((0..self.rows).map(|i| self.get(i, j)).collect())
    }

    pub fn row(&self, i: usize) -> CVector {
        CVector(self.data[i * self.cols..(i + 1) * self.cols].to_vec())
    }

    pub fn column_norm(&self, j: usize) -> f64 {
        let col: Vec<C64> = (0..self.rows).map(|i| self.get(i, j)).collect();
        norm2(&col)
    }

    pub fn mul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, other.rows, "matrix product shape");
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == c(0.0, 0.0) {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &CVector) -> CVector {
        assert_eq!(self.cols, v.dim(), "matrix-vector shape");
        CVector((0..self.rows).map(|i| (0..self.cols).map(|j| self.get(i, j) * v.get(j)).sum()).collect())
    }

    pub fn add(&self, other: &CMatrix) -> CMatrix {
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        CMatrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &CMatrix) -> CMatrix {
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        CMatrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, s: C64) -> CMatrix {
        CMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| a * s).collect() }
    }

    pub fn conj_transpose(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm2(&self.data)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn max_dist(&self, other: &CMatrix) -> f64 {
        self.data.iter().zip(&other.data).fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }

    fn one_norm(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self.get(i, j).norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// LU factorization with partial pivoting; returns (packed LU, permutation, sign).
    fn lu(&self) -> Option<(Vec<C64>, Vec<usize>, f64)> {
        let n = self.rows;
        let mut a = self.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        for k in 0..n {
            let (p, best) = (k..n)
                .map(|i| (i, a[i * n + k].norm()))
                .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if best == 0.0 {
                return None;
            }
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let pivot = a[k * n + k];
            for i in k + 1..n {
                let f = a[i * n + k] / pivot;
                a[i * n + k] = f;
                for j in k + 1..n {
                    let t = a[k * n + j];
                    a[i * n + j] -= f * t;
                }
            }
        }
        Some((a, perm, sign))
    }

    pub fn det(&self) -> C64 {
        assert_eq!(self.rows, self.cols, "det of non-square matrix");
        match self.rows {
            1 => self.data[0],
            2 => self.data[0] * self.data[3] - self.data[1] * self.data[2],
            n => match self.lu() {
                None => c(0.0, 0.0),
                Some((a, _, sign)) => (0..n).fold(c(sign, 0.0), |acc, i| acc * a[i * n + i]),
            },
        }
    }

    pub fn inverse(&self) -> Result<CMatrix> {
        self.solve(&CMatrix::identity(self.rows))
    }

    /// X with self·X = rhs, by LU with partial pivoting.
    pub fn solve(&self, rhs: &CMatrix) -> Result<CMatrix> {
        let n = self.rows;
        if n != self.cols || rhs.rows != n {
            return Err(Error::DimensionMismatch("solve needs a square system".into()));
        }
        let (a, perm, _) = self.lu().ok_or(Error::Singular)?;
        let mut out = CMatrix::zeros(n, rhs.cols);
        for col in 0..rhs.cols {
            let mut x: Vec<C64> = (0..n).map(|i| rhs.get(perm[i], col)).collect();
            for i in 0..n {
                for k in 0..i {
                    let t = a[i * n + k] * x[k];
                    x[i] -= t;
                }
            }
            for i in (0..n).rev() {
                for k in i + 1..n {
                    let t = a[i * n + k] * x[k];
                    x[i] -= t;
                }
                x[i] /= a[i * n + i];
            }
            for i in 0..n {
                out.set(i, col, x[i]);
            }
        }
        if !out.data.iter().all(|z| is_finite(*z)) {
            return Err(Error::Singular);
        }
        Ok(out)
    }

    /// Matrix exponential by scaling and squaring with a Taylor core.
    pub fn exp(&self) -> CMatrix {
        let n = self.rows;
        let norm = self.one_norm();
        let s = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
        let x = self.scale(c(0.5f64.powi(s), 0.0));
        let mut term = CMatrix::identity(n);
        let mut sum = CMatrix::identity(n);
        for k in 1..=20 {
            term = term.mul(&x).scale(c(1.0 / k as f64, 0.0));
            sum = sum.add(&term);
        }
        for _ in 0..s {
            sum = sum.mul(&sum);
        }
        sum
    }

    /// Principal logarithm by inverse scaling and squaring (Denman–Beavers square roots).
    pub fn log(&self) -> Result<CMatrix> {
        let n = self.rows;
        let id = CMatrix::identity(n);
        let mut y = self.clone();
        let mut roots = 0;
        while y.sub(&id).one_norm() > 0.25 {
            if roots > 40 {
                return Err(Error::NonGenericLog("square-root iteration did not approach identity".into()));
            }
            y = sqrt_db(&y)?;
            roots += 1;
        }
        let e = y.sub(&id);
        let mut power = e.clone();
        let mut sum = e.clone();
        for k in 2..=80 {
            power = power.mul(&e);
            let sgn = if k % 2 == 0 { -1.0 } else { 1.0 };
            sum = sum.add(&power.scale(c(sgn / k as f64, 0.0)));
        }
        Ok(sum.scale(c(2f64.powi(roots), 0.0)))
    }

    /// Q factor with positive real R-diagonal (classical Gram–Schmidt, applied twice).
    pub fn qr_positive(&self) -> Result<(CMatrix, Vec<f64>)> {
        let (m, n) = (self.rows, self.cols);
        let mut q = CMatrix::zeros(m, n);
        let mut rdiag = Vec::with_capacity(n);
        for j in 0..n {
            let mut v: Vec<C64> = (0..m).map(|i| self.get(i, j)).collect();
            for _ in 0..2 {
                for p in 0..j {
                    let r: C64 = (0..m).map(|i| q.get(i, p).conj() * v[i]).sum();
                    for i in 0..m {
                        v[i] -= r * q.get(i, p);
                    }
                }
            }
            let nv = norm2(&v);
            if nv == 0.0 {
                return Err(Error::Singular);
            }
            for i in 0..m {
                q.set(i, j, v[i] / nv);
            }
            rdiag.push(nv);
        }
        Ok((q, rdiag))
    }
}

fn sqrt_db(a: &CMatrix) -> Result<CMatrix> {
    let n = a.rows;
    let mut y = a.clone();
    let mut z = CMatrix::identity(n);
    for _ in 0..100 {
        let yi = y.inverse().map_err(|_| Error::NonGenericLog("singular square-root iterate".into()))?;
        let zi = z.inverse().map_err(|_| Error::NonGenericLog("singular square-root iterate".into()))?;
        let y1 = y.add(&zi).scale(c(0.5, 0.0));
        let z1 = z.add(&yi).scale(c(0.5, 0.0));
        let delta = y1.sub(&y).one_norm();
        y = y1;
        z = z1;
        if delta <= 1e-15 * y.one_norm() {
            return Ok(y);
        }
    }
    Err(Error::NonGenericLog("square-root iteration did not converge".into()))
}

/// Rounding scale for the determinant: the permanent of |A| (Ryser), or a row-sum bound for large n.
pub fn det_scale(m: &CMatrix) -> f64 {
    let n = m.rows;
    if n > 12 {
        return (0..n).map(|i| (0..n).map(|j| m.get(i, j).norm()).sum::<f64>()).product();
    }
    let abs: Vec<f64> = m.data.iter().map(|z| z.norm()).collect();
    let mut total = 0.0;
    for mask in 1u32..(1u32 << n) {
        let mut prod = 1.0;
        for i in 0..n {
            let s: f64 = (0..n).filter(|j| mask & (1 << j) != 0).map(|j| abs[i * n + j]).sum();
            prod *= s;
        }
        let sign = if (n - mask.count_ones() as usize) % 2 == 0 { 1.0 } else { -1.0 };
        total += sign * prod;
    }
    total.abs()
}

/// An element of SLₙ(ℂ): determinant one up to `DET_TOL` relative to the rounding scale.
#[derive(Clone, Debug, PartialEq)]
pub struct SLMatrix(CMatrix);

impl SLMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        SLMatrix::with_tol(m, DET_TOL)
    }

    pub fn with_tol(m: CMatrix, det_tol: f64) -> Result<Self> {
        if m.rows != m.cols {
            return Err(Error::DimensionMismatch("SL matrix must be square".into()));
        }
        if m.rows < 2 {
            return Err(Error::DimensionMismatch("SL matrix needs n >= 2".into()));
        }
        let drift = (m.det() - c(1.0, 0.0)).norm();
        if !(drift <= det_tol * det_scale(&m).max(1.0)) {
            return Err(Error::NotSpecialLinear { drift });
        }
        Ok(SLMatrix(m))
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        SLMatrix::new(CMatrix::from_rows(rows)?)
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        SLMatrix::new(CMatrix::from_real_rows(rows)?)
    }

    pub fn identity(n: usize) -> Self {
        SLMatrix(CMatrix::identity(n))
    }

    /// 2×2 matrix [[a, c], [b, d]] given by first column (a, b) and second column (c, d).
    pub fn sl2(a: C64, b: C64, cc: C64, d: C64) -> Result<Self> {
        SLMatrix::from_rows(&[vec![a, cc], vec![b, d]])
    }

    pub fn n(&self) -> usize {
        self.0.rows
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0.get(i, j)
    }

    pub fn column(&self, j: usize) -> CVector {
        self.0.column(j)
    }

    pub fn first_column(&self) -> CVector {
        self.0.column(0)
    }

    pub fn mul(&self, other: &SLMatrix) -> SLMatrix {
        SLMatrix(self.0.mul(&other.0))
    }

    pub fn inverse(&self) -> SLMatrix {
        if self.n() == 2 {
            let m = &self.0;
            let rows = [vec![m.get(1, 1), -m.get(0, 1)], vec![-m.get(1, 0), m.get(0, 0)]];
            return SLMatrix(CMatrix::from_rows(&rows).expect("finite 2x2"));
        }
        SLMatrix(self.0.inverse().expect("SL matrix is invertible"))
    }

    pub fn det_drift(&self) -> f64 {
        (self.0.det() - c(1.0, 0.0)).norm()
    }

    pub fn max_column_norm(&self) -> f64 {
        (0..self.n()).map(|j| self.0.column_norm(j)).fold(0.0, f64::max)
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        let n = self.n();
        (0..n).all(|i| (0..n).all(|j| i == j || self.get(i, j).norm() <= tol))
    }
}

// Serialized as rows of [re, im] pairs; SL matrices are re-validated on input.
impl Serialize for CMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<&[C64]> = self.data.chunks(self.cols.max(1)).collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for CMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<C64>>::deserialize(d)?;
        CMatrix::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

impl Serialize for SLMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de> Deserialize<'de> for SLMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        SLMatrix::new(CMatrix::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

impl Serialize for CVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de> Deserialize<'de> for CVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        CVector::new(Vec::<C64>::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}
