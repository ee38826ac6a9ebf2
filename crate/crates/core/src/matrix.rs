//! Column-major dense storage and the handful of kernels the factorizations
//! are built from.
//!
//! Matrix-matrix products go through `matrixmultiply` (single threaded, so
//! results are bit-reproducible for a given shape). Everything else is plain
//! loops over contiguous columns.

use std::fmt;
use std::ops::{Index, IndexMut};

use crate::error::{ensure_dims, Error, Result};

/// Unit roundoff used by every tolerance in the crate: `2^-52`.
pub const ULP: f64 = f64::EPSILON;

/// `‖A‖_F · 2^-52`, the reference scale for residual tolerances.
pub fn ulp_scale(frob_norm: f64) -> f64 {
    frob_norm * ULP
}

/// A real `rows × cols` matrix stored column by column.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::eye(n, n)
    }

    /// Leading `cols` columns of the `rows × rows` identity.
    pub fn eye(rows: usize, cols: usize) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows.min(cols) {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Wraps column-major data, rejecting NaN or infinite entries.
    pub fn from_col_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        ensure_dims!(
            data.len() == rows * cols,
            "{} values supplied for a {rows}x{cols} matrix",
            data.len()
        );
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos % rows.max(1),
                col: pos / rows.max(1),
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Row-major convenience constructor for tests and small literals.
    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let m = rows.len();
        let n = rows.first().map_or(0, |r| r.len());
        Self::from_fn(m, n, |i, j| rows[i][j])
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
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

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0 || self.cols == 0
    }

    /// Column-major backing slice.
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
    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        (0..self.cols).map(|j| self[(i, j)]).collect()
    }

    pub fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let (lo, hi) = (a.min(b), a.max(b));
        let m = self.rows;
        let (left, right) = self.data.split_at_mut(hi * m);
        left[lo * m..(lo + 1) * m].swap_with_slice(&mut right[..m]);
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Copy of the `rows × cols` block starting at `(r0, c0)`.
    pub fn submatrix(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        assert!(r0 + rows <= self.rows && c0 + cols <= self.cols);
        Self::from_fn(rows, cols, |i, j| self[(r0 + i, c0 + j)])
    }

    /// Copies `block` into `self` with its top-left corner at `(r0, c0)`.
    pub fn set_submatrix(&mut self, r0: usize, c0: usize, block: &DenseMatrix) {
        assert!(r0 + block.rows <= self.rows && c0 + block.cols <= self.cols);
        for j in 0..block.cols {
            let dst = &mut self.col_mut(c0 + j)[r0..r0 + block.rows];
            dst.copy_from_slice(block.col(j));
        }
    }

    /// Upper trapezoid of the leading `rows` rows; entries below the diagonal
    /// are zeroed.
    pub fn upper_trapezoid(&self, rows: usize) -> Self {
        Self::from_fn(
            rows,
            self.cols,
            |i, j| if i <= j { self[(i, j)] } else { 0.0 },
        )
    }

    pub fn frob_norm(&self) -> f64 {
        norm2(&self.data)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scale(&mut self, alpha: f64) {
        self.data.iter_mut().for_each(|v| *v *= alpha);
    }

    /// `self - other`, elementwise.
    pub fn sub(&self, other: &DenseMatrix) -> Result<Self> {
        ensure_dims!(
            self.shape() == other.shape(),
            "{:?} minus {:?}",
            self.shape(),
            other.shape()
        );
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn matmul(&self, other: &DenseMatrix) -> Result<Self> {
        ensure_dims!(
            self.cols == other.rows,
            "cannot multiply {:?} by {:?}",
            self.shape(),
            other.shape()
        );
        let mut out = Self::zeros(self.rows, other.cols);
        gemm(1.0, self.view(), other.view(), 0.0, out.view_mut());
        Ok(out)
    }

    /// `selfᵀ · other`
    pub fn t_matmul(&self, other: &DenseMatrix) -> Result<Self> {
        ensure_dims!(
            self.rows == other.rows,
            "cannot multiply {:?}ᵀ by {:?}",
            self.shape(),
            other.shape()
        );
        let mut out = Self::zeros(self.cols, other.cols);
        gemm(1.0, self.view().t(), other.view(), 0.0, out.view_mut());
        Ok(out)
    }

    pub fn view(&self) -> MatRef<'_> {
        MatRef {
            data: &self.data,
            rows: self.rows,
            cols: self.cols,
            rs: 1,
            cs: self.rows,
        }
    }

    pub fn view_mut(&mut self) -> MatMut<'_> {
        MatMut {
            data: &mut self.data,
            rows: self.rows,
            cols: self.cols,
            cs: self.rows,
        }
    }

    /// Splits into mutable views of columns `..c` and `c..`.
    pub fn split_cols_mut(&mut self, c: usize) -> (MatMut<'_>, MatMut<'_>) {
        assert!(c <= self.cols);
        let m = self.rows;
        let (l, r) = self.data.split_at_mut(c * m);
        (
            MatMut {
                data: l,
                rows: m,
                cols: c,
                cs: m,
            },
            MatMut {
                data: r,
                rows: m,
                cols: self.cols - c,
                cs: m,
            },
        )
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i + j * self.rows]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i + j * self.rows]
    }
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows.min(12) {
            write!(f, " ")?;
            for j in 0..self.cols.min(8) {
                write!(f, " {:>12.5e}", self[(i, j)])?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Borrowed strided view; element `(i, j)` lives at `i*rs + j*cs`.
#[derive(Clone, Copy)]
pub struct MatRef<'a> {
    data: &'a [f64],
    rows: usize,
    cols: usize,
    rs: usize,
    cs: usize,
}

impl<'a> MatRef<'a> {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn t(self) -> Self {
        Self {
            data: self.data,
            rows: self.cols,
            cols: self.rows,
            rs: self.cs,
            cs: self.rs,
        }
    }

    pub fn sub(self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        assert!(r0 + rows <= self.rows && c0 + cols <= self.cols);
        let off = if rows == 0 || cols == 0 {
            0
        } else {
            r0 * self.rs + c0 * self.cs
        };
        Self {
            data: &self.data[off..],
            rows,
            cols,
            rs: self.rs,
            cs: self.cs,
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.rs + j * self.cs]
    }

    pub fn to_owned(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j))
    }
}

/// Mutable column-major view (unit row stride).
pub struct MatMut<'a> {
    data: &'a mut [f64],
    rows: usize,
    cols: usize,
    cs: usize,
}

impl<'a> MatMut<'a> {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn sub(self, r0: usize, c0: usize, rows: usize, cols: usize) -> MatMut<'a> {
        assert!(r0 + rows <= self.rows && c0 + cols <= self.cols);
        let off = if rows == 0 || cols == 0 {
            0
        } else {
            r0 + c0 * self.cs
        };
        MatMut {
            data: &mut self.data[off..],
            rows,
            cols,
            cs: self.cs,
        }
    }

    pub fn rb(&self) -> MatRef<'_> {
        MatRef {
            data: self.data,
            rows: self.rows,
            cols: self.cols,
            rs: 1,
            cs: self.cs,
        }
    }

    pub fn reborrow(&mut self) -> MatMut<'_> {
        MatMut {
            data: self.data,
            rows: self.rows,
            cols: self.cols,
            cs: self.cs,
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i + j * self.cs]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i + j * self.cs] = v;
    }

    /// Column `j` as a contiguous slice.
    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        let start = j * self.cs;
        &mut self.data[start..start + self.rows]
    }
}

/// `C ← α·A·B + β·C`. Transposition is expressed through the views.
pub fn gemm(alpha: f64, a: MatRef<'_>, b: MatRef<'_>, beta: f64, c: MatMut<'_>) {
    assert_eq!(a.cols, b.rows, "gemm inner dimension");
    assert_eq!(a.rows, c.rows, "gemm row dimension");
    assert_eq!(b.cols, c.cols, "gemm column dimension");
    let (m, k, n) = (a.rows, a.cols, b.cols);
    if m == 0 || n == 0 {
        return;
    }
    if k == 0 {
        let mut c = c;
        for j in 0..n {
            for v in c.col_mut(j) {
                *v = if beta == 0.0 { 0.0 } else { *v * beta };
            }
        }
        return;
    }
    // SAFETY: every view was bounds-checked on construction; `c` is an
    // exclusive borrow so it cannot alias `a` or `b`.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            alpha,
            a.data.as_ptr(),
            a.rs as isize,
            a.cs as isize,
            b.data.as_ptr(),
            b.rs as isize,
            b.cs as isize,
            beta,
            c.data.as_mut_ptr(),
            1,
            c.cs as isize,
        );
    }
}

/// Euclidean norm with rescaling when the plain sum of squares would
/// under- or overflow.
pub fn norm2(x: &[f64]) -> f64 {
    let ss: f64 = x.iter().map(|v| v * v).sum();
    if ss.is_finite() && ss > f64::MIN_POSITIVE / ULP {
        return ss.sqrt();
    }
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    let ss: f64 = x.iter().map(|v| (v / scale) * (v / scale)).sum();
    scale * ss.sqrt()
}

#[inline]
pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Solves `R·X = B` for upper-triangular `R` by back substitution, in place
/// on `b`.
pub fn solve_upper_in_place(r: &DenseMatrix, b: &mut DenseMatrix) -> Result<()> {
    let n = r.rows();
    ensure_dims!(
        r.cols() == n && b.rows() == n,
        "triangular solve with {:?} and right-hand side {:?}",
        r.shape(),
        b.shape()
    );
    for c in 0..b.cols() {
        let x = b.col_mut(c);
        for i in (0..n).rev() {
            let mut s = x[i];
            for (j, xj) in x.iter().enumerate().take(n).skip(i + 1) {
                s -= r[(i, j)] * xj;
            }
            x[i] = s / r[(i, i)];
        }
    }
    Ok(())
}
