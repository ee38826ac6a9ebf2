//! Synthetic test matrices.

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::pivot::qr_blocked;
pub use crate::sketch::giid;
use crate::sketch::giid_stream;

/// `rows × cols` matrix with orthonormal columns, the Q factor of a Gaussian
/// matrix drawn from `stream` of `seed`.
pub fn random_orthonormal(rows: usize, cols: usize, seed: u64, stream: u64) -> Result<DenseMatrix> {
    if cols > rows {
        return Err(Error::InvalidArgument(format!(
            "{cols} orthonormal columns do not fit in {rows} rows"
        )));
    }
    if cols == 0 {
        return Ok(DenseMatrix::zeros(rows, 0));
    }
    let g = giid_stream(rows, cols, seed, stream);
    Ok(qr_blocked(&g, cols, cols.min(32))?.q_thin(rows, cols))
}

/// `U·diag(ratio^i)·Vᵀ` with random orthonormal `U`, `V`: singular values
/// decay geometrically from 1.
pub fn decay(m: usize, n: usize, ratio: f64, seed: u64) -> DenseMatrix {
    let r = m.min(n);
    let u = random_orthonormal(m, r, seed, 0).expect("r <= m");
    let v = random_orthonormal(n, r, seed, 1).expect("r <= n");
    let us = DenseMatrix::from_fn(m, r, |i, j| u[(i, j)] * ratio.powi(j as i32));
    us.matmul(&v.transpose()).expect("conforming factors")
}

/// Singular values of [`decay`].
pub fn decay_spectrum(m: usize, n: usize, ratio: f64) -> Vec<f64> {
    (0..m.min(n)).map(|j| ratio.powi(j as i32)).collect()
}

/// Kahan's matrix `diag(s^i)·(I − c·strictly upper ones)` with
/// `s = sqrt(1 − c²)`. Every column has unit norm, so greedy pivoting sees
/// only ties, while the trailing singular value is far smaller than
/// `|R(n,n)|` suggests.
pub fn kahan(n: usize, c: f64) -> Result<DenseMatrix> {
    if !(0.0..1.0).contains(&c) {
        return Err(Error::InvalidArgument(format!(
            "kahan needs 0 <= c < 1, got {c}"
        )));
    }
    let s = (1.0 - c * c).sqrt();
    Ok(DenseMatrix::from_fn(n, n, |i, j| {
        let scale = s.powi(i as i32);
        match i.cmp(&j) {
            std::cmp::Ordering::Equal => scale,
            std::cmp::Ordering::Less => -c * scale,
            std::cmp::Ordering::Greater => 0.0,
        }
    }))
}
