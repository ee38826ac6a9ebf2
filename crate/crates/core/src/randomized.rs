//! Randomized column-pivoted QR: pivots for a whole block are chosen from a
//! small Gaussian sample of the trailing matrix, so the matrix itself is only
//! touched by matrix-matrix products.

mod rqrcp;
mod trqrcp;
mod tuxv;

pub use rqrcp::{rqrcp, rsrqrcp, ssrqrcp};
pub use trqrcp::{trqrcp, trqrcp_unchecked, TruncatedFactorization};
pub use tuxv::{tuxv, TuxvOptions, TuxvResult};

/// Pivoting stops once the largest trailing sample norm falls to this
/// fraction of the largest initial sample norm.
pub const SAMPLE_NOISE_FLOOR: f64 = 1.0 / (1u64 << 48) as f64;

fn max_col_norm(m: &crate::DenseMatrix) -> f64 {
    (0..m.cols())
        .map(|c| crate::matrix::norm2(m.col(c)))
        .fold(0.0, f64::max)
}

fn check_truncation(a: &crate::DenseMatrix, k: usize) -> crate::Result<()> {
    let lim = a.rows().min(a.cols());
    if k > lim {
        return Err(crate::Error::InvalidArgument(format!(
            "rank {k} exceeds min dimension {lim}"
        )));
    }
    Ok(())
}
