//! Randomized column-pivoted QR and low-rank approximation.
//!
//! The randomized algorithms choose each block of pivots from a small
//! Gaussian sample `Ω·A` instead of from the column norms of the trailing
//! matrix, which removes the per-column matrix-vector sweeps of greedy
//! pivoting. [`pivot`] holds the deterministic references.

mod error;

pub mod counters;
pub mod householder;
pub mod matrix;
pub mod permutation;
pub mod pivot;
pub mod randomized;
pub mod sketch;
pub mod svd;
pub mod synth;

pub use counters::CommCounters;
pub use error::{Error, Result};
pub use householder::ReflectorBlock;
pub use matrix::{DenseMatrix, ULP};
pub use permutation::PermutationVector;
pub use pivot::{qr_blocked, qr_presorted, qrcp_blas2, qrcp_blocked, PivotedFactorization};
pub use randomized::{
    rqrcp, rsrqrcp, ssrqrcp, trqrcp, trqrcp_unchecked, tuxv, TruncatedFactorization, TuxvOptions,
    TuxvResult,
};
pub use sketch::{giid, scaling_cdf, scaling_pdf, SketchConfig};
pub use svd::{jacobi_svd, Svd};
