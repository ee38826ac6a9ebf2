/// Desk-scale stand-in for memory traffic.
///
/// * `trailing_passes`: full reads of the trailing matrix (one per
///   matrix-vector sweep, one per matrix-matrix product with it, one per
///   fresh sample of it).
/// * `blas2_volume`: elements of the trailing matrix touched by
///   matrix-vector work.
/// * `blas3_volume`: multiply-adds of matrix-matrix products with an
///   `m`-row operand (the matrix, its trailing part, or its reflectors),
///   including forming a sample `Ω·A`. Products confined to the small
///   sample space are not counted.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CommCounters {
    pub trailing_passes: u64,
    pub blas2_volume: u64,
    pub blas3_volume: u64,
}

impl CommCounters {
    pub(crate) fn pass(&mut self) {
        self.trailing_passes += 1;
    }

    pub(crate) fn blas2(&mut self, rows: usize, cols: usize) {
        self.blas2_volume += (rows * cols) as u64;
    }

    pub(crate) fn blas3(&mut self, m: usize, n: usize, k: usize) {
        self.blas3_volume += (m * n * k) as u64;
    }
}
