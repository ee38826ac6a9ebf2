use crate::counters::CommCounters;
use crate::error::{ensure_dims, Error, Result};
use crate::householder::ReflectorBlock;
use crate::matrix::{gemm, solve_upper_in_place, DenseMatrix, ULP};
use crate::permutation::PermutationVector;
use crate::pivot::qrcp_packed;

/// Block size `b`, padding `p` and seed of a sketch; the sample has
/// `ℓ = b + p` rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SketchConfig {
    pub block_size: usize,
    pub padding: usize,
    pub seed: u64,
}

impl Default for SketchConfig {
    fn default() -> Self {
        Self {
            block_size: 32,
            padding: 8,
            seed: 0,
        }
    }
}

impl SketchConfig {
    pub fn new(block_size: usize, padding: usize, seed: u64) -> Self {
        Self {
            block_size,
            padding,
            seed,
        }
    }

    pub fn sample_rank(&self) -> usize {
        self.block_size + self.padding
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    /// Checks `b ≥ 1`, and that zero padding is only used when a single
    /// block covers the whole rank `k`.
    pub fn validate(&self, k: usize) -> Result<()> {
        if self.block_size == 0 {
            return Err(Error::InvalidArgument(
                "block size must be at least 1".into(),
            ));
        }
        if self.padding == 0 && k > self.block_size {
            return Err(Error::InvalidArgument(format!(
                "zero padding needs a single block, but rank {k} exceeds block size {}",
                self.block_size
            )));
        }
        Ok(())
    }
}

/// `B = Ω·A`.
pub fn sample_build(omega: &DenseMatrix, a: &DenseMatrix) -> Result<DenseMatrix> {
    sample_build_counted(omega, a, &mut CommCounters::default())
}

pub(crate) fn sample_build_counted(
    omega: &DenseMatrix,
    a: &DenseMatrix,
    counters: &mut CommCounters,
) -> Result<DenseMatrix> {
    ensure_dims!(
        omega.cols() == a.rows(),
        "compression {:?} cannot sample a {:?} matrix",
        omega.shape(),
        a.shape()
    );
    counters.pass();
    counters.blas3(omega.rows(), a.cols(), a.rows());
    omega.matmul(a)
}

/// Partial QRCP of a sample: `B·P = U·[S11 S12; 0 S22]`.
#[derive(Debug, Clone)]
pub struct SampleState {
    /// `j × j` upper triangle, `j` the number of pivots taken.
    pub s11: DenseMatrix,
    /// `j × (n − j)`.
    pub s12: DenseMatrix,
    /// `(ℓ − j) × (n − j)`: the sample of the trailing matrix.
    pub s22: DenseMatrix,
    /// Column permutation of the sample (and of the trailing matrix it
    /// samples); the first `j` entries are the pivots.
    pub block_perm: PermutationVector,
    /// The orthogonal factor `U` over the `ℓ` sample rows.
    pub u: ReflectorBlock,
}

impl SampleState {
    pub fn pivots(&self) -> &[usize] {
        &self.block_perm.as_slice()[..self.s11.rows()]
    }

    pub fn achieved(&self) -> usize {
        self.s11.rows()
    }
}

/// Greedy QRCP on the sample, halted after `b` pivots. Pivoting stops early
/// once the largest trailing sample norm is `≤ 2^-52·‖B‖_F`; the number of
/// pivots actually taken is [`SampleState::achieved`].
pub fn sample_qrcp(sample: &DenseMatrix, b: usize) -> Result<SampleState> {
    let floor = ULP * sample.frob_norm();
    sample_qrcp_with_floor(sample, b, floor)
}

pub(crate) fn sample_qrcp_with_floor(
    sample: &DenseMatrix,
    b: usize,
    floor: f64,
) -> Result<SampleState> {
    let (l, n) = sample.shape();
    if b > l.min(n) {
        return Err(Error::InvalidArgument(format!(
            "{b} pivots requested from a {l}x{n} sample"
        )));
    }
    let mut work = sample.clone();
    // Sample-space work is not trailing-matrix traffic, so it goes uncounted.
    let packed = qrcp_packed(&mut work, b, floor, &mut CommCounters::default());
    let j = packed.rank;
    let u = if j > 0 {
        ReflectorBlock::from_packed(&work, 0, j, packed.tau)?
    } else {
        ReflectorBlock::empty(l)
    };
    Ok(SampleState {
        s11: work.submatrix(0, 0, j, j).upper_trapezoid(j),
        s12: work.submatrix(0, j, j, n - j),
        s22: work.submatrix(j, j, l - j, n - j),
        block_perm: packed.perm,
        u,
    })
}

/// Sample of the next trailing matrix without touching `Ω` or `A`:
/// `B_next = [S12 − S11·R11⁻¹·R12; S22]`, with `R11⁻¹·R12` by back
/// substitution.
///
/// Fails with [`Error::RankDeficient`] if some `|R11(i,i)| ≤ 2^-52·|R11(0,0)|`.
pub fn sample_update(
    state: &SampleState,
    r11: &DenseMatrix,
    r12: &DenseMatrix,
) -> Result<DenseMatrix> {
    let j = state.achieved();
    ensure_dims!(
        r11.shape() == (j, j) && r12.rows() == j && r12.cols() == state.s12.cols(),
        "R11 {:?} and R12 {:?} do not match a sample with {} pivots and {} trailing columns",
        r11.shape(),
        r12.shape(),
        j,
        state.s12.cols()
    );
    if j > 0 {
        let lead = r11[(0, 0)].abs();
        if let Some(i) = (0..j).find(|&i| r11[(i, i)].is_nan() || r11[(i, i)].abs() <= ULP * lead) {
            return Err(Error::RankDeficient { rank: i });
        }
    }
    let nt = r12.cols();
    let l = j + state.s22.rows();
    let mut x = r12.clone();
    solve_upper_in_place(r11, &mut x)?;
    let mut b1 = state.s12.clone();
    gemm(-1.0, state.s11.view(), x.view(), 1.0, b1.view_mut());
    let mut next = DenseMatrix::zeros(l, nt);
    next.set_submatrix(0, 0, &b1);
    next.set_submatrix(j, 0, &state.s22);
    Ok(next)
}
