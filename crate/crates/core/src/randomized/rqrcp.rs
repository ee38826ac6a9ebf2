use crate::counters::CommCounters;
use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::permutation::{permute_tail_cols, PermutationVector};
use crate::pivot::{factor_and_update, qrcp_blocked, PivotedFactorization};
use crate::sketch::{
    giid, giid_stream, sample_build_counted, sample_qrcp_with_floor, sample_update, SketchConfig,
};

use super::{check_truncation, max_col_norm, SAMPLE_NOISE_FLOOR};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Refresh {
    /// Reuse the block factors to update the sample.
    Update,
    /// Draw a fresh compression matrix for every trailing matrix.
    Resample,
}

/// Single-sample randomized QRCP: all `k` pivots come from one sample of
/// rank `k + p`, then the selected columns are factored and the remaining
/// columns of the first `k` rows of `R` are finished.
pub fn ssrqrcp(a: &DenseMatrix, k: usize, p: usize, seed: u64) -> Result<PivotedFactorization> {
    let cfg = SketchConfig::new(k.max(1), p, seed);
    factor(a, k, &cfg, Refresh::Update)
}

/// Randomized QRCP with the sample update between blocks.
pub fn rqrcp(a: &DenseMatrix, k: usize, cfg: &SketchConfig) -> Result<PivotedFactorization> {
    factor(a, k, cfg, Refresh::Update)
}

/// Randomized QRCP that samples every trailing matrix afresh (block `J`
/// uses stream `J` of the seed).
pub fn rsrqrcp(a: &DenseMatrix, k: usize, cfg: &SketchConfig) -> Result<PivotedFactorization> {
    factor(a, k, cfg, Refresh::Resample)
}

fn factor(
    a: &DenseMatrix,
    k: usize,
    cfg: &SketchConfig,
    refresh: Refresh,
) -> Result<PivotedFactorization> {
    check_truncation(a, k)?;
    cfg.validate(k)?;
    let (m, n) = a.shape();
    if k == 0 {
        return Ok(PivotedFactorization {
            blocks: Vec::new(),
            r: DenseMatrix::zeros(0, n),
            perm: PermutationVector::identity(n),
            achieved_rank: 0,
            counters: CommCounters::default(),
        });
    }
    let l = cfg.sample_rank();
    if l >= m {
        // A sample this tall cannot compress anything.
        return qrcp_blocked(a, k, cfg.block_size.min(k));
    }

    let mut counters = CommCounters::default();
    let omega = giid(l, m, cfg.seed);
    let mut sample = sample_build_counted(&omega, a, &mut counters)?;
    let floor = SAMPLE_NOISE_FLOOR * max_col_norm(&sample);

    let mut work = a.clone();
    let mut perm = PermutationVector::identity(n);
    let mut blocks = Vec::new();
    let mut i = 0;
    let mut stream = 1;
    while i < k {
        let nb = cfg.block_size.min(k - i);
        let state = sample_qrcp_with_floor(&sample, nb, floor)?;
        let got = state.achieved();
        if got == 0 {
            break;
        }
        permute_tail_cols(&mut work, i, &state.block_perm);
        perm.permute_tail(i, &state.block_perm);
        blocks.push(factor_and_update(&mut work, i, got, &mut counters)?);
        let start = i;
        i += got;
        if got < nb || i >= k {
            break;
        }

        sample = match refresh {
            Refresh::Update => {
                let r11 = work.submatrix(start, start, got, got).upper_trapezoid(got);
                let r12 = work.submatrix(start, i, got, n - i);
                match sample_update(&state, &r11, &r12) {
                    Ok(next) => next,
                    Err(Error::RankDeficient { .. }) => break,
                    Err(e) => return Err(e),
                }
            }
            Refresh::Resample => {
                let omega = giid_stream(l, m - i, cfg.seed, stream);
                stream += 1;
                let trailing = work.submatrix(i, i, m - i, n - i);
                sample_build_counted(&omega, &trailing, &mut counters)?
            }
        };
    }

    Ok(PivotedFactorization {
        blocks,
        r: work.upper_trapezoid(i),
        perm,
        achieved_rank: i,
        counters,
    })
}
