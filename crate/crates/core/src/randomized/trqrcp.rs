use std::slice;

use crate::counters::CommCounters;
use crate::error::{Error, Result};
use crate::householder::{thin_q, wy_compose, ReflectorBlock};
use crate::matrix::{gemm, DenseMatrix};
use crate::permutation::{permute_tail_cols, PermutationVector};
use crate::pivot::{panel_qr, PivotedFactorization};
use crate::sketch::{
    giid, sample_build_counted, sample_qrcp_with_floor, sample_update, SketchConfig,
};

use super::{check_truncation, max_col_norm, SAMPLE_NOISE_FLOOR};

/// Rank-`k` truncated factorization `A·P ≈ Q(:, 1:r)·R` where the trailing
/// matrix was never formed. `Q = I − Y·T·Yᵀ` and `W = A·P`-side factor with
/// `Qᵀ·A·P = A·P − Y·Wᵀ` on the leading rows.
#[derive(Debug, Clone)]
pub struct TruncatedFactorization {
    /// All reflectors in one block, `m × r`.
    pub q: ReflectorBlock,
    /// `r × n`, columns in pivoted order.
    pub w_t: DenseMatrix,
    /// `r × n` upper trapezoid, columns in pivoted order.
    pub r: DenseMatrix,
    pub perm: PermutationVector,
    pub achieved_rank: usize,
    pub counters: CommCounters,
}

impl TruncatedFactorization {
    pub fn q_thin(&self, cols: usize) -> DenseMatrix {
        thin_q(slice::from_ref(&self.q), self.q.total_rows(), cols)
    }

    pub fn to_pivoted(&self) -> PivotedFactorization {
        PivotedFactorization {
            blocks: vec![self.q.clone()],
            r: self.r.clone(),
            perm: self.perm.clone(),
            achieved_rank: self.achieved_rank,
            counters: self.counters,
        }
    }

    /// `Q(:, 1:k)·R(1:k, :)·Pᵀ`.
    pub fn approximation(&self, k: usize) -> DenseMatrix {
        self.to_pivoted().approximation(self.q.total_rows(), k)
    }
}

/// Truncated randomized QRCP for `k ≤ min(m, n)/2`. Above that bound the
/// full randomized QRCP does less work; use [`trqrcp_unchecked`] to force it.
pub fn trqrcp(a: &DenseMatrix, k: usize, cfg: &SketchConfig) -> Result<TruncatedFactorization> {
    let lim = a.rows().min(a.cols()) / 2;
    if k > lim {
        return Err(Error::InvalidArgument(format!(
            "truncated rank {k} exceeds min(m, n)/2 = {lim}"
        )));
    }
    trqrcp_unchecked(a, k, cfg)
}

/// [`trqrcp`] without the `k ≤ min(m, n)/2` limit.
pub fn trqrcp_unchecked(
    a: &DenseMatrix,
    k: usize,
    cfg: &SketchConfig,
) -> Result<TruncatedFactorization> {
    check_truncation(a, k)?;
    cfg.validate(k)?;
    let (m, n) = a.shape();
    let mut counters = CommCounters::default();
    let mut perm = PermutationVector::identity(n);
    if k == 0 {
        return Ok(TruncatedFactorization {
            q: ReflectorBlock::empty(m),
            w_t: DenseMatrix::zeros(0, n),
            r: DenseMatrix::zeros(0, n),
            perm,
            achieved_rank: 0,
            counters,
        });
    }

    let l = cfg.sample_rank();
    let omega = if l >= m {
        DenseMatrix::identity(m)
    } else {
        giid(l, m, cfg.seed)
    };
    let mut sample = sample_build_counted(&omega, a, &mut counters)?;
    let floor = SAMPLE_NOISE_FLOOR * max_col_norm(&sample);

    // Column-permuted copy of A; never updated.
    let mut work = a.clone();
    let mut y = DenseMatrix::zeros(m, k);
    let mut t = DenseMatrix::zeros(0, 0);
    let mut tau = Vec::with_capacity(k);
    let mut wt = DenseMatrix::zeros(k, n);
    let mut r = DenseMatrix::zeros(k, n);
    let mut i = 0;
    while i < k {
        let nb = cfg.block_size.min(k - i);
        let state = sample_qrcp_with_floor(&sample, nb, floor)?;
        let got = state.achieved();
        if got == 0 {
            break;
        }
        for mat in [&mut work, &mut wt, &mut r] {
            permute_tail_cols(mat, i, &state.block_perm);
        }
        perm.permute_tail(i, &state.block_perm);
        let next = i + got;

        // Selected columns with the earlier reflectors applied; rows above i
        // already sit in R.
        let mut panel = work.submatrix(i, i, m - i, got);
        if i > 0 {
            gemm(
                -1.0,
                y.view().sub(i, 0, m - i, i),
                wt.view().sub(0, i, i, got),
                1.0,
                panel.view_mut(),
            );
            counters.blas3(m - i, got, i);
        }
        let taus = panel_qr(&mut panel, 0, got);
        let block = ReflectorBlock::from_packed(&panel, 0, got, taus)?;
        r.set_submatrix(i, i, &panel.upper_trapezoid(got));

        let mut y2 = DenseMatrix::zeros(m, got);
        y2.set_submatrix(i, 0, &block.y);
        t = wy_compose(&y.submatrix(0, 0, m, i), &t, &y2, &block.t)?;
        y.set_submatrix(0, i, &y2);
        tau.extend_from_slice(&block.tau);

        let nt = n - next;
        if nt > 0 {
            // W2ᵀ = T2ᵀ·(Y2ᵀ·A − Y2ᵀ·Y1·W1ᵀ) on the trailing columns.
            let y2v = y.view().sub(i, i, m - i, got);
            let mut inner = DenseMatrix::zeros(got, nt);
            gemm(
                1.0,
                y2v.t(),
                work.view().sub(i, next, m - i, nt),
                0.0,
                inner.view_mut(),
            );
            counters.pass();
            counters.blas3(got, nt, m - i);
            if i > 0 {
                let mut cross = DenseMatrix::zeros(got, i);
                gemm(
                    1.0,
                    y2v.t(),
                    y.view().sub(i, 0, m - i, i),
                    0.0,
                    cross.view_mut(),
                );
                counters.blas3(got, i, m - i);
                gemm(
                    -1.0,
                    cross.view(),
                    wt.view().sub(0, next, i, nt),
                    1.0,
                    inner.view_mut(),
                );
            }
            let mut w2 = DenseMatrix::zeros(got, nt);
            gemm(1.0, block.t.view().t(), inner.view(), 0.0, w2.view_mut());
            wt.set_submatrix(i, next, &w2);

            let mut rows = work.submatrix(i, next, got, nt);
            gemm(
                -1.0,
                y.view().sub(i, 0, got, next),
                wt.view().sub(0, next, next, nt),
                1.0,
                rows.view_mut(),
            );
            r.set_submatrix(i, next, &rows);
        }

        i = next;
        if got < nb || i >= k {
            break;
        }
        let r11 = r.submatrix(i - got, i - got, got, got);
        let r12 = r.submatrix(i - got, i, got, n - i);
        sample = match sample_update(&state, &r11, &r12) {
            Ok(b) => b,
            Err(Error::RankDeficient { .. }) => break,
            Err(e) => return Err(e),
        };
    }

    Ok(TruncatedFactorization {
        q: ReflectorBlock {
            offset: 0,
            y: y.submatrix(0, 0, m, i),
            tau,
            t,
        },
        w_t: wt.submatrix(0, 0, i, n),
        r: r.submatrix(0, 0, i, n),
        perm,
        achieved_rank: i,
        counters,
    })
}
