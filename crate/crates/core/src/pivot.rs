//! Deterministic QR factorizations: greedy column-pivoted QR in matrix-vector
//! form, the blocked variant that defers trailing updates, and unpivoted
//! blocked QR. These are the references the randomized algorithms are judged
//! against.

use crate::counters::CommCounters;
use crate::error::{Error, Result};
use crate::householder::{apply_reflection, house_gen_in_place, thin_q, ReflectorBlock};
use crate::matrix::{dot, gemm, norm2, DenseMatrix, ULP};
use crate::permutation::PermutationVector;

/// Relative threshold below which a downdated column norm is recomputed.
pub const NORM_GUARD: f64 = 1.0 / (1u64 << 40) as f64;

/// A (possibly truncated) factorization `A·P ≈ Q(:, 1:rank)·R`.
#[derive(Debug, Clone)]
pub struct PivotedFactorization {
    /// Reflector blocks in application order; `Q = Q_1 ⋯ Q_s`.
    pub blocks: Vec<ReflectorBlock>,
    /// `achieved_rank × n` upper-trapezoidal factor, columns in pivoted order.
    pub r: DenseMatrix,
    pub perm: PermutationVector,
    pub achieved_rank: usize,
    pub counters: CommCounters,
}

impl PivotedFactorization {
    pub fn rows(&self) -> usize {
        self.blocks
            .first()
            .map_or(0, ReflectorBlock::total_rows)
            .max(self.r.rows())
    }

    /// Leading `cols` columns of `Q`.
    pub fn q_thin(&self, rows: usize, cols: usize) -> DenseMatrix {
        thin_q(&self.blocks, rows, cols)
    }

    /// `A·P` for the permutation `P` of this factorization.
    pub fn permuted(&self, a: &DenseMatrix) -> Result<DenseMatrix> {
        self.perm.apply_cols(a)
    }

    /// `Q(:, 1:k)·R(1:k, :)` in pivoted column order.
    pub fn product(&self, m: usize, k: usize) -> DenseMatrix {
        let k = k.min(self.achieved_rank);
        let q = self.q_thin(m, k);
        let r = self.r.submatrix(0, 0, k, self.r.cols());
        q.matmul(&r).expect("conforming factors")
    }

    /// `‖A·P − Q·R‖_F` over the achieved rank.
    pub fn residual(&self, a: &DenseMatrix) -> Result<f64> {
        let ap = self.permuted(a)?;
        Ok(ap
            .sub(&self.product(a.rows(), self.achieved_rank))?
            .frob_norm())
    }

    /// Rank-`k` approximant `Q(:, 1:k)·R(1:k, :)·Pᵀ` in the original column order.
    pub fn approximation(&self, m: usize, k: usize) -> DenseMatrix {
        self.perm
            .unapply_cols(&self.product(m, k))
            .expect("conforming permutation")
    }

    pub fn diag_r(&self) -> Vec<f64> {
        (0..self.achieved_rank).map(|j| self.r[(j, j)]).collect()
    }
}

/// Downdates column norms by removing the contribution of one row of `R`:
/// `norm² ← norm² − r²`.
///
/// `reference` holds each column's norm at its last exact computation. When
/// the downdated square falls to `guard·reference²` or below, cancellation
/// has destroyed its accuracy; the index is returned so the caller can
/// recompute it from the trailing column (and reset `reference`). Until then
/// the entry holds the clamped downdate.
pub fn downdate_norms(
    norms: &mut [f64],
    reference: &mut [f64],
    r_row: &[f64],
    guard: f64,
) -> Vec<usize> {
    assert_eq!(norms.len(), r_row.len());
    assert_eq!(norms.len(), reference.len());
    let mut flagged = Vec::new();
    for (c, (nrm, &r)) in norms.iter_mut().zip(r_row).enumerate() {
        if *nrm == 0.0 || r == 0.0 {
            continue;
        }
        let sq = (*nrm - r.abs()) * (*nrm + r.abs());
        let sq = sq.max(0.0);
        if sq <= guard * reference[c] * reference[c] {
            flagged.push(c);
        }
        *nrm = sq.sqrt();
    }
    flagged
}

/// Index of the largest entry; ties resolve to the lowest index.
pub(crate) fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Result of a matrix-vector QRCP run in place: `R` on and above the
/// diagonal, reflectors below it, trailing matrix updated.
pub(crate) struct PackedQrcp {
    pub perm: PermutationVector,
    pub tau: Vec<f64>,
    pub rank: usize,
}

/// Greedy max-norm QRCP for up to `k` steps. Stops once the largest trailing
/// norm is `≤ floor`.
pub(crate) fn qrcp_packed(
    a: &mut DenseMatrix,
    k: usize,
    floor: f64,
    counters: &mut CommCounters,
) -> PackedQrcp {
    let (m, n) = a.shape();
    let mut perm = PermutationVector::identity(n);
    let mut norms: Vec<f64> = (0..n).map(|c| norm2(a.col(c))).collect();
    let mut reference = norms.clone();
    let mut tau = Vec::with_capacity(k);
    for j in 0..k.min(m).min(n) {
        let p = j + argmax(&norms[j..]);
        if norms[p] <= floor {
            break;
        }
        a.swap_cols(j, p);
        perm.swap(j, p);
        norms.swap(j, p);
        reference.swap(j, p);

        let refl = house_gen_in_place(&mut a.col_mut(j)[j..]);
        let y = a.col(j)[j..].to_vec();
        let (_, right) = a.split_cols_mut(j + 1);
        let rest = right.cols();
        apply_reflection(&y, refl.tau, right.sub(j, 0, m - j, rest));
        counters.pass();
        counters.blas2(m - j, rest);
        counters.blas2(m - j, rest);
        a[(j, j)] = refl.beta;
        tau.push(refl.tau);

        let row: Vec<f64> = (j + 1..n).map(|c| a[(j, c)]).collect();
        for f in downdate_norms(
            &mut norms[j + 1..],
            &mut reference[j + 1..],
            &row,
            NORM_GUARD,
        ) {
            let c = j + 1 + f;
            let exact = norm2(&a.col(c)[j + 1..]);
            norms[c] = exact;
            reference[c] = exact;
        }
    }
    let rank = tau.len();
    PackedQrcp { perm, tau, rank }
}

fn check_rank(a: &DenseMatrix, k: usize) -> Result<()> {
    let lim = a.rows().min(a.cols());
    if k == 0 || k > lim {
        return Err(Error::InvalidArgument(format!(
            "rank {k} outside 1..={lim} for a {}x{} matrix",
            a.rows(),
            a.cols()
        )));
    }
    Ok(())
}

fn check_block(k: usize, b: usize) -> Result<()> {
    if b == 0 || b > k {
        return Err(Error::InvalidArgument(format!(
            "block size {b} outside 1..={k}"
        )));
    }
    Ok(())
}

/// Column-pivoted QR with one rank-1 trailing update per pivot.
pub fn qrcp_blas2(a: &DenseMatrix, k: usize) -> Result<PivotedFactorization> {
    check_rank(a, k)?;
    let mut work = a.clone();
    let mut counters = CommCounters::default();
    let floor = ULP * a.frob_norm();
    let packed = qrcp_packed(&mut work, k, floor, &mut counters);
    let rank = packed.rank;
    let blocks = if rank > 0 {
        vec![ReflectorBlock::from_packed(&work, 0, rank, packed.tau)?]
    } else {
        Vec::new()
    };
    Ok(PivotedFactorization {
        blocks,
        r: work.upper_trapezoid(rank),
        perm: packed.perm,
        achieved_rank: rank,
        counters,
    })
}

/// Column-pivoted QR with reflections gathered into blocks of `b`.
///
/// Within a block only the pivot column and the pivot row are brought up to
/// date; the reflector inner products `Wᵀ` are adjusted for the reflections
/// not yet applied, and the trailing matrix is updated once per block. A
/// norm that needs exact recomputation ends the block early.
pub fn qrcp_blocked(a: &DenseMatrix, k: usize, b: usize) -> Result<PivotedFactorization> {
    check_rank(a, k)?;
    check_block(k, b)?;
    let (m, n) = a.shape();
    let floor = ULP * a.frob_norm();
    let mut work = a.clone();
    let mut perm = PermutationVector::identity(n);
    let mut norms: Vec<f64> = (0..n).map(|c| norm2(a.col(c))).collect();
    let mut reference = norms.clone();
    let mut counters = CommCounters::default();
    let mut blocks = Vec::new();
    let mut exhausted = false;
    let mut i = 0;

    while i < k && !exhausted {
        let nb = b.min(k - i);
        let mut wt = DenseMatrix::zeros(nb, n - i);
        let mut taus = Vec::with_capacity(nb);
        let mut stale = Vec::new();
        let mut kk = 0;
        while kk < nb {
            let j = i + kk;
            let p = j + argmax(&norms[j..]);
            if norms[p] <= floor {
                exhausted = true;
                break;
            }
            work.swap_cols(j, p);
            perm.swap(j, p);
            norms.swap(j, p);
            reference.swap(j, p);
            wt.swap_cols(j - i, p - i);

            // Bring the pivot column up to date with this block's reflections.
            for q in 0..kk {
                let w = wt[(q, j - i)];
                if w == 0.0 {
                    continue;
                }
                for r in j..m {
                    let yq = work[(r, i + q)];
                    work[(r, j)] -= yq * w;
                }
            }

            let refl = house_gen_in_place(&mut work.col_mut(j)[j..]);
            let y = work.col(j)[j..].to_vec();

            // Adjusted inner products: wᵀ = τ(yᵀA − (yᵀY)Wᵀ).
            let yty: Vec<f64> = (0..kk).map(|q| dot(&y, &work.col(i + q)[j..])).collect();
            for c in j + 1..n {
                let mut s = dot(&y, &work.col(c)[j..]);
                for (q, &h) in yty.iter().enumerate() {
                    s -= h * wt[(q, c - i)];
                }
                wt[(kk, c - i)] = refl.tau * s;
            }
            counters.pass();
            counters.blas2(m - j, n - j - 1);

            // Row j of R: A(j, :) − Y(j, :)·Wᵀ.
            for c in j + 1..n {
                let mut s = wt[(kk, c - i)];
                for q in 0..kk {
                    s += work[(j, i + q)] * wt[(q, c - i)];
                }
                work[(j, c)] -= s;
            }
            work[(j, j)] = refl.beta;
            taus.push(refl.tau);
            kk += 1;

            let row: Vec<f64> = (j + 1..n).map(|c| work[(j, c)]).collect();
            let flagged = downdate_norms(
                &mut norms[j + 1..],
                &mut reference[j + 1..],
                &row,
                NORM_GUARD,
            );
            if !flagged.is_empty() {
                stale.extend(flagged.into_iter().map(|f| j + 1 + f));
                break;
            }
        }

        let e = i + kk;
        if kk > 0 && e < m && e < n {
            let (left, right) = work.split_cols_mut(e);
            let y = left.rb().sub(e, i, m - e, kk);
            gemm(
                -1.0,
                y,
                wt.view().sub(0, e - i, kk, n - e),
                1.0,
                right.sub(e, 0, m - e, n - e),
            );
            counters.pass();
            counters.blas3(m - e, n - e, kk);
        }
        for c in stale {
            let exact = norm2(&work.col(c)[e.min(m)..]);
            norms[c] = exact;
            reference[c] = exact;
        }
        if kk > 0 {
            blocks.push(ReflectorBlock::from_packed(&work, i, kk, taus)?);
        }
        i = e;
    }

    Ok(PivotedFactorization {
        blocks,
        r: work.upper_trapezoid(i),
        perm,
        achieved_rank: i,
        counters,
    })
}

/// Householder QR of columns `i..i+nb` (rows `i..`) in place, reflectors
/// packed below the diagonal. Touches only the panel.
pub(crate) fn panel_qr(work: &mut DenseMatrix, i: usize, nb: usize) -> Vec<f64> {
    let m = work.rows();
    let mut taus = Vec::with_capacity(nb);
    for c in 0..nb {
        let j = i + c;
        let refl = house_gen_in_place(&mut work.col_mut(j)[j..]);
        let y = work.col(j)[j..].to_vec();
        let (_, right) = work.split_cols_mut(j + 1);
        let rest = nb - c - 1;
        apply_reflection(&y, refl.tau, right.sub(j, 0, m - j, rest));
        work[(j, j)] = refl.beta;
        taus.push(refl.tau);
    }
    taus
}

/// Factors the panel at `(i, i)` of width `nb`, then applies its block
/// reflector to columns `i+nb..` with two matrix-matrix products.
pub(crate) fn factor_and_update(
    work: &mut DenseMatrix,
    i: usize,
    nb: usize,
    counters: &mut CommCounters,
) -> Result<ReflectorBlock> {
    let (m, n) = work.shape();
    let taus = panel_qr(work, i, nb);
    let block = ReflectorBlock::from_packed(work, i, nb, taus)?;
    let rest = n - i - nb;
    if rest > 0 {
        let (_, right) = work.split_cols_mut(i + nb);
        block.apply_qt(right);
        counters.pass();
        counters.pass();
        counters.blas3(m - i, rest, nb);
        counters.blas3(m - i, rest, nb);
    }
    Ok(block)
}

/// Unpivoted blocked Householder QR of the leading `k` columns.
pub fn qr_blocked(a: &DenseMatrix, k: usize, b: usize) -> Result<PivotedFactorization> {
    check_rank(a, k)?;
    check_block(k, b)?;
    let mut work = a.clone();
    let mut counters = CommCounters::default();
    let mut blocks = Vec::new();
    let mut i = 0;
    while i < k {
        let nb = b.min(k - i);
        blocks.push(factor_and_update(&mut work, i, nb, &mut counters)?);
        i += nb;
    }
    Ok(PivotedFactorization {
        blocks,
        r: work.upper_trapezoid(k),
        perm: PermutationVector::identity(a.cols()),
        achieved_rank: k,
        counters,
    })
}

/// Blocked QR after sorting columns by descending initial 2-norm. Used as
/// the weak baseline in quality comparisons.
pub fn qr_presorted(a: &DenseMatrix, k: usize, b: usize) -> Result<PivotedFactorization> {
    let norms: Vec<f64> = (0..a.cols()).map(|c| norm2(a.col(c))).collect();
    let mut order: Vec<usize> = (0..a.cols()).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]).then(x.cmp(&y)));
    let perm = PermutationVector::from_map(order)?;
    let mut f = qr_blocked(&perm.apply_cols(a)?, k, b)?;
    f.perm = perm;
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sketch::giid;

    /// Greedy pivots recomputing every trailing norm from scratch with
    /// explicit Householder updates.
    fn from_scratch_pivots(a: &DenseMatrix, k: usize) -> Vec<usize> {
        let mut w = a.clone();
        let mut order: Vec<usize> = (0..a.cols()).collect();
        let (m, n) = a.shape();
        for j in 0..k {
            let norms: Vec<f64> = (j..n).map(|c| norm2(&w.col(c)[j..])).collect();
            let p = j + argmax(&norms);
            for c in j..n {
                assert!(norms[p - j] >= norms[c - j]);
            }
            w.swap_cols(j, p);
            order.swap(j, p);
            let mut y = w.col(j)[j..].to_vec();
            let r = house_gen_in_place(&mut y);
            for c in j..n {
                let col = &mut w.col_mut(c)[j..];
                let s = r.tau * dot(&y, col);
                col.iter_mut().zip(&y).for_each(|(v, yi)| *v -= s * yi);
            }
            let _ = m;
        }
        order[..k].to_vec()
    }

    fn rel_residual(f: &PivotedFactorization, a: &DenseMatrix) -> f64 {
        f.residual(a).unwrap() / a.frob_norm()
    }

    fn abs_diag(f: &PivotedFactorization) -> Vec<f64> {
        f.diag_r().iter().map(|x| x.abs()).collect()
    }

    #[test]
    fn diagonal_input_pivots_largest_first() {
        let a = DenseMatrix::diag(&[1.0, 2.0, 3.0]);
        let f = qrcp_blas2(&a, 3).unwrap();
        assert_eq!(f.perm.as_slice(), &[2, 1, 0]);
        assert_eq!(abs_diag(&f), vec![3.0, 2.0, 1.0]);
    }

    #[test]
    fn identity_keeps_order() {
        let f = qrcp_blas2(&DenseMatrix::identity(4), 4).unwrap();
        assert_eq!(f.perm.as_slice(), &[0, 1, 2, 3]);
        assert_eq!(abs_diag(&f), vec![1.0; 4]);
    }

    #[test]
    fn random_matches_from_scratch_oracle() {
        let a = giid(8, 6, 31);
        let f = qrcp_blas2(&a, 6).unwrap();
        assert!(rel_residual(&f, &a) <= 1e-12);
        assert_eq!(f.perm.as_slice(), from_scratch_pivots(&a, 6).as_slice());
        let d = abs_diag(&f);
        assert!(d.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn rank_argument_checked() {
        let a = giid(4, 3, 1);
        assert!(qrcp_blas2(&a, 0).is_err());
        assert!(qrcp_blas2(&a, 4).is_err());
        assert!(qrcp_blocked(&a, 3, 4).is_err());
        assert!(qrcp_blocked(&a, 3, 0).is_err());
        assert!(qr_blocked(&a, 5, 1).is_err());
    }

    #[test]
    fn downdate_basic_cases() {
        let mut norms = vec![5.0, 2.0];
        let mut reference = norms.clone();
        assert!(downdate_norms(&mut norms, &mut reference, &[0.0, 0.0], NORM_GUARD).is_empty());
        assert_eq!(norms, vec![5.0, 2.0]);
        assert!(downdate_norms(&mut norms, &mut reference, &[3.0, 0.0], NORM_GUARD).is_empty());
        assert_eq!(norms, vec![4.0, 2.0]);
    }

    #[test]
    fn downdate_cancellation_takes_recompute_path() {
        let r: f64 = 1.0 - 1e-13;
        let tail = (1.0 - r * r).sqrt();
        let col = [r, tail];
        let mut norms = vec![norm2(&col)];
        let mut reference = norms.clone();
        let flagged = downdate_norms(&mut norms, &mut reference, &[r], NORM_GUARD);
        assert_eq!(flagged, vec![0]);
        let exact = norm2(&col[1..]);
        assert!((exact - tail).abs() <= 1e-12 * tail);
    }

    #[test]
    fn blocked_matches_blas2() {
        for (m, n, k, b, seed) in [(32, 24, 24, 8, 1), (20, 30, 17, 5, 2), (9, 9, 9, 1, 3)] {
            let a = giid(m, n, seed);
            let f2 = qrcp_blas2(&a, k).unwrap();
            let f3 = qrcp_blocked(&a, k, b).unwrap();
            assert_eq!(f2.perm.as_slice(), f3.perm.as_slice(), "{m}x{n} b={b}");
            for (x, y) in abs_diag(&f2).iter().zip(abs_diag(&f3)) {
                assert!((x - y).abs() <= 1e-12 * x);
            }
            assert!(f2.r.sub(&f3.r).unwrap().max_abs() <= 1e-12 * f2.r.max_abs());
            if k == m.min(n) {
                assert!(rel_residual(&f3, &a) <= 1e-12, "{m}x{n}");
            }
        }
    }

    #[test]
    fn blocked_reverses_increasing_diagonal() {
        let a = DenseMatrix::diag(&(1..=8).map(f64::from).collect::<Vec<_>>());
        let f = qrcp_blocked(&a, 8, 4).unwrap();
        assert_eq!(f.perm.as_slice(), &[7, 6, 5, 4, 3, 2, 1, 0]);
    }

    #[test]
    fn rank_deficient_input_stops_early() {
        let b = giid(10, 3, 5);
        let c = giid(3, 8, 6);
        let a = b.matmul(&c).unwrap();
        for f in [qrcp_blas2(&a, 8).unwrap(), qrcp_blocked(&a, 8, 2).unwrap()] {
            assert_eq!(f.achieved_rank, 3);
            assert!(rel_residual(&f, &a) <= 1e-12);
        }
        let z = DenseMatrix::zeros(4, 4);
        assert_eq!(qrcp_blocked(&z, 4, 2).unwrap().achieved_rank, 0);
    }

    #[test]
    fn qr_of_orthogonal_and_swapped_identity() {
        let q = thin_q(&qr_blocked(&giid(10, 10, 3), 10, 4).unwrap().blocks, 10, 10);
        let f = qr_blocked(&q, 10, 3).unwrap();
        assert!(abs_diag(&f).iter().all(|d| (d - 1.0).abs() <= 1e-12));

        let swapped = DenseMatrix::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let f = qr_blocked(&swapped, 2, 1).unwrap();
        let abs_r = DenseMatrix::from_fn(2, 2, |i, j| f.r[(i, j)].abs());
        assert_eq!(abs_r, DenseMatrix::identity(2));
        assert_eq!(f.counters.blas2_volume, 0);
    }

    #[test]
    fn qr_leading_rows_match_qt_a() {
        let a = giid(16, 12, 8);
        let f = qr_blocked(&a, 12, 5).unwrap();
        let q = f.q_thin(16, 12);
        let qta = q.t_matmul(&a).unwrap();
        assert!(qta.sub(&f.r).unwrap().max_abs() <= 1e-12 * a.max_abs());
    }

    #[test]
    fn presorted_orders_by_norm() {
        let a = DenseMatrix::from_rows(&[&[1.0, 0.0, 3.0], &[0.0, 2.0, 0.0]]);
        let f = qr_presorted(&a, 2, 2).unwrap();
        assert_eq!(f.perm.as_slice(), &[2, 1, 0]);
    }

    #[test]
    fn counter_gap_between_pivoted_and_unpivoted() {
        let a = giid(256, 256, 12);
        let p = qrcp_blocked(&a, 256, 32).unwrap();
        let q = qr_blocked(&a, 256, 32).unwrap();
        assert!(p.counters.trailing_passes > 8 * q.counters.trailing_passes);
        assert_eq!(qrcp_blas2(&a, 256).unwrap().counters.trailing_passes, 256);
    }
}
