#![allow(dead_code)]

use rqrcp_core::householder::apply_qt_left;
use rqrcp_core::sketch::{sample_build, sample_qrcp, sample_update};
use rqrcp_core::{giid, qr_blocked, DenseMatrix};

pub fn lower_median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    v[(v.len() - 1) / 2]
}

pub fn rel_err(a: &DenseMatrix, approx: &DenseMatrix) -> f64 {
    a.sub(approx).unwrap().frob_norm() / a.frob_norm()
}

/// Two-sample Kolmogorov–Smirnov statistic.
pub fn ks_statistic(x: &[f64], y: &[f64]) -> f64 {
    let mut x = x.to_vec();
    let mut y = y.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < x.len() && j < y.len() {
        let t = x[i].min(y[j]);
        while i < x.len() && x[i] <= t {
            i += 1;
        }
        while j < y.len() && y[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / x.len() as f64 - j as f64 / y.len() as f64).abs());
    }
    d
}

/// Critical value of the two-sample KS test at the 1% level.
pub fn ks_critical_1pct(n: usize, m: usize) -> f64 {
    let (n, m) = (n as f64, m as f64);
    1.628 * ((n + m) / (n * m)).sqrt()
}

/// Runs `blocks` pivot blocks by hand, carrying the compression matrix
/// explicitly: after each block `Ω ← (Uᵀ·Ω·Q)(:, b+1:)`. Returns the worst
/// relative gap between the updated sample and `Ω·A_trailing`.
pub fn tracked_sample_gap(a: &DenseMatrix, b: usize, p: usize, blocks: usize, seed: u64) -> f64 {
    let mut trailing = a.clone();
    let mut omega = giid(b + p, a.rows(), seed);
    let mut sample = sample_build(&omega, &trailing).unwrap();
    let mut worst = 0.0f64;
    for _ in 0..blocks {
        let (m, n) = trailing.shape();
        let state = sample_qrcp(&sample, b).unwrap();
        let ap = state.block_perm.apply_cols(&trailing).unwrap();
        let qr = qr_blocked(&ap, b, b).unwrap();
        let block = &qr.blocks[0];
        let qta = apply_qt_left(block, &ap).unwrap();
        let r11 = qta.submatrix(0, 0, b, b).upper_trapezoid(b);
        let r12 = qta.submatrix(0, b, b, n - b);
        let updated = sample_update(&state, &r11, &r12).unwrap();

        let ut_omega = apply_qt_left(&state.u, &omega).unwrap();
        // Ω·Q = (Qᵀ·Ωᵀ)ᵀ
        let rotated = apply_qt_left(block, &ut_omega.transpose())
            .unwrap()
            .transpose();
        omega = rotated.submatrix(0, b, rotated.rows(), m - b);
        trailing = qta.submatrix(b, b, m - b, n - b);
        let oracle = omega.matmul(&trailing).unwrap();
        worst = worst.max(updated.sub(&oracle).unwrap().max_abs() / oracle.max_abs());
        sample = updated;
    }
    worst
}
