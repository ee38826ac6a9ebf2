use crate::counters::CommCounters;
use crate::error::Result;
use crate::matrix::DenseMatrix;
use crate::permutation::PermutationVector;
use crate::pivot::qr_blocked;
use crate::sketch::SketchConfig;
use crate::svd::jacobi_svd;

use super::{trqrcp, trqrcp_unchecked};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TuxvOptions {
    /// Number of alternating power steps after the initial LQ (`j_max`).
    pub iterations: usize,
    /// Also compute the exact singular values of the small core `X`.
    pub refine: bool,
    /// Lift the `k ≤ min(m, n)/2` limit of the truncated factorization.
    pub unchecked_rank: bool,
}

impl Default for TuxvOptions {
    fn default() -> Self {
        Self {
            iterations: 1,
            refine: false,
            unchecked_rank: false,
        }
    }
}

/// `A ≈ U·X·Vᵀ` with orthonormal `U` (`m × r`), `V` (`n × r`) and a
/// triangular `r × r` core.
#[derive(Debug, Clone)]
pub struct TuxvResult {
    pub u: DenseMatrix,
    pub x: DenseMatrix,
    pub v: DenseMatrix,
    /// `X` is lower triangular (after an even number of steps) or upper.
    pub lower: bool,
    /// `|diag X|`, estimates of the leading singular values.
    pub sigma_est: Vec<f64>,
    pub sigma_refined: Option<Vec<f64>>,
    /// Pivots of the underlying truncated QRCP.
    pub perm: PermutationVector,
    pub counters: CommCounters,
}

impl TuxvResult {
    pub fn rank(&self) -> usize {
        self.x.rows()
    }

    pub fn approximation(&self) -> DenseMatrix {
        let ux = self.u.matmul(&self.x).expect("conforming factors");
        ux.matmul(&self.v.transpose()).expect("conforming factors")
    }

    pub fn error(&self, a: &DenseMatrix) -> Result<f64> {
        Ok(a.sub(&self.approximation())?.frob_norm())
    }
}

/// Low-rank approximation from a truncated randomized QRCP followed by an LQ
/// of `R·Pᵀ` and `iterations` alternating QR steps against `A`.
pub fn tuxv(
    a: &DenseMatrix,
    k: usize,
    cfg: &SketchConfig,
    opts: TuxvOptions,
) -> Result<TuxvResult> {
    let f = if opts.unchecked_rank {
        trqrcp_unchecked(a, k, cfg)?
    } else {
        trqrcp(a, k, cfg)?
    };
    let (m, n) = a.shape();
    let r = f.achieved_rank;
    let mut counters = f.counters;
    if r == 0 {
        return Ok(TuxvResult {
            u: DenseMatrix::zeros(m, 0),
            x: DenseMatrix::zeros(0, 0),
            v: DenseMatrix::zeros(n, 0),
            lower: true,
            sigma_est: Vec::new(),
            sigma_refined: opts.refine.then(Vec::new),
            perm: f.perm,
            counters,
        });
    }

    let mut u = f.q_thin(r);
    let z0 = f.perm.unapply_cols(&f.r)?;
    let (mut v, xt) = thin_qr(&z0.transpose())?;
    let mut x = xt.transpose();
    let mut lower = true;
    for step in 1..=opts.iterations {
        counters.pass();
        if step % 2 == 1 {
            let z = a.matmul(&v)?;
            counters.blas3(m, r, n);
            (u, x) = thin_qr(&z)?;
            lower = false;
        } else {
            let z = u.t_matmul(a)?;
            counters.blas3(r, n, m);
            let (q, xt) = thin_qr(&z.transpose())?;
            v = q;
            x = xt.transpose();
            lower = true;
        }
    }

    let sigma_est = (0..r).map(|i| x[(i, i)].abs()).collect();
    let sigma_refined = if opts.refine {
        Some(jacobi_svd(&x)?.sigma)
    } else {
        None
    };
    Ok(TuxvResult {
        u,
        x,
        v,
        lower,
        sigma_est,
        sigma_refined,
        perm: f.perm,
        counters,
    })
}

/// Thin `Z = Q·R` for a tall `Z`.
fn thin_qr(z: &DenseMatrix) -> Result<(DenseMatrix, DenseMatrix)> {
    let c = z.cols();
    let f = qr_blocked(z, c, c.clamp(1, 32))?;
    Ok((f.q_thin(z.rows(), c), f.r))
}
