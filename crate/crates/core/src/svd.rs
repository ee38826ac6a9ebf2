//! One-sided (Hestenes) Jacobi SVD. This is the optimal-error baseline for
//! quality comparisons, not a production kernel: it is `O(mn²)` per sweep.

use crate::error::{Error, Result};
use crate::matrix::{dot, norm2, DenseMatrix, ULP};

const MAX_SWEEPS: usize = 80;

/// Thin SVD `A = U·diag(sigma)·Vᵀ` with `r = min(m, n)` columns in `U` and `V`.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: DenseMatrix,
    pub sigma: Vec<f64>,
    pub v: DenseMatrix,
}

impl Svd {
    /// `U_k·Σ_k·V_kᵀ`.
    pub fn truncated(&self, k: usize) -> DenseMatrix {
        let k = k.min(self.sigma.len());
        let (m, n) = (self.u.rows(), self.v.rows());
        let us = DenseMatrix::from_fn(m, k, |i, j| self.u[(i, j)] * self.sigma[j]);
        let vk = self.v.submatrix(0, 0, n, k);
        us.matmul(&vk.transpose()).expect("conforming factors")
    }

    /// Eckart–Young optimal rank-`k` Frobenius error, `sqrt(Σ_{i>k} σ_i²)`.
    pub fn tail_norm(&self, k: usize) -> f64 {
        norm2(&self.sigma[k.min(self.sigma.len())..])
    }
}

pub fn jacobi_svd(a: &DenseMatrix) -> Result<Svd> {
    let (m, n) = a.shape();
    if m.min(n) > 4096 {
        return Err(Error::InvalidArgument(format!(
            "jacobi_svd is a desk-scale baseline; {m}x{n} is too large"
        )));
    }
    if m < n {
        let t = jacobi_tall(&a.transpose());
        return Ok(Svd {
            u: t.v,
            sigma: t.sigma,
            v: t.u,
        });
    }
    Ok(jacobi_tall(a))
}

fn jacobi_tall(a: &DenseMatrix) -> Svd {
    let (m, n) = a.shape();
    let mut g = a.clone();
    let mut v = DenseMatrix::identity(n);
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = dot(g.col(p), g.col(p));
                let beta = dot(g.col(q), g.col(q));
                let gamma = dot(g.col(p), g.col(q));
                if gamma == 0.0 || gamma.abs() <= ULP * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut g, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<(usize, f64)> = (0..n).map(|j| (j, norm2(g.col(j)))).collect();
    order.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
    let sigma: Vec<f64> = order.iter().map(|&(_, s)| s).collect();
    let smax = sigma.first().copied().unwrap_or(0.0);
    let floor = smax * ULP * m as f64;

    let mut u = DenseMatrix::zeros(m, n);
    let mut vs = DenseMatrix::zeros(n, n);
    let mut pending = Vec::new();
    for (dst, &(src, s)) in order.iter().enumerate() {
        vs.col_mut(dst).copy_from_slice(v.col(src));
        if s > floor && s > 0.0 {
            for (o, x) in u.col_mut(dst).iter_mut().zip(g.col(src)) {
                *o = x / s;
            }
        } else {
            pending.push(dst);
        }
    }
    complete_orthonormal(&mut u, &pending);
    Svd { u, sigma, v: vs }
}

fn rotate(m: &mut DenseMatrix, p: usize, q: usize, c: f64, s: f64) {
    for i in 0..m.rows() {
        let (x, y) = (m[(i, p)], m[(i, q)]);
        m[(i, p)] = c * x - s * y;
        m[(i, q)] = s * x + c * y;
    }
}

/// Fills the listed columns with unit vectors orthogonal to every other
/// column, trying standard basis vectors in order.
fn complete_orthonormal(u: &mut DenseMatrix, pending: &[usize]) {
    if pending.is_empty() {
        return;
    }
    let m = u.rows();
    let mut filled: Vec<usize> = (0..u.cols()).filter(|c| !pending.contains(c)).collect();
    let mut candidate = 0;
    for &dst in pending {
        while candidate < m {
            let mut x = vec![0.0; m];
            x[candidate] = 1.0;
            candidate += 1;
            for _ in 0..2 {
                for &c in &filled {
                    let h = dot(u.col(c), &x);
                    x.iter_mut()
                        .zip(u.col(c))
                        .for_each(|(xi, ui)| *xi -= h * ui);
                }
            }
            let nx = norm2(&x);
            if nx > 0.5 {
                for (o, xi) in u.col_mut(dst).iter_mut().zip(&x) {
                    *o = xi / nx;
                }
                filled.push(dst);
                break;
            }
        }
    }
}
