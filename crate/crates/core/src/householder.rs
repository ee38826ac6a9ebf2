//! Householder reflectors and their compact-WY blocking.
//!
//! A reflector is stored LAPACK style: `y[0] = 1` is kept explicitly and the
//! coefficient `tau` separately, so `H = I - tau·y·yᵀ`. A block of `j`
//! reflectors is `Q = H_1 ⋯ H_j = I - Y·T·Yᵀ` with `T` upper triangular.

use crate::error::{ensure_dims, Result};
use crate::matrix::{dot, gemm, norm2, DenseMatrix, MatMut};

/// Coefficient and resulting diagonal of one reflection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reflection {
    pub tau: f64,
    pub beta: f64,
}

/// Overwrites `x` with the reflector `y` (normalized so `y[0] = 1`) that maps
/// the original `x` onto `beta·e₁`, `beta = -sign(x₀)·‖x‖₂`.
///
/// A zero vector yields the identity reflection `y = e₁, tau = 0, beta = 0`.
pub fn house_gen_in_place(x: &mut [f64]) -> Reflection {
    assert!(!x.is_empty(), "reflector of an empty vector");
    let norm = norm2(x);
    if norm == 0.0 {
        x[0] = 1.0;
        return Reflection {
            tau: 0.0,
            beta: 0.0,
        };
    }
    let alpha = x[0];
    let beta = if alpha >= 0.0 { -norm } else { norm };
    // Unnormalized y = x - beta·e₁ has y₀ = alpha - beta, and τ = 2/(yᵀy).
    // Rescaling y by 1/y₀ multiplies τ by y₀².
    let y0 = alpha - beta;
    for v in &mut x[1..] {
        *v /= y0;
    }
    x[0] = 1.0;
    let tau = (beta - alpha) / beta;
    Reflection { tau, beta }
}

/// Allocating wrapper around [`house_gen_in_place`]: returns `(y, tau, beta)`.
pub fn house_gen(a: &[f64]) -> (Vec<f64>, f64, f64) {
    let mut y = a.to_vec();
    let r = house_gen_in_place(&mut y);
    (y, r.tau, r.beta)
}

/// Applies `H = I - tau·y·yᵀ` from the left to every column of `c`.
pub(crate) fn apply_reflection(y: &[f64], tau: f64, mut c: MatMut<'_>) {
    if tau == 0.0 {
        return;
    }
    debug_assert_eq!(y.len(), c.rows());
    for j in 0..c.cols() {
        let col = c.col_mut(j);
        let w = tau * dot(y, col);
        if w != 0.0 {
            col.iter_mut().zip(y).for_each(|(v, yi)| *v -= w * yi);
        }
    }
}

/// Forward accumulation of the connection matrix: `I - Y·T·Yᵀ = H_1 ⋯ H_j`.
pub fn wy_build_t(y: &DenseMatrix, tau: &[f64]) -> Result<DenseMatrix> {
    let j = y.cols();
    ensure_dims!(
        tau.len() == j,
        "{} coefficients for {} reflectors",
        tau.len(),
        j
    );
    ensure_dims!(y.rows() >= j, "{} reflectors of length {}", j, y.rows());
    let mut t = DenseMatrix::zeros(j, j);
    for i in 0..j {
        t[(i, i)] = tau[i];
        if i == 0 || tau[i] == 0.0 {
            continue;
        }
        // t(0..i, i) = -tau_i · T(0..i, 0..i) · Y(:, 0..i)ᵀ y_i
        let yi = &y.col(i)[i..];
        let z: Vec<f64> = (0..i).map(|c| -tau[i] * dot(&y.col(c)[i..], yi)).collect();
        for r in 0..i {
            let s: f64 = (r..i).map(|c| t[(r, c)] * z[c]).sum();
            t[(r, i)] = s;
        }
    }
    Ok(t)
}

/// Connection matrix of `(I - Y1 T1 Y1ᵀ)(I - Y2 T2 Y2ᵀ) = I - [Y1 Y2] T [Y1 Y2]ᵀ`:
/// `T = [T1, -T1·Y1ᵀ·Y2·T2; 0, T2]`.
pub fn wy_compose(
    y1: &DenseMatrix,
    t1: &DenseMatrix,
    y2: &DenseMatrix,
    t2: &DenseMatrix,
) -> Result<DenseMatrix> {
    ensure_dims!(
        y1.rows() == y2.rows(),
        "reflector blocks of heights {} and {}",
        y1.rows(),
        y2.rows()
    );
    let (j1, j2) = (y1.cols(), y2.cols());
    ensure_dims!(
        t1.shape() == (j1, j1) && t2.shape() == (j2, j2),
        "connection matrices {:?}, {:?} for {} and {} reflectors",
        t1.shape(),
        t2.shape(),
        j1,
        j2
    );
    let mut t = DenseMatrix::zeros(j1 + j2, j1 + j2);
    t.set_submatrix(0, 0, t1);
    t.set_submatrix(j1, j1, t2);
    if j1 > 0 && j2 > 0 {
        let cross = y1.t_matmul(y2)?;
        let left = t1.matmul(&cross)?;
        let mut off = DenseMatrix::zeros(j1, j2);
        gemm(-1.0, left.view(), t2.view(), 0.0, off.view_mut());
        t.set_submatrix(0, j1, &off);
    }
    Ok(t)
}

/// Compact-WY block `Q = I - Y·T·Yᵀ` acting on rows `offset..` of an
/// `offset + y.rows()`-row operand.
///
/// Column `c` of `y` has zeros above row `c` and an explicit `1.0` at row `c`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReflectorBlock {
    pub offset: usize,
    pub y: DenseMatrix,
    pub tau: Vec<f64>,
    pub t: DenseMatrix,
}

impl ReflectorBlock {
    pub fn new(offset: usize, y: DenseMatrix, tau: Vec<f64>) -> Result<Self> {
        let t = wy_build_t(&y, &tau)?;
        Ok(Self { offset, y, tau, t })
    }

    /// Block with no reflectors over `rows` rows.
    pub fn empty(rows: usize) -> Self {
        Self {
            offset: 0,
            y: DenseMatrix::zeros(rows, 0),
            tau: Vec::new(),
            t: DenseMatrix::zeros(0, 0),
        }
    }

    /// Reads `count` reflectors packed LAPACK style below the diagonal of
    /// `packed`, starting at diagonal position `(first, first)`. Rows and
    /// columns before `first` are ignored; the block acts on rows `first..`.
    pub(crate) fn from_packed(
        packed: &DenseMatrix,
        first: usize,
        count: usize,
        tau: Vec<f64>,
    ) -> Result<Self> {
        let h = packed.rows() - first;
        let y = DenseMatrix::from_fn(h, count, |i, c| match i.cmp(&c) {
            std::cmp::Ordering::Less => 0.0,
            std::cmp::Ordering::Equal => 1.0,
            std::cmp::Ordering::Greater => packed[(first + i, first + c)],
        });
        Self::new(first, y, tau)
    }

    /// Number of reflectors.
    pub fn len(&self) -> usize {
        self.y.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row count of the operands this block acts on.
    pub fn total_rows(&self) -> usize {
        self.offset + self.y.rows()
    }

    /// Same transform, re-expressed with `offset = 0` by zero-padding `y`.
    pub fn embedded(&self) -> ReflectorBlock {
        if self.offset == 0 {
            return self.clone();
        }
        let mut y = DenseMatrix::zeros(self.total_rows(), self.len());
        y.set_submatrix(self.offset, 0, &self.y);
        ReflectorBlock {
            offset: 0,
            y,
            tau: self.tau.clone(),
            t: self.t.clone(),
        }
    }

    /// `C ← Qᵀ·C` with two matrix-matrix products.
    pub fn apply_qt(&self, c: MatMut<'_>) {
        self.apply(c, true);
    }

    /// `C ← Q·C`.
    pub fn apply_q(&self, c: MatMut<'_>) {
        self.apply(c, false);
    }

    fn apply(&self, c: MatMut<'_>, transpose: bool) {
        assert_eq!(c.rows(), self.total_rows(), "reflector block height");
        let j = self.len();
        let n = c.cols();
        if j == 0 || n == 0 {
            return;
        }
        let h = self.y.rows();
        let mut c = c.sub(self.offset, 0, h, n);
        let mut w = DenseMatrix::zeros(j, n);
        gemm(1.0, self.y.view().t(), c.rb(), 0.0, w.view_mut());
        let t = if transpose {
            self.t.view().t()
        } else {
            self.t.view()
        };
        let mut tw = DenseMatrix::zeros(j, n);
        gemm(1.0, t, w.view(), 0.0, tw.view_mut());
        gemm(-1.0, self.y.view(), tw.view(), 1.0, c.reborrow());
    }

    /// Dense `Q`, `total_rows × total_rows`.
    pub fn to_dense(&self) -> DenseMatrix {
        let mut q = DenseMatrix::identity(self.total_rows());
        self.apply_q(q.view_mut());
        q
    }
}

/// `Qᵀ·A` for a reflector block, returning a new matrix.
pub fn apply_qt_left(block: &ReflectorBlock, a: &DenseMatrix) -> Result<DenseMatrix> {
    ensure_dims!(
        a.rows() == block.total_rows(),
        "block acts on {} rows, operand has {}",
        block.total_rows(),
        a.rows()
    );
    let mut out = a.clone();
    block.apply_qt(out.view_mut());
    Ok(out)
}

/// Thin orthonormal factor: the leading `cols` columns of `Q_1 ⋯ Q_s` for a
/// sequence of blocks acting on the same row space.
pub fn thin_q(blocks: &[ReflectorBlock], rows: usize, cols: usize) -> DenseMatrix {
    let mut q = DenseMatrix::eye(rows, cols);
    for block in blocks.iter().rev() {
        block.apply_q(q.view_mut());
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn explicit_reflection(y: &[f64], tau: f64) -> DenseMatrix {
        DenseMatrix::from_fn(y.len(), y.len(), |i, j| {
            let id = if i == j { 1.0 } else { 0.0 };
            id - tau * y[i] * y[j]
        })
    }

    fn lcg_matrix(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
        let mut s = seed
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        DenseMatrix::from_fn(rows, cols, |_, _| {
            s = s
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (s >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        })
    }

    /// Unit-lower-trapezoidal reflectors from a random matrix via house_gen.
    fn random_block(rows: usize, cols: usize, seed: u64) -> (DenseMatrix, Vec<f64>) {
        let mut a = lcg_matrix(rows, cols, seed);
        let mut taus = Vec::new();
        for c in 0..cols {
            let r = house_gen_in_place(&mut a.col_mut(c)[c..]);
            taus.push(r.tau);
            for i in 0..c {
                a[(i, c)] = 0.0;
            }
        }
        (a, taus)
    }

    fn product_of_reflections(y: &DenseMatrix, tau: &[f64]) -> DenseMatrix {
        let mut q = DenseMatrix::identity(y.rows());
        for (c, &t) in tau.iter().enumerate() {
            q = q.matmul(&explicit_reflection(y.col(c), t)).unwrap();
        }
        q
    }

    #[test]
    fn house_gen_unit_vector() {
        let (y, tau, beta) = house_gen(&[1.0, 0.0]);
        assert_eq!(y, vec![1.0, 0.0]);
        assert_eq!(tau, 2.0);
        assert_eq!(beta, -1.0);
        let h = explicit_reflection(&y, tau);
        assert_eq!(h[(0, 0)] * 1.0, -1.0);
        assert_eq!(h[(1, 0)], 0.0);
    }

    #[test]
    fn house_gen_three_four() {
        let (y, tau, beta) = house_gen(&[3.0, 4.0]);
        assert_eq!(beta, -5.0);
        let h = explicit_reflection(&y, tau);
        let img = [
            h[(0, 0)] * 3.0 + h[(0, 1)] * 4.0,
            h[(1, 0)] * 3.0 + h[(1, 1)] * 4.0,
        ];
        assert!((img[0] + 5.0).abs() < 1e-14);
        assert!(img[1].abs() < 1e-14);
    }

    #[test]
    fn house_gen_zero_is_identity() {
        let (y, tau, beta) = house_gen(&[0.0, 0.0]);
        assert_eq!((y, tau, beta), (vec![1.0, 0.0], 0.0, 0.0));
    }

    #[test]
    fn house_gen_single_entry() {
        let (y, tau, beta) = house_gen(&[-2.5]);
        assert_eq!((y[0], tau, beta), (1.0, 2.0, 2.5));
    }

    #[test]
    fn build_t_single_and_orthogonal_pair() {
        let y = DenseMatrix::from_rows(&[&[1.0], &[0.5]]);
        let t = wy_build_t(&y, &[1.6]).unwrap();
        assert_eq!(t, DenseMatrix::from_rows(&[&[1.6]]));

        // y1 = (1, 0, 1), y2 = (0, 1, 0): y1ᵀy2 = 0.
        let y = DenseMatrix::from_rows(&[&[1.0, 0.0], &[0.0, 1.0], &[1.0, 0.0]]);
        let t = wy_build_t(&y, &[1.0, 2.0]).unwrap();
        assert_eq!(t, DenseMatrix::diag(&[1.0, 2.0]));
        assert!(wy_build_t(&y, &[1.0]).is_err());
    }

    #[test]
    fn build_t_matches_explicit_product() {
        let (y, tau) = random_block(6, 3, 11);
        let t = wy_build_t(&y, &tau).unwrap();
        let block = ReflectorBlock {
            offset: 0,
            y: y.clone(),
            tau: tau.clone(),
            t,
        };
        let want = product_of_reflections(&y, &tau);
        let diff = block.to_dense().sub(&want).unwrap().frob_norm();
        assert!(diff <= 1e-13, "diff {diff}");
    }

    #[test]
    fn compose_with_empty_and_decoupled() {
        let (y1, tau1) = random_block(5, 2, 3);
        let t1 = wy_build_t(&y1, &tau1).unwrap();
        let t = wy_compose(
            &y1,
            &t1,
            &DenseMatrix::zeros(5, 0),
            &DenseMatrix::zeros(0, 0),
        )
        .unwrap();
        assert_eq!(t, t1);

        let ya = DenseMatrix::from_rows(&[&[1.0], &[0.0], &[1.0], &[0.0]]);
        let yb = DenseMatrix::from_rows(&[&[0.0], &[1.0], &[0.0], &[2.0]]);
        let t = wy_compose(
            &ya,
            &DenseMatrix::diag(&[1.0]),
            &yb,
            &DenseMatrix::diag(&[0.4]),
        )
        .unwrap();
        assert_eq!(t, DenseMatrix::diag(&[1.0, 0.4]));
        assert!(wy_compose(&ya, &DenseMatrix::diag(&[1.0]), &y1, &t1).is_err());
    }

    #[test]
    fn compose_matches_dense_product() {
        let (y1, tau1) = random_block(8, 2, 5);
        let (mut y2, tau2) = random_block(8, 2, 6);
        // Shift the second block down two rows so it follows the first.
        let shifted = y2.submatrix(0, 0, 6, 2);
        y2 = DenseMatrix::zeros(8, 2);
        y2.set_submatrix(2, 0, &shifted);
        let t1 = wy_build_t(&y1, &tau1).unwrap();
        let t2 = wy_build_t(&y2, &tau2).unwrap();
        let t = wy_compose(&y1, &t1, &y2, &t2).unwrap();
        let mut y = DenseMatrix::zeros(8, 4);
        y.set_submatrix(0, 0, &y1);
        y.set_submatrix(0, 2, &y2);
        let combined = ReflectorBlock {
            offset: 0,
            y,
            tau: vec![],
            t,
        };
        let q1 = ReflectorBlock {
            offset: 0,
            y: y1,
            tau: tau1,
            t: t1,
        }
        .to_dense();
        let q2 = ReflectorBlock {
            offset: 0,
            y: y2,
            tau: tau2,
            t: t2,
        }
        .to_dense();
        let probe = lcg_matrix(8, 3, 99);
        let lhs = combined.to_dense().matmul(&probe).unwrap();
        let rhs = q1.matmul(&q2).unwrap().matmul(&probe).unwrap();
        assert!(lhs.sub(&rhs).unwrap().max_abs() <= 1e-13);
    }

    #[test]
    fn apply_qt_cases() {
        let (y, tau) = random_block(10, 4, 17);
        let block = ReflectorBlock::new(0, y, tau).unwrap();
        let a = lcg_matrix(10, 6, 18);
        let got = apply_qt_left(&block, &a).unwrap();
        let want = block.to_dense().t_matmul(&a).unwrap();
        assert!(got.sub(&want).unwrap().frob_norm() <= 1e-12 * a.frob_norm());

        let empty = ReflectorBlock::empty(10);
        assert_eq!(apply_qt_left(&empty, &a).unwrap(), a);

        let (y, tau, _) = house_gen(&[3.0, 4.0]);
        let single =
            ReflectorBlock::new(0, DenseMatrix::from_col_major(2, 1, y).unwrap(), vec![tau])
                .unwrap();
        let out = apply_qt_left(&single, &DenseMatrix::from_rows(&[&[3.0], &[4.0]])).unwrap();
        assert!((out[(0, 0)] + 5.0).abs() < 1e-14 && out[(1, 0)].abs() < 1e-14);
        assert!(apply_qt_left(&single, &a).is_err());
    }

    #[test]
    fn offset_block_acts_on_trailing_rows() {
        let (y, tau) = random_block(5, 2, 21);
        let block = ReflectorBlock::new(3, y, tau).unwrap();
        let q = block.to_dense();
        let dense = block.embedded().to_dense();
        assert!(q.sub(&dense).unwrap().max_abs() < 1e-15);
        for i in 0..3 {
            for j in 0..8 {
                assert_eq!(q[(i, j)], if i == j { 1.0 } else { 0.0 });
            }
        }
    }

    fn orthogonality_defect(q: &DenseMatrix) -> f64 {
        q.t_matmul(q)
            .unwrap()
            .sub(&DenseMatrix::identity(q.cols()))
            .unwrap()
            .frob_norm()
    }

    fn three_blocks(seed: u64) -> Vec<(DenseMatrix, DenseMatrix)> {
        (0..3)
            .map(|b| {
                let (y, tau) = random_block(9, 2, seed + b);
                let t = wy_build_t(&y, &tau).unwrap();
                (y, t)
            })
            .collect()
    }

    fn hcat(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(a.rows(), a.cols() + b.cols());
        out.set_submatrix(0, 0, a);
        out.set_submatrix(0, a.cols(), b);
        out
    }

    proptest! {
        #[test]
        fn house_gen_reflects_onto_axis(v in proptest::collection::vec(-10.0f64..10.0, 1..12)) {
            let (y, tau, beta) = house_gen(&v);
            let h = explicit_reflection(&y, tau);
            let norm = norm2(&v);
            for i in 0..v.len() {
                let img: f64 = (0..v.len()).map(|j| h[(i, j)] * v[j]).sum();
                let want = if i == 0 { beta } else { 0.0 };
                prop_assert!((img - want).abs() <= 1e-13 * norm.max(1.0));
            }
            if v[0] != 0.0 {
                prop_assert!(beta * v[0] <= 0.0);
            }
            prop_assert!((beta.abs() - norm).abs() <= 1e-14 * norm.max(1.0));
        }

        #[test]
        fn blocks_are_orthogonal(rows in 2usize..20, seed in 0u64..1000) {
            let cols = rows.min(1 + (seed as usize % rows));
            let (y, tau) = random_block(rows, cols, seed);
            let q = ReflectorBlock::new(0, y, tau).unwrap().to_dense();
            let tol = 10.0 * (cols * rows) as f64 * ulp_of(&q);
            prop_assert!(orthogonality_defect(&q) <= tol);
        }

        #[test]
        fn compose_is_associative(seed in 0u64..500) {
            let blocks = three_blocks(seed);
            let (ya, ta) = &blocks[0];
            let (yb, tb) = &blocks[1];
            let (yc, tc) = &blocks[2];
            let t_ab = wy_compose(ya, ta, yb, tb).unwrap();
            let left = wy_compose(&hcat(ya, yb), &t_ab, yc, tc).unwrap();
            let t_bc = wy_compose(yb, tb, yc, tc).unwrap();
            let right = wy_compose(ya, ta, &hcat(yb, yc), &t_bc).unwrap();
            let y = hcat(&hcat(ya, yb), yc);
            let probe = lcg_matrix(9, 2, seed + 7);
            let apply = |t: DenseMatrix| {
                ReflectorBlock { offset: 0, y: y.clone(), tau: vec![], t }
                    .to_dense()
                    .matmul(&probe)
                    .unwrap()
            };
            prop_assert!(apply(left).sub(&apply(right)).unwrap().max_abs() <= 1e-12);
        }
    }

    fn ulp_of(q: &DenseMatrix) -> f64 {
        crate::matrix::ulp_scale(q.frob_norm())
    }
}
