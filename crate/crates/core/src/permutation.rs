use crate::error::{ensure_dims, Error, Result};
use crate::matrix::DenseMatrix;

/// Column permutation `P`: position `j` of `A·P` holds column `map[j]` of `A`.
///
/// Indices are zero based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermutationVector {
    map: Vec<usize>,
}

impl PermutationVector {
    pub fn identity(n: usize) -> Self {
        Self {
            map: (0..n).collect(),
        }
    }

    /// Validates that `map` is a bijection on `0..map.len()`.
    pub fn from_map(map: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; map.len()];
        for &c in &map {
            if c >= map.len() || seen[c] {
                return Err(Error::InvalidArgument(format!(
                    "{map:?} is not a permutation"
                )));
            }
            seen[c] = true;
        }
        Ok(Self { map })
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }

    pub fn swap(&mut self, a: usize, b: usize) {
        self.map.swap(a, b);
    }

    /// Reorders positions `start..` by a local permutation of that tail.
    pub(crate) fn permute_tail(&mut self, start: usize, local: &PermutationVector) {
        let tail: Vec<usize> = local.map.iter().map(|&t| self.map[start + t]).collect();
        self.map[start..].copy_from_slice(&tail);
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.map.len()];
        for (j, &c) in self.map.iter().enumerate() {
            inv[c] = j;
        }
        Self { map: inv }
    }

    /// `A·P`.
    pub fn apply_cols(&self, a: &DenseMatrix) -> Result<DenseMatrix> {
        ensure_dims!(
            a.cols() == self.len(),
            "permutation of length {} for {} columns",
            self.len(),
            a.cols()
        );
        let mut out = DenseMatrix::zeros(a.rows(), a.cols());
        for (j, &c) in self.map.iter().enumerate() {
            out.col_mut(j).copy_from_slice(a.col(c));
        }
        Ok(out)
    }

    /// `M·Pᵀ`: restores the original column order of a permuted matrix.
    pub fn unapply_cols(&self, m: &DenseMatrix) -> Result<DenseMatrix> {
        self.inverse().apply_cols(m)
    }
}

/// Gathers columns `start..` of `a` by a local permutation of that range.
pub(crate) fn permute_tail_cols(a: &mut DenseMatrix, start: usize, local: &PermutationVector) {
    let moved: Vec<Vec<f64>> = local
        .as_slice()
        .iter()
        .map(|&t| a.col(start + t).to_vec())
        .collect();
    for (t, col) in moved.into_iter().enumerate() {
        a.col_mut(start + t).copy_from_slice(&col);
    }
}
