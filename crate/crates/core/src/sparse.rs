//! Compressed sparse row matrices for graph propagation.
//!
//! All matrices built in this crate (adjacency, normalized adjacency,
//! smoothing operator) are symmetric, which the autodiff backward pass
//! relies on when propagating gradients through a sparse product.

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Symmetric sparse N×N matrix in CSR form with a fixed, deterministic
/// entry order (rows ascending, columns ascending within a row).
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseMatrix {
    /// Builds from (row, col, value) triplets. Triplets are sorted and
    /// duplicates summed; symmetry is the caller's responsibility and is
    /// checked in debug builds.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut sorted: Vec<(usize, usize, f64)> = triplets.to_vec();
        for &(r, c, _) in &sorted {
            if r >= n || c >= n {
                return Err(Error::InvalidArgument(format!(
                    "triplet ({r}, {c}) out of bounds for n={n}"
                )));
            }
        }
        sorted.sort_by_key(|&(r, c, _)| (r, c));

        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(sorted.len());
        for &(r, c, v) in &sorted {
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }

        let mut row_ptr = vec![0usize; n + 1];
        for &(r, _, _) in &merged {
            row_ptr[r + 1] += 1;
        }
        for r in 0..n {
            row_ptr[r + 1] += row_ptr[r];
        }

        let m = Self {
            n,
            row_ptr,
            col_idx: merged.iter().map(|t| t.1).collect(),
            vals: merged.iter().map(|t| t.2).collect(),
        };
        debug_assert!(m.is_symmetric(1e-12), "sparse matrix must be symmetric");
        Ok(m)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Entries of row `r` as (column, value) pairs.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let lo = self.row_ptr[r];
        let hi = self.row_ptr[r + 1];
        self.col_idx[lo..hi]
            .iter()
            .zip(&self.vals[lo..hi])
            .map(|(&c, &v)| (c, v))
    }

    /// y = M·x for a length-n vector.
    pub fn apply_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n {
            return Err(Error::ShapeMismatch {
                op: "sparse apply",
                left: vec![self.n, self.n],
                right: vec![x.len()],
            });
        }
        let mut y = vec![0.0; self.n];
        for r in 0..self.n {
            let mut acc = 0.0;
            for (c, v) in self.row(r) {
                acc += v * x[c];
            }
            y[r] = acc;
        }
        Ok(y)
    }

    /// Y = M·X for a dense N×d matrix.
    pub fn apply_dense(&self, x: &Tensor) -> Result<Tensor> {
        let (rows, cols) = x.dims2()?;
        if rows != self.n {
            return Err(Error::ShapeMismatch {
                op: "sparse apply",
                left: vec![self.n, self.n],
                right: x.shape().to_vec(),
            });
        }
        let mut out = Tensor::zeros(&[self.n, cols]);
        for r in 0..self.n {
            for (c, v) in self.row(r) {
                let src = x.row_slice(c);
                let dst = out.row_slice_mut(r);
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += v * s;
                }
            }
        }
        Ok(out)
    }

    pub fn to_dense(&self) -> Tensor {
        let mut out = Tensor::zeros(&[self.n, self.n]);
        for r in 0..self.n {
            for (c, v) in self.row(r) {
                out.set2(r, c, v);
            }
        }
        out
    }

    fn is_symmetric(&self, tol: f64) -> bool {
        for r in 0..self.n {
            for (c, v) in self.row(r) {
                let back = self.row(c).find(|&(cc, _)| cc == r).map(|(_, vv)| vv);
                match back {
                    Some(vv) if (vv - v).abs() <= tol => {}
                    _ => return false,
                }
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn apply_matches_dense() {
        // path graph 0-1-2 adjacency
        let m = SparseMatrix::from_triplets(
            3,
            &[(0, 1, 1.0), (1, 0, 1.0), (1, 2, 1.0), (2, 1, 1.0)],
        )
        .unwrap();
        let y = m.apply_vec(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(y, vec![2.0, 4.0, 2.0]);
        assert_eq!(m.nnz(), 4);
    }

    #[test]
    fn duplicate_triplets_are_summed() {
        let m = SparseMatrix::from_triplets(2, &[(0, 1, 0.5), (0, 1, 0.5), (1, 0, 1.0)]).unwrap();
        let y = m.apply_vec(&[0.0, 1.0]).unwrap();
        assert_eq!(y, vec![1.0, 0.0]);
    }

    #[test]
    fn out_of_bounds_rejected() {
        assert!(SparseMatrix::from_triplets(2, &[(0, 2, 1.0)]).is_err());
    }
}
