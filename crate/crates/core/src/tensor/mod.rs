//! Dense 64-bit tensors with reverse-mode gradient accumulation.
//!
//! [`Tensor`] is a plain row-major value type (rank 1 or 2 — everything the
//! model layers need). [`Tape`] records executed operations; [`Var`] is a
//! handle to a tape node. Calling [`Tape::backward`] walks the record in
//! reverse execution order, accumulating gradients additively on fan-out.

mod tape;

pub use tape::{grad_check, grad_check_multi, concat_cols, Gradients, Tape, Var};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major dense array of 64-bit reals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn new(shape: &[usize], data: Vec<f64>) -> Result<Self> {
        let expect: usize = shape.iter().product();
        if shape.is_empty() || shape.len() > 2 || data.len() != expect {
            return Err(Error::InvalidArgument(format!(
                "tensor shape {shape:?} incompatible with {} values",
                data.len()
            )));
        }
        Ok(Self {
            shape: shape.to_vec(),
            data,
        })
    }

    pub fn zeros(shape: &[usize]) -> Self {
        Self {
            shape: shape.to_vec(),
            data: vec![0.0; shape.iter().product()],
        }
    }

    pub fn full(shape: &[usize], v: f64) -> Self {
        Self {
            shape: shape.to_vec(),
            data: vec![v; shape.iter().product()],
        }
    }

    pub fn scalar(v: f64) -> Self {
        Self {
            shape: vec![1],
            data: vec![v],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::InvalidArgument("ragged rows".into()));
        }
        Ok(Self {
            shape: vec![r, c],
            data: rows.iter().flatten().copied().collect(),
        })
    }

    /// Identity matrix.
    pub fn eye(n: usize) -> Self {
        let mut t = Self::zeros(&[n, n]);
        for i in 0..n {
            t.set2(i, i, 1.0);
        }
        t
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// (rows, cols); a rank-1 tensor of length n is treated as n×1.
    pub fn dims2(&self) -> Result<(usize, usize)> {
        match self.shape.len() {
            1 => Ok((self.shape[0], 1)),
            2 => Ok((self.shape[0], self.shape[1])),
            _ => Err(Error::InvalidArgument(format!(
                "expected rank 1 or 2, got shape {:?}",
                self.shape
            ))),
        }
    }

    pub fn get2(&self, i: usize, j: usize) -> f64 {
        let (_, c) = self.dims2().expect("rank <= 2");
        self.data[i * c + j]
    }

    pub fn set2(&mut self, i: usize, j: usize, v: f64) {
        let (_, c) = self.dims2().expect("rank <= 2");
        self.data[i * c + j] = v;
    }

    pub fn row_slice(&self, i: usize) -> &[f64] {
        let (_, c) = self.dims2().expect("rank <= 2");
        &self.data[i * c..(i + 1) * c]
    }

    pub fn row_slice_mut(&mut self, i: usize) -> &mut [f64] {
        let (_, c) = self.dims2().expect("rank <= 2");
        &mut self.data[i * c..(i + 1) * c]
    }

    pub fn col(&self, j: usize) -> Vec<f64> {
        let (r, c) = self.dims2().expect("rank <= 2");
        (0..r).map(|i| self.data[i * c + j]).collect()
    }

    pub fn set_col(&mut self, j: usize, values: &[f64]) {
        let (r, c) = self.dims2().expect("rank <= 2");
        assert_eq!(values.len(), r);
        for (i, &v) in values.iter().enumerate() {
            self.data[i * c + j] = v;
        }
    }

    pub fn is_all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Tensor {
        Tensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn transpose(&self) -> Result<Tensor> {
        let (r, c) = self.dims2()?;
        let mut out = Tensor::zeros(&[c, r]);
        for i in 0..r {
            for j in 0..c {
                out.data[j * r + i] = self.data[i * c + j];
            }
        }
        Ok(out)
    }

    /// self · other for 2-d operands.
    pub fn matmul(&self, other: &Tensor) -> Result<Tensor> {
        let (m, k) = self.dims2()?;
        let (k2, n) = other.dims2()?;
        if k != k2 {
            return Err(Error::ShapeMismatch {
                op: "matmul",
                left: self.shape.clone(),
                right: other.shape.clone(),
            });
        }
        let mut out = Tensor::zeros(&[m, n]);
        if m == 0 || k == 0 || n == 0 {
            return Ok(out);
        }
        unsafe {
            matrixmultiply::dgemm(
                m,
                k,
                n,
                1.0,
                self.data.as_ptr(),
                k as isize,
                1,
                other.data.as_ptr(),
                n as isize,
                1,
                0.0,
                out.data.as_mut_ptr(),
                n as isize,
                1,
            );
        }
        Ok(out)
    }

    /// self · otherᵀ without materializing the transpose.
    pub fn matmul_nt(&self, other: &Tensor) -> Result<Tensor> {
        let (m, k) = self.dims2()?;
        let (n, k2) = other.dims2()?;
        if k != k2 {
            return Err(Error::ShapeMismatch {
                op: "matmul_nt",
                left: self.shape.clone(),
                right: other.shape.clone(),
            });
        }
        let mut out = Tensor::zeros(&[m, n]);
        if m == 0 || k == 0 || n == 0 {
            return Ok(out);
        }
        unsafe {
            matrixmultiply::dgemm(
                m,
                k,
                n,
                1.0,
                self.data.as_ptr(),
                k as isize,
                1,
                other.data.as_ptr(),
                1,
                k as isize,
                0.0,
                out.data.as_mut_ptr(),
                n as isize,
                1,
            );
        }
        Ok(out)
    }

    /// Horizontal concatenation of two matrices with equal row counts.
    pub fn hcat(a: &Tensor, b: &Tensor) -> Result<Tensor> {
        let (ra, ca) = a.dims2()?;
        let (rb, cb) = b.dims2()?;
        if ra != rb {
            return Err(Error::ShapeMismatch {
                op: "hcat",
                left: a.shape.clone(),
                right: b.shape.clone(),
            });
        }
        let mut out = Tensor::zeros(&[ra, ca + cb]);
        for r in 0..ra {
            out.row_slice_mut(r)[..ca].copy_from_slice(a.row_slice(r));
            out.row_slice_mut(r)[ca..].copy_from_slice(b.row_slice(r));
        }
        Ok(out)
    }

    /// selfᵀ · other without materializing the transpose.
    pub fn matmul_tn(&self, other: &Tensor) -> Result<Tensor> {
        let (k, m) = self.dims2()?;
        let (k2, n) = other.dims2()?;
        if k != k2 {
            return Err(Error::ShapeMismatch {
                op: "matmul_tn",
                left: self.shape.clone(),
                right: other.shape.clone(),
            });
        }
        let mut out = Tensor::zeros(&[m, n]);
        if m == 0 || k == 0 || n == 0 {
            return Ok(out);
        }
        unsafe {
            matrixmultiply::dgemm(
                m,
                k,
                n,
                1.0,
                self.data.as_ptr(),
                1,
                m as isize,
                other.data.as_ptr(),
                n as isize,
                1,
                0.0,
                out.data.as_mut_ptr(),
                n as isize,
                1,
            );
        }
        Ok(out)
    }
}
