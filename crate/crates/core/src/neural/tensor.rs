use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major matrix of reals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor2 {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Tensor2 {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!("{} values for a {rows}x{cols} tensor", data.len())));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("tensor values"));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::ShapeMismatch("ragged rows".into()));
        }
        Self::from_vec(rows.len(), cols, rows.concat())
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn fill(&mut self, v: f64) {
        self.data.fill(v);
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Self { rows: idx.len(), cols: self.cols, data }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|v| f(*v)).collect() }
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// `c = alpha * op(a) * op(b) + beta * c`, where `op` optionally transposes.
pub fn gemm(alpha: f64, a: &Tensor2, ta: bool, b: &Tensor2, tb: bool, beta: f64, c: &mut Tensor2) {
    let (m, k) = if ta { (a.cols, a.rows) } else { (a.rows, a.cols) };
    let (k2, n) = if tb { (b.cols, b.rows) } else { (b.rows, b.cols) };
    assert_eq!(k, k2, "inner dimensions differ");
    assert_eq!((c.rows, c.cols), (m, n), "output shape differs");
    let (rsa, csa) = if ta { (1, a.cols as isize) } else { (a.cols as isize, 1) };
    let (rsb, csb) = if tb { (1, b.cols as isize) } else { (b.cols as isize, 1) };
    // SAFETY: strides and extents describe exactly the buffers above.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            alpha,
            a.data.as_ptr(),
            rsa,
            csa,
            b.data.as_ptr(),
            rsb,
            csb,
            beta,
            c.data.as_mut_ptr(),
            c.cols as isize,
            1,
        );
    }
}

pub fn matmul(a: &Tensor2, b: &Tensor2) -> Tensor2 {
    let mut c = Tensor2::zeros(a.rows, b.cols);
    gemm(1.0, a, false, b, false, 0.0, &mut c);
    c
}

/// Adds `bias` (1 x cols) to every row.
pub fn add_row(x: &mut Tensor2, bias: &Tensor2) {
    for r in 0..x.rows {
        for (v, b) in x.row_mut(r).iter_mut().zip(&bias.data) {
            *v += b;
        }
    }
}

/// Accumulates column sums of `x` into `acc` (1 x cols).
pub fn add_col_sums(acc: &mut Tensor2, x: &Tensor2) {
    for r in 0..x.rows {
        for (a, v) in acc.data.iter_mut().zip(x.row(r)) {
            *a += v;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(a: &Tensor2, b: &Tensor2) -> Tensor2 {
        let mut c = Tensor2::zeros(a.rows(), b.cols());
        for i in 0..a.rows() {
            for j in 0..b.cols() {
                c.data_mut()[i * b.cols() + j] = (0..a.cols()).map(|k| a.get(i, k) * b.get(k, j)).sum();
            }
        }
        c
    }

    fn transpose(a: &Tensor2) -> Tensor2 {
        let mut t = Tensor2::zeros(a.cols(), a.rows());
        for i in 0..a.rows() {
            for j in 0..a.cols() {
                t.data_mut()[j * a.rows() + i] = a.get(i, j);
            }
        }
        t
    }

    #[test]
    fn gemm_matches_naive_for_all_transposes() {
        let a = Tensor2::from_vec(3, 4, (0..12).map(|v| v as f64 * 0.5 - 2.0).collect()).unwrap();
        let b = Tensor2::from_vec(4, 2, (0..8).map(|v| (v as f64).sin()).collect()).unwrap();
        let want = naive(&a, &b);
        for (x, y) in matmul(&a, &b).data().iter().zip(want.data()) {
            assert!((x - y).abs() < 1e-12);
        }
        let mut c = Tensor2::zeros(3, 2);
        gemm(1.0, &transpose(&a), true, &transpose(&b), true, 0.0, &mut c);
        for (x, y) in c.data().iter().zip(want.data()) {
            assert!((x - y).abs() < 1e-12);
        }
        let mut c2 = want.clone();
        gemm(1.0, &a, false, &transpose(&b), true, 1.0, &mut c2);
        for (x, y) in c2.data().iter().zip(want.data()) {
            assert!((x - 2.0 * y).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_shapes_and_values() {
        assert!(Tensor2::from_vec(2, 2, vec![1.0; 3]).is_err());
        assert!(Tensor2::from_vec(1, 1, vec![f64::NAN]).is_err());
        assert!(Tensor2::from_rows(&[vec![1.0], vec![1.0, 2.0]]).is_err());
    }
}
