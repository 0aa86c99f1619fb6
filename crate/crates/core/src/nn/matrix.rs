use crate::error::{Error, Result};

/// Row-major dense matrix; one sample per row when used as a batch.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} values cannot fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Stacks equally sized rows. An empty iterator gives a `0 x cols` matrix.
    pub fn from_rows<'a, I>(cols: usize, rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a [f64]>,
    {
        let mut data = Vec::new();
        let mut n = 0;
        for row in rows {
            if row.len() != cols {
                return Err(Error::Shape(format!(
                    "row {n} has width {}, expected {cols}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
            n += 1;
        }
        Ok(Self {
            rows: n,
            cols,
            data,
        })
    }

    pub fn row_vector(values: &[f64]) -> Self {
        Self {
            rows: 1,
            cols: values.len(),
            data: values.to_vec(),
        }
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

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// `out = x · wᵀ + bias`, where `w` is `out_cols x x.cols` row-major.
pub(crate) fn affine(x: &Matrix, w: &[f64], bias: &[f64]) -> Matrix {
    let n = x.rows;
    let k = x.cols;
    let m = bias.len();
    debug_assert_eq!(w.len(), m * k);
    let mut out = Matrix::zeros(n, m);
    for i in 0..n {
        out.row_mut(i).copy_from_slice(bias);
    }
    if n > 0 && k > 0 && m > 0 {
        // SAFETY: dimensions and strides describe the three buffers exactly.
        unsafe {
            matrixmultiply::dgemm(
                n,
                k,
                m,
                1.0,
                x.data.as_ptr(),
                k as isize,
                1,
                w.as_ptr(),
                1,
                k as isize,
                1.0,
                out.data.as_mut_ptr(),
                m as isize,
                1,
            );
        }
    }
    out
}

/// `dw += dzᵀ · x` with `dz: n x m`, `x: n x k`, `dw: m x k`.
pub(crate) fn accumulate_weight_grad(dz: &Matrix, x: &Matrix, dw: &mut [f64]) {
    let n = dz.rows;
    let m = dz.cols;
    let k = x.cols;
    debug_assert_eq!(x.rows, n);
    debug_assert_eq!(dw.len(), m * k);
    if n == 0 || m == 0 || k == 0 {
        return;
    }
    // SAFETY: see `affine`.
    unsafe {
        matrixmultiply::dgemm(
            m,
            n,
            k,
            1.0,
            dz.data.as_ptr(),
            1,
            m as isize,
            x.data.as_ptr(),
            k as isize,
            1,
            1.0,
            dw.as_mut_ptr(),
            k as isize,
            1,
        );
    }
}

/// `dx += dz · w` with `dz: n x m`, `w: m x k`, `dx: n x k`.
pub(crate) fn accumulate_input_grad(dz: &Matrix, w: &[f64], dx: &mut Matrix) {
    let n = dz.rows;
    let m = dz.cols;
    let k = dx.cols;
    debug_assert_eq!(dx.rows, n);
    debug_assert_eq!(w.len(), m * k);
    if n == 0 || m == 0 || k == 0 {
        return;
    }
    // SAFETY: see `affine`.
    unsafe {
        matrixmultiply::dgemm(
            n,
            m,
            k,
            1.0,
            dz.data.as_ptr(),
            m as isize,
            1,
            w.as_ptr(),
            k as isize,
            1,
            1.0,
            dx.data.as_mut_ptr(),
            k as isize,
            1,
        );
    }
}
